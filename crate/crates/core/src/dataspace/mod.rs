//! The shared medium: assertion bag, routing, actor lifecycle, scheduling.

mod bag;
mod event;
mod runtime;

use std::fmt;

pub use bag::{AssertionBag, RetractUnheld};
pub use event::{Action, ActionRecord, Event, Patch, TurnRecord};
pub use runtime::{ActorStats, ClockMode, Dataspace, DataspaceConfig, DataspaceError, InboxHandle, TurnEnv, WakeupId};

/// Actor serial, allocated in spawn order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActorId(pub u64);

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type ActorError = Box<dyn std::error::Error + Send + Sync + 'static>;

/// An actor: a function from events to actions.
///
/// Returning an error or panicking crashes the actor. Its actions for that
/// turn are discarded and everything it asserted is withdrawn.
pub trait Behavior: 'static {
    fn handle(&mut self, event: &Event, env: &mut TurnEnv<'_>) -> Result<(), ActorError>;

    /// Called once when the actor crashes. Actions emitted here are dropped.
    fn on_crash(&mut self, _env: &mut TurnEnv<'_>) {}

    fn as_any(&self) -> &dyn std::any::Any;
}

/// Adapts a closure into a [`Behavior`].
pub struct FnBehavior<F>(pub F);

impl<F> Behavior for FnBehavior<F>
where
    F: FnMut(&Event, &mut TurnEnv<'_>) -> Result<(), ActorError> + 'static,
{
    fn handle(&mut self, event: &Event, env: &mut TurnEnv<'_>) -> Result<(), ActorError> {
        (self.0)(event, env)
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

/// Box a closure as a behavior.
pub fn behavior<F>(f: F) -> Box<dyn Behavior>
where
    F: FnMut(&Event, &mut TurnEnv<'_>) -> Result<(), ActorError> + 'static,
{
    Box::new(FnBehavior(f))
}
