use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::values::Value;

use super::{ActorId, Behavior};

/// Set-semantics delta of one turn.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Patch {
    pub added: BTreeSet<Value>,
    pub removed: BTreeSet<Value>,
}

impl Patch {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }
}

impl fmt::Display for Patch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let seq = |f: &mut fmt::Formatter<'_>, set: &BTreeSet<Value>| -> fmt::Result {
            f.write_str("[")?;
            for (i, v) in set.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("]")
        };
        f.write_str("(patch ")?;
        seq(f, &self.added)?;
        f.write_str(" ")?;
        seq(f, &self.removed)?;
        f.write_str(")")
    }
}

/// What an actor is woken up with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Boot,
    Message(Value),
    Patch(Patch),
    /// Fault injected from outside; the behavior never sees it.
    CrashInjected,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Boot => f.write_str("(boot)"),
            Event::Message(v) => write!(f, "(message {v})"),
            Event::Patch(p) => write!(f, "{p}"),
            Event::CrashInjected => f.write_str("(crash-injected)"),
        }
    }
}

/// A request made by an actor during its turn.
pub enum Action {
    Assert(Value),
    Retract(Value),
    Message(Value),
    Spawn(String, Box<dyn Behavior>),
    Quit,
}

impl Action {
    pub fn record(&self) -> ActionRecord {
        match self {
            Action::Assert(v) => ActionRecord::Assert(v.clone()),
            Action::Retract(v) => ActionRecord::Retract(v.clone()),
            Action::Message(v) => ActionRecord::Message(v.clone()),
            Action::Spawn(name, _) => ActionRecord::Spawn(name.clone()),
            Action::Quit => ActionRecord::Quit,
        }
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.record())
    }
}

/// The trace-visible part of an [`Action`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionRecord {
    Assert(Value),
    Retract(Value),
    Message(Value),
    Spawn(String),
    Quit,
}

impl fmt::Display for ActionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionRecord::Assert(v) => write!(f, "(assert {v})"),
            ActionRecord::Retract(v) => write!(f, "(retract {v})"),
            ActionRecord::Message(v) => write!(f, "(message {v})"),
            ActionRecord::Spawn(name) => write!(f, "(spawn {})", Value::text(name.clone())),
            ActionRecord::Quit => f.write_str("(quit)"),
        }
    }
}

/// One line of the trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnRecord {
    pub turn: u64,
    pub actor: ActorId,
    pub event: Event,
    pub actions: Vec<ActionRecord>,
    pub crashed: bool,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    turn: u64,
    actor: u64,
    event: &'a str,
    actions: Vec<String>,
    crashed: bool,
}

impl TurnRecord {
    /// The JSON line written to trace sinks, without the trailing newline.
    pub fn to_json_line(&self) -> String {
        let event = self.event.to_string();
        let line = TraceLine {
            turn: self.turn,
            actor: self.actor.0,
            event: &event,
            actions: self.actions.iter().map(ToString::to_string).collect(),
            crashed: self.crashed,
        };
        serde_json::to_string(&line).expect("trace line serializes")
    }
}
