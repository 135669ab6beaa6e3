//! Facet trees: fields, assert endpoints, handlers and their lifecycle.

mod actor;
mod ctx;

use std::fmt;
use std::marker::PhantomData;
use std::ops::Deref;

use thiserror::Error;

use crate::values::{Bindings, Value};

pub use actor::FacetActor;
pub use ctx::Ctx;

/// Path from the actor's root; children are numbered per parent in creation order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FacetId(Vec<u32>);

impl FacetId {
    pub fn path(&self) -> &[u32] {
        &self.0
    }

    pub fn parent(&self) -> Option<FacetId> {
        (self.0.len() > 1).then(|| FacetId(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn depth(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_within(&self, ancestor: &FacetId) -> bool {
        self.0.starts_with(&ancestor.0)
    }

    fn child(&self, index: u32) -> FacetId {
        let mut path = self.0.clone();
        path.push(index);
        FacetId(path)
    }
}

impl fmt::Display for FacetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FacetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FacetId({self})")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldId(u64);

impl fmt::Display for FieldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EndpointId(u64);

/// Typed handle to a field cell owned by some facet.
pub struct Field<T> {
    id: FieldId,
    _marker: PhantomData<fn() -> T>,
}

impl<T> Field<T> {
    pub fn id(&self) -> FieldId {
        self.id
    }
}

impl<T> Clone for Field<T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for Field<T> {}

impl<T> fmt::Debug for Field<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.id)
    }
}

/// Which kind of event a handler endpoint reacts to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trigger {
    Asserted,
    Retracted,
    Message,
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trigger::Asserted => "asserted",
            Trigger::Retracted => "retracted",
            Trigger::Message => "message",
        })
    }
}

/// A matched value and the captures it bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub value: Value,
    pub bindings: Bindings,
}

impl Deref for Match {
    type Target = Bindings;

    fn deref(&self) -> &Bindings {
        &self.bindings
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FacetError {
    #[error("field {0} belongs to a stopped facet")]
    DeadFieldAccess(FieldId),
    #[error("no facet is executing")]
    OutsideFacetContext,
    #[error("facet {0} is not alive")]
    StoppingDeadFacet(FacetId),
    #[error("capture `{0}` appears more than once in a pattern")]
    NonLinearPattern(String),
    #[error("no state labelled `{0}`")]
    UnknownLabel(String),
    #[error("state `{label}` takes {expected} arguments, got {got}")]
    ArityMismatch { label: String, expected: usize, got: usize },
}

/// Abort the current turn; the actor crashes.
pub(crate) fn fail(e: FacetError) -> ! {
    std::panic::panic_any(e)
}
