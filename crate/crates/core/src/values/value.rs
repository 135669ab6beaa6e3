use std::fmt;

use ordered_float::OrderedFloat;

/// Label of the record wrapping an interest pattern.
pub const OBSERVE: &str = "observe";
/// Label of the record wrapping a message interest.
pub const MESSAGE: &str = "message";

/// An immutable structured datum.
///
/// Integers and decimals never compare equal to each other, so `100` and
/// `100.0` are distinct assertions. The derived ordering is total and is the
/// iteration order of every set of values the runtime produces.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Boolean(bool),
    Integer(i64),
    Decimal(OrderedFloat<f64>),
    Text(String),
    Symbol(String),
    Unique(u64),
    Sequence(Vec<Value>),
    Record(String, Vec<Value>),
}

impl Value {
    pub fn symbol(name: impl Into<String>) -> Value {
        Value::Symbol(name.into())
    }

    pub fn text(s: impl Into<String>) -> Value {
        Value::Text(s.into())
    }

    pub fn decimal(x: f64) -> Value {
        Value::Decimal(OrderedFloat(x))
    }

    pub fn record(label: impl Into<String>, fields: Vec<Value>) -> Value {
        Value::Record(label.into(), fields)
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Value::Integer(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Boolean(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Value::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Label and fields when this is a record.
    pub fn as_record(&self) -> Option<(&str, &[Value])> {
        match self {
            Value::Record(label, fields) => Some((label, fields)),
            _ => None,
        }
    }

    /// Fields of a record with the given label and arity.
    pub fn record_fields(&self, label: &str, arity: usize) -> Option<&[Value]> {
        match self {
            Value::Record(l, fields) if l == label && fields.len() == arity => Some(fields),
            _ => None,
        }
    }

    pub fn is_record_labeled(&self, label: &str) -> bool {
        matches!(self, Value::Record(l, _) if l == label)
    }

    /// True when any record nested in this value carries one of `labels`.
    pub fn mentions_label(&self, labels: &[&str]) -> bool {
        match self {
            Value::Record(l, fields) => labels.contains(&l.as_str()) || fields.iter().any(|f| f.mentions_label(labels)),
            Value::Sequence(items) => items.iter().any(|f| f.mentions_label(labels)),
            _ => false,
        }
    }

    /// True when `needle` occurs anywhere inside this value, including itself.
    pub fn contains(&self, needle: &Value) -> bool {
        if self == needle {
            return true;
        }
        match self {
            Value::Record(_, items) | Value::Sequence(items) => items.iter().any(|f| f.contains(needle)),
            _ => false,
        }
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Integer(n)
    }
}

impl From<i32> for Value {
    fn from(n: i32) -> Self {
        Value::Integer(i64::from(n))
    }
}

impl From<u32> for Value {
    fn from(n: u32) -> Self {
        Value::Integer(i64::from(n))
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Boolean(b)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::text::write_value(f, self)
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::text::write_value(f, self)
    }
}

/// Build a record value: `rec!("price", 100)` is `(price 100)`.
#[macro_export]
macro_rules! rec {
    ($label:expr $(, $field:expr)* $(,)?) => {
        $crate::values::Value::record($label, vec![$($crate::values::Value::from($field)),*])
    };
}

/// Allocator of `Unique` serials; monotone per runtime instance.
#[derive(Debug, Default, Clone)]
pub struct UniqueSource {
    next: u64,
}

impl UniqueSource {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self) -> Value {
        let v = Value::Unique(self.next);
        self.next += 1;
        v
    }

    pub fn peek(&self) -> u64 {
        self.next
    }
}

impl From<&str> for Value {
    /// Bare strings become symbols; use [`Value::text`] for text.
    fn from(s: &str) -> Self {
        Value::Symbol(s.to_owned())
    }
}

impl From<&Value> for Value {
    fn from(v: &Value) -> Self {
        v.clone()
    }
}
