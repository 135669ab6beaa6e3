use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::value::{Value, MESSAGE, OBSERVE};

pub const WILDCARD: &str = "wildcard";
pub const CAPTURE: &str = "capture";
/// Escape for literal values that would otherwise read back as pattern syntax.
pub const QUOTE: &str = "quote";

const RESERVED: [&str; 3] = [WILDCARD, CAPTURE, QUOTE];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("capture `{0}` has no binding")]
    UnboundCapture(String),
    #[error("malformed pattern encoding: {0}")]
    MalformedPatternEncoding(Value),
    #[error("capture `{0}` appears more than once")]
    DuplicateCapture(String),
}

/// A matcher over [`Value`]s.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pattern {
    Wildcard,
    Capture(String),
    Literal(Value),
    Record(String, Vec<Pattern>),
    Sequence(Vec<Pattern>),
}

/// Capture name to matched value.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bindings(BTreeMap<String, Value>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    /// Like [`Bindings::get`] but turns absence into an error.
    pub fn require(&self, name: &str) -> Result<&Value, PatternError> {
        self.0.get(name).ok_or_else(|| PatternError::UnboundCapture(name.to_owned()))
    }

    /// The value bound to `name`; panics when unbound.
    pub fn at(&self, name: &str) -> &Value {
        match self.0.get(name) {
            Some(v) => v,
            None => panic!("capture `{name}` has no binding"),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, v: Value) {
        self.0.insert(name.into(), v);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }
}

impl fmt::Debug for Bindings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter()).finish()
    }
}

impl<K: Into<String>> FromIterator<(K, Value)> for Bindings {
    fn from_iter<I: IntoIterator<Item = (K, Value)>>(iter: I) -> Self {
        Bindings(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

impl Pattern {
    pub fn capture(name: impl Into<String>) -> Pattern {
        Pattern::Capture(name.into())
    }

    pub fn lit(v: impl Into<Value>) -> Pattern {
        Pattern::Literal(v.into())
    }

    pub fn record(label: impl Into<String>, fields: Vec<Pattern>) -> Pattern {
        Pattern::Record(label.into(), fields)
    }

    /// Match `v`, returning the capture bindings on success.
    pub fn matches(&self, v: &Value) -> Option<Bindings> {
        let mut b = Bindings::new();
        self.match_into(v, &mut b).then_some(b)
    }

    pub fn is_match(&self, v: &Value) -> bool {
        let mut b = Bindings::new();
        self.match_into(v, &mut b)
    }

    fn match_into(&self, v: &Value, b: &mut Bindings) -> bool {
        match (self, v) {
            (Pattern::Wildcard, _) => true,
            (Pattern::Capture(name), _) => {
                b.insert(name.clone(), v.clone());
                true
            }
            (Pattern::Literal(lit), _) => lit == v,
            (Pattern::Record(label, pats), Value::Record(vl, fields)) => {
                label == vl && pats.len() == fields.len() && pats.iter().zip(fields).all(|(p, f)| p.match_into(f, b))
            }
            (Pattern::Sequence(pats), Value::Sequence(items)) => {
                pats.len() == items.len() && pats.iter().zip(items).all(|(p, f)| p.match_into(f, b))
            }
            _ => false,
        }
    }

    /// Replace every capture with the literal it is bound to.
    pub fn instantiate(&self, b: &Bindings) -> Result<Pattern, PatternError> {
        Ok(match self {
            Pattern::Wildcard => Pattern::Wildcard,
            Pattern::Capture(name) => Pattern::Literal(b.require(name)?.clone()),
            Pattern::Literal(v) => Pattern::Literal(v.clone()),
            Pattern::Record(label, pats) => {
                Pattern::Record(label.clone(), pats.iter().map(|p| p.instantiate(b)).collect::<Result<_, _>>()?)
            }
            Pattern::Sequence(pats) => {
                Pattern::Sequence(pats.iter().map(|p| p.instantiate(b)).collect::<Result<_, _>>()?)
            }
        })
    }

    /// Capture names in left-to-right order.
    pub fn captures(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_captures(&mut out);
        out
    }

    fn collect_captures<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Pattern::Capture(name) => out.push(name),
            Pattern::Record(_, pats) | Pattern::Sequence(pats) => pats.iter().for_each(|p| p.collect_captures(out)),
            Pattern::Wildcard | Pattern::Literal(_) => {}
        }
    }

    /// Rejects non-linear patterns.
    pub fn check_linear(&self) -> Result<(), PatternError> {
        let mut seen = std::collections::BTreeSet::new();
        for name in self.captures() {
            if !seen.insert(name) {
                return Err(PatternError::DuplicateCapture(name.to_owned()));
            }
        }
        Ok(())
    }

    pub fn has_wildcard(&self) -> bool {
        match self {
            Pattern::Wildcard => true,
            Pattern::Record(_, pats) | Pattern::Sequence(pats) => pats.iter().any(Pattern::has_wildcard),
            Pattern::Capture(_) | Pattern::Literal(_) => false,
        }
    }

    /// Canonical form: compound patterns whose parts are all literals
    /// collapse into a single literal. `decode` always yields this form.
    pub fn normalize(&self) -> Pattern {
        match self {
            Pattern::Record(label, pats) => {
                let pats: Vec<Pattern> = pats.iter().map(Pattern::normalize).collect();
                match all_literals(&pats) {
                    Some(vals) => Pattern::Literal(Value::Record(label.clone(), vals)),
                    None => Pattern::Record(label.clone(), pats),
                }
            }
            Pattern::Sequence(pats) => {
                let pats: Vec<Pattern> = pats.iter().map(Pattern::normalize).collect();
                match all_literals(&pats) {
                    Some(vals) => Pattern::Literal(Value::Sequence(vals)),
                    None => Pattern::Sequence(pats),
                }
            }
            other => other.clone(),
        }
    }

    /// Represent this pattern as a value, so that interests can be asserted.
    pub fn encode(&self) -> Value {
        match self {
            Pattern::Wildcard => Value::record(WILDCARD, vec![]),
            Pattern::Capture(name) => Value::record(CAPTURE, vec![Value::text(name.clone())]),
            Pattern::Literal(v) => encode_literal(v),
            Pattern::Record(label, pats) => Value::Record(label.clone(), pats.iter().map(Pattern::encode).collect()),
            Pattern::Sequence(pats) => Value::Sequence(pats.iter().map(Pattern::encode).collect()),
        }
    }

    /// Inverse of [`Pattern::encode`]. Values outside the reserved encodings
    /// decode to literals of themselves.
    pub fn decode(v: &Value) -> Result<Pattern, PatternError> {
        match v {
            Value::Record(label, fields) if label == WILDCARD => {
                if fields.is_empty() {
                    Ok(Pattern::Wildcard)
                } else {
                    Err(PatternError::MalformedPatternEncoding(v.clone()))
                }
            }
            Value::Record(label, fields) if label == CAPTURE => match fields.as_slice() {
                [Value::Text(name)] => Ok(Pattern::Capture(name.clone())),
                _ => Err(PatternError::MalformedPatternEncoding(v.clone())),
            },
            Value::Record(label, fields) if label == QUOTE => match fields.as_slice() {
                [inner] => Ok(Pattern::Literal(inner.clone())),
                _ => Err(PatternError::MalformedPatternEncoding(v.clone())),
            },
            Value::Record(label, fields) => {
                let pats = fields.iter().map(Pattern::decode).collect::<Result<Vec<_>, _>>()?;
                Ok(match all_literals(&pats) {
                    Some(vals) => Pattern::Literal(Value::Record(label.clone(), vals)),
                    None => Pattern::Record(label.clone(), pats),
                })
            }
            Value::Sequence(items) => {
                let pats = items.iter().map(Pattern::decode).collect::<Result<Vec<_>, _>>()?;
                Ok(match all_literals(&pats) {
                    Some(vals) => Pattern::Literal(Value::Sequence(vals)),
                    None => Pattern::Sequence(pats),
                })
            }
            atom => Ok(Pattern::Literal(atom.clone())),
        }
    }
}

fn all_literals(pats: &[Pattern]) -> Option<Vec<Value>> {
    pats.iter()
        .map(|p| match p {
            Pattern::Literal(v) => Some(v.clone()),
            _ => None,
        })
        .collect()
}

// Quote only the smallest sub-values that carry a reserved label, so that a
// literal and its structurally decomposed form share one encoding.
fn encode_literal(v: &Value) -> Value {
    if !v.mentions_label(&RESERVED) {
        return v.clone();
    }
    match v {
        Value::Record(label, _) if RESERVED.contains(&label.as_str()) => Value::record(QUOTE, vec![v.clone()]),
        Value::Record(label, fields) => Value::Record(label.clone(), fields.iter().map(encode_literal).collect()),
        Value::Sequence(items) => Value::Sequence(items.iter().map(encode_literal).collect()),
        atom => atom.clone(),
    }
}

/// The assertion declaring interest in values matching `p`.
pub fn observe(p: &Pattern) -> Value {
    Value::record(OBSERVE, vec![p.encode()])
}

/// The assertion declaring interest in messages matching `p`.
pub fn message_interest(p: &Pattern) -> Value {
    observe(&Pattern::record(MESSAGE, vec![p.clone()]))
}

/// What an `observe` assertion asks for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Interest {
    Assertions(Pattern),
    Messages(Pattern),
}

impl Interest {
    /// Interpret `v` when it is an `observe` record; `None` otherwise.
    pub fn from_observe(v: &Value) -> Option<Result<Interest, PatternError>> {
        let [inner] = v.record_fields(OBSERVE, 1)? else {
            return None;
        };
        Some(Pattern::decode(inner).map(|p| match p {
            Pattern::Record(label, mut pats) if label == MESSAGE && pats.len() == 1 => {
                Interest::Messages(pats.remove(0))
            }
            Pattern::Literal(Value::Record(label, mut vals)) if label == MESSAGE && vals.len() == 1 => {
                Interest::Messages(Pattern::Literal(vals.remove(0)))
            }
            other => Interest::Assertions(other),
        }))
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Wildcard => f.write_str("_"),
            Pattern::Capture(name) => write!(f, "${name}"),
            Pattern::Literal(v) => write!(f, "{v}"),
            Pattern::Record(label, pats) => {
                write!(f, "(")?;
                super::text::write_symbol(f, label)?;
                for p in pats {
                    write!(f, " {p}")?;
                }
                write!(f, ")")
            }
            Pattern::Sequence(pats) => {
                write!(f, "[")?;
                for (i, p) in pats.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, "]")
            }
        }
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
