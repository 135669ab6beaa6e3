//! Values, patterns and their text form.

mod pattern;
mod text;
mod value;

pub use pattern::{message_interest, observe, Bindings, Interest, Pattern, PatternError, CAPTURE, QUOTE, WILDCARD};
pub use text::{parse_value, parse_values, ParseError};
pub use value::{UniqueSource, Value, MESSAGE, OBSERVE};
