use std::fmt;

use crate::kernel::BaseType;

/// An attribute datum.
///
/// Labelled nulls are Skolem constants: two nulls are equal only when they
/// carry the same label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Str(String),
    Int(i64),
    Null(String),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Value {
        Value::Str(s.into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null(_))
    }

    /// Whether the value may inhabit an attribute of the given type.
    pub fn fits(&self, ty: BaseType) -> bool {
        matches!(
            (self, ty),
            (Value::Str(_), BaseType::String) | (Value::Int(_), BaseType::Integer) | (Value::Null(_), _)
        )
    }

    pub fn base_type(&self) -> Option<BaseType> {
        match self {
            Value::Str(_) => Some(BaseType::String),
            Value::Int(_) => Some(BaseType::Integer),
            Value::Null(_) => None,
        }
    }
}

/// Script-literal form: strings double-quoted with `\"` and `\\` escapes,
/// nulls as `null("label")`.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => write!(f, "\"{}\"", escape(s)),
            Value::Int(i) => write!(f, "{i}"),
            Value::Null(l) => write!(f, "null(\"{}\")", escape(l)),
        }
    }
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}
