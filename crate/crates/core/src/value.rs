//! Runtime values produced by type-unifying strategies at the CLI level.

use std::fmt;

use crate::term::{Prim, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Unit,
    Int(i64),
    Bool(bool),
    Str(String),
    Term(Term),
    List(Vec<Value>),
}

impl Value {
    pub fn from_prim(p: &Prim) -> Value {
        match p {
            Prim::Int(n) => Value::Int(*n),
            Prim::Bool(b) => Value::Bool(*b),
            Prim::Str(s) => Value::Str(s.clone()),
            Prim::Unit => Value::Unit,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Unit => "unit",
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Str(_) => "str",
            Value::Term(_) => "term",
            Value::List(_) => "list",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => write!(f, "()"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
            Value::Term(t) => write!(f, "{t}"),
            Value::List(items) => {
                write!(f, "[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
        }
    }
}
