use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::eval::{Closure, Primitive};
use crate::symexpr::ScalarExpr;
use crate::tensor::Tensor;

/// Runtime value of the language.
#[derive(Clone)]
pub enum Value {
    Scalar(ScalarExpr),
    Tensor(Tensor),
    Bool(bool),
    Str(String),
    Collection(Vec<Value>),
    Closure(Rc<Closure>),
    Primitive(Rc<Primitive>),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Scalar(ScalarExpr::int(n))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Tensor(_) => "tensor",
            Value::Bool(_) => "boolean",
            Value::Str(_) => "string",
            Value::Collection(_) => "collection",
            Value::Closure(_) => "closure",
            Value::Primitive(_) => "primitive",
        }
    }

    pub fn as_scalar(&self) -> Result<&ScalarExpr> {
        match self {
            Value::Scalar(s) => Ok(s),
            other => Err(Error::Type(format!(
                "expected a scalar, found a {}",
                other.type_name()
            ))),
        }
    }

    pub fn as_tensor(&self) -> Option<&Tensor> {
        match self {
            Value::Tensor(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_function(&self) -> bool {
        matches!(self, Value::Closure(_) | Value::Primitive(_))
    }

    /// Numeric rendering of a scalar or tensor of scalars with every symbol
    /// bound to a float.
    pub fn display_numeric(&self, bindings: &HashMap<String, f64>, precision: usize) -> Result<String> {
        let mut out = String::new();
        write_numeric(&mut out, self, bindings, precision)?;
        Ok(out)
    }
}

fn write_numeric(
    out: &mut String,
    v: &Value,
    bindings: &HashMap<String, f64>,
    precision: usize,
) -> Result<()> {
    match v {
        Value::Scalar(s) => {
            let x = s.evaluate_at(bindings)?;
            let _ = write!(out, "{x:.precision$}");
        }
        Value::Tensor(t) => {
            let mut parts = Vec::with_capacity(t.data().len());
            for c in t.data() {
                let mut s = String::new();
                write_numeric(&mut s, c, bindings, precision)?;
                parts.push(s);
            }
            t.write_nested(out, &parts);
        }
        other => {
            let _ = write!(out, "{other}");
        }
    }
    Ok(())
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => a == b,
            (Value::Tensor(a), Value::Tensor(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Collection(a), Value::Collection(b)) => a == b,
            (Value::Closure(a), Value::Closure(b)) => Rc::ptr_eq(a, b),
            (Value::Primitive(a), Value::Primitive(b)) => Rc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl From<ScalarExpr> for Value {
    fn from(s: ScalarExpr) -> Self {
        Value::Scalar(s)
    }
}

impl From<Tensor> for Value {
    fn from(t: Tensor) -> Self {
        t.into_value()
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(s) => write!(f, "{s}"),
            Value::Tensor(t) => write!(f, "{t}"),
            Value::Bool(true) => f.write_str("#t"),
            Value::Bool(false) => f.write_str("#f"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Collection(items) => {
                f.write_str("{")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
            Value::Closure(_) => f.write_str("#<lambda>"),
            Value::Primitive(p) => write!(f, "#<primitive {}>", p.name),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
