//! An interpreter for a small expression language with tensor index
//! notation: scalar and tensor parameters, index reduction, completion of
//! omitted indices and differential forms, over exact symbolic scalars.

pub mod apply;
pub mod cli;
pub mod error;
pub mod eval;
pub mod forms;
pub mod lang;
pub mod symexpr;
pub mod tensor;
pub mod value;

pub use error::{Error, Result, Span};
pub use eval::Interpreter;
pub use symexpr::{ScalarExpr, Sym};
pub use tensor::{IndexMark, Label, Tensor, Variance};
pub use value::Value;
