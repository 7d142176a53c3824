//! Scalar, tensor and inverted-scalar parameters, `with-symbols` scoping and
//! completion of omitted indices.

use std::fmt;

use crate::error::{Error, Result};
use crate::symexpr::Sym;
use crate::tensor::{attach_indices, flip_indices, tensor_map, IndexMark, Label, Tensor};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// `$x`: the function is mapped over tensor components.
    Scalar,
    /// `%x`: the argument is received whole, indices intact.
    Tensor,
    /// `*$x`: like `Scalar`, after flipping the argument's variances.
    InvertedScalar,
}

impl ParamKind {
    pub fn marker(self) -> &'static str {
        match self {
            ParamKind::Scalar => "$",
            ParamKind::Tensor => "%",
            ParamKind::InvertedScalar => "*$",
        }
    }

    pub fn maps_components(self) -> bool {
        !matches!(self, ParamKind::Tensor)
    }
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.marker())
    }
}

/// Apply `body` to `args` under the given parameter kinds. Scalar and
/// inverted-scalar positions nest `tensor_map` left to right; tensor
/// positions are passed through untouched.
pub fn apply_params(
    kinds: &[ParamKind],
    args: Vec<Value>,
    body: &mut dyn FnMut(&[Value]) -> Result<Value>,
) -> Result<Value> {
    if kinds.len() != args.len() {
        return Err(Error::Arity(format!(
            "expected {} arguments, got {}",
            kinds.len(),
            args.len()
        )));
    }
    let args = args
        .into_iter()
        .zip(kinds)
        .map(|(a, k)| match k {
            ParamKind::InvertedScalar => flip_indices(a),
            _ => a,
        })
        .collect::<Vec<_>>();
    map_from(kinds, &args, 0, body)
}

fn map_from(
    kinds: &[ParamKind],
    args: &[Value],
    pos: usize,
    body: &mut dyn FnMut(&[Value]) -> Result<Value>,
) -> Result<Value> {
    let Some(next) = (pos..kinds.len()).find(|&i| kinds[i].maps_components()) else {
        return body(args);
    };
    if !matches!(args[next], Value::Tensor(_)) {
        return map_from(kinds, args, next + 1, body);
    }
    tensor_map(&args[next], |component| {
        let mut bound = args.to_vec();
        bound[next] = component.clone();
        map_from(kinds, &bound, next + 1, body)
    })
}

/// Every parameter scalar.
pub fn apply_scalar(args: Vec<Value>, body: &mut dyn FnMut(&[Value]) -> Result<Value>) -> Result<Value> {
    let kinds = vec![ParamKind::Scalar; args.len()];
    apply_params(&kinds, args, body)
}

/// Every parameter a tensor parameter: plain application.
pub fn apply_tensor(args: Vec<Value>, body: &mut dyn FnMut(&[Value]) -> Result<Value>) -> Result<Value> {
    body(&args)
}

/// Scalar application where the final `inverted` arguments are flipped first.
pub fn apply_inverted_scalar(
    args: Vec<Value>,
    inverted: usize,
    body: &mut dyn FnMut(&[Value]) -> Result<Value>,
) -> Result<Value> {
    let n = args.len();
    let kinds: Vec<ParamKind> = (0..n)
        .map(|i| {
            if i + inverted >= n {
                ParamKind::InvertedScalar
            } else {
                ParamKind::Scalar
            }
        })
        .collect();
    apply_params(&kinds, args, body)
}

/// Shift the marks labelled by `symbols` behind the other named marks, in
/// declaration order, then drop them. Their axes stay as form axes.
pub fn with_symbols_scope(symbols: &[Sym], v: Value) -> Value {
    let t = match v {
        Value::Tensor(t) => t,
        other => return other,
    };
    let position = |s: &Sym| {
        t.indices()
            .iter()
            .position(|m| matches!(&m.label, Label::Named(x) if x == s))
    };
    let moved: Vec<usize> = symbols.iter().filter_map(position).collect();
    if moved.is_empty() {
        return Value::Tensor(t);
    }
    let n = t.indices().len();
    let kept: Vec<usize> = (0..n).filter(|p| !moved.contains(p)).collect();
    let marks: Vec<IndexMark> = kept.iter().map(|&p| t.indices()[p].clone()).collect();
    let perm: Vec<usize> = kept
        .iter()
        .chain(&moved)
        .copied()
        .chain(n..t.rank())
        .collect();
    let out = t
        .permute_axes(&perm)
        .with_marks(marks)
        .expect("fewer marks than before");
    Value::Tensor(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompletionMode {
    /// Default for scalar functions: one symbol sequence shared by all arguments.
    Shared,
    /// `!`-application: a fresh sequence per argument.
    Distinct,
}

fn fresh_sequence(start: usize, len: usize) -> Vec<Sym> {
    (start..start + len)
        .map(|i| Sym::fresh(&format!("t{}", i + 1)))
        .collect()
}

fn complete_with(t: Tensor, syms: &[Sym]) -> Result<Value> {
    let marks = syms.iter().cloned().map(IndexMark::sub).collect();
    attach_indices(Value::Tensor(t), marks)
}

/// Give every argument with form axes fresh subscript marks covering them.
/// Returns the completed arguments and the generated symbols in generation
/// order, to be scoped away from the result with [`with_symbols_scope`].
pub fn complete_omitted_indices(args: Vec<Value>, mode: CompletionMode) -> Result<(Vec<Value>, Vec<Sym>)> {
    let degree = |v: &Value| v.as_tensor().map_or(0, Tensor::form_degree);
    match mode {
        CompletionMode::Shared => {
            let mut common = 0;
            for d in args.iter().map(degree).filter(|&d| d > 0) {
                if common != 0 && d != common {
                    return Err(Error::Completion(format!(
                        "cannot complete indices of a {common}-form and a {d}-form together"
                    )));
                }
                common = d;
            }
            if common == 0 {
                return Ok((args, Vec::new()));
            }
            let syms = fresh_sequence(0, common);
            let args = args
                .into_iter()
                .map(|a| match a {
                    Value::Tensor(t) if t.form_degree() > 0 => complete_with(t, &syms),
                    other => Ok(other),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((args, syms))
        }
        CompletionMode::Distinct => {
            let mut all = Vec::new();
            let mut out = Vec::with_capacity(args.len());
            for a in args {
                match a {
                    Value::Tensor(t) if t.form_degree() > 0 => {
                        let syms = fresh_sequence(all.len(), t.form_degree());
                        out.push(complete_with(t, &syms)?);
                        all.extend(syms);
                    }
                    other => out.push(other),
                }
            }
            Ok((out, all))
        }
    }
}
