//! Differential-form builtins: degree, alternation, Levi-Civita symbol,
//! determinant and the Hodge star. `wedge` and `d` live in the prelude.

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::symexpr::ScalarExpr;
use crate::tensor::{multi_indices, Tensor};
use crate::value::Value;

/// Sign of a permutation of `0..n` given as a sequence; 0 when an entry repeats.
pub fn permutation_sign(p: &[usize]) -> i64 {
    let mut sign = 1;
    for a in 0..p.len() {
        for b in a + 1..p.len() {
            if p[a] == p[b] {
                return 0;
            }
            if p[a] > p[b] {
                sign = -sign;
            }
        }
    }
    sign
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

fn scalar_at(t: &Tensor, idx: &[usize]) -> Result<ScalarExpr> {
    t.get(idx).as_scalar().cloned()
}

/// Rank minus the number of attached marks.
pub fn df_order(v: &Value) -> usize {
    v.as_tensor().map_or(0, Tensor::form_degree)
}

/// Alternation over the form axes: `(1/k!) Σ_σ sgn(σ) A[..., a_σ(1) … a_σ(k)]`.
/// Marked (value) axes are left alone.
pub fn df_normalize(v: &Value) -> Result<Value> {
    let t = match v {
        Value::Tensor(t) if t.form_degree() >= 2 => t,
        other => return Ok(other.clone()),
    };
    let k = t.form_degree();
    let lead = t.indices().len();
    let perms: Vec<(Vec<usize>, i64)> = (0..k)
        .permutations(k)
        .map(|p| {
            let s = permutation_sign(&p);
            (p, s)
        })
        .collect();
    let norm = BigRational::new(BigInt::from(1), BigInt::from(factorial(k)));
    let mut data = Vec::with_capacity(t.data().len());
    for idx in multi_indices(t.shape()) {
        let mut acc = ScalarExpr::zero();
        let mut src = idx.clone();
        for (p, s) in &perms {
            for (slot, &from) in p.iter().enumerate() {
                src[lead + slot] = idx[lead + from];
            }
            let c = scalar_at(t, &src)?;
            acc = if *s > 0 { &acc + &c } else { &acc - &c };
        }
        data.push(Value::Scalar(acc.scale(&norm)));
    }
    let out = Tensor::with_indices(t.shape().to_vec(), data, t.indices().to_vec())?;
    Ok(Value::Tensor(out))
}

/// The rank-`n` Levi-Civita symbol.
pub fn levi_civita(n: usize) -> Result<Tensor> {
    if n < 1 {
        return Err(Error::Domain("Levi-Civita symbol needs dimension >= 1".into()));
    }
    let shape = vec![n; n];
    let data = multi_indices(&shape)
        .map(|idx| Value::int(permutation_sign(&idx)))
        .collect();
    Tensor::new(shape, data)
}

fn square_dim(m: &Tensor, what: &str) -> Result<usize> {
    match m.shape() {
        [a, b] if a == b => Ok(*a),
        s => Err(Error::ShapeMismatch(format!(
            "{what} needs a square matrix, got shape {s:?}"
        ))),
    }
}

/// Leibniz-formula determinant.
pub fn det(m: &Tensor) -> Result<ScalarExpr> {
    let n = square_dim(m, "determinant")?;
    let mut acc = ScalarExpr::zero();
    for p in (0..n).permutations(n) {
        let mut term = ScalarExpr::int(permutation_sign(&p));
        for (row, &col) in p.iter().enumerate() {
            term = &term * &scalar_at(m, &[row, col])?;
        }
        acc = &acc + &term;
    }
    Ok(acc)
}

/// Hodge star of a k-form in dimension n:
/// `B[i_{k+1}…i_n] = sqrt|det g| Σ ε[i_1…i_n] A[j_1…j_k] Π g^{i_m j_m}`.
pub fn hodge(a: &Value, g_lower: &Tensor, g_upper: &Tensor) -> Result<Value> {
    let n = square_dim(g_lower, "hodge")?;
    if square_dim(g_upper, "hodge")? != n {
        return Err(Error::ShapeMismatch(
            "metric and inverse metric differ in dimension".into(),
        ));
    }
    let (lead_shape, lead_marks, k, component): (Vec<usize>, _, usize, Box<dyn Fn(&[usize], &[usize]) -> Result<ScalarExpr>>) =
        match a {
            Value::Scalar(s) => {
                let s = s.clone();
                (Vec::new(), Vec::new(), 0, Box::new(move |_, _| Ok(s.clone())))
            }
            Value::Tensor(t) => {
                let lead = t.indices().len();
                if t.shape()[lead..].iter().any(|&d| d != n) {
                    return Err(Error::ShapeMismatch(format!(
                        "form axes of shape {:?} do not match dimension {n}",
                        &t.shape()[lead..]
                    )));
                }
                let t = t.clone();
                (
                    t.shape()[..lead].to_vec(),
                    t.indices().to_vec(),
                    t.form_degree(),
                    Box::new(move |v: &[usize], f: &[usize]| {
                        let idx: Vec<usize> = v.iter().chain(f).copied().collect();
                        scalar_at(&t, &idx)
                    }),
                )
            }
            other => {
                return Err(Error::Type(format!("hodge of a {}", other.type_name())))
            }
        };
    if k > n {
        return Err(Error::Degree(format!("hodge of a {k}-form in dimension {n}")));
    }
    let volume = ScalarExpr::sqrt(ScalarExpr::abs(det(g_lower)?));
    let out_form = vec![n; n - k];
    let contracted = vec![n; k];
    let mut out_shape = lead_shape.clone();
    out_shape.extend(&out_form);
    let mut data = Vec::new();
    for v in multi_indices(&lead_shape) {
        for rest in multi_indices(&out_form) {
            let mut acc = ScalarExpr::zero();
            for is in multi_indices(&contracted) {
                let perm: Vec<usize> = is.iter().chain(&rest).copied().collect();
                let eps = permutation_sign(&perm);
                if eps == 0 {
                    continue;
                }
                for js in multi_indices(&contracted) {
                    let mut term = &ScalarExpr::int(eps) * &component(&v, &js)?;
                    for (&i, &j) in is.iter().zip(&js) {
                        term = &term * &scalar_at(g_upper, &[i, j])?;
                    }
                    acc = &acc + &term;
                }
            }
            data.push(Value::Scalar(&volume * &acc));
        }
    }
    if out_shape.is_empty() {
        return Ok(data.pop().expect("one component"));
    }
    Ok(Tensor::with_indices(out_shape, data, lead_marks)?.into_value())
}
