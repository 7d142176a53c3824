//! Tensors with index marks and the index-reduction engine.
//!
//! A tensor stores its components row-major. Index marks bind positionally
//! to the leading axes; any trailing axes without a mark are form axes.

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::symexpr::{fresh_id, Sym};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    /// `~`, +1
    Super,
    /// `_`, -1
    Sub,
    /// `~_`, 0: a collapsed superscript/subscript pair awaiting `contract`.
    SuperSub,
}

impl Variance {
    pub fn flipped(self) -> Variance {
        match self {
            Variance::Super => Variance::Sub,
            Variance::Sub => Variance::Super,
            Variance::SuperSub => Variance::SuperSub,
        }
    }

    pub fn marker(self) -> &'static str {
        match self {
            Variance::Super => "~",
            Variance::Sub => "_",
            Variance::SuperSub => "~_",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Named(Sym),
    /// 1-based component selector.
    Int(usize),
    /// `#`: never equal to any other label.
    Dummy(u64),
}

impl Label {
    pub fn dummy() -> Label {
        Label::Dummy(fresh_id())
    }

    /// Label identity as used by index reduction.
    pub fn same_as(&self, other: &Label) -> bool {
        match (self, other) {
            (Label::Named(a), Label::Named(b)) => a == b,
            (Label::Int(a), Label::Int(b)) => a == b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexMark {
    pub variance: Variance,
    pub label: Label,
}

impl IndexMark {
    pub fn new(variance: Variance, label: Label) -> Self {
        IndexMark { variance, label }
    }

    pub fn sub(sym: Sym) -> Self {
        IndexMark::new(Variance::Sub, Label::Named(sym))
    }

    pub fn sup(sym: Sym) -> Self {
        IndexMark::new(Variance::Super, Label::Named(sym))
    }
}

impl fmt::Display for IndexMark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.variance.marker())?;
        match &self.label {
            Label::Named(s) => write!(f, "{s}"),
            Label::Int(n) => write!(f, "{n}"),
            Label::Dummy(_) => f.write_str("#"),
        }
    }
}

/// Row-major strides for `shape`.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

/// All multi-indices of `shape` in row-major order.
pub fn multi_indices(shape: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = shape.iter().product();
    let st = strides(shape);
    (0..total).map(move |flat| {
        st.iter()
            .zip(shape)
            .map(|(s, n)| (flat / s) % n)
            .collect()
    })
}

fn flat_offset(st: &[usize], idx: &[usize]) -> usize {
    st.iter().zip(idx).map(|(s, i)| s * i).sum()
}

#[derive(Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<Value>,
    indices: Vec<IndexMark>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<Value>) -> Result<Self> {
        Self::with_indices(shape, data, Vec::new())
    }

    pub fn with_indices(shape: Vec<usize>, data: Vec<Value>, indices: Vec<IndexMark>) -> Result<Self> {
        if shape.iter().any(|&n| n == 0) {
            return Err(Error::ShapeMismatch("tensor dimensions must be positive".into()));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {len} components, got {}",
                data.len()
            )));
        }
        if indices.len() > shape.len() {
            return Err(Error::IndexArity(format!(
                "{} indices on a tensor of rank {}",
                indices.len(),
                shape.len()
            )));
        }
        Ok(Tensor {
            shape,
            data,
            indices,
        })
    }

    /// Build a tensor from a literal's components. Components that are
    /// unindexed tensors of a common shape are stacked into a higher rank.
    pub fn from_components(items: Vec<Value>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::ShapeMismatch("empty tensor literal".into()));
        }
        let inner: Option<Vec<usize>> = match &items[0] {
            Value::Tensor(t) => Some(t.shape.clone()),
            _ => None,
        };
        let Some(inner_shape) = inner else {
            if items.iter().any(|v| matches!(v, Value::Tensor(_))) {
                return Err(Error::ShapeMismatch(
                    "tensor literal mixes scalars and tensors".into(),
                ));
            }
            return Tensor::new(vec![items.len()], items);
        };
        let mut data = Vec::with_capacity(items.len() * inner_shape.iter().product::<usize>());
        let n = items.len();
        for item in items {
            match item {
                Value::Tensor(t) if t.shape == inner_shape && t.indices.is_empty() => {
                    data.extend(t.data)
                }
                Value::Tensor(t) if !t.indices.is_empty() => {
                    return Err(Error::ShapeMismatch(
                        "tensor literal components must not carry indices".into(),
                    ))
                }
                _ => {
                    return Err(Error::ShapeMismatch(
                        "tensor literal components have inconsistent shapes".into(),
                    ))
                }
            }
        }
        let mut shape = vec![n];
        shape.extend(inner_shape);
        Tensor::new(shape, data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[Value] {
        &self.data
    }

    pub fn indices(&self) -> &[IndexMark] {
        &self.indices
    }

    /// Number of trailing form axes.
    pub fn form_degree(&self) -> usize {
        self.rank() - self.indices.len()
    }

    pub fn get(&self, idx: &[usize]) -> &Value {
        &self.data[flat_offset(&strides(&self.shape), idx)]
    }

    pub fn into_parts(self) -> (Vec<usize>, Vec<Value>, Vec<IndexMark>) {
        (self.shape, self.data, self.indices)
    }

    /// Replace the mark list without touching components.
    pub fn with_marks(mut self, indices: Vec<IndexMark>) -> Result<Self> {
        if indices.len() > self.rank() {
            return Err(Error::IndexArity(format!(
                "{} indices on a tensor of rank {}",
                indices.len(),
                self.rank()
            )));
        }
        self.indices = indices;
        Ok(self)
    }

    /// Rank-0 tensors collapse to their single component.
    pub fn into_value(mut self) -> Value {
        if self.shape.is_empty() {
            self.data.pop().expect("rank-0 tensor has one component")
        } else {
            Value::Tensor(self)
        }
    }

    /// Reorder axes: new axis `a` is old axis `perm[a]`. Marks are dropped;
    /// callers set the permuted mark list.
    pub fn permute_axes(&self, perm: &[usize]) -> Tensor {
        debug_assert_eq!(perm.len(), self.rank());
        let old_st = strides(&self.shape);
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let data = multi_indices(&new_shape)
            .map(|idx| {
                let off: usize = perm.iter().zip(&idx).map(|(&p, &i)| old_st[p] * i).sum();
                self.data[off].clone()
            })
            .collect();
        Tensor {
            shape: new_shape,
            data,
            indices: Vec::new(),
        }
    }

    pub(crate) fn write_nested(&self, out: &mut String, parts: &[String]) {
        fn go(out: &mut String, shape: &[usize], parts: &[String]) {
            out.push_str("[|");
            if shape.len() == 1 {
                out.push_str(&parts.join(" "));
            } else {
                let chunk = parts.len() / shape[0];
                for (i, c) in parts.chunks(chunk).enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    go(out, &shape[1..], c);
                }
            }
            out.push_str("|]");
        }
        go(out, &self.shape, parts);
        for m in &self.indices {
            let _ = write!(out, "{m}");
        }
    }
}

impl fmt::Display for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.data.iter().map(|v| v.to_string()).collect();
        let mut out = String::new();
        self.write_nested(&mut out, &parts);
        f.write_str(&out)
    }
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// Positional assoc-list helpers of the reduction loop.

fn variance_at(k: usize, marks: &[IndexMark]) -> Variance {
    marks[k].variance
}

fn remove_mark(k: usize, marks: &mut Vec<IndexMark>) {
    marks.remove(k);
}

fn update_variance(k: usize, v: Variance, marks: &mut [IndexMark]) {
    marks[k].variance = v;
}

/// Every pair `(k, j)`, `k < j`, of positions carrying the same label,
/// ordered by leftmost occurrence. Positions are 0-based.
pub fn find_identical_pairs(marks: &[IndexMark]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 0..marks.len() {
        for j in k + 1..marks.len() {
            if marks[k].label.same_as(&marks[j].label) {
                out.push((k, j));
            }
        }
    }
    out
}

fn first_identical_pair(marks: &[IndexMark]) -> Option<(usize, usize)> {
    (0..marks.len()).find_map(|k| {
        (k + 1..marks.len())
            .find(|&j| marks[k].label.same_as(&marks[j].label))
            .map(|j| (k, j))
    })
}

/// Diagonal of axes `k < j` (0-based): axis `j` is removed and the shared
/// axis stays at `k`. A mark at position `j`, if any, is removed with it.
pub fn diag(k: usize, j: usize, t: &Tensor) -> Result<Tensor> {
    if k >= j || j >= t.rank() {
        return Err(Error::Index(format!(
            "invalid diagonal axes ({k}, {j}) for rank {}",
            t.rank()
        )));
    }
    if t.shape[k] != t.shape[j] {
        return Err(Error::ShapeMismatch(format!(
            "repeated index over axes of dimension {} and {}",
            t.shape[k], t.shape[j]
        )));
    }
    let st = strides(&t.shape);
    let mut shape = t.shape.clone();
    shape.remove(j);
    let data = multi_indices(&shape)
        .map(|idx| {
            let mut full = idx.clone();
            full.insert(j, idx[k]);
            t.data[flat_offset(&st, &full)].clone()
        })
        .collect();
    let mut indices = t.indices.clone();
    if j < indices.len() {
        indices.remove(j);
    }
    Ok(Tensor {
        shape,
        data,
        indices,
    })
}

/// Collapse every repeated label onto its leftmost position. A pair with
/// differing variances leaves a supersubscript behind.
pub fn reduce_indices(mut t: Tensor) -> Result<Tensor> {
    while let Some((k, j)) = first_identical_pair(&t.indices) {
        let same = variance_at(k, &t.indices) == variance_at(j, &t.indices);
        let mut marks = t.indices.clone();
        remove_mark(j, &mut marks);
        if !same {
            update_variance(k, Variance::SuperSub, &mut marks);
        }
        t = diag(k, j, &t)?;
        t.indices = marks;
    }
    Ok(t)
}

/// Append `marks` after any existing ones. Integer labels select components
/// immediately; the remaining marks are stored and reduced.
pub fn attach_indices(v: Value, marks: Vec<IndexMark>) -> Result<Value> {
    if marks.is_empty() {
        return Ok(v);
    }
    let t = match v {
        Value::Tensor(t) => t,
        other => {
            return Err(Error::IndexArity(format!(
                "{} indices attached to a {} of rank 0",
                marks.len(),
                other.type_name()
            )))
        }
    };
    let existing = t.indices.len();
    if existing + marks.len() > t.rank() {
        return Err(Error::IndexArity(format!(
            "{} indices attached to a tensor of rank {}{}",
            marks.len(),
            t.rank(),
            if existing > 0 {
                format!(" already carrying {existing}")
            } else {
                String::new()
            }
        )));
    }
    let mut fixed: Vec<Option<usize>> = vec![None; t.rank()];
    let mut kept = t.indices.clone();
    for (i, m) in marks.into_iter().enumerate() {
        let axis = existing + i;
        match m.label {
            Label::Int(n) => {
                if n < 1 || n > t.shape[axis] {
                    return Err(Error::Bounds(format!(
                        "index {n} out of range 1..={} on axis {}",
                        t.shape[axis],
                        axis + 1
                    )));
                }
                fixed[axis] = Some(n - 1);
            }
            _ => kept.push(m),
        }
    }
    let t = if fixed.iter().any(Option::is_some) {
        let st = strides(&t.shape);
        let free: Vec<usize> = (0..t.rank()).filter(|&a| fixed[a].is_none()).collect();
        let shape: Vec<usize> = free.iter().map(|&a| t.shape[a]).collect();
        let data = multi_indices(&shape)
            .map(|idx| {
                let mut full: Vec<usize> = fixed.iter().map(|f| f.unwrap_or(0)).collect();
                for (&a, &i) in free.iter().zip(&idx) {
                    full[a] = i;
                }
                t.data[flat_offset(&st, &full)].clone()
            })
            .collect();
        Tensor {
            shape,
            data,
            indices: kept,
        }
    } else {
        Tensor {
            indices: kept,
            ..t
        }
    };
    Ok(reduce_indices(t)?.into_value())
}

/// Fold every supersubscript axis, left to right, with `f`. Non-tensors pass
/// through unchanged.
pub fn contract<F>(v: Value, mut f: F) -> Result<Value>
where
    F: FnMut(Value, Value) -> Result<Value>,
{
    let mut t = match v {
        Value::Tensor(t) => t,
        other => return Ok(other),
    };
    while let Some(axis) = t.indices.iter().position(|m| m.variance == Variance::SuperSub) {
        let st = strides(&t.shape);
        let n = t.shape[axis];
        let mut shape = t.shape.clone();
        shape.remove(axis);
        let mut data = Vec::with_capacity(shape.iter().product());
        for idx in multi_indices(&shape) {
            let mut full = idx.clone();
            full.insert(axis, 0);
            let mut acc = t.data[flat_offset(&st, &full)].clone();
            for a in 1..n {
                full[axis] = a;
                acc = f(acc, t.data[flat_offset(&st, &full)].clone())?;
            }
            data.push(acc);
        }
        let mut indices = t.indices.clone();
        indices.remove(axis);
        t = Tensor {
            shape,
            data,
            indices,
        };
    }
    Ok(t.into_value())
}

/// Turn superscripts into subscripts and back; supersubscripts stay.
pub fn flip_indices(v: Value) -> Value {
    match v {
        Value::Tensor(mut t) => {
            for m in &mut t.indices {
                m.variance = m.variance.flipped();
            }
            Value::Tensor(t)
        }
        other => other,
    }
}

/// Permute axes so the named marks appear in `order`. Form axes stay trailing.
pub fn transpose(order: &[Sym], t: &Tensor) -> Result<Tensor> {
    let n = t.indices.len();
    let mut perm = Vec::with_capacity(t.rank());
    for s in order {
        let pos = t
            .indices
            .iter()
            .position(|m| matches!(&m.label, Label::Named(x) if x == s))
            .ok_or_else(|| Error::Index(format!("transpose: tensor has no index {s}")))?;
        if perm.contains(&pos) {
            return Err(Error::Index(format!("transpose: index {s} listed twice")));
        }
        perm.push(pos);
    }
    if perm.len() != n {
        return Err(Error::Index(format!(
            "transpose: order lists {} indices but the tensor carries {n}",
            perm.len()
        )));
    }
    let marks: Vec<IndexMark> = perm.iter().map(|&p| t.indices[p].clone()).collect();
    perm.extend(n..t.rank());
    let mut out = t.permute_axes(&perm);
    out.indices = marks;
    Ok(out)
}

/// Apply `f` to every component. When `f` yields indexed tensors, their axes
/// and marks are hoisted after the outer tensor's, then reduced together.
pub fn tensor_map<F>(v: &Value, mut f: F) -> Result<Value>
where
    F: FnMut(&Value) -> Result<Value>,
{
    let t = match v {
        Value::Tensor(t) => t,
        other => return f(other),
    };
    let results = t.data.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
    hoist(&t.shape, &t.indices, results)
}

fn hoist(outer_shape: &[usize], outer_marks: &[IndexMark], results: Vec<Value>) -> Result<Value> {
    let first_inner = match results.iter().find_map(Value::as_tensor) {
        None => {
            return Ok(Value::Tensor(Tensor {
                shape: outer_shape.to_vec(),
                data: results,
                indices: outer_marks.to_vec(),
            }))
        }
        Some(t) => (t.shape.clone(), t.indices.clone()),
    };
    let (inner_shape, inner_marks) = first_inner;
    let mut data = Vec::with_capacity(results.len() * inner_shape.iter().product::<usize>());
    for r in results {
        match r {
            Value::Tensor(t) if t.shape == inner_shape && t.indices == inner_marks => {
                data.extend(t.data)
            }
            _ => {
                return Err(Error::ShapeMismatch(
                    "mapped function returned components of inconsistent shape or indices".into(),
                ))
            }
        }
    }
    let p = outer_shape.len();
    let q = inner_shape.len();
    let n = outer_marks.len();
    let m = inner_marks.len();
    let mut shape = outer_shape.to_vec();
    shape.extend(&inner_shape);
    let combined = Tensor {
        shape,
        data,
        indices: Vec::new(),
    };
    let perm: Vec<usize> = (0..n)
        .chain(p..p + m)
        .chain(n..p)
        .chain(p + m..p + q)
        .collect();
    let mut out = combined.permute_axes(&perm);
    out.indices = outer_marks.iter().chain(&inner_marks).cloned().collect();
    Ok(reduce_indices(out)?.into_value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::ScalarExpr;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Value> {
        v.iter().map(|&n| Value::int(n)).collect()
    }

    fn tensor(shape: &[usize], v: &[i64]) -> Tensor {
        Tensor::new(shape.to_vec(), ints(v)).unwrap()
    }

    fn m33() -> Tensor {
        tensor(&[3, 3], &[11, 12, 13, 21, 22, 23, 31, 32, 33])
    }

    fn cube() -> Tensor {
        tensor(&[2, 2, 2], &[1, 2, 3, 4, 5, 6, 7, 8])
    }

    fn sub(n: &str) -> IndexMark {
        IndexMark::sub(Sym::new(n))
    }

    fn sup(n: &str) -> IndexMark {
        IndexMark::sup(Sym::new(n))
    }

    fn lit(v: Variance, n: usize) -> IndexMark {
        IndexMark::new(v, Label::Int(n))
    }

    fn attach(t: Tensor, marks: Vec<IndexMark>) -> Value {
        attach_indices(Value::Tensor(t), marks).unwrap()
    }

    #[test]
    fn literal_selection() {
        assert_eq!(attach(m33(), vec![lit(Variance::Sub, 2)]).to_string(), "[|21 22 23|]");
        assert_eq!(
            attach(m33(), vec![lit(Variance::Sub, 2), lit(Variance::Sub, 1)]).to_string(),
            "21"
        );
        assert_eq!(
            attach(m33(), vec![lit(Variance::Super, 1), lit(Variance::Super, 1)]).to_string(),
            "11"
        );
    }

    #[test]
    fn over_indexing_and_bounds() {
        let e = attach_indices(Value::Tensor(m33()), vec![sub("i"), sub("j"), sub("k")]).unwrap_err();
        assert_eq!(e.class(), "index-arity");
        let e = attach_indices(Value::Tensor(m33()), vec![lit(Variance::Sub, 4)]).unwrap_err();
        assert_eq!(e.class(), "bounds");
        let e = attach_indices(Value::int(3), vec![sub("i")]).unwrap_err();
        assert_eq!(e.class(), "index-arity");
    }

    #[test]
    fn mixed_literal_and_named() {
        // literal picks axis 0, the named mark binds the remaining axis
        let v = attach(m33(), vec![lit(Variance::Sub, 3), sub("j")]);
        assert_eq!(v.to_string(), "[|31 32 33|]_j");
        let v = attach(m33(), vec![sub("i"), lit(Variance::Sub, 2)]);
        assert_eq!(v.to_string(), "[|12 22 32|]_i");
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(
            attach(m33(), vec![sub("i"), sub("j")]).to_string(),
            "[|[|11 12 13|] [|21 22 23|] [|31 32 33|]|]_i_j"
        );
        assert_eq!(attach(m33(), vec![sub("i"), sub("i")]).to_string(), "[|11 22 33|]_i");
        assert_eq!(
            attach(cube(), vec![sub("i"), sub("j"), sub("i")]).to_string(),
            "[|[|1 3|] [|6 8|]|]_i_j"
        );
        assert_eq!(
            attach(cube(), vec![sub("i"), sub("i"), sub("i")]).to_string(),
            "[|1 8|]_i"
        );
        assert_eq!(
            attach(cube(), vec![sup("i"), sup("j"), sup("i")]).to_string(),
            "[|[|1 3|] [|6 8|]|]~i~j"
        );
        assert_eq!(attach(m33(), vec![sup("i"), sub("i")]).to_string(), "[|11 22 33|]~_i");
        assert_eq!(
            attach(cube(), vec![sup("i"), sup("i"), sub("i")]).to_string(),
            "[|1 8|]~_i"
        );
    }

    #[test]
    fn reduction_trace_with_mixed_variance() {
        // {[i,1],[j,1],[i,-1]} -> {[i,0],[j,1]}
        let v = attach(cube(), vec![sup("i"), sup("j"), sub("i")]);
        let t = v.as_tensor().unwrap();
        assert_eq!(t.to_string(), "[|[|1 3|] [|6 8|]|]~_i~j");
        assert_eq!(t.indices()[0].variance, Variance::SuperSub);
        assert_eq!(t.indices()[1].variance, Variance::Super);
    }

    #[test]
    fn repeated_label_dimension_mismatch() {
        let t = tensor(&[2, 3], &[1, 2, 3, 4, 5, 6]);
        let e = attach_indices(Value::Tensor(t), vec![sub("i"), sub("i")]).unwrap_err();
        assert_eq!(e.class(), "shape-mismatch");
    }

    #[test]
    fn dummies_never_collapse() {
        let marks = vec![
            IndexMark::new(Variance::Sub, Label::dummy()),
            IndexMark::new(Variance::Sub, Label::dummy()),
        ];
        let v = attach(m33(), marks);
        assert_eq!(v.to_string(), "[|[|11 12 13|] [|21 22 23|] [|31 32 33|]|]_#_#");
        let d = Label::Dummy(7);
        assert!(!d.same_as(&d.clone()));
    }

    #[test]
    fn identical_pairs() {
        assert_eq!(find_identical_pairs(&[sup("i"), sub("j"), sup("i")]), vec![(0, 2)]);
        assert!(find_identical_pairs(&[sup("i"), sub("j")]).is_empty());
        assert_eq!(
            find_identical_pairs(&[sup("i"), sub("i"), sup("i")]),
            vec![(0, 1), (0, 2), (1, 2)]
        );
    }

    #[test]
    fn assoc_helpers() {
        let marks = vec![sup("i"), sub("j")];
        assert_eq!(variance_at(1, &marks), Variance::Sub);
        let mut removed = marks.clone();
        remove_mark(1, &mut removed);
        assert_eq!(removed, vec![sup("i")]);
        let mut updated = marks.clone();
        update_variance(1, Variance::SuperSub, &mut updated);
        assert_eq!(updated[1].variance, Variance::SuperSub);
        assert_eq!(updated[0], sup("i"));
    }

    #[test]
    fn diag_examples() {
        let m = tensor(&[2, 2], &[11, 12, 21, 22]);
        assert_eq!(diag(0, 1, &m).unwrap().to_string(), "[|11 22|]");
        assert_eq!(diag(0, 1, &m33()).unwrap().to_string(), "[|11 22 33|]");
        assert_eq!(diag(0, 2, &cube()).unwrap().to_string(), "[|[|1 3|] [|6 8|]|]");
        let bad = tensor(&[2, 3], &[1, 2, 3, 4, 5, 6]);
        assert_eq!(diag(0, 1, &bad).unwrap_err().class(), "shape-mismatch");
    }

    fn add(a: Value, b: Value) -> Result<Value> {
        Ok(Value::Scalar(a.as_scalar()? + b.as_scalar()?))
    }

    #[test]
    fn contraction() {
        let v = attach(m33(), vec![sup("i"), sub("i")]);
        assert_eq!(contract(v, add).unwrap().to_string(), "66");
        let lower = attach(tensor(&[3], &[10, 40, 90]), vec![sub("i")]);
        assert_eq!(contract(lower, add).unwrap().to_string(), "[|10 40 90|]_i");
        assert_eq!(contract(Value::int(5), add).unwrap().to_string(), "5");
    }

    #[test]
    fn flipping() {
        let v = attach(tensor(&[2], &[1, 2]), vec![sup("i")]);
        assert_eq!(flip_indices(v).to_string(), "[|1 2|]_i");
        let v = attach(m33(), vec![sup("i"), sub("i")]);
        assert_eq!(flip_indices(v).to_string(), "[|11 22 33|]~_i");
        assert_eq!(flip_indices(Value::int(7)).to_string(), "7");
    }

    #[test]
    fn transposition() {
        let m = attach(tensor(&[2, 2], &[1, 2, 3, 4]), vec![sub("i"), sub("j")]);
        let m = m.as_tensor().unwrap();
        let t = transpose(&[Sym::new("j"), Sym::new("i")], m).unwrap();
        assert_eq!(t.to_string(), "[|[|1 3|] [|2 4|]|]_j_i");
        let same = transpose(&[Sym::new("i"), Sym::new("j")], m).unwrap();
        assert_eq!(&same, m);
        let e = transpose(&[Sym::new("i")], m).unwrap_err();
        assert_eq!(e.class(), "index");
        let e = transpose(&[Sym::new("i"), Sym::new("k")], m).unwrap_err();
        assert_eq!(e.class(), "index");
    }

    #[test]
    fn transpose_rank3_against_permutation_oracle() {
        let t = attach(cube(), vec![sub("k"), sub("i"), sub("j")]);
        let t = t.as_tensor().unwrap();
        let out = transpose(&[Sym::new("i"), Sym::new("j"), Sym::new("k")], t).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    assert_eq!(out.get(&[a, b, c]), t.get(&[c, a, b]));
                }
            }
        }
    }

    #[test]
    fn transpose_keeps_form_axes_trailing() {
        let t = attach(cube(), vec![sub("i"), sub("j")]);
        let t = t.as_tensor().unwrap();
        let out = transpose(&[Sym::new("j"), Sym::new("i")], t).unwrap();
        assert_eq!(out.form_degree(), 1);
        assert_eq!(out.get(&[1, 0, 1]), t.get(&[0, 1, 1]));
    }

    fn plus_one(v: &Value) -> Result<Value> {
        Ok(Value::Scalar(v.as_scalar()? + &ScalarExpr::one()))
    }

    #[test]
    fn mapping_and_hoisting() {
        let v = attach(tensor(&[3], &[1, 2, 3]), vec![sub("i")]);
        assert_eq!(tensor_map(&v, plus_one).unwrap().to_string(), "[|2 3 4|]_i");

        let ys = |marks| attach(tensor(&[3], &[10, 20, 30]), marks);
        let min = |x: &Value, other: &Value| {
            tensor_map(other, |y| {
                let a = x.as_scalar()?.as_integer().unwrap();
                let b = y.as_scalar()?.as_integer().unwrap();
                Ok(Value::int(a.min(b)))
            })
        };
        let other = ys(vec![sub("j")]);
        let out = tensor_map(&v, |x| min(x, &other)).unwrap();
        assert_eq!(out.to_string(), "[|[|1 1 1|] [|2 2 2|] [|3 3 3|]|]_i_j");
        let other = ys(vec![sub("i")]);
        let out = tensor_map(&v, |x| min(x, &other)).unwrap();
        assert_eq!(out.to_string(), "[|1 2 3|]_i");
    }

    #[test]
    fn hoisting_puts_form_axes_last() {
        // outer: 2-vector with one mark; inner: unindexed 3-vector (a form axis)
        let v = attach(tensor(&[2], &[1, 2]), vec![sub("i")]);
        let out = tensor_map(&v, |x| {
            let n = x.as_scalar()?.as_integer().unwrap();
            let inner = Tensor::new(vec![3], ints(&[n, 10 * n, 100 * n]))?;
            Ok(attach_indices(Value::Tensor(inner), vec![])?)
        })
        .unwrap();
        assert_eq!(out.to_string(), "[|[|1 10 100|] [|2 20 200|]|]_i");

        // outer has a form axis, inner has a mark: the mark moves ahead
        let outer = Value::Tensor(tensor(&[2], &[1, 2]));
        let out = tensor_map(&outer, |x| {
            let n = x.as_scalar()?.as_integer().unwrap();
            attach_indices(Value::Tensor(tensor(&[3], &[n, n + 1, n + 2])), vec![sub("k")])
        })
        .unwrap();
        let t = out.as_tensor().unwrap();
        assert_eq!(t.shape(), &[3, 2]);
        assert_eq!(t.to_string(), "[|[|1 2|] [|2 3|] [|3 4|]|]_k");
    }

    #[test]
    fn mapping_rejects_inconsistent_results() {
        let v = Value::Tensor(tensor(&[2], &[1, 2]));
        let e = tensor_map(&v, |x| {
            let n = x.as_scalar()?.as_integer().unwrap() as usize;
            Ok(Value::Tensor(Tensor::new(vec![n], ints(&vec![0; n]))?))
        })
        .unwrap_err();
        assert_eq!(e.class(), "shape-mismatch");
    }

    // Property checks over random small tensors.

    fn random_tensor() -> impl Strategy<Value = (Vec<usize>, Vec<i64>)> {
        proptest::collection::vec(1usize..4, 1..5).prop_flat_map(|shape| {
            let n: usize = shape.iter().product();
            (Just(shape), proptest::collection::vec(-50i64..50, n))
        })
    }

    fn equal_dim_tensor() -> impl Strategy<Value = (usize, usize, Vec<i64>)> {
        (2usize..4, 2usize..5).prop_flat_map(|(d, r)| {
            (Just(d), Just(r), proptest::collection::vec(-50i64..50, d.pow(r as u32)))
        })
    }

    fn labelled_marks(rank: usize) -> impl Strategy<Value = Vec<IndexMark>> {
        proptest::collection::vec((0usize..3, prop_oneof![Just(Variance::Super), Just(Variance::Sub)]), rank)
            .prop_map(|v| {
                v.into_iter()
                    .map(|(l, var)| IndexMark::new(var, Label::Named(Sym::new(["a", "b", "c"][l]))))
                    .collect()
            })
    }

    proptest! {
        #[test]
        fn literal_lookup_matches_row_major((shape, data) in random_tensor(), seed in any::<u64>()) {
            let t = tensor(&shape, &data);
            let idx: Vec<usize> = shape.iter().enumerate()
                .map(|(a, &n)| ((seed >> (8 * a)) as usize) % n).collect();
            let marks = idx.iter().map(|&i| lit(Variance::Sub, i + 1)).collect();
            let got = attach_indices(Value::Tensor(t), marks).unwrap();
            let st = strides(&shape);
            let off: usize = idx.iter().zip(&st).map(|(i, s)| i * s).sum();
            prop_assert_eq!(got, Value::int(data[off]));
        }

        #[test]
        fn reduction_idempotent_and_distinct(
            (d, r, data) in equal_dim_tensor(),
            marks in (2usize..5).prop_flat_map(labelled_marks),
        ) {
            let marks: Vec<IndexMark> = marks.into_iter().take(r).collect();
            let t = Tensor::new(vec![d; r], ints(&data)).unwrap().with_marks(marks).unwrap();
            let once = reduce_indices(t).unwrap();
            prop_assert!(find_identical_pairs(once.indices()).is_empty());
            let twice = reduce_indices(once.clone()).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn flipped_variances_give_identical_components(
            (d, r, data) in equal_dim_tensor(),
            marks in (2usize..5).prop_flat_map(labelled_marks),
        ) {
            let marks: Vec<IndexMark> = marks.into_iter().take(r).collect();
            let t = Tensor::new(vec![d; r], ints(&data)).unwrap();
            let a = reduce_indices(t.clone().with_marks(marks.clone()).unwrap()).unwrap();
            let flipped = marks.iter()
                .map(|m| IndexMark::new(m.variance.flipped(), m.label.clone())).collect();
            let b = reduce_indices(t.with_marks(flipped).unwrap()).unwrap();
            prop_assert_eq!(a.data(), b.data());
            prop_assert_eq!(a.shape(), b.shape());
            for (x, y) in a.indices().iter().zip(b.indices()) {
                prop_assert_eq!(x.variance, y.variance.flipped());
            }
        }

        #[test]
        fn diag_commutes_with_unrelated_transposition((d, r, data) in equal_dim_tensor(), seed in any::<u64>()) {
            prop_assume!(r >= 3);
            let t = Tensor::new(vec![d; r], ints(&data)).unwrap();
            // diagonal over the first two axes; reverse the remaining ones
            let perm: Vec<usize> = (0..2).chain((2..r).rev()).collect();
            let lhs = diag(0, 1, &t.permute_axes(&perm)).unwrap();
            let dt = diag(0, 1, &t).unwrap();
            let perm2: Vec<usize> = std::iter::once(0).chain((1..r - 1).rev()).collect();
            let rhs = dt.permute_axes(&perm2);
            prop_assert_eq!(lhs.data(), rhs.data());
            // brute force: component at (a, rest...) of the diagonal is t[a, a, rest...]
            let probe: Vec<usize> = (0..r - 1).map(|a| ((seed >> (4 * a)) as usize) % d).collect();
            let mut full = vec![probe[0], probe[0]];
            full.extend(&probe[1..]);
            prop_assert_eq!(dt.get(&probe), t.get(&full));
        }

        #[test]
        fn contraction_matches_loop_dot(u in proptest::collection::vec(-20i64..20, 2..5), seed in any::<u64>()) {
            let n = u.len();
            let w: Vec<i64> = (0..n).map(|k| ((seed >> (8 * k)) % 41) as i64 - 20).collect();
            // outer product u~i w_i, reduced to the ~_i diagonal, then folded
            let mut outer = Vec::new();
            for a in &u { for b in &w { outer.push(a * b); } }
            let t = tensor(&[n, n], &outer);
            let v = attach(t, vec![sup("i"), sub("i")]);
            let got = contract(v, add).unwrap();
            let mut sum = 0i64;
            for k in 0..n { sum += u[k] * w[k]; }
            prop_assert_eq!(got, Value::int(sum));
        }

        #[test]
        fn flip_is_involution(marks in (1usize..4).prop_flat_map(labelled_marks), d in 2usize..4) {
            let r = marks.len();
            let t = Tensor::new(vec![d; r], ints(&vec![1; d.pow(r as u32)])).unwrap()
                .with_marks(marks).unwrap();
            let v = Value::Tensor(t);
            prop_assert_eq!(flip_indices(flip_indices(v.clone())), v);
        }
    }
}
