use std::rc::Rc;

use crate::error::{Error, Result};
use crate::forms::{det, df_normalize, df_order, hodge, levi_civita};
use crate::symexpr::{ScalarExpr, Sym};
use crate::tensor::{contract, flip_indices, tensor_map, transpose, Tensor};
use crate::value::Value;

use super::{Env, Interpreter, Primitive, PrimitiveFn, PrimitiveKind};

use PrimitiveKind::{Scalar, Tensor as Whole};

const TABLE: &[(&str, PrimitiveKind, usize, Option<usize>, PrimitiveFn)] = &[
    ("+", Scalar, 0, None, add),
    ("*", Scalar, 0, None, mul),
    ("-", Scalar, 1, None, sub),
    ("/", Scalar, 1, None, div),
    ("^", Scalar, 2, Some(2), expt),
    ("expt", Scalar, 2, Some(2), expt),
    ("sin", Scalar, 1, Some(1), sin),
    ("cos", Scalar, 1, Some(1), cos),
    ("sqrt", Scalar, 1, Some(1), sqrt),
    ("abs", Scalar, 1, Some(1), abs),
    ("less-than?", Scalar, 2, Some(2), less_than),
    ("differentiate", Scalar, 2, Some(2), differentiate),
    ("eq?", Whole, 2, Some(2), equal),
    ("contract", Whole, 2, Some(2), contract_with),
    ("tensor-map", Whole, 2, Some(2), map_components),
    ("flip-indices", Whole, 1, Some(1), flip),
    ("transpose", Whole, 2, Some(2), transpose_by),
    ("df-order", Whole, 1, Some(1), order),
    ("df-normalize", Whole, 1, Some(1), normalize),
    ("hodge", Whole, 3, Some(3), hodge_star),
    ("M.det", Whole, 1, Some(1), determinant),
    ("levi-civita", Whole, 1, Some(1), epsilon),
    ("map", Whole, 2, Some(2), map),
    ("between", Whole, 2, Some(2), between),
];

pub(super) fn install(env: &Env) {
    for &(name, kind, min_args, max_args, func) in TABLE {
        let p = Primitive {
            name,
            kind,
            min_args,
            max_args,
            func,
        };
        env.define(name, None, Value::Primitive(Rc::new(p)));
    }
}

fn scalars(args: &[Value]) -> Result<Vec<&ScalarExpr>> {
    args.iter().map(Value::as_scalar).collect()
}

fn int_arg(v: &Value, what: &str) -> Result<i64> {
    v.as_scalar()?
        .as_integer()
        .ok_or_else(|| Error::Type(format!("{what} must be an integer, found {v}")))
}

fn tensor_arg<'a>(v: &'a Value, what: &str) -> Result<&'a Tensor> {
    v.as_tensor()
        .ok_or_else(|| Error::Type(format!("{what} must be a tensor, found a {}", v.type_name())))
}

fn add(_: &Interpreter, args: &[Value]) -> Result<Value> {
    let acc = scalars(args)?.into_iter().fold(ScalarExpr::zero(), |a, b| &a + b);
    Ok(acc.into())
}

fn mul(_: &Interpreter, args: &[Value]) -> Result<Value> {
    let acc = scalars(args)?.into_iter().fold(ScalarExpr::one(), |a, b| &a * b);
    Ok(acc.into())
}

fn sub(_: &Interpreter, args: &[Value]) -> Result<Value> {
    let xs = scalars(args)?;
    if let [x] = xs.as_slice() {
        return Ok((-*x).into());
    }
    Ok(xs[1..].iter().fold(xs[0].clone(), |a, b| &a - *b).into())
}

fn div(_: &Interpreter, args: &[Value]) -> Result<Value> {
    let xs = scalars(args)?;
    if let [x] = xs.as_slice() {
        return Ok(x.reciprocal()?.into());
    }
    let mut acc = xs[0].clone();
    for x in &xs[1..] {
        acc = acc.checked_div(x)?;
    }
    Ok(acc.into())
}

fn expt(_: &Interpreter, args: &[Value]) -> Result<Value> {
    let n = int_arg(&args[1], "exponent")?;
    Ok(args[0].as_scalar()?.pow(n)?.into())
}

fn sin(_: &Interpreter, args: &[Value]) -> Result<Value> {
    Ok(ScalarExpr::sin(args[0].as_scalar()?.clone()).into())
}

fn cos(_: &Interpreter, args: &[Value]) -> Result<Value> {
    Ok(ScalarExpr::cos(args[0].as_scalar()?.clone()).into())
}

fn sqrt(_: &Interpreter, args: &[Value]) -> Result<Value> {
    Ok(ScalarExpr::sqrt(args[0].as_scalar()?.clone()).into())
}

fn abs(_: &Interpreter, args: &[Value]) -> Result<Value> {
    Ok(ScalarExpr::abs(args[0].as_scalar()?.clone()).into())
}

fn less_than(_: &Interpreter, args: &[Value]) -> Result<Value> {
    let xs = scalars(args)?;
    match (xs[0].as_rational(), xs[1].as_rational()) {
        (Some(a), Some(b)) => Ok(Value::Bool(a < b)),
        _ => Err(Error::Type(format!(
            "less-than? needs numbers, found {} and {}",
            xs[0], xs[1]
        ))),
    }
}

fn differentiate(_: &Interpreter, args: &[Value]) -> Result<Value> {
    let xs = scalars(args)?;
    Ok(xs[0].differentiate_by(xs[1])?.into())
}

fn equal(_: &Interpreter, args: &[Value]) -> Result<Value> {
    Ok(Value::Bool(args[0] == args[1]))
}

fn contract_with(interp: &Interpreter, args: &[Value]) -> Result<Value> {
    let f = &args[0];
    contract(args[1].clone(), |a, b| interp.apply(f, vec![a, b], false))
}

fn map_components(interp: &Interpreter, args: &[Value]) -> Result<Value> {
    let f = &args[0];
    tensor_map(&args[1], |c| interp.apply(f, vec![c.clone()], false))
}

fn flip(_: &Interpreter, args: &[Value]) -> Result<Value> {
    Ok(flip_indices(args[0].clone()))
}

fn transpose_by(_: &Interpreter, args: &[Value]) -> Result<Value> {
    let order: Vec<Sym> = match &args[0] {
        Value::Collection(items) => items
            .iter()
            .map(|v| {
                v.as_scalar()
                    .ok()
                    .and_then(ScalarExpr::as_symbol)
                    .cloned()
                    .ok_or_else(|| Error::Type(format!("transpose order must list symbols, found {v}")))
            })
            .collect::<Result<_>>()?,
        other => {
            return Err(Error::Type(format!(
                "transpose order must be a collection, found a {}",
                other.type_name()
            )))
        }
    };
    match &args[1] {
        Value::Tensor(t) => Ok(Value::Tensor(transpose(&order, t)?)),
        other if order.is_empty() => Ok(other.clone()),
        other => Err(Error::Index(format!("transpose: a {} carries no indices", other.type_name()))),
    }
}

fn order(_: &Interpreter, args: &[Value]) -> Result<Value> {
    Ok(Value::int(df_order(&args[0]) as i64))
}

fn normalize(_: &Interpreter, args: &[Value]) -> Result<Value> {
    df_normalize(&args[0])
}

fn hodge_star(_: &Interpreter, args: &[Value]) -> Result<Value> {
    hodge(
        &args[0],
        tensor_arg(&args[1], "metric")?,
        tensor_arg(&args[2], "inverse metric")?,
    )
}

fn determinant(_: &Interpreter, args: &[Value]) -> Result<Value> {
    Ok(det(tensor_arg(&args[0], "M.det argument")?)?.into())
}

fn epsilon(_: &Interpreter, args: &[Value]) -> Result<Value> {
    let n = int_arg(&args[0], "dimension")?;
    if n < 1 {
        return Err(Error::Domain(format!("Levi-Civita symbol of dimension {n}")));
    }
    Ok(Value::Tensor(levi_civita(n as usize)?))
}

fn map(interp: &Interpreter, args: &[Value]) -> Result<Value> {
    let f = &args[0];
    match &args[1] {
        Value::Collection(items) => Ok(Value::Collection(
            items
                .iter()
                .map(|v| interp.apply(f, vec![v.clone()], false))
                .collect::<Result<_>>()?,
        )),
        t @ Value::Tensor(_) => tensor_map(t, |c| interp.apply(f, vec![c.clone()], false)),
        other => Err(Error::Type(format!("cannot map over a {}", other.type_name()))),
    }
}

fn between(_: &Interpreter, args: &[Value]) -> Result<Value> {
    let lo = int_arg(&args[0], "range start")?;
    let hi = int_arg(&args[1], "range end")?;
    Ok(Value::Collection((lo..=hi).map(Value::int).collect()))
}
