//! Environment-based evaluator: closures with parameter kinds, lookup by
//! index signature, builtins and the prelude.

mod builtins;
mod env;

use std::rc::Rc;

pub use env::Env;

use crate::apply::{apply_params, apply_scalar, complete_omitted_indices, with_symbols_scope, CompletionMode};
use crate::error::{Error, Result};
use crate::lang::{parse_program, IndexLabel, IndexSuffix, Node, NodeKind, Param};
use crate::symexpr::{ScalarExpr, Sym};
use crate::tensor::{attach_indices, IndexMark, Label, Tensor, Variance};
use crate::value::Value;

const PRELUDE: &str = include_str!("prelude.tegi");

pub struct Closure {
    pub params: Vec<Param>,
    pub body: Rc<Node>,
    pub env: Env,
    /// Prelude closures report errors at the call site, not inside their body.
    transparent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitiveKind {
    /// Mapped over tensor components like a `$` lambda.
    Scalar,
    /// Receives its arguments whole.
    Tensor,
}

pub type PrimitiveFn = fn(&Interpreter, &[Value]) -> Result<Value>;

pub struct Primitive {
    pub name: &'static str,
    pub kind: PrimitiveKind,
    pub min_args: usize,
    /// `None` for variadic.
    pub max_args: Option<usize>,
    pub func: PrimitiveFn,
}

impl Primitive {
    fn check_arity(&self, n: usize) -> Result<()> {
        let ok = n >= self.min_args && self.max_args.map_or(true, |m| n <= m);
        if ok {
            return Ok(());
        }
        let want = match self.max_args {
            Some(m) if m == self.min_args => format!("{m}"),
            Some(m) => format!("{} to {m}", self.min_args),
            None => format!("at least {}", self.min_args),
        };
        Err(Error::Arity(format!("{} expects {want} arguments, got {n}", self.name)))
    }
}

fn signature_name(name: &str, sig: &[Variance]) -> String {
    let mut s = name.to_string();
    for v in sig {
        s.push_str(v.marker());
    }
    s
}

fn is_scalar_function(f: &Value) -> bool {
    match f {
        Value::Primitive(p) => p.kind == PrimitiveKind::Scalar,
        Value::Closure(c) => !c.params.is_empty() && c.params.iter().all(|p| p.kind.maps_components()),
        _ => false,
    }
}

pub struct Interpreter {
    global: Env,
}

impl Default for Interpreter {
    fn default() -> Self {
        Self::new()
    }
}

impl Interpreter {
    /// Builtins plus the prelude.
    pub fn new() -> Self {
        let interp = Interpreter { global: Env::new() };
        builtins::install(&interp.global);
        let prelude = parse_program(PRELUDE).expect("prelude parses");
        for form in &prelude {
            interp
                .eval_with(form, &interp.global, true)
                .expect("prelude evaluates");
        }
        interp
    }

    pub fn global(&self) -> &Env {
        &self.global
    }

    pub fn lookup(&self, name: &str, signature: Option<&[Variance]>) -> Option<Value> {
        self.global.lookup(name, signature)
    }

    /// Evaluate one desugared top-level form; `None` for a definition.
    pub fn run_form(&self, node: &Node) -> Result<Option<Value>> {
        let v = self.eval(node, &self.global)?;
        Ok((!matches!(node.kind, NodeKind::Define { .. })).then_some(v))
    }

    /// Parse and evaluate a program, returning the value of every
    /// non-definition form in order.
    pub fn run_source(&self, text: &str) -> Result<Vec<Value>> {
        let mut out = Vec::new();
        for form in parse_program(text)? {
            out.extend(self.run_form(&form)?);
        }
        Ok(out)
    }

    /// Value of the last form of `text`.
    pub fn eval_str(&self, text: &str) -> Result<Value> {
        let mut last = None;
        for form in parse_program(text)? {
            last = Some(self.eval(&form, &self.global)?);
        }
        last.ok_or_else(|| Error::Type("no expression to evaluate".into()))
    }

    pub fn eval(&self, node: &Node, env: &Env) -> Result<Value> {
        self.eval_with(node, env, false)
    }

    fn eval_with(&self, node: &Node, env: &Env, prelude: bool) -> Result<Value> {
        self.eval_node(node, env, prelude).map_err(|e| e.at(node.span))
    }

    fn eval_node(&self, node: &Node, env: &Env, prelude: bool) -> Result<Value> {
        let eval = |n: &Node| self.eval_with(n, env, prelude);
        match &node.kind {
            NodeKind::Int(n) => Ok(Value::int(*n)),
            NodeKind::Str(s) => Ok(Value::Str(s.clone())),
            NodeKind::Symbol(name) => Ok(env
                .lookup(name, None)
                .unwrap_or_else(|| Value::Scalar(ScalarExpr::var(name)))),
            NodeKind::Indexed { base, indices } => {
                let marks = self.eval_marks(indices, env)?;
                let value = match &base.kind {
                    NodeKind::Symbol(name) => {
                        let sig: Vec<Variance> = indices.iter().map(|i| i.variance).collect();
                        env.lookup(name, Some(&sig)).ok_or_else(|| {
                            Error::Unbound(format!(
                                "no binding for `{}` or `{name}`",
                                signature_name(name, &sig)
                            ))
                        })?
                    }
                    _ => eval(base)?,
                };
                attach_indices(value, marks)
            }
            NodeKind::Tensor(items) => {
                let items = items.iter().map(eval).collect::<Result<Vec<_>>>()?;
                Ok(Value::Tensor(Tensor::from_components(items)?))
            }
            NodeKind::Collection(items) => Ok(Value::Collection(items.iter().map(eval).collect::<Result<_>>()?)),
            NodeKind::Apply { func, args, bang } => {
                let f = eval(func)?;
                let args = args.iter().map(eval).collect::<Result<Vec<_>>>()?;
                self.apply(&f, args, *bang)
            }
            NodeKind::Lambda { params, body } => Ok(Value::Closure(Rc::new(Closure {
                params: params.clone(),
                body: Rc::new((**body).clone()),
                env: env.clone(),
                transparent: prelude,
            }))),
            NodeKind::Define { name, body } => {
                let v = eval(body)?;
                env.define(&name.name, name.signature(), v.clone());
                Ok(v)
            }
            NodeKind::WithSymbols { names, body } => {
                let frame = env.child();
                let syms: Vec<Sym> = names.iter().map(|n| Sym::fresh(n)).collect();
                for s in &syms {
                    frame.define(s.name(), None, Value::Scalar(ScalarExpr::symbol(s.clone())));
                }
                let v = self.eval_with(body, &frame, prelude)?;
                Ok(with_symbols_scope(&syms, v))
            }
            NodeKind::Let { bindings, body } => {
                let frame = env.child();
                for (name, value) in bindings {
                    let v = self.eval_with(value, &frame, prelude)?;
                    frame.define(name, None, v);
                }
                self.eval_with(body, &frame, prelude)
            }
            NodeKind::If {
                cond,
                then,
                otherwise,
            } => match eval(cond)? {
                Value::Bool(true) => eval(then),
                Value::Bool(false) => eval(otherwise),
                other => Err(Error::Type(format!(
                    "if condition must be a boolean, found a {}",
                    other.type_name()
                ))),
            },
        }
    }

    /// Index labels: a name bound to a symbol (by `with-symbols`) or to a
    /// positive integer stands for that; any other name is itself.
    fn eval_marks(&self, indices: &[IndexSuffix], env: &Env) -> Result<Vec<IndexMark>> {
        indices
            .iter()
            .map(|ix| {
                let label = match &ix.label {
                    IndexLabel::Int(n) if *n >= 1 => Label::Int(*n as usize),
                    IndexLabel::Int(n) => {
                        return Err(Error::Bounds(format!("index {n} is not a positive position")))
                    }
                    IndexLabel::Dummy(_) => Label::dummy(),
                    IndexLabel::Symbol(name) => match env.lookup(name, None) {
                        Some(Value::Scalar(e)) => match (e.as_symbol(), e.as_integer()) {
                            (Some(s), _) => Label::Named(s.clone()),
                            (None, Some(n)) if n >= 1 => Label::Int(n as usize),
                            _ => Label::Named(Sym::new(name)),
                        },
                        _ => Label::Named(Sym::new(name)),
                    },
                };
                Ok(IndexMark::new(ix.variance, label))
            })
            .collect()
    }

    /// Apply `f`, completing omitted indices first: distinct symbols under
    /// `!`, shared ones for scalar functions, none otherwise.
    pub fn apply(&self, f: &Value, args: Vec<Value>, bang: bool) -> Result<Value> {
        let mode = if bang {
            Some(CompletionMode::Distinct)
        } else if is_scalar_function(f) {
            Some(CompletionMode::Shared)
        } else {
            None
        };
        let (args, generated) = match mode {
            Some(mode) => complete_omitted_indices(args, mode)?,
            None => (args, Vec::new()),
        };
        let out = self.apply_raw(f, args)?;
        Ok(with_symbols_scope(&generated, out))
    }

    fn apply_raw(&self, f: &Value, args: Vec<Value>) -> Result<Value> {
        match f {
            Value::Closure(c) => {
                let kinds: Vec<_> = c.params.iter().map(|p| p.kind).collect();
                let out = apply_params(&kinds, args, &mut |vals| {
                    let frame = c.env.child();
                    for (p, v) in c.params.iter().zip(vals) {
                        frame.define(&p.name, None, v.clone());
                    }
                    self.eval_with(&c.body, &frame, c.transparent)
                });
                match out {
                    Err(e) if c.transparent => Err(e.root().clone()),
                    other => other,
                }
            }
            Value::Primitive(p) => {
                p.check_arity(args.len())?;
                match p.kind {
                    PrimitiveKind::Scalar => apply_scalar(args, &mut |vals| (p.func)(self, vals)),
                    PrimitiveKind::Tensor => (p.func)(self, &args),
                }
            }
            other => Err(Error::Type(format!("cannot apply a {}", other.type_name()))),
        }
    }
}
