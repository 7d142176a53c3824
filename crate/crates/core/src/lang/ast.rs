use std::fmt;

use crate::apply::ParamKind;
use crate::error::Span;
use crate::tensor::Variance;

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
}

impl Node {
    pub fn new(kind: NodeKind, span: Span) -> Self {
        Node { kind, span }
    }

    pub fn symbol(name: &str, span: Span) -> Self {
        Node::new(NodeKind::Symbol(name.to_string()), span)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexLabel {
    Symbol(String),
    Int(i64),
    /// `#`; the id is fresh per occurrence.
    Dummy(u64),
}

#[derive(Debug, Clone)]
pub struct IndexSuffix {
    pub variance: Variance,
    pub label: IndexLabel,
}

#[derive(Debug, Clone)]
pub struct Param {
    pub kind: ParamKind,
    pub name: String,
}

/// Name of a `define`, with its index slots. `$Γ_i_j_k` has labelled slots,
/// `$g~~` bare ones.
#[derive(Debug, Clone)]
pub struct DefName {
    pub name: String,
    pub slots: Vec<(Variance, Option<IndexLabel>)>,
}

impl DefName {
    pub fn signature(&self) -> Option<Vec<Variance>> {
        (!self.slots.is_empty()).then(|| self.slots.iter().map(|(v, _)| *v).collect())
    }
}

#[derive(Debug, Clone)]
pub enum NodeKind {
    Int(i64),
    Str(String),
    Symbol(String),
    Indexed {
        base: Box<Node>,
        indices: Vec<IndexSuffix>,
    },
    Tensor(Vec<Node>),
    Collection(Vec<Node>),
    Apply {
        func: Box<Node>,
        args: Vec<Node>,
        /// `!`-prefixed: omitted indices are completed with distinct symbols.
        bang: bool,
    },
    Lambda {
        params: Vec<Param>,
        body: Box<Node>,
    },
    Define {
        name: DefName,
        body: Box<Node>,
    },
    WithSymbols {
        names: Vec<String>,
        body: Box<Node>,
    },
    Let {
        bindings: Vec<(String, Node)>,
        body: Box<Node>,
    },
    If {
        cond: Box<Node>,
        then: Box<Node>,
        otherwise: Box<Node>,
    },
}

fn write_label(f: &mut fmt::Formatter<'_>, l: &IndexLabel) -> fmt::Result {
    match l {
        IndexLabel::Symbol(s) => f.write_str(s),
        IndexLabel::Int(n) => write!(f, "{n}"),
        IndexLabel::Dummy(_) => f.write_str("#"),
    }
}

fn write_all(f: &mut fmt::Formatter<'_>, nodes: &[Node]) -> fmt::Result {
    for (i, n) in nodes.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{n}")?;
    }
    Ok(())
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NodeKind::Int(n) => write!(f, "{n}"),
            NodeKind::Str(s) => write!(f, "{s:?}"),
            NodeKind::Symbol(s) => f.write_str(s),
            NodeKind::Indexed { base, indices } => {
                write!(f, "{base}")?;
                for ix in indices {
                    f.write_str(ix.variance.marker())?;
                    write_label(f, &ix.label)?;
                }
                Ok(())
            }
            NodeKind::Tensor(items) => {
                f.write_str("[|")?;
                write_all(f, items)?;
                f.write_str("|]")
            }
            NodeKind::Collection(items) => {
                f.write_str("{")?;
                write_all(f, items)?;
                f.write_str("}")
            }
            NodeKind::Apply { func, args, bang } => {
                if let (NodeKind::Symbol(s), [base, exp], false) = (&func.kind, args.as_slice(), bang) {
                    if s == "^" {
                        return write!(f, "{base}^{exp}");
                    }
                }
                if *bang {
                    f.write_str("!")?;
                }
                write!(f, "({func}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            NodeKind::Lambda { params, body } => {
                f.write_str("(lambda [")?;
                for (i, p) in params.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{}{}", p.kind, p.name)?;
                }
                write!(f, "] {body})")
            }
            NodeKind::Define { name, body } => {
                write!(f, "(define ${}", name.name)?;
                for (v, l) in &name.slots {
                    f.write_str(v.marker())?;
                    if let Some(l) = l {
                        write_label(f, l)?;
                    }
                }
                write!(f, " {body})")
            }
            NodeKind::WithSymbols { names, body } => {
                write!(f, "(with-symbols {{{}}} {body})", names.join(" "))
            }
            NodeKind::Let { bindings, body } => {
                f.write_str("(let {")?;
                for (i, (n, v)) in bindings.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "[${n} {v}]")?;
                }
                write!(f, "}} {body})")
            }
            NodeKind::If {
                cond,
                then,
                otherwise,
            } => write!(f, "(if {cond} {then} {otherwise})"),
        }
    }
}
