//! Rewrites `(define $Γ_i_j_k E)` into
//! `(define $Γ___ (with-symbols {i j k} (transpose {i j k} E)))`.

use crate::error::{Error, Result};

use super::ast::{DefName, IndexLabel, Node, NodeKind};

pub fn desugar_program(nodes: Vec<Node>) -> Result<Vec<Node>> {
    nodes.into_iter().map(desugar).collect()
}

pub fn desugar(node: Node) -> Result<Node> {
    let span = node.span;
    let boxed = |n: Box<Node>| desugar(*n).map(Box::new);
    let all = |ns: Vec<Node>| ns.into_iter().map(desugar).collect::<Result<Vec<_>>>();
    let kind = match node.kind {
        k @ (NodeKind::Int(_) | NodeKind::Str(_) | NodeKind::Symbol(_)) => k,
        NodeKind::Indexed { base, indices } => NodeKind::Indexed {
            base: boxed(base)?,
            indices,
        },
        NodeKind::Tensor(items) => NodeKind::Tensor(all(items)?),
        NodeKind::Collection(items) => NodeKind::Collection(all(items)?),
        NodeKind::Apply { func, args, bang } => NodeKind::Apply {
            func: boxed(func)?,
            args: all(args)?,
            bang,
        },
        NodeKind::Lambda { params, body } => NodeKind::Lambda {
            params,
            body: boxed(body)?,
        },
        NodeKind::Define { name, body } => {
            let body = desugar(*body)?;
            return desugar_define_indices(name, body).map(|kind| Node::new(kind, span)).map_err(|e| e.at(span));
        }
        NodeKind::WithSymbols { names, body } => NodeKind::WithSymbols {
            names,
            body: boxed(body)?,
        },
        NodeKind::Let { bindings, body } => NodeKind::Let {
            bindings: bindings
                .into_iter()
                .map(|(n, v)| desugar(v).map(|v| (n, v)))
                .collect::<Result<_>>()?,
            body: boxed(body)?,
        },
        NodeKind::If {
            cond,
            then,
            otherwise,
        } => NodeKind::If {
            cond: boxed(cond)?,
            then: boxed(then)?,
            otherwise: boxed(otherwise)?,
        },
    };
    Ok(Node::new(kind, span))
}

/// Labelled define slots become bare variance slots; the body is wrapped so
/// the stored tensor has its axes in slot order and no marks.
pub fn desugar_define_indices(name: DefName, body: Node) -> Result<NodeKind> {
    let labelled = name.slots.iter().filter(|(_, l)| l.is_some()).count();
    if labelled == 0 {
        return Ok(NodeKind::Define {
            name,
            body: Box::new(body),
        });
    }
    if labelled != name.slots.len() {
        return Err(Error::Desugar(format!(
            "define name `{}` mixes labelled and bare index slots",
            name.name
        )));
    }
    let mut labels: Vec<String> = Vec::with_capacity(labelled);
    for (_, l) in &name.slots {
        let s = match l {
            Some(IndexLabel::Symbol(s)) => s.clone(),
            _ => {
                return Err(Error::Desugar(format!(
                    "index slots of define name `{}` must be symbols",
                    name.name
                )))
            }
        };
        if labels.contains(&s) {
            return Err(Error::Desugar(format!(
                "index symbol `{s}` repeated in define name `{}`",
                name.name
            )));
        }
        labels.push(s);
    }
    let span = body.span;
    let order = Node::new(
        NodeKind::Collection(labels.iter().map(|s| Node::symbol(s, span)).collect()),
        span,
    );
    let transposed = Node::new(
        NodeKind::Apply {
            func: Box::new(Node::symbol("transpose", span)),
            args: vec![order, body],
            bang: false,
        },
        span,
    );
    let wrapped = Node::new(
        NodeKind::WithSymbols {
            names: labels,
            body: Box::new(transposed),
        },
        span,
    );
    Ok(NodeKind::Define {
        name: DefName {
            name: name.name,
            slots: name.slots.into_iter().map(|(v, _)| (v, None)).collect(),
        },
        body: Box::new(wrapped),
    })
}
