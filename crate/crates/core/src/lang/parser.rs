use crate::apply::ParamKind;
use crate::error::{Error, Result, Span};
use crate::symexpr::fresh_id;
use crate::tensor::Variance;

use super::ast::{DefName, IndexLabel, IndexSuffix, Node, NodeKind, Param};
use super::lexer::{Tok, Token};

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

fn err<T>(span: Span, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        span,
        message: message.into(),
    })
}

type Slot = (Variance, Option<IndexLabel>);

impl Parser {
    pub fn new(tokens: Vec<Token>) -> Self {
        Parser { tokens, pos: 0 }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, ahead: usize) -> Option<&Token> {
        self.tokens.get(self.pos + ahead)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn end_span(&self) -> Span {
        self.tokens.last().map(|t| t.span).unwrap_or_default()
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Span> {
        match self.next() {
            Some(t) if t.tok == want => Ok(t.span),
            Some(t) => err(t.span, format!("expected {what}, found `{}`", t.tok)),
            None => err(self.end_span(), format!("expected {what}, found end of input")),
        }
    }

    fn expect_symbol(&mut self, what: &str) -> Result<(String, Span)> {
        match self.next() {
            Some(Token {
                tok: Tok::Sym(s),
                span,
                ..
            }) => Ok((s, span)),
            Some(t) => err(t.span, format!("expected {what}, found `{}`", t.tok)),
            None => err(self.end_span(), format!("expected {what}, found end of input")),
        }
    }

    fn at_close(&self, close: &Tok) -> Result<bool> {
        match self.peek() {
            Some(t) => Ok(&t.tok == close),
            None => err(self.end_span(), format!("missing `{close}`")),
        }
    }

    pub fn parse_program(mut self) -> Result<Vec<Node>> {
        let mut out = Vec::new();
        while self.peek().is_some() {
            out.push(self.parse_expr()?);
        }
        Ok(out)
    }

    pub fn parse_expr(&mut self) -> Result<Node> {
        let atom = self.parse_atom()?;
        self.parse_suffixes(atom)
    }

    fn parse_atom(&mut self) -> Result<Node> {
        let Some(t) = self.next() else {
            return err(self.end_span(), "unexpected end of input");
        };
        let span = t.span;
        let kind = match t.tok {
            Tok::Int(n) => NodeKind::Int(n),
            Tok::Str(s) => NodeKind::Str(s),
            Tok::Sym(s) => NodeKind::Symbol(s),
            Tok::LParen => return self.parse_form(span, false),
            Tok::Bang => {
                match self.peek() {
                    Some(Token {
                        tok: Tok::LParen,
                        glued: true,
                        ..
                    }) => {}
                    _ => return err(span, "`!` must be followed by an application"),
                }
                let lp = self.next().expect("peeked").span;
                return self.parse_form(lp, true).map(|mut n| {
                    n.span = span;
                    n
                });
            }
            Tok::TensorOpen => {
                let mut items = Vec::new();
                while !self.at_close(&Tok::TensorClose)? {
                    items.push(self.parse_expr()?);
                }
                self.next();
                if items.is_empty() {
                    return err(span, "empty tensor literal");
                }
                NodeKind::Tensor(items)
            }
            Tok::LBrace => {
                let mut items = Vec::new();
                while !self.at_close(&Tok::RBrace)? {
                    items.push(self.parse_expr()?);
                }
                self.next();
                NodeKind::Collection(items)
            }
            Tok::Sub | Tok::Sup => return err(span, "index suffix without an expression to attach to"),
            other => return err(span, format!("unexpected `{other}`")),
        };
        Ok(Node::new(kind, span))
    }

    /// Read glued `_x`, `~x`, `~_x` suffixes. Slots without a label are kept
    /// as `None`; only `define` names accept them.
    fn parse_slots(&mut self) -> Result<Vec<Slot>> {
        let mut slots = Vec::new();
        loop {
            let variance = match self.peek() {
                Some(Token {
                    tok: Tok::Sub,
                    glued: true,
                    ..
                }) => Variance::Sub,
                Some(Token {
                    tok: Tok::Sup,
                    glued: true,
                    ..
                }) => Variance::Super,
                _ => break,
            };
            self.next();
            let is_label = |t: Option<&Token>| {
                matches!(t, Some(Token { tok: Tok::Sym(_) | Tok::Int(_) | Tok::Hash, glued: true, .. }))
            };
            let variance = if variance == Variance::Super
                && matches!(self.peek(), Some(Token { tok: Tok::Sub, glued: true, .. }))
                && is_label(self.peek_at(1))
            {
                self.next();
                Variance::SuperSub
            } else {
                variance
            };
            let label = if is_label(self.peek()) {
                Some(match self.next().expect("peeked").tok {
                    Tok::Sym(s) => IndexLabel::Symbol(s),
                    Tok::Int(n) => IndexLabel::Int(n),
                    _ => IndexLabel::Dummy(fresh_id()),
                })
            } else {
                None
            };
            slots.push((variance, label));
        }
        Ok(slots)
    }

    fn parse_suffixes(&mut self, mut node: Node) -> Result<Node> {
        loop {
            match self.peek() {
                Some(Token {
                    tok: Tok::Sub | Tok::Sup,
                    glued: true,
                    span,
                }) => {
                    let span = *span;
                    let mut indices = Vec::new();
                    for (variance, label) in self.parse_slots()? {
                        match label {
                            Some(label) => indices.push(IndexSuffix { variance, label }),
                            None => return err(span, "index marker without a label"),
                        }
                    }
                    let base_span = node.span;
                    node = Node::new(
                        NodeKind::Indexed {
                            base: Box::new(node),
                            indices,
                        },
                        base_span,
                    );
                }
                Some(Token {
                    tok: Tok::Caret,
                    glued: true,
                    span,
                }) => {
                    let span = *span;
                    self.next();
                    let exp = match self.next() {
                        Some(Token {
                            tok: Tok::Int(n),
                            span,
                            glued: true,
                        }) => Node::new(NodeKind::Int(n), span),
                        _ => return err(span, "`^` must be followed by an integer"),
                    };
                    let base_span = node.span;
                    node = Node::new(
                        NodeKind::Apply {
                            func: Box::new(Node::symbol("^", span)),
                            args: vec![node, exp],
                            bang: false,
                        },
                        base_span,
                    );
                }
                _ => return Ok(node),
            }
        }
    }

    fn keyword(&self) -> Option<&str> {
        match self.peek() {
            Some(Token {
                tok: Tok::Sym(s), ..
            }) if !matches!(self.peek_at(1), Some(Token { tok: Tok::Sub | Tok::Sup | Tok::Caret, glued: true, .. })) => {
                Some(s.as_str())
            }
            _ => None,
        }
    }

    fn parse_form(&mut self, span: Span, bang: bool) -> Result<Node> {
        let special = if bang { None } else { self.keyword().map(str::to_string) };
        let kind = match special.as_deref() {
            Some("lambda") => {
                self.next();
                self.parse_lambda()?
            }
            Some("define") => {
                self.next();
                let name = self.parse_def_name()?;
                let body = Box::new(self.parse_expr()?);
                NodeKind::Define { name, body }
            }
            Some("with-symbols") => {
                self.next();
                self.expect(Tok::LBrace, "`{` after with-symbols")?;
                let mut names = Vec::new();
                while !self.at_close(&Tok::RBrace)? {
                    names.push(self.expect_symbol("a symbol name")?.0);
                }
                self.next();
                let body = Box::new(self.parse_expr()?);
                NodeKind::WithSymbols { names, body }
            }
            Some("let") => {
                self.next();
                self.parse_let()?
            }
            Some("if") => {
                self.next();
                let cond = Box::new(self.parse_expr()?);
                let then = Box::new(self.parse_expr()?);
                let otherwise = Box::new(self.parse_expr()?);
                NodeKind::If {
                    cond,
                    then,
                    otherwise,
                }
            }
            _ => {
                if self.at_close(&Tok::RParen)? {
                    return err(span, "empty application");
                }
                let func = Box::new(self.parse_expr()?);
                let mut args = Vec::new();
                while !self.at_close(&Tok::RParen)? {
                    args.push(self.parse_expr()?);
                }
                NodeKind::Apply { func, args, bang }
            }
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(Node::new(kind, span))
    }

    fn parse_lambda(&mut self) -> Result<NodeKind> {
        self.expect(Tok::LBracket, "`[` opening the parameter list")?;
        let mut params = Vec::new();
        while !self.at_close(&Tok::RBracket)? {
            let kind = match self.peek().map(|t| &t.tok) {
                Some(Tok::Dollar) => Some(ParamKind::Scalar),
                Some(Tok::Percent) => Some(ParamKind::Tensor),
                Some(Tok::StarDollar) => Some(ParamKind::InvertedScalar),
                _ => None,
            };
            if kind.is_some() {
                self.next();
            }
            let (name, _) = self.expect_symbol("a parameter name")?;
            params.push(Param {
                kind: kind.unwrap_or(ParamKind::Tensor),
                name,
            });
        }
        self.next();
        let body = Box::new(self.parse_expr()?);
        Ok(NodeKind::Lambda { params, body })
    }

    fn parse_def_name(&mut self) -> Result<DefName> {
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::Dollar | Tok::Percent)) {
            self.next();
        }
        let (name, _) = self.expect_symbol("a name to define")?;
        let slots = self.parse_slots()?;
        Ok(DefName { name, slots })
    }

    fn parse_let(&mut self) -> Result<NodeKind> {
        self.expect(Tok::LBrace, "`{` opening let bindings")?;
        let mut bindings = Vec::new();
        while !self.at_close(&Tok::RBrace)? {
            self.expect(Tok::LBracket, "`[` opening a binding")?;
            if matches!(self.peek().map(|t| &t.tok), Some(Tok::Dollar)) {
                self.next();
            }
            let (name, _) = self.expect_symbol("a binding name")?;
            let value = self.parse_expr()?;
            self.expect(Tok::RBracket, "`]` closing a binding")?;
            bindings.push((name, value));
        }
        self.next();
        let body = Box::new(self.parse_expr()?);
        Ok(NodeKind::Let { bindings, body })
    }
}
