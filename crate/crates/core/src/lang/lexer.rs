use std::fmt;

use crate::error::{Error, Result, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    /// `[|`
    TensorOpen,
    /// `|]`
    TensorClose,
    /// `_`
    Sub,
    /// `~`
    Sup,
    Bang,
    /// `$`
    Dollar,
    /// `%`
    Percent,
    /// `*$`
    StarDollar,
    Hash,
    Caret,
    Int(i64),
    Sym(String),
    Str(String),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::LBracket => f.write_str("["),
            Tok::RBracket => f.write_str("]"),
            Tok::LBrace => f.write_str("{"),
            Tok::RBrace => f.write_str("}"),
            Tok::TensorOpen => f.write_str("[|"),
            Tok::TensorClose => f.write_str("|]"),
            Tok::Sub => f.write_str("_"),
            Tok::Sup => f.write_str("~"),
            Tok::Bang => f.write_str("!"),
            Tok::Dollar => f.write_str("$"),
            Tok::Percent => f.write_str("%"),
            Tok::StarDollar => f.write_str("*$"),
            Tok::Hash => f.write_str("#"),
            Tok::Caret => f.write_str("^"),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Sym(s) => f.write_str(s),
            Tok::Str(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
    /// No whitespace or comment between this token and the previous one.
    pub glued: bool,
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || "()[]{}|_~$%#;\"^".contains(c)
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut cur = Cursor {
        chars: text.char_indices().peekable(),
        line: 1,
        col: 1,
    };
    let mut out: Vec<Token> = Vec::new();
    let mut open_tensors: Vec<Span> = Vec::new();
    let mut glued = false;
    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            glued = false;
            continue;
        }
        if c == ';' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            glued = false;
            continue;
        }
        let span = cur.span();
        cur.bump();
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ']' => Tok::RBracket,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' if cur.peek() == Some('|') => {
                cur.bump();
                open_tensors.push(span);
                Tok::TensorOpen
            }
            '[' => Tok::LBracket,
            '|' if cur.peek() == Some(']') => {
                cur.bump();
                if open_tensors.pop().is_none() {
                    return Err(Error::Lex {
                        span,
                        message: "`|]` without a matching `[|`".into(),
                    });
                }
                Tok::TensorClose
            }
            '|' => {
                return Err(Error::Lex {
                    span,
                    message: "stray `|`".into(),
                })
            }
            '_' => Tok::Sub,
            '~' => Tok::Sup,
            '$' => Tok::Dollar,
            '%' => Tok::Percent,
            '#' => Tok::Hash,
            '^' => Tok::Caret,
            '!' => Tok::Bang,
            '*' if cur.peek() == Some('$') => {
                cur.bump();
                Tok::StarDollar
            }
            '"' => {
                let mut s = String::new();
                loop {
                    match cur.bump() {
                        None => {
                            return Err(Error::Lex {
                                span,
                                message: "unterminated string".into(),
                            })
                        }
                        Some('"') => break,
                        Some('\\') => match cur.bump() {
                            Some('n') => s.push('\n'),
                            Some(c) => s.push(c),
                            None => {
                                return Err(Error::Lex {
                                    span,
                                    message: "unterminated string".into(),
                                })
                            }
                        },
                        Some(c) => s.push(c),
                    }
                }
                Tok::Str(s)
            }
            first => {
                let mut word = String::from(first);
                while let Some(c) = cur.peek() {
                    if is_delimiter(c) {
                        break;
                    }
                    word.push(c);
                    cur.bump();
                }
                let digits = word.strip_prefix('-').unwrap_or(&word);
                if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
                    let n = word.parse().map_err(|_| Error::Lex {
                        span,
                        message: format!("integer literal {word} out of range"),
                    })?;
                    Tok::Int(n)
                } else {
                    Tok::Sym(word)
                }
            }
        };
        out.push(Token { tok, span, glued });
        glued = true;
    }
    if let Some(span) = open_tensors.pop() {
        return Err(Error::Lex {
            span,
            message: "unterminated `[|`".into(),
        });
    }
    Ok(out)
}
