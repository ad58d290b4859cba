//! Recursive-descent parser and evaluator for the nonlinearity grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' factor)?            -- '^' is right-associative
//! base   := number | 'x' | 'pi' | 'e'
//!         | func '(' expr ')' | '(' expr ')' | '-' base
//! func   := exp | log | sqrt | sin | cos | abs
//! ```
//!
//! The only variable is `x`. Evaluation is pure; domain problems surface
//! as non-finite values for the caller to reject.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unknown identifier '{name}' at {line}:{col}")]
    UnknownIdentifier {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("function '{name}' at {line}:{col} takes exactly one parenthesized argument")]
    ArityMismatch {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("unclosed '(' at {line}:{col}")]
    UnclosedParen { line: usize, col: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Abs,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(Self::Exp),
            "log" => Some(Self::Log),
            "sqrt" => Some(Self::Sqrt),
            "sin" => Some(Self::Sin),
            "cos" => Some(Self::Cos),
            "abs" => Some(Self::Abs),
            _ => None,
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Self::Exp => v.exp(),
            Self::Log => v.ln(),
            Self::Sqrt => v.sqrt(),
            Self::Sin => v.sin(),
            Self::Cos => v.cos(),
            Self::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Ast {
    Num(f64),
    Var,
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, Box<Ast>),
    Call(Func, Box<Ast>),
}

impl Ast {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Ast::Num(v) => *v,
            Ast::Var => x,
            Ast::Neg(a) => -a.eval(x),
            Ast::Add(a, b) => a.eval(x) + b.eval(x),
            Ast::Sub(a, b) => a.eval(x) - b.eval(x),
            Ast::Mul(a, b) => a.eval(x) * b.eval(x),
            Ast::Div(a, b) => a.eval(x) / b.eval(x),
            Ast::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Ast::Call(f, a) => f.apply(a.eval(x)),
        }
    }
}

/// A parsed expression in the variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    ast: Ast,
    source: String,
}

impl Expression {
    pub fn eval(&self, x: f64) -> f64 {
        self.ast.eval(x)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Wraps the expression as a shareable scalar function handle.
    pub fn into_fn(self) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
        Arc::new(move |x| self.ast.eval(x))
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

pub fn parse_expression(src: &str) -> Result<Expression, ExprError> {
    let tokens = lex(src)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        paren_stack: Vec::new(),
    };
    let ast = parser.expr()?;
    let tail = parser.peek();
    if !matches!(tail.kind, TokKind::Eof) {
        return Err(ExprError::Syntax {
            line: tail.line,
            col: tail.col,
            message: format!("unexpected '{}'", tail.kind),
        });
    }
    Ok(Expression {
        ast,
        source: src.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for TokKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokKind::Num(v) => write!(f, "{v}"),
            TokKind::Ident(s) => f.write_str(s),
            TokKind::Plus => f.write_str("+"),
            TokKind::Minus => f.write_str("-"),
            TokKind::Star => f.write_str("*"),
            TokKind::Slash => f.write_str("/"),
            TokKind::Caret => f.write_str("^"),
            TokKind::LParen => f.write_str("("),
            TokKind::RParen => f.write_str(")"),
            TokKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                let kind = match c {
                    '+' => TokKind::Plus,
                    '-' => TokKind::Minus,
                    '*' => TokKind::Star,
                    '/' => TokKind::Slash,
                    '^' => TokKind::Caret,
                    '(' => TokKind::LParen,
                    _ => TokKind::RParen,
                };
                tokens.push(Token {
                    kind,
                    line: tline,
                    col: tcol,
                });
                i += 1;
                col += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // Exponent part, only if followed by digits.
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
                    line: tline,
                    col: tcol,
                    message: format!("malformed number '{text}'"),
                })?;
                col += i - start;
                tokens.push(Token {
                    kind: TokKind::Num(value),
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += i - start;
                tokens.push(Token {
                    kind: TokKind::Ident(text),
                    line: tline,
                    col: tcol,
                });
            }
            other => {
                return Err(ExprError::Syntax {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character '{other}'"),
                });
            }
        }
    }
    tokens.push(Token {
        kind: TokKind::Eof,
        line,
        col,
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Positions of currently open '(' so unterminated input can point at
    /// the offending parenthesis.
    paren_stack: Vec<(usize, usize)>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eof_error(&self) -> ExprError {
        if let Some(&(line, col)) = self.paren_stack.last() {
            ExprError::UnclosedParen { line, col }
        } else {
            let t = self.peek();
            ExprError::Syntax {
                line: t.line,
                col: t.col,
                message: "unexpected end of input".to_string(),
            }
        }
    }

    fn expr(&mut self) -> Result<Ast, ExprError> {
        let mut node = self.term()?;
        loop {
            match self.peek().kind {
                TokKind::Plus => {
                    self.bump();
                    node = Ast::Add(Box::new(node), Box::new(self.term()?));
                }
                TokKind::Minus => {
                    self.bump();
                    node = Ast::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ExprError> {
        let mut node = self.factor()?;
        loop {
            match self.peek().kind {
                TokKind::Star => {
                    self.bump();
                    node = Ast::Mul(Box::new(node), Box::new(self.factor()?));
                }
                TokKind::Slash => {
                    self.bump();
                    node = Ast::Div(Box::new(node), Box::new(self.factor()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn factor(&mut self) -> Result<Ast, ExprError> {
        let base = self.base()?;
        if matches!(self.peek().kind, TokKind::Caret) {
            self.bump();
            let exponent = self.factor()?; // right-associative
            Ok(Ast::Pow(Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        match self.peek().kind {
            TokKind::RParen => {
                self.bump();
                self.paren_stack.pop();
                Ok(())
            }
            TokKind::Eof => Err(self.eof_error()),
            _ => {
                let t = self.peek();
                Err(ExprError::Syntax {
                    line: t.line,
                    col: t.col,
                    message: format!("expected ')', found '{}'", t.kind),
                })
            }
        }
    }

    fn base(&mut self) -> Result<Ast, ExprError> {
        let token = self.bump();
        match token.kind {
            TokKind::Num(v) => Ok(Ast::Num(v)),
            TokKind::Minus => Ok(Ast::Neg(Box::new(self.base()?))),
            TokKind::LParen => {
                self.paren_stack.push((token.line, token.col));
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokKind::Ident(name) => match name.as_str() {
                "x" => Ok(Ast::Var),
                "pi" => Ok(Ast::Num(std::f64::consts::PI)),
                "e" => Ok(Ast::Num(std::f64::consts::E)),
                _ => {
                    if let Some(func) = Func::lookup(&name) {
                        match self.peek().kind {
                            TokKind::LParen => {
                                let lp = self.bump();
                                self.paren_stack.push((lp.line, lp.col));
                                let arg = self.expr()?;
                                self.expect_rparen()?;
                                Ok(Ast::Call(func, Box::new(arg)))
                            }
                            _ => Err(ExprError::ArityMismatch {
                                line: token.line,
                                col: token.col,
                                name,
                            }),
                        }
                    } else {
                        Err(ExprError::UnknownIdentifier {
                            line: token.line,
                            col: token.col,
                            name,
                        })
                    }
                }
            },
            TokKind::Eof => Err(self.eof_error()),
            other => Err(ExprError::Syntax {
                line: token.line,
                col: token.col,
                message: format!("expected an expression, found '{other}'"),
            }),
        }
    }
}
