//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := base ('^' nonneg-int)?
//! base   := number | varname | '(' expr ')'
//! ```
//! A leading unary minus is accepted at the head of an expression, which
//! covers both the start of input and the position right after `(`.

use super::polynomial::Polynomial;
use super::ModelError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    vars: &'a [String],
    line: usize,
    end_col: usize,
}

/// Parses `text` over the ordered variable list `vars`.
///
/// `line` and `col_offset` are only used to position error messages when the
/// expression is embedded in a larger file.
pub fn parse_expression_at(
    text: &str,
    vars: &[String],
    line: usize,
    col_offset: usize,
) -> Result<Polynomial, ModelError> {
    let toks = lex(text, line, col_offset)?;
    let end_col = col_offset + text.chars().count() + 1;
    let mut p = Parser {
        toks,
        pos: 0,
        vars,
        line,
        end_col,
    };
    let poly = p.expr()?;
    if let Some(t) = p.toks.get(p.pos) {
        return Err(p.err_at(t.col, format!("unexpected token {}", describe(&t.tok))));
    }
    Ok(poly)
}

pub fn parse_expression(text: &str, vars: &[String]) -> Result<Polynomial, ModelError> {
    parse_expression_at(text, vars, 1, 0)
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(_, s) => format!("number '{s}'"),
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Caret => "'^'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
    }
}

fn lex(text: &str, line: usize, col_offset: usize) -> Result<Vec<Token>, ModelError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col_offset + i + 1;
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, col });
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // scientific suffix: e[+-]digits
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s.parse().map_err(|_| ModelError::Parse {
                line,
                col,
                msg: format!("malformed number '{s}'"),
            })?;
            out.push(Token {
                tok: Tok::Num(v, s),
                col,
            });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
        } else {
            return Err(ModelError::Parse {
                line,
                col,
                msg: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

impl Parser<'_> {
    fn err_at(&self, col: usize, msg: String) -> ModelError {
        ModelError::Parse {
            line: self.line,
            col,
            msg,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn n(&self) -> usize {
        self.vars.len()
    }

    fn expr(&mut self) -> Result<Polynomial, ModelError> {
        let negate = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ModelError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, ModelError> {
        let base = self.base()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let col = self.col();
        match self.toks.get(self.pos).map(|t| t.tok.clone()) {
            Some(Tok::Num(v, s)) => {
                self.pos += 1;
                if s.contains(['.', 'e', 'E']) || v.fract() != 0.0 {
                    return Err(self.err_at(col, format!("exponent must be a nonnegative integer, got '{s}'")));
                }
                let k: u32 = s
                    .parse()
                    .map_err(|_| self.err_at(col, format!("exponent '{s}' out of range")))?;
                Ok(base.pow(k))
            }
            Some(Tok::Minus) => Err(self.err_at(col, "negative exponent".into())),
            Some(t) => Err(self.err_at(col, format!("expected exponent, found {}", describe(&t)))),
            None => Err(self.err_at(col, "expected exponent, found end of input".into())),
        }
    }

    fn base(&mut self) -> Result<Polynomial, ModelError> {
        let col = self.col();
        let Some(tok) = self.toks.get(self.pos).map(|t| t.tok.clone()) else {
            return Err(self.err_at(col, "unexpected end of expression".into()));
        };
        self.pos += 1;
        match tok {
            Tok::Num(v, _) => Ok(Polynomial::constant(self.n(), v)),
            Tok::Ident(name) => match self.vars.iter().position(|v| *v == name) {
                Some(i) => Ok(Polynomial::variable(self.n(), i)),
                None => Err(self.err_at(col, format!("unknown variable '{name}'"))),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    let c = self.col();
                    return Err(self.err_at(c, "expected ')'".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            other => Err(self.err_at(col, format!("unexpected token {}", describe(&other)))),
        }
    }
}
