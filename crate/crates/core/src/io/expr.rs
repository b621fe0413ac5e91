//! Line-oriented tokens and arithmetic expressions for rule files.

use crate::error::{Error, Result};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    Sym(char),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    /// 1-based column.
    pub col: usize,
}

pub(crate) fn tokenize(line: &str, line_no: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |col: usize, message: String| Error::Syntax {
        line: line_no,
        column: col,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[s..i].iter().collect()),
                col,
            });
        } else if c.is_ascii_digit() || c == '.' {
            let s = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
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
            let text: String = chars[s..i].iter().collect();
            let v: f64 = text
                .parse()
                .map_err(|_| err(col, format!("malformed number `{text}`")))?;
            out.push(Token { tok: Tok::Num(v), col });
        } else if c == '"' {
            let s = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                i += 1;
            }
            if i == chars.len() {
                return Err(err(col, "unterminated string".into()));
            }
            out.push(Token {
                tok: Tok::Str(chars[s..i].iter().collect()),
                col,
            });
            i += 1;
        } else if "()+-*/^,=".contains(c) {
            out.push(Token { tok: Tok::Sym(c), col });
            i += 1;
        } else {
            return Err(err(col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

/// Cursor over the tokens of one line.
pub(crate) struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Token], line: usize, line_len: usize) -> Self {
        Cursor {
            toks,
            pos: 0,
            line,
            end_col: line_len + 1,
        }
    }

    pub fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.col(),
            message: message.into(),
        }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|t| &t.tok);
        self.pos += 1;
        t
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    pub fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected a name")),
        }
    }

    /// A non-negative integer literal.
    pub fn integer(&mut self) -> Result<u64> {
        match self.peek() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && *v >= 0.0 => {
                let v = *v as u64;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.error("expected a non-negative integer")),
        }
    }

    /// `expr := term (('+' | '-') term)*`
    pub fn expr(&mut self, vars: &HashMap<String, f64>) -> Result<f64> {
        let mut v = self.term(vars)?;
        loop {
            if self.eat_sym('+') {
                v += self.term(vars)?;
            } else if self.eat_sym('-') {
                v -= self.term(vars)?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self, vars: &HashMap<String, f64>) -> Result<f64> {
        let mut v = self.unary(vars)?;
        loop {
            if self.eat_sym('*') {
                v *= self.unary(vars)?;
            } else if self.peek() == Some(&Tok::Sym('/')) {
                let col = self.col();
                self.pos += 1;
                let d = self.unary(vars)?;
                if d == 0.0 {
                    return Err(Error::Syntax {
                        line: self.line,
                        column: col,
                        message: "division by zero".into(),
                    });
                }
                v /= d;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self, vars: &HashMap<String, f64>) -> Result<f64> {
        if self.eat_sym('-') {
            Ok(-self.unary(vars)?)
        } else if self.eat_sym('+') {
            self.unary(vars)
        } else {
            self.power(vars)
        }
    }

    /// `power := atom ('^' unary)?`, right associative.
    fn power(&mut self, vars: &HashMap<String, f64>) -> Result<f64> {
        let base = self.atom(vars)?;
        if self.eat_sym('^') {
            let e = self.unary(vars)?;
            Ok(base.powf(e))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self, vars: &HashMap<String, f64>) -> Result<f64> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let v = self.expr(vars)?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "sqrt" {
                    self.expect_sym('(')?;
                    let v = self.expr(vars)?;
                    self.expect_sym(')')?;
                    if v < 0.0 {
                        return Err(Error::Syntax {
                            line: self.line,
                            column: col,
                            message: format!("square root of negative value {v}"),
                        });
                    }
                    Ok(v.sqrt())
                } else {
                    vars.get(&name).copied().ok_or(Error::Syntax {
                        line: self.line,
                        column: col,
                        message: format!("unknown name `{name}`"),
                    })
                }
            }
            _ => Err(self.error("expected a number, name, `sqrt(` or `(`")),
        }
    }
}

/// Evaluates a standalone expression (no variables).
pub fn eval_expr(text: &str) -> Result<f64> {
    let toks = tokenize(text, 1)?;
    let mut c = Cursor::new(&toks, 1, text.chars().count());
    let v = c.expr(&HashMap::new())?;
    c.expect_end()?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        assert_eq!(eval_expr("1 + 2 * 3").unwrap(), 7.0);
        assert_eq!(eval_expr("(1 + 2) * 3").unwrap(), 9.0);
        assert_eq!(eval_expr("2 ^ 3 ^ 2").unwrap(), 512.0);
        assert_eq!(eval_expr("-2 ^ 2").unwrap(), -4.0);
        assert_eq!(eval_expr("1/4").unwrap(), 0.25);
        assert_eq!(eval_expr("1.5e2").unwrap(), 150.0);
        let phi = eval_expr("(1 + sqrt(5)) / 2").unwrap();
        assert!((phi - 1.618_033_988_749_895).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_columns() {
        match eval_expr("1 + * 2") {
            Err(Error::Syntax { line: 1, column: 5, .. }) => {}
            e => panic!("{e:?}"),
        }
        match eval_expr("sqrt(2") {
            Err(Error::Syntax { column: 7, .. }) => {}
            e => panic!("{e:?}"),
        }
        assert!(matches!(eval_expr("x"), Err(Error::Syntax { column: 1, .. })));
        assert!(matches!(eval_expr("1 / 0"), Err(Error::Syntax { column: 3, .. })));
        assert!(matches!(eval_expr("2 $"), Err(Error::Syntax { column: 3, .. })));
    }
}
