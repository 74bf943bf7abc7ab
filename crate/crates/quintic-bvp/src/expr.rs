//! Single-variable expression parsing and evaluation.
//!
//! This is how user-defined coefficient functions f(x), g(x) and analytic
//! references reach the solver. Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?            ^ is right-associative
//! atom   := number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | sinh | cosh | exp | log | sqrt | abs
//! number := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`. `log` is the
//! natural logarithm. There is no implicit multiplication: `2x` is a syntax
//! error.

use std::fmt;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Parsed expression tree. Immutable; evaluation is reentrant.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Pi,
    E,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("parse error at position {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("{msg} in `{context}`")]
pub struct EvalError {
    pub msg: String,
    pub context: String,
}

impl Expr {
    /// Evaluate at `x`. Domain violations (log of a non-positive value,
    /// square root of a negative value, division by zero, non-finite results)
    /// are reported with the offending sub-expression, never returned as NaN.
    pub fn eval<R: Real>(&self, x: R) -> Result<R, EvalError> {
        match self {
            Expr::Num(v) => Ok(R::of(*v)),
            Expr::Var => Ok(x),
            Expr::Pi => Ok(R::PI()),
            Expr::E => Ok(R::E()),
            Expr::Neg(inner) => Ok(-inner.eval(x)?),
            Expr::Bin(op, lhs, rhs) => {
                let a = lhs.eval(x)?;
                let b = rhs.eval(x)?;
                let v = match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == R::zero() {
                            return Err(self.domain("division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                };
                self.finite(v)
            }
            Expr::Call(func, arg) => {
                let a = arg.eval(x)?;
                let v = match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sinh => a.sinh(),
                    Func::Cosh => a.cosh(),
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= R::zero() {
                            return Err(self.domain("logarithm of a non-positive value"));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < R::zero() {
                            return Err(self.domain("square root of a negative value"));
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                };
                self.finite(v)
            }
        }
    }

    fn domain(&self, msg: &str) -> EvalError {
        EvalError { msg: msg.to_string(), context: self.to_string() }
    }

    fn finite<R: Real>(&self, v: R) -> Result<R, EvalError> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.domain("non-finite result"))
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Num(_) | Expr::Var | Expr::Pi | Expr::E | Expr::Call(..) => 5,
            Expr::Bin(BinOp::Pow, ..) => 4,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        }
    }
}

/// Canonical serializer: minimal parentheses, `parse(print(t)) == t`.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, e: &Expr, need: bool) -> fmt::Result {
            if need {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var => write!(f, "x"),
            Expr::Pi => write!(f, "pi"),
            Expr::E => write!(f, "e"),
            Expr::Neg(inner) => {
                write!(f, "-")?;
                paren(f, inner, inner.prec() < 3)
            }
            Expr::Bin(op, lhs, rhs) => {
                let (sym, p) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                if *op == BinOp::Pow {
                    // left side must reparse as an atom, right side as a unary
                    paren(f, lhs, lhs.prec() < 5)?;
                    write!(f, "{sym}")?;
                    paren(f, rhs, rhs.prec() < 4)
                } else {
                    paren(f, lhs, lhs.prec() < p)?;
                    write!(f, "{sym}")?;
                    paren(f, rhs, rhs.prec() <= p)
                }
            }
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    if i >= bytes.len() || !bytes[i].is_ascii_digit() {
                        return Err(ParseError {
                            pos: i.min(bytes.len() - 1),
                            msg: "expected a digit after the decimal point".into(),
                        });
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // exponent only when it is unambiguously one; `2e` lexes as
                // the number 2 followed by the identifier e
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    pos: start,
                    msg: format!("malformed number `{text}`"),
                })?;
                toks.push((Tok::Num(value), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError {
                    pos: i,
                    msg: format!("unexpected character `{}`", src[i..].chars().next().unwrap()),
                });
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { pos: self.pos(), msg: msg.into() }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::Ident(name)) => {
                if let Some(func) = Func::lookup(&name) {
                    if !matches!(self.peek(), Some(Tok::LParen)) {
                        return Err(ParseError {
                            pos,
                            msg: format!("function `{name}` needs an argument in parentheses"),
                        });
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.close_paren()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                let atom = match name.as_str() {
                    "x" => Expr::Var,
                    "pi" => Expr::Pi,
                    "e" => Expr::E,
                    _ => {
                        return Err(ParseError {
                            pos,
                            msg: format!("unknown identifier `{name}`"),
                        });
                    }
                };
                if matches!(self.peek(), Some(Tok::LParen)) {
                    return Err(self.err(format!("`{name}` is not a function")));
                }
                Ok(atom)
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(inner)
            }
            Some(_) => Err(ParseError { pos, msg: "expected a number, identifier, or `(`".into() }),
            None => Err(ParseError { pos, msg: "unexpected end of expression".into() }),
        }
    }

    fn close_paren(&mut self) -> Result<(), ParseError> {
        if matches!(self.peek(), Some(Tok::RParen)) {
            self.bump();
            Ok(())
        } else {
            Err(self.err("expected `)`"))
        }
    }
}

/// Parse an expression in the variable `x`.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(ParseError { pos: 0, msg: "empty expression".into() });
    }
    let mut p = Parser { toks, at: 0, end: src.len() };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: f64) -> f64 {
        parse(src).unwrap().eval(x).unwrap()
    }

    #[test]
    fn grammar_base_cases() {
        assert_eq!(parse("x").unwrap(), Expr::Var);
        assert_eq!(ev("x^3", 2.0), 8.0);
        assert_eq!(ev("-(8+7*x+x^3)*exp(x)", 0.0), -8.0);
    }

    #[test]
    fn reference_values() {
        // frozen against an independent high-precision evaluation
        assert_eq!(ev("2*sin(1)", 0.0), 1.682941969615793);
        assert_eq!(ev("sinh(2)", 0.0), 3.626860407847019);
        assert_eq!(ev("e", 0.0), std::f64::consts::E);
        assert_eq!(ev("pi", 0.0), std::f64::consts::PI);
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("-x^2", 2.0), -4.0); // ^ binds tighter than unary minus
        assert_eq!(ev("2^3^2", 0.0), 512.0); // right-associative
        assert_eq!(ev("2+3*4", 0.0), 14.0);
        assert_eq!(ev("-2-3", 0.0), -5.0);
        assert_eq!(ev("2*-3", 0.0), -6.0);
        assert_eq!(ev("(2+3)*4", 0.0), 20.0);
        assert_eq!(ev("1e2", 0.0), 100.0);
        assert_eq!(ev("2.5e-1", 0.0), 0.25);
    }

    #[test]
    fn domain_errors() {
        let div = parse("1/x").unwrap().eval::<f64>(0.0).unwrap_err();
        assert!(div.msg.contains("division by zero"), "{div}");
        assert_eq!(div.context, "1/x");
        let log = parse("log(x)").unwrap().eval::<f64>(-1.0).unwrap_err();
        assert!(log.msg.contains("non-positive"), "{log}");
        let sqrt = parse("sqrt(x-2)").unwrap().eval::<f64>(0.0).unwrap_err();
        assert!(sqrt.msg.contains("negative"), "{sqrt}");
        let pow = parse("(-2)^0.5").unwrap().eval::<f64>(0.0).unwrap_err();
        assert!(pow.msg.contains("non-finite"), "{pow}");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert_eq!(parse("").unwrap_err().pos, 0);
        assert_eq!(parse("1+*2").unwrap_err().pos, 2);
        let e = parse("2x").unwrap_err();
        assert_eq!(e.pos, 1, "{e}");
        let e = parse("foo(1)").unwrap_err();
        assert!(e.msg.contains("unknown identifier `foo`"));
        let e = parse("sin + 1").unwrap_err();
        assert!(e.msg.contains("needs an argument"));
        let e = parse("x(3)").unwrap_err();
        assert!(e.msg.contains("not a function"));
        let e = parse("(1+2").unwrap_err();
        assert!(e.msg.contains("expected `)`"));
        let e = parse("1.x").unwrap_err();
        assert!(e.msg.contains("decimal point"));
    }

    #[test]
    fn printer_round_trips() {
        for src in [
            "x",
            "-x^2",
            "2^3^2",
            "1+2-3",
            "1-(2+3)",
            "2*-3",
            "x/(2*x)",
            "-(8+7*x+x^3)*exp(x)",
            "-4*(2*x*cos(x)+3*sin(x))",
            "sqrt(abs(x))^-2",
            "--x",
            "pi*e",
        ] {
            let t = parse(src).unwrap();
            let printed = t.to_string();
            let t2 = parse(&printed).unwrap();
            assert_eq!(t, t2, "round-trip failed: {src} -> {printed}");
        }
    }

    #[test]
    fn eval_is_generic() {
        let e = parse("sinh(x)+1/4").unwrap();
        let v32: f32 = e.eval(2.0f32).unwrap();
        let v64: f64 = e.eval(2.0f64).unwrap();
        assert!((f64::from(v32) - v64).abs() < 1e-6);
    }
}
