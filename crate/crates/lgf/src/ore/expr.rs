//! A small recursive-descent parser for rational expressions such as
//! `(x2 - x1^2*x2) / (x1*x2*z - 1)`.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::mpoly::MPoly;
use super::ratfun::RatFun;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(BigInt),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let t: String = cs[st..i].iter().collect();
            out.push(Tok::Num(t.parse().unwrap()));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected character {c:?}"));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, String> {
        let mut lhs = if self.eat('-') { Expr::Neg(Box::new(self.term()?)) } else { self.term()? };
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, String> {
        let mut lhs = self.power()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.power()?));
            } else if matches!(self.peek(), Some(Tok::Num(_) | Tok::Ident(_) | Tok::Op('('))) {
                // juxtaposition, as in `2 (3 z+4) z^2`
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn power(&mut self) -> Result<Expr, String> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(k)) => {
                    self.pos += 1;
                    let k: u32 = k.try_into().map_err(|_| "exponent too large".to_string())?;
                    Ok(Expr::Pow(Box::new(base), k))
                }
                _ => Err("exponent must be a nonnegative integer".into()),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, String> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Expr::Var(s))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err("missing ')'".into());
                }
                Ok(e)
            }
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.power()?)))
            }
            other => Err(format!("unexpected token {other:?}")),
        }
    }
}

pub fn parse(s: &str) -> Result<Expr, String> {
    let mut p = Parser { toks: lex(s)?, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(format!("trailing input after position {}", p.pos));
    }
    Ok(e)
}

impl Expr {
    pub fn to_ratfun(&self, names: &[String]) -> Result<RatFun, String> {
        let n = names.len();
        Ok(match self {
            Expr::Num(v) => RatFun::constant(n, BigRational::from_integer(v.clone())),
            Expr::Var(s) => {
                let i = names.iter().position(|x| x == s).ok_or(format!("unknown variable {s}"))?;
                RatFun::from_poly(MPoly::var(n, i))
            }
            Expr::Neg(a) => a.to_ratfun(names)?.neg(),
            Expr::Add(a, b) => a.to_ratfun(names)?.add(&b.to_ratfun(names)?),
            Expr::Sub(a, b) => a.to_ratfun(names)?.sub(&b.to_ratfun(names)?),
            Expr::Mul(a, b) => a.to_ratfun(names)?.mul(&b.to_ratfun(names)?),
            Expr::Div(a, b) => a.to_ratfun(names)?.mul(&b.inverse(names)?),
            Expr::Pow(a, k) => a.to_ratfun(names)?.pow(*k),
        })
    }

    /// 1/self, keeping products and powers as separate denominator factors.
    fn inverse(&self, names: &[String]) -> Result<RatFun, String> {
        Ok(match self {
            Expr::Mul(a, b) => a.inverse(names)?.mul(&b.inverse(names)?),
            Expr::Pow(a, k) => a.inverse(names)?.pow(*k),
            Expr::Div(a, b) => b.to_ratfun(names)?.mul(&a.inverse(names)?),
            Expr::Neg(a) => a.inverse(names)?.neg(),
            other => {
                let r = other.to_ratfun(names)?;
                if r.is_zero() {
                    return Err("division by zero".into());
                }
                r.recip()
            }
        })
    }
}

pub fn parse_ratfun(s: &str, names: &[String]) -> Result<RatFun, String> {
    parse(s)?.to_ratfun(names)
}

/// Parses a polynomial; fails if the expression has a nonconstant denominator.
pub fn parse_poly(s: &str, names: &[String]) -> Result<MPoly, String> {
    let r = parse_ratfun(s, names)?;
    r.as_poly().cloned().ok_or_else(|| format!("not a polynomial: {s}"))
}
