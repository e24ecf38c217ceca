//! Integer-polynomial-coefficient ODEs and recurrences, and their exchange format.
//!
//! ```text
//! # lgf-op kind=ode order=2 degree=3
//! 0 -1 0 1        a_2(z) = z^3 - z
//! -1 0 3          a_1(z) = 3z^2 - 1
//! 0 1             a_0(z) = z
//! ```
//!
//! Coefficient lines run from the highest derivative (or shift) down to the
//! lowest, each listing integer coefficients in ascending powers.

use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense univariate polynomial with integer coefficients, ascending powers.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct UPoly(pub Vec<BigInt>);

impl UPoly {
    pub fn new(mut c: Vec<BigInt>) -> UPoly {
        while c.last().is_some_and(|v| v.is_zero()) {
            c.pop();
        }
        UPoly(c)
    }

    pub fn from_i64(c: &[i64]) -> UPoly {
        UPoly::new(c.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn zero() -> UPoly {
        UPoly(Vec::new())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with -1 for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.0.len() as i64 - 1
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.0.get(i).cloned().unwrap_or_default()
    }

    pub fn lead(&self) -> Option<&BigInt> {
        self.0.last()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_i64(&self, x: i64) -> BigInt {
        self.eval(&BigInt::from(x))
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }

    pub fn add(&self, o: &UPoly) -> UPoly {
        let n = self.0.len().max(o.0.len());
        UPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn scale(&self, k: &BigInt) -> UPoly {
        UPoly::new(self.0.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut r = vec![BigInt::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                r[i + j] += a * b;
            }
        }
        UPoly::new(r)
    }

    /// p(x + k).
    pub fn shift(&self, k: i64) -> UPoly {
        let mut r = UPoly::zero();
        let lin = UPoly::from_i64(&[k, 1]);
        for c in self.0.iter().rev() {
            r = r.mul(&lin).add(&UPoly::new(vec![c.clone()]));
        }
        r
    }

    /// Formal derivative.
    pub fn derivative(&self) -> UPoly {
        UPoly::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect())
    }

    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// The falling factorial (x + k)(x + k - 1)...(x + k - j + 1) as a polynomial in x.
    pub fn falling(k: i64, j: usize) -> UPoly {
        let mut r = UPoly::from_i64(&[1]);
        for t in 0..j as i64 {
            r = r.mul(&UPoly::from_i64(&[k - t, 1]));
        }
        r
    }

    pub fn to_line(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
    }

    pub fn parse_line(line: &str) -> Option<UPoly> {
        let c: Option<Vec<BigInt>> = line.split_whitespace().map(|t| t.parse().ok()).collect();
        Some(UPoly::new(c?))
    }

    /// Human-readable form in the given variable.
    pub fn pretty(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if mono.is_empty() {
                write!(s, "{a}").unwrap();
            } else if a.is_one() {
                s.push_str(&mono);
            } else {
                write!(s, "{a}*{mono}").unwrap();
            }
        }
        s
    }
}

/// Content-normalizes a list of polynomials: divide by the common content and
/// make the leading coefficient of the last nonzero polynomial positive.
pub fn normalize_polys(polys: &mut [UPoly]) {
    let g = polys.iter().fold(BigInt::zero(), |g, p| g.gcd(&p.content()));
    if g.is_zero() {
        return;
    }
    let neg = polys.iter().rev().find(|p| !p.is_zero()).and_then(|p| p.lead()).is_some_and(|l| l.is_negative());
    let g = if neg { -g } else { g };
    for p in polys.iter_mut() {
        *p = UPoly::new(p.0.iter().map(|c| c / &g).collect());
    }
}

/// sum_j a_j(z) (d/dz)^j, stored as a_0..a_r.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearODE {
    pub coeffs: Vec<UPoly>,
}

/// sum_k q_k(n) s(n + k) = 0, stored as q_0..q_r.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRecurrence {
    pub coeffs: Vec<UPoly>,
}

fn trim_top(mut c: Vec<UPoly>) -> Result<Vec<UPoly>> {
    while c.last().is_some_and(|p| p.is_zero()) {
        c.pop();
    }
    if c.is_empty() {
        return Err(Error::Validation("operator is identically zero".into()));
    }
    Ok(c)
}

impl LinearODE {
    pub fn new(coeffs: Vec<UPoly>) -> Result<LinearODE> {
        Ok(LinearODE { coeffs: trim_top(coeffs)? })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(|p| p.degree().max(0) as usize).max().unwrap_or(0)
    }

    pub fn normalized(&self) -> LinearODE {
        let mut c = self.coeffs.clone();
        normalize_polys(&mut c);
        LinearODE { coeffs: c }
    }

    pub fn to_text(&self) -> String {
        op_text("ode", &self.coeffs, self.order(), self.degree())
    }

    pub fn from_text(text: &str) -> Result<LinearODE> {
        let (kind, c) = parse_op_text(text)?;
        if kind != "ode" {
            return Err(Error::Parse { line: 1, msg: format!("expected kind=ode, found {kind}") });
        }
        LinearODE::new(c)
    }

    pub fn pretty(&self) -> String {
        let mut terms = Vec::new();
        for (j, p) in self.coeffs.iter().enumerate().rev() {
            if p.is_zero() {
                continue;
            }
            let d = match j {
                0 => "P".to_string(),
                1 => "P'".to_string(),
                2 => "P''".to_string(),
                _ => format!("P^({j})"),
            };
            terms.push(format!("({}) {}", p.pretty("z"), d));
        }
        terms.join(" + ") + " = 0"
    }
}

impl LinearRecurrence {
    pub fn new(coeffs: Vec<UPoly>) -> Result<LinearRecurrence> {
        Ok(LinearRecurrence { coeffs: trim_top(coeffs)? })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(|p| p.degree().max(0) as usize).max().unwrap_or(0)
    }

    pub fn normalized(&self) -> LinearRecurrence {
        let mut c = self.coeffs.clone();
        normalize_polys(&mut c);
        LinearRecurrence { coeffs: c }
    }

    /// Residual sum_k q_k(n) s(n+k) at n, given exact terms.
    pub fn residual(&self, s: &[BigRational], n: usize) -> Option<BigRational> {
        if n + self.order() >= s.len() {
            return None;
        }
        let ni = BigInt::from(n);
        let mut acc = BigRational::zero();
        for (k, q) in self.coeffs.iter().enumerate() {
            acc += BigRational::from_integer(q.eval(&ni)) * &s[n + k];
        }
        Some(acc)
    }

    pub fn to_text(&self) -> String {
        op_text("rec", &self.coeffs, self.order(), self.degree())
    }

    pub fn from_text(text: &str) -> Result<LinearRecurrence> {
        let (kind, c) = parse_op_text(text)?;
        if kind != "rec" {
            return Err(Error::Parse { line: 1, msg: format!("expected kind=rec, found {kind}") });
        }
        LinearRecurrence::new(c)
    }

    pub fn pretty(&self) -> String {
        let mut terms = Vec::new();
        for (k, p) in self.coeffs.iter().enumerate().rev() {
            if !p.is_zero() {
                let idx = if k == 0 { "n".to_string() } else { format!("n+{k}") };
                terms.push(format!("({}) f({idx})", p.pretty("n")));
            }
        }
        terms.join(" + ") + " = 0"
    }
}

impl fmt::Display for LinearODE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

impl fmt::Display for LinearRecurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

fn op_text(kind: &str, coeffs: &[UPoly], order: usize, degree: usize) -> String {
    let mut s = format!("# lgf-op kind={kind} order={order} degree={degree}\n");
    for p in coeffs.iter().rev() {
        s.push_str(&p.to_line());
        s.push('\n');
    }
    s
}

pub(crate) fn parse_header(line: &str) -> Result<Vec<(String, String)>> {
    let rest = line
        .strip_prefix("# lgf-op")
        .ok_or(Error::Parse { line: 1, msg: "missing '# lgf-op' header".into() })?;
    rest.split_whitespace()
        .map(|f| {
            f.split_once('=')
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .ok_or(Error::Parse { line: 1, msg: format!("malformed header field {f:?}") })
        })
        .collect()
}

fn parse_op_text(text: &str) -> Result<(String, Vec<UPoly>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty operator file".into() })?;
    let fields = parse_header(head)?;
    let get = |k: &str| fields.iter().find(|(a, _)| a == k).map(|(_, b)| b.clone());
    let kind = get("kind").ok_or(Error::Parse { line: 1, msg: "header lacks kind".into() })?;
    let order: usize = get("order")
        .and_then(|v| v.parse().ok())
        .ok_or(Error::Parse { line: 1, msg: "header lacks order".into() })?;
    let mut polys = Vec::new();
    for (i, l) in lines {
        polys.push(UPoly::parse_line(l).ok_or(Error::Parse { line: i + 1, msg: format!("bad coefficient line {l:?}") })?);
    }
    if polys.len() != order + 1 {
        return Err(Error::Parse { line: 1, msg: format!("order={order} but {} coefficient lines", polys.len()) });
    }
    polys.reverse();
    Ok((kind, polys))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_and_falling() {
        let p = UPoly::from_i64(&[0, 0, 1]);
        assert_eq!(p.shift(1), UPoly::from_i64(&[1, 2, 1]));
        assert_eq!(UPoly::falling(0, 2), UPoly::from_i64(&[0, -1, 1]));
        assert_eq!(UPoly::from_i64(&[1, 2, 3]).derivative(), UPoly::from_i64(&[2, 6]));
    }

    #[test]
    fn ode_text_round_trip() {
        let ode = LinearODE::new(vec![
            UPoly::from_i64(&[0, 1]),
            UPoly::from_i64(&[-1, 0, 3]),
            UPoly::from_i64(&[0, -1, 0, 1]),
        ])
        .unwrap();
        let t = ode.to_text();
        assert_eq!(t, "# lgf-op kind=ode order=2 degree=3\n0 -1 0 1\n-1 0 3\n0 1\n");
        assert_eq!(LinearODE::from_text(&t).unwrap(), ode);
        assert!(LinearRecurrence::from_text(&t).is_err());
    }

    #[test]
    fn normalization_is_idempotent() {
        let mut c = vec![UPoly::from_i64(&[4, 6]), UPoly::from_i64(&[0, -2])];
        normalize_polys(&mut c);
        assert_eq!(c, vec![UPoly::from_i64(&[-2, -3]), UPoly::from_i64(&[0, 1])]);
        let again = c.clone();
        normalize_polys(&mut c);
        assert_eq!(c, again);
    }

    #[test]
    fn pretty_printing() {
        assert_eq!(UPoly::from_i64(&[-1, 0, 3]).pretty("z"), "3*z^2 - 1");
    }
}
