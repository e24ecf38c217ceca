//! Truncated power series with exact rational coefficients, and the
//! line-oriented sequence dump format.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSeries {
    pub coefficients: Vec<BigRational>,
    pub label: String,
}

/// Header fields of a sequence dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeqHeader {
    pub d: usize,
    pub c: u64,
    pub n: usize,
}

impl ExactSeries {
    pub fn new(coefficients: Vec<BigRational>, label: impl Into<String>) -> Self {
        ExactSeries { coefficients, label: label.into() }
    }

    pub fn from_integers<I, T>(values: I, label: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        let coefficients = values.into_iter().map(|v| BigRational::from_integer(v.into())).collect();
        ExactSeries { coefficients, label: label.into() }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Coefficients of s(z)/(1-z).
    pub fn partial_sums(&self) -> ExactSeries {
        let mut acc = BigRational::zero();
        let coefficients = self
            .coefficients
            .iter()
            .map(|c| {
                acc += c;
                acc.clone()
            })
            .collect();
        ExactSeries { coefficients, label: format!("partial sums of {}", self.label) }
    }

    /// Replace z by z/c, i.e. divide coefficient n by c^n.
    pub fn scale_by_power(&self, c: u64) -> ExactSeries {
        let mut pow = BigInt::one();
        let coefficients = self
            .coefficients
            .iter()
            .map(|v| {
                let r = v / BigRational::from_integer(pow.clone());
                pow *= c;
                r
            })
            .collect();
        ExactSeries { coefficients, label: self.label.clone() }
    }

    pub fn truncate(&self, len: usize) -> ExactSeries {
        ExactSeries {
            coefficients: self.coefficients[..len.min(self.len())].to_vec(),
            label: self.label.clone(),
        }
    }

    pub fn to_dump(&self, d: usize, c: u64) -> String {
        let mut s = String::new();
        writeln!(s, "# lgf-seq d={} c={} N={}", d, c, self.len().saturating_sub(1)).unwrap();
        for v in &self.coefficients {
            writeln!(s, "{}", format_rational(v)).unwrap();
        }
        s
    }

    pub fn parse_dump(text: &str) -> Result<(SeqHeader, ExactSeries)> {
        let mut lines = text.lines().enumerate();
        let (_, head) = lines
            .next()
            .ok_or(Error::Parse { line: 1, msg: "empty sequence file".into() })?;
        let header = parse_seq_header(head)?;
        let mut coefficients = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            coefficients.push(parse_rational(line).ok_or(Error::Parse {
                line: i + 1,
                msg: format!("not a rational number: {line:?}"),
            })?);
        }
        if coefficients.len() != header.n + 1 {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header announces N={} but {} terms follow", header.n, coefficients.len()),
            });
        }
        Ok((header, ExactSeries::new(coefficients, "loaded")))
    }
}

fn parse_seq_header(line: &str) -> Result<SeqHeader> {
    let bad = |msg: &str| Error::Parse { line: 1, msg: msg.to_string() };
    let rest = line.strip_prefix("# lgf-seq").ok_or_else(|| bad("missing '# lgf-seq' header"))?;
    let (mut d, mut c, mut n) = (None, None, None);
    for field in rest.split_whitespace() {
        let (k, v) = field.split_once('=').ok_or_else(|| bad("malformed header field"))?;
        match k {
            "d" => d = v.parse().ok(),
            "c" => c = v.parse().ok(),
            "N" => n = v.parse().ok(),
            _ => return Err(bad(&format!("unknown header field {k}"))),
        }
    }
    match (d, c, n) {
        (Some(d), Some(c), Some(n)) => Ok(SeqHeader { d, c, n }),
        _ => Err(bad("header needs d, c and N")),
    }
}

pub fn format_rational(v: &BigRational) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((a, b)) => {
            let den: BigInt = b.trim().parse().ok()?;
            if den.is_zero() {
                return None;
            }
            Some(BigRational::new(a.trim().parse().ok()?, den))
        }
        None => Some(BigRational::from_integer(s.trim().parse().ok()?)),
    }
}
