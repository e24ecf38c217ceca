//! Reference data shipped with the crate: the operators, recurrence, initial
//! values and digit strings that the pipeline is checked against.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::operator::{normalize_polys, LinearODE, LinearRecurrence, UPoly};
use crate::ore::expr::parse_ratfun;
use crate::ore::holonomic::ode_from_ore;
use crate::ore::{parse_operator, OrePoly};

pub const FCC2_ODE: &str = include_str!("../data/fcc2_ode.txt");
pub const FCC4_ODE: &str = include_str!("../data/fcc4_ode.txt");
pub const FCC5_ODE: &str = include_str!("../data/fcc5_ode.txt");
pub const FCC4_PARTIAL_SUM_REC: &str = include_str!("../data/fcc4_partial_sum_rec.txt");
pub const CERT_2D: &str = include_str!("../data/cert2d.txt");
pub const CERT_2D_STEP1_Z: &str = include_str!("../data/cert2d_step1_z.txt");
pub const CERT_2D_STEP1_X2: &str = include_str!("../data/cert2d_step1_x2.txt");
pub const CERT_2D_STEP2: &str = include_str!("../data/cert2d_step2.txt");
pub const FCC5_SLICE_REC: &str = include_str!("../data/fcc5_slice_rec.txt");
const ANNIHILATORS_2D: &str = include_str!("../data/annihilators2d.txt");
const DIGITS: &str = include_str!("../data/digits.txt");
const RETURN_TABLE: &str = include_str!("../data/return_table.txt");

/// First partial sums of the 4D return series, f(n) for n = 0..5.
pub const FCC4_PARTIAL_SUM_INITIALS: [(i64, i64); 6] = [(1, 1), (1, 1), (25, 24), (19, 18), (1637, 1536), (549, 512)];

/// Parses an ODE given either in the `# lgf-op` exchange format or as term
/// lines `Dz^k : <polynomial in z>`.
pub fn parse_ode(text: &str) -> Result<LinearODE> {
    if text.trim_start().starts_with("# lgf-op") {
        return LinearODE::from_text(text);
    }
    ode_from_ore(&parse_operator(text, &["z".to_string()])?)
}

/// The ODE of the lattice Green's function in dimension d, where one ships.
pub fn fcc_ode(d: usize) -> Option<LinearODE> {
    let text = match d {
        2 => FCC2_ODE,
        4 => FCC4_ODE,
        5 => FCC5_ODE,
        _ => return None,
    };
    Some(parse_ode(text).expect("bundled ODE parses"))
}

/// Parses term lines `f(n+k) : <polynomial in n>`.
pub fn parse_recurrence(text: &str) -> Result<LinearRecurrence> {
    let names = vec!["n".to_string()];
    let mut terms: Vec<(usize, UPoly)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: i + 1, msg };
        let (lhs, rhs) = line.split_once(':').ok_or_else(|| perr("expected `f(n+k) : poly`".into()))?;
        let inner = lhs.trim().strip_prefix("f(n").and_then(|r| r.strip_suffix(')')).ok_or_else(|| perr(format!("bad shift {lhs:?}")))?;
        let k: usize = if inner.is_empty() { 0 } else { inner.trim_start_matches('+').parse().map_err(|_| perr(format!("bad shift {lhs:?}")))? };
        let r = parse_ratfun(rhs, &names).map_err(perr)?;
        let p = r.as_poly().ok_or_else(|| perr("coefficient is not a polynomial".into()))?;
        let deg = p.degree_in(0) as usize;
        let mut v = vec![BigRational::from_integer(0.into()); deg + 1];
        for (e, c) in p.terms() {
            v[e[0] as usize] = c.clone();
        }
        if v.iter().any(|c| !c.is_integer()) {
            return Err(perr("recurrence coefficients must be integral".into()));
        }
        terms.push((k, UPoly::new(v.into_iter().map(|c| c.to_integer()).collect())));
    }
    let order = terms.iter().map(|(k, _)| *k).max().ok_or_else(|| Error::Parse { line: 0, msg: "empty recurrence".into() })?;
    let mut c = vec![UPoly::zero(); order + 1];
    for (k, p) in terms {
        c[k] = c[k].add(&p);
    }
    normalize_polys(&mut c);
    LinearRecurrence::new(c)
}

pub fn fcc4_partial_sum_recurrence() -> LinearRecurrence {
    parse_recurrence(FCC4_PARTIAL_SUM_REC).expect("bundled recurrence parses")
}

pub fn fcc4_partial_sum_initials() -> Vec<BigRational> {
    FCC4_PARTIAL_SUM_INITIALS.iter().map(|&(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d))).collect()
}

/// A recurrence for the three-coordinate slice of the 5D walk counts.
pub fn fcc5_slice_recurrence() -> crate::guess::MultivariateRecurrence {
    crate::guess::multivariate::parse_recurrence_terms(FCC5_SLICE_REC, 3).expect("bundled recurrence parses")
}

/// The three annihilators of the 2D integrand and the cofactors that combine
/// them into the telescoping operator, over the variables x1, x2, z.
pub struct Annihilators2d {
    pub g1: OrePoly,
    pub g2: OrePoly,
    pub g3: OrePoly,
    /// Left cofactor of g1.
    pub c1: OrePoly,
    /// Left cofactor of z g2 + g3.
    pub c23: OrePoly,
}

pub fn annihilators_2d() -> Annihilators2d {
    let names: Vec<String> = ["x1", "x2", "z"].iter().map(|s| s.to_string()).collect();
    let mut blocks = std::collections::HashMap::new();
    let mut cur = String::new();
    for line in ANNIHILATORS_2D.lines() {
        if let Some(b) = line.trim().strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            cur = b.to_string();
            blocks.insert(cur.clone(), String::new());
        } else if let Some(t) = blocks.get_mut(&cur) {
            t.push_str(line);
            t.push('\n');
        }
    }
    let op = |k: &str| parse_operator(&blocks[k], &names).expect("bundled operator parses");
    Annihilators2d { g1: op("G1"), g2: op("G2"), g3: op("G3"), c1: op("C1"), c23: op("C23") }
}

/// Reference digits of P(1) and R in dimension d.
pub struct ReferenceDigits {
    pub p1: Option<&'static str>,
    pub r: &'static str,
}

pub fn reference_digits(d: usize) -> Option<ReferenceDigits> {
    let mut p1 = None;
    let mut r = None;
    for line in DIGITS.lines().filter(|l| !l.starts_with('#')) {
        let mut it = line.split_whitespace();
        if it.next().and_then(|s| s.parse::<usize>().ok()) != Some(d) {
            continue;
        }
        match (it.next(), it.next()) {
            (Some("P1"), Some(v)) => p1 = Some(v),
            (Some("R"), Some(v)) => r = Some(v),
            _ => {}
        }
    }
    r.map(|r| ReferenceDigits { p1, r })
}

/// Return probabilities to 15 decimals for d = 2..6.
pub fn return_table() -> Vec<(usize, &'static str)> {
    RETURN_TABLE
        .lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| {
            let mut it = l.split_whitespace();
            Some((it.next()?.parse().ok()?, it.next()?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ore::holonomic::{indicial_polynomial, ode_to_recurrence};

    #[test]
    fn shapes() {
        let o4 = fcc_ode(4).unwrap();
        assert_eq!((o4.order(), o4.degree()), (4, 10));
        let o5 = fcc_ode(5).unwrap();
        assert_eq!((o5.order(), o5.degree()), (6, 17));
        assert!(fcc_ode(6).is_none());
        assert_eq!(indicial_polynomial(&o4), UPoly::from_i64(&[0, 0, 0, 0, 1]));
        assert_eq!(indicial_polynomial(&o5), UPoly::from_i64(&[0, 0, 0, 0, 0, -1, 1]));
        let o2 = fcc_ode(2).unwrap();
        assert_eq!(ode_to_recurrence(&o2).order(), 2);
    }

    #[test]
    fn partial_sum_recurrence_reproduces_initials() {
        let rec = fcc4_partial_sum_recurrence();
        assert_eq!((rec.order(), rec.degree()), (6, 6));
        // leading coefficient 288 (35 n^2 + 350 n + 867) (n+6)^4 at n = 0
        assert_eq!(rec.coeffs[6].eval_i64(0), BigInt::from(288 * 867 * 1296));
    }

    #[test]
    fn digits_and_table() {
        let r4 = reference_digits(4).unwrap();
        assert!(r4.p1.unwrap().starts_with("1.1058437979"));
        assert_eq!(reference_digits(3).unwrap().r, "0.256318236504649");
        assert!(reference_digits(3).unwrap().p1.is_none());
        assert_eq!(return_table().len(), 5);
    }

    #[test]
    fn recurrence_parser_rejects_junk() {
        assert!(parse_recurrence("g(n) : 1").is_err());
        assert!(parse_recurrence("f(n+1) : n/2").is_err());
    }
}
