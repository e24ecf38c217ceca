//! Recurrences in (n, x_1..x_k) guessed from exact tables of walk counts.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;

use super::linsolve::{exact_kernel, sign_normalize};
use crate::error::{Error, Result};
use crate::modp::Mat;
use crate::walkcount::WalkTable;

/// Exponent vectors in `nv` variables of total degree <= `deg`, by degree and
/// then lexicographically decreasing, so that for (n, x1, x2) and degree 1
/// the order is 1, n, x1, x2.
pub fn monomials(nv: usize, deg: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=deg {
        let mut cur = vec![0u32; nv];
        fill(&mut out, &mut cur, 0, total as u32);
    }
    out
}

fn fill(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, i: usize, left: u32) {
    if i + 1 == cur.len() {
        cur[i] = left;
        out.push(cur.clone());
        return;
    }
    for k in (0..=left).rev() {
        cur[i] = k;
        fill(out, cur, i + 1, left - k);
    }
}

/// Exact values of a k-dimensional sequence b_n(x); `None` where unknown.
pub trait ExactTable {
    fn dims(&self) -> usize;
    fn value(&self, n: i64, x: &[i64]) -> Option<BigInt>;
}

/// b_n(x_1..x_k) = a_n(x_1, .., x_k, 0, .., 0) read from a walk table.
pub struct TableSlice<'a> {
    pub table: &'a WalkTable,
    pub keep: usize,
}

impl ExactTable for TableSlice<'_> {
    fn dims(&self) -> usize {
        self.keep
    }

    fn value(&self, n: i64, x: &[i64]) -> Option<BigInt> {
        if n < 0 {
            return Some(BigInt::zero());
        }
        let mut full = x.to_vec();
        full.resize(self.table.lattice().dim(), 0);
        self.table.get(n as usize, &full).map(BigInt::from)
    }
}

/// sum_t c_t(n, x) b_{n + s_t}(x + tau_t) = 0, with each c_t a dense
/// coefficient vector over `monomials(k + 1, degree)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultivariateRecurrence {
    pub vars: usize,
    pub degree: usize,
    /// (shift vector (s, tau_1..tau_k), coefficients)
    pub terms: Vec<(Vec<i64>, Vec<BigInt>)>,
}

impl MultivariateRecurrence {
    pub fn eval_coeff(&self, c: &[BigInt], n: i64, x: &[i64]) -> BigInt {
        let mut acc = BigInt::zero();
        for (e, a) in monomials(self.vars + 1, self.degree).iter().zip(c) {
            if a.is_zero() {
                continue;
            }
            let mut t = a.clone();
            t *= BigInt::from(n).pow(e[0]);
            for (xi, &k) in x.iter().zip(&e[1..]) {
                t *= BigInt::from(*xi).pow(k);
            }
            acc += t;
        }
        acc
    }

    /// The left-hand side at (n, x), or `None` if a needed value is unknown.
    pub fn residual(&self, table: &dyn ExactTable, n: i64, x: &[i64]) -> Option<BigInt> {
        let mut acc = BigInt::zero();
        for (shift, c) in &self.terms {
            let y: Vec<i64> = x.iter().zip(&shift[1..]).map(|(a, b)| a + b).collect();
            let v = table.value(n + shift[0], &y)?;
            if !v.is_zero() {
                acc += self.eval_coeff(c, n, x) * v;
            }
        }
        Some(acc)
    }

    /// Exchange format: header, then per shift vector a `[s tau..]` line and
    /// one line of monomial coefficients.
    pub fn to_text(&self) -> String {
        let lo = self.terms.iter().map(|t| t.0[0]).min().unwrap_or(0);
        let hi = self.terms.iter().map(|t| t.0[0]).max().unwrap_or(0);
        let mut s = format!("# lgf-op kind=mrec order={} degree={} vars={}\n", hi - lo, self.degree, self.vars);
        for (shift, c) in &self.terms {
            let sh: Vec<String> = shift.iter().map(|v| v.to_string()).collect();
            let cs: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "[{}]\n{}", sh.join(" "), cs.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<MultivariateRecurrence> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty input".into() })?;
        let fields = crate::operator::parse_header(header)?;
        let get = |k: &str| fields.iter().find(|(a, _)| a == k).map(|(_, b)| b.as_str());
        if get("kind") != Some("mrec") {
            return Err(Error::Parse { line: 1, msg: "expected kind=mrec".into() });
        }
        let num = |k: &str| -> Result<usize> {
            get(k).and_then(|v| v.parse().ok()).ok_or(Error::Parse { line: 1, msg: format!("missing {k}=") })
        };
        let degree = num("degree")?;
        let vars = num("vars")?;
        let width = monomials(vars + 1, degree).len();
        let mut terms = Vec::new();
        while let Some((i, l)) = lines.next() {
            let perr = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            let inner = l.trim().strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(|| perr("expected [shift]"))?;
            let shift: Vec<i64> = inner.split_whitespace().map(|t| t.parse().map_err(|_| perr("bad shift"))).collect::<Result<_>>()?;
            if shift.len() != vars + 1 {
                return Err(perr("shift has the wrong length"));
            }
            let (j, cl) = lines.next().ok_or_else(|| perr("missing coefficient line"))?;
            let c: Vec<BigInt> = cl
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Parse { line: j + 1, msg: "bad integer".into() }))
                .collect::<Result<_>>()?;
            if c.len() != width {
                return Err(Error::Parse { line: j + 1, msg: format!("expected {width} coefficients") });
            }
            terms.push((shift, c));
        }
        Ok(MultivariateRecurrence { vars, degree, terms })
    }

    pub fn pretty(&self) -> String {
        let mons = monomials(self.vars + 1, self.degree);
        let names: Vec<String> = std::iter::once("n".to_string()).chain((1..=self.vars).map(|i| format!("x{i}"))).collect();
        let mut parts = Vec::new();
        for (shift, c) in &self.terms {
            let mut poly = Vec::new();
            for (e, a) in mons.iter().zip(c) {
                if a.is_zero() {
                    continue;
                }
                let m: Vec<String> = e
                    .iter()
                    .zip(&names)
                    .filter(|(k, _)| **k > 0)
                    .map(|(k, v)| if *k == 1 { v.clone() } else { format!("{v}^{k}") })
                    .collect();
                poly.push(if m.is_empty() { a.to_string() } else { format!("{a}*{}", m.join("*")) });
            }
            if poly.is_empty() {
                continue;
            }
            let idx: Vec<String> = std::iter::once(&shift[0])
                .chain(&shift[1..])
                .zip(&names)
                .map(|(s, v)| match s.signum() {
                    0 => v.clone(),
                    1 => format!("{v}+{s}"),
                    _ => format!("{v}{s}"),
                })
                .collect();
            parts.push(format!("({}) b({})", poly.join(" + "), idx.join(",")));
        }
        parts.join(" + ") + " = 0"
    }
}

/// Parses term lines such as `b(n+1, x1+1, x2+2, x3+3) : x2+2`.
pub fn parse_recurrence_terms(text: &str, vars: usize) -> Result<MultivariateRecurrence> {
    let mut names = vec!["n".to_string()];
    names.extend((1..=vars).map(|i| format!("x{i}")));
    let mut parsed = Vec::new();
    let mut degree = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: i + 1, msg };
        let (lhs, rhs) = line.split_once(':').ok_or_else(|| perr("expected `b(..) : coefficient`".into()))?;
        let inner = lhs.trim().strip_prefix("b(").and_then(|r| r.strip_suffix(')')).ok_or_else(|| perr(format!("bad term {lhs:?}")))?;
        let args: Vec<&str> = inner.split(',').map(str::trim).collect();
        if args.len() != vars + 1 {
            return Err(perr("wrong number of indices".into()));
        }
        let mut shift = Vec::new();
        for (a, v) in args.iter().zip(&names) {
            let rest = a.strip_prefix(v.as_str()).ok_or_else(|| perr(format!("index {a:?} must start with {v}")))?;
            shift.push(if rest.is_empty() { 0 } else { rest.replace(' ', "").parse::<i64>().map_err(|_| perr(format!("bad index {a:?}")))? });
        }
        let poly = crate::ore::expr::parse_poly(rhs, &names).map_err(perr)?;
        degree = degree.max(poly.terms().map(|(e, _)| e.iter().sum::<u32>() as usize).max().unwrap_or(0));
        parsed.push((shift, poly));
    }
    let mons = monomials(vars + 1, degree);
    let mut terms: Vec<(Vec<i64>, Vec<BigInt>)> = Vec::new();
    for (shift, poly) in parsed {
        let mut c = vec![BigInt::zero(); mons.len()];
        for (e, a) in poly.terms() {
            let k = mons.iter().position(|m| m == e).unwrap();
            if !a.is_integer() {
                return Err(Error::Parse { line: 0, msg: "coefficients must be integral".into() });
            }
            c[k] = a.to_integer();
        }
        match terms.iter_mut().find(|(s, _)| *s == shift) {
            Some((_, old)) => old.iter_mut().zip(c).for_each(|(o, v)| *o += v),
            None => terms.push((shift, c)),
        }
    }
    Ok(MultivariateRecurrence { vars, degree, terms })
}

/// Region of the table used for guessing: levels `0..=n_max`, points in the
/// box |x_i| <= radius.
#[derive(Debug, Clone)]
pub struct Region {
    pub n_max: i64,
    pub radius: i64,
}

/// Basis of the recurrences with the given shifts and coefficient degree that
/// hold on every region point whose shifted values are all known.
pub fn guess_multivariate_recurrence(
    table: &dyn ExactTable,
    region: &Region,
    support: &[Vec<i64>],
    degree: usize,
    margin: usize,
) -> Result<Vec<MultivariateRecurrence>> {
    let k = table.dims();
    if support.iter().any(|s| s.len() != k + 1) {
        return Err(Error::Validation("shift vectors must have one entry per index".into()));
    }
    let mons = monomials(k + 1, degree);
    let cols = support.len() * mons.len();
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    let mut nonzero = false;
    let mut x = vec![-region.radius; k];
    'points: for n in 0..=region.n_max {
        loop {
            let mut vals = Vec::with_capacity(support.len());
            let mut ok = true;
            for s in support {
                let y: Vec<i64> = x.iter().zip(&s[1..]).map(|(a, b)| a + b).collect();
                match table.value(n + s[0], &y) {
                    Some(v) => vals.push(v),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let mon_vals: Vec<BigInt> = mons
                    .iter()
                    .map(|e| {
                        let mut t = BigInt::from(n).pow(e[0]);
                        for (xi, &p) in x.iter().zip(&e[1..]) {
                            t *= BigInt::from(*xi).pow(p);
                        }
                        t
                    })
                    .collect();
                let mut row = Vec::with_capacity(cols);
                for v in &vals {
                    for mv in &mon_vals {
                        row.push(v * mv);
                    }
                }
                nonzero |= vals.iter().any(|v| !v.is_zero());
                rows.push(row);
            }
            // odometer over the box
            let mut i = 0;
            loop {
                if i == k {
                    x = vec![-region.radius; k];
                    continue 'points;
                }
                x[i] += 1;
                if x[i] <= region.radius {
                    break;
                }
                x[i] = -region.radius;
                i += 1;
            }
        }
    }
    if !nonzero {
        return Err(Error::InsufficientData("the table is zero on the region; every ansatz fits".into()));
    }
    if rows.len() < cols + margin {
        return Err(Error::InsufficientData(format!("{} equations for {cols} unknowns with margin {margin}", rows.len())));
    }
    let build = |f: &crate::modp::Field| {
        let data: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|v| f.from_bigint(v)).collect()).collect();
        Some(Mat::from_rows(data, cols))
    };
    let certify = |v: &[BigInt]| rows.iter().all(|r| r.iter().zip(v).map(|(a, b)| a * b).sum::<BigInt>().is_zero());
    let basis = exact_kernel(cols, usize::MAX, build, certify)?;
    Ok(basis
        .into_iter()
        .map(|mut v| {
            sign_normalize(&mut v);
            let terms = support
                .iter()
                .zip(v.chunks(mons.len()))
                .filter(|(_, c)| c.iter().any(|a| !a.is_zero()))
                .map(|(s, c)| (s.clone(), c.to_vec()))
                .collect();
            MultivariateRecurrence { vars: k, degree, terms }
        })
        .collect())
}

/// Shift vectors (s, tau) for s in `levels` and tau in the box [-r, r]^k.
pub fn shift_box(levels: &[i64], k: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for &s in levels {
        let mut t = vec![-r; k];
        loop {
            let mut v = vec![s];
            v.extend(&t);
            out.push(v);
            let mut i = 0;
            while i < k {
                t[i] += 1;
                if t[i] <= r {
                    break;
                }
                t[i] = -r;
                i += 1;
            }
            if i == k {
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_order() {
        assert_eq!(monomials(3, 1), vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(monomials(2, 2).len(), 6);
    }

    #[test]
    fn box_of_shifts() {
        assert_eq!(shift_box(&[1, 0], 2, 1).len(), 18);
    }

    struct ZeroTable;
    impl ExactTable for ZeroTable {
        fn dims(&self) -> usize {
            1
        }
        fn value(&self, _: i64, _: &[i64]) -> Option<BigInt> {
            Some(BigInt::zero())
        }
    }

    #[test]
    fn zero_table_is_rejected() {
        let r = guess_multivariate_recurrence(&ZeroTable, &Region { n_max: 5, radius: 5 }, &shift_box(&[1, 0], 1, 1), 0, 5);
        assert!(matches!(r, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn text_round_trip() {
        let r = parse_recurrence_terms("b(n+1, x1) : 1\nb(n, x1-1) : -n-1\nb(n, x1+1) : x1", 1).unwrap();
        assert_eq!(r.degree, 1);
        let back = MultivariateRecurrence::from_text(&r.to_text()).unwrap();
        assert_eq!(back, r);
        assert!(r.pretty().contains("b(n+1,x1)"));
    }
}
