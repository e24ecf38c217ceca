//! Creative-telescoping certificates: a telescoper A free of the integration
//! variables and delta parts B_v, with (A + sum_v d_v B_v)(f) = 0.
//!
//! Text format:
//!
//! ```text
//! # lgf-cert vars=x1,x2,z integrand=fcc d=2 integrate=x1,x2
//! [telescoper]
//! Dz^2 : z*(z^2 - 1)
//! Dz : 3*z^2 - 1
//! 1 : z
//! [delta x1]
//! 1 : (x2 - x1^2*x2)/(x1*x2*z - 1)
//! ```
//!
//! With `integrand=hyperexp` the file first lists one `[logderiv v]` block per
//! variable, each holding a single rational expression. Verification reads the
//! file line by line and never holds more than the running sum.

use std::io::BufRead;

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::expr::parse_ratfun;
use super::integrand::{IntegrandSpec, Multipliers};
use super::mpoly::{Exps, MPoly};
use super::ore::OrePoly;
use super::ratfun::RatFun;
use crate::error::{Error, Result};

/// Outcome of a certificate check.
#[derive(Debug, Clone)]
pub struct CertReport {
    pub passed: bool,
    pub terms: usize,
    /// Number of monomials in the numerator of the residual.
    pub residual_terms: usize,
    /// Leading monomial of the residual numerator when the check fails.
    pub first_failing: Option<String>,
    /// Evaluation of the residual at random rational points, term by term,
    /// agrees with the symbolic result.
    pub numeric_agrees: bool,
}

/// Parses a partial monomial such as `Dz^2*Dx1` or `1`.
pub fn parse_partials(s: &str, names: &[String]) -> std::result::Result<Exps, String> {
    let mut e = vec![0u32; names.len()];
    let s = s.trim();
    if s == "1" {
        return Ok(e);
    }
    for f in s.split('*') {
        let f = f.trim();
        let f = f.strip_prefix('D').ok_or(format!("bad partial {f:?}"))?;
        let (v, k) = match f.split_once('^') {
            Some((v, k)) => (v, k.trim().parse::<u32>().map_err(|_| format!("bad exponent in {f:?}"))?),
            None => (f, 1),
        };
        let i = names.iter().position(|n| n == v.trim()).ok_or(format!("unknown variable {v}"))?;
        e[i] += k;
    }
    Ok(e)
}

/// Parses term lines `partials : coefficient` into an operator.
pub fn parse_operator(text: &str, names: &[String]) -> Result<OrePoly> {
    let mut op = OrePoly::zero(names.len());
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (e, c) = parse_term(line, names).map_err(|msg| Error::Parse { line: i + 1, msg })?;
        op.add_term(e, c);
    }
    Ok(op)
}

fn parse_term(line: &str, names: &[String]) -> std::result::Result<(Exps, RatFun), String> {
    let (d, c) = line.split_once(':').ok_or("expected `partials : coefficient`")?;
    Ok((parse_partials(d, names)?, parse_ratfun(c, names)?))
}

fn header_value<'a>(header: &'a str, key: &str) -> Option<&'a str> {
    header.split_whitespace().find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

enum Block {
    None,
    LogDeriv(usize),
    Telescoper,
    Delta(usize),
}

struct Checker {
    names: Vec<String>,
    integrate: Vec<usize>,
    logderivs: Vec<Option<RatFun>>,
    spec: Option<IntegrandSpec>,
    points: Vec<Vec<BigRational>>,
}

fn random_points(n: usize, count: usize) -> Vec<Vec<BigRational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c67_6663);
    (0..count)
        .map(|_| (0..n).map(|_| BigRational::new(rng.gen_range(-97i64..=97).into(), rng.gen_range(101i64..=997).into())).collect())
        .collect()
}

/// Streams a certificate and checks it.
pub fn verify_certificate<R: BufRead>(reader: R) -> Result<CertReport> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((i, l)) => {
                let l = l.map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
                if !l.trim().is_empty() {
                    break l;
                }
            }
            None => return Err(Error::Parse { line: 0, msg: "empty certificate".into() }),
        }
    };
    if !header.trim_start().starts_with("# lgf-cert") {
        return Err(Error::Parse { line: 1, msg: "expected `# lgf-cert` header".into() });
    }
    let names: Vec<String> = header_value(&header, "vars")
        .ok_or(Error::Parse { line: 1, msg: "missing vars=".into() })?
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let kind = header_value(&header, "integrand").unwrap_or("fcc");
    let fcc_dim = match kind {
        "fcc" => {
            let d: usize = header_value(&header, "d")
                .and_then(|s| s.parse().ok())
                .ok_or(Error::Parse { line: 1, msg: "missing d=".into() })?;
            let f = IntegrandSpec::fcc(d)?;
            if f.names != names {
                return Err(Error::Validation(format!("fcc integrand in d={d} uses variables {}", f.names.join(","))));
            }
            Some(d)
        }
        "hyperexp" => None,
        other => return Err(Error::Parse { line: 1, msg: format!("unknown integrand {other}") }),
    };
    let integrate: Vec<usize> = match header_value(&header, "integrate") {
        Some(s) => s
            .split(',')
            .map(|v| names.iter().position(|n| n == v).ok_or(Error::Parse { line: 1, msg: format!("unknown variable {v}") }))
            .collect::<Result<_>>()?,
        None if fcc_dim.is_some() => (0..names.len() - 1).collect(),
        None => return Err(Error::Parse { line: 1, msg: "hyperexp certificates need integrate=".into() }),
    };
    let nv = names.len();
    let mut ck = Checker {
        logderivs: vec![None; nv],
        spec: fcc_dim.map(|d| IntegrandSpec::fcc(d).unwrap()),
        points: random_points(nv, 5),
        names,
        integrate,
    };
    let mut block = Block::None;
    let mut acc = RatFun::zero(nv);
    let mut numeric: Vec<Option<BigRational>> = vec![Some(BigRational::zero()); ck.points.len()];
    let mut terms = 0usize;
    // The multiplier cache borrows the integrand, so the integrand has to be
    // fixed before the first operator term is read.
    let mut pending: Vec<(usize, String)> = Vec::new();
    for (i, l) in lines.by_ref() {
        let l = l.map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        let t = l.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if let Some(b) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let b = ck.parse_block(b, i + 1)?;
            if !matches!(b, Block::LogDeriv(_)) {
                pending.push((i, l.clone()));
                break;
            }
            block = b;
            continue;
        }
        match block {
            Block::LogDeriv(v) => {
                let r = parse_ratfun(t, &ck.names).map_err(|msg| Error::Parse { line: i + 1, msg })?;
                ck.logderivs[v] = Some(r);
            }
            _ => return Err(Error::Parse { line: i + 1, msg: "term outside of a block".into() }),
        }
    }
    if ck.spec.is_none() {
        let ld: Option<Vec<RatFun>> = ck.logderivs.iter().cloned().collect();
        let ld = ld.ok_or_else(|| Error::Validation("every variable needs a [logderiv] block".into()))?;
        ck.spec = Some(IntegrandSpec::hyperexponential(ck.names.clone(), ld)?);
    }
    let spec_holder = ck.spec.clone().unwrap();
    let mut m = Multipliers::new(&spec_holder);
    for (i, l) in pending.into_iter().map(|(i, l)| (i, Ok(l))).chain(lines) {
        let l: String = l.map_err(|e: std::io::Error| Error::Parse { line: i + 1, msg: e.to_string() })?;
        let t = l.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if let Some(b) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            block = ck.parse_block(b, i + 1)?;
            if matches!(block, Block::LogDeriv(_)) {
                return Err(Error::Parse { line: i + 1, msg: "[logderiv] blocks must come first".into() });
            }
            continue;
        }
        let (e, c) = parse_term(t, &ck.names).map_err(|msg| Error::Parse { line: i + 1, msg })?;
        let r = match block {
            Block::Telescoper => {
                for &v in &ck.integrate {
                    if e[v] != 0 || !OrePoly::term(e.clone(), c.clone()).is_free_of(v) {
                        return Err(Error::Validation(format!(
                            "line {}: telescoper involves the integration variable {}",
                            i + 1,
                            ck.names[v]
                        )));
                    }
                }
                m.term(&e, &c)
            }
            Block::Delta(v) => m.delta_term(v, &e, &c),
            _ => return Err(Error::Parse { line: i + 1, msg: "term outside of a block".into() }),
        };
        for (k, p) in ck.points.iter().enumerate() {
            numeric[k] = match (numeric[k].take(), r.eval(p)) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
        }
        acc = acc.add(&r);
        terms += 1;
    }
    let passed = acc.is_zero();
    let numeric_agrees = ck.points.iter().zip(&numeric).all(|(p, v)| match (v, acc.eval(p)) {
        (Some(a), Some(b)) => *a == b,
        _ => true,
    });
    let first_failing = if passed {
        None
    } else {
        acc.numerator().leading().map(|(e, c)| MPoly::monomial(e.clone(), c.clone()).to_string_with(&ck.names))
    };
    Ok(CertReport { passed, terms, residual_terms: acc.numerator().len(), first_failing, numeric_agrees })
}

impl Checker {
    fn parse_block(&self, b: &str, line: usize) -> Result<Block> {
        let mut it = b.split_whitespace();
        let kind = it.next().unwrap_or("");
        let var = it.next().map(|v| {
            self.names.iter().position(|n| n == v).ok_or(Error::Parse { line, msg: format!("unknown variable {v}") })
        });
        Ok(match (kind, var) {
            ("telescoper", None) => Block::Telescoper,
            ("delta", Some(v)) => {
                let v = v?;
                if !self.integrate.contains(&v) {
                    return Err(Error::Validation(format!("delta part for {} which is not integrated", self.names[v])));
                }
                Block::Delta(v)
            }
            ("logderiv", Some(v)) => Block::LogDeriv(v?),
            _ => return Err(Error::Parse { line, msg: format!("unknown block [{b}]") }),
        })
    }
}

/// Checks (A + sum_v d_v B_v)(f) = 0 for an in-memory certificate.
pub fn certify_telescoper(telescoper: &OrePoly, deltas: &[(usize, OrePoly)], f: &IntegrandSpec) -> Result<bool> {
    Ok(certificate_residual(telescoper, deltas, f)?.is_zero())
}

/// The multiplier R with (A + sum_v d_v B_v)(f) = R f.
pub fn certificate_residual(telescoper: &OrePoly, deltas: &[(usize, OrePoly)], f: &IntegrandSpec) -> Result<RatFun> {
    for &(v, _) in deltas {
        if !telescoper.is_free_of(v) {
            return Err(Error::Validation(format!("telescoper involves the integration variable {}", f.names[v])));
        }
    }
    let mut total = telescoper.clone();
    for (v, b) in deltas {
        total = total.add(&OrePoly::partial(f.nvars(), *v).mul(b));
    }
    super::integrand::apply_operator_to_integrand(&total, f)
}

/// Serializes a certificate over the lattice integrand.
pub fn certificate_text(d: usize, integrate: &[usize], telescoper: &OrePoly, deltas: &[(usize, OrePoly)]) -> String {
    let f = IntegrandSpec::fcc(d).unwrap();
    let iv: Vec<&str> = integrate.iter().map(|&v| f.names[v].as_str()).collect();
    let mut s = format!("# lgf-cert vars={} integrand=fcc d={d} integrate={}\n", f.names.join(","), iv.join(","));
    s += "[telescoper]\n";
    s += &telescoper.to_string_with(&f.names);
    s.push('\n');
    for (v, b) in deltas {
        s += &format!("[delta {}]\n", f.names[*v]);
        s += &b.to_string_with(&f.names);
        s.push('\n');
    }
    s
}
