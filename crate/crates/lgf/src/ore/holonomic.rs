//! Conversions between an ODE in z and the recurrence of its Taylor
//! coefficients, closure under division by 1 - z, and indicial polynomials.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::operator::{normalize_polys, LinearODE, LinearRecurrence, UPoly};
use crate::series::ExactSeries;

use super::mpoly::MPoly;
use super::ore::OrePoly;
use super::ratfun::RatFun;

/// Range of j - i over the nonzero monomials a_ij z^i d^j.
fn shift_range(ode: &LinearODE) -> (i64, i64) {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for (j, p) in ode.coeffs.iter().enumerate() {
        for (i, c) in p.0.iter().enumerate() {
            if !c.is_zero() {
                let k = j as i64 - i as i64;
                lo = lo.min(k);
                hi = hi.max(k);
            }
        }
    }
    (lo, hi)
}

/// Q_k(n) = sum_{j-i=k} a_ij (n+k)(n+k-1)...(n+k-j+1), so that the z^n
/// coefficient of ode(P) is sum_k Q_k(n) c_{n+k}.
fn shift_polys(ode: &LinearODE) -> (i64, Vec<UPoly>) {
    let (lo, hi) = shift_range(ode);
    let mut q = vec![UPoly::zero(); (hi - lo + 1) as usize];
    for (j, p) in ode.coeffs.iter().enumerate() {
        for (i, c) in p.0.iter().enumerate() {
            if !c.is_zero() {
                let k = j as i64 - i as i64;
                let t = (k - lo) as usize;
                q[t] = q[t].add(&UPoly::falling(k, j).scale(c));
            }
        }
    }
    (lo, q)
}

/// The recurrence satisfied by the Taylor coefficients of every power-series
/// solution, valid for all n >= 0. Common polynomial factors are kept.
pub fn ode_to_recurrence(ode: &LinearODE) -> LinearRecurrence {
    let (lo, q) = shift_polys(ode);
    let base = lo.min(0);
    let mut c: Vec<UPoly> = vec![UPoly::zero(); (lo - base) as usize];
    c.extend(q.iter().map(|p| p.shift(-base)));
    normalize_polys(&mut c);
    LinearRecurrence::new(c).expect("nonzero ODE gives a nonzero recurrence")
}

/// Coefficients of ode(s) that are determined by the available terms.
pub fn apply_ode_to_series(ode: &LinearODE, s: &ExactSeries) -> Result<ExactSeries> {
    let (lo, q) = shift_polys(ode);
    let hi = lo + q.len() as i64 - 1;
    let len = s.len() as i64;
    if len <= ode.order() as i64 || len - 1 - hi < 0 {
        return Err(Error::InsufficientData(format!(
            "{} terms cannot be checked against an operator of order {}",
            s.len(),
            ode.order()
        )));
    }
    let c = &s.coefficients;
    let mut out = Vec::with_capacity((len - hi) as usize);
    for n in 0..=(len - 1 - hi) {
        let nb = BigInt::from(n);
        let mut acc = BigRational::zero();
        for (t, p) in q.iter().enumerate() {
            let idx = n + lo + t as i64;
            if idx < 0 || p.is_zero() || c[idx as usize].is_zero() {
                continue;
            }
            acc += BigRational::from_integer(p.eval(&nb)) * &c[idx as usize];
        }
        out.push(acc);
    }
    Ok(ExactSeries::new(out, format!("residual of {}", s.label)))
}

/// An operator annihilating P/(1-z) when the input annihilates P: the input
/// composed on the right with multiplication by 1 - z.
pub fn quotient_closure(ode: &LinearODE) -> LinearODE {
    // d^j (1-z) = (1-z) d^j - j d^{j-1}
    let one_minus_z = UPoly::from_i64(&[1, -1]);
    let r = ode.coeffs.len();
    let mut out = Vec::with_capacity(r);
    for j in 0..r {
        let mut b = ode.coeffs[j].mul(&one_minus_z);
        if j + 1 < r {
            b = b.add(&ode.coeffs[j + 1].scale(&BigInt::from(-(j as i64 + 1))));
        }
        out.push(b);
    }
    LinearODE::new(out).expect("composition with 1 - z is nonzero").normalized()
}

/// Indicial polynomial at z = 0: the coefficient of the lowest power of z
/// in ode(z^lambda), as a polynomial in lambda.
pub fn indicial_polynomial(ode: &LinearODE) -> UPoly {
    let (_, hi) = shift_range(ode);
    let mut p = UPoly::zero();
    for (j, a) in ode.coeffs.iter().enumerate() {
        let i = j as i64 - hi;
        if i >= 0 && !a.coeff(i as usize).is_zero() {
            p = p.add(&UPoly::falling(0, j).scale(&a.coeff(i as usize)));
        }
    }
    let mut v = [p];
    normalize_polys(&mut v);
    let [p] = v;
    p
}

/// Writes a polynomial as a product of (lambda - r)^m over its integer roots
/// times whatever remains.
pub fn factor_integer_roots(p: &UPoly, var: &str) -> String {
    let mut rest = p.clone();
    let mut parts = Vec::new();
    if rest.is_zero() {
        return "0".into();
    }
    // candidate roots divide the lowest nonzero coefficient
    let mut m0 = 0;
    while rest.coeff(0).is_zero() && rest.degree() > 0 {
        rest = UPoly::new(rest.0[1..].to_vec());
        m0 += 1;
    }
    if m0 > 0 {
        parts.push(if m0 == 1 { var.to_string() } else { format!("{var}^{m0}") });
    }
    for r in 1..=64i64 {
        for root in [r, -r] {
            let mut m = 0;
            while rest.degree() > 0 && rest.eval_i64(root).is_zero() {
                rest = synthetic_division(&rest, root);
                m += 1;
            }
            if m > 0 {
                let f = if root > 0 { format!("({var}-{root})") } else { format!("({var}+{})", -root) };
                parts.push(if m == 1 { f } else { format!("{f}^{m}") });
            }
        }
    }
    if rest.degree() > 0 || rest.coeff(0) != BigInt::one() || parts.is_empty() {
        parts.insert(0, format!("({})", rest.pretty(var)));
    }
    parts.join("*")
}

fn synthetic_division(p: &UPoly, root: i64) -> UPoly {
    let r = BigInt::from(root);
    let n = p.0.len();
    let mut q = vec![BigInt::zero(); n - 1];
    let mut carry = BigInt::zero();
    for i in (1..n).rev() {
        carry = &p.0[i] + carry * &r;
        q[i - 1] = carry.clone();
    }
    UPoly::new(q)
}

/// Reads an ODE in z from an operator with polynomial coefficients, clearing
/// rational constants.
pub fn ode_from_ore(op: &OrePoly) -> Result<LinearODE> {
    if op.nvars() != 1 {
        return Err(Error::Validation("an ODE operator has exactly one variable".into()));
    }
    let mut polys: Vec<(usize, MPoly)> = Vec::new();
    for (e, c) in op.terms() {
        let p = c.as_poly().ok_or_else(|| Error::Validation("ODE coefficients must be polynomials".into()))?;
        polys.push((e[0] as usize, p.clone()));
    }
    let mut den = BigInt::one();
    for (_, p) in &polys {
        for (_, c) in p.terms() {
            den = den.lcm(c.denom());
        }
    }
    let order = polys.iter().map(|(j, _)| *j).max().unwrap_or(0);
    let mut coeffs = vec![UPoly::zero(); order + 1];
    for (j, p) in polys {
        let deg = p.degree_in(0) as usize;
        let mut v = vec![BigInt::zero(); deg + 1];
        for (e, c) in p.terms() {
            v[e[0] as usize] = (c * BigRational::from_integer(den.clone())).to_integer();
        }
        coeffs[j] = UPoly::new(v);
    }
    Ok(LinearODE::new(coeffs)?.normalized())
}

/// The ODE as an operator in z and the partial d/dz.
pub fn ode_to_ore(ode: &LinearODE) -> OrePoly {
    let mut op = OrePoly::zero(1);
    for (j, p) in ode.coeffs.iter().enumerate() {
        let mut m = MPoly::zero(1);
        for (i, c) in p.0.iter().enumerate() {
            m = m.add(&MPoly::monomial(vec![i as u32], BigRational::from_integer(c.clone())));
        }
        op.add_term(vec![j as u32], RatFun::from_poly(m));
    }
    op
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ode2d() -> LinearODE {
        LinearODE::new(vec![UPoly::from_i64(&[0, 1]), UPoly::from_i64(&[-1, 0, 3]), UPoly::from_i64(&[0, -1, 0, 1])]).unwrap()
    }

    #[test]
    fn geometric() {
        let ode = LinearODE::new(vec![UPoly::from_i64(&[-1]), UPoly::from_i64(&[1, -1])]).unwrap();
        let rec = ode_to_recurrence(&ode);
        // (n+1) c(n+1) = (n+1) c(n)
        assert_eq!(rec.coeffs, vec![UPoly::from_i64(&[-1, -1]), UPoly::from_i64(&[1, 1])]);
    }

    #[test]
    fn pure_derivative() {
        let ode = LinearODE::new(vec![UPoly::zero(), UPoly::from_i64(&[1])]).unwrap();
        let rec = ode_to_recurrence(&ode);
        assert_eq!(rec.coeffs, vec![UPoly::zero(), UPoly::from_i64(&[1, 1])]);
    }

    #[test]
    fn two_dimensional_recurrence() {
        let rec = ode_to_recurrence(&ode2d());
        assert_eq!(rec.coeffs, vec![UPoly::from_i64(&[-1, -2, -1]), UPoly::zero(), UPoly::from_i64(&[4, 4, 1])]);
        // C(2n,n)^2 / 16^n on even indices
        let mut s = Vec::new();
        for n in 0..20u64 {
            if n % 2 == 0 {
                let b = crate::util::binomial(n, n / 2);
                s.push(BigRational::new(BigInt::from(&b * &b), BigInt::from(16).pow(n as u32 / 2)));
            } else {
                s.push(BigRational::zero());
            }
        }
        for n in 0..18 {
            assert!(rec.residual(&s, n).unwrap().is_zero());
        }
        let res = apply_ode_to_series(&ode2d(), &ExactSeries::new(s.clone(), "2d")).unwrap();
        assert!(res.coefficients.iter().all(|c| c.is_zero()));
        let mut bad = s;
        bad[6] += BigRational::one();
        let res = apply_ode_to_series(&ode2d(), &ExactSeries::new(bad, "2d")).unwrap();
        assert!(res.coefficients.iter().any(|c| !c.is_zero()));
    }

    #[test]
    fn too_short() {
        let s = ExactSeries::new(vec![BigRational::one()], "x");
        assert!(matches!(apply_ode_to_series(&ode2d(), &s), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn indicial_2d() {
        assert_eq!(indicial_polynomial(&ode2d()), UPoly::from_i64(&[0, 0, 1]));
        assert_eq!(factor_integer_roots(&UPoly::from_i64(&[0, 0, 1]), "l"), "l^2");
        // l^5 (l-1)
        let p = UPoly::from_i64(&[0, 0, 0, 0, 0, -1, 1]);
        assert_eq!(factor_integer_roots(&p, "l"), "l^5*(l-1)");
    }

    #[test]
    fn closure_of_constants() {
        let ode = LinearODE::new(vec![UPoly::zero(), UPoly::from_i64(&[1])]).unwrap();
        let c = quotient_closure(&ode);
        let ones = ExactSeries::new(vec![BigRational::one(); 10], "1/(1-z)");
        assert!(apply_ode_to_series(&c, &ones).unwrap().coefficients.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn closure_matches_ore_product() {
        let ode = ode2d();
        let to_ore = ode_to_ore;
        let prod = to_ore(&ode).mul(&OrePoly::from_poly(MPoly::one(1).sub(&MPoly::var(1, 0))));
        let closed = to_ore(&quotient_closure(&ode));
        // equal up to the content normalization
        let ratio = prod.terms().next().unwrap().1.div(closed.terms().next().unwrap().1);
        let scaled = closed.left_mul(&ratio);
        assert!(prod.equals(&scaled));
    }
}
