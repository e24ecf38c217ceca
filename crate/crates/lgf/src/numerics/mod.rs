//! High-precision limits of partial sums: running recurrences forward,
//! fitting the tail in inverse powers of n, and return probabilities.

mod bigfloat;

pub use bigfloat::BigFloat;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::operator::LinearRecurrence;

/// How `extend_sequence` computes values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtendMode {
    Exact,
    /// Exact up to index `exact_terms`, then converted once and continued in
    /// floating point.
    BigFloat { precision: u32, exact_terms: usize },
}

#[derive(Debug, Clone)]
pub enum SequenceValues {
    Exact(Vec<BigRational>),
    Float(Vec<BigFloat>),
}

impl SequenceValues {
    pub fn len(&self) -> usize {
        match self {
            SequenceValues::Exact(v) => v.len(),
            SequenceValues::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All values at the given precision.
    pub fn to_bigfloat(&self, precision: u32) -> Vec<BigFloat> {
        match self {
            SequenceValues::Exact(v) => v.iter().map(|x| BigFloat::from_rational(x, precision)).collect(),
            SequenceValues::Float(v) => v.iter().map(|x| x.with_precision(precision)).collect(),
        }
    }
}

fn check_initials(rec: &LinearRecurrence, initials: &[BigRational]) -> Result<usize> {
    let r = rec.order();
    if initials.len() < r {
        return Err(Error::InsufficientData(format!(
            "recurrence of order {r} needs {r} initial values, got {}",
            initials.len()
        )));
    }
    Ok(r)
}

/// Values f(0..=n) of the sequence defined by `rec` and the initial values.
/// More than `order` initial values may be given to step over singular
/// points of the recurrence; the recurrence then takes over after them.
pub fn extend_sequence(rec: &LinearRecurrence, initials: &[BigRational], n: usize, mode: ExtendMode) -> Result<SequenceValues> {
    let r = check_initials(rec, initials)?;
    match mode {
        ExtendMode::Exact => {
            let mut v: Vec<BigRational> = initials.iter().take(n + 1).cloned().collect();
            extend_exact(rec, r, &mut v, n)?;
            Ok(SequenceValues::Exact(v))
        }
        ExtendMode::BigFloat { precision, exact_terms } => {
            let mut v: Vec<BigRational> = initials.iter().take(n + 1).cloned().collect();
            extend_exact(rec, r, &mut v, exact_terms.min(n))?;
            let mut f: Vec<BigFloat> = v.iter().map(|x| BigFloat::from_rational(x, precision)).collect();
            while f.len() <= n {
                let m = f.len();
                let k = (m - r) as i64;
                let lead = rec.coeffs[r].eval_i64(k);
                if lead.is_zero() {
                    return Err(Error::SingularPoint(k));
                }
                let mut acc = BigFloat::zero(precision);
                for (j, q) in rec.coeffs[..r].iter().enumerate() {
                    let c = q.eval_i64(k);
                    if !c.is_zero() {
                        acc = acc.add(&f[m - r + j].mul(&BigFloat::from_bigint(&c, precision)));
                    }
                }
                f.push(acc.neg().div(&BigFloat::from_bigint(&lead, precision)));
            }
            Ok(SequenceValues::Float(f))
        }
    }
}

fn extend_exact(rec: &LinearRecurrence, r: usize, v: &mut Vec<BigRational>, n: usize) -> Result<()> {
    while v.len() <= n {
        let m = v.len();
        let k = (m - r) as i64;
        let lead = rec.coeffs[r].eval_i64(k);
        if lead.is_zero() {
            return Err(Error::SingularPoint(k));
        }
        let mut acc = BigRational::zero();
        for (j, q) in rec.coeffs[..r].iter().enumerate() {
            let c = q.eval_i64(k);
            if !c.is_zero() {
                acc += &v[m - r + j] * BigRational::from_integer(c);
            }
        }
        v.push(-acc / BigRational::from_integer(lead));
    }
    Ok(())
}

/// Tail model f(n) = c_0 + n^(-alpha) (c_1 + c_2/n + ... + c_K/n^(K-1)),
/// fitted through the K+1 samples at `window`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtrapolationModel {
    pub order: usize,
    /// alpha in units of 1/2.
    pub alpha_halves: u32,
    pub window: Vec<usize>,
}

impl ExtrapolationModel {
    /// K+1 samples evenly spaced over [last/2, last].
    pub fn spread(order: usize, alpha_halves: u32, last: usize) -> ExtrapolationModel {
        let first = last / 2;
        let window = (0..=order).map(|j| last - j * (last - first) / order.max(1)).collect();
        ExtrapolationModel { order, alpha_halves, window }
    }

    /// The same model with every sample index scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> ExtrapolationModel {
        let mut window: Vec<usize> = self.window.iter().map(|&n| (n as f64 * factor).round() as usize).collect();
        window.dedup();
        ExtrapolationModel { window, ..self.clone() }
    }

    /// alpha = d/2 - 1, the decay of the partial-sum tail in dimension d.
    pub fn for_dimension(d: usize, order: usize, last: usize) -> ExtrapolationModel {
        ExtrapolationModel::spread(order, d.saturating_sub(2) as u32, last)
    }

    fn validate(&self, len: usize) -> Result<()> {
        if self.window.len() != self.order + 1 {
            return Err(Error::Validation(format!("window has {} samples, model needs {}", self.window.len(), self.order + 1)));
        }
        let mut w = self.window.clone();
        w.sort_unstable();
        w.dedup();
        if w.len() != self.window.len() || w[0] == 0 {
            return Err(Error::Validation("window indices must be distinct and positive".into()));
        }
        if *w.last().unwrap() >= len {
            return Err(Error::Validation(format!("window reaches index {} but only {len} values are known", w.last().unwrap())));
        }
        Ok(())
    }
}

/// c_0 of the model fitted through `values`, at the given precision.
pub fn fit_limit(values: &[BigFloat], model: &ExtrapolationModel, precision: u32) -> Result<BigFloat> {
    model.validate(values.len())?;
    let k = model.order + 1;
    let scale = *model.window.iter().max().unwrap() as i64;
    // columns 1, x^alpha, x^(alpha+1), ... with x = scale/n in [1, 2]
    let mut a: Vec<Vec<BigFloat>> = Vec::with_capacity(k);
    for &n in &model.window {
        let x = BigFloat::from_i64(scale, precision).div(&BigFloat::from_i64(n as i64, precision));
        let mut xa = x.powi(model.alpha_halves / 2);
        if model.alpha_halves % 2 == 1 {
            xa = xa.mul(&x.sqrt());
        }
        let mut row = vec![BigFloat::from_i64(1, precision)];
        let mut p = xa;
        for _ in 1..k {
            row.push(p.clone());
            p = p.mul(&x);
        }
        row.push(values[n].with_precision(precision));
        a.push(row);
    }
    // elimination with partial pivoting; only the first unknown is needed
    let floor = -(precision as i64) + 64;
    for col in (0..k).rev() {
        let rows = col + 1;
        let piv = (0..rows).max_by(|&i, &j| a[i][col].abs().cmp(&a[j][col].abs())).unwrap();
        a.swap(piv, col);
        let p = a[col][col].clone();
        if p.magnitude().is_none_or(|m| m < floor) {
            return Err(Error::PrecisionLoss(format!("fit of order {} is singular at {precision} bits", model.order)));
        }
        for i in 0..col {
            if a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].div(&p);
            for j in 0..=k {
                if j == col {
                    continue;
                }
                let t = f.mul(&a[col][j]);
                a[i][j] = a[i][j].sub(&t);
            }
            a[i][col] = BigFloat::zero(precision);
        }
    }
    Ok(a[0][k].div(&a[0][0]))
}

#[derive(Debug, Clone)]
pub struct Extrapolated {
    pub value: BigFloat,
    /// |difference| between the fits on the two windows.
    pub error: BigFloat,
    pub precision: u32,
}

/// Limit of the sequence with an error estimate from a second window
/// shifted down by 10%.
pub fn extrapolate_limit(values: &[BigFloat], model: &ExtrapolationModel, precision: u32) -> Result<Extrapolated> {
    let v1 = fit_limit(values, model, precision)?;
    let v2 = fit_limit(values, &model.scaled(0.9), precision)?;
    Ok(Extrapolated { error: v1.sub(&v2).abs(), value: v1, precision })
}

/// A limit reported with the digits that survive both precisions.
#[derive(Debug, Clone)]
pub struct Digits {
    pub value: BigFloat,
    /// Certified decimal places.
    pub places: usize,
    pub text: String,
}

impl Digits {
    /// `NAME = <digits> (± 10^-k)`.
    pub fn line(&self, name: &str) -> String {
        format!("{name} = {} (± 10^-{})", self.text, self.places)
    }

    /// Decimal places to which the value matches a rounded or truncated
    /// reference string: floor(-log10 |value - reference|), capped at the
    /// number of places the reference has.
    pub fn agreement(&self, reference: &str) -> usize {
        let Some(r) = parse_decimal(reference) else { return 0 };
        let places = reference.split_once('.').map_or(0, |x| x.1.len());
        let p = self.value.precision();
        let diff = self.value.sub(&BigFloat::from_rational(&r, p)).abs();
        if diff.is_zero() {
            return places;
        }
        let l = -diff.log10_abs();
        if l < 0.0 {
            0
        } else {
            (l.floor() as usize).min(places)
        }
    }
}

/// Exact value of a plain decimal string such as `-0.25`.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (neg, body) = s.strip_prefix('-').map_or((false, s), |b| (true, b));
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: num_bigint::BigInt = format!("{int}{frac}").parse().ok()?;
    let v = BigRational::new(digits, num_traits::pow(num_bigint::BigInt::from(10), frac.len()));
    Some(if neg { -v } else { v })
}

/// Places certified by an error bound: floor(-log10 err) - 1.
fn places_from_error(err: &BigFloat, cap: usize) -> usize {
    if err.is_zero() {
        return cap;
    }
    let l = -err.log10_abs();
    if l <= 1.0 {
        0
    } else {
        ((l.floor() as usize) - 1).min(cap)
    }
}

/// Runs `compute` at precision p and p + 64 bits and keeps the digits that
/// both the error estimate and the precision comparison support.
pub fn two_precision<F>(precision: u32, mut compute: F) -> Result<Digits>
where
    F: FnMut(u32) -> Result<Extrapolated>,
{
    let lo = compute(precision)?;
    let hi = compute(precision + 64)?;
    let cap = (precision as f64 * std::f64::consts::LOG10_2) as usize;
    let err = lo.error.add(&hi.error).add(&lo.value.sub(&hi.value).abs());
    // compared as numbers: 0.0899..9 and 0.0900..0 agree although their
    // decimal strings do not
    let places = places_from_error(&err, cap);
    let a = hi.value.to_decimal(cap);
    // the digits shown are truncated, never rounded past the certified part
    let text = a.split_once('.').map_or(a.clone(), |(i, f)| format!("{i}.{}", &f[..places.min(f.len())]));
    Ok(Digits { value: hi.value, places, text })
}

/// Limit of the partial sums `values` (index n = value at n) under the tail
/// model for dimension d, at the given precision.
pub fn limit_of_partial_sums(values: &SequenceValues, d: usize, order: usize, precision: u32) -> Result<Digits> {
    let last = values.len() - 1;
    let model = ExtrapolationModel::for_dimension(d, order, last);
    two_precision(precision, |p| extrapolate_limit(&values.to_bigfloat(p), &model, p))
}

/// True when the partial sums keep growing: the last value exceeds `bound`,
/// or the increase over [N/2, N] is at least 85% of the increase over
/// [N/4, N/2] (a convergent tail n^(-alpha), alpha >= 1/2, gives at most 71%).
pub fn detect_divergence(values: &SequenceValues, bound: f64) -> bool {
    let n = values.len() - 1;
    let at = |i: usize| match values {
        SequenceValues::Exact(v) => v[i].to_f64().unwrap_or(f64::INFINITY),
        SequenceValues::Float(v) => v[i].to_f64(),
    };
    let (a, b, c) = (at(n / 4), at(n / 2), at(n));
    if c > bound {
        return true;
    }
    let (d1, d2) = (b - a, c - b);
    d1 > 0.0 && d2 / d1 > 0.85
}

/// R = 1 - 1/P(1).
pub fn return_probability(p1: &BigFloat) -> Result<BigFloat> {
    let one = BigFloat::from_i64(1, p1.precision());
    if *p1 < one {
        return Err(Error::Validation(format!("P(1) = {} is below 1", p1.to_decimal(12))));
    }
    Ok(one.sub(&p1.recip()))
}

/// R with its digits: the error of R is that of P(1) divided by P(1)^2 <= 1,
/// so the certified places carry over.
pub fn return_probability_digits(p1: &Digits) -> Result<Digits> {
    let r = return_probability(&p1.value)?;
    let text = r.to_decimal(p1.places);
    Ok(Digits { value: r, places: p1.places, text })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::UPoly;
    use num_bigint::BigInt;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn constant_recurrence() {
        let rec = LinearRecurrence::new(vec![UPoly::from_i64(&[-1]), UPoly::from_i64(&[1])]).unwrap();
        let SequenceValues::Exact(v) = extend_sequence(&rec, &[q(1, 1)], 10, ExtendMode::Exact).unwrap() else { panic!() };
        assert!(v.iter().all(|x| *x == q(1, 1)));
    }

    #[test]
    fn central_binomial_squares() {
        // (n+2)^2 c_{n+2} = (n+1)^2 c_n
        let rec = LinearRecurrence::new(vec![UPoly::from_i64(&[-1, -2, -1]), UPoly::zero(), UPoly::from_i64(&[4, 4, 1])]).unwrap();
        let SequenceValues::Exact(v) = extend_sequence(&rec, &[q(1, 1), q(0, 1)], 40, ExtendMode::Exact).unwrap() else { panic!() };
        for n in 0..20usize {
            let b = crate::util::binomial(2 * n as u64, n as u64);
            let want = BigRational::new(BigInt::from(&b * &b), BigInt::from(16).pow(n as u32));
            assert_eq!(v[2 * n], want);
            assert!(v[2 * n + 1].is_zero());
        }
    }

    #[test]
    fn singular_point_is_named() {
        // (n-3) c_{n+1} = c_n
        let rec = LinearRecurrence::new(vec![UPoly::from_i64(&[-1]), UPoly::from_i64(&[-3, 1])]).unwrap();
        match extend_sequence(&rec, &[q(1, 1)], 10, ExtendMode::Exact) {
            Err(Error::SingularPoint(3)) => {}
            other => panic!("{other:?}"),
        }
        // starting after the singular point works
        let init: Vec<_> = (0..5).map(|_| q(1, 1)).collect();
        assert!(extend_sequence(&rec, &init, 10, ExtendMode::Exact).is_ok());
    }

    #[test]
    fn float_mode_tracks_exact() {
        let rec = LinearRecurrence::new(vec![UPoly::from_i64(&[-1, -2, -1]), UPoly::zero(), UPoly::from_i64(&[4, 4, 1])]).unwrap();
        let init = [q(1, 1), q(0, 1)];
        let SequenceValues::Exact(e) = extend_sequence(&rec, &init, 200, ExtendMode::Exact).unwrap() else { panic!() };
        let mode = ExtendMode::BigFloat { precision: 256, exact_terms: 50 };
        let SequenceValues::Float(f) = extend_sequence(&rec, &init, 200, mode).unwrap() else { panic!() };
        let diff = f[200].sub(&BigFloat::from_rational(&e[200], 256)).abs();
        assert!(diff.log10_abs() < -70.0);
    }

    #[test]
    fn one_plus_one_over_n() {
        let vals: Vec<BigFloat> = (0..200)
            .map(|n| if n == 0 { BigFloat::zero(256) } else { BigFloat::from_rational(&q(n + 1, n), 256) })
            .collect();
        let model = ExtrapolationModel::spread(3, 2, 199);
        let r = extrapolate_limit(&vals, &model, 256).unwrap();
        assert!(r.value.sub(&BigFloat::from_i64(1, 256)).abs().log10_abs() < -70.0);
    }

    #[test]
    fn half_integer_tail() {
        // 2 + n^(-1/2) - 3 n^(-3/2)
        let p = 300;
        let vals: Vec<BigFloat> = (0..400i64)
            .map(|n| {
                if n == 0 {
                    return BigFloat::zero(p);
                }
                let s = BigFloat::from_i64(n, p).sqrt().recip();
                BigFloat::from_i64(2, p).add(&s).sub(&s.mul_i64(3).div(&BigFloat::from_i64(n, p)))
            })
            .collect();
        let model = ExtrapolationModel::spread(4, 1, 399);
        let r = extrapolate_limit(&vals, &model, p).unwrap();
        assert!(r.value.sub(&BigFloat::from_i64(2, p)).abs().log10_abs() < -60.0);
    }

    #[test]
    fn narrow_window_loses_precision() {
        let vals: Vec<BigFloat> = (0..100).map(|n| BigFloat::from_rational(&q(n + 1, n.max(1)), 64)).collect();
        let model = ExtrapolationModel { order: 30, alpha_halves: 2, window: (60..91).collect() };
        assert!(matches!(fit_limit(&vals, &model, 64), Err(Error::PrecisionLoss(_))));
    }

    #[test]
    fn return_probability_edges() {
        let one = BigFloat::from_i64(1, 128);
        assert!(return_probability(&one).unwrap().is_zero());
        assert!(return_probability(&BigFloat::from_rational(&q(1, 2), 128)).is_err());
    }

    #[test]
    fn divergence_of_harmonic_partial_sums() {
        let mut h = Vec::new();
        let mut acc = q(0, 1);
        for n in 0..400 {
            h.push(acc.clone());
            acc += q(1, n + 1);
        }
        assert!(detect_divergence(&SequenceValues::Exact(h), 1e6));
        let conv: Vec<_> = (0..400).map(|n| q(1, 1) - q(1, n + 1)).collect();
        assert!(!detect_divergence(&SequenceValues::Exact(conv), 1e6));
    }
}
