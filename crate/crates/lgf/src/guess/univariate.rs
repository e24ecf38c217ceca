//! Guessing a linear recurrence or a linear ODE from the first terms of a
//! sequence by an ansatz with undetermined polynomial coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::linsolve::{exact_kernel, modular_nullity, sign_normalize};
use crate::error::{Error, Result};
use crate::modp::{Field, Mat};
use crate::operator::{LinearODE, LinearRecurrence, UPoly};
use crate::ore::holonomic::apply_ode_to_series;
use crate::series::ExactSeries;

/// How the (order, degree) pairs are visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStrategy {
    /// Increasing order + degree; within one total, smaller order first.
    Staircase,
    /// Smallest order that has any solution within the degree bound, then the
    /// smallest degree for that order.
    MinimalOrder,
}

#[derive(Debug, Clone)]
pub struct GuessOptions {
    pub max_order: usize,
    pub max_degree: usize,
    /// Equations beyond the number of unknowns required in the solve.
    pub margin: usize,
    /// Trailing equations kept out of the solve and checked afterwards.
    pub held_out: usize,
    pub strategy: SearchStrategy,
}

impl GuessOptions {
    pub fn new(max_order: usize, max_degree: usize) -> Self {
        GuessOptions { max_order, max_degree, margin: 10, held_out: 10, strategy: SearchStrategy::Staircase }
    }

    pub fn strategy(mut self, s: SearchStrategy) -> Self {
        self.strategy = s;
        self
    }

    fn shapes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        match self.strategy {
            SearchStrategy::Staircase => {
                for total in 1..=self.max_order + self.max_degree {
                    for r in 1..=self.max_order.min(total) {
                        if total - r <= self.max_degree {
                            out.push((r, total - r));
                        }
                    }
                }
            }
            SearchStrategy::MinimalOrder => {
                for r in 1..=self.max_order {
                    for d in 0..=self.max_degree {
                        out.push((r, d));
                    }
                }
            }
        }
        out
    }
}

enum Kind {
    Rec,
    Ode,
}

/// Column layout: unknown (k, i) is the coefficient of n^i s(n+k) (recurrence)
/// or of z^i d^k (ODE), at column k (D+1) + i.
fn guess(seq: &ExactSeries, opts: &GuessOptions, kind: Kind) -> Result<Option<Vec<UPoly>>> {
    let len = seq.len();
    let mut skipped = false;
    let mut tried = false;
    for (r, d) in opts.shapes() {
        let unknowns = (r + 1) * (d + 1);
        let equations = len.saturating_sub(r);
        let solve_eqs = equations.saturating_sub(opts.held_out);
        if solve_eqs < unknowns + opts.margin {
            skipped = true;
            continue;
        }
        tried = true;
        let c = &seq.coefficients;
        let build = |f: &Field| -> Option<Mat> {
            let cm: Option<Vec<u64>> = c[..solve_eqs + r].iter().map(|x| f.from_rational(x)).collect();
            let cm = cm?;
            let mut m = Mat::zeros(solve_eqs, unknowns);
            for n in 0..solve_eqs {
                let row = &mut m.data[n * unknowns..(n + 1) * unknowns];
                match kind {
                    Kind::Rec => {
                        let nm = f.from_i64(n as i64);
                        for k in 0..=r {
                            let mut pw = cm[n + k];
                            for i in 0..=d {
                                row[k * (d + 1) + i] = pw;
                                pw = f.mul(pw, nm);
                            }
                        }
                    }
                    Kind::Ode => {
                        for j in 0..=r {
                            for i in 0..=d {
                                let idx = n as i64 + j as i64 - i as i64;
                                if idx < 0 {
                                    continue;
                                }
                                let mut v = cm[idx as usize];
                                for t in 0..j as i64 {
                                    v = f.mul(v, f.from_i64(idx - t));
                                }
                                row[j * (d + 1) + i] = v;
                            }
                        }
                    }
                }
            }
            Some(m)
        };
        if modular_nullity(build)? == 0 {
            continue;
        }
        let to_polys = |v: &[BigInt]| -> Vec<UPoly> { v.chunks(d + 1).map(|ch| UPoly::new(ch.to_vec())).collect() };
        let certify = |v: &[BigInt]| -> bool {
            let polys = to_polys(v);
            match kind {
                Kind::Rec => match LinearRecurrence::new(polys) {
                    Ok(rec) => (0..equations).all(|n| rec.residual(c, n).is_some_and(|x| x.is_zero())),
                    Err(_) => false,
                },
                Kind::Ode => match LinearODE::new(polys) {
                    Ok(ode) => apply_ode_to_series(&ode, seq).is_ok_and(|res| res.coefficients.iter().all(|x| x.is_zero())),
                    Err(_) => false,
                },
            }
        };
        let kernel = exact_kernel(unknowns, 1, build, certify)?;
        if let Some(v) = kernel.into_iter().next() {
            let mut v = v;
            // leading coefficient of the top polynomial positive
            let top = &v[r * (d + 1)..];
            if top.iter().rev().find(|x| !x.is_zero()).is_none() {
                // the top polynomial vanished, so the order is lower than r;
                // the smaller order was tried before and had no solution
                continue;
            }
            sign_normalize(&mut v);
            return Ok(Some(to_polys(&v)));
        }
    }
    if skipped && !tried {
        return Err(Error::InsufficientData(format!(
            "{len} terms cannot overdetermine any ansatz within the bounds by {} equations plus {} held out",
            opts.margin, opts.held_out
        )));
    }
    Ok(None)
}

/// Recurrence sum_k q_k(n) s(n+k) = 0 satisfied by all given terms.
pub fn guess_recurrence(seq: &ExactSeries, opts: &GuessOptions) -> Result<Option<LinearRecurrence>> {
    Ok(guess(seq, opts, Kind::Rec)?.map(|c| LinearRecurrence::new(c).unwrap().normalized()))
}

/// ODE sum_j a_j(z) P^(j)(z) = 0 satisfied by the truncated series.
pub fn guess_ode(seq: &ExactSeries, opts: &GuessOptions) -> Result<Option<LinearODE>> {
    Ok(guess(seq, opts, Kind::Ode)?.map(|c| LinearODE::new(c).unwrap().normalized()))
}

/// Residuals of a recurrence on every position the terms determine.
pub fn recurrence_residuals(rec: &LinearRecurrence, s: &[BigRational]) -> Vec<BigRational> {
    (0..s.len().saturating_sub(rec.order())).filter_map(|n| rec.residual(s, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::binomial;
    use num_traits::One;

    fn ones(n: usize) -> ExactSeries {
        ExactSeries::new(vec![BigRational::one(); n], "ones")
    }

    fn central_squares(n: usize) -> ExactSeries {
        let v = (0..n as u64)
            .map(|k| {
                if k % 2 == 1 {
                    BigRational::zero()
                } else {
                    let b = BigInt::from(binomial(k, k / 2));
                    BigRational::new(&b * &b, BigInt::from(16).pow(k as u32 / 2))
                }
            })
            .collect();
        ExactSeries::new(v, "2d")
    }

    #[test]
    fn constant_sequence() {
        let rec = guess_recurrence(&ones(30), &GuessOptions::new(3, 3)).unwrap().unwrap();
        assert_eq!(rec.coeffs, vec![UPoly::from_i64(&[-1]), UPoly::from_i64(&[1])]);
    }

    #[test]
    fn geometric_ode() {
        let ode = guess_ode(&ones(30), &GuessOptions::new(2, 2)).unwrap().unwrap();
        assert_eq!(ode.coeffs, vec![UPoly::from_i64(&[-1]), UPoly::from_i64(&[1, -1])].into_iter().map(|p| p.scale(&BigInt::from(-1))).collect::<Vec<_>>());
    }

    #[test]
    fn two_dimensional() {
        let s = central_squares(60);
        let rec = guess_recurrence(&s, &GuessOptions::new(3, 3)).unwrap().unwrap();
        assert_eq!(rec.coeffs, vec![UPoly::from_i64(&[-1, -2, -1]), UPoly::zero(), UPoly::from_i64(&[4, 4, 1])]);
        let ode = guess_ode(&s, &GuessOptions::new(3, 4)).unwrap().unwrap();
        assert_eq!(ode, crate::golden::fcc_ode(2).unwrap());
    }

    #[test]
    fn too_few_terms() {
        assert!(matches!(guess_recurrence(&ones(8), &GuessOptions::new(2, 2)), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn no_solution_within_bounds() {
        // 2^(n^2) satisfies no linear recurrence with polynomial coefficients
        let v: Vec<BigRational> = (0..40u32).map(|n| BigRational::from_integer(BigInt::from(2).pow(n * n))).collect();
        let s = ExactSeries::new(v, "fast");
        assert!(guess_recurrence(&s, &GuessOptions::new(2, 2)).unwrap().is_none());
    }
}
