//! LGF coefficients from the multinomial expansion of lambda(k)^n, each monomial
//! in the cosines integrated with the Wallis moments.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lattice::StructureFunction;
use crate::series::ExactSeries;
use crate::util::binomial;

/// (1/pi) * integral_0^pi cos^{2n} x dx = C(2n,n)/4^n.
pub fn wallis_moment(n: u64) -> BigRational {
    BigRational::new(BigInt::from(binomial(2 * n, n)), BigInt::from(BigUint::one() << (2 * n)))
}

/// Cached central binomials C(2k,k), used with a common power-of-two denominator.
struct WallisCache {
    central: Vec<BigUint>,
}

impl WallisCache {
    fn new(cap: usize) -> Self {
        let mut central = vec![BigUint::one()];
        for k in 1..=cap as u64 {
            let prev = central.last().unwrap().clone();
            central.push(prev * (4 * k - 2) / k);
        }
        WallisCache { central }
    }
}

/// Safety cap on the number of visited compositions.
pub const DEFAULT_COMPOSITION_CAP: u64 = 2_000_000_000;

/// p_0(0), ..., p_N(0) from the Wallis expansion.
pub fn lgf_series_wallis(d: usize, n_max: usize) -> Result<ExactSeries> {
    lgf_series_wallis_capped(d, n_max, DEFAULT_COMPOSITION_CAP)
}

pub fn lgf_series_wallis_capped(d: usize, n_max: usize, cap: u64) -> Result<ExactSeries> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let sf = StructureFunction::fcc(d);
    let pairs = sf.pairs().to_vec();
    let m = pairs.len() as u64;
    let cache = WallisCache::new(n_max);
    let mut visited = 0u64;
    let mut coeffs = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        // Sum over compositions of n into the pair exponents of
        // multinomial * prod_t C(e_t, e_t/2); every term shares the denominator
        // 2^{sum e_t} = 4^n, and m^n from the normalization.
        let mut total = BigUint::zero();
        let mut e = vec![0u32; d];
        let mut state = Enum { pairs: &pairs, e: &mut e, cache: &cache, visited: &mut visited, cap, total: &mut total };
        state.go(0, n as u32, BigUint::one(), n as u64)?;
        let den = (BigUint::one() << (2 * n)) * BigUint::from(m).pow(n as u32);
        coeffs.push(BigRational::new(BigInt::from(total), BigInt::from(den)));
    }
    Ok(ExactSeries::new(coeffs, format!("p_n(0) via Wallis, d={d}")))
}

struct Enum<'a> {
    pairs: &'a [(usize, usize)],
    e: &'a mut Vec<u32>,
    cache: &'a WallisCache,
    visited: &'a mut u64,
    cap: u64,
    total: &'a mut BigUint,
}

impl Enum<'_> {
    /// Assigns exponents to pairs k.., with `left` still to distribute;
    /// `mult` is the multinomial accumulated so far, built as a product of
    /// binomials C(remaining, chosen).
    fn go(&mut self, k: usize, left: u32, mult: BigUint, remaining: u64) -> Result<()> {
        *self.visited += 1;
        if *self.visited > self.cap {
            return Err(Error::Resource { n: remaining as usize, needed: *self.visited, budget: self.cap });
        }
        let (a, b) = self.pairs[k];
        if k + 1 == self.pairs.len() {
            self.e[a] += left;
            self.e[b] += left;
            if self.e.iter().all(|v| v % 2 == 0) {
                let mut w = mult;
                for &t in self.e.iter() {
                    w *= &self.cache.central[(t / 2) as usize];
                }
                *self.total += w;
            }
            self.e[a] -= left;
            self.e[b] -= left;
            return Ok(());
        }
        // Parity pruning: after this pair, coordinates that no later pair
        // touches are final and must be even.
        for v in 0..=left {
            self.e[a] += v;
            self.e[b] += v;
            let ok = self.final_coords_even(k);
            if ok {
                let m2 = &mult * binomial(remaining, v as u64);
                self.go(k + 1, left - v, m2, remaining - v as u64)?;
            }
            self.e[a] -= v;
            self.e[b] -= v;
        }
        Ok(())
    }

    fn final_coords_even(&self, k: usize) -> bool {
        let later = &self.pairs[k + 1..];
        (0..self.e.len()).all(|t| self.e[t] % 2 == 0 || later.iter().any(|&(a, b)| a == t || b == t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn moments() {
        assert_eq!(wallis_moment(0), q(1, 1));
        assert_eq!(wallis_moment(1), q(1, 2));
        assert_eq!(wallis_moment(3), q(5, 16));
    }

    #[test]
    fn two_dimensional_series() {
        let s = lgf_series_wallis(2, 6).unwrap();
        assert_eq!(s.coefficients[0], q(1, 1));
        assert_eq!(s.coefficients[1], q(0, 1));
        assert_eq!(s.coefficients[2], q(1, 4));
        // C(2n,n)^2 / 16^n at n = 2
        assert_eq!(s.coefficients[4], q(36, 256));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(lgf_series_wallis_capped(4, 12, 100), Err(Error::Resource { .. })));
    }
}
