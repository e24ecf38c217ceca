//! Exact nullspaces of overdetermined systems through modular images.
//!
//! The system is rebuilt modulo a sequence of primes. Each image is brought to
//! reduced echelon form; images whose pivot set differs from the best one seen
//! so far are discarded (a bad prime can only lose rank, which moves pivots to
//! the right). The basis vectors are Chinese-remaindered, lifted by rational
//! reconstruction, cleared of denominators and finally checked exactly by the
//! caller's certificate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::modp::{nullspace, primes, rational_reconstruction, Crt, Field, Mat};

/// Upper limit on the number of primes tried before giving up.
pub const MAX_PRIMES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotOrder {
    Same,
    Better,
    Worse,
}

/// Compares two pivot sets: more pivots wins, then the lexicographically
/// smaller list.
pub fn compare_pivots(candidate: &[usize], best: &[usize]) -> PivotOrder {
    use std::cmp::Ordering::*;
    match candidate.len().cmp(&best.len()) {
        Greater => PivotOrder::Better,
        Less => PivotOrder::Worse,
        Equal => match candidate.cmp(best) {
            Equal => PivotOrder::Same,
            Less => PivotOrder::Better,
            Greater => PivotOrder::Worse,
        },
    }
}

/// Dimension of the nullspace modulo the first usable prime, with that prime.
pub fn modular_nullity<F>(mut build: F) -> Result<usize>
where
    F: FnMut(&Field) -> Option<Mat>,
{
    for p in primes(8) {
        let f = Field::new(p);
        if let Some(m) = build(&f) {
            return Ok(nullspace(&f, m).0.len());
        }
    }
    Err(Error::Verification("no usable prime for the linear system".into()))
}

/// Integer basis of the rational nullspace, one vector per free column of the
/// reduced echelon form, each scaled to primitive integers with the free entry
/// positive. `certify` receives every candidate vector and must accept it
/// before it is returned. At most `max_vectors` vectors are reconstructed.
pub fn exact_kernel<F, C>(cols: usize, max_vectors: usize, mut build: F, mut certify: C) -> Result<Vec<Vec<BigInt>>>
where
    F: FnMut(&Field) -> Option<Mat>,
    C: FnMut(&[BigInt]) -> bool,
{
    let mut best_pivots: Option<Vec<usize>> = None;
    let mut crts: Vec<Crt> = Vec::new();
    let mut last: Option<Vec<Vec<BigInt>>> = None;
    let mut usable = 0;
    for p in primes(MAX_PRIMES) {
        let f = Field::new(p);
        let Some(m) = build(&f) else { continue };
        let (basis, pivots) = nullspace(&f, m);
        match &best_pivots {
            None => {}
            Some(b) => match compare_pivots(&pivots, b) {
                PivotOrder::Same => {}
                PivotOrder::Worse => continue,
                PivotOrder::Better => {
                    crts.clear();
                    last = None;
                }
            },
        }
        if basis.is_empty() {
            return Ok(Vec::new());
        }
        if crts.is_empty() {
            best_pivots = Some(pivots);
            crts = (0..basis.len().min(max_vectors)).map(|_| Crt::new(cols)).collect();
        }
        for (crt, v) in crts.iter_mut().zip(&basis) {
            let plain: Vec<u64> = v.iter().map(|&x| f.from_m(x)).collect();
            crt.add(p, &plain);
        }
        usable += 1;
        let Some(rec) = reconstruct_all(&crts) else { continue };
        // two agreeing reconstructions in a row before paying for certification
        if last.as_ref() == Some(&rec) && rec.iter().all(|v| certify(v)) {
            return Ok(rec);
        }
        last = Some(rec);
    }
    Err(Error::Verification(format!(
        "modular solve did not stabilize after {usable} primes ({cols} unknowns)"
    )))
}

fn reconstruct_all(crts: &[Crt]) -> Option<Vec<Vec<BigInt>>> {
    crts.iter()
        .map(|crt| {
            let q: Option<Vec<BigRational>> =
                crt.values.iter().map(|a| rational_reconstruction(a, &crt.modulus)).collect();
            q.map(|q| clear_denominators(&q))
        })
        .collect()
}

/// Scales a rational vector to coprime integers, keeping the sign of the
/// input.
pub fn clear_denominators(v: &[BigRational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Makes the last nonzero entry positive.
pub fn sign_normalize(v: &mut [BigInt]) {
    if v.iter().rev().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in v.iter_mut() {
            *x = -&*x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modp::nullspace_exact;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn to_mat(f: &Field, rows: &[Vec<BigInt>]) -> Mat {
        let cols = rows[0].len();
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|x| f.from_bigint(x)).collect()).collect(), cols)
    }

    #[test]
    fn agrees_with_exact_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..20 {
            let cols = 6 + trial % 30;
            let rank = cols - 1 - trial % 3;
            // random rank-deficient integer matrix with large entries
            let gens: Vec<Vec<BigInt>> = (0..rank)
                .map(|_| (0..cols).map(|_| BigInt::from(rng.gen_range(-1_000_000_000i64..1_000_000_000))).collect())
                .collect();
            let rows: Vec<Vec<BigInt>> = (0..rank + 5)
                .map(|_| {
                    let w: Vec<i64> = (0..rank).map(|_| rng.gen_range(-50..50)).collect();
                    (0..cols).map(|c| (0..rank).map(|k| &gens[k][c] * w[k]).sum()).collect()
                })
                .collect();
            let exact = nullspace_exact(&rows, cols);
            let got = exact_kernel(cols, usize::MAX, |f| Some(to_mat(f, &rows)), |v| {
                rows.iter().all(|r| r.iter().zip(v).map(|(a, b)| a * b).sum::<BigInt>().is_zero())
            })
            .unwrap();
            assert_eq!(got.len(), exact.len());
            for (g, e) in got.iter().zip(&exact) {
                assert_eq!(g, &clear_denominators(e));
            }
        }
    }

    #[test]
    fn full_rank_has_trivial_kernel() {
        let rows = vec![vec![BigInt::from(1), BigInt::from(2)], vec![BigInt::from(3), BigInt::from(4)]];
        assert!(exact_kernel(2, 4, |f| Some(to_mat(f, &rows)), |_| true).unwrap().is_empty());
    }
}
