//! Arithmetic modulo word-size primes, dense nullspaces, Chinese remaindering
//! and rational reconstruction.
//!
//! Field elements live in Montgomery form (x * 2^64 mod p) everywhere inside
//! this module's hot loops; `to_m`/`from_m` convert at the boundary.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    p: u64,
    /// -p^{-1} mod 2^64
    pinv: u64,
    /// 2^128 mod p
    r2: u64,
}

impl Field {
    pub fn new(p: u64) -> Field {
        assert!(p % 2 == 1 && p < (1 << 62), "modulus must be odd and below 2^62");
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        Field { p, pinv: inv.wrapping_neg(), r2 }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline(always)]
    pub fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.pinv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline(always)]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    #[inline(always)]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline(always)]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn to_m(&self, x: u64) -> u64 {
        self.redc((x % self.p) as u128 * self.r2 as u128)
    }

    pub fn from_m(&self, x: u64) -> u64 {
        self.redc(x as u128)
    }

    pub fn one(&self) -> u64 {
        self.to_m(1)
    }

    pub fn from_i64(&self, x: i64) -> u64 {
        let r = x.rem_euclid(self.p as i64) as u64;
        self.to_m(r)
    }

    pub fn from_bigint(&self, x: &BigInt) -> u64 {
        let r = x.mod_floor(&BigInt::from(self.p)).to_u64().unwrap();
        self.to_m(r)
    }

    /// Reduces a rational; `None` if p divides the denominator.
    pub fn from_rational(&self, x: &BigRational) -> Option<u64> {
        let d = self.from_bigint(x.denom());
        if d == 0 {
            return None;
        }
        Some(self.mul(self.from_bigint(x.numer()), self.inv(d)))
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a != 0);
        self.pow(a, self.p - 2)
    }

    /// Plain residue in [0, p) as a signed big integer in the symmetric range.
    pub fn lift_symmetric(&self, a: u64) -> BigInt {
        let v = self.from_m(a);
        if v > self.p / 2 {
            BigInt::from(v) - BigInt::from(self.p)
        } else {
            BigInt::from(v)
        }
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// The `count` largest primes below 2^62, in decreasing order.
pub fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut c = (1u64 << 62) - 1;
    while out.len() < count {
        if is_prime(c) {
            out.push(c);
        }
        c -= 2;
    }
    out
}

/// A dense row-major matrix over a prime field, entries in Montgomery form.
#[derive(Debug, Clone)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<u64>>, cols: usize) -> Mat {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols);
            data.extend(r);
        }
        Mat { rows: n, cols, data }
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(f: &Field, m: &mut Mat) -> Vec<usize> {
    echelon(f, m, true)
}

/// Rank of the matrix (destroys it).
pub fn rank(f: &Field, m: &mut Mat) -> usize {
    echelon(f, m, false).len()
}

fn echelon(f: &Field, m: &mut Mat, reduce_above: bool) -> Vec<usize> {
    let (rows, cols) = (m.rows, m.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| m.data[i * cols + c] != 0) else {
            continue;
        };
        if pr != r {
            for k in c..cols {
                m.data.swap(pr * cols + k, r * cols + k);
            }
        }
        let inv = f.inv(m.data[r * cols + c]);
        for k in c..cols {
            m.data[r * cols + k] = f.mul(m.data[r * cols + k], inv);
        }
        let (before, rest) = m.data.split_at_mut(r * cols);
        let (prow, after) = rest.split_at_mut(cols);
        let prow = &prow[c..];
        let eliminate = |row: &mut [u64]| {
            let factor = row[c];
            if factor == 0 {
                return;
            }
            for (x, &y) in row[c..].iter_mut().zip(prow) {
                if y != 0 {
                    *x = f.sub(*x, f.mul(factor, y));
                }
            }
        };
        for row in after.chunks_mut(cols) {
            eliminate(row);
        }
        if reduce_above {
            for row in before.chunks_mut(cols) {
                eliminate(row);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Nullspace basis of the matrix: one vector per free column, with that free
/// entry equal to one. Returns (basis, pivot columns).
pub fn nullspace(f: &Field, mut m: Mat) -> (Vec<Vec<u64>>, Vec<usize>) {
    let pivots = rref(f, &mut m);
    let cols = m.cols;
    let mut is_pivot = vec![usize::MAX; cols];
    for (i, &c) in pivots.iter().enumerate() {
        is_pivot[c] = i;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| is_pivot[c] == usize::MAX) {
        let mut v = vec![0u64; cols];
        v[free] = f.one();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = f.neg(m.data[i * cols + free]);
        }
        basis.push(v);
    }
    (basis, pivots)
}

/// Incremental Chinese remaindering of a vector of residues.
#[derive(Debug, Clone)]
pub struct Crt {
    pub modulus: BigInt,
    pub values: Vec<BigInt>,
}

impl Crt {
    pub fn new(len: usize) -> Crt {
        Crt { modulus: BigInt::one(), values: vec![BigInt::zero(); len] }
    }

    /// Adds residues (plain, not Montgomery) modulo p.
    pub fn add(&mut self, p: u64, residues: &[u64]) {
        let pb = BigInt::from(p);
        let minv = mod_inverse(&(&self.modulus % &pb), &pb).expect("moduli must be coprime");
        for (v, &r) in self.values.iter_mut().zip(residues) {
            let diff = (BigInt::from(r) - &*v).mod_floor(&pb);
            let t = (diff * &minv).mod_floor(&pb);
            *v += &self.modulus * t;
        }
        self.modulus *= pb;
    }

    /// Symmetric-range integer lift of each value.
    pub fn symmetric(&self) -> Vec<BigInt> {
        let half = &self.modulus >> 1;
        self.values.iter().map(|v| if v > &half { v - &self.modulus } else { v.clone() }).collect()
    }
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// Wang's rational reconstruction: n/d = a mod m with |n|, d <= sqrt(m/2).
pub fn rational_reconstruction(a: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m >> 1u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    let (n, d) = if t1.sign() == Sign::Minus { (-r1, -t1) } else { (r1, t1) };
    Some(BigRational::new(n, d))
}

/// Exact RREF nullspace over the rationals, for small systems and as a
/// reference for the modular path.
pub fn nullspace_exact(rows: &[Vec<BigInt>], cols: usize) -> Vec<Vec<BigRational>> {
    let mut m: Vec<Vec<BigRational>> =
        rows.iter().map(|r| r.iter().map(|v| BigRational::from_integer(v.clone())).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(pr, r);
        let inv = m[r][c].recip();
        for k in c..cols {
            m[r][k] = &m[r][k] * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for k in c..cols {
                    let sub = &factor * &m[r][k];
                    m[i][k] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::one();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[i][free].clone();
        }
        basis.push(v);
    }
    basis
}
