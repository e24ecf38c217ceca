//! Exact walk counts a_n(x) by the forward recurrence a_{n+1}(x) = sum_s a_n(x - s).
//!
//! Only the canonical wedge x_1 >= ... >= x_d >= 0 with even coordinate sum is
//! stored. Values are kept as fixed-width little-endian limb vectors so the
//! stencil update never allocates; the width grows with c^n.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::series::ExactSeries;

#[derive(Debug, Clone, Default)]
pub struct CountOptions {
    /// Coordinates beyond this are dropped. Default ceil(N/2)+1.
    pub radius_cut: Option<usize>,
    /// Cap on table memory in bytes.
    pub mem_budget: Option<u64>,
    /// Worker threads for the stencil update; 0 or 1 runs inline.
    pub threads: usize,
}

impl CountOptions {
    /// Reads the memory budget from `LGF_MEM_BUDGET`.
    pub fn from_env() -> CountOptions {
        let mem_budget = std::env::var("LGF_MEM_BUDGET").ok().and_then(|v| v.trim().parse().ok());
        CountOptions { mem_budget, ..Default::default() }
    }
}

/// Canonical representative: absolute values sorted nonincreasing.
pub fn canonical(x: &[i64]) -> Vec<u16> {
    let mut v: Vec<u16> = x.iter().map(|c| c.unsigned_abs() as u16).collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

/// Size of the orbit of a canonical point under permutations and sign flips.
pub fn orbit_size(x: &[u16]) -> BigUint {
    let d = x.len() as u64;
    let mut r: BigUint = (1..=d).product();
    let mut i = 0;
    while i < x.len() {
        let mut j = i;
        while j < x.len() && x[j] == x[i] {
            j += 1;
        }
        let run: BigUint = (1..=(j - i) as u64).product();
        r /= run;
        if x[i] != 0 {
            r <<= j - i;
        }
        i = j;
    }
    r
}

/// Points of the wedge with x_1 <= r and coordinate sum <= s (even sums only),
/// sorted by (sum, tuple), with the pull-neighbour lists of the stencil.
struct Wedge {
    d: usize,
    coords: Vec<u16>,
    sums: Vec<u32>,
    nbr_start: Vec<u32>,
    nbr: Vec<u32>,
}

impl Wedge {
    fn build(lattice: &Lattice, r: usize, s: usize) -> Wedge {
        let d = lattice.dim();
        let mut pts: Vec<(u32, Vec<u16>)> = Vec::new();
        let mut cur = vec![0u16; d];
        enumerate_sorted(d, r as u16, s as u32, 0, &mut cur, &mut pts);
        pts.sort();
        let index: HashMap<&[u16], u32> =
            pts.iter().enumerate().map(|(i, (_, p))| (p.as_slice(), i as u32)).collect();
        let mut nbr_start = Vec::with_capacity(pts.len() + 1);
        let mut nbr = Vec::new();
        let mut q = vec![0i64; d];
        for (_, p) in &pts {
            nbr_start.push(nbr.len() as u32);
            for st in lattice.steps() {
                for k in 0..d {
                    q[k] = p[k] as i64 - st[k] as i64;
                }
                if let Some(&j) = index.get(canonical(&q).as_slice()) {
                    nbr.push(j);
                }
            }
        }
        nbr_start.push(nbr.len() as u32);
        let sums = pts.iter().map(|(s, _)| *s).collect();
        let coords = pts.into_iter().flat_map(|(_, p)| p).collect();
        Wedge { d, coords, sums, nbr_start, nbr }
    }

    fn len(&self) -> usize {
        self.sums.len()
    }

    fn point(&self, i: usize) -> &[u16] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    /// Number of points with coordinate sum <= s (a prefix, by the sort order).
    fn prefix(&self, s: u32) -> usize {
        self.sums.partition_point(|&t| t <= s)
    }

    fn bytes(&self) -> u64 {
        (self.coords.len() * 2 + self.sums.len() * 4 + self.nbr_start.len() * 4 + self.nbr.len() * 4) as u64
    }
}

fn enumerate_sorted(d: usize, max: u16, budget: u32, k: usize, cur: &mut Vec<u16>, out: &mut Vec<(u32, Vec<u16>)>) {
    if k == d {
        let s: u32 = cur.iter().map(|&v| v as u32).sum();
        if s % 2 == 0 {
            out.push((s, cur.clone()));
        }
        return;
    }
    let hi = if k == 0 { max } else { cur[k - 1] };
    for v in 0..=hi {
        if v as u32 > budget {
            break;
        }
        cur[k] = v;
        enumerate_sorted(d, max, budget - v as u32, k + 1, cur, out);
    }
}

fn limbs_for(c: u64, n: usize) -> usize {
    let bits = BigUint::from(c).pow(n as u32).bits() as usize;
    bits / 64 + 1
}

#[inline]
fn add_limbs(dst: &mut [u64], src: &[u64]) {
    let mut carry = false;
    let (lo, hi) = dst.split_at_mut(src.len());
    for (d, &s) in lo.iter_mut().zip(src) {
        let (v, c1) = d.overflowing_add(s);
        let (v, c2) = v.overflowing_add(carry as u64);
        *d = v;
        carry = c1 || c2;
    }
    for d in hi {
        if !carry {
            break;
        }
        let (v, c) = d.overflowing_add(1);
        *d = v;
        carry = c;
    }
}

fn limbs_to_big(src: &[u64]) -> BigUint {
    let mut digits = Vec::with_capacity(src.len() * 2);
    for &l in src {
        digits.push(l as u32);
        digits.push((l >> 32) as u32);
    }
    BigUint::new(digits)
}

/// One level of values over a prefix of the wedge.
#[derive(Clone)]
struct Level {
    limbs: usize,
    data: Vec<u64>,
}

impl Level {
    fn value(&self, i: usize) -> Option<&[u64]> {
        let a = i * self.limbs;
        self.data.get(a..a + self.limbs)
    }
}

/// Computes level n+1 from level n on the first `active` points, skipping the
/// points for which `skip` holds.
fn step_level(w: &Wedge, prev: &Level, limbs: usize, active: usize, threads: usize, skip: &(dyn Fn(&[u16]) -> bool + Sync)) -> Level {
    let mut data = vec![0u64; active * limbs];
    let prev_len = prev.data.len() / prev.limbs.max(1);
    let fill = |first: usize, chunk: &mut [u64]| {
        for (k, out) in chunk.chunks_mut(limbs).enumerate() {
            let i = first + k;
            if skip(w.point(i)) {
                continue;
            }
            for &j in &w.nbr[w.nbr_start[i] as usize..w.nbr_start[i + 1] as usize] {
                let j = j as usize;
                if j < prev_len {
                    add_limbs(out, prev.value(j).unwrap());
                }
            }
        }
    };
    if threads <= 1 || active < 1024 {
        fill(0, &mut data);
    } else {
        let per = active.div_ceil(threads);
        std::thread::scope(|sc| {
            for (t, chunk) in data.chunks_mut(per * limbs).enumerate() {
                let fill = &fill;
                sc.spawn(move || fill(t * per, chunk));
            }
        });
    }
    Level { limbs, data }
}

fn check_budget(budget: Option<u64>, n: usize, needed: u64) -> Result<()> {
    match budget {
        Some(b) if needed > b => Err(Error::Resource { n, needed, budget: b }),
        _ => Ok(()),
    }
}

/// All levels a_0..a_N on the wedge, truncated at a radius.
pub struct WalkTable {
    lattice: Lattice,
    max_steps: usize,
    radius: usize,
    wedge: Wedge,
    index: HashMap<Vec<u16>, u32>,
    levels: Vec<Level>,
}

/// Fills the table for n <= N. Values a_n(x) with n + x_1 <= 2R + 1 are exact.
pub fn count_walk_table(lattice: &Lattice, n_max: usize, opts: &CountOptions) -> Result<WalkTable> {
    let radius = opts.radius_cut.unwrap_or(n_max.div_ceil(2) + 1);
    let d = lattice.dim();
    let wedge = Wedge::build(lattice, radius, d * radius);
    let mut used = wedge.bytes();
    check_budget(opts.mem_budget, 0, used)?;
    let mut levels = vec![Level { limbs: 1, data: vec![1] }];
    for n in 0..n_max {
        let limbs = limbs_for(lattice.coordination(), n + 1);
        let active = wedge.prefix(2 * (n as u32 + 1));
        used += (active * limbs * 8) as u64;
        check_budget(opts.mem_budget, n + 1, used)?;
        let next = step_level(&wedge, &levels[n], limbs, active, opts.threads, &|_| false);
        levels.push(next);
    }
    let index = (0..wedge.len()).map(|i| (wedge.point(i).to_vec(), i as u32)).collect();
    Ok(WalkTable { lattice: lattice.clone(), max_steps: n_max, radius, wedge, index, levels })
}

impl WalkTable {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// a_n(x) for any integer point, or `None` where the radius cut makes the
    /// stored value unreliable.
    pub fn get(&self, n: usize, x: &[i64]) -> Option<BigUint> {
        if n > self.max_steps || x.len() != self.lattice.dim() {
            return None;
        }
        let p = canonical(x);
        let sum: u64 = p.iter().map(|&v| v as u64).sum();
        if sum % 2 == 1 || p[0] as usize > n || sum > 2 * n as u64 {
            return Some(BigUint::default());
        }
        if p[0] as usize > self.radius || n + p[0] as usize > 2 * self.radius + 1 {
            return None;
        }
        let i = *self.index.get(&p)? as usize;
        Some(self.levels[n].value(i).map(limbs_to_big).unwrap_or_default())
    }

    /// Canonical wedge points stored for level n, with their values.
    pub fn level_entries(&self, n: usize) -> impl Iterator<Item = (&[u16], BigUint)> + '_ {
        let lv = &self.levels[n];
        let len = lv.data.len() / lv.limbs;
        (0..len).map(move |i| (self.wedge.point(i), limbs_to_big(lv.value(i).unwrap())))
    }

    /// Sum of a_n over the whole lattice, reconstructed from the wedge by orbit sizes.
    pub fn full_mass(&self, n: usize) -> BigUint {
        self.level_entries(n).map(|(p, v)| orbit_size(p) * v).sum()
    }
}

/// a_0(0), ..., a_N(0). Uses the two-buffer sweep and keeps only points that
/// can still return to the origin.
pub fn count_excursions(lattice: &Lattice, n_max: usize, opts: &CountOptions) -> Result<Vec<BigUint>> {
    let wedge = Wedge::build(lattice, n_max / 2, n_max);
    check_budget(opts.mem_budget, 0, wedge.bytes())?;
    let mut out = vec![BigUint::from(1u32)];
    let mut cur = Level { limbs: 1, data: vec![1] };
    for n in 0..n_max {
        let m = n + 1;
        let reach = m.min(n_max - m);
        let limbs = limbs_for(lattice.coordination(), m);
        let active = wedge.prefix(2 * reach as u32);
        let needed = wedge.bytes() + ((active * limbs + cur.data.len()) * 8) as u64;
        check_budget(opts.mem_budget, m, needed)?;
        let skip = move |p: &[u16]| p[0] as usize > reach;
        cur = step_level(&wedge, &cur, limbs, active, opts.threads, &skip);
        out.push(cur.value(0).map(limbs_to_big).unwrap_or_default());
    }
    Ok(out)
}

/// p_n(0) = a_n(0)/c^n as an exact series.
pub fn excursion_series(lattice: &Lattice, n_max: usize, opts: &CountOptions) -> Result<ExactSeries> {
    let a = count_excursions(lattice, n_max, opts)?;
    let s = ExactSeries::new(
        a.into_iter().map(|v| BigRational::from_integer(BigInt::from(v))).collect(),
        format!("p_n(0), d={}", lattice.dim()),
    );
    Ok(s.scale_by_power(lattice.coordination()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fcc(d: usize) -> Lattice {
        Lattice::fcc(d).unwrap()
    }

    /// Brute force over all step sequences.
    fn brute_returns(d: usize, n: usize) -> u64 {
        let l = fcc(d);
        let steps = l.steps();
        let mut count = 0;
        let total = steps.len().pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut x = vec![0i32; d];
            for _ in 0..n {
                let s = &steps[c % steps.len()];
                c /= steps.len();
                for k in 0..d {
                    x[k] += s[k];
                }
            }
            if x.iter().all(|&v| v == 0) {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn four_dimensional_excursions() {
        let a = count_excursions(&fcc(4), 5, &CountOptions::default()).unwrap();
        let want: Vec<BigUint> = [1u32, 0, 24, 192, 3384, 51840].iter().map(|&v| v.into()).collect();
        assert_eq!(a, want);
    }

    #[test]
    fn brute_force_agreement() {
        for (d, n) in [(2, 8), (3, 5), (4, 4)] {
            let a = count_excursions(&fcc(d), n, &CountOptions::default()).unwrap();
            for k in 0..=n {
                assert_eq!(a[k], BigUint::from(brute_returns(d, k)), "d={d} n={k}");
            }
        }
    }

    #[test]
    fn table_first_step() {
        let t = count_walk_table(&fcc(3), 3, &CountOptions::default()).unwrap();
        let steps = fcc(3).steps().to_vec();
        for x in [[1i64, 1, 0], [2, 0, 0], [1, 0, 0], [0, 0, 0]] {
            let is_step = steps.iter().any(|s| s.iter().zip(&x).all(|(a, b)| *a as i64 == *b));
            assert_eq!(t.get(1, &x).unwrap(), BigUint::from(is_step as u32));
        }
        assert_eq!(t.get(2, &[1, 0, 0]).unwrap(), BigUint::default());
    }

    #[test]
    fn table_agrees_with_excursions() {
        let l = fcc(3);
        let t = count_walk_table(&l, 10, &CountOptions::default()).unwrap();
        let a = count_excursions(&l, 10, &CountOptions::default()).unwrap();
        for n in 0..=10 {
            assert_eq!(t.get(n, &[0, 0, 0]).unwrap(), a[n]);
        }
    }

    #[test]
    fn orbit_sizes() {
        assert_eq!(orbit_size(&[0, 0]), BigUint::from(1u32));
        assert_eq!(orbit_size(&[1, 1]), BigUint::from(4u32));
        assert_eq!(orbit_size(&[2, 1, 0]), BigUint::from(24u32));
    }

    #[test]
    fn budget_is_enforced() {
        let opts = CountOptions { mem_budget: Some(10), ..Default::default() };
        assert!(matches!(count_excursions(&fcc(3), 10, &opts), Err(Error::Resource { .. })));
    }
}
