//! Multi-step guessing: walk counts on a low-dimensional slice of the lattice,
//! recurrences guessed on that slice and used to extend it to many more steps,
//! then the next slice taken from the extended data, down to the origin.
//!
//! Everything runs modulo word-size primes; the returned counts a_n(0) are
//! reconstructed by Chinese remaindering, with one extra prime as a stability
//! check, and compared against direct counts where those exist.
//!
//! The slice b_n(y_1..y_m) = a_n(y_1..y_m, 0..0) inherits the symmetry of the
//! lattice under sign changes and permutations of the y_i, and vanishes unless
//! y_1 + .. + y_m is even. The recurrences are guessed in an ansatz that
//! respects the sign changes:
//!
//!   c(n, y) b_{n+1}(y) + sum_{s <= 0, |tau_i| <= R} c_{s,tau}(n, y) b_{n+s}(y + tau) = 0
//!
//! with c_{s,h tau}(n, h y) = chi(h) c_{s,tau}(n, y) for every sign vector h,
//! where chi is either trivial or the sign of the first coordinate (then the
//! top coefficient is divisible by y_1). Both are tried. The origin comes
//! from a separate relation between the values at the points nearest to it,
//! across a few levels.

use std::collections::{HashMap, HashSet};

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::multivariate::monomials;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::modp::{nullspace, primes, Crt, Field, Mat};
use crate::walkcount::{count_walk_table, CountOptions, WalkTable};

/// Size of an ansatz: lower levels n, n-1, .., n-levels+1, offsets within the
/// box of the given radius, coefficients of total degree <= degree in (n, y).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub levels: usize,
    pub radius: usize,
    pub degree: usize,
}

impl Shape {
    pub const fn new(levels: usize, radius: usize, degree: usize) -> Shape {
        Shape { levels, radius, degree }
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(levels {}, radius {}, degree {})", self.levels, self.radius, self.degree)
    }
}

pub const DEFAULT_SHAPES: [Shape; 12] = [
    Shape::new(1, 1, 1),
    Shape::new(2, 1, 1),
    Shape::new(1, 2, 1),
    Shape::new(2, 2, 1),
    Shape::new(2, 1, 2),
    Shape::new(2, 2, 2),
    Shape::new(3, 2, 2),
    Shape::new(3, 2, 3),
    Shape::new(4, 2, 3),
    Shape::new(4, 3, 2),
    Shape::new(4, 3, 3),
    Shape::new(5, 3, 3),
];

/// Shapes for the origin relation: levels n+1 down to n-levels+1, orbit
/// representatives with all |y_i| <= radius, coefficients polynomial in n.
pub const DEFAULT_ORIGIN_SHAPES: [Shape; 10] = [
    Shape::new(1, 1, 0),
    Shape::new(2, 1, 0),
    Shape::new(1, 1, 1),
    Shape::new(2, 1, 1),
    Shape::new(2, 2, 0),
    Shape::new(2, 2, 1),
    Shape::new(3, 2, 1),
    Shape::new(2, 2, 2),
    Shape::new(3, 2, 2),
    Shape::new(3, 3, 2),
];

#[derive(Debug, Clone)]
pub struct MultistepOptions {
    /// Levels counted directly to seed the first slice. Defaults to 15 for
    /// d >= 4 and more in low dimension, where counting is cheap and the
    /// origin relation has few equations per level.
    pub count_depth: Option<usize>,
    /// How far intermediate slices are extended before the next drop.
    pub intermediate_depth: usize,
    pub shapes: Vec<Shape>,
    pub origin_shapes: Vec<Shape>,
    /// Sampled equations beyond the number of unknowns.
    pub extra_rows: usize,
    /// Independent equations every guessed recurrence must also satisfy.
    pub held_out_rows: usize,
    /// Excess equations required for the origin relation.
    pub origin_margin: usize,
    pub seed: u64,
    pub threads: usize,
    pub mem_budget: Option<u64>,
}

impl Default for MultistepOptions {
    fn default() -> Self {
        MultistepOptions {
            count_depth: None,
            intermediate_depth: 40,
            shapes: DEFAULT_SHAPES.to_vec(),
            origin_shapes: DEFAULT_ORIGIN_SHAPES.to_vec(),
            extra_rows: 30,
            held_out_rows: 40,
            origin_margin: 10,
            seed: 0x6d75_6c74,
            threads: 1,
            mem_budget: None,
        }
    }
}

/// What one slice of the schedule used and produced.
#[derive(Debug, Clone)]
pub struct StageInfo {
    pub dim: usize,
    pub shape: Shape,
    /// Whether the recurrences change sign with the first coordinate.
    pub odd: bool,
    pub origin_shape: Shape,
    /// Recurrences with a nonvanishing top coefficient, modulo the first prime.
    pub recurrences: usize,
    pub origin_relations: usize,
    /// Highest level known before guessing.
    pub known: usize,
    pub extended_to: usize,
}

#[derive(Debug, Clone)]
pub struct MultistepResult {
    /// a_n(0) for n = 0..=N.
    pub values: Vec<BigUint>,
    pub stages: Vec<StageInfo>,
    pub primes_used: usize,
    /// Number of leading values compared against direct counts.
    pub cross_checked: usize,
}

// ---------------------------------------------------------------------------
// slices

/// Values of b_n on the box [0, n]^m of absolute coordinates, per level, in
/// Montgomery form.
#[derive(Debug, Clone)]
struct Slice {
    m: usize,
    levels: Vec<Vec<u64>>,
}

impl Slice {
    fn new(m: usize) -> Slice {
        Slice { m, levels: Vec::new() }
    }

    fn top(&self) -> usize {
        self.levels.len() - 1
    }

    fn box_len(&self, n: usize) -> usize {
        (n + 1).pow(self.m as u32)
    }

    #[inline]
    fn index(n: usize, y: &[i64]) -> Option<usize> {
        let w = n + 1;
        let mut idx = 0;
        let mut mul = 1;
        for &c in y {
            let a = c.unsigned_abs() as usize;
            if a > n {
                return None;
            }
            idx += a * mul;
            mul *= w;
        }
        Some(idx)
    }

    #[inline]
    fn get(&self, n: i64, y: &[i64]) -> u64 {
        if n < 0 {
            return 0;
        }
        let n = n as usize;
        match Slice::index(n, y) {
            Some(i) => self.levels[n][i],
            None => 0,
        }
    }

    /// Stores v at every permutation of the absolute point `canon`.
    fn set_orbit(level: &mut [u64], n: usize, canon: &[i64], v: u64) {
        for p in permutations(canon) {
            level[Slice::index(n, &p).unwrap()] = v;
        }
    }

    /// The sub-slice with the trailing coordinates set to zero.
    fn restrict(&self, m2: usize) -> Slice {
        let mut out = Slice::new(m2);
        for (n, lv) in self.levels.iter().enumerate() {
            let len = (n + 1).pow(m2 as u32);
            // the first m2 coordinates vary fastest, so the sub-box is a prefix
            out.levels.push(lv[..len].to_vec());
        }
        out
    }
}

/// Distinct permutations of a small vector.
fn permutations(v: &[i64]) -> Vec<Vec<i64>> {
    let mut a = v.to_vec();
    a.sort_unstable();
    let mut out = vec![a.clone()];
    loop {
        let Some(i) = (0..a.len().saturating_sub(1)).rev().find(|&i| a[i] < a[i + 1]) else {
            return out;
        };
        let j = (i + 1..a.len()).rev().find(|&j| a[j] > a[i]).unwrap();
        a.swap(i, j);
        a[i + 1..].reverse();
        out.push(a.clone());
    }
}

/// Nonnegative nonincreasing points with even sum and largest entry <= r.
fn canonical_points(m: usize, r: usize) -> Vec<Vec<i64>> {
    fn rec(out: &mut Vec<Vec<i64>>, cur: &mut Vec<i64>, m: usize, bound: i64) {
        if cur.len() == m {
            if cur.iter().sum::<i64>() % 2 == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for v in 0..=bound {
            cur.push(v);
            rec(out, cur, m, v);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut out, &mut Vec::new(), m, r as i64);
    out
}

/// Signed permutations of a point with a nonzero first entry, the point
/// itself first.
fn solving_images(y: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![y.to_vec()];
    let mut seen: HashSet<Vec<i64>> = out.iter().cloned().collect();
    let m = y.len();
    for p in permutations(y) {
        for mask in 0..1u32 << m {
            let z: Vec<i64> = p.iter().enumerate().map(|(i, &v)| if mask >> i & 1 == 1 { -v } else { v }).collect();
            if z[0] != 0 && seen.insert(z.clone()) {
                out.push(z);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// the equivariant ansatz

struct Unknown {
    s: i64,
    /// index into the (n, y) monomials
    mono: usize,
    /// (tau, negated)
    images: Vec<(Vec<i64>, bool)>,
}

struct Ansatz {
    m: usize,
    shape: Shape,
    nmons: Vec<Vec<u32>>,
    unknowns: Vec<Unknown>,
    top_count: usize,
}

fn sign_vectors(m: usize) -> Vec<Vec<i64>> {
    (0..1u32 << m).map(|mask| (0..m).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect()).collect()
}

impl Ansatz {
    fn new(m: usize, shape: Shape, odd: bool) -> Ansatz {
        let nmons = monomials(m + 1, shape.degree);
        let signs = sign_vectors(m);
        let mut unknowns = Vec::new();
        let mut levels: Vec<(i64, usize)> = vec![(1, 0)];
        levels.extend((0..shape.levels as i64).map(|k| (-k, shape.radius)));
        let mut top_count = 0;
        for (s, r) in levels {
            let mut t0 = vec![0i64; m];
            loop {
                let stab: Vec<&Vec<i64>> = signs.iter().filter(|h| h.iter().zip(&t0).all(|(hi, ti)| hi * ti == *ti)).collect();
                for (mi, e) in nmons.iter().enumerate() {
                    let sign_of = |h: &[i64]| if odd { h[0] } else { 1 } * h.iter().zip(&e[1..]).map(|(hi, &k)| hi.pow(k)).product::<i64>();
                    if stab.iter().all(|h| sign_of(h) == 1) {
                        let mut images: Vec<(Vec<i64>, bool)> = Vec::new();
                        for h in &signs {
                            let t: Vec<i64> = h.iter().zip(&t0).map(|(a, b)| a * b).collect();
                            if !images.iter().any(|(u, _)| *u == t) {
                                images.push((t, sign_of(h) < 0));
                            }
                        }
                        unknowns.push(Unknown { s, mono: mi, images });
                        if s == 1 {
                            top_count += 1;
                        }
                    }
                }
                let mut i = 0;
                loop {
                    if i == m {
                        break;
                    }
                    t0[i] += 1;
                    if t0[i] <= r as i64 {
                        break;
                    }
                    t0[i] = 0;
                    i += 1;
                }
                if i == m {
                    break;
                }
            }
        }
        Ansatz { m, shape, nmons, unknowns, top_count }
    }

    fn len(&self) -> usize {
        self.unknowns.len()
    }

    fn mono_values(&self, f: &Field, n: i64, y: &[i64]) -> Vec<u64> {
        let base: Vec<u64> = std::iter::once(n).chain(y.iter().copied()).map(|v| f.from_i64(v)).collect();
        self.nmons
            .iter()
            .map(|e| e.iter().zip(&base).fold(f.one(), |acc, (&k, &b)| f.mul(acc, f.pow(b, k as u64))))
            .collect()
    }

    fn row(&self, f: &Field, data: &Slice, n: i64, y: &[i64]) -> Vec<u64> {
        let mv = self.mono_values(f, n, y);
        let mut z = vec![0i64; self.m];
        self.unknowns
            .iter()
            .map(|u| {
                let mut acc = 0u64;
                for (t, neg) in &u.images {
                    for i in 0..self.m {
                        z[i] = y[i] + t[i];
                    }
                    let v = data.get(n + u.s, &z);
                    if v != 0 {
                        acc = if *neg { f.sub(acc, v) } else { f.add(acc, v) };
                    }
                }
                f.mul(acc, mv[u.mono])
            })
            .collect()
    }

    /// `count` nonzero equations at random points (n, y) whose levels lie in
    /// 0..=known. Only y with nonnegative entries are used: the equation at
    /// a sign image of y is the same up to sign.
    fn sample_rows(&self, f: &Field, data: &Slice, count: usize, seed: u64) -> Option<Vec<Vec<u64>>> {
        let lo = self.shape.levels as i64 - 1;
        let hi = data.top() as i64 - 1;
        if hi < lo {
            return None;
        }
        let available: f64 = (lo..=hi).map(|n| ((n + 3) as f64).powi(self.m as i32)).sum();
        if available < 2.0 * count as f64 {
            return None;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(count);
        let mut tries = 0usize;
        while out.len() < count {
            tries += 1;
            if tries > 50 * count {
                return None;
            }
            let n = rng.gen_range(lo..=hi);
            let y: Vec<i64> = (0..self.m).map(|_| rng.gen_range(0..=n + 2)).collect();
            if !seen.insert((n, y.clone())) {
                continue;
            }
            let row = self.row(f, data, n, &y);
            if row.iter().any(|&x| x != 0) {
                out.push(row);
            }
        }
        Some(out)
    }
}

/// A recurrence in plain form: coefficient polynomials for the top value and
/// for each shifted lower value, over the (n, y) monomials.
struct PlainRec {
    top: Vec<u64>,
    lower: Vec<(i64, Vec<i64>, Vec<u64>)>,
}

fn expand(a: &Ansatz, f: &Field, v: &[u64]) -> PlainRec {
    let k = a.nmons.len();
    let mut top = vec![0u64; k];
    let mut lower: HashMap<(i64, Vec<i64>), Vec<u64>> = HashMap::new();
    for (u, &c) in a.unknowns.iter().zip(v) {
        if c == 0 {
            continue;
        }
        for (t, neg) in &u.images {
            let c = if *neg { f.neg(c) } else { c };
            let slot = if u.s == 1 { &mut top } else { lower.entry((u.s, t.clone())).or_insert_with(|| vec![0; k]) };
            slot[u.mono] = f.add(slot[u.mono], c);
        }
    }
    let mut lower: Vec<(i64, Vec<i64>, Vec<u64>)> =
        lower.into_iter().filter(|(_, c)| c.iter().any(|&x| x != 0)).map(|((s, t), c)| (s, t, c)).collect();
    lower.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    PlainRec { top, lower }
}

/// A plain recurrence with n fixed: coefficients over the y monomials.
struct Specialized {
    top: Vec<u64>,
    lower: Vec<(i64, Vec<i64>, Vec<u64>)>,
}

struct MonoMap {
    /// for each (n, y) monomial: (power of n, index of the y monomial)
    split: Vec<(u32, usize)>,
    ymons: Vec<Vec<u32>>,
}

impl MonoMap {
    fn new(m: usize, degree: usize) -> MonoMap {
        let ymons = monomials(m, degree);
        let split = monomials(m + 1, degree)
            .iter()
            .map(|e| (e[0], ymons.iter().position(|y| y[..] == e[1..]).unwrap()))
            .collect();
        MonoMap { split, ymons }
    }

    fn specialize(&self, f: &Field, c: &[u64], n: i64) -> Vec<u64> {
        let nm = f.from_i64(n);
        let mut out = vec![0u64; self.ymons.len()];
        for (&(k, yi), &a) in self.split.iter().zip(c) {
            if a != 0 {
                out[yi] = f.add(out[yi], f.mul(a, f.pow(nm, k as u64)));
            }
        }
        out
    }

    fn y_values(&self, f: &Field, y: &[i64]) -> Vec<u64> {
        let base: Vec<u64> = y.iter().map(|&v| f.from_i64(v)).collect();
        self.ymons
            .iter()
            .map(|e| e.iter().zip(&base).fold(f.one(), |acc, (&k, &b)| if k == 0 { acc } else { f.mul(acc, f.pow(b, k as u64)) }))
            .collect()
    }
}

fn dot(f: &Field, a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).fold(0, |acc, (&x, &y)| if x == 0 { acc } else { f.add(acc, f.mul(x, y)) })
}

// ---------------------------------------------------------------------------
// the origin relation

struct OriginRel {
    /// (s, orbit representative, power of n, weight)
    cols: Vec<(i64, Vec<i64>, u32, u64)>,
}

struct OriginAnsatz {
    cols: Vec<(i64, Vec<i64>, u32)>,
}

impl OriginAnsatz {
    fn new(m: usize, shape: Shape) -> OriginAnsatz {
        let orbits = canonical_points(m, shape.radius);
        let mut cols = Vec::new();
        for k in 0..=shape.levels as i64 {
            let s = 1 - k;
            for o in &orbits {
                for e in 0..=shape.degree as u32 {
                    cols.push((s, o.clone(), e));
                }
            }
        }
        OriginAnsatz { cols }
    }

    fn is_origin_top(c: &(i64, Vec<i64>, u32)) -> bool {
        c.0 == 1 && c.1.iter().all(|&v| v == 0)
    }
}

impl OriginRel {
    fn solve(&self, f: &Field, data: &Slice, n: i64, next: &[u64]) -> Option<u64> {
        let nm = f.from_i64(n);
        let mut top = 0;
        let mut rest = 0;
        for (s, o, e, w) in &self.cols {
            let c = f.mul(*w, f.pow(nm, *e as u64));
            if *s == 1 && o.iter().all(|&v| v == 0) {
                top = f.add(top, c);
            } else {
                let v = if *s == 1 { next[Slice::index(n as usize + 1, o).unwrap()] } else { data.get(n + s, o) };
                rest = f.add(rest, f.mul(c, v));
            }
        }
        (top != 0).then(|| f.mul(f.neg(rest), f.inv(top)))
    }
}

// ---------------------------------------------------------------------------
// guessing and extending one slice modulo one prime

struct StageGuess {
    recs: Vec<PlainRec>,
    monomap: MonoMap,
    origin: Vec<OriginRel>,
    nullity: usize,
    origin_nullity: usize,
}

enum Attempt {
    Ok(StageGuess),
    /// no usable recurrence in this shape
    Empty,
}

fn guess_euler(f: &Field, data: &Slice, shape: Shape, odd: bool, opts: &MultistepOptions) -> Option<(Vec<PlainRec>, usize)> {
    let a = Ansatz::new(data.m, shape, odd);
    let rows = a.sample_rows(f, data, a.len() + opts.extra_rows, opts.seed)?;
    let held_rows = a.sample_rows(f, data, opts.held_out_rows, opts.seed ^ 0x5eed)?;
    let (basis, _) = nullspace(f, Mat::from_rows(rows, a.len()));
    let nullity = basis.len();
    let mut recs = Vec::new();
    for v in &basis {
        if v[..a.top_count].iter().all(|&x| x == 0) {
            continue;
        }
        if held_rows.iter().any(|r| dot(f, r, v) != 0) {
            return None;
        }
        recs.push(expand(&a, f, v));
    }
    Some((recs, nullity))
}

fn guess_origin(f: &Field, data: &Slice, shape: Shape, margin: usize) -> Option<(Vec<OriginRel>, usize)> {
    let oa = OriginAnsatz::new(data.m, shape);
    let known = data.top() as i64;
    let lo = shape.levels as i64 - 1;
    let rows: Vec<Vec<u64>> = (lo..known)
        .map(|n| {
            let nm = f.from_i64(n);
            oa.cols.iter().map(|(s, o, e)| f.mul(f.pow(nm, *e as u64), data.get(n + s, o))).collect()
        })
        .collect();
    // columns that vanish on every row carry no information
    let live: Vec<usize> = (0..oa.cols.len()).filter(|&c| rows.iter().any(|r| r[c] != 0)).collect();
    if rows.len() < live.len() + margin {
        return None;
    }
    let reduced: Vec<Vec<u64>> = rows.iter().map(|r| live.iter().map(|&c| r[c]).collect()).collect();
    let (basis, _) = nullspace(f, Mat::from_rows(reduced, live.len()));
    let nullity = basis.len();
    let rels: Vec<OriginRel> = basis
        .iter()
        .filter(|v| live.iter().zip(v.iter()).any(|(&c, &x)| x != 0 && OriginAnsatz::is_origin_top(&oa.cols[c])))
        .map(|v| OriginRel {
            cols: live
                .iter()
                .zip(v.iter())
                .filter(|(_, &x)| x != 0)
                .map(|(&c, &x)| (oa.cols[c].0, oa.cols[c].1.clone(), oa.cols[c].2, x))
                .collect(),
        })
        .collect();
    Some((rels, nullity))
}

/// Level n+1 from levels <= n of `data`.
fn next_level(f: &Field, data: &Slice, n: usize, g: &StageGuess) -> Result<Vec<u64>> {
    let m = data.m;
    let ni = n as i64;
    let specs: Vec<Specialized> = g
        .recs
        .iter()
        .map(|r| Specialized {
            top: g.monomap.specialize(f, &r.top, ni),
            lower: r.lower.iter().map(|(s, t, c)| (*s, t.clone(), g.monomap.specialize(f, c, ni))).collect(),
        })
        .collect();
    let mut level = vec![0u64; data.box_len(n + 1)];
    let mut z = vec![0i64; m];
    for y in canonical_points(m, n + 1) {
        if y.iter().all(|&v| v == 0) {
            continue;
        }
        let mut solved = None;
        'search: for img in solving_images(&y) {
            let yv = g.monomap.y_values(f, &img);
            for sp in &specs {
                let top = dot(f, &sp.top, &yv);
                if top == 0 {
                    continue;
                }
                let mut acc = 0u64;
                for (s, t, c) in &sp.lower {
                    for i in 0..m {
                        z[i] = img[i] + t[i];
                    }
                    let v = data.get(ni + s, &z);
                    if v != 0 {
                        acc = f.add(acc, f.mul(dot(f, c, &yv), v));
                    }
                }
                solved = Some(f.mul(f.neg(acc), f.inv(top)));
                break 'search;
            }
        }
        let v = solved.ok_or_else(|| Error::NoApplicableRecurrence { n: n + 1, point: y.clone() })?;
        Slice::set_orbit(&mut level, n + 1, &y, v);
    }
    let origin = g
        .origin
        .iter()
        .find_map(|rel| rel.solve(f, data, ni, &level))
        .ok_or_else(|| Error::NoApplicableRecurrence { n: n + 1, point: vec![0; m] })?;
    level[0] = origin;
    Ok(level)
}

/// Recomputes every known level that the recurrences can reach and compares.
fn validate(f: &Field, data: &Slice, g: &StageGuess, shape: Shape, origin_shape: Shape) -> Result<()> {
    let start = shape.levels.max(origin_shape.levels);
    for n1 in start..=data.top() {
        let got = next_level(f, data, n1 - 1, g)?;
        if let Some(i) = got.iter().zip(&data.levels[n1]).position(|(a, b)| a != b) {
            let mut point = Vec::with_capacity(data.m);
            let mut r = i;
            for _ in 0..data.m {
                point.push((r % (n1 + 1)) as i64);
                r /= n1 + 1;
            }
            return Err(Error::GuessInconsistency { n: n1, point });
        }
    }
    Ok(())
}

fn attempt(f: &Field, data: &Slice, shape: Shape, odd: bool, origin_shape: Shape, opts: &MultistepOptions) -> Result<Attempt> {
    let Some((recs, nullity)) = guess_euler(f, data, shape, odd, opts) else { return Ok(Attempt::Empty) };
    if recs.is_empty() {
        return Ok(Attempt::Empty);
    }
    let Some((origin, origin_nullity)) = guess_origin(f, data, origin_shape, opts.origin_margin) else {
        return Ok(Attempt::Empty);
    };
    if origin.is_empty() {
        return Ok(Attempt::Empty);
    }
    let g = StageGuess { recs, monomap: MonoMap::new(data.m, shape.degree), origin, nullity, origin_nullity };
    validate(f, data, &g, shape, origin_shape)?;
    Ok(Attempt::Ok(g))
}

/// Finds the origin shape and then the smallest recurrence shape that
/// reproduce the known data, modulo the first prime.
fn sweep(f: &Field, data: &Slice, opts: &MultistepOptions) -> Result<(Choice, StageGuess)> {
    let mut origin_shape = None;
    for &os in &opts.origin_shapes {
        let Some((rels, _)) = guess_origin(f, data, os, opts.origin_margin) else { continue };
        if rels.is_empty() {
            continue;
        }
        let start = os.levels;
        let ok = (start..=data.top()).all(|n1| {
            rels.iter().find_map(|r| r.solve(f, data, n1 as i64 - 1, &data.levels[n1])) == Some(data.levels[n1][0])
        });
        if ok {
            origin_shape = Some(os);
            break;
        }
    }
    let origin_shape = origin_shape.ok_or_else(|| {
        Error::InsufficientData(format!("no origin relation fits levels 0..={} of the {}-coordinate slice", data.top(), data.m))
    })?;
    let mut last_err = None;
    for &shape in &opts.shapes {
        for odd in [false, true] {
            match attempt(f, data, shape, odd, origin_shape, opts) {
                Ok(Attempt::Ok(g)) => {
                    let choice = Choice { shape, odd, origin_shape, nullity: g.nullity, origin_nullity: g.origin_nullity };
                    return Ok((choice, g));
                }
                Ok(Attempt::Empty) => {}
                Err(e) => last_err = Some(e),
            }
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::InsufficientData(format!(
            "no recurrence shape fits levels 0..={} of the {}-coordinate slice",
            data.top(),
            data.m
        ))
    }))
}

fn extend(f: &Field, data: &mut Slice, g: &StageGuess, target: usize) -> Result<()> {
    while data.top() < target {
        let n = data.top();
        let lv = next_level(f, data, n, g)?;
        data.levels.push(lv);
    }
    data.levels.truncate(target + 1);
    Ok(())
}

// ---------------------------------------------------------------------------
// driver

/// The ansatz that worked for one stage, and the kernel dimensions seen
/// modulo the first prime.
#[derive(Debug, Clone, Copy)]
struct Choice {
    shape: Shape,
    odd: bool,
    origin_shape: Shape,
    nullity: usize,
    origin_nullity: usize,
}

struct Plan {
    dims: Vec<usize>,
    stages: Vec<Choice>,
}

fn stage_targets(dims: &[usize], n_target: usize, opts: &MultistepOptions) -> Vec<usize> {
    let stages = dims.len() - 1;
    (0..stages).map(|i| if i + 1 == stages { n_target } else { opts.intermediate_depth }).collect()
}

fn seed_slice(f: &Field, exact: &[Vec<BigUint>], m: usize) -> Slice {
    let p = BigUint::from(f.modulus());
    let mut s = Slice::new(m);
    for lv in exact {
        s.levels.push(lv.iter().map(|v| f.to_m((v % &p).to_u64().unwrap())).collect());
    }
    s
}

/// Runs the schedule modulo one prime. With `plan = None` the shapes are
/// searched and recorded.
fn run_prime(
    f: &Field,
    exact: &[Vec<BigUint>],
    dims: &[usize],
    n_target: usize,
    opts: &MultistepOptions,
    plan: Option<&Plan>,
) -> Result<(Vec<u64>, Vec<Choice>, Vec<StageInfo>)> {
    let targets = stage_targets(dims, n_target, opts);
    let mut data = seed_slice(f, exact, dims[0]);
    let mut chosen = Vec::new();
    let mut info = Vec::new();
    for (i, &target) in targets.iter().enumerate() {
        let known = data.top();
        let (c, g) = match plan {
            None => sweep(f, &data, opts)?,
            Some(p) => {
                let c = p.stages[i];
                match attempt(f, &data, c.shape, c.odd, c.origin_shape, opts)? {
                    Attempt::Ok(g) if g.nullity == c.nullity && g.origin_nullity == c.origin_nullity => (c, g),
                    // a rank drop modulo this prime; the caller skips it
                    _ => return Err(Error::Verification("unlucky prime".into())),
                }
            }
        };
        chosen.push(c);
        info.push(StageInfo {
            dim: data.m,
            shape: c.shape,
            odd: c.odd,
            origin_shape: c.origin_shape,
            recurrences: g.recs.len(),
            origin_relations: g.origin.len(),
            known,
            extended_to: target.max(known),
        });
        if target > known {
            extend(f, &mut data, &g, target)?;
        }
        data = data.restrict(dims[i + 1]);
    }
    let values = data.levels.iter().take(n_target + 1).map(|lv| f.from_m(lv[0])).collect();
    Ok((values, chosen, info))
}

/// Number of primes whose product exceeds c^N with room to spare.
fn primes_needed(c: u64, n: usize) -> usize {
    let bits = (n as f64) * (c as f64).log2() + 8.0;
    (bits / 61.0).ceil() as usize + 1
}

/// a_n(0) for n <= N by multi-step guessing. `schedule` lists how many
/// coordinates are set to zero at each step and must add up to d.
pub fn multi_step_pipeline(lattice: &Lattice, schedule: &[usize], n_target: usize, opts: &MultistepOptions) -> Result<MultistepResult> {
    let d = lattice.dim();
    if schedule.len() < 2 || schedule.contains(&0) || schedule.iter().sum::<usize>() != d {
        return Err(Error::Validation(format!(
            "schedule {schedule:?} must have at least two positive drop counts adding up to d={d}"
        )));
    }
    let mut dims = vec![d - schedule[0]];
    for &s in &schedule[1..] {
        dims.push(dims.last().unwrap() - s);
    }
    let n0 = opts.count_depth.unwrap_or(match d {
        2 => 40,
        3 => 30,
        _ => 15,
    });
    let count_opts = CountOptions { radius_cut: Some(n0), mem_budget: opts.mem_budget, threads: opts.threads };
    let table = count_walk_table(lattice, n0, &count_opts)?;
    let exact = exact_slice(&table, dims[0], n0);

    let needed = primes_needed(lattice.coordination(), n_target) + 1;
    let pool = primes(needed + 24);
    let first = Field::new(pool[0]);
    let (v0, chosen, stages) = run_prime(&first, &exact, &dims, n_target, opts, None)?;
    let plan = Plan { dims: dims.clone(), stages: chosen };
    let mut results: Vec<(u64, Vec<u64>)> = vec![(pool[0], v0)];
    let mut next = 1;
    let threads = opts.threads.max(1);
    while results.len() < needed {
        if next >= pool.len() {
            return Err(Error::Verification("too many unlucky primes".into()));
        }
        let batch: Vec<u64> = pool[next..(next + threads).min(pool.len())].to_vec();
        next += batch.len();
        let outs: Vec<Result<Vec<u64>>> = std::thread::scope(|sc| {
            let handles: Vec<_> = batch
                .iter()
                .map(|&p| {
                    let (exact, plan, opts) = (&exact, &plan, opts);
                    sc.spawn(move || run_prime(&Field::new(p), exact, &plan.dims, n_target, opts, Some(plan)).map(|r| r.0))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for (p, o) in batch.into_iter().zip(outs) {
            match o {
                Ok(v) => results.push((p, v)),
                Err(Error::Verification(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    results.truncate(needed);
    let len = n_target + 1;
    let mut crt = Crt::new(len);
    for (p, v) in &results[..needed - 1] {
        crt.add(*p, v);
    }
    let before = crt.values.clone();
    let (p, v) = &results[needed - 1];
    crt.add(*p, v);
    if crt.values != before {
        return Err(Error::Verification("Chinese remaindering did not stabilize".into()));
    }
    let values: Vec<BigUint> = crt.values.iter().map(|v| v.to_biguint().expect("counts are nonnegative")).collect();
    let mut cross_checked = 0;
    for n in 0..=n0.min(n_target) {
        let direct = table.get(n, &vec![0; d]).expect("origin is exact");
        if direct != values[n] {
            return Err(Error::GuessInconsistency { n, point: vec![0; d] });
        }
        cross_checked += 1;
    }
    Ok(MultistepResult { values, stages, primes_used: needed, cross_checked })
}

/// b_n(y) on the absolute box for n <= n0, read from an exact table.
fn exact_slice(table: &WalkTable, m: usize, n0: usize) -> Vec<Vec<BigUint>> {
    let d = table.lattice().dim();
    let mut out = Vec::with_capacity(n0 + 1);
    for n in 0..=n0 {
        let w = n + 1;
        let len = w.pow(m as u32);
        let mut lv = Vec::with_capacity(len);
        let mut x = vec![0i64; d];
        for idx in 0..len {
            let mut r = idx;
            for xi in x.iter_mut().take(m) {
                *xi = (r % w) as i64;
                r /= w;
            }
            lv.push(table.get(n, &x).expect("slice lies inside the exact region"));
        }
        out.push(lv);
    }
    out
}

/// Integer conversion used by callers that want the values as a series.
pub fn as_integers(values: &[BigUint]) -> Vec<BigInt> {
    values.iter().map(|v| BigInt::from(v.clone())).collect()
}
