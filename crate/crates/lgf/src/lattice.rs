//! Step sets, coordination numbers and structure functions of the fcc lattices.
//!
//! Coordinates are the integer ("stretched by two") ones, so a step is any
//! vector in {-1,0,1}^d with exactly two nonzero entries.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::util::binomial_u64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepSet {
    dim: usize,
    steps: Vec<Vec<i32>>,
}

impl StepSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> &[Vec<i32>] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// All fcc steps in dimension `d`, in lexicographic order.
pub fn fcc_step_set(d: usize) -> Result<StepSet> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let mut steps = Vec::new();
    let mut v = vec![-1i32; d];
    loop {
        if v.iter().filter(|&&e| e != 0).count() == 2 {
            steps.push(v.clone());
        }
        // odometer over {-1,0,1}^d, last coordinate fastest
        let mut i = d;
        loop {
            if i == 0 {
                return Ok(StepSet { dim: d, steps });
            }
            i -= 1;
            if v[i] < 1 {
                v[i] += 1;
                break;
            }
            v[i] = -1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    step_set: StepSet,
    coordination: u64,
}

impl Lattice {
    pub fn fcc(d: usize) -> Result<Lattice> {
        let step_set = fcc_step_set(d)?;
        let coordination = step_set.len() as u64;
        debug_assert_eq!(coordination, 4 * binomial_u64(d as u64, 2));
        Ok(Lattice { step_set, coordination })
    }

    pub fn dim(&self) -> usize {
        self.step_set.dim
    }

    pub fn steps(&self) -> &[Vec<i32>] {
        &self.step_set.steps
    }

    pub fn step_set(&self) -> &StepSet {
        &self.step_set
    }

    /// Number of nearest neighbours c.
    pub fn coordination(&self) -> u64 {
        self.coordination
    }

    pub fn structure_function(&self) -> StructureFunction {
        StructureFunction::fcc(self.dim())
    }
}

/// lambda(k) = C(d,2)^{-1} * sum over pairs m<n of cos k_m cos k_n, kept as pair data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureFunction {
    dim: usize,
    pairs: Vec<(usize, usize)>,
    normalization: BigRational,
}

impl StructureFunction {
    pub fn fcc(d: usize) -> StructureFunction {
        let mut pairs = Vec::new();
        for m in 0..d {
            for n in m + 1..d {
                pairs.push((m, n));
            }
        }
        let normalization = BigRational::new(BigInt::from(1), BigInt::from(pairs.len()));
        StructureFunction { dim: d, pairs, normalization }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Zero-based index pairs (m, n) with m < n.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn normalization(&self) -> &BigRational {
        &self.normalization
    }

    pub fn eval(&self, k: &[f64]) -> Result<f64> {
        if k.len() != self.dim {
            return Err(Error::Validation(format!(
                "structure function of dimension {} evaluated at a point of length {}",
                self.dim,
                k.len()
            )));
        }
        let c: Vec<f64> = k.iter().map(|x| x.cos()).collect();
        let s: f64 = self.pairs.iter().map(|&(m, n)| c[m] * c[n]).sum();
        Ok(s / self.pairs.len() as f64)
    }
}
