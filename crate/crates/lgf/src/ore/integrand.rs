//! Integrands whose logarithmic derivatives are rational, and the action of
//! operators on them: op(f) = R f with R rational.

use std::collections::HashMap;

use num_rational::BigRational;

use super::mpoly::{Exps, MPoly};
use super::ore::OrePoly;
use super::ratfun::RatFun;
use crate::error::{Error, Result};

/// A function f given by its variable names and the rational functions
/// (d/dv f) / f, one per variable.
#[derive(Debug, Clone)]
pub struct IntegrandSpec {
    pub names: Vec<String>,
    pub logderivs: Vec<RatFun>,
    /// For the lattice integrand: its dimension and the polynomial
    /// 1 - z lambda(x) sitting in the denominator.
    pub dimension: Option<usize>,
    pub linear_form: Option<MPoly>,
}

impl IntegrandSpec {
    /// 1 / (prod_j sqrt(1 - x_j^2) * (1 - z/C(d,2) sum_{m<n} x_m x_n)) in the
    /// variables x1..xd, z.
    pub fn fcc(d: usize) -> Result<IntegrandSpec> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let nv = d + 1;
        let z = d;
        let mut names: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        names.push("z".into());
        let mut pairs = MPoly::zero(nv);
        for m in 0..d {
            for n in m + 1..d {
                pairs = pairs.add(&MPoly::var(nv, m).mul(&MPoly::var(nv, n)));
            }
        }
        let c = BigRational::new(1.into(), ((d * (d - 1) / 2) as i64).into());
        let l = MPoly::one(nv).sub(&MPoly::var(nv, z).mul(&pairs).scale(&c));
        let inv_l = RatFun::inverse_of_poly(&l);
        let mut logderivs = Vec::with_capacity(nv);
        for v in 0..nv {
            let mut r = inv_l.mul_poly(&l.derivative(v)).neg();
            if v < d {
                let x = MPoly::var(nv, v);
                let one_minus_x2 = MPoly::one(nv).sub(&x.mul(&x));
                r = r.add(&RatFun::inverse_of_poly(&one_minus_x2).mul_poly(&x));
            }
            logderivs.push(r);
        }
        Ok(IntegrandSpec { names, logderivs, dimension: Some(d), linear_form: Some(l) })
    }

    pub fn hyperexponential(names: Vec<String>, logderivs: Vec<RatFun>) -> Result<IntegrandSpec> {
        if names.len() != logderivs.len() {
            return Err(Error::Validation("one logarithmic derivative per variable is required".into()));
        }
        if logderivs.iter().any(|r| r.nvars() != names.len()) {
            return Err(Error::Validation("logarithmic derivative over the wrong variable set".into()));
        }
        Ok(IntegrandSpec { names, logderivs, dimension: None, linear_form: None })
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Memoized multipliers R_a with d^a f = R_a f.
pub struct Multipliers<'a> {
    f: &'a IntegrandSpec,
    cache: HashMap<Exps, RatFun>,
}

impl<'a> Multipliers<'a> {
    pub fn new(f: &'a IntegrandSpec) -> Self {
        let mut cache = HashMap::new();
        cache.insert(vec![0; f.nvars()], RatFun::one(f.nvars()));
        Multipliers { f, cache }
    }

    pub fn get(&mut self, a: &[u32]) -> RatFun {
        if let Some(r) = self.cache.get(a) {
            return r.clone();
        }
        // peel one partial off the first nonzero slot
        let v = a.iter().position(|&k| k > 0).unwrap();
        let mut b = a.to_vec();
        b[v] -= 1;
        let rb = self.get(&b);
        let r = rb.derivative(v).add(&rb.mul(&self.f.logderivs[v]));
        self.cache.insert(a.to_vec(), r.clone());
        r
    }

    /// Multiplier of c d^e applied to f.
    pub fn term(&mut self, e: &[u32], c: &RatFun) -> RatFun {
        c.mul(&self.get(e))
    }

    /// Multiplier of d_v (c d^e) applied to f.
    pub fn delta_term(&mut self, v: usize, e: &[u32], c: &RatFun) -> RatFun {
        let mut ev = e.to_vec();
        ev[v] += 1;
        c.mul(&self.get(&ev)).add(&c.derivative(v).mul(&self.get(e)))
    }
}

/// R with op(f) = R f.
pub fn apply_operator_to_integrand(op: &OrePoly, f: &IntegrandSpec) -> Result<RatFun> {
    if op.nvars() != f.nvars() {
        return Err(Error::Validation(format!(
            "operator has {} variables, integrand has {}",
            op.nvars(),
            f.nvars()
        )));
    }
    let mut m = Multipliers::new(f);
    let mut acc = RatFun::zero(f.nvars());
    for (e, c) in op.terms() {
        acc = acc.add(&m.term(e, c));
    }
    Ok(acc)
}
