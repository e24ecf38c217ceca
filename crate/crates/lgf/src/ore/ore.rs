//! Polynomials in partial derivatives with rational-function coefficients,
//! kept in the normal form where every coefficient stands left of the partials.

use std::collections::BTreeMap;

use num_rational::BigRational;

use super::mpoly::{Exps, MPoly};
use super::ratfun::RatFun;
use crate::util::binomial_u64;

#[derive(Debug, Clone)]
pub struct OrePoly {
    nvars: usize,
    terms: BTreeMap<Exps, RatFun>,
}

impl OrePoly {
    pub fn zero(nvars: usize) -> OrePoly {
        OrePoly { nvars, terms: BTreeMap::new() }
    }

    /// Multiplication by a rational function.
    pub fn scalar(r: RatFun) -> OrePoly {
        let mut o = OrePoly::zero(r.nvars());
        o.add_term(vec![0; r.nvars()], r);
        o
    }

    pub fn from_poly(p: MPoly) -> OrePoly {
        OrePoly::scalar(RatFun::from_poly(p))
    }

    /// The partial derivative with respect to variable v.
    pub fn partial(nvars: usize, v: usize) -> OrePoly {
        let mut e = vec![0; nvars];
        e[v] = 1;
        OrePoly::term(e, RatFun::one(nvars))
    }

    pub fn term(e: Exps, c: RatFun) -> OrePoly {
        let mut o = OrePoly::zero(e.len());
        o.add_term(e, c);
        o
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &RatFun)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: Exps, c: RatFun) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&e) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(e, sum);
        }
    }

    pub fn add(&self, o: &OrePoly) -> OrePoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &OrePoly) -> OrePoly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> OrePoly {
        OrePoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect() }
    }

    pub fn scale(&self, k: &BigRational) -> OrePoly {
        let mut r = OrePoly::zero(self.nvars);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), c.scale(k));
        }
        r
    }

    /// Left multiplication by a rational function.
    pub fn left_mul(&self, r: &RatFun) -> OrePoly {
        let mut out = OrePoly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), r.mul(c));
        }
        out
    }

    /// Product in normal form, via d^a s = sum_{g <= a} C(a,g) (d^g s) d^{a-g}.
    pub fn mul(&self, o: &OrePoly) -> OrePoly {
        let mut out = OrePoly::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                for g in sub_multi_indices(a) {
                    let mut coeff = cb.clone();
                    let mut k: u64 = 1;
                    for (v, &gv) in g.iter().enumerate() {
                        for _ in 0..gv {
                            coeff = coeff.derivative(v);
                        }
                        k *= binomial_u64(a[v] as u64, gv as u64);
                    }
                    if coeff.is_zero() {
                        continue;
                    }
                    let e: Exps = (0..self.nvars).map(|v| a[v] - g[v] + b[v]).collect();
                    let c = ca.mul(&coeff).scale(&BigRational::from_integer(k.into()));
                    out.add_term(e, c);
                }
            }
        }
        out
    }

    pub fn equals(&self, o: &OrePoly) -> bool {
        self.sub(o).is_zero()
    }

    /// Highest total order in the partials.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// True if neither the coefficients nor the partials involve variable v.
    pub fn is_free_of(&self, v: usize) -> bool {
        self.terms.iter().all(|(e, c)| {
            e[v] == 0
                && c.numerator().degree_in(v) == 0
                && c.denominator_factors().iter().all(|(f, _)| f.degree_in(v) == 0)
        })
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        for (e, c) in self.terms.iter().rev() {
            let d: Vec<String> = e
                .iter()
                .zip(names)
                .filter(|(k, _)| **k > 0)
                .map(|(k, n)| if *k == 1 { format!("D{n}") } else { format!("D{n}^{k}") })
                .collect();
            let d = if d.is_empty() { "1".to_string() } else { d.join("*") };
            parts.push(format!("{d} : {}", c.to_string_with(names)));
        }
        parts.join("\n")
    }
}

impl PartialEq for OrePoly {
    fn eq(&self, o: &OrePoly) -> bool {
        self.equals(o)
    }
}

fn sub_multi_indices(a: &[u32]) -> Vec<Exps> {
    let mut out = vec![Vec::new()];
    for &k in a {
        let mut next = Vec::new();
        for prefix in &out {
            for g in 0..=k {
                let mut p = prefix.clone();
                p.push(g);
                next.push(p);
            }
        }
        out = next;
    }
    out
}
