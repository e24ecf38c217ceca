//! Rational functions with a factored denominator.
//!
//! Denominators are kept as a product of normalized polynomial factors with
//! multiplicities. Sums use the factor-wise least common multiple, so no
//! polynomial gcd is ever needed, and a rational function is zero exactly
//! when its numerator is.

use num_rational::BigRational;
use num_traits::Zero;

use super::mpoly::MPoly;

#[derive(Debug, Clone)]
pub struct RatFun {
    num: MPoly,
    den: Vec<(MPoly, u32)>,
}

impl RatFun {
    pub fn from_poly(p: MPoly) -> RatFun {
        RatFun { num: p, den: Vec::new() }
    }

    pub fn zero(nvars: usize) -> RatFun {
        RatFun::from_poly(MPoly::zero(nvars))
    }

    pub fn one(nvars: usize) -> RatFun {
        RatFun::from_poly(MPoly::one(nvars))
    }

    pub fn constant(nvars: usize, c: BigRational) -> RatFun {
        RatFun::from_poly(MPoly::constant(nvars, c))
    }

    /// 1 / p, with p split into its scalar and primitive part.
    pub fn inverse_of_poly(p: &MPoly) -> RatFun {
        assert!(!p.is_zero(), "division by the zero polynomial");
        let (lambda, q) = p.primitive();
        let n = p.nvars();
        if q.as_constant().is_some() {
            return RatFun::constant(n, lambda.recip());
        }
        RatFun { num: MPoly::constant(n, lambda.recip()), den: vec![(q, 1)] }
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn numerator(&self) -> &MPoly {
        &self.num
    }

    pub fn denominator_factors(&self) -> &[(MPoly, u32)] {
        &self.den
    }

    pub fn denominator(&self) -> MPoly {
        let mut d = MPoly::one(self.nvars());
        for (f, e) in &self.den {
            d = d.mul(&f.pow(*e));
        }
        d
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_poly(&self) -> Option<&MPoly> {
        if self.den.is_empty() {
            Some(&self.num)
        } else {
            None
        }
    }

    fn exponent_of(&self, f: &MPoly) -> u32 {
        self.den.iter().find(|(g, _)| g == f).map(|(_, e)| *e).unwrap_or(0)
    }

    /// Numerators of both operands over their common (lcm) denominator.
    fn common(&self, o: &RatFun) -> (MPoly, MPoly, Vec<(MPoly, u32)>) {
        let mut den = self.den.clone();
        for (f, e) in &o.den {
            match den.iter_mut().find(|(g, _)| g == f) {
                Some(slot) => slot.1 = slot.1.max(*e),
                None => den.push((f.clone(), *e)),
            }
        }
        let lift = |r: &RatFun| {
            let mut n = r.num.clone();
            for (f, e) in &den {
                let missing = e - r.exponent_of(f);
                if missing > 0 {
                    n = n.mul(&f.pow(missing));
                }
            }
            n
        };
        (lift(self), lift(o), den)
    }

    pub fn add(&self, o: &RatFun) -> RatFun {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        let (a, b, den) = self.common(o);
        RatFun { num: a.add(&b), den }.tidy()
    }

    pub fn sub(&self, o: &RatFun) -> RatFun {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFun {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, o: &RatFun) -> RatFun {
        if self.is_zero() || o.is_zero() {
            return RatFun::zero(self.nvars());
        }
        let mut den = self.den.clone();
        for (f, e) in &o.den {
            match den.iter_mut().find(|(g, _)| g == f) {
                Some(slot) => slot.1 += e,
                None => den.push((f.clone(), *e)),
            }
        }
        RatFun { num: self.num.mul(&o.num), den }.tidy()
    }

    pub fn mul_poly(&self, p: &MPoly) -> RatFun {
        RatFun { num: self.num.mul(p), den: self.den.clone() }.tidy()
    }

    pub fn scale(&self, k: &BigRational) -> RatFun {
        RatFun { num: self.num.scale(k), den: self.den.clone() }.tidy()
    }

    pub fn pow(&self, k: u32) -> RatFun {
        let mut r = RatFun::one(self.nvars());
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    pub fn recip(&self) -> RatFun {
        let mut r = RatFun::inverse_of_poly(&self.num);
        for (f, e) in &self.den {
            r = r.mul_poly(&f.pow(*e));
        }
        r
    }

    pub fn div(&self, o: &RatFun) -> RatFun {
        self.mul(&o.recip())
    }

    /// Partial derivative: with D = prod f_i^{e_i} and F = prod f_i,
    /// (N/D)' = (N' F - N sum_i e_i f_i' F/f_i) / (D F).
    pub fn derivative(&self, v: usize) -> RatFun {
        let n = self.nvars();
        let active: Vec<usize> = (0..self.den.len()).filter(|&i| !self.den[i].0.derivative(v).is_zero()).collect();
        if active.is_empty() {
            return RatFun { num: self.num.derivative(v), den: self.den.clone() }.tidy();
        }
        let prod_except = |skip: Option<usize>| {
            active.iter().filter(|&&i| Some(i) != skip).fold(MPoly::one(n), |acc, &i| acc.mul(&self.den[i].0))
        };
        let mut num = self.num.derivative(v).mul(&prod_except(None));
        for &i in &active {
            let (f, e) = &self.den[i];
            let t = self.num.mul(&f.derivative(v)).mul(&prod_except(Some(i))).scale(&BigRational::from_integer((*e).into()));
            num = num.sub(&t);
        }
        let mut den = self.den.clone();
        for &i in &active {
            den[i].1 += 1;
        }
        RatFun { num, den }.tidy()
    }

    pub fn eval(&self, x: &[BigRational]) -> Option<BigRational> {
        let d = self.denominator().eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(x) / d)
    }

    /// Drops the denominator when the numerator is zero.
    fn tidy(mut self) -> RatFun {
        if self.num.is_zero() {
            self.den.clear();
        }
        self.den.retain(|(_, e)| *e > 0);
        self
    }

    pub fn equals(&self, o: &RatFun) -> bool {
        self.sub(o).is_zero()
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        if self.den.is_empty() {
            return self.num.to_string_with(names);
        }
        let den: Vec<String> = self
            .den
            .iter()
            .map(|(f, e)| if *e == 1 { format!("({})", f.to_string_with(names)) } else { format!("({})^{e}", f.to_string_with(names)) })
            .collect();
        format!("({}) / {}", self.num.to_string_with(names), den.join("*"))
    }
}

impl PartialEq for RatFun {
    fn eq(&self, o: &RatFun) -> bool {
        self.equals(o)
    }
}

impl From<MPoly> for RatFun {
    fn from(p: MPoly) -> RatFun {
        RatFun::from_poly(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn sum_and_derivative() {
        let x = MPoly::var(1, 0);
        let one = MPoly::one(1);
        // 1/(x-1) - 1/(1-x) = 2/(x-1)
        let a = RatFun::inverse_of_poly(&x.sub(&one));
        let b = RatFun::inverse_of_poly(&one.sub(&x));
        let s = a.sub(&b);
        assert_eq!(s.denominator_factors().len(), 1);
        assert!(s.equals(&a.scale(&q(2))));
        // d/dx 1/(x-1) = -1/(x-1)^2
        let d = a.derivative(0);
        assert!(d.equals(&a.mul(&a).neg()));
        assert_eq!(d.eval(&[q(3)]), Some(BigRational::new((-1).into(), 4.into())));
    }

    #[test]
    fn recip_round_trip() {
        let x = MPoly::var(2, 0);
        let y = MPoly::var(2, 1);
        let r = RatFun::from_poly(x.add(&y)).div(&RatFun::from_poly(x.mul(&y).sub(&MPoly::one(2))));
        assert!(r.mul(&r.recip()).equals(&RatFun::one(2)));
    }
}
