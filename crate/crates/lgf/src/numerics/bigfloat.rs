//! Binary floating point on top of `num-bigint`: value = mant * 2^exp with
//! |mant| below 2^prec, round to nearest after every operation.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
    prec: u32,
}

fn bits(x: &BigInt) -> i64 {
    x.bits() as i64
}

/// x / 2^k rounded to nearest, ties away from zero.
fn shr_round(x: &BigInt, k: u64) -> BigInt {
    if k == 0 {
        return x.clone();
    }
    let half = BigInt::one() << (k - 1);
    match x.sign() {
        Sign::Minus => -((-x + half) >> k),
        _ => (x + half) >> k,
    }
}

impl BigFloat {
    fn normalized(mant: BigInt, exp: i64, prec: u32) -> BigFloat {
        if mant.is_zero() {
            return BigFloat { mant, exp: 0, prec };
        }
        let extra = bits(&mant) - prec as i64;
        if extra > 0 {
            let m = shr_round(&mant, extra as u64);
            // rounding can carry into one more bit
            if bits(&m) > prec as i64 {
                return BigFloat { mant: shr_round(&m, 1), exp: exp + extra + 1, prec };
            }
            BigFloat { mant: m, exp: exp + extra, prec }
        } else {
            BigFloat { mant, exp, prec }
        }
    }

    pub fn zero(prec: u32) -> BigFloat {
        BigFloat { mant: BigInt::zero(), exp: 0, prec }
    }

    pub fn from_bigint(x: &BigInt, prec: u32) -> BigFloat {
        BigFloat::normalized(x.clone(), 0, prec)
    }

    pub fn from_i64(x: i64, prec: u32) -> BigFloat {
        BigFloat::normalized(BigInt::from(x), 0, prec)
    }

    pub fn from_rational(x: &BigRational, prec: u32) -> BigFloat {
        if x.is_zero() {
            return BigFloat::zero(prec);
        }
        let (num, den) = (x.numer(), x.denom());
        let s = prec as i64 + bits(den) - bits(num) + 2;
        let q = if s >= 0 { (num << s as u64) / den } else { num / (den << (-s) as u64) };
        BigFloat::normalized(q, -s, prec)
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn with_precision(&self, prec: u32) -> BigFloat {
        BigFloat::normalized(self.mant.clone(), self.exp, prec)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// floor(log2 |x|) + 1, or None for zero.
    pub fn magnitude(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.exp + bits(&self.mant))
    }

    pub fn neg(&self) -> BigFloat {
        BigFloat { mant: -&self.mant, exp: self.exp, prec: self.prec }
    }

    pub fn abs(&self) -> BigFloat {
        BigFloat { mant: self.mant.abs(), exp: self.exp, prec: self.prec }
    }

    pub fn add(&self, o: &BigFloat) -> BigFloat {
        let prec = self.prec.max(o.prec);
        if o.is_zero() {
            return self.with_precision(prec);
        }
        if self.is_zero() {
            return o.with_precision(prec);
        }
        let (hi, lo) = if self.magnitude() >= o.magnitude() { (self, o) } else { (o, self) };
        // lo is entirely below the rounding position of hi
        if hi.magnitude().unwrap() - lo.magnitude().unwrap() > prec as i64 + 2 {
            return hi.with_precision(prec);
        }
        let e = hi.exp.min(lo.exp);
        let a = &hi.mant << (hi.exp - e) as u64;
        let b = &lo.mant << (lo.exp - e) as u64;
        BigFloat::normalized(a + b, e, prec)
    }

    pub fn sub(&self, o: &BigFloat) -> BigFloat {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &BigFloat) -> BigFloat {
        BigFloat::normalized(&self.mant * &o.mant, self.exp + o.exp, self.prec.max(o.prec))
    }

    pub fn mul_i64(&self, k: i64) -> BigFloat {
        BigFloat::normalized(&self.mant * k, self.exp, self.prec)
    }

    pub fn div(&self, o: &BigFloat) -> BigFloat {
        assert!(!o.is_zero(), "division by zero");
        let prec = self.prec.max(o.prec);
        let s = prec as i64 + bits(&o.mant) - bits(&self.mant) + 2;
        let s = s.max(0);
        let q = (&self.mant << s as u64) / &o.mant;
        BigFloat::normalized(q, self.exp - s - o.exp, prec)
    }

    pub fn recip(&self) -> BigFloat {
        BigFloat::from_i64(1, self.prec).div(self)
    }

    pub fn sqrt(&self) -> BigFloat {
        assert!(!self.is_negative(), "square root of a negative number");
        if self.is_zero() {
            return self.clone();
        }
        let mut s = 2 * self.prec as i64 + 4 - bits(&self.mant);
        s = s.max(0);
        if (self.exp - s) % 2 != 0 {
            s += 1;
        }
        let m = (&self.mant << s as u64).sqrt();
        BigFloat::normalized(m, (self.exp - s) / 2, self.prec)
    }

    pub fn powi(&self, mut k: u32) -> BigFloat {
        let mut base = self.clone();
        let mut acc = BigFloat::from_i64(1, self.prec);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let b = bits(&self.mant);
        let keep = b.min(60);
        let top = shr_round(&self.mant, (b - keep) as u64).to_f64().unwrap();
        top * 2f64.powi((self.exp + b - keep) as i32)
    }

    /// Decimal exponent of |x|, i.e. roughly log10 |x|.
    pub fn log10_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let b = bits(&self.mant);
        let keep = b.min(60);
        let top = shr_round(&self.mant.abs(), (b - keep) as u64).to_f64().unwrap();
        top.log10() + (self.exp + b - keep) as f64 * std::f64::consts::LOG10_2
    }

    /// Fixed-point decimal with `places` digits after the point, rounded.
    pub fn to_decimal(&self, places: usize) -> String {
        let scaled = &self.mant * num_traits::pow(BigInt::from(10), places);
        let v = if self.exp >= 0 { scaled << self.exp as u64 } else { shr_round(&scaled, (-self.exp) as u64) };
        let neg = v.is_negative();
        let mut s = v.abs().to_string();
        if s.len() <= places {
            s = "0".repeat(places + 1 - s.len()) + &s;
        }
        let (int, frac) = s.split_at(s.len() - places);
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(int);
        if places > 0 {
            out.push('.');
            out.push_str(frac);
        }
        out
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, o: &BigFloat) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for BigFloat {}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, o: &BigFloat) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for BigFloat {
    fn cmp(&self, o: &BigFloat) -> Ordering {
        let e = self.exp.min(o.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &o.mant << (o.exp - e) as u64;
        a.cmp(&b)
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let places = (self.prec as f64 * std::f64::consts::LOG10_2) as usize;
        let places = (places as i64 - self.log10_abs().max(0.0) as i64).max(1) as usize;
        f.write_str(&self.to_decimal(places))
    }
}
