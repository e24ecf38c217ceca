use num_bigint::{BigInt, BigUint};
use num_traits::One;

pub fn binomial_u64(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    let mut r = BigUint::one();
    for i in 0..k {
        r *= n - i;
        r /= i + 1;
    }
    r
}

/// Falling factorial x(x-1)...(x-j+1) for an integer x.
pub fn falling(x: i64, j: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..j as i64 {
        r *= x - i;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials() {
        assert_eq!(binomial_u64(6, 2), 15);
        assert_eq!(binomial(40, 20), BigUint::from(137846528820u64));
        assert_eq!(falling(5, 3), BigInt::from(60));
        assert_eq!(falling(2, 3), BigInt::from(0));
    }
}
