//! Exact big-integer combinatorics and their log-space counterparts.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use statrs::function::factorial::ln_factorial;

pub fn factorial(k: u64) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * i)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(a, k)` for a big `a`.
pub fn binomial_big(a: &BigUint, k: u64) -> BigUint {
    if BigUint::from(k) > *a {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= a - BigUint::from(i);
        acc /= i + 1;
    }
    acc
}

/// Natural log of `k!`.
pub fn ln_fact(k: u64) -> f64 {
    ln_factorial(k)
}

/// Natural log of `C(n, k)`. Short products are summed term by term; longer
/// ones go through log-gamma, where the cancellation error stays near
/// `1e-16 * ln(n!)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if k <= 64 {
        return (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum();
    }
    ln_fact(n) - ln_fact(k) - ln_fact(n - k)
}

pub fn log10_biguint(value: &BigUint) -> f64 {
    if value.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = value.bits();
    if bits <= 960 {
        return value.to_f64().unwrap().log10();
    }
    let shift = bits - 64;
    let top = (value >> shift).to_f64().unwrap();
    top.log10() + shift as f64 * std::f64::consts::LOG10_2
}

pub fn log10_rational(value: &BigRational) -> f64 {
    let (num, den) = (value.numer(), value.denom());
    match (num.to_biguint(), den.to_biguint()) {
        (Some(n), Some(d)) => log10_biguint(&n) - log10_biguint(&d),
        _ => f64::NAN,
    }
}
