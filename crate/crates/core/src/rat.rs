//! Small helpers on exact rationals: constructors, certified square-root
//! bounds and a canonical `p/q` string form used by every serializer.

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::{One, Signed, Zero};

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_integer(x: &BigRational) -> bool {
    x.denom().is_one()
}

/// Floor of a rational as a BigInt.
pub fn floor_int(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil_int(x: &BigRational) -> BigInt {
    x.ceil().to_integer()
}

/// Integer square root of a non-negative BigInt (largest r with r^2 <= n).
pub fn isqrt(n: &BigInt) -> BigInt {
    assert!(n.sign() != Sign::Minus, "isqrt of negative");
    n.sqrt()
}

/// Certified rational bounds lo <= sqrt(x) <= hi for x >= 0, with
/// hi - lo <= 2^-bits * max(1, sqrt(x)).
pub fn sqrt_bounds(x: &BigRational, bits: u32) -> (BigRational, BigRational) {
    assert!(!x.is_negative(), "sqrt of negative rational");
    if x.is_zero() {
        return (BigRational::zero(), BigRational::zero());
    }
    // sqrt(n/d) = sqrt(n*d)/d; scale by 4^bits so the integer sqrt carries
    // the requested precision.
    let scale = BigInt::one() << (2 * bits);
    let nd = x.numer() * x.denom() * &scale;
    let r = isqrt(&nd);
    let denom = x.denom() * (BigInt::one() << bits);
    let lo = BigRational::new(r.clone(), denom.clone());
    let hi = BigRational::new(r + 1, denom);
    (lo, hi)
}

/// p-adic valuation of a non-zero rational; None is reserved for 0 by callers.
pub fn valuation(x: &BigRational, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut n = x.numer().abs();
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    let mut d = x.denom().clone();
    while (&d % &p).is_zero() {
        d /= &p;
        v -= 1;
    }
    Some(v)
}

/// Canonical string form: "p" when integral, "p/q" otherwise, reduced.
pub fn to_string(x: &BigRational) -> String {
    if is_integer(x) {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
        Some((n, d)) => {
            let n = n.trim().parse::<BigInt>().ok()?;
            let d = d.trim().parse::<BigInt>().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
    }
}
