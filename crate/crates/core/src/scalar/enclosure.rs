//! Rational enclosures of π and exact sign determination of Laurent polynomials.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Result, UvalError};

/// Refinement levels tried by [`sign_by_enclosure`]: level 0 is the classical
/// `333/106 < π < 355/113`; level `i > 0` has half-width `2^-bits`. The last
/// level has total width below `1e-30`.
pub const ENCLOSURE_LEVELS: [u32; 4] = [0, 40, 70, 101];

fn arctan_inverse(x: u64, scale: &BigInt) -> BigInt {
    // Σ (-1)^j scale / ((2j+1) x^{2j+1}), truncated termwise.
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = scale / &x;
    let mut sum = BigInt::zero();
    let mut j = 0u64;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * j + 1);
        if j.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        j += 1;
    }
    sum
}

/// `(lo, hi)` with `lo < π < hi`.
pub fn pi_enclosure(bits: u32) -> (BigRational, BigRational) {
    if bits == 0 {
        return (
            BigRational::new(333.into(), 106.into()),
            BigRational::new(355.into(), 113.into()),
        );
    }
    let guard = 32;
    let scale = BigInt::one() << (bits + guard) as usize;
    // Machin: π = 16 atan(1/5) - 4 atan(1/239)
    let approx = arctan_inverse(5, &scale) * 16 - arctan_inverse(239, &scale) * 4;
    let centre = BigRational::new(approx, scale);
    let radius = BigRational::new(BigInt::one(), BigInt::one() << bits as usize);
    (&centre - &radius, &centre + &radius)
}

fn interval_sum(
    terms: &BTreeMap<i32, BigRational>,
    lo: &BigRational,
    hi: &BigRational,
) -> (BigRational, BigRational) {
    let mut sum_lo = BigRational::zero();
    let mut sum_hi = BigRational::zero();
    for (e, c) in terms {
        let a = c * pow(lo, *e);
        let b = c * pow(hi, *e);
        if a <= b {
            sum_lo += a;
            sum_hi += b;
        } else {
            sum_lo += b;
            sum_hi += a;
        }
    }
    (sum_lo, sum_hi)
}

fn pow(x: &BigRational, e: i32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        acc *= x;
    }
    if e < 0 {
        acc.recip()
    } else {
        acc
    }
}

pub(super) fn sign_by_enclosure(terms: &BTreeMap<i32, BigRational>) -> Result<Ordering> {
    if terms.is_empty() {
        return Ok(Ordering::Equal);
    }
    if terms.len() == 1 {
        let c = terms.values().next().expect("one term");
        return Ok(if c.is_positive() { Ordering::Greater } else { Ordering::Less });
    }
    for bits in ENCLOSURE_LEVELS {
        let (lo, hi) = pi_enclosure(bits);
        let (vlo, vhi) = interval_sum(terms, &lo, &hi);
        if vlo.is_positive() {
            return Ok(Ordering::Greater);
        }
        if vhi.is_negative() {
            return Ok(Ordering::Less);
        }
    }
    let rendered = terms
        .iter()
        .map(|(e, c)| format!("({c})π^{e}"))
        .collect::<Vec<_>>()
        .join(" + ");
    Err(UvalError::UndecidableSign(rendered))
}
