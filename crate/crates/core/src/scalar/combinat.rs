use num_bigint::BigInt;
use num_traits::One;

use super::{Coefficient, PiLaurent};
use crate::error::{Result, UvalError};

pub fn factorial(m: usize) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Odd double factorial `m·(m-2)···1` with `(-1)!! = 1`.
pub fn double_factorial(m: i64) -> Result<BigInt> {
    if m < -1 {
        return Err(UvalError::DoubleFactorialDomain(m));
    }
    let mut acc = BigInt::one();
    let mut i = m;
    while i > 1 {
        acc *= BigInt::from(i);
        i -= 2;
    }
    Ok(acc)
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Volume of the unit ball in `R^k`, always a rational multiple of `π^{⌊k/2⌋}`:
/// `π^l / l!` for `k = 2l`, and `2^{l+1} π^l / k!!` for `k = 2l + 1`.
pub fn omega<C: Coefficient>(k: usize) -> PiLaurent<C> {
    let l = k / 2;
    if k.is_multiple_of(2) {
        PiLaurent::monomial(C::from_big_ratio(&BigInt::one(), &factorial(l)), l as i32)
    } else {
        let num = BigInt::one() << (l + 1);
        let den = double_factorial(k as i64).expect("k >= 0");
        PiLaurent::monomial(C::from_big_ratio(&num, &den), l as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Scalar;

    #[test]
    fn omega_small_values() {
        assert_eq!(omega(0), Scalar::one());
        assert_eq!(omega(1), Scalar::from_int(2));
        assert_eq!(omega(2), Scalar::pi_pow(1));
        assert_eq!(omega(3), Scalar::monomial(crate::Rational::new(4.into(), 3.into()), 1));
    }

    #[test]
    fn omega_recursion() {
        // ω_k = (2π/k) ω_{k-2}, from Γ(x+1) = xΓ(x)
        for k in 2..=30 {
            let step = Scalar::monomial(crate::Rational::new(2.into(), (k as i64).into()), 1);
            assert_eq!(omega::<crate::Rational>(k), &step * &omega(k - 2), "k = {k}");
        }
    }

    #[test]
    fn omega_matches_gamma_numerically() {
        // ω_k = π^{k/2} / Γ(k/2 + 1), Γ evaluated by the half-integer product
        for k in 0..=20usize {
            let mut gamma = if k % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
            let mut x = if k % 2 == 0 { 1.0 } else { 0.5 };
            while x < k as f64 / 2.0 + 1.0 - 1e-9 {
                gamma *= x;
                x += 1.0;
            }
            let expected = std::f64::consts::PI.powf(k as f64 / 2.0) / gamma;
            let got = omega::<crate::Rational>(k).to_f64();
            assert!((got - expected).abs() < 1e-12 * expected.max(1.0), "k = {k}");
        }
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(-1).unwrap(), BigInt::from(1));
        assert_eq!(double_factorial(0).unwrap(), BigInt::from(1));
        assert_eq!(double_factorial(1).unwrap(), BigInt::from(1));
        assert_eq!(double_factorial(7).unwrap(), BigInt::from(7 * 5 * 3));
        assert_eq!(double_factorial(-2), Err(UvalError::DoubleFactorialDomain(-2)));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 2), BigInt::from(15));
        assert_eq!(binomial(2, 3), BigInt::from(0));
        assert_eq!(binomial(0, 0), BigInt::from(1));
    }
}
