//! Coefficient field of the valuation algebra.
//!
//! Every constant that shows up in the unitary kinematic formulas is a rational
//! multiple of an integer power of π, and sums of valuations of mixed degree
//! mix those powers. [`PiLaurent`] is therefore a Laurent polynomial in a formal
//! transcendental π with coefficients in a field `C`. With `C = BigRational`
//! everything is exact; `C = f64` gives a fast approximate instantiation of the
//! same code.

mod combinat;
mod enclosure;
mod json;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Result, UvalError};
use crate::linalg::LinearScalar;

pub use combinat::{binomial, double_factorial, factorial, omega};
pub use enclosure::{pi_enclosure, ENCLOSURE_LEVELS};

/// A field that can carry the rational part of a [`PiLaurent`].
pub trait Coefficient:
    Clone + fmt::Debug + PartialEq + Num + Neg<Output = Self> + LinearScalar + Send + Sync + 'static
{
    fn from_bigint(value: &BigInt) -> Self;

    fn to_f64(&self) -> f64;

    /// Sign of `Σ c_e π^e` evaluated at the real number π.
    fn sign_at_pi(terms: &BTreeMap<i32, Self>) -> Result<Ordering>;

    fn from_i64(value: i64) -> Self {
        Self::from_bigint(&BigInt::from(value))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn from_big_ratio(num: &BigInt, den: &BigInt) -> Self {
        Self::from_bigint(num) / Self::from_bigint(den)
    }
}

impl Coefficient for BigRational {
    fn from_bigint(value: &BigInt) -> Self {
        BigRational::from_integer(value.clone())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sign_at_pi(terms: &BTreeMap<i32, Self>) -> Result<Ordering> {
        enclosure::sign_by_enclosure(terms)
    }
}

impl Coefficient for f64 {
    fn from_bigint(value: &BigInt) -> Self {
        value.to_f64().unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sign_at_pi(terms: &BTreeMap<i32, Self>) -> Result<Ordering> {
        let value: f64 = terms
            .iter()
            .map(|(e, c)| c * std::f64::consts::PI.powi(*e))
            .sum();
        value
            .partial_cmp(&0.0)
            .ok_or_else(|| UvalError::UndecidableSign(format!("{value}")))
    }
}

/// Finite sum `Σ c_e π^e` with `e ∈ Z`. No zero coefficient is ever stored, so
/// the empty map is zero and derived equality is term-by-term equality.
#[derive(Clone, Debug, PartialEq)]
pub struct PiLaurent<C> {
    terms: BTreeMap<i32, C>,
}

impl<C> Default for PiLaurent<C> {
    fn default() -> Self {
        Self { terms: BTreeMap::new() }
    }
}

impl<C: Coefficient> PiLaurent<C> {
    pub fn new() -> Self {
        Self { terms: BTreeMap::new() }
    }

    /// `c · π^e`.
    pub fn monomial(c: C, e: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Self { terms }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(c, 0)
    }

    pub fn from_int(value: i64) -> Self {
        Self::constant(C::from_i64(value))
    }

    pub fn from_bigint(value: &BigInt) -> Self {
        Self::constant(C::from_bigint(value))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::constant(C::from_ratio(num, den))
    }

    pub fn big_ratio(num: &BigInt, den: &BigInt) -> Self {
        Self::constant(C::from_big_ratio(num, den))
    }

    pub fn pi_pow(e: i32) -> Self {
        Self::monomial(C::one(), e)
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, C)>>(terms: I) -> Self {
        let mut out = Self::new();
        for (e, c) in terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &C)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn term_map(&self) -> &BTreeMap<i32, C> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: i32) -> C {
        self.terms.get(&e).cloned().unwrap_or_else(C::zero)
    }

    /// The single term `(e, c)` if this is a nonzero monomial.
    pub fn as_monomial(&self) -> Option<(i32, &C)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(e, c)| (*e, c))
        } else {
            None
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// The value as a plain field element when only `π^0` occurs.
    pub fn as_constant(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(C::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, e: i32, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::new();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(e, v)| (*e, v.clone() * c.clone()))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    pub fn shift_pi(&self, de: i32) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, v)| (e + de, v.clone())).collect(),
        }
    }

    /// Exact division by a single-term divisor.
    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        let (e, c) = rhs.as_monomial().ok_or(UvalError::NonMonomialDivisor)?;
        let inv = C::one() / c.clone();
        Ok(self.scale(&inv).shift_pi(-e))
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    pub fn sign(&self) -> Result<Ordering> {
        if self.terms.is_empty() {
            return Ok(Ordering::Equal);
        }
        if let Some((_, c)) = self.as_monomial() {
            // π^e > 0, so the sign is the sign of the coefficient.
            return C::sign_at_pi(&BTreeMap::from([(0, c.clone())]));
        }
        C::sign_at_pi(&self.terms)
    }

    pub fn abs(&self) -> Result<Self> {
        Ok(match self.sign()? {
            Ordering::Less => -self,
            _ => self.clone(),
        })
    }

    /// Compare the real values obtained by substituting π.
    pub fn cmp_value(&self, other: &Self) -> Result<Ordering> {
        (self - other).sign()
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64() * std::f64::consts::PI.powi(*e))
            .sum()
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> PiLaurent<D> {
        PiLaurent::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))))
    }
}

impl PiLaurent<BigRational> {
    /// Floating approximation with the same π-structure.
    pub fn to_float_coefficients(&self) -> PiLaurent<f64> {
        self.map_coefficients(Coefficient::to_f64)
    }
}

impl<C: Coefficient> Zero for PiLaurent<C> {
    fn zero() -> Self {
        Self::new()
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<C: Coefficient> One for PiLaurent<C> {
    fn one() -> Self {
        Self::constant(C::one())
    }
}

impl<C: Coefficient> LinearScalar for PiLaurent<C> {
    fn try_div(&self, rhs: &Self) -> Option<Self> {
        self.checked_div(rhs).ok()
    }

    fn is_pivot(&self) -> bool {
        self.is_monomial()
    }
}

impl<C: Coefficient> From<C> for PiLaurent<C> {
    fn from(c: C) -> Self {
        Self::constant(c)
    }
}

impl<'a, C: Coefficient> Add<&'a PiLaurent<C>> for &'a PiLaurent<C> {
    type Output = PiLaurent<C>;
    fn add(self, rhs: &'a PiLaurent<C>) -> PiLaurent<C> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a, C: Coefficient> Sub<&'a PiLaurent<C>> for &'a PiLaurent<C> {
    type Output = PiLaurent<C>;
    fn sub(self, rhs: &'a PiLaurent<C>) -> PiLaurent<C> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<'a, C: Coefficient> Mul<&'a PiLaurent<C>> for &'a PiLaurent<C> {
    type Output = PiLaurent<C>;
    fn mul(self, rhs: &'a PiLaurent<C>) -> PiLaurent<C> {
        let mut out = PiLaurent::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea + eb, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Coefficient> Neg for &PiLaurent<C> {
    type Output = PiLaurent<C>;
    fn neg(self) -> PiLaurent<C> {
        PiLaurent {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

impl<C: Coefficient> Neg for PiLaurent<C> {
    type Output = PiLaurent<C>;
    fn neg(self) -> PiLaurent<C> {
        -&self
    }
}

impl<C: Coefficient> Add for PiLaurent<C> {
    type Output = PiLaurent<C>;
    fn add(mut self, rhs: Self) -> Self {
        self += &rhs;
        self
    }
}

impl<C: Coefficient> Sub for PiLaurent<C> {
    type Output = PiLaurent<C>;
    fn sub(mut self, rhs: Self) -> Self {
        self -= &rhs;
        self
    }
}

impl<C: Coefficient> Mul for PiLaurent<C> {
    type Output = PiLaurent<C>;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<C: Coefficient> AddAssign<&PiLaurent<C>> for PiLaurent<C> {
    fn add_assign(&mut self, rhs: &PiLaurent<C>) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c.clone());
        }
    }
}

impl<C: Coefficient> SubAssign<&PiLaurent<C>> for PiLaurent<C> {
    fn sub_assign(&mut self, rhs: &PiLaurent<C>) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, -c.clone());
        }
    }
}

impl<C: Coefficient> MulAssign<&PiLaurent<C>> for PiLaurent<C> {
    fn mul_assign(&mut self, rhs: &PiLaurent<C>) {
        *self = &*self * rhs;
    }
}

impl<C: Coefficient> std::iter::Sum for PiLaurent<C> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc += &x;
        }
        acc
    }
}

/// Rendering of the rational part of a term; implemented for the two coefficient
/// fields so that `Display` can pick between `p/q`, `p/(q π)` and `p π^m / q`.
pub trait DisplayCoefficient {
    /// (negative, numerator magnitude, denominator magnitude or `None` when 1)
    fn parts(&self) -> (bool, String, Option<String>);
}

impl DisplayCoefficient for BigRational {
    fn parts(&self) -> (bool, String, Option<String>) {
        let neg = self.is_negative();
        let num = self.numer().abs().to_string();
        let den = if self.denom().is_one() {
            None
        } else {
            Some(self.denom().to_string())
        };
        (neg, num, den)
    }
}

impl DisplayCoefficient for f64 {
    fn parts(&self) -> (bool, String, Option<String>) {
        (*self < 0.0, format!("{}", self.abs()), None)
    }
}

fn pi_factor(e: u32) -> String {
    if e == 1 {
        "π".to_string()
    } else {
        format!("π^{e}")
    }
}

fn format_term(neg_prefix: bool, c: &impl DisplayCoefficient, e: i32) -> (bool, String) {
    let (neg, num, den) = c.parts();
    let neg = neg ^ neg_prefix;
    let body = match e.cmp(&0) {
        Ordering::Equal => match den {
            Some(d) => format!("{num}/{d}"),
            None => num,
        },
        Ordering::Greater => {
            let p = pi_factor(e as u32);
            let head = if num == "1" { p } else { format!("{num}{p}") };
            match den {
                Some(d) => format!("{head}/{d}"),
                None => head,
            }
        }
        Ordering::Less => {
            let p = pi_factor(e.unsigned_abs());
            match den {
                Some(d) => format!("{num}/({d}{p})"),
                None => format!("{num}/{p}"),
            }
        }
    };
    (neg, body)
}

impl<C: Coefficient + DisplayCoefficient> fmt::Display for PiLaurent<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let (neg, body) = format_term(false, c, *e);
            match (i, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

impl<C: Coefficient + DisplayCoefficient> PiLaurent<C> {
    /// Split off a leading sign for use as a coefficient in a sum: monomials
    /// render as `(negative, |c|π^e)`, longer sums are parenthesized.
    pub fn render_signed(&self) -> (bool, String) {
        match self.as_monomial() {
            Some((e, c)) => format_term(false, c, e),
            None => (false, format!("({self})")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Scalar;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn like_terms_add() {
        let half_pi = Scalar::monomial(q(1, 2), 1);
        assert_eq!(&half_pi + &half_pi, Scalar::pi_pow(1));
    }

    #[test]
    fn exponents_add_under_multiplication() {
        let a = Scalar::from_int(2);
        let b = Scalar::monomial(q(3, 4), -1);
        assert_eq!(&a * &b, Scalar::monomial(q(3, 2), -1));
    }

    #[test]
    fn cancellation_removes_terms() {
        let a = &Scalar::pi_pow(1) + &Scalar::one();
        let r = &a - &Scalar::one();
        assert_eq!(r, Scalar::pi_pow(1));
        assert_eq!(r.len(), 1);
        assert!((&r - &r).is_zero());
    }

    #[test]
    fn division_requires_monomial() {
        let a = &Scalar::pi_pow(2) + &Scalar::one();
        assert_eq!(
            a.checked_div(&Scalar::monomial(q(1, 2), 1)).unwrap(),
            &Scalar::monomial(q(2, 1), 1) + &Scalar::monomial(q(2, 1), -1)
        );
        assert_eq!(a.checked_div(&a), Err(UvalError::NonMonomialDivisor));
        assert_eq!(a.checked_div(&Scalar::zero()), Err(UvalError::NonMonomialDivisor));
    }

    #[test]
    fn sign_of_near_cancelling_laurent_polynomial() {
        // 22/7 - π > 0, 3 - π < 0, π - 355/113 < 0
        let a = &Scalar::ratio(22, 7) - &Scalar::pi_pow(1);
        assert_eq!(a.sign().unwrap(), Ordering::Greater);
        let b = &Scalar::from_int(3) - &Scalar::pi_pow(1);
        assert_eq!(b.sign().unwrap(), Ordering::Less);
        let c = &Scalar::pi_pow(1) - &Scalar::ratio(355, 113);
        assert_eq!(c.sign().unwrap(), Ordering::Less);
        // π² - 9.8696044010893586188 (π² = 9.86960440108935861883...)
        let d = &Scalar::pi_pow(2)
            - &Scalar::big_ratio(
                &"98696044010893586188".parse().unwrap(),
                &"10000000000000000000".parse().unwrap(),
            );
        assert_eq!(d.sign().unwrap(), Ordering::Greater);
        assert_eq!(Scalar::monomial(q(-1, 3), -4).sign().unwrap(), Ordering::Less);
    }

    #[test]
    fn pretty_printing() {
        assert_eq!(Scalar::monomial(q(3, 8), -1).to_string(), "3/(8π)");
        assert_eq!(Scalar::monomial(q(3, 2), 0).to_string(), "3/2");
        assert_eq!(Scalar::monomial(q(3, 4), 2).to_string(), "3π^2/4");
        assert_eq!(Scalar::monomial(q(-1, 1), 1).to_string(), "-π");
        assert_eq!(Scalar::monomial(q(2, 1), -2).to_string(), "2/π^2");
        let mixed = &Scalar::pi_pow(1) - &Scalar::ratio(1, 2);
        assert_eq!(mixed.to_string(), "-1/2 + π");
        assert_eq!(Scalar::zero().to_string(), "0");
        assert_eq!(Scalar::ratio(-3, 2).render_signed(), (true, "3/2".to_string()));
        assert_eq!(mixed.render_signed(), (false, "(-1/2 + π)".to_string()));
    }

    #[test]
    fn float_instantiation_shares_the_algebra() {
        let a: PiLaurent<f64> = PiLaurent::monomial(0.5, 1);
        let b = &a + &a;
        assert_eq!(b, PiLaurent::pi_pow(1));
        assert!((b.to_f64() - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!((-&b).sign().unwrap(), Ordering::Less);
    }
}
