//! Elements of `Val^{U(n)}` in the hermitian intrinsic volume basis.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, UvalError};
use crate::poly::{Chart, GradedPoly};
use crate::scalar::{binomial, factorial, omega, Coefficient, DisplayCoefficient, PiLaurent};

/// Smallest admissible `q` for `μ_{k,q}` at ambient dimension `n`.
pub fn q_min(n: usize, k: usize) -> usize {
    k.saturating_sub(n)
}

/// Admissible `q` for `μ_{k,q}`: `max(0, k-n) ..= ⌊k/2⌋`.
pub fn q_range(n: usize, k: usize) -> std::ops::RangeInclusive<usize> {
    q_min(n, k)..=k / 2
}

/// `dim Val_k^{U(n)} = min(⌊k/2⌋, ⌊(2n-k)/2⌋) + 1`.
pub fn dim_val(n: usize, k: usize) -> Result<usize> {
    if k > 2 * n {
        return Err(UvalError::DegreeOutOfRange { n, k });
    }
    Ok((k / 2).min((2 * n - k) / 2) + 1)
}

pub fn in_range(n: usize, k: usize, q: usize) -> bool {
    k <= 2 * n && q_range(n, k).contains(&q)
}

fn sign(e: usize) -> i64 {
    if e.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// A unitary-invariant valuation on `C^n`: for each degree `k` a coefficient
/// vector indexed by `q ∈ q_range(n, k)`. Zero components are not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Valuation<C> {
    n: usize,
    components: BTreeMap<usize, Vec<PiLaurent<C>>>,
}

impl<C: Coefficient> Valuation<C> {
    pub fn zero(n: usize) -> Self {
        Self { n, components: BTreeMap::new() }
    }

    pub fn chi(n: usize) -> Self {
        Self::mu(n, 0, 0).expect("chi is always in range")
    }

    pub fn vol(n: usize) -> Self {
        Self::mu(n, 2 * n, n).expect("vol is always in range")
    }

    pub fn mu(n: usize, k: usize, q: usize) -> Result<Self> {
        if !in_range(n, k, q) {
            return Err(UvalError::IndexOutOfRange { n, k, q });
        }
        let mut v = Self::zero(n);
        v.add_mu(k, q, PiLaurent::one());
        Ok(v)
    }

    /// `τ_{k,q} = Σ_{i ≥ q} C(i,q) μ_{k,i}`, dropping `μ_{k,i}` with `i < k - n`.
    pub fn tau(n: usize, k: usize, q: usize) -> Result<Self> {
        if k > 2 * n || q > k / 2 {
            return Err(UvalError::IndexOutOfRange { n, k, q });
        }
        Ok(Self::tau_unchecked(n, k, q))
    }

    fn tau_unchecked(n: usize, k: usize, q: usize) -> Self {
        let mut v = Self::zero(n);
        for i in q.max(q_min(n, k))..=k / 2 {
            v.add_mu(k, i, PiLaurent::from_bigint(&binomial(i, q)));
        }
        v
    }

    /// Build from a homogeneous coefficient vector over `q_range(n, k)`.
    pub fn from_component(n: usize, k: usize, coeffs: Vec<PiLaurent<C>>) -> Result<Self> {
        let dim = dim_val(n, k)?;
        if coeffs.len() != dim {
            return Err(UvalError::Shape(format!("degree {k} at n = {n} needs {dim} coefficients, got {}", coeffs.len())));
        }
        let mut v = Self::zero(n);
        for (q, c) in q_range(n, k).zip(coeffs) {
            v.add_mu(k, q, c);
        }
        Ok(v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Degrees with a nonzero component, ascending.
    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.components.keys().copied()
    }

    /// `Some(k)` if the valuation is nonzero and concentrated in degree `k`.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut it = self.components.keys();
        match (it.next(), it.next()) {
            (Some(k), None) => Some(*k),
            _ => None,
        }
    }

    /// Coefficient of `μ_{k,q}`; zero when out of range.
    pub fn coeff(&self, k: usize, q: usize) -> PiLaurent<C> {
        if !in_range(self.n, k, q) {
            return PiLaurent::zero();
        }
        self.components
            .get(&k)
            .map(|v| v[q - q_min(self.n, k)].clone())
            .unwrap_or_default()
    }

    /// Full coefficient vector of degree `k` over `q_range(n, k)`.
    pub fn component_vector(&self, k: usize) -> Vec<PiLaurent<C>> {
        match self.components.get(&k) {
            Some(v) => v.clone(),
            None => vec![PiLaurent::zero(); dim_val(self.n, k).unwrap_or(0)],
        }
    }

    pub fn component(&self, k: usize) -> Self {
        let mut out = Self::zero(self.n);
        if let Some(v) = self.components.get(&k) {
            out.components.insert(k, v.clone());
        }
        out
    }

    /// `(k, q, coefficient)` for every nonzero coefficient, in ascending order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &PiLaurent<C>)> {
        self.components.iter().flat_map(move |(k, v)| {
            let qmin = q_min(self.n, *k);
            v.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(move |(i, c)| (*k, qmin + i, c))
        })
    }

    /// Add `c μ_{k,q}`; out-of-range indices are silently treated as zero.
    pub fn add_mu(&mut self, k: usize, q: usize, c: PiLaurent<C>) {
        if c.is_zero() || !in_range(self.n, k, q) {
            return;
        }
        let n = self.n;
        let slot = self
            .components
            .entry(k)
            .or_insert_with(|| vec![PiLaurent::zero(); dim_val(n, k).expect("k in range")]);
        slot[q - q_min(n, k)] += &c;
        if slot.iter().all(|c| c.is_zero()) {
            self.components.remove(&k);
        }
    }

    /// Add `c τ_{k,q}` with local truncation; out-of-range `q` contributes zero.
    pub fn add_tau(&mut self, k: usize, q: usize, c: &PiLaurent<C>) {
        if k > 2 * self.n || q > k / 2 || c.is_zero() {
            return;
        }
        for i in q.max(q_min(self.n, k))..=k / 2 {
            self.add_mu(k, i, c * &PiLaurent::from_bigint(&binomial(i, q)));
        }
    }

    pub fn scale(&self, c: &PiLaurent<C>) -> Self {
        let mut out = Self::zero(self.n);
        for (k, q, v) in self.terms() {
            out.add_mu(k, q, v * c);
        }
        out
    }

    fn check_same_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(UvalError::DimensionMismatch(self.n, other.n));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same_n(other)?;
        let mut out = self.clone();
        for (k, q, c) in other.terms() {
            out.add_mu(k, q, c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&-other)
    }

    /// Image of a polynomial under the quotient map: `t^a u^b` goes to
    /// `(ω_k a! (2b)! / π^k) τ_{k,b}`, `k = a + 2b`. Parts of degree above `2n` vanish.
    pub fn from_monomial(n: usize, p: &GradedPoly<C>) -> Self {
        let p = p.change_vars(Chart::TU);
        let mut out = Self::zero(n);
        for (a, b, c) in p.terms() {
            let k = a + 2 * b;
            if k > 2 * n {
                continue;
            }
            let factor = omega::<C>(k)
                .shift_pi(-(k as i32))
                .scale(&C::from_bigint(&(factorial(a) * factorial(2 * b))));
            out.add_tau(k, b, &(c * &factor));
        }
        out
    }

    /// Canonical global representative in the `(t, u)` chart:
    /// `μ_{k,q} ↦ Σ_i (-1)^{i+q} C(i,q) π^k/(ω_k (k-2i)! (2i)!) t^{k-2i} u^i`.
    pub fn to_monomial(&self) -> GradedPoly<C> {
        let mut out = GradedPoly::zero(Chart::TU);
        for (k, q, c) in self.terms() {
            let base = c
                .shift_pi(k as i32)
                .checked_div(&omega::<C>(k))
                .expect("ω_k is a monomial");
            for i in q..=k / 2 {
                let num = binomial(i, q) * sign(i + q);
                let den = factorial(k - 2 * i) * factorial(2 * i);
                out.add_term(k - 2 * i, i, base.scale(&C::from_big_ratio(&num, &den)));
            }
        }
        out
    }

    /// The Alesker product, computed on global representatives.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same_n(other)?;
        let prod = &self.to_monomial().truncate(2 * self.n) * &other.to_monomial().truncate(2 * self.n);
        Ok(Self::from_monomial(self.n, &prod))
    }

    /// Alesker–Fourier transform: `μ_{k,q} ↦ μ_{2n-k, n-k+q}`.
    pub fn fourier(&self) -> Self {
        let n = self.n;
        let mut out = Self::zero(n);
        for (k, q, c) in self.terms() {
            out.add_mu(2 * n - k, n + q - k, c.clone());
        }
        out
    }

    /// τ-coordinates of degree `k` over `q_range(n, k)`. These are unique at
    /// fixed `n` since the truncated `τ_{k,q}`, `q ≥ k - n`, form a basis.
    pub fn tau_coordinates(&self, k: usize) -> Vec<PiLaurent<C>> {
        let n = self.n;
        q_range(n, k)
            .map(|i| {
                q_range(n, k)
                    .filter(|q| *q <= i)
                    .map(|q| {
                        self.coeff(k, q)
                            .scale(&C::from_bigint(&(binomial(i, q) * sign(i + q))))
                    })
                    .sum()
            })
            .collect()
    }

    /// Inverse of [`Self::tau_coordinates`] for a single degree.
    pub fn from_tau_coordinates(n: usize, k: usize, coords: &[PiLaurent<C>]) -> Result<Self> {
        let dim = dim_val(n, k)?;
        if coords.len() != dim {
            return Err(UvalError::Shape(format!("degree {k} at n = {n} needs {dim} τ-coordinates, got {}", coords.len())));
        }
        let mut out = Self::zero(n);
        for (q, c) in q_range(n, k).zip(coords) {
            out.add_tau(k, q, c);
        }
        Ok(out)
    }

    /// The involution `τ_{2l,q} ↦ τ_{2l,l-q}`, applied to the τ-coordinates
    /// of the global representative of each component.
    pub fn iota(&self) -> Result<Self> {
        if let Some(k) = self.degrees().find(|k| k % 2 == 1) {
            return Err(UvalError::OddDegree(k));
        }
        let mut out = Self::zero(self.n);
        for (k, q, c) in self.terms() {
            let l = k / 2;
            for i in q..=l {
                let coeff = c.scale(&C::from_bigint(&(binomial(i, q) * sign(i + q))));
                out.add_tau(k, l - i, &coeff);
            }
        }
        Ok(out)
    }

    /// Klain function of the degree-`k` component as a combination of the
    /// elementary symmetric functions of `cos²Θ`.
    pub fn klain(&self, k: usize) -> Result<KlainPolynomial<C>> {
        let n = self.n;
        if k > 2 * n {
            return Err(UvalError::DegreeOutOfRange { n, k });
        }
        if k > n {
            return Err(UvalError::KlainAboveMiddle { n, k, dual: 2 * n - k });
        }
        Ok(KlainPolynomial { k, sigma_coeffs: self.tau_coordinates(k) })
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&PiLaurent<C>) -> PiLaurent<D>) -> Valuation<D> {
        let mut out = Valuation::zero(self.n);
        for (k, q, c) in self.terms() {
            out.add_mu(k, q, f(c));
        }
        out
    }
}

impl Valuation<BigRational> {
    pub fn to_float(&self) -> Valuation<f64> {
        self.map_coefficients(|c| c.to_float_coefficients())
    }
}

/// `kl(E) = Σ_q c_q σ_q(cos²θ_1(E), …, cos²θ_p(E))`.
#[derive(Clone, Debug, PartialEq)]
pub struct KlainPolynomial<C> {
    pub k: usize,
    pub sigma_coeffs: Vec<PiLaurent<C>>,
}

impl<C: Coefficient> KlainPolynomial<C> {
    /// Evaluate at the squared cosines of a multiple Kähler angle.
    pub fn evaluate(&self, cos2: &[f64]) -> f64 {
        let sigma = elementary_symmetric(cos2);
        self.sigma_coeffs
            .iter()
            .enumerate()
            .map(|(q, c)| c.to_f64() * sigma.get(q).copied().unwrap_or(0.0))
            .sum()
    }
}

/// `σ_0, …, σ_m` of `x_1, …, x_m`.
pub fn elementary_symmetric(x: &[f64]) -> Vec<f64> {
    let mut sigma = vec![0.0; x.len() + 1];
    sigma[0] = 1.0;
    for (i, xi) in x.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            sigma[j] += sigma[j - 1] * xi;
        }
    }
    sigma
}

impl<C: Coefficient> Neg for &Valuation<C> {
    type Output = Valuation<C>;
    fn neg(self) -> Valuation<C> {
        self.scale(&PiLaurent::from_int(-1))
    }
}

/// Panics on mismatched `n`; use [`Valuation::checked_add`] for fallible code.
impl<C: Coefficient> Add for &Valuation<C> {
    type Output = Valuation<C>;
    fn add(self, rhs: Self) -> Valuation<C> {
        self.checked_add(rhs).expect("valuations over the same C^n")
    }
}

impl<C: Coefficient> Sub for &Valuation<C> {
    type Output = Valuation<C>;
    fn sub(self, rhs: Self) -> Valuation<C> {
        self.checked_sub(rhs).expect("valuations over the same C^n")
    }
}

/// Which named basis to use when printing a valuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Mu,
    Tau,
}

/// Render `Σ c_i name_i` with unit coefficients suppressed.
pub fn render_sum<C: Coefficient + DisplayCoefficient>(terms: impl IntoIterator<Item = (String, PiLaurent<C>)>) -> String {
    let mut out = String::new();
    for (name, c) in terms {
        if c.is_zero() {
            continue;
        }
        let (neg, body) = c.render_signed();
        let first = out.is_empty();
        out.push_str(match (first, neg) {
            (true, true) => "-",
            (true, false) => "",
            (false, true) => " - ",
            (false, false) => " + ",
        });
        if body == "1" {
            out.push_str(&name);
        } else {
            out.push_str(&format!("{body}*{name}"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl<C: Coefficient + DisplayCoefficient> Valuation<C> {
    pub fn render(&self, basis: Basis) -> String {
        match basis {
            Basis::Mu => render_sum(self.terms().map(|(k, q, c)| (format!("mu[{k},{q}]"), c.clone()))),
            Basis::Tau => render_sum(self.degrees().flat_map(|k| {
                q_range(self.n, k)
                    .zip(self.tau_coordinates(k))
                    .map(move |(q, c)| (format!("tau[{k},{q}]"), c))
            })),
        }
    }
}

impl<C: Coefficient + DisplayCoefficient> fmt::Display for Valuation<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Basis::Mu))
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    q: usize,
    coeff: PiLaurent<BigRational>,
}

#[derive(Serialize, Deserialize)]
struct ValuationJson {
    n: usize,
    components: BTreeMap<usize, Vec<TermJson>>,
}

impl Serialize for Valuation<BigRational> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut components: BTreeMap<usize, Vec<TermJson>> = BTreeMap::new();
        for (k, q, c) in self.terms() {
            components.entry(k).or_default().push(TermJson { q, coeff: c.clone() });
        }
        ValuationJson { n: self.n, components }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Valuation<BigRational> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ValuationJson::deserialize(deserializer)?;
        let mut v = Self::zero(raw.n);
        for (k, terms) in raw.components {
            for t in terms {
                if !in_range(raw.n, k, t.q) {
                    return Err(D::Error::custom(UvalError::IndexOutOfRange { n: raw.n, k, q: t.q }));
                }
                v.add_mu(k, t.q, t.coeff);
            }
        }
        Ok(v)
    }
}

/// `ω_{k+l}/(ω_k ω_l) · C(k+l-2p-2q, k-2p) · C(2p+2q, 2p)`, the coefficient of
/// `τ_{k+l,p+q}` in `τ_{k,p} · τ_{l,q}`.
pub fn tasaki_product_coefficient<C: Coefficient>(k: usize, p: usize, l: usize, q: usize) -> PiLaurent<C> {
    let omegas = omega::<C>(k + l)
        .checked_div(&(&omega::<C>(k) * &omega::<C>(l)))
        .expect("ω are monomials");
    let binoms: BigInt = binomial(k + l - 2 * p - 2 * q, k - 2 * p) * binomial(2 * p + 2 * q, 2 * p);
    omegas.scale(&C::from_bigint(&binoms))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::poly::{f_closed, f_recursive};
    use crate::{ExactPoly, ExactValuation as V, Rational, Scalar};
    use proptest::prelude::*;

    fn mu(n: usize, k: usize, q: usize) -> V {
        V::mu(n, k, q).unwrap()
    }

    fn tau(n: usize, k: usize, q: usize) -> V {
        V::tau(n, k, q).unwrap()
    }

    fn s(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    #[test]
    fn constructors() {
        assert_eq!(mu(2, 0, 0), V::chi(2));
        assert_eq!(mu(2, 4, 2), V::vol(2));
        assert_eq!(V::mu(1, 2, 0), Err(UvalError::IndexOutOfRange { n: 1, k: 2, q: 0 }));
        assert_eq!(tau(2, 2, 0), &mu(2, 2, 0) + &mu(2, 2, 1));
        assert_eq!(tau(1, 2, 0), mu(1, 2, 1));
        assert_eq!(tau(2, 4, 1), mu(2, 4, 2).scale(&s(2, 1)));
        assert!(V::tau(2, 5, 0).is_err());
    }

    #[test]
    fn dimensions() {
        assert_eq!(dim_val(2, 2).unwrap(), 2);
        assert_eq!(dim_val(4, 0).unwrap(), 1);
        assert_eq!(dim_val(3, 3).unwrap(), 2);
        assert!(dim_val(2, 5).is_err());
        for n in 0..8 {
            for k in 0..=2 * n {
                assert_eq!(dim_val(n, k).unwrap(), q_range(n, k).count());
            }
        }
    }

    #[test]
    fn monomial_images() {
        let t = V::from_monomial(3, &ExactPoly::t());
        assert_eq!(t, mu(3, 1, 0).scale(&Scalar::monomial(Rational::from_integer(2.into()), -1)));
        for n in 1..5 {
            let u = V::from_monomial(n, &ExactPoly::u());
            assert_eq!(u, mu(n, 2, 1).scale(&Scalar::monomial(Rational::from_integer(2.into()), -1)));
        }
        assert!(V::from_monomial(1, &f_closed(2)).is_zero());
    }

    #[test]
    fn global_representatives() {
        let half_pi = Scalar::monomial(Rational::new(1.into(), 2.into()), 1);
        assert_eq!(mu(3, 2, 1).to_monomial(), ExactPoly::u().scale(&half_pi));
        assert_eq!(mu(3, 1, 0).to_monomial(), ExactPoly::t().scale(&half_pi));
        let mut expected = ExactPoly::zero(Chart::ST);
        expected.add_term(0, 1, Scalar::monomial(Rational::from_integer((-2).into()), 1));
        expected.add_term(2, 0, Scalar::pi_pow(1));
        assert_eq!(mu(3, 2, 0).to_monomial().change_vars(Chart::ST), expected);
    }

    #[test]
    fn products() {
        let n = 3;
        let v = &tau(n, 3, 1) + &mu(n, 4, 2);
        assert_eq!(V::chi(n).multiply(&v).unwrap(), v);
        let t1 = tau(n, 1, 0);
        assert_eq!(t1.multiply(&t1).unwrap(), tau(n, 2, 0).scale(&Scalar::monomial(Rational::new(1.into(), 2.into()), 1)));
        let t2 = tau(2, 2, 0);
        assert_eq!(t2.multiply(&t2).unwrap(), mu(2, 4, 2).scale(&s(3, 1)));
        assert_eq!(mu(2, 1, 0).multiply(&mu(3, 1, 0)), Err(UvalError::DimensionMismatch(2, 3)));
    }

    #[test]
    fn fourier_examples() {
        assert_eq!(V::chi(2).fourier(), V::vol(2));
        assert_eq!(mu(2, 2, 1).fourier(), mu(2, 2, 1));
    }

    #[test]
    fn iota_examples() {
        assert_eq!(tau(3, 2, 0).iota().unwrap(), tau(3, 2, 1));
        for n in 1..6 {
            for q in q_range(n, 2 * n) {
                assert_eq!(mu(n, 2 * n, q).iota().unwrap(), mu(n, 2 * n, q));
            }
        }
        for n in 4..7 {
            let f4 = V::from_monomial(n, &f_closed(4));
            assert!(!f4.is_zero());
            assert_eq!(f4.iota().unwrap(), f4);
        }
        assert_eq!(mu(3, 3, 1).iota(), Err(UvalError::OddDegree(3)));
    }

    #[test]
    fn klain_examples() {
        let kl = mu(3, 2, 1).klain(2).unwrap();
        assert_eq!(kl.sigma_coeffs, vec![s(0, 1), s(1, 1)]);
        for q in 0..=2 {
            let kl = tau(4, 4, q).klain(4).unwrap();
            let e: Vec<Scalar> = (0..=2).map(|i| s((i == q) as i64, 1)).collect();
            assert_eq!(kl.sigma_coeffs, e);
        }
        assert_eq!(mu(4, 4, 1).klain(4).unwrap().sigma_coeffs, vec![s(0, 1), s(1, 1), s(-2, 1)]);
        assert_eq!(mu(2, 3, 1).klain(3), Err(UvalError::KlainAboveMiddle { n: 2, k: 3, dual: 1 }));
    }

    #[test]
    fn elementary_symmetric_functions() {
        assert_eq!(elementary_symmetric(&[1.0, 2.0, 3.0]), vec![1.0, 6.0, 11.0, 6.0]);
        assert_eq!(elementary_symmetric(&[]), vec![1.0]);
    }

    #[test]
    fn ideal_of_relations_vanishes() {
        for n in 1..=6usize {
            for f in [f_recursive::<Rational>(n + 1), f_recursive::<Rational>(n + 2)] {
                let deg = f.degree().unwrap();
                for a in 0..=2 * n {
                    for b in 0..=n {
                        if a + 2 * b + deg > 2 * n {
                            continue;
                        }
                        let m = ExactPoly::monomial(Chart::TU, a, b, Scalar::one());
                        assert!(V::from_monomial(n, &(&m * &f)).is_zero(), "n={n} a={a} b={b} deg={deg}");
                    }
                }
            }
        }
    }

    #[test]
    fn kazarnovskii_normalization() {
        for k in 1..=10usize {
            let lhs = mu(k, k, 0).to_monomial();
            let two_pi_k = Scalar::monomial(Rational::from_integer(BigInt::from(2).pow(k as u32)), k as i32);
            let den = omega::<Rational>(k).scale(&Rational::from_integer(factorial(k - 1) * 2));
            let c = two_pi_k.checked_div(&den).unwrap().scale(&Rational::from_integer(sign(k + 1).into()));
            assert_eq!(lhs, f_closed::<Rational>(k).scale(&c), "k = {k}");
        }
    }

    #[test]
    fn tasaki_product_formula() {
        for n in 1..=5usize {
            for k in 0..=2 * n {
                for l in 0..=2 * n - k {
                    for p in 0..=k / 2 {
                        for q in 0..=l / 2 {
                            let lhs = tau(n, k, p).multiply(&tau(n, l, q)).unwrap();
                            let rhs = tau(n, k + l, p + q).scale(&tasaki_product_coefficient(k, p, l, q));
                            assert_eq!(lhs, rhs, "n={n} ({k},{p})({l},{q})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn fourier_matches_restriction_map() {
        // σ_i(x_1..x_p, 1, …, 1) with n-2p ones = Σ_j C(n-2p, i-j) σ_j(x)
        for n in 1..=5usize {
            for p in 0..=n / 2 {
                for i in 0..=n - p {
                    let image = tau(n, 2 * (n - p), i).fourier();
                    let coords = image.tau_coordinates(2 * p);
                    for (j, c) in coords.iter().enumerate() {
                        let expected = if i >= j { binomial(n - 2 * p, i - j) } else { BigInt::zero() };
                        assert_eq!(*c, Scalar::from_bigint(&expected), "n={n} p={p} i={i} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn anisotropic_valuations_form_an_ideal() {
        for n in 1..=5usize {
            let u = V::from_monomial(n, &ExactPoly::u());
            for k in 0..=2 * n {
                for q in q_range(n, k) {
                    let prod = u.multiply(&mu(n, k, q)).unwrap();
                    for d in 0..=n {
                        assert!(prod.coeff(d, 0).is_zero(), "n={n} k={k} q={q} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn multiplication_by_u() {
        // u·μ_{k,p} = 4(p+1)/(π(k+2)) ((2p+1)μ_{k+2,p+1} - 2(p+2)μ_{k+2,p+2}) modulo higher q
        for n in 1..=6usize {
            let u = V::from_monomial(n, &ExactPoly::u());
            for k in 0..=2 * n - 2 {
                for p in q_range(n, k) {
                    let lhs = u.multiply(&mu(n, k, p)).unwrap();
                    let pre = Scalar::monomial(Rational::new((4 * (p + 1)).into(), (k + 2).into()), -1);
                    let mut rhs = V::zero(n);
                    rhs.add_mu(k + 2, p + 1, pre.scale(&Rational::from_integer((2 * p + 1).into())));
                    rhs.add_mu(k + 2, p + 2, pre.scale(&Rational::from_integer((-2 * (p as i64 + 2)).into())));
                    let diff = &lhs - &rhs;
                    assert!(diff.terms().all(|(_, i, _)| i > p + 2), "n={n} k={k} p={p}: {diff}");
                    // the higher terms in fact vanish
                    assert!(diff.is_zero(), "n={n} k={k} p={p}: {diff}");
                }
            }
        }
    }

    #[test]
    fn rendering() {
        let v = &mu(2, 2, 0).scale(&s(3, 2)) - &mu(2, 2, 1);
        assert_eq!(v.to_string(), "3/2*mu[2,0] - mu[2,1]");
        assert_eq!(mu(2, 2, 0).render(Basis::Tau), "tau[2,0] - tau[2,1]");
        assert_eq!(V::zero(2).to_string(), "0");
    }

    #[test]
    fn json_shape_and_roundtrip() {
        let v = &mu(2, 2, 1) + &V::vol(2).scale(&Scalar::pi_pow(-1));
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(
            json,
            r#"{"n":2,"components":{"2":[{"q":1,"coeff":[{"pi":0,"num":"1","den":"1"}]}],"4":[{"q":2,"coeff":[{"pi":-1,"num":"1","den":"1"}]}]}}"#
        );
        let back: V = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<V>(r#"{"n":1,"components":{"2":[{"q":0,"coeff":[]}]}}"#).is_err());
    }

    pub(crate) fn arb_valuation(n: usize) -> impl Strategy<Value = V> {
        let slots: Vec<(usize, usize)> = (0..=2 * n).flat_map(|k| q_range(n, k).map(move |q| (k, q))).collect();
        let len = slots.len();
        proptest::collection::vec((-6i64..7, 1i64..5, -1i32..2), len).prop_map(move |cs| {
            let mut v = V::zero(n);
            for ((k, q), (a, b, e)) in slots.iter().zip(cs) {
                v.add_mu(*k, *q, Scalar::ratio(a, b).shift_pi(e));
            }
            v
        })
    }

    fn arb_even(n: usize) -> impl Strategy<Value = V> {
        arb_valuation(n).prop_map(|v| {
            let mut out = V::zero(v.n());
            for (k, q, c) in v.terms().filter(|(k, _, _)| k % 2 == 0) {
                out.add_mu(k, q, c.clone());
            }
            out
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn monomial_roundtrip(v in (1usize..=6).prop_flat_map(arb_valuation)) {
            prop_assert_eq!(V::from_monomial(v.n(), &v.to_monomial()), v);
        }

        #[test]
        fn product_is_commutative_and_associative(
            (a, b, c) in (1usize..=4).prop_flat_map(|n| (arb_valuation(n), arb_valuation(n), arb_valuation(n)))
        ) {
            let ab = a.multiply(&b).unwrap();
            prop_assert_eq!(&ab, &b.multiply(&a).unwrap());
            prop_assert_eq!(ab.multiply(&c).unwrap(), a.multiply(&b.multiply(&c).unwrap()).unwrap());
        }

        #[test]
        fn fourier_is_an_involution(v in (0usize..=6).prop_flat_map(arb_valuation)) {
            prop_assert_eq!(v.fourier().fourier(), v);
        }

        #[test]
        fn iota_commutes_with_fourier(v in (1usize..=6).prop_flat_map(arb_even)) {
            prop_assert_eq!(v.fourier().iota().unwrap(), v.iota().unwrap().fourier());
            prop_assert_eq!(v.iota().unwrap().iota().unwrap(), v);
        }

        #[test]
        fn iota_is_multiplicative((a, b) in (1usize..=4).prop_flat_map(|n| (arb_even(n), arb_even(n)))) {
            prop_assert_eq!(a.multiply(&b).unwrap().iota().unwrap(), a.iota().unwrap().multiply(&b.iota().unwrap()).unwrap());
        }

        #[test]
        fn tau_coordinates_roundtrip(v in (1usize..=6).prop_flat_map(arb_valuation)) {
            for k in v.degrees() {
                let back = V::from_tau_coordinates(v.n(), k, &v.tau_coordinates(k)).unwrap();
                prop_assert_eq!(back, v.component(k));
            }
        }
    }
}
