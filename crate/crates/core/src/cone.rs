//! Positive, monotone and Crofton-positive cones, the first variation map and
//! the two natural norms on a homogeneous component.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Result, UvalError};
use crate::kinematic::pairing_fourier;
use crate::linalg::Matrix;
use crate::scalar::{factorial, omega, Coefficient, DisplayCoefficient, PiLaurent};
use crate::valuation::{in_range, q_range, render_sum, Valuation};

/// Reason a valuation fails a cone test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Negative coefficient of `μ_{k,q}`.
    NegativeMu { k: usize, q: usize },
    /// Negative coordinate along `ν_{k,q}`.
    NegativeNu { k: usize, q: usize },
    /// `(k-2q) a_q ≥ (k-2q-1) a_{q+1}` fails.
    FirstFamily { k: usize, q: usize },
    /// `(n+q-k+1) a_q ≤ (n+q-k+3/2) a_{q+1}` fails.
    SecondFamily { k: usize, q: usize },
    /// Negative multiple of the Euler characteristic.
    NegativeEuler,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::NegativeMu { k, q } => write!(f, "coefficient of mu[{k},{q}] is negative"),
            Witness::NegativeNu { k, q } => write!(f, "coordinate along nu[{k},{q}] is negative"),
            Witness::FirstFamily { k, q } => write!(f, "(k-2q) a_q >= (k-2q-1) a_(q+1) fails at k={k}, q={q}"),
            Witness::SecondFamily { k, q } => {
                write!(f, "(n+q-k+1) a_q <= (n+q-k+3/2) a_(q+1) fails at k={k}, q={q}")
            }
            Witness::NegativeEuler => write!(f, "coefficient of chi is negative"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConeVerdict {
    pub member: bool,
    pub witness: Option<Witness>,
}

impl ConeVerdict {
    fn yes() -> Self {
        Self { member: true, witness: None }
    }

    fn no(w: Witness) -> Self {
        Self { member: false, witness: Some(w) }
    }
}

fn negative<C: Coefficient>(c: &PiLaurent<C>) -> Result<bool> {
    Ok(c.sign()? == Ordering::Less)
}

/// Every μ-coefficient is nonnegative.
pub fn is_positive<C: Coefficient>(v: &Valuation<C>) -> Result<ConeVerdict> {
    for (k, q, c) in v.terms() {
        if negative(c)? {
            return Ok(ConeVerdict::no(Witness::NegativeMu { k, q }));
        }
    }
    Ok(ConeVerdict::yes())
}

fn homogeneous_or_zero<C: Coefficient>(v: &Valuation<C>, k: usize) -> Result<()> {
    if v.degrees().any(|d| d != k) {
        return Err(UvalError::NotHomogeneous);
    }
    Ok(())
}

/// Coordinates `b_q = ⟨v, μ_{k,q}⟩` of a degree-`k` valuation in the dual basis `ν_{k,·}`.
pub fn nu_coeffs<C: Coefficient>(v: &Valuation<C>, k: usize) -> Result<Vec<PiLaurent<C>>> {
    homogeneous_or_zero(v, k)?;
    q_range(v.n(), k)
        .map(|q| pairing_fourier(v, &Valuation::mu(v.n(), k, q)?))
        .collect()
}

/// Pairing matrices `G_k[p][q] = ⟨μ_{k,p}, μ_{k,q}⟩`, computed once per `n` so
/// that many coefficient vectors can be tested cheaply.
#[derive(Clone, Debug)]
pub struct FourierGram<C> {
    n: usize,
    grams: Vec<Matrix<PiLaurent<C>>>,
}

impl<C: Coefficient> FourierGram<C> {
    pub fn new(n: usize) -> Result<Self> {
        let grams = (0..=2 * n)
            .map(|k| {
                let basis: Vec<Valuation<C>> = q_range(n, k).map(|q| Valuation::mu(n, k, q)).collect::<Result<_>>()?;
                let mut g = Matrix::zeros(basis.len(), basis.len());
                for (i, a) in basis.iter().enumerate() {
                    for (j, b) in basis.iter().enumerate() {
                        g[(i, j)] = pairing_fourier(a, b)?;
                    }
                }
                Ok(g)
            })
            .collect::<Result<_>>()?;
        Ok(Self { n, grams })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gram(&self, k: usize) -> &Matrix<PiLaurent<C>> {
        &self.grams[k]
    }

    /// ν-coordinates from μ-coordinates of degree `k`.
    pub fn nu_from_mu(&self, k: usize, a: &[PiLaurent<C>]) -> Result<Vec<PiLaurent<C>>> {
        self.grams[k].transpose().mul_vec(a)
    }

    /// μ-coordinates of `ν_{k,p}`.
    pub fn nu_basis(&self, k: usize, p: usize) -> Result<Vec<PiLaurent<C>>> {
        let g = &self.grams[k];
        let q0 = *q_range(self.n, k).start();
        let e = Matrix::from_fn(g.rows(), 1, |i, _| PiLaurent::from_int((i + q0 == p) as i64));
        let x = g.transpose().solve(&e)?;
        Ok((0..x.rows()).map(|i| x[(i, 0)].clone()).collect())
    }

    pub fn is_crofton_positive(&self, v: &Valuation<C>) -> Result<ConeVerdict> {
        if v.n() != self.n {
            return Err(UvalError::DimensionMismatch(self.n, v.n()));
        }
        for k in v.degrees() {
            let b = self.nu_from_mu(k, &v.component_vector(k))?;
            for (q, c) in q_range(self.n, k).zip(&b) {
                if negative(c)? {
                    return Ok(ConeVerdict::no(Witness::NegativeNu { k, q }));
                }
            }
        }
        Ok(ConeVerdict::yes())
    }

    pub fn norm_one(&self, v: &Valuation<C>) -> Result<PiLaurent<C>> {
        let k = v.homogeneous_degree().ok_or(UvalError::NotHomogeneous)?;
        let mut total = PiLaurent::zero();
        for b in self.nu_from_mu(k, &v.component_vector(k))? {
            total += &b.abs()?;
        }
        Ok(total)
    }
}

/// The ν-basis element `ν_{k,p}`.
pub fn nu<C: Coefficient>(n: usize, k: usize, p: usize) -> Result<Valuation<C>> {
    if !in_range(n, k, p) {
        return Err(UvalError::IndexOutOfRange { n, k, q: p });
    }
    Valuation::from_component(n, k, FourierGram::<C>::new(n)?.nu_basis(k, p)?)
}

/// Every ν-coordinate of every component is nonnegative.
pub fn is_crofton_positive<C: Coefficient>(v: &Valuation<C>) -> Result<ConeVerdict> {
    for k in v.degrees() {
        let b = nu_coeffs(&v.component(k), k)?;
        for (q, c) in q_range(v.n(), k).zip(&b) {
            if negative(c)? {
                return Ok(ConeVerdict::no(Witness::NegativeNu { k, q }));
            }
        }
    }
    Ok(ConeVerdict::yes())
}

fn int<C: Coefficient>(x: i64) -> PiLaurent<C> {
    PiLaurent::from_int(x)
}

/// Monotonicity test of a single component `Σ a_q μ_{k,q}`; `a_q` outside the
/// admissible range count as zero.
fn monotone_component<C: Coefficient>(n: usize, k: usize, v: &Valuation<C>) -> Result<Option<Witness>> {
    if k == 0 {
        return Ok(if negative(&v.coeff(0, 0))? { Some(Witness::NegativeEuler) } else { None });
    }
    let a = |q: usize| v.coeff(k, q);
    let (ni, ki) = (n as i64, k as i64);
    for q in k.saturating_sub(n)..=(k - 1) / 2 {
        let qi = q as i64;
        let slack = &(&a(q) * &int(ki - 2 * qi)) - &(&a(q + 1) * &int(ki - 2 * qi - 1));
        if negative(&slack)? {
            return Ok(Some(Witness::FirstFamily { k, q }));
        }
    }
    if k >= 2 {
        for q in k.saturating_sub(n + 1)..=(k - 2) / 2 {
            let qi = q as i64;
            // (n+q-k+3/2) a_{q+1} - (n+q-k+1) a_q, doubled
            let slack = &(&a(q + 1) * &int(2 * (ni + qi - ki) + 3)) - &(&a(q) * &int(2 * (ni + qi - ki + 1)));
            if negative(&slack)? {
                return Ok(Some(Witness::SecondFamily { k, q }));
            }
        }
    }
    Ok(None)
}

/// Monotone iff every homogeneous component satisfies both inequality families.
pub fn is_monotone<C: Coefficient>(v: &Valuation<C>) -> Result<ConeVerdict> {
    for k in v.degrees() {
        if let Some(w) = monotone_component(v.n(), k, v)? {
            return Ok(ConeVerdict::no(w));
        }
    }
    Ok(ConeVerdict::yes())
}

pub fn norm_inf<C: Coefficient>(v: &Valuation<C>) -> Result<PiLaurent<C>> {
    let k = v.homogeneous_degree().ok_or(UvalError::NotHomogeneous)?;
    let mut best = PiLaurent::zero();
    for c in v.component_vector(k) {
        let c = c.abs()?;
        if c.cmp_value(&best)? == Ordering::Greater {
            best = c;
        }
    }
    Ok(best)
}

pub fn norm_one<C: Coefficient>(v: &Valuation<C>) -> Result<PiLaurent<C>> {
    let k = v.homogeneous_degree().ok_or(UvalError::NotHomogeneous)?;
    let mut total = PiLaurent::zero();
    for b in nu_coeffs(v, k)? {
        total += &b.abs()?;
    }
    Ok(total)
}

/// Formal symbol of an invariant curvature measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CurvSymbol {
    B { k: usize, q: usize },
    Gamma { k: usize, q: usize },
}

impl fmt::Display for CurvSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvSymbol::B { k, q } => write!(f, "B[{k},{q}]"),
            CurvSymbol::Gamma { k, q } => write!(f, "Gamma[{k},{q}]"),
        }
    }
}

/// Formal combination of `B_{k,q}` (needs `k > 2q`) and `Γ_{k,q}` (needs `n > k - q`).
#[derive(Clone, Debug, PartialEq)]
pub struct CurvExpr<C> {
    n: usize,
    terms: BTreeMap<CurvSymbol, PiLaurent<C>>,
}

impl<C: Coefficient> CurvExpr<C> {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn valid_symbol(n: usize, s: CurvSymbol) -> bool {
        match s {
            CurvSymbol::B { k, q } => k > 2 * q && k < 2 * n,
            CurvSymbol::Gamma { k, q } => n + q > k && k >= 2 * q,
        }
    }

    pub fn add(&mut self, s: CurvSymbol, c: PiLaurent<C>) -> Result<()> {
        if !Self::valid_symbol(self.n, s) {
            return Err(UvalError::Invalid(format!("{s} is not defined for n = {}", self.n)));
        }
        let sum = match self.terms.remove(&s) {
            Some(old) => &old + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(s, sum);
        }
        Ok(())
    }

    pub fn coeff(&self, s: CurvSymbol) -> PiLaurent<C> {
        self.terms.get(&s).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (CurvSymbol, &PiLaurent<C>)> {
        self.terms.iter().map(|(s, c)| (*s, c))
    }

    /// Degrees `k` of the symbols present.
    pub fn degrees(&self) -> std::collections::BTreeSet<usize> {
        self.terms
            .keys()
            .map(|s| match s {
                CurvSymbol::B { k, .. } | CurvSymbol::Gamma { k, .. } => *k,
            })
            .collect()
    }

    /// All coefficients nonnegative, i.e. the curvature measure is nonnegative.
    pub fn is_nonnegative(&self) -> Result<bool> {
        for c in self.terms.values() {
            if negative(c)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl<C: Coefficient + DisplayCoefficient> fmt::Display for CurvExpr<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_sum(self.terms.iter().map(|(s, c)| (s.to_string(), c.clone()))))
    }
}

/// `c_{n,k,q} = 1/(q! (n-k+q)! (k-2q)! ω_{2n-k})`.
pub fn c_nkq<C: Coefficient>(n: usize, k: usize, q: usize) -> Option<PiLaurent<C>> {
    if n + q < k || 2 * q > k {
        return None;
    }
    let den = omega::<C>(2 * n - k).scale(&C::from_bigint(&(factorial(q) * factorial(n + q - k) * factorial(k - 2 * q))));
    PiLaurent::from_int(1).checked_div(&den).ok()
}

/// `c_{n,k,q} / c_{n,k',q'}`.
fn c_ratio<C: Coefficient>(n: usize, k: usize, q: usize, k2: usize, q2: usize) -> PiLaurent<C> {
    let a = c_nkq::<C>(n, k, q).expect("admissible");
    let b = c_nkq::<C>(n, k2, q2).expect("admissible");
    a.checked_div(&b).expect("monomial")
}

/// First variation `δ` of a valuation, as a formal combination of `B` and `Γ`.
pub fn first_variation<C: Coefficient>(v: &Valuation<C>) -> Result<CurvExpr<C>> {
    let n = v.n();
    let mut out = CurvExpr::zero(n);
    for (k, q, a) in v.terms() {
        if k == 0 {
            continue;
        }
        let (ni, ki, qi) = (n as i64, k as i64, q as i64);
        let two_a = a * &int(2);
        // Γ_{k-1,q}: (k-2q)^2
        if k > 2 * q {
            let c = c_ratio::<C>(n, k, q, k - 1, q).scale(&C::from_i64((ki - 2 * qi).pow(2)));
            out.add(CurvSymbol::Gamma { k: k - 1, q }, &two_a * &c)?;
        }
        if q >= 1 {
            // Γ_{k-1,q-1}: -(n+q-k) q
            let g = ni + qi - ki;
            if g != 0 {
                let c = c_ratio::<C>(n, k, q, k - 1, q - 1).scale(&C::from_i64(-g * qi));
                out.add(CurvSymbol::Gamma { k: k - 1, q: q - 1 }, &two_a * &c)?;
            }
            // B_{k-1,q-1}: (n+q-k+1/2) q
            let c = c_ratio::<C>(n, k, q, k - 1, q - 1).scale(&C::from_ratio((2 * g + 1) * qi, 2));
            out.add(CurvSymbol::B { k: k - 1, q: q - 1 }, &two_a * &c)?;
        }
        // B_{k-1,q}: -(k-2q)(k-2q-1)
        let m = (ki - 2 * qi) * (ki - 2 * qi - 1);
        if m != 0 {
            let c = c_ratio::<C>(n, k, q, k - 1, q).scale(&C::from_i64(-m));
            out.add(CurvSymbol::B { k: k - 1, q }, &two_a * &c)?;
        }
    }
    Ok(out)
}

/// Monotonicity via the first variation: `δv ≥ 0` and nonnegative Euler part.
pub fn is_monotone_by_variation<C: Coefficient>(v: &Valuation<C>) -> Result<bool> {
    Ok(first_variation(v)?.is_nonnegative()? && !negative(&v.coeff(0, 0))?)
}
