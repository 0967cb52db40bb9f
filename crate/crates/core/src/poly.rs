//! Global polynomial representatives of unitary valuations.
//!
//! Polynomials live in two commuting variables, either `(t, u)` or `(t, s)`,
//! graded by `deg t = 1`, `deg u = deg s = 2` and linked by `u = 4s - t²`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::scalar::{binomial, Coefficient, DisplayCoefficient, PiLaurent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Chart {
    /// Monomials `t^a u^b`.
    TU,
    /// Monomials `t^a s^b`.
    ST,
}

impl Chart {
    fn second_var(self) -> &'static str {
        match self {
            Chart::TU => "u",
            Chart::ST => "s",
        }
    }
}

/// Sparse polynomial; keys are `(degree, b)` for the monomial `t^{degree-2b} x^b`
/// where `x` is `u` or `s` according to the chart.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedPoly<C> {
    chart: Chart,
    coeffs: BTreeMap<(usize, usize), PiLaurent<C>>,
}

impl<C: Coefficient> GradedPoly<C> {
    pub fn zero(chart: Chart) -> Self {
        Self { chart, coeffs: BTreeMap::new() }
    }

    pub fn one(chart: Chart) -> Self {
        Self::monomial(chart, 0, 0, PiLaurent::one())
    }

    /// `c · t^a x^b`.
    pub fn monomial(chart: Chart, a: usize, b: usize, c: PiLaurent<C>) -> Self {
        let mut p = Self::zero(chart);
        p.add_term(a, b, c);
        p
    }

    pub fn t() -> Self {
        Self::monomial(Chart::TU, 1, 0, PiLaurent::one())
    }

    pub fn u() -> Self {
        Self::monomial(Chart::TU, 0, 1, PiLaurent::one())
    }

    pub fn s() -> Self {
        Self::monomial(Chart::ST, 0, 1, PiLaurent::one())
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Terms as `(a, b, coefficient)` sorted by degree, then by `b`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &PiLaurent<C>)> {
        self.coeffs.iter().map(|((d, b), c)| (d - 2 * b, *b, c))
    }

    pub fn coeff(&self, a: usize, b: usize) -> PiLaurent<C> {
        self.coeffs.get(&(a + 2 * b, b)).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.keys().map(|(d, _)| *d).max()
    }

    pub fn add_term(&mut self, a: usize, b: usize, c: PiLaurent<C>) {
        if c.is_zero() {
            return;
        }
        let key = (a + 2 * b, b);
        let sum = match self.coeffs.remove(&key) {
            Some(existing) => &existing + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.coeffs.insert(key, sum);
        }
    }

    pub fn component(&self, degree: usize) -> Self {
        Self {
            chart: self.chart,
            coeffs: self
                .coeffs
                .range((degree, 0)..=(degree, usize::MAX))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn truncate(&self, max_degree: usize) -> Self {
        Self {
            chart: self.chart,
            coeffs: self
                .coeffs
                .iter()
                .filter(|((d, _), _)| *d <= max_degree)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &PiLaurent<C>) -> Self {
        let mut out = Self::zero(self.chart);
        for (a, b, v) in self.terms() {
            out.add_term(a, b, v * c);
        }
        out
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one(self.chart);
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Substitute `u = 4s - t²` or `s = (u + t²)/4`, landing in `target`.
    pub fn change_vars(&self, target: Chart) -> Self {
        if target == self.chart {
            return self.clone();
        }
        let mut out = Self::zero(target);
        for (a, b, c) in self.terms() {
            for j in 0..=b {
                let binom = binomial(b, j);
                // TU -> ST: u^b = Σ_j C(b,j) (4s)^j (-t²)^{b-j}
                // ST -> TU: s^b = 4^{-b} Σ_j C(b,j) u^j (t²)^{b-j}
                let factor = match target {
                    Chart::ST => {
                        let sign = if (b - j) % 2 == 0 { 1 } else { -1 };
                        PiLaurent::from_bigint(&(binom * sign * (num_bigint::BigInt::from(4).pow(j as u32))))
                    }
                    Chart::TU => PiLaurent::big_ratio(&binom, &num_bigint::BigInt::from(4).pow(b as u32)),
                };
                out.add_term(a + 2 * (b - j), j, c * &factor);
            }
        }
        out
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&PiLaurent<C>) -> PiLaurent<D>) -> GradedPoly<D> {
        let mut out = GradedPoly::zero(self.chart);
        for (a, b, c) in self.terms() {
            out.add_term(a, b, f(c));
        }
        out
    }

    fn aligned<'a>(&'a self, other: &'a Self) -> (std::borrow::Cow<'a, Self>, std::borrow::Cow<'a, Self>) {
        use std::borrow::Cow;
        if self.chart == other.chart {
            (Cow::Borrowed(self), Cow::Borrowed(other))
        } else {
            (Cow::Borrowed(self), Cow::Owned(other.change_vars(self.chart)))
        }
    }
}

/// `f_k` by the three-term recursion `k s f_k + (k+1) t f_{k+1} + (k+2) f_{k+2} = 0`,
/// seeded with `f_1 = t`, `f_2 = s - t²/2`; returned in the `(t, u)` chart.
pub fn f_recursive<C: Coefficient>(k: usize) -> GradedPoly<C> {
    assert!(k >= 1, "f_k is defined for k >= 1");
    let t = GradedPoly::<C>::monomial(Chart::ST, 1, 0, PiLaurent::one());
    let s = GradedPoly::<C>::s();
    let mut prev = t.clone();
    let mut cur = &s - &t.pow(2).scale(&PiLaurent::ratio(1, 2));
    if k == 1 {
        return prev.change_vars(Chart::TU);
    }
    for m in 1..=k.saturating_sub(2) {
        let lhs = &(&s * &prev).scale(&PiLaurent::from_int(m as i64))
            + &(&t * &cur).scale(&PiLaurent::from_int(m as i64 + 1));
        let next = lhs.scale(&PiLaurent::ratio(-1, m as i64 + 2));
        prev = cur;
        cur = next;
    }
    cur.change_vars(Chart::TU)
}

/// `f_k = 1/(k(-2)^{k-1}) Σ_q (-1)^q C(k,2q) t^{k-2q} u^q`, from `log|1 + z/2|²`
/// with `z = t + i√u`.
pub fn f_closed<C: Coefficient>(k: usize) -> GradedPoly<C> {
    assert!(k >= 1, "f_k is defined for k >= 1");
    let den = num_bigint::BigInt::from(k) * num_bigint::BigInt::from(-2).pow((k - 1) as u32);
    let mut out = GradedPoly::zero(Chart::TU);
    for q in 0..=k / 2 {
        let sign = if q % 2 == 0 { 1 } else { -1 };
        let num = binomial(k, 2 * q) * sign;
        out.add_term(k - 2 * q, q, PiLaurent::big_ratio(&num, &den));
    }
    out
}

impl<C: Coefficient> Add for &GradedPoly<C> {
    type Output = GradedPoly<C>;
    fn add(self, rhs: Self) -> GradedPoly<C> {
        let (a, b) = self.aligned(rhs);
        let mut out = a.into_owned();
        for (x, y, c) in b.terms() {
            out.add_term(x, y, c.clone());
        }
        out
    }
}

impl<C: Coefficient> Sub for &GradedPoly<C> {
    type Output = GradedPoly<C>;
    fn sub(self, rhs: Self) -> GradedPoly<C> {
        self + &(-rhs)
    }
}

impl<C: Coefficient> Neg for &GradedPoly<C> {
    type Output = GradedPoly<C>;
    fn neg(self) -> GradedPoly<C> {
        self.scale(&PiLaurent::from_int(-1))
    }
}

impl<C: Coefficient> Mul for &GradedPoly<C> {
    type Output = GradedPoly<C>;
    fn mul(self, rhs: Self) -> GradedPoly<C> {
        let (a, b) = self.aligned(rhs);
        let mut out = GradedPoly::zero(self.chart);
        for (a1, b1, c1) in a.terms() {
            for (a2, b2, c2) in b.terms() {
                out.add_term(a1 + a2, b1 + b2, c1 * c2);
            }
        }
        out
    }
}

impl<C: Coefficient + DisplayCoefficient> fmt::Display for GradedPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let x = self.chart.second_var();
        for (i, (a, b, c)) in self.terms().enumerate() {
            let mut mono = Vec::new();
            match a {
                0 => {}
                1 => mono.push("t".to_string()),
                _ => mono.push(format!("t^{a}")),
            }
            match b {
                0 => {}
                1 => mono.push(x.to_string()),
                _ => mono.push(format!("{x}^{b}")),
            }
            let mono = mono.join("*");
            let (neg, coeff) = c.render_signed();
            let sep = match (i, neg) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            let body = match (coeff.as_str(), mono.is_empty()) {
                ("1", true) => "1".to_string(),
                ("1", false) => mono,
                (c, true) => c.to_string(),
                (c, false) => format!("{c}*{mono}"),
            };
            write!(f, "{sep}{body}")?;
        }
        Ok(())
    }
}

impl Serialize for GradedPoly<BigRational> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct TermTU<'a> {
            t: usize,
            u: usize,
            coeff: &'a PiLaurent<BigRational>,
        }
        #[derive(Serialize)]
        struct TermST<'a> {
            t: usize,
            s: usize,
            coeff: &'a PiLaurent<BigRational>,
        }
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for (a, b, coeff) in self.terms() {
            match self.chart {
                Chart::TU => seq.serialize_element(&TermTU { t: a, u: b, coeff })?,
                Chart::ST => seq.serialize_element(&TermST { t: a, s: b, coeff })?,
            }
        }
        seq.end()
    }
}
