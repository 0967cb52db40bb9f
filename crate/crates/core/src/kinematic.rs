//! Poincaré pairing, Tasaki matrices and kinematic tensors.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Result, UvalError};
use crate::linalg::Matrix;
use crate::scalar::{binomial, double_factorial, factorial, omega, Coefficient, PiLaurent};
use crate::sl2::{primitive_general, primitive_indices};
use crate::valuation::{dim_val, q_range, Valuation};

type M<C> = Matrix<PiLaurent<C>>;

/// `(a, b)`: the degree-`2n` part of `a·b`, read off as the coefficient of `vol`.
pub fn pairing_pd<C: Coefficient>(a: &Valuation<C>, b: &Valuation<C>) -> Result<PiLaurent<C>> {
    let n = a.n();
    if n != b.n() {
        return Err(UvalError::DimensionMismatch(n, b.n()));
    }
    // only complementary degrees contribute to the top component
    let mut total = PiLaurent::zero();
    for k in a.degrees() {
        let bk = b.component(2 * n - k);
        if bk.is_zero() {
            continue;
        }
        total += &a.component(k).multiply(&bk)?.coeff(2 * n, n);
    }
    Ok(total)
}

/// `⟨a, b⟩ = (a, F̂b)`.
pub fn pairing_fourier<C: Coefficient>(a: &Valuation<C>, b: &Valuation<C>) -> Result<PiLaurent<C>> {
    pairing_pd(a, &b.fourier())
}

fn check_middle(n: usize, k: usize) -> Result<()> {
    if k > n {
        return Err(UvalError::DegreeOutOfRange { n, k });
    }
    Ok(())
}

/// `M_ij = (τ_{k,i}, F̂τ_{k,j})`, `0 ≤ k ≤ n`.
pub fn tasaki_gram<C: Coefficient>(n: usize, k: usize) -> Result<M<C>> {
    check_middle(n, k)?;
    let taus: Vec<Valuation<C>> = (0..=k / 2).map(|i| Valuation::tau(n, k, i)).collect::<Result<_>>()?;
    let duals: Vec<Valuation<C>> = taus.iter().map(Valuation::fourier).collect();
    let p = taus.len();
    let mut m = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            m[(i, j)] = pairing_pd(&taus[i], &duals[j])?;
        }
    }
    Ok(m)
}

/// `T^n_k` as the inverse of the Gram matrix of `τ_{k,·}` against `F̂τ_{k,·}`.
pub fn tasaki_matrix_oracle<C: Coefficient>(n: usize, k: usize) -> Result<M<C>> {
    tasaki_gram(n, k)?.inverse()
}

fn df(m: i64) -> BigInt {
    double_factorial(m).expect("argument >= -1")
}

/// `T^n_k` from the double-factorial sum over `r ≥ max(i, j)`.
pub fn tasaki_matrix_closed<C: Coefficient>(n: usize, k: usize) -> Result<M<C>> {
    check_middle(n, k)?;
    let p = k / 2;
    let prefactor = (&omega::<C>(k) * &omega::<C>(2 * n - k)).shift_pi(-(n as i32));
    let ni = n as i64;
    let entry = |i: usize, j: usize| -> PiLaurent<C> {
        let (ii, jj) = (i as i64, j as i64);
        let mut sum = BigRational::zero();
        for r in i.max(j)..=p {
            let ri = r as i64;
            let num = factorial(2 * n - 2 * r - k)
                * factorial(n - r)
                * factorial(k - 2 * i)
                * factorial(k - 2 * j)
                * df(2 * ni - 2 * ri + 1)
                * df(2 * ni - 4 * ri + 1)
                * df(2 * ri - 2 * ii - 1)
                * df(2 * ri - 2 * jj - 1);
            let den = binomial(n, 2 * r)
                * (BigInt::one() << (3 * r))
                * factorial(k - 2 * r)
                * factorial(2 * n - 4 * r)
                * factorial(2 * r - 2 * i)
                * factorial(2 * r - 2 * j)
                * df(2 * ni - 2 * ri - 2 * ii + 1)
                * df(2 * ni - 2 * ri - 2 * jj + 1);
            sum += BigRational::new(num, den);
        }
        if (i + j) % 2 == 1 {
            sum = -sum;
        }
        prefactor.scale(&C::from_big_ratio(sum.numer(), sum.denom()))
    };
    Ok(Matrix::from_fn(p + 1, p + 1, entry))
}

/// Basis attached to one leg of a tensor block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LegBasis {
    /// `τ_{d,i}`, living in degree `d`.
    Tau(usize),
    /// `F̂τ_{d,i}`, living in degree `2n - d`.
    FourierTau(usize),
}

impl LegBasis {
    pub fn degree(self, n: usize) -> usize {
        match self {
            LegBasis::Tau(d) => d,
            LegBasis::FourierTau(d) => 2 * n - d,
        }
    }

    pub fn dual(self) -> Self {
        match self {
            LegBasis::Tau(d) => LegBasis::FourierTau(d),
            LegBasis::FourierTau(d) => LegBasis::Tau(d),
        }
    }

    /// Canonical choice for a left leg of degree `a`.
    pub fn left(n: usize, a: usize) -> Self {
        if a <= n {
            LegBasis::Tau(a)
        } else {
            LegBasis::FourierTau(2 * n - a)
        }
    }

    /// Canonical choice for a right leg of degree `b`.
    pub fn right(n: usize, b: usize) -> Self {
        LegBasis::left(n, 2 * n - b).dual()
    }

    pub fn len(self, n: usize) -> usize {
        match self {
            LegBasis::Tau(d) | LegBasis::FourierTau(d) => dim_val(n, d).expect("degree in range"),
        }
    }

    pub fn is_empty(self, n: usize) -> bool {
        self.len(n) == 0
    }

    /// Basis elements. The `τ` degree is always at most `n`, so they are independent.
    pub fn elements<C: Coefficient>(self, n: usize) -> Vec<Valuation<C>> {
        match self {
            LegBasis::Tau(d) => q_range(n, d).map(|i| Valuation::tau(n, d, i).expect("in range")).collect(),
            LegBasis::FourierTau(d) => LegBasis::Tau(d).elements::<C>(n).iter().map(Valuation::fourier).collect(),
        }
    }

    /// Coordinates of `v` (homogeneous of the leg degree) in this basis.
    pub fn coordinates<C: Coefficient>(self, v: &Valuation<C>) -> Vec<PiLaurent<C>> {
        match self {
            LegBasis::Tau(d) => v.tau_coordinates(d),
            LegBasis::FourierTau(d) => v.fourier().tau_coordinates(d),
        }
    }

    pub fn label(self) -> String {
        match self {
            LegBasis::Tau(d) => format!("tau[{d},*]"),
            LegBasis::FourierTau(d) => format!("F(tau[{d},*])"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block<C> {
    pub left: LegBasis,
    pub right: LegBasis,
    pub matrix: M<C>,
}

/// `Σ_{(a,b)} Σ_{ij} m_ij e^{left}_i ⊗ e^{right}_j`, keyed by bidegree `(a, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KinematicTensor<C> {
    n: usize,
    mu: Valuation<C>,
    blocks: BTreeMap<(usize, usize), Block<C>>,
    cpn_normalized: bool,
}

impl<C: Coefficient> KinematicTensor<C> {
    fn empty(n: usize, mu: Valuation<C>) -> Self {
        Self { n, mu, blocks: BTreeMap::new(), cpn_normalized: false }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The valuation whose kinematic formula this is.
    pub fn mu(&self) -> &Valuation<C> {
        &self.mu
    }

    pub fn is_cpn_normalized(&self) -> bool {
        self.cpn_normalized
    }

    pub fn block(&self, a: usize, b: usize) -> Option<&Block<C>> {
        self.blocks.get(&(a, b))
    }

    pub fn blocks(&self) -> impl Iterator<Item = ((usize, usize), &Block<C>)> {
        self.blocks.iter().map(|(k, v)| (*k, v))
    }

    fn accumulate(&mut self, a: usize, b: usize, left: LegBasis, right: LegBasis, m: &M<C>) {
        let entry = self.blocks.entry((a, b)).or_insert_with(|| Block {
            left,
            right,
            matrix: Matrix::zeros(left.len(self.n), right.len(self.n)),
        });
        debug_assert_eq!((entry.left, entry.right), (left, right));
        entry.matrix = &entry.matrix + m;
    }

    fn prune(mut self) -> Self {
        self.blocks.retain(|_, b| b.matrix.entries().any(|x| !x.is_zero()));
        self
    }

    /// Block `(a, b)` rewritten in the μ bases of both legs.
    pub fn mu_block(&self, a: usize, b: usize) -> M<C> {
        let n = self.n;
        let rows = dim_val(n, a).unwrap_or(0);
        let cols = dim_val(n, b).unwrap_or(0);
        let Some(block) = self.blocks.get(&(a, b)) else {
            return Matrix::zeros(rows, cols);
        };
        let change = |basis: LegBasis, deg: usize| -> M<C> {
            let els = basis.elements::<C>(n);
            let vecs: Vec<Vec<PiLaurent<C>>> = els.iter().map(|e| e.component_vector(deg)).collect();
            Matrix::from_fn(dim_val(n, deg).unwrap_or(0), vecs.len(), |i, j| vecs[j][i].clone())
        };
        let pl = change(block.left, a);
        let pr = change(block.right, b);
        let tmp = pl.matmul(&block.matrix).expect("shapes agree");
        tmp.matmul(&pr.transpose()).expect("shapes agree")
    }

    /// Apply `F̂ ⊗ F̂`: block `(a, b)` moves to `(2n-a, 2n-b)` with dual leg bases.
    pub fn fourier_legs(&self) -> Self {
        let n = self.n;
        let mut out = Self::empty(n, self.mu.fourier());
        out.cpn_normalized = self.cpn_normalized;
        for ((a, b), block) in &self.blocks {
            out.blocks.insert(
                (2 * n - a, 2 * n - b),
                Block { left: block.left.dual(), right: block.right.dual(), matrix: block.matrix.clone() },
            );
        }
        out
    }

    /// Divide by `vol(CP^n) = π^n/n!`, turning the Haar measure into a probability measure.
    pub fn cpn_normalize(&self) -> Result<Self> {
        if self.cpn_normalized {
            return Err(UvalError::AlreadyNormalized);
        }
        let factor = PiLaurent::<C>::from_bigint(&factorial(self.n)).shift_pi(-(self.n as i32));
        let mut out = self.clone();
        for block in out.blocks.values_mut() {
            block.matrix = block.matrix.scale(&factor);
        }
        out.cpn_normalized = true;
        Ok(out)
    }

    /// Equality of the underlying tensors, independent of block bases.
    pub fn same_tensor(&self, other: &Self) -> bool {
        if self.n != other.n {
            return false;
        }
        let keys: std::collections::BTreeSet<_> = self.blocks.keys().chain(other.blocks.keys()).copied().collect();
        keys.into_iter().all(|(a, b)| self.mu_block(a, b) == other.mu_block(a, b))
    }
}

/// `Σ_ij K_ij (m·φ_i) ⊗ ψ_j` over all degrees, with `φ` the canonical left basis,
/// `ψ = F̂φ` and `K` the inverse Gram matrix.
pub fn kinematic<C: Coefficient>(n: usize, m: &Valuation<C>) -> Result<KinematicTensor<C>> {
    if m.n() != n {
        return Err(UvalError::DimensionMismatch(n, m.n()));
    }
    let mut out = KinematicTensor::empty(n, m.clone());
    for k in 0..=2 * n {
        let left_k = LegBasis::left(n, k);
        let right = left_k.dual();
        let b = 2 * n - k;
        let phis = left_k.elements::<C>(n);
        let mut gram = Matrix::zeros(phis.len(), phis.len());
        for i in 0..phis.len() {
            for j in 0..phis.len() {
                gram[(i, j)] = pairing_pd(&phis[i], &phis[j].fourier())?;
            }
        }
        let kmat = gram.inverse()?;
        for d in m.degrees() {
            let a = k + d;
            if a > 2 * n {
                continue;
            }
            let md = m.component(d);
            let left = LegBasis::left(n, a);
            let mut c = Matrix::zeros(phis.len(), left.len(n));
            for (i, phi) in phis.iter().enumerate() {
                for (l, x) in left.coordinates(&md.multiply(phi)?).into_iter().enumerate() {
                    c[(i, l)] = x;
                }
            }
            let contribution = c.transpose().matmul(&kmat)?;
            out.accumulate(a, b, left, right, &contribution);
        }
    }
    Ok(out.prune())
}

/// `a(m) = (F̂ ⊗ F̂) k(F̂m)`.
pub fn additive_kinematic<C: Coefficient>(n: usize, m: &Valuation<C>) -> Result<KinematicTensor<C>> {
    Ok(kinematic(n, &m.fourier())?.fourier_legs())
}

/// Coefficient of `π_{k,r} ⊗ F̂π_{k,r}` in `k(χ)`, including `ω_k ω_{2n-k}/π^n`.
pub fn pkf_coefficient<C: Coefficient>(n: usize, k: usize, r: usize) -> PiLaurent<C> {
    let (ni, ri) = (n as i64, r as i64);
    let num = factorial(2 * n - 2 * r - k) * factorial(n - r) * df(2 * ni - 2 * ri + 1);
    let den = (BigInt::one() << (3 * r))
        * factorial(k - 2 * r)
        * factorial(2 * n - 4 * r)
        * df(2 * ni - 4 * ri + 1)
        * binomial(n, 2 * r);
    (&omega::<C>(k) * &omega::<C>(2 * n - k))
        .shift_pi(-(n as i32))
        .scale(&C::from_big_ratio(&num, &den))
}

/// `k(χ)` assembled from the primitive-basis expansion, then checked against
/// the inverse-Gram route.
pub fn principal_kinematic<C: Coefficient>(n: usize) -> Result<KinematicTensor<C>> {
    let via_primitives = principal_kinematic_primitive::<C>(n)?;
    let via_gram = kinematic(n, &Valuation::chi(n))?;
    if via_primitives != via_gram {
        let bad = via_gram
            .blocks
            .keys()
            .chain(via_primitives.blocks.keys())
            .find(|key| via_gram.blocks.get(key) != via_primitives.blocks.get(key))
            .copied();
        return Err(UvalError::RouteMismatch(format!("principal kinematic formula, n = {n}, block {bad:?}")));
    }
    Ok(via_gram)
}

/// Route (a) alone: `Σ_k Σ_r c_{k,r} π_{k,r} ⊗ F̂π_{k,r}`.
pub fn principal_kinematic_primitive<C: Coefficient>(n: usize) -> Result<KinematicTensor<C>> {
    let mut out = KinematicTensor::empty(n, Valuation::chi(n));
    for k in 0..=2 * n {
        let left = LegBasis::left(n, k);
        let right = left.dual();
        let mut total = Matrix::zeros(left.len(n), right.len(n));
        for r in primitive_indices(n, k) {
            let p = primitive_general::<C>(n, k, r)?;
            let x = left.coordinates(&p);
            let y = right.coordinates(&p.fourier());
            let c = pkf_coefficient::<C>(n, k, r);
            let outer = Matrix::from_fn(x.len(), y.len(), |i, j| &(&x[i] * &y[j]) * &c);
            total = &total + &outer;
        }
        out.accumulate(k, 2 * n - k, left, right, &total);
    }
    Ok(out.prune())
}

/// `(π_{k,r}, F̂π_{k,r})` in closed form.
pub fn primitive_pairing_closed<C: Coefficient>(n: usize, k: usize, r: usize) -> Result<PiLaurent<C>> {
    if k > 2 * n || 2 * r > k.min(2 * n - k) {
        return Err(UvalError::IndexOutOfRange { n, k, q: r });
    }
    let (ni, ri) = (n as i64, r as i64);
    let num = (BigInt::one() << (3 * r))
        * binomial(n, 2 * r)
        * factorial(k - 2 * r)
        * factorial(2 * n - 4 * r)
        * df(2 * ni - 4 * ri + 1);
    let den = factorial(n - r) * factorial(2 * n - 2 * r - k) * df(2 * ni - 2 * ri + 1);
    PiLaurent::<C>::pi_pow(n as i32)
        .checked_div(&(&omega::<C>(k) * &omega::<C>(2 * n - k)))
        .map(|x| x.scale(&C::from_big_ratio(&num, &den)))
}

/// Value of a leg basis on a degree-one complex subvariety of `CP^n` of complex
/// dimension `dim`: `τ_{2k,q}(V) = C(k,q) π^k/k!` and `F̂τ_{2k,q}(W) = C(k,q) π^{n-k}/(n-k)!`.
fn linear_subvariety_values<C: Coefficient>(n: usize, basis: LegBasis, dim: usize) -> Result<Vec<PiLaurent<C>>> {
    let (d, expected_dim) = match basis {
        LegBasis::Tau(d) => (d, d / 2),
        LegBasis::FourierTau(d) => (d, n - d / 2),
    };
    if d % 2 == 1 || dim != expected_dim {
        return Err(UvalError::Invalid(format!("{} does not pair with a variety of dimension {dim}", basis.label())));
    }
    let kk = d / 2;
    Ok((0..=kk)
        .map(|q| PiLaurent::big_ratio(&binomial(kk, q), &factorial(dim)).shift_pi(dim as i32))
        .collect())
}

/// Mean intersection count of complex projective subspaces of dimensions `a`, `b`
/// with `a + b = n` under the probability Haar measure. Bézout predicts 1.
pub fn bezout_check<C: Coefficient>(n: usize, a: usize, b: usize) -> Result<PiLaurent<C>> {
    if a == 0 || b == 0 || a + b != n {
        return Err(UvalError::Invalid(format!("need 1 <= a, b and a + b = n; got n = {n}, a = {a}, b = {b}")));
    }
    let t = principal_kinematic::<C>(n)?.cpn_normalize()?;
    let block = t
        .block(2 * a, 2 * b)
        .ok_or_else(|| UvalError::Invalid(format!("no block of bidegree ({}, {})", 2 * a, 2 * b)))?;
    let v = linear_subvariety_values::<C>(n, block.left, a)?;
    let w = linear_subvariety_values::<C>(n, block.right, b)?;
    let mut total = PiLaurent::zero();
    for (i, vi) in v.iter().enumerate() {
        for (j, wj) in w.iter().enumerate() {
            total += &(&(vi * wj) * &block.matrix[(i, j)]);
        }
    }
    Ok(total)
}

/// Write `m = c · m'` with `m'` as simple as possible: if every nonzero entry is
/// a rational multiple of the same `π^e`, pull out `π^e · gcd(num)/lcm(den)`.
pub fn factor_common(m: &M<BigRational>) -> (PiLaurent<BigRational>, M<BigRational>) {
    let mut exponent = None;
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    for x in m.entries().filter(|x| !x.is_zero()) {
        let Some((e, c)) = x.as_monomial() else {
            return (PiLaurent::one(), m.clone());
        };
        if *exponent.get_or_insert(e) != e {
            return (PiLaurent::one(), m.clone());
        }
        num_gcd = num_gcd.gcd(c.numer());
        den_lcm = den_lcm.lcm(c.denom());
    }
    let Some(e) = exponent else {
        return (PiLaurent::one(), m.clone());
    };
    let factor = PiLaurent::monomial(BigRational::new(num_gcd.abs(), den_lcm), e);
    let reduced = m.map(|x| x.checked_div(&factor).expect("monomial factor"));
    (factor, reduced)
}

/// `c * [[..]]` with the common factor pulled out, or the bare matrix when it is 1.
pub fn render_factored(m: &M<BigRational>) -> String {
    let (factor, reduced) = factor_common(m);
    if factor.is_one() {
        reduced.to_string()
    } else {
        format!("{factor} * {reduced}")
    }
}

impl fmt::Display for KinematicTensor<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ((a, b), block) in &self.blocks {
            writeln!(
                f,
                "({a},{b}) {} x {}: {}",
                block.left.label(),
                block.right.label(),
                render_factored(&block.matrix)
            )?;
        }
        Ok(())
    }
}

impl Serialize for KinematicTensor<BigRational> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct BlockJson<'a> {
            a: usize,
            b: usize,
            left_basis: String,
            right_basis: String,
            matrix: Vec<&'a [PiLaurent<BigRational>]>,
        }
        let blocks: Vec<BlockJson<'_>> = self
            .blocks
            .iter()
            .map(|((a, b), block)| BlockJson {
                a: *a,
                b: *b,
                left_basis: block.left.label(),
                right_basis: block.right.label(),
                matrix: (0..block.matrix.rows()).map(|i| block.matrix.row(i)).collect(),
            })
            .collect();
        let mut s = serializer.serialize_struct("KinematicTensor", 4)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("mu", &self.mu)?;
        s.serialize_field("cpn_normalized", &self.cpn_normalized)?;
        s.serialize_field("blocks", &blocks)?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl2::primitive_general;
    use crate::{ExactMatrix, ExactValuation as V, Rational, Scalar};
    use std::cmp::Ordering;

    fn mat(factor: Scalar, rows: &[&[i64]]) -> ExactMatrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|x| &factor * &Scalar::from_int(*x)).collect()).collect())
            .unwrap()
    }

    #[test]
    fn pairing_examples() {
        for n in 0..5 {
            assert_eq!(pairing_pd(&V::chi(n), &V::vol(n)).unwrap(), Scalar::one());
            assert_eq!(pairing_fourier(&V::chi(n), &V::chi(n)).unwrap(), Scalar::one());
        }
        let t = V::from_monomial(1, &crate::ExactPoly::t());
        assert_eq!(pairing_pd(&t, &t).unwrap(), Scalar::monomial(Rational::from_integer(2.into()), -1));
        let t20 = V::tau(2, 2, 0).unwrap();
        assert_eq!(pairing_pd(&t20, &t20).unwrap(), Scalar::from_int(3));
        assert_eq!(pairing_fourier(&t20, &t20).unwrap(), Scalar::from_int(3));
        assert!(pairing_pd(&V::chi(1), &V::chi(2)).is_err());
    }

    #[test]
    fn pairing_fourier_is_symmetric() {
        for n in 1..=4usize {
            for k in 0..=2 * n {
                let basis: Vec<V> = q_range(n, k).map(|q| V::mu(n, k, q).unwrap()).collect();
                for a in &basis {
                    for b in &basis {
                        assert_eq!(pairing_fourier(a, b).unwrap(), pairing_fourier(b, a).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn gram_and_tasaki_examples() {
        assert_eq!(tasaki_gram::<Rational>(2, 2).unwrap(), mat(Scalar::one(), &[&[3, 1], &[1, 3]]));
        assert_eq!(tasaki_matrix_oracle::<Rational>(2, 2).unwrap(), mat(Scalar::ratio(1, 8), &[&[3, -1], &[-1, 3]]));
        assert_eq!(tasaki_matrix_oracle::<Rational>(1, 0).unwrap(), mat(Scalar::one(), &[&[1]]));
        let t33 = Matrix::from_rows(vec![
            vec![Scalar::monomial(Rational::new(2.into(), 3.into()), -1), Scalar::monomial(Rational::new((-2).into(), 9.into()), -1)],
            vec![Scalar::monomial(Rational::new((-2).into(), 9.into()), -1), Scalar::monomial(Rational::new(10.into(), 27.into()), -1)],
        ])
        .unwrap();
        assert_eq!(tasaki_matrix_closed::<Rational>(3, 3).unwrap(), t33);
        assert_eq!(
            tasaki_matrix_closed::<Rational>(4, 4).unwrap(),
            mat(Scalar::ratio(1, 384), &[&[45, -15, 9], &[-15, 19, -15], &[9, -15, 45]])
        );
        assert!(tasaki_matrix_closed::<Rational>(2, 3).is_err());
    }

    #[test]
    fn closed_and_oracle_agree() {
        for n in 0..=5usize {
            for k in 0..=n {
                assert_eq!(
                    tasaki_matrix_closed::<Rational>(n, k).unwrap(),
                    tasaki_matrix_oracle::<Rational>(n, k).unwrap(),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn tasaki_structure() {
        for n in 1..=5usize {
            for k in 0..=n {
                let t = tasaki_matrix_closed::<Rational>(n, k).unwrap();
                assert!(t.is_symmetric());
                for x in t.entries().filter(|x| !x.is_zero()) {
                    let (e, _) = x.as_monomial().unwrap();
                    assert_eq!(e, -((k % 2) as i32));
                }
                for minor in t.leading_minors().unwrap() {
                    assert_eq!(minor.sign().unwrap(), Ordering::Greater);
                }
                if k % 2 == 0 {
                    let l = k / 2;
                    for i in 0..=l {
                        for j in 0..=l {
                            assert_eq!(t[(i, j)], t[(l - i, l - j)]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn principal_formula_small_cases() {
        let k1 = principal_kinematic::<Rational>(1).unwrap();
        assert_eq!(k1.blocks().count(), 3);
        assert_eq!(k1.block(0, 2).unwrap().matrix, mat(Scalar::one(), &[&[1]]));
        assert_eq!(k1.block(2, 0).unwrap().matrix, mat(Scalar::one(), &[&[1]]));
        assert_eq!(k1.block(1, 1).unwrap().matrix, mat(Scalar::monomial(Rational::from_integer(2.into()), -1), &[&[1]]));
        for n in 1..=4 {
            let k = principal_kinematic::<Rational>(n).unwrap();
            let b = k.block(0, 2 * n).unwrap();
            assert_eq!((b.left, b.right), (LegBasis::Tau(0), LegBasis::FourierTau(0)));
            assert_eq!(b.matrix, mat(Scalar::one(), &[&[1]]));
            // symmetric tensor
            for ((a, bb), _) in k.blocks() {
                assert_eq!(k.mu_block(a, bb), k.mu_block(bb, a).transpose());
            }
        }
        let k2 = principal_kinematic::<Rational>(2).unwrap();
        assert_eq!(k2.block(2, 2).unwrap().matrix, mat(Scalar::ratio(1, 8), &[&[3, -1], &[-1, 3]]));
    }

    #[test]
    fn top_degree_multiplier() {
        let k = kinematic(2, &V::vol(2)).unwrap();
        assert_eq!(k.blocks().map(|(key, _)| key).collect::<Vec<_>>(), vec![(4, 4)]);
        assert_eq!(k.mu_block(4, 4), mat(Scalar::one(), &[&[1]]));
    }

    #[test]
    fn length_of_intersection_in_cp4() {
        let n = 4;
        let k = kinematic(n, &V::tau(n, 1, 0).unwrap()).unwrap();
        let raw = k.block(4, 5).unwrap();
        assert_eq!((raw.left, raw.right), (LegBasis::Tau(4), LegBasis::FourierTau(3)));
        let rows: &[&[i64]] = &[&[30, -6], &[-3, 7], &[0, 0]];
        assert_eq!(raw.matrix, mat(Scalar::ratio(1, 120), rows));
        let normalized = k.cpn_normalize().unwrap();
        assert_eq!(
            normalized.block(4, 5).unwrap().matrix,
            mat(Scalar::monomial(Rational::new(1.into(), 5.into()), -4), rows)
        );
        assert_eq!(normalized.cpn_normalize(), Err(UvalError::AlreadyNormalized));
    }

    #[test]
    fn additive_formula_in_c4() {
        let n = 4;
        let a = additive_kinematic(n, &V::mu(n, 7, 3).unwrap()).unwrap();
        let b43 = a.block(4, 3).unwrap();
        assert_eq!((b43.left, b43.right), (LegBasis::FourierTau(4), LegBasis::Tau(3)));
        let rows: &[&[i64]] = &[&[30, -6], &[-3, 7], &[0, 0]];
        assert_eq!(b43.matrix, mat(Scalar::ratio(1, 120), rows));
        assert_eq!(a.block(3, 4).unwrap().matrix, mat(Scalar::ratio(1, 120), rows).transpose());
        let dual = principal_kinematic::<Rational>(3).unwrap().fourier_legs();
        assert!(additive_kinematic(3, &V::vol(3)).unwrap().same_tensor(&dual));
    }

    #[test]
    fn bezout() {
        for (n, a, b) in [(2, 1, 1), (3, 1, 2), (3, 2, 1), (4, 1, 3), (4, 2, 2), (5, 2, 3)] {
            assert_eq!(bezout_check::<Rational>(n, a, b).unwrap(), Scalar::one(), "({n},{a},{b})");
        }
        assert!(bezout_check::<Rational>(3, 1, 1).is_err());
    }

    #[test]
    fn primitive_pairing() {
        for n in 0..=4usize {
            assert_eq!(primitive_pairing_closed::<Rational>(n, 0, 0).unwrap(), Scalar::one());
            for k in 0..=2 * n {
                for r in primitive_indices(n, k) {
                    let p = primitive_general::<Rational>(n, k, r).unwrap();
                    let direct = pairing_pd(&p, &p.fourier()).unwrap();
                    assert_eq!(primitive_pairing_closed::<Rational>(n, k, r).unwrap(), direct, "n={n} k={k} r={r}");
                    assert_eq!(&direct * &pkf_coefficient(n, k, r), Scalar::one());
                }
            }
        }
    }

    #[test]
    fn factoring() {
        let m = mat(Scalar::ratio(1, 8), &[&[3, -1], &[-1, 3]]);
        assert_eq!(render_factored(&m), "1/8 * [[3,-1],[-1,3]]");
        let t = tasaki_matrix_closed::<Rational>(3, 3).unwrap();
        assert_eq!(render_factored(&t), "2/(27π) * [[9,-3],[-3,5]]");
    }

    #[test]
    fn json_schema() {
        let k = principal_kinematic::<Rational>(1).unwrap();
        let v: serde_json::Value = serde_json::to_value(&k).unwrap();
        assert_eq!(v["n"], 1);
        assert_eq!(v["blocks"][0]["a"], 0);
        assert_eq!(v["blocks"][0]["right_basis"], "F(tau[0,*])");
        assert_eq!(v["blocks"][1]["matrix"][0][0][0]["pi"], -1);
    }
}
