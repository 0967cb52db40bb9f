//! The sl(2) action on `Val^{U(n)}` and the primitive basis `π_{k,r}`.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Result, UvalError};
use crate::linalg::Matrix;
use crate::scalar::{double_factorial, factorial, Coefficient, PiLaurent};
use crate::valuation::{dim_val, q_range, Valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sl2Op {
    L,
    Lambda,
    H,
}

impl Sl2Op {
    pub fn apply<C: Coefficient>(self, v: &Valuation<C>) -> Valuation<C> {
        match self {
            Sl2Op::L => apply_l(v),
            Sl2Op::Lambda => apply_lambda(v),
            Sl2Op::H => apply_h(v),
        }
    }
}

fn int<C: Coefficient>(x: i64) -> PiLaurent<C> {
    PiLaurent::from_int(x)
}

/// `L μ_{k,q} = 2(q+1) μ_{k+1,q+1} + (k-2q+1) μ_{k+1,q}`.
pub fn apply_l<C: Coefficient>(v: &Valuation<C>) -> Valuation<C> {
    let mut out = Valuation::zero(v.n());
    for (k, q, c) in v.terms() {
        let (k, q) = (k as i64, q as i64);
        out.add_mu((k + 1) as usize, (q + 1) as usize, c * &int(2 * (q + 1)));
        out.add_mu((k + 1) as usize, q as usize, c * &int(k - 2 * q + 1));
    }
    out
}

/// `Λ μ_{k,q} = 2(n-k+q+1) μ_{k-1,q} + (k-2q+1) μ_{k-1,q-1}`.
pub fn apply_lambda<C: Coefficient>(v: &Valuation<C>) -> Valuation<C> {
    let n = v.n() as i64;
    let mut out = Valuation::zero(v.n());
    for (k, q, c) in v.terms() {
        if k == 0 {
            continue;
        }
        let (ki, qi) = (k as i64, q as i64);
        out.add_mu(k - 1, q, c * &int(2 * (n - ki + qi + 1)));
        if q > 0 {
            out.add_mu(k - 1, q - 1, c * &int(ki - 2 * qi + 1));
        }
    }
    out
}

/// `H = 2k - 2n` on degree `k`.
pub fn apply_h<C: Coefficient>(v: &Valuation<C>) -> Valuation<C> {
    let n = v.n() as i64;
    let mut out = Valuation::zero(v.n());
    for (k, q, c) in v.terms() {
        out.add_mu(k, q, c * &int(2 * k as i64 - 2 * n));
    }
    out
}

pub fn apply_l_pow<C: Coefficient>(v: &Valuation<C>, times: usize) -> Valuation<C> {
    (0..times).fold(v.clone(), |acc, _| apply_l(&acc))
}

fn df(m: i64) -> BigInt {
    double_factorial(m).expect("argument >= -1")
}

/// `π_{k,r}` from its τ-expansion
/// `(-1)^r (2n-4r+1)!! Σ_i (-1)^i (2r-2i-1)!!/(2n-2r-2i+1)!! · (k-2i)!/(2r-2i)! · τ_{k,i}`.
pub fn primitive_general<C: Coefficient>(n: usize, k: usize, r: usize) -> Result<Valuation<C>> {
    if 2 * r > k || k + 2 * r > 2 * n {
        return Err(UvalError::IndexOutOfRange { n, k, q: r });
    }
    let (ni, ri) = (n as i64, r as i64);
    let lead = df(2 * ni - 4 * ri + 1) * if r.is_multiple_of(2) { 1 } else { -1 };
    let mut out = Valuation::zero(n);
    for i in 0..=r {
        let ii = i as i64;
        let sign = if i % 2 == 0 { 1 } else { -1 };
        let num = &lead * df(2 * ri - 2 * ii - 1) * factorial(k - 2 * i) * sign;
        let den = df(2 * ni - 2 * ri - 2 * ii + 1) * factorial(2 * r - 2 * i);
        out.add_tau(k, i, &PiLaurent::big_ratio(&num, &den));
    }
    Ok(out)
}

/// `π_{2r,r}`, the primitive element of lowest degree in its isotypic piece.
pub fn primitive<C: Coefficient>(n: usize, r: usize) -> Result<Valuation<C>> {
    if 2 * r > n {
        return Err(UvalError::Invalid(format!("primitive π_{{2r,r}} needs 2r <= n; got r = {r}, n = {n}")));
    }
    primitive_general(n, 2 * r, r)
}

/// `π_{k,r} = L^{k-2r} π_{2r,r}`.
pub fn primitive_via_l<C: Coefficient>(n: usize, k: usize, r: usize) -> Result<Valuation<C>> {
    if 2 * r > k || k + 2 * r > 2 * n {
        return Err(UvalError::IndexOutOfRange { n, k, q: r });
    }
    Ok(apply_l_pow(&primitive(n, r)?, k - 2 * r))
}

/// Indices `r` of the primitive basis of degree `k`.
pub fn primitive_indices(n: usize, k: usize) -> std::ops::RangeInclusive<usize> {
    0..=(k / 2).min((2 * n - k) / 2)
}

/// A term `coeff · π_{k,r}` of a Lefschetz decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct LefschetzTerm<C> {
    pub k: usize,
    pub r: usize,
    pub coeff: PiLaurent<C>,
}

/// Expand every homogeneous component in the basis `π_{k,r}`.
pub fn lefschetz_decompose<C: Coefficient>(v: &Valuation<C>) -> Result<Vec<LefschetzTerm<C>>> {
    let n = v.n();
    let mut out = Vec::new();
    for k in v.degrees() {
        let dim = dim_val(n, k)?;
        let rs: Vec<usize> = primitive_indices(n, k).collect();
        // columns: μ-coordinates of π_{k,r}
        let basis: Vec<Vec<PiLaurent<C>>> = rs
            .iter()
            .map(|r| primitive_general::<C>(n, k, *r).map(|p| p.component_vector(k)))
            .collect::<Result<_>>()?;
        let a = Matrix::from_fn(dim, rs.len(), |i, j| basis[j][i].clone());
        let target = v.component_vector(k);
        let b = Matrix::from_fn(dim, 1, |i, _| target[i].clone());
        let x = a.solve(&b)?;
        for (j, r) in rs.iter().enumerate() {
            if !x[(j, 0)].is_zero() {
                out.push(LefschetzTerm { k, r: *r, coeff: x[(j, 0)].clone() });
            }
        }
    }
    Ok(out)
}

pub fn lefschetz_reconstruct<C: Coefficient>(n: usize, terms: &[LefschetzTerm<C>]) -> Result<Valuation<C>> {
    let mut out = Valuation::zero(n);
    for t in terms {
        out = out.checked_add(&primitive_general::<C>(n, t.k, t.r)?.scale(&t.coeff))?;
    }
    Ok(out)
}

/// `μ`-coordinates of `π_{k,r}` as a basis matrix: column `r` holds `π_{k,r}`.
pub fn primitive_basis_matrix<C: Coefficient>(n: usize, k: usize) -> Result<Matrix<PiLaurent<C>>> {
    let dim = dim_val(n, k)?;
    let cols: Vec<Vec<PiLaurent<C>>> = primitive_indices(n, k)
        .map(|r| primitive_general::<C>(n, k, r).map(|p| p.component_vector(k)))
        .collect::<Result<_>>()?;
    Ok(Matrix::from_fn(dim, cols.len(), |i, j| cols[j][i].clone()))
}

/// Matrix of `L^{2n-2k}: Val_k -> Val_{2n-k}` in the μ bases.
pub fn hard_lefschetz_matrix<C: Coefficient>(n: usize, k: usize) -> Result<Matrix<PiLaurent<C>>> {
    if k > n {
        return Err(UvalError::DegreeOutOfRange { n, k });
    }
    let src: Vec<usize> = q_range(n, k).collect();
    let dst_dim = dim_val(n, 2 * n - k)?;
    let cols: Vec<Vec<PiLaurent<C>>> = src
        .iter()
        .map(|q| {
            let v = Valuation::mu(n, k, *q).expect("q in range");
            apply_l_pow(&v, 2 * n - 2 * k).component_vector(2 * n - k)
        })
        .collect();
    Ok(Matrix::from_fn(dst_dim, src.len(), |i, j| cols[j][i].clone()))
}

/// `(k-2r)!/(2n-2r-k)!`, the factor in `F̂ π_{k,r} = c · π_{2n-k,r}`.
pub fn magic_factor<C: Coefficient>(n: usize, k: usize, r: usize) -> PiLaurent<C> {
    PiLaurent::big_ratio(&factorial(k - 2 * r), &factorial(2 * n - 2 * r - k))
}

pub fn is_primitive<C: Coefficient>(v: &Valuation<C>) -> bool {
    apply_lambda(v).is_zero()
}
