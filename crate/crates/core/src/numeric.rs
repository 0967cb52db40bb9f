//! Floating-point geometry on the real Grassmannian of `C^n`: multiple Kähler
//! angles, Haar-random unitaries and a Monte-Carlo check of the Crofton
//! formula for flat pieces.
//!
//! `C^n` is identified with `R^{2n}` by interleaving: real coordinate `2j` is
//! `Re z_j` and `2j+1` is `Im z_j`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Complex, DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, UvalError};
use crate::kinematic::tasaki_matrix_closed;
use crate::scalar::PiLaurent;

pub const ORTHONORMAL_TOL: f64 = 1e-12;
pub const ANGLE_TOL: f64 = 1e-9;

/// `k` real-orthonormal vectors in `R^{2n}`, stored as the columns of a `2n × k` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    n: usize,
    vectors: DMatrix<f64>,
}

fn multiply_i(n: usize, v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(2 * n);
    for j in 0..n {
        out[2 * j] = -v[2 * j + 1];
        out[2 * j + 1] = v[2 * j];
    }
    out
}

fn gram_schmidt_extend(basis: &mut Vec<DVector<f64>>, candidate: DVector<f64>) -> bool {
    let mut v = candidate;
    for _ in 0..2 {
        for b in basis.iter() {
            let c = b.dot(&v);
            v -= b * c;
        }
    }
    let norm = v.norm();
    if norm < 1e-8 {
        return false;
    }
    basis.push(v / norm);
    true
}

impl Frame {
    pub fn new(n: usize, vectors: DMatrix<f64>) -> Result<Self> {
        if vectors.nrows() != 2 * n {
            return Err(UvalError::Shape(format!("frame has {} rows, expected {}", vectors.nrows(), 2 * n)));
        }
        let k = vectors.ncols();
        let dev = (vectors.transpose() * &vectors - DMatrix::identity(k, k)).abs().max();
        if dev > ORTHONORMAL_TOL {
            return Err(UvalError::NotOrthonormal(dev));
        }
        Ok(Self { n, vectors })
    }

    fn from_columns(n: usize, cols: &[DVector<f64>]) -> Result<Self> {
        if cols.is_empty() {
            return Self::new(n, DMatrix::zeros(2 * n, 0));
        }
        Self::new(n, DMatrix::from_columns(cols))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Plane of dimension `k ≤ n` with prescribed multiple Kähler angle: pairs
    /// `e_j, cos θ i e_j + sin θ e_{j'}` plus one real vector when `k` is odd.
    pub fn model(n: usize, k: usize, angles: &[f64]) -> Result<Self> {
        if k > n {
            return Err(UvalError::DegreeOutOfRange { n, k });
        }
        if angles.len() != k / 2 {
            return Err(UvalError::Invalid(format!("a {k}-plane needs {} angles, got {}", k / 2, angles.len())));
        }
        if angles.iter().any(|t| !(0.0..=FRAC_PI_2 + 1e-12).contains(t)) {
            return Err(UvalError::Invalid("angles must lie in [0, pi/2]".into()));
        }
        let e = |j: usize, imag: bool| {
            let mut v = DVector::zeros(2 * n);
            v[2 * j + imag as usize] = 1.0;
            v
        };
        let mut cols = Vec::with_capacity(k);
        for (i, t) in angles.iter().enumerate() {
            let (j, j2) = (2 * i, 2 * i + 1);
            cols.push(e(j, false));
            cols.push(e(j, true) * t.cos() + e(j2, false) * t.sin());
        }
        if k % 2 == 1 {
            cols.push(e(2 * angles.len(), false));
        }
        Self::from_columns(n, &cols)
    }

    /// Model plane of type `(k, q)`: `C^q ⊕ R^{k-2q}`.
    pub fn model_type(n: usize, k: usize, q: usize) -> Result<Self> {
        if 2 * q > k {
            return Err(UvalError::IndexOutOfRange { n, k, q });
        }
        let angles: Vec<f64> = (0..k / 2).map(|i| if i < q { 0.0 } else { FRAC_PI_2 }).collect();
        Self::model(n, k, &angles)
    }

    /// Haar-random `k`-plane.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k > n {
            return Self::random(n, 2 * n - k, rng)?.complement();
        }
        let angles: Vec<f64> = (0..k / 2).map(|_| rng.random_range(0.0..=FRAC_PI_2)).collect();
        Ok(Self::model(n, k, &angles)?.apply_unitary(&haar_unitary_with(n, rng)))
    }

    pub fn complement(&self) -> Result<Self> {
        let mut basis: Vec<DVector<f64>> = self.vectors.column_iter().map(|c| c.into_owned()).collect();
        let k = basis.len();
        for i in 0..2 * self.n {
            if basis.len() == 2 * self.n {
                break;
            }
            let mut e = DVector::zeros(2 * self.n);
            e[i] = 1.0;
            gram_schmidt_extend(&mut basis, e);
        }
        Self::from_columns(self.n, &basis[k..])
    }

    pub fn apply_unitary(&self, g: &DMatrix<Complex<f64>>) -> Self {
        let n = self.n;
        let mut out = DMatrix::zeros(2 * n, self.dim());
        for (c, col) in self.vectors.column_iter().enumerate() {
            for i in 0..n {
                let mut z = Complex::new(0.0, 0.0);
                for j in 0..n {
                    z += g[(i, j)] * Complex::new(col[2 * j], col[2 * j + 1]);
                }
                out[(2 * i, c)] = z.re;
                out[(2 * i + 1, c)] = z.im;
            }
        }
        Self { n, vectors: out }
    }

    /// `A_{ab} = ⟨J u_a, u_b⟩`.
    pub fn kahler_form(&self) -> DMatrix<f64> {
        let k = self.dim();
        let ju: Vec<DVector<f64>> = self.vectors.column_iter().map(|c| multiply_i(self.n, &c.into_owned())).collect();
        DMatrix::from_fn(k, k, |a, b| ju[a].dot(&self.vectors.column(b)))
    }
}

/// Nondecreasing multiple Kähler angle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleVector {
    pub thetas: Vec<f64>,
}

impl AngleVector {
    pub fn cos2(&self) -> Vec<f64> {
        self.thetas.iter().map(|t| t.cos().powi(2)).collect()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.thetas.len() == other.thetas.len()
            && self.thetas.iter().zip(&other.thetas).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// `cos²θ_i` as exact rationals when every angle is `0` or `π/2` up to `tol`.
    pub fn exact_cos2(&self, tol: f64) -> Option<Vec<BigRational>> {
        self.thetas
            .iter()
            .map(|t| {
                if t.abs() <= tol {
                    Some(BigRational::one())
                } else if (t - FRAC_PI_2).abs() <= tol {
                    Some(BigRational::zero())
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Multiple Kähler angle. The cosines are the singular values of the restricted
/// Kähler form; the sines come from the part of `JE` normal to `E`, which keeps
/// both ends of `[0, π/2]` accurate. For `k > n` this yields `(0, …, 0, Θ(E^⊥))`.
pub fn kahler_angles(f: &Frame) -> AngleVector {
    let k = f.dim();
    if k < 2 {
        return AngleVector { thetas: vec![] };
    }
    let mut cos: Vec<f64> = f.kahler_form().singular_values().iter().copied().collect();
    cos.sort_by(|a, b| b.total_cmp(a));
    let perp = f.complement().expect("complement of an orthonormal frame");
    let mut sin = vec![0.0; k.saturating_sub(perp.dim())];
    if perp.dim() > 0 {
        let ju = DMatrix::from_columns(
            &f.vectors.column_iter().map(|c| multiply_i(f.n, &c.into_owned())).collect::<Vec<_>>(),
        );
        let b = ju.transpose() * perp.vectors();
        sin.extend(b.singular_values().iter().copied());
    }
    sin.sort_by(|a, b| a.total_cmp(b));
    // both spectra come in equal pairs
    let thetas = (0..k / 2).map(|i| sin[2 * i].atan2(cos[2 * i]).clamp(0.0, FRAC_PI_2)).collect();
    AngleVector { thetas }
}

/// `Θ(E^⊥) = (0^{n-k}, Θ(E))` for `k ≤ n`, up to `tol`.
pub fn complement_angles_check(f: &Frame, tol: f64) -> Result<bool> {
    let (n, k) = (f.n(), f.dim());
    if k > n {
        return Err(UvalError::DegreeOutOfRange { n, k });
    }
    let mut expected = vec![0.0; n - k];
    expected.extend(kahler_angles(f).thetas);
    Ok(kahler_angles(&f.complement()?).approx_eq(&AngleVector { thetas: expected }, tol))
}

fn haar_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex<f64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re * h, im * h)
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { Complex::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-distributed unitary, deterministic in `seed`.
pub fn haar_unitary(n: usize, seed: u64) -> DMatrix<Complex<f64>> {
    haar_unitary_with(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub threads: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { samples: 100_000, seed: 0, threads: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McReport {
    pub estimate: f64,
    pub stderr: f64,
    pub prediction_float: f64,
    pub prediction_exact: Option<PiLaurent<BigRational>>,
    /// `(estimate - prediction) / stderr`
    pub sigma: f64,
    pub samples: u64,
}

const CHUNK: u64 = 4096;

/// Sum and sum of squares of `|det[E | gF]|` over one deterministic chunk.
fn mc_chunk(e: &Frame, f: &Frame, seed: u64, chunk: u64, count: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let n = e.n();
    let k = e.dim();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.columns_mut(0, k).copy_from(e.vectors());
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..count {
        let g = haar_unitary_with(n, &mut rng);
        let gf = f.apply_unitary(&g);
        m.columns_mut(k, 2 * n - k).copy_from(gf.vectors());
        let d = m.clone().determinant().abs();
        s += d;
        s2 += d * d;
    }
    (s, s2)
}

/// Exact and floating contraction `Σ T_{ij} σ_i(cos²Θ(E)) σ_j(cos²Θ(F^⊥))`.
pub fn crofton_prediction(n: usize, k: usize, e: &AngleVector, f_perp: &AngleVector) -> Result<(f64, Option<PiLaurent<BigRational>>)> {
    let t = tasaki_matrix_closed::<BigRational>(n, k)?;
    let (se, sf) = (crate::valuation::elementary_symmetric(&e.cos2()), crate::valuation::elementary_symmetric(&f_perp.cos2()));
    let mut float = 0.0;
    for i in 0..t.rows() {
        for j in 0..t.cols() {
            float += t[(i, j)].to_f64() * se[i] * sf[j];
        }
    }
    let exact = match (e.exact_cos2(ANGLE_TOL), f_perp.exact_cos2(ANGLE_TOL)) {
        (Some(a), Some(b)) => {
            let (sa, sb) = (exact_symmetric(&a), exact_symmetric(&b));
            let mut total = PiLaurent::zero();
            for i in 0..t.rows() {
                for j in 0..t.cols() {
                    total += &t[(i, j)].scale(&(&sa[i] * &sb[j]));
                }
            }
            Some(total)
        }
        _ => None,
    };
    Ok((float, exact))
}

fn exact_symmetric(x: &[BigRational]) -> Vec<BigRational> {
    let mut sigma = vec![BigRational::zero(); x.len() + 1];
    sigma[0] = BigRational::one();
    for (i, xi) in x.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            let add = &sigma[j - 1] * xi;
            sigma[j] += add;
        }
    }
    sigma
}

/// Monte-Carlo mean of `|det[E | gF]|` over Haar `g ∈ U(n)` against the exact
/// Crofton prediction. Chunks use independent ChaCha streams and are reduced in
/// order, so the estimate does not depend on the thread count.
pub fn mc_crofton(n: usize, k: usize, e: &Frame, f: &Frame, cfg: &McConfig) -> Result<McReport> {
    if e.n() != n || f.n() != n {
        return Err(UvalError::DimensionMismatch(n, if e.n() != n { e.n() } else { f.n() }));
    }
    if k > n || e.dim() != k || f.dim() != 2 * n - k {
        return Err(UvalError::Shape(format!(
            "need dim E = k = {k} <= n = {n} and dim F = {}; got {} and {}",
            2 * n - k,
            e.dim(),
            f.dim()
        )));
    }
    if cfg.samples < 2 {
        return Err(UvalError::Invalid("at least two samples are required".into()));
    }
    let chunks = cfg.samples.div_ceil(CHUNK);
    let work = |c: u64| mc_chunk(e, f, cfg.seed, c, CHUNK.min(cfg.samples - c * CHUNK));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|err| UvalError::Invalid(err.to_string()))?;
    let parts: Vec<(f64, f64)> = pool.install(|| (0..chunks).into_par_iter().map(work).collect());
    let (s, s2) = parts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let m = cfg.samples as f64;
    let mean = s / m;
    let var = ((s2 - m * mean * mean) / (m - 1.0)).max(0.0);
    let stderr = (var / m).sqrt();
    let (prediction_float, prediction_exact) = crofton_prediction(n, k, &kahler_angles(e), &kahler_angles(&f.complement()?))?;
    Ok(McReport {
        estimate: mean,
        stderr,
        prediction_float,
        prediction_exact,
        sigma: (mean - prediction_float) / stderr,
        samples: cfg.samples,
    })
}

/// `kl_v(E)` for a valuation given by its Klain polynomial, at the numerically measured angle of `E`.
pub fn klain_at(kl: &crate::valuation::KlainPolynomial<BigRational>, e: &Frame) -> f64 {
    kl.evaluate(&kahler_angles(e).cos2())
}

/// Largest deviation of `kl_{μ_{k,q}}(E^{k,q'})` from `δ_{q q'}` over all model frames with `k ≤ n`.
pub fn klain_delta_deviation(n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..=n {
        for q in crate::valuation::q_range(n, k) {
            let kl = crate::valuation::Valuation::<BigRational>::mu(n, k, q)?.klain(k)?;
            for q2 in crate::valuation::q_range(n, k) {
                let value = klain_at(&kl, &Frame::model_type(n, k, q2)?);
                worst = worst.max((value - if q == q2 { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Scalar;

    fn is_unitary(g: &DMatrix<Complex<f64>>) -> bool {
        let n = g.nrows();
        (g.adjoint() * g - DMatrix::identity(n, n)).iter().all(|z| z.norm() < 1e-12)
    }

    #[test]
    fn angles_of_basic_planes() {
        let line = Frame::model_type(2, 2, 1).unwrap();
        assert!(kahler_angles(&line).approx_eq(&AngleVector { thetas: vec![0.0] }, 1e-12));
        let lag = Frame::model_type(2, 2, 0).unwrap();
        assert!(kahler_angles(&lag).approx_eq(&AngleVector { thetas: vec![FRAC_PI_2] }, 1e-12));
        for n in 1..=4usize {
            for k in 0..=n {
                for q in 0..=k / 2 {
                    let f = Frame::model_type(n, k, q).unwrap();
                    let mut expected = vec![0.0; q];
                    expected.resize(k / 2, FRAC_PI_2);
                    assert!(kahler_angles(&f).approx_eq(&AngleVector { thetas: expected }, 1e-12));
                }
            }
        }
        let f = Frame::model(3, 2, &[0.7]).unwrap();
        assert!((kahler_angles(&f).thetas[0] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_frames() {
        let m = DMatrix::from_column_slice(4, 1, &[1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(Frame::new(2, m), Err(UvalError::NotOrthonormal(_))));
        assert!(Frame::model(2, 2, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn haar_unitary_properties() {
        for n in 1..=5 {
            assert!(is_unitary(&haar_unitary(n, 17)));
        }
        assert_eq!(haar_unitary(3, 5), haar_unitary(3, 5));
        assert_ne!(haar_unitary(3, 5), haar_unitary(3, 6));
    }

    #[test]
    fn first_column_moment() {
        let n = 3;
        let samples = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..samples).map(|_| haar_unitary_with(n, &mut rng)[(0, 0)].norm_sqr()).collect();
        let mean = xs.iter().sum::<f64>() / samples as f64;
        // |g_11|^2 ~ Beta(1, n-1)
        let nf = n as f64;
        let sd = ((nf - 1.0) / (nf * nf * (nf + 1.0)) / samples as f64).sqrt();
        assert!((mean - 1.0 / nf).abs() < 3.0 * sd, "mean {mean}");
    }

    #[test]
    fn angles_are_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, k) in [(2, 2), (3, 2), (3, 3), (4, 4), (4, 3), (3, 5)] {
            for _ in 0..20 {
                let e = Frame::random(n, k, &mut rng).unwrap();
                let g = haar_unitary_with(n, &mut rng);
                assert!(kahler_angles(&e.apply_unitary(&g)).approx_eq(&kahler_angles(&e), 1e-9));
            }
        }
    }

    #[test]
    fn complement_angles() {
        assert!(complement_angles_check(&Frame::model_type(2, 2, 1).unwrap(), 1e-9).unwrap());
        assert!(complement_angles_check(&Frame::model_type(2, 2, 0).unwrap(), 1e-9).unwrap());
        let lag_perp = kahler_angles(&Frame::model_type(2, 2, 0).unwrap().complement().unwrap());
        assert!(lag_perp.approx_eq(&AngleVector { thetas: vec![FRAC_PI_2] }, 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (n, k) in [(3, 2), (4, 2), (4, 3), (4, 4), (5, 4)] {
            for _ in 0..10 {
                assert!(complement_angles_check(&Frame::random(n, k, &mut rng).unwrap(), 1e-9).unwrap());
            }
        }
    }

    #[test]
    fn klain_delta_relations() {
        for n in 1..=4 {
            assert!(klain_delta_deviation(n).unwrap() < 1e-9);
        }
    }

    #[test]
    fn desk_predictions() {
        let z = |x: &[f64]| AngleVector { thetas: x.to_vec() };
        let (f, e) = crofton_prediction(2, 2, &z(&[0.0]), &z(&[0.0])).unwrap();
        assert_eq!(e, Some(Scalar::ratio(1, 2)));
        assert!((f - 0.5).abs() < 1e-15);
        let (_, e) = crofton_prediction(2, 2, &z(&[FRAC_PI_2]), &z(&[FRAC_PI_2])).unwrap();
        assert_eq!(e, Some(Scalar::ratio(3, 8)));
        let (_, e) = crofton_prediction(2, 2, &z(&[0.0]), &z(&[FRAC_PI_2])).unwrap();
        assert_eq!(e, Some(Scalar::ratio(1, 4)));
        assert_eq!(crofton_prediction(2, 2, &z(&[0.3]), &z(&[0.0])).unwrap().1, None);
    }

    #[test]
    fn mc_is_thread_independent() {
        let e = Frame::model_type(2, 2, 1).unwrap();
        let f = Frame::model_type(2, 2, 1).unwrap().complement().unwrap();
        let a = mc_crofton(2, 2, &e, &f, &McConfig { samples: 10_000, seed: 4, threads: 1 }).unwrap();
        let b = mc_crofton(2, 2, &e, &f, &McConfig { samples: 10_000, seed: 4, threads: 3 }).unwrap();
        assert_eq!(a, b);
        assert!(a.sigma.abs() < 4.0);
    }

    #[test]
    fn mc_small_grid() {
        for (n, k) in [(2, 2), (3, 2), (3, 3)] {
            for (alpha, beta) in [(0.0, 0.0), (FRAC_PI_2, 0.4), (1.1, FRAC_PI_2)] {
                let e = Frame::model(n, k, &[alpha]).unwrap();
                let f = Frame::model(n, k, &[beta]).unwrap().complement().unwrap();
                let r = mc_crofton(n, k, &e, &f, &McConfig { samples: 100_000, seed: 1, threads: 0 }).unwrap();
                assert!(r.sigma.abs() < 4.0, "n={n} k={k} {r:?}");
            }
        }
    }
}
