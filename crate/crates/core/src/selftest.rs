//! Invariant suite behind `uval selftest`.

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::{first_variation, is_monotone, is_positive, FourierGram};
use crate::error::{Result, UvalError};
use crate::kinematic::{
    additive_kinematic, bezout_check, kinematic, pairing_pd, primitive_pairing_closed, principal_kinematic,
    tasaki_matrix_closed, tasaki_matrix_oracle, LegBasis,
};
use crate::numeric::{klain_delta_deviation, mc_crofton, Frame, McConfig};
use crate::poly::{f_closed, f_recursive, Chart, GradedPoly};
use crate::scalar::{double_factorial, factorial};
use crate::sl2::{apply_h, apply_l, apply_lambda, hard_lefschetz_matrix, magic_factor, primitive_general, primitive_indices};
use crate::valuation::q_range;
use crate::{ExactMatrix, ExactValuation, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl std::str::FromStr for Level {
    type Err = UvalError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(UvalError::Invalid(format!("unknown level '{other}' (quick|full)"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub millis: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub level: Level,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckResult>,
}

/// Matrices as printed for `T^n_2`, `T^n_3`, `T^n_4`.
pub mod reference {
    use super::*;

    fn q(num: BigInt, den: BigInt) -> Rational {
        Rational::new(num, den)
    }

    fn int(x: i64) -> Rational {
        Rational::from_integer(x.into())
    }

    fn scaled(factor: Scalar, rows: Vec<Vec<Rational>>) -> ExactMatrix {
        let m = rows.len();
        ExactMatrix::from_fn(m, m, |i, j| factor.scale(&rows[i][j]))
    }

    pub fn t2(n: usize) -> ExactMatrix {
        let ni = n as i64;
        let f = Scalar::ratio(1, 4 * ni * (ni - 1));
        scaled(f, vec![vec![int(2 * ni - 1), int(-1)], vec![int(-1), int(2 * ni - 1)]])
    }

    pub fn t3(n: usize) -> ExactMatrix {
        let ni = n as i64;
        let num = BigInt::from(2).pow(n as u32 - 2) * factorial(n - 3);
        let den = BigInt::from(n) * double_factorial(2 * ni - 3).expect("odd");
        let f = Scalar::monomial(q(num, den), -1);
        scaled(f, vec![vec![int(2 * ni - 3), int(-1)], vec![int(-1), Rational::new((2 * ni - 1).into(), 3.into())]])
    }

    pub fn t4(n: usize) -> ExactMatrix {
        let ni = n as i64;
        let f = Scalar::constant(q(factorial(n - 4), factorial(n) * 16));
        let (d, c) = (3 * (2 * ni - 5) * (2 * ni - 3), -3 * (2 * ni - 3));
        scaled(
            f,
            vec![
                vec![int(d), int(c), int(9)],
                vec![int(c), int(2 * ni * ni - 4 * ni + 3), int(c)],
                vec![int(9), int(c), int(d)],
            ],
        )
    }
}

type CheckFn = Box<dyn Fn() -> Result<String>>;

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(UvalError::RouteMismatch(what()))
    }
}

fn all_mu(n: usize) -> Vec<ExactValuation> {
    (0..=2 * n)
        .flat_map(|k| q_range(n, k).map(move |q| ExactValuation::mu(n, k, q).expect("in range")))
        .collect()
}

fn checks(level: Level) -> Vec<(&'static str, CheckFn)> {
    let full = level == Level::Full;
    let nmax = if full { 6 } else { 4 };
    let mut out: Vec<(&'static str, CheckFn)> = Vec::new();

    out.push(("printed tasaki matrices", Box::new(move || {
        let top = if full { 8 } else { 5 };
        for n in 2..=top {
            ensure(tasaki_matrix_closed::<Rational>(n, 2)? == reference::t2(n), || format!("T^{n}_2"))?;
            if n >= 3 {
                ensure(tasaki_matrix_closed::<Rational>(n, 3)? == reference::t3(n), || format!("T^{n}_3"))?;
            }
            if n >= 4 {
                ensure(tasaki_matrix_closed::<Rational>(n, 4)? == reference::t4(n), || format!("T^{n}_4"))?;
            }
        }
        Ok(format!("n <= {top}"))
    })));

    out.push(("closed tasaki sum equals gram inverse", Box::new(move || {
        for n in 0..=nmax {
            for k in 0..=n {
                ensure(tasaki_matrix_closed::<Rational>(n, k)? == tasaki_matrix_oracle::<Rational>(n, k)?, || format!("n={n} k={k}"))?;
            }
        }
        Ok(format!("n <= {nmax}"))
    })));

    out.push(("relations", Box::new(move || {
        let kmax = if full { 16 } else { 10 };
        for k in 1..=kmax {
            ensure(f_recursive::<Rational>(k) == f_closed::<Rational>(k), || format!("f_{k}"))?;
        }
        for n in 1..=nmax {
            for f in [f_recursive::<Rational>(n + 1), f_recursive::<Rational>(n + 2)] {
                let deg = f.degree().unwrap_or(0);
                for a in 0..=2 * n {
                    for b in 0..=n {
                        if a + 2 * b + deg > 2 * n {
                            continue;
                        }
                        let m = GradedPoly::monomial(Chart::TU, a, b, Scalar::one());
                        ensure(ExactValuation::from_monomial(n, &(&m * &f)).is_zero(), || format!("n={n} t^{a}u^{b}"))?;
                    }
                }
            }
        }
        Ok(format!("k <= {kmax}, n <= {nmax}"))
    })));

    out.push(("sl(2) structure", Box::new(move || {
        for n in 0..=nmax {
            for v in all_mu(n) {
                let (l, lam, h) = (apply_l(&v), apply_lambda(&v), apply_h(&v));
                ensure(&apply_l(&lam) - &apply_lambda(&l) == h, || format!("[L,Λ]=H at n={n}"))?;
                ensure(&apply_h(&l) - &apply_l(&h) == l.scale(&Scalar::from_int(2)), || format!("[H,L]=2L at n={n}"))?;
                ensure(&apply_h(&lam) - &apply_lambda(&h) == lam.scale(&Scalar::from_int(-2)), || format!("[H,Λ]=-2Λ at n={n}"))?;
            }
            for k in 0..=n {
                let m = hard_lefschetz_matrix::<Rational>(n, k)?;
                ensure(m.is_square() && m.rank()? == m.rows(), || format!("hard Lefschetz n={n} k={k}"))?;
            }
            for k in 0..=2 * n {
                for r in primitive_indices(n, k) {
                    let p = primitive_general::<Rational>(n, k, r)?;
                    let dual = primitive_general::<Rational>(n, 2 * n - k, r)?;
                    ensure(p.fourier() == dual.scale(&magic_factor(n, k, r)), || format!("magic n={n} k={k} r={r}"))?;
                }
            }
        }
        Ok(format!("n <= {nmax}"))
    })));

    out.push(("primitive pairing", Box::new(move || {
        let top = nmax.min(5);
        for n in 0..=top {
            for k in 0..=2 * n {
                for r in primitive_indices(n, k) {
                    let p = primitive_general::<Rational>(n, k, r)?;
                    ensure(primitive_pairing_closed::<Rational>(n, k, r)? == pairing_pd(&p, &p.fourier())?, || format!("n={n} k={k} r={r}"))?;
                    for s in primitive_indices(n, 2 * n - k).filter(|s| *s != r) {
                        let other = primitive_general::<Rational>(n, 2 * n - k, s)?;
                        ensure(pairing_pd(&p, &other)?.is_zero(), || format!("orthogonality n={n} k={k} r={r} s={s}"))?;
                    }
                }
            }
        }
        Ok(format!("n <= {top}"))
    })));

    out.push(("palindrome and positivity", Box::new(move || {
        let top = if full { 8 } else { 5 };
        for n in 0..=top {
            for k in (0..=n).step_by(2) {
                let t = tasaki_matrix_closed::<Rational>(n, k)?;
                let l = k / 2;
                for i in 0..=l {
                    for j in 0..=l {
                        ensure(t[(i, j)] == t[(l - i, l - j)], || format!("palindrome n={n} k={k}"))?;
                    }
                }
            }
        }
        for n in 0..=nmax {
            for k in 0..=n {
                for minor in tasaki_matrix_closed::<Rational>(n, k)?.leading_minors()? {
                    ensure(minor.sign()? == Ordering::Greater, || format!("minor n={n} k={k}"))?;
                }
            }
        }
        Ok(format!("palindrome n <= {top}, minors n <= {nmax}"))
    })));

    out.push(("planar principal kinematic formula", Box::new(|| {
        let k = principal_kinematic::<Rational>(1)?;
        let (chi, mu1, vol) = (ExactValuation::chi(1), ExactValuation::mu(1, 1, 0)?, ExactValuation::vol(1));
        let one = Scalar::one();
        let two_over_pi = Scalar::monomial(Rational::from_integer(2.into()), -1);
        let expected = [((0, 2), &chi, &vol, &one), ((2, 0), &vol, &chi, &one), ((1, 1), &mu1, &mu1, &two_over_pi)];
        ensure(k.blocks().count() == 3, || "three blocks".into())?;
        for ((a, b), x, y, c) in expected {
            let m = k.mu_block(a, b);
            ensure(m.rows() == 1 && m.cols() == 1 && &m[(0, 0)] == c, || format!("block ({a},{b})"))?;
            ensure(x.homogeneous_degree() == Some(a) && y.homogeneous_degree() == Some(b), || "degrees".into())?;
        }
        Ok("chi⊗vol + vol⊗chi + (2/π) mu1⊗mu1".into())
    })));

    out.push(("worked examples in C^4", Box::new(|| {
        let n = 4;
        let rows = [[30, -6], [-3, 7], [0, 0]];
        let expect = |f: Scalar| ExactMatrix::from_fn(3, 2, |i, j| f.scale(&Rational::from_integer(rows[i][j].into())));
        let k = kinematic(n, &ExactValuation::tau(n, 1, 0)?)?.cpn_normalize()?;
        let b = k.block(4, 5).ok_or_else(|| UvalError::Invalid("missing block".into()))?;
        ensure((b.left, b.right) == (LegBasis::Tau(4), LegBasis::FourierTau(3)), || "bases of (4,5)".into())?;
        ensure(b.matrix == expect(Scalar::monomial(Rational::new(1.into(), 5.into()), -4)), || "kinematic (4,5)".into())?;
        let a = additive_kinematic(n, &ExactValuation::mu(n, 7, 3)?)?;
        let b = a.block(3, 4).ok_or_else(|| UvalError::Invalid("missing block".into()))?;
        ensure(b.matrix == expect(Scalar::ratio(1, 120)).transpose(), || "additive (3,4)".into())?;
        Ok("tau[1,0] and mu[7,3]".into())
    })));

    out.push(("bezout", Box::new(|| {
        for (n, a, b) in [(2, 1, 1), (3, 1, 2), (4, 1, 3), (4, 2, 2)] {
            ensure(bezout_check::<Rational>(n, a, b)? == Scalar::one(), || format!("({n},{a},{b})"))?;
        }
        Ok("4 cases".into())
    })));

    out.push(("cones", Box::new(move || {
        for n in 2..=nmax {
            let kaz = ExactValuation::mu(n, n, 0)?;
            ensure(is_positive(&kaz)?.member && !is_monotone(&kaz)?.member, || format!("Kazarnovskii n={n}"))?;
            for k in 0..=2 * n {
                ensure(is_monotone(&ExactValuation::tau(n, k, 0)?)?.member, || format!("intrinsic volume n={n} k={k}"))?;
            }
        }
        let samples = if full { 2000 } else { 200 };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=4 {
            let gram = FourierGram::<Rational>::new(n)?;
            for k in 0..=2 * n {
                let d = q_range(n, k).count();
                for _ in 0..samples {
                    let a: Vec<Scalar> = (0..d).map(|_| Scalar::from_int(rng.random_range(-3..=9))).collect();
                    let v = ExactValuation::from_component(n, k, a)?;
                    let (cp, m, p) = (gram.is_crofton_positive(&v)?.member, is_monotone(&v)?.member, is_positive(&v)?.member);
                    ensure(!cp || m, || format!("CP ⊄ M at n={n} k={k}: {v}"))?;
                    ensure(!m || p, || format!("M ⊄ P at n={n} k={k}: {v}"))?;
                    let by_variation = first_variation(&v)?.is_nonnegative()? && v.coeff(0, 0).sign()? != Ordering::Less;
                    ensure(m == by_variation, || format!("first variation at n={n} k={k}: {v}"))?;
                }
            }
        }
        Ok(format!("{samples} samples per (n,k)"))
    })));

    out.push(("monte carlo crofton", Box::new(move || {
        let samples = if full { 200_000 } else { 20_000 };
        let cases = [(0.0, 0.0), (FRAC_PI_2, FRAC_PI_2), (0.0, FRAC_PI_2)];
        let mut worst: f64 = 0.0;
        for (alpha, beta) in cases {
            let e = Frame::model(2, 2, &[alpha])?;
            let f = Frame::model(2, 2, &[beta])?.complement()?;
            let r = mc_crofton(2, 2, &e, &f, &McConfig { samples, seed: 2024, threads: 0 })?;
            ensure(r.sigma.abs() < 4.0, || format!("{r:?}"))?;
            worst = worst.max(r.sigma.abs());
        }
        Ok(format!("max |z| = {worst:.2} at {samples} samples"))
    })));

    out.push(("klain delta relations", Box::new(|| {
        let mut worst: f64 = 0.0;
        for n in 1..=4 {
            worst = worst.max(klain_delta_deviation(n)?);
        }
        ensure(worst < 1e-9, || format!("deviation {worst:e}"))?;
        Ok(format!("max deviation {worst:.1e}"))
    })));

    out
}

pub fn run(level: Level) -> SelftestReport {
    let mut results = Vec::new();
    for (name, check) in checks(level) {
        let start = Instant::now();
        let outcome = check();
        let millis = start.elapsed().as_millis();
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(e) => (false, e.to_string()),
        };
        results.push(CheckResult { name, passed, detail, millis });
    }
    let passed = results.iter().filter(|r| r.passed).count();
    SelftestReport { level, passed, failed: results.len() - passed, checks: results }
}
