//! Pointwise algebraic identities and sharp inequalities, checked on random
//! symmetry-consistent tensors and on engine frames.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::algebra::{self, curvature_on_sym, full_norm_sq, mat_product, quartic_square};
use crate::curvature::{on_max, CurvatureFrame};
use crate::tensor::{
    change_basis, random_metric, random_orthogonal, random_riemann_like, random_tracefree, seeded_rng, LabeledTensor,
    MetricAtPoint, Symmetry,
};
use crate::{Error, Real, Result};

/// Tolerance for identities on synthetic inputs (relative).
pub const SYNTHETIC_TOL: f64 = 1e-10;
/// Tolerance for identities on engine frames (relative).
pub const FRAME_TOL: f64 = 1e-6;
/// Lower bound on inequality slacks.
pub const SLACK_TOL: f64 = 1e-12;
/// Codazzi gate for the refined Kato inequality.
pub const CODAZZI_GATE: f64 = 1e-4;
pub const KATO_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityVerdict<T> {
    pub id: String,
    pub max_residual: T,
    pub samples: usize,
    /// Seed of the worst synthetic sample.
    pub worst_seed: Option<u64>,
    /// Chart point of the worst frame.
    pub worst_point: Option<Vec<T>>,
    pub tolerance: T,
    pub pass: bool,
}

impl<T: Real> IdentityVerdict<T> {
    pub fn new(id: impl Into<String>, tolerance: T) -> Self {
        Self {
            id: id.into(),
            max_residual: T::zero(),
            samples: 0,
            worst_seed: None,
            worst_point: None,
            tolerance,
            pass: true,
        }
    }

    /// Folds in one sample. A NaN residual sticks and fails the verdict.
    pub fn record(&mut self, residual: T, seed: Option<u64>, point: Option<&[T]>) {
        self.samples += 1;
        let worse = residual.is_nan() || (!self.max_residual.is_nan() && (self.samples == 1 || residual > self.max_residual));
        if worse {
            self.max_residual = residual;
            self.worst_seed = seed;
            self.worst_point = point.map(<[T]>::to_vec);
        }
        self.pass = self.max_residual < self.tolerance;
    }

    /// Combines two verdicts over disjoint samples.
    pub fn merge(mut self, other: Self) -> Self {
        let samples = self.samples + other.samples;
        if other.max_residual > self.max_residual || other.max_residual.is_nan() || self.samples == 0 {
            self.max_residual = other.max_residual;
            self.worst_seed = other.worst_seed;
            self.worst_point = other.worst_point;
        }
        self.samples = samples;
        self.pass = self.max_residual < self.tolerance;
        self
    }
}

fn rel_gap<T: Real>(lhs: &LabeledTensor<T>, rhs: &LabeledTensor<T>, g: &MetricAtPoint<T>) -> Result<T> {
    let scale = T::one().max(on_max(lhs, g)).max(on_max(rhs, g));
    Ok(on_max(&lhs.sub(rhs)?, g) / scale)
}

fn need_dim(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::UnsupportedDimension {
            n,
            reason: "the decomposition identities divide by n - 2",
        });
    }
    Ok(())
}

/// Relative residuals of
/// `E_kl R_ikjl = E_kl W_ikjl + (|E|² g_ij - 2 E_ik E_jk)/(n-2) - R E_ij/(n(n-1))`,
/// the expansion of `R_ikpq R_jkpq` and
/// `|Rm|² = |W|² + 4|E|²/(n-2) + 2R²/(n(n-1))`, with `Rm` given.
pub fn decomposition_residuals<T: Real>(
    rm: &LabeledTensor<T>,
    w: &LabeledTensor<T>,
    e: &LabeledTensor<T>,
    r: T,
    g: &MetricAtPoint<T>,
) -> Result<[T; 3]> {
    let n = g.dim();
    need_dim(n)?;
    let nf = T::from_usize_lossy(n);
    let two = T::lit(2.0);
    let gt = g.as_tensor();
    let e_norm2 = full_norm_sq(e, g);
    let ee = mat_product(e, e, g);
    let we = curvature_on_sym(w, e, g);
    let re = curvature_on_sym(rm, e, g);

    let rhs15 = we
        .add(&gt.scaled(e_norm2 / (nf - two)))?
        .sub(&ee.scaled(two / (nf - two)))?
        .sub(&e.scaled(r / (nf * (nf - T::one()))))?;

    let rr = quartic_square(rm, rm, g);
    let ww = quartic_square(w, w, g);
    let n2 = nf - two;
    let rhs16 = ww
        .add(&we.scaled(T::lit(4.0) / n2))?
        .add(&ee.scaled(two * (nf - T::lit(4.0)) / (n2 * n2)))?
        .add(&gt.scaled(two * e_norm2 / (n2 * n2) + two * r * r / (nf * nf * (nf - T::one()))))?
        .add(&e.scaled(T::lit(4.0) * r / (nf * (nf - T::one()))))?;

    let rm2 = full_norm_sq(rm, g);
    let rhs17 = full_norm_sq(w, g) + T::lit(4.0) * e_norm2 / n2 + two * r * r / (nf * (nf - T::one()));
    let d17 = (rm2 - rhs17).abs() / T::one().max(rm2.abs()).max(rhs17.abs());
    Ok([rel_gap(&re, &rhs15, g)?, rel_gap(&rr, &rhs16, g)?, d17])
}

pub const DECOMPOSITION_IDS: [&str; 3] = ["E.Rm=E.W", "Rm*Rm", "|Rm|^2"];

/// Checks the three identities on `Rm` assembled from `(W, E, R, g)`.
pub fn check_decomposition_identities<T: Real>(
    w: &LabeledTensor<T>,
    e: &LabeledTensor<T>,
    r: T,
    g: &MetricAtPoint<T>,
    tol: T,
) -> Result<[IdentityVerdict<T>; 3]> {
    let rm = algebra::assemble_riemann(w, e, r, g)?;
    let res = decomposition_residuals(&rm, w, e, r, g)?;
    Ok(std::array::from_fn(|k| {
        let mut v = IdentityVerdict::new(DECOMPOSITION_IDS[k], tol);
        v.record(res[k], None, None);
        v
    }))
}

/// Random consistent inputs: metric, Weyl part of a random algebraic
/// curvature tensor, trace-free `E` and scalar `R`.
pub fn synthetic_inputs<T: Real>(n: usize, seed: u64) -> (MetricAtPoint<T>, LabeledTensor<T>, LabeledTensor<T>, T) {
    let mut rng = seeded_rng(seed);
    let g = random_metric::<T, _>(n, &mut rng);
    let w = if n > 3 {
        let rm = random_riemann_like::<T, _>(n, &mut rng);
        algebra::weyl_part(&rm, &g).expect("n >= 4")
    } else {
        LabeledTensor::zeros_tagged(n, 4, Symmetry::WeylType)
    };
    let e = random_tracefree(&g, &mut rng);
    let r = T::lit(rng.gen_range(-5.0..5.0));
    (g, w, e, r)
}

/// The three identities plus the Weyl reconstruction on `samples` random
/// inputs with seeds `seed, seed + 1, ..`.
pub fn synthetic_identity_suite<T: Real>(n: usize, samples: usize, seed: u64, tol: T) -> Result<Vec<IdentityVerdict<T>>> {
    need_dim(n)?;
    let per: Vec<[T; 4]> = (0..samples as u64)
        .into_par_iter()
        .map(|k| -> Result<[T; 4]> {
            let (g, w, e, r) = synthetic_inputs::<T>(n, seed + k);
            let rm = algebra::assemble_riemann(&w, &e, r, &g)?;
            let [a, b, c] = decomposition_residuals(&rm, &w, &e, r, &g)?;
            // Decomposing the assembled tensor returns the parts.
            let ric = algebra::ricci(&rm, &g)?;
            let r2 = algebra::scalar(&ric, &g)?;
            let e2 = algebra::traceless_ricci(&ric, r2, &g)?;
            let w2 = algebra::weyl_from(&rm, &e2, r2, &g)?;
            let back = algebra::assemble_riemann(&w2, &e2, r2, &g)?;
            let recon = rel_gap(&rm, &back, &g)?
                .max(rel_gap(&w, &w2, &g)?)
                .max(rel_gap(&e, &e2, &g)?)
                .max((r - r2).abs() / T::one().max(r.abs()));
            Ok([a, b, c, recon])
        })
        .collect::<Result<_>>()?;
    let ids = [DECOMPOSITION_IDS[0], DECOMPOSITION_IDS[1], DECOMPOSITION_IDS[2], "weyl_reconstruction"];
    Ok(ids
        .iter()
        .enumerate()
        .map(|(k, id)| {
            let mut v = IdentityVerdict::new(*id, tol);
            for (s, row) in per.iter().enumerate() {
                v.record(row[k], Some(seed + s as u64), None);
            }
            v
        })
        .collect())
}

/// `tr(E³) = E_i^j E_j^k E_k^i` and `|E|`.
fn cubic_and_norm<T: Real>(e: &LabeledTensor<T>, g: &MetricAtPoint<T>) -> (T, T) {
    let ee = mat_product(e, e, g);
    let e3 = crate::tensor::inner(&ee, e, g).expect("rank 2");
    (e3, full_norm_sq(e, g).max(T::zero()).sqrt())
}

/// `(tr E³ + k|E|³, k|E|³ - tr E³)` with `k = (n-2)/√(n(n-1))`; both are
/// nonnegative for trace-free symmetric `E`.
pub fn check_okumura<T: Real>(e: &LabeledTensor<T>, g: &MetricAtPoint<T>) -> (T, T) {
    let nf = T::from_usize_lossy(g.dim());
    let k = (nf - T::lit(2.0)) / (nf * (nf - T::one())).sqrt();
    let (e3, norm) = cubic_and_norm(e, g);
    let bound = k * norm * norm * norm;
    (e3 + bound, bound - e3)
}

/// `√((n-2)/(2(n-1))) |W||E|² - |W_ikjl E_ij E_kl|`.
pub fn check_huisken<T: Real>(w: &LabeledTensor<T>, e: &LabeledTensor<T>, g: &MetricAtPoint<T>) -> T {
    let nf = T::from_usize_lossy(g.dim());
    let k = ((nf - T::lit(2.0)) / (T::lit(2.0) * (nf - T::one()))).sqrt();
    let we = curvature_on_sym(w, e, g);
    let lhs = crate::tensor::inner(&we, e, g).expect("rank 2").abs();
    let w_norm = full_norm_sq(w, g).max(T::zero()).sqrt();
    k * w_norm * full_norm_sq(e, g) - lhs
}

/// `E = a (g - n v⊗v)` for a `g`-unit vector `v`: an `(n-1)`-fold
/// eigenvalue `a` and a simple one `(1-n)a`. Okumura's lower bound is
/// attained for `a > 0`, the upper one for `a < 0`.
pub fn okumura_equality_case<T: Real>(g: &MetricAtPoint<T>, a: T, seed: u64) -> LabeledTensor<T> {
    let n = g.dim();
    let mut rng = seeded_rng(seed);
    let raw: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
    // lower the index: v_i = g_ij u^j with |u| = 1
    let mut norm2 = T::zero();
    for i in 0..n {
        for j in 0..n {
            norm2 = norm2 + g.g(i, j) * raw[i] * raw[j];
        }
    }
    let u: Vec<T> = raw.iter().map(|&x| x / norm2.sqrt()).collect();
    let v: Vec<T> = (0..n).map(|i| (0..n).map(|j| g.g(i, j) * u[j]).sum()).collect();
    let nf = T::from_usize_lossy(n);
    LabeledTensor::from_fn(n, 2, |ix| a * (g.g(ix[0], ix[1]) - nf * v[ix[0]] * v[ix[1]]))
        .tagged_unchecked(Symmetry::SymmetricPair)
}

/// Verdicts `okumura_lower`, `okumura_upper`, `huisken` over `samples`
/// random inputs; the residual is the violation `max(0, -slack)`.
pub fn synthetic_inequality_suite<T: Real>(n: usize, samples: usize, seed: u64, tol: T) -> Result<Vec<IdentityVerdict<T>>> {
    need_dim(n)?;
    let per: Vec<[T; 3]> = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let (g, w, e, _) = synthetic_inputs::<T>(n, seed + k);
            let (lo, hi) = check_okumura(&e, &g);
            let hu = check_huisken(&w, &e, &g);
            [lo, hi, hu].map(|s| (-s).max(T::zero()))
        })
        .collect();
    Ok(["okumura_lower", "okumura_upper", "huisken"]
        .iter()
        .enumerate()
        .map(|(k, id)| {
            let mut v = IdentityVerdict::new(*id, tol);
            for (s, row) in per.iter().enumerate() {
                v.record(row[k], Some(seed + s as u64), None);
            }
            v
        })
        .collect())
}

/// Equality cases: Okumura with an `(n-1)`-fold eigenvalue (both signs) and
/// Huisken for `n = 3`, where `W = 0`. Residual is `|slack|`.
pub fn equality_suite<T: Real>(n: usize, samples: usize, seed: u64, tol: T) -> Result<Vec<IdentityVerdict<T>>> {
    need_dim(n)?;
    let mut lower = IdentityVerdict::new("okumura_lower_equality", tol);
    let mut upper = IdentityVerdict::new("okumura_upper_equality", tol);
    let mut hu = IdentityVerdict::new("huisken_equality_n3", tol);
    for k in 0..samples as u64 {
        let s = seed + k;
        let (g, _, _, _) = synthetic_inputs::<T>(n, s);
        let e = okumura_equality_case(&g, T::lit(0.7), s);
        let (lo, _) = check_okumura(&e, &g);
        lower.record(lo.abs(), Some(s), None);
        let e = okumura_equality_case(&g, T::lit(-0.4), s);
        let (_, hi) = check_okumura(&e, &g);
        upper.record(hi.abs(), Some(s), None);
        let (g3, w3, e3, _) = synthetic_inputs::<T>(3, s);
        hu.record(check_huisken(&w3, &e3, &g3).abs(), Some(s), None);
    }
    Ok(vec![lower, upper, hu])
}

/// The identities and inequalities evaluated on one engine frame:
/// `[E.Rm=E.W, Rm*Rm, |Rm|^2, okumura violation, huisken violation]`.
pub fn frame_residuals<T: Real>(f: &CurvatureFrame<T>) -> Result<[T; 5]> {
    let [a, b, c] = decomposition_residuals(&f.riemann, &f.w, &f.e, f.r, &f.metric)?;
    let (lo, hi) = check_okumura(&f.e, &f.metric);
    let hu = check_huisken(&f.w, &f.e, &f.metric);
    let scale = T::one().max(f.norm_e2.sqrt() * f.norm_e2).max(f.norm_w2.sqrt() * f.norm_e2);
    Ok([a, b, c, (-lo.min(hi)).max(T::zero()) / scale, (-hu).max(T::zero()) / scale])
}

/// Refined Kato inequality for Codazzi `E` over a frame field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KatoReport<T> {
    /// Nodes where the Codazzi gate passed and `|E| > 1e-8`.
    pub tested: usize,
    pub skipped: usize,
    /// `min |∇E|² - (n+2)/n |∇|E||²` over tested nodes.
    pub min_refined_slack: Option<T>,
    /// `min |∇E|² - |∇|E||²` over nodes where `|E| > 1e-8`.
    pub min_plain_slack: Option<T>,
    pub plain_samples: usize,
    pub tolerance: T,
    pub pass: bool,
}

/// Per-frame Kato data: `(codazzi residual, |E|, refined slack, plain slack)`.
pub fn kato_terms<T: Real>(f: &CurvatureFrame<T>) -> Result<(T, T, Option<(T, T)>)> {
    let first = f.first()?;
    let n = T::from_usize_lossy(f.dim());
    // E_{kj,i} - E_{ki,j} plus the R-gradient terms is exactly C_ijk.
    let codazzi = on_max(&first.c, &f.metric);
    let norm = f.norm_e2.max(T::zero()).sqrt();
    let slacks = first.grad_abs_e_norm2.filter(|_| norm > T::lit(1e-8)).map(|ga| {
        (
            first.grad_e_norm2 - (n + T::lit(2.0)) / n * ga,
            first.grad_e_norm2 - ga,
        )
    });
    Ok((codazzi, norm, slacks))
}

pub fn check_kato_codazzi<T: Real>(terms: &[(T, T, Option<(T, T)>)]) -> KatoReport<T> {
    let tol = T::lit(KATO_TOL);
    let mut rep = KatoReport {
        tested: 0,
        skipped: 0,
        min_refined_slack: None,
        min_plain_slack: None,
        plain_samples: 0,
        tolerance: tol,
        pass: true,
    };
    for &(codazzi, _, slacks) in terms {
        let Some((refined, plain)) = slacks else {
            rep.skipped += 1;
            continue;
        };
        rep.plain_samples += 1;
        rep.min_plain_slack = Some(rep.min_plain_slack.map_or(plain, |m: T| m.min(plain)));
        if codazzi < T::lit(CODAZZI_GATE) {
            rep.tested += 1;
            rep.min_refined_slack = Some(rep.min_refined_slack.map_or(refined, |m: T| m.min(refined)));
        } else {
            rep.skipped += 1;
        }
    }
    rep.pass = rep.min_plain_slack.map_or(true, |s| s >= -tol) && rep.min_refined_slack.map_or(true, |s| s >= -tol);
    rep
}

/// Conjugates a tensor by an orthogonal change of frame (identity metric).
pub fn rotate<T: Real>(t: &LabeledTensor<T>, q: &[T]) -> LabeledTensor<T> {
    change_basis(t, q)
}

/// Random orthogonal matrix, re-exported for tests of frame invariance.
pub fn random_rotation<T: Real>(n: usize, seed: u64) -> Vec<T> {
    random_orthogonal(n, &mut seeded_rng(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::random_weyl_like;

    fn id(n: usize) -> MetricAtPoint<f64> {
        MetricAtPoint::identity(n)
    }

    #[test]
    fn sphere_algebra_n3() {
        let g = id(3);
        let w = LabeledTensor::zeros_tagged(3, 4, Symmetry::WeylType);
        let e = LabeledTensor::zeros_tagged(3, 2, Symmetry::SymmetricPair);
        let rm = algebra::assemble_riemann(&w, &e, 6.0, &g).unwrap();
        assert!((full_norm_sq(&rm, &g) - 12.0).abs() < 1e-12);
        for v in check_decomposition_identities(&w, &e, 6.0, &g, SYNTHETIC_TOL).unwrap() {
            assert!(v.pass && v.max_residual < 1e-14);
        }
    }

    #[test]
    fn zero_inputs() {
        let g = id(4);
        let z4 = LabeledTensor::zeros_tagged(4, 4, Symmetry::WeylType);
        let z2 = LabeledTensor::zeros_tagged(4, 2, Symmetry::SymmetricPair);
        for v in check_decomposition_identities(&z4, &z2, 0.0, &g, SYNTHETIC_TOL).unwrap() {
            assert_eq!(v.max_residual, 0.0);
        }
        assert!(matches!(
            check_decomposition_identities(&LabeledTensor::zeros(2, 4), &LabeledTensor::zeros(2, 2), 0.0, &id(2), 1.0),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    /// Brute-force loops for the three identities, independent of the
    /// contraction helpers.
    fn brute(rm: &[f64], w: &[f64], e: &[f64], r: f64, n: usize) -> f64 {
        let ix = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
        let nf = n as f64;
        let e2: f64 = e.iter().map(|x| x * x).sum();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let (mut er, mut ew, mut eee, mut rr, mut ww) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for k in 0..n {
                    eee += e[i * n + k] * e[j * n + k];
                    for l in 0..n {
                        er += e[k * n + l] * rm[ix(i, k, j, l)];
                        ew += e[k * n + l] * w[ix(i, k, j, l)];
                        for p in 0..n {
                            rr += rm[ix(i, k, l, p)] * rm[ix(j, k, l, p)];
                            ww += w[ix(i, k, l, p)] * w[ix(j, k, l, p)];
                        }
                    }
                }
                let d = if i == j { 1.0 } else { 0.0 };
                let rhs15 = ew + (e2 * d - 2.0 * eee) / (nf - 2.0) - r * e[i * n + j] / (nf * (nf - 1.0));
                let rhs16 = ww
                    + 4.0 / (nf - 2.0) * ew
                    + 2.0 * (nf - 4.0) / (nf - 2.0).powi(2) * eee
                    + 2.0 / (nf - 2.0).powi(2) * e2 * d
                    + 2.0 / (nf * nf * (nf - 1.0)) * r * r * d
                    + 4.0 / (nf * (nf - 1.0)) * r * e[i * n + j];
                worst = worst.max((er - rhs15).abs()).max((rr - rhs16).abs());
            }
        }
        let rm2: f64 = rm.iter().map(|x| x * x).sum();
        let w2: f64 = w.iter().map(|x| x * x).sum();
        worst.max((rm2 - w2 - 4.0 / (nf - 2.0) * e2 - 2.0 * r * r / (nf * (nf - 1.0))).abs())
    }

    #[test]
    fn brute_force_oracle_n5() {
        let n = 5;
        let g = id(n);
        let mut rng = seeded_rng(99);
        for seed in 0..200u64 {
            let w = random_weyl_like::<f64>(n, seed);
            let e = random_tracefree(&g, &mut rng);
            let r: f64 = rng.gen_range(-5.0..5.0);
            let rm = algebra::assemble_riemann(&w, &e, r, &g).unwrap();
            assert!(brute(rm.as_slice(), w.as_slice(), e.as_slice(), r, n) < 1e-10);
            let res = decomposition_residuals(&rm, &w, &e, r, &g).unwrap();
            assert!(res.iter().all(|&x| x < 1e-10), "{res:?}");
        }
    }

    #[test]
    fn synthetic_suite_all_dims() {
        for n in 3..=6 {
            for v in synthetic_identity_suite::<f64>(n, 50, 7, SYNTHETIC_TOL).unwrap() {
                assert!(v.pass, "n={n} {v:?}");
                assert_eq!(v.samples, 50);
            }
        }
    }

    #[test]
    fn okumura_examples() {
        let g = id(3);
        let z = LabeledTensor::zeros_tagged(3, 2, Symmetry::SymmetricPair);
        assert_eq!(check_okumura(&z, &g), (0.0, 0.0));
        let e = LabeledTensor::new(3, 2, vec![-2.0 / 3.0, 0.0, 0.0, 0.0, 1.0 / 3.0, 0.0, 0.0, 0.0, 1.0 / 3.0], Symmetry::SymmetricPair)
            .unwrap();
        let (e3, _) = cubic_and_norm(&e, &g);
        assert!((e3 + 2.0 / 9.0).abs() < 1e-15);
        let (lo, hi) = check_okumura(&e, &g);
        assert!(lo.abs() < 1e-15 && hi > 0.0);
    }

    /// Eigenvalue oracle: for trace-free `λ`, `Σλ³` is extremal at an
    /// `(n-1)`-fold eigenvalue; check sampled spectra against the bound.
    #[test]
    fn okumura_eigenvalue_oracle_n6() {
        let n = 6;
        let nf = n as f64;
        let k = (nf - 2.0) / (nf * (nf - 1.0)).sqrt();
        let mut rng = seeded_rng(4);
        for _ in 0..10_000 {
            let mut lam: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mean = lam.iter().sum::<f64>() / nf;
            lam.iter_mut().for_each(|x| *x -= mean);
            let e = LabeledTensor::from_fn(n, 2, |ix| if ix[0] == ix[1] { lam[ix[0]] } else { 0.0 });
            let q = random_orthogonal::<f64, _>(n, &mut rng);
            let e = rotate(&e, &q);
            let norm = lam.iter().map(|x| x * x).sum::<f64>().sqrt();
            let cube: f64 = lam.iter().map(|x| x * x * x).sum();
            assert!(cube.abs() <= k * norm.powi(3) + 1e-12);
            let (lo, hi) = check_okumura(&e, &id(n));
            assert!(lo >= -1e-12 && hi >= -1e-12);
            assert!((lo - (cube + k * norm.powi(3))).abs() < 1e-10);
        }
    }

    #[test]
    fn inequality_suite_and_equality_cases() {
        for n in 3..=6 {
            for v in synthetic_inequality_suite::<f64>(n, 2000, 1, SLACK_TOL).unwrap() {
                assert!(v.pass, "{v:?}");
            }
            for v in equality_suite::<f64>(n, 50, 3, 1e-12).unwrap() {
                assert!(v.pass, "{v:?}");
            }
        }
    }

    #[test]
    fn perturbed_equality_case_is_strict() {
        let g = id(5);
        let e = okumura_equality_case(&g, 0.7, 0);
        let mut rng = seeded_rng(8);
        let d = random_tracefree(&g, &mut rng).scaled(1e-2);
        let (lo, _) = check_okumura(&e.add(&d).unwrap(), &g);
        assert!(lo > 1e-8, "{lo}");
    }

    #[test]
    fn huisken_rank_one_plus_identity() {
        let n = 5;
        let g = id(n);
        let w = random_weyl_like::<f64>(n, 17);
        // E = a g + b v⊗v: the g part drops out because W is trace-free and
        // W(v, v, v, v) = 0 by antisymmetry.
        let e = okumura_equality_case(&g, 0.3, 2);
        let we = curvature_on_sym(&w, &e, &g);
        let lhs = crate::tensor::inner(&we, &e, &g).unwrap();
        assert!(lhs.abs() < 1e-13);
        assert!(check_huisken(&w, &e, &g) >= 0.0);
    }

    #[test]
    fn huisken_is_frame_invariant() {
        let n = 4;
        let g = id(n);
        let mut rng = seeded_rng(5);
        for seed in 0..50 {
            let w = random_weyl_like::<f64>(n, seed);
            let e = random_tracefree(&g, &mut rng);
            let q = random_rotation::<f64>(n, seed + 100);
            let a = check_huisken(&w, &e, &g);
            let b = check_huisken(&rotate(&w, &q), &rotate(&e, &q), &g);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn verdict_bookkeeping() {
        let mut v = IdentityVerdict::new("x", 1.0);
        v.record(0.5, Some(1), None);
        v.record(0.2, Some(2), None);
        assert_eq!((v.samples, v.worst_seed, v.pass), (2, Some(1), true));
        let mut u = IdentityVerdict::new("x", 1.0);
        u.record(3.0, Some(9), None);
        let m = v.merge(u);
        assert_eq!((m.samples, m.worst_seed, m.pass), (3, Some(9), false));
        let mut nan = IdentityVerdict::new("x", 1.0);
        nan.record(f64::NAN, None, None);
        nan.record(0.0, None, None);
        assert!(!nan.pass);
    }
}
