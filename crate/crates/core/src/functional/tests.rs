use std::f64::consts::PI;

use super::*;
use crate::catalog::{build, rescale_to_unit_volume, FourierSeries, GridSpec, MetricSpec};

fn chart(spec: MetricSpec) -> ChartMetric<f64> {
    build(&spec, GridSpec::default()).unwrap()
}

fn sphere(n: usize, r: f64) -> ChartMetric<f64> {
    chart(MetricSpec::RoundSphere { n, r })
}

fn product(n: usize) -> ChartMetric<f64> {
    chart(MetricSpec::ProductCircleSphere {
        n,
        circle_radius: 1.0,
        r: 1.0,
    })
}

fn unit(m: &ChartMetric<f64>) -> ChartMetric<f64> {
    rescale_to_unit_volume(m).unwrap().0
}

fn params(n: usize, t: f64, s: f64) -> QuadParams<f64> {
    QuadParams::new(n, t, s).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn three_sphere_integrals() {
    let v = evaluate_functional(&sphere(3, 1.0), &params(3, 0.3, -0.2)).unwrap();
    let vol = 2.0 * PI * PI;
    assert!(rel(v.volume, vol) < 1e-10);
    assert!(rel(v.ric2, 12.0 * vol) < 1e-5);
    assert!(rel(v.r2, 36.0 * vol) < 1e-5);
    assert!(rel(v.rm2, 12.0 * vol) < 1e-5);
    assert!(rel(v.value, (12.0 + 0.3 * 36.0 - 0.2 * 12.0) * vol) < 1e-5);
}

#[test]
fn product_densities() {
    let v = evaluate_functional(&product(3), &params(3, 0.0, 0.0)).unwrap();
    let vol = 8.0 * PI * PI;
    assert!(rel(v.ric2, 2.0 * vol) < 1e-10);
    assert!(rel(v.r2, 4.0 * vol) < 1e-10);
    assert!(rel(v.rm2, 4.0 * vol) < 1e-10);
}

#[test]
fn flat_torus_is_zero() {
    let m = chart(MetricSpec::FlatTorus { n: 3, side: 1.5 });
    let v = evaluate_functional(&m, &params(3, 1.0, 1.0)).unwrap();
    assert_eq!((v.ric2, v.r2, v.rm2, v.value), (0.0, 0.0, 0.0, 0.0));
    assert!(rel(v.volume, 1.5f64.powi(3)) < 1e-12);
    let rep = el_residuals(&unit(&m), &params(3, 1.0, 1.0)).unwrap();
    assert_eq!(rep.entries(), [0.0; 4]);
    assert_eq!(rep.lambda, 0.0);
}

#[test]
fn scaling_law() {
    let s3 = sphere(3, 1.0);
    let p = params(3, 0.2, 0.1);
    assert!(scaling_check(&s3, &p, 2.0).unwrap() < 1e-8);
    let f1 = evaluate_functional(&s3, &p).unwrap().value;
    let f2 = evaluate_functional(&s3.scaled(2.0), &p).unwrap().value;
    assert!(rel(f2, 0.5 * f1) < 1e-12);

    let p4 = params(4, -0.3, 0.5);
    for c in [0.5, 2.0] {
        assert!(scaling_check(&product(4), &p4, c).unwrap() < 1e-8);
    }
    let p5 = params(5, 0.1, 0.1);
    let m5 = product(5);
    assert!(scaling_check(&m5, &p5, 0.5).unwrap() < 1e-8);
    let g1 = evaluate_functional(&m5, &p5).unwrap().value;
    let g2 = evaluate_functional(&m5.scaled(0.5), &p5).unwrap().value;
    assert!(rel(g2, 0.5 * g1) < 1e-12);
    assert!(scaling_check(&m5, &p5, 0.0).is_err());
}

#[test]
fn rejects_non_unit_volume() {
    let err = el_residuals(&sphere(3, 1.0), &params(3, 0.0, 0.0)).unwrap_err();
    assert!(matches!(err, Error::NotUnitVolume { .. }));
    let err = evaluate_functional(&sphere(3, 1.0), &params(4, 0.0, 0.0)).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch { .. }));
}

#[test]
fn round_spheres_are_critical() {
    for n in [3, 5] {
        let m = unit(&sphere(n, 1.0));
        let ps: Vec<_> = [(0.0, 0.0), (-0.4, 0.7), (1.3, -0.2)].map(|(t, s)| params(n, t, s)).to_vec();
        let reps = el_residuals_batch(&m, &ps, &EngineOptions::default()).unwrap();
        for rep in reps {
            assert!(rep.critical(1e-5), "n={n} {rep:?}");
            assert!(rep.bochner1 < 1e-4 && rep.bochner2 < 1e-4, "{rep:?}");
            assert!(rep.form_gap < 1e-6);
        }
    }
}

#[test]
fn product_critical_on_locus_only() {
    for (n, t) in [(3, -0.5), (5, -0.25)] {
        let m = unit(&product(n));
        let rep = el_residuals(&m, &params(n, t, 0.0)).unwrap();
        assert!(rep.critical(1e-5), "n={n} {rep:?}");
        assert!(rep.bochner1 < 1e-4 && rep.bochner2 < 1e-4, "{rep:?}");
        assert!(rep.form_gap < 1e-6 && rep.defect_trace < 1e-8 * rep.curvature_scale);
    }
    let rep = el_residuals(&unit(&product(3)), &params(3, 0.0, 0.0)).unwrap();
    assert!(rep.normalized_traceless > 1e-2, "{rep:?}");
    assert!(rep.defect_trace < 1e-8 * rep.curvature_scale);
}

#[test]
fn product_defect_is_proportional_to_locus() {
    // Before rescaling the defect is (2/3)(1+2t+2s) on sphere directions.
    let m = product(3);
    let p = params(3, 0.3, 0.2).with_lambda(0.0);
    let defects = map_frames(&m, &EngineOptions::default(), |_, f| {
        let d = node_defects(f, &p, 0.0)?;
        Ok(on_max(&d.traceless, &f.metric))
    })
    .unwrap();
    let expect = 4.0 / 3.0 * (1.0 + 0.6 + 0.4);
    for d in defects {
        assert!((d - expect).abs() < 1e-6, "{d} vs {expect}");
    }
}

#[test]
fn residuals_are_rescaling_idempotent() {
    let m = product(3);
    let p = params(3, 0.1, 0.4);
    let a = el_residuals_normalized(&m, &p).unwrap();
    let b = el_residuals_normalized(&unit(&m), &p).unwrap();
    for (x, y) in a.entries().into_iter().zip(b.entries()) {
        assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
    }
}

#[test]
fn consequences_track_the_traceless_defect() {
    // Off the critical set, the consequence identities fail exactly by the
    // traceless defect: form 1 by <E, D>, form 2 by D itself.
    let m = chart(MetricSpec::Conformal {
        base: Box::new(MetricSpec::ProductSpheres { p: 2, q: 3, a: 1.0, b: 1.0 }),
        coord: 0,
        u: FourierSeries {
            c0: 0.0,
            cos: vec![0.3],
            sin: vec![],
        },
    });
    let p = params(5, 0.2, 0.3);
    let gaps = map_frames(&m, &EngineOptions::default(), |_, f| {
        let d = node_defects(f, &p, 0.0)?;
        let b1 = (d.bochner1 - sym_inner(&f.e, &d.traceless, &f.metric)).abs();
        let b2 = on_max(&d.bochner2.sub(&d.traceless)?, &f.metric);
        Ok((b1, b2, on_max(&d.traceless, &f.metric)))
    })
    .unwrap();
    let worst = gaps.iter().fold((0.0f64, 0.0f64, 0.0f64), |a, g| (a.0.max(g.0), a.1.max(g.1), a.2.max(g.2)));
    assert!(worst.2 > 1e-1);
    assert!(worst.0 < 1e-4 * worst.2 && worst.1 < 1e-5 * worst.2, "{worst:?}");
}

#[test]
fn einstein_relation_on_products() {
    for n in [3, 5, 6] {
        let m = product(n);
        let gaps = map_frames(&m, &EngineOptions::with_order(DerivOrder::Pointwise), |_, f| {
            Ok((f.r - ((n * (n - 1)) as f64).sqrt() * f.norm_e2.sqrt()).abs())
        })
        .unwrap();
        assert!(gaps.into_iter().all(|g| g < 1e-8));
    }
}

#[test]
fn locus_roots_and_theorem_constraints() {
    let l3 = CriticalLocus::new(3).unwrap();
    assert_eq!(l3.root_t(0.0), -0.5);
    assert_eq!(l3.root_t(-0.5), 0.0);
    assert!(!l3.sign_condition(-0.25));
    let l5 = CriticalLocus::new(5).unwrap();
    assert_eq!(l5.root_t(0.0), -0.25);
    assert!(l5.thm11_constraint(-0.25, 0.0, true).abs() < 1e-14);
    for n in 3..9 {
        let l = CriticalLocus::new(n).unwrap();
        for (t, s) in [(0.3, 0.1), (-1.0, 2.0), (0.0, 0.0), (0.7, -0.05)] {
            if l.sign_condition(s) {
                assert!((l.thm11_constraint(t, s, true) - l.thm11_reduced(t, s)).abs() < 1e-12);
            }
            let q = params(n, t, s);
            if q.cubic_coefficient() > 0.0 {
                assert!((l.thm12_constraint(t, s) - l.thm12_reduced(t, s)).abs() < 1e-11);
            }
        }
    }
    assert!(CriticalLocus::new(2).is_err());
}

#[test]
fn sweep_over_t_finds_the_root() {
    // Traceless residual on the unit product is affine in t and vanishes at the root.
    let m = unit(&product(3));
    let ps: Vec<_> = [-1.0, -0.5, 0.0].map(|t| params(3, t, 0.0)).to_vec();
    let reps = el_residuals_batch(&m, &ps, &EngineOptions::default()).unwrap();
    let (a, b) = (reps[0].residual_traceless, reps[2].residual_traceless);
    assert!(reps[1].residual_traceless < 1e-5);
    assert!((a - b).abs() < 1e-6 * a, "symmetric about the root: {a} {b}");
}

#[test]
fn integrands_vanish_on_spheres() {
    let m = unit(&sphere(3, 1.0));
    let p = params(3, 0.1, 0.2);
    for which in Integrand::ALL {
        let rep = theorem_integrands(&m, &p, which).unwrap();
        assert!(rep.integral.abs() < 1e-8, "{which:?} {}", rep.integral);
        if let Some(r) = rep.rhs_integral {
            assert!(r.abs() < 1e-8);
        }
    }
}

#[test]
fn product_equality_case() {
    // 1 + 2t + 2s = 0, s > -1/4: the |E|³ and R|E|² terms cancel.
    let m = unit(&product(3));
    let p = params(3, -0.8, 0.3);
    let rep = theorem_integrands(&m, &p, Integrand::Thm11First).unwrap();
    let scale = rep.density.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    assert!(scale < 1e-8, "{scale}");
    let rep = theorem_integrands(&m, &params(3, 0.0, 0.0), Integrand::Thm11First).unwrap();
    assert!(rep.integral < -1e-2);
}

#[test]
fn weyl_terms_drop_at_s_zero() {
    let c = thm11_coeffs(&params(5, 0.3, 0.0));
    assert_eq!(c.w2e, 0.0);
}

#[test]
fn lemma_needs_positive_scalar_curvature() {
    let m = chart(MetricSpec::FlatTorus { n: 3, side: 1.0 });
    let err = theorem_integrands(&m, &params(3, 0.0, 1.0), Integrand::Lemma31).unwrap_err();
    assert!(matches!(err, Error::Hypothesis(_)));
    let err = theorem_integrands(&product(4), &params(4, 0.0, 1.0), Integrand::Lemma31).unwrap_err();
    assert!(matches!(err, Error::UnsupportedDimension { .. }));
    assert_eq!(Integrand::from_id("3For-th-1").unwrap(), Integrand::Thm12);
}

#[test]
fn reduction_is_deterministic() {
    let m = product(3);
    let p = params(3, 0.4, 0.2);
    let a = evaluate_functional(&m, &p).unwrap();
    let b = evaluate_functional(&m, &p).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}
