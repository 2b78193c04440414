use super::*;
use crate::catalog::{build, FourierSeries, GridSpec, MetricSpec};
use crate::tensor::inner;

fn chart(spec: MetricSpec) -> ChartMetric<f64> {
    build(&spec, GridSpec::default()).unwrap()
}

fn sphere(n: usize) -> ChartMetric<f64> {
    chart(MetricSpec::RoundSphere { n, r: 1.0 })
}

fn product(n: usize) -> ChartMetric<f64> {
    chart(MetricSpec::ProductCircleSphere {
        n,
        circle_radius: 1.0,
        r: 1.0,
    })
}

fn bumped_s2s3() -> ChartMetric<f64> {
    chart(MetricSpec::Conformal {
        base: Box::new(MetricSpec::ProductSpheres { p: 2, q: 3, a: 1.0, b: 1.0 }),
        coord: 0,
        u: FourierSeries {
            c0: 0.0,
            cos: vec![0.3],
            sin: vec![],
        },
    })
}

fn bumped_torus() -> ChartMetric<f64> {
    chart(MetricSpec::Conformal {
        base: Box::new(MetricSpec::FlatTorus {
            n: 3,
            side: std::f64::consts::TAU,
        }),
        coord: 0,
        u: FourierSeries {
            c0: 0.0,
            cos: vec![0.2],
            sin: vec![0.1],
        },
    })
}

fn max_over<F>(m: &ChartMetric<f64>, f: F) -> f64
where
    F: Fn(&CurvatureFrame<f64>) -> Result<f64> + Sync,
{
    map_frames(m, &EngineOptions::default(), |_, fr| f(fr))
        .unwrap()
        .into_iter()
        .fold(0.0, f64::max)
}

#[test]
fn round_sphere_frame() {
    let m = sphere(3);
    let f = frame_at(&m, &[0.9, 2.1, 0.0], &EngineOptions::default()).unwrap();
    assert!((f.r - 6.0).abs() < 1e-12);
    assert!(f.norm_e2.abs() < 1e-24);
    assert!((f.norm_rm2 - 12.0).abs() < 1e-10);
    let s = f.second().unwrap();
    assert!(on_max(&s.lap_e, &f.metric) < 1e-8);
}

#[test]
fn round_sphere_every_node() {
    let m = sphere(3);
    let worst = max_over(&m, |f| {
        let ric_gap = on_max(&f.ric.sub(&f.metric.as_tensor().scaled(2.0))?, &f.metric);
        Ok([
            (f.r - 6.0).abs(),
            (f.norm_rm2 - 12.0).abs(),
            ric_gap,
            on_max(&f.e, &f.metric),
            on_max(&f.w, &f.metric),
            on_max(&f.first()?.c, &f.metric),
        ]
        .into_iter()
        .fold(0.0, f64::max))
    });
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn flat_torus_is_flat() {
    let m = chart(MetricSpec::FlatTorus { n: 4, side: 1.0 });
    let worst = max_over(&m, |f| {
        let s = f.second()?;
        Ok([
            f.riemann.max_abs(),
            f.r.abs(),
            f.first()?.c.max_abs(),
            s.lap_e.max_abs(),
            s.div_c.max_abs(),
            check_weyl_reconstruction(f)?,
            check_commutation(f)?,
        ]
        .into_iter()
        .fold(0.0, f64::max))
    });
    assert_eq!(worst, 0.0);
}

#[test]
fn product_circle_sphere_blocks() {
    let m = product(3);
    let worst = max_over(&m, |f| {
        let on = f.metric.to_orthonormal(&f.e);
        // theta direction is first
        let mut eig = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i != j { 0.0 } else if i == 0 { -2.0 / 3.0 } else { 1.0 / 3.0 };
                eig = eig.max((on.get(&[i, j]) - want).abs());
            }
        }
        Ok([
            (f.r - 2.0).abs(),
            (f.norm_rm2 - 4.0).abs(),
            (f.norm_e2 - 2.0 / 3.0).abs(),
            eig,
            on_max(&f.first()?.grad_e, &f.metric),
            check_commutation(f)?,
        ]
        .into_iter()
        .fold(0.0, f64::max))
    });
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn weyl_reconstruction() {
    for (m, tol) in [
        (sphere(4), 1e-8),
        (chart(MetricSpec::FlatTorus { n: 4, side: 1.0 }), 1e-300),
        (bumped_s2s3(), 1e-5),
    ] {
        let r = max_over(&m, check_weyl_reconstruction);
        assert!(r < tol || (tol < 1e-100 && r == 0.0), "{} {r}", m.label());
    }
}

#[test]
fn divergence_of_weyl_is_cotton() {
    let p = chart(MetricSpec::ProductSpheres { p: 2, q: 3, a: 1.0, b: 1.0 });
    assert!(max_over(&p, |f| Ok(check_divweyl_cotton(f)?.residual)) < 1e-6);
    assert!(max_over(&sphere(5), |f| Ok(check_divweyl_cotton(f)?.residual)) < 1e-10);

    let m = bumped_s2s3();
    let rows = map_frames(&m, &EngineOptions::default(), |_, f| check_divweyl_cotton(f)).unwrap();
    let res = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let div = rows.iter().map(|r| r.div_w).fold(0.0, f64::max);
    let cot = rows.iter().map(|r| r.cotton).fold(0.0, f64::max);
    assert!(res < 1e-4, "{res}");
    assert!(div > 1e-2 && cot > 1e-2, "{div} {cot}");

    let f = frame_at(&sphere(3), &[1.0, 1.0, 0.0], &EngineOptions::default()).unwrap();
    assert!(matches!(check_divweyl_cotton(&f), Err(Error::UnsupportedDimension { .. })));
}

#[test]
fn commutation_formula() {
    assert_eq!(max_over(&chart(MetricSpec::FlatTorus { n: 3, side: 1.0 }), check_commutation), 0.0);
    assert!(max_over(&product(3), check_commutation) < 1e-6);
    let r = max_over(&bumped_torus(), check_commutation);
    assert!(r < 1e-4, "{r}");
}

#[test]
fn bianchi_and_cotton_forms_across_catalog() {
    let warped = chart(MetricSpec::WarpedCircleSphere {
        n: 4,
        circle_radius: 1.0,
        warp: FourierSeries {
            c0: 1.0,
            cos: vec![0.2],
            sin: vec![0.05],
        },
    });
    for m in [sphere(3), product(4), bumped_torus(), bumped_s2s3(), warped] {
        let b = max_over(&m, check_contracted_bianchi);
        let c = max_over(&m, check_cotton_forms);
        let (anti, tr) = map_frames(&m, &EngineOptions::default(), |_, f| check_cotton_symmetries(f))
            .unwrap()
            .into_iter()
            .fold((0.0f64, 0.0f64), |(a, t), (x, y)| (a.max(x), t.max(y)));
        assert!(b < 1e-5, "{} bianchi {b}", m.label());
        assert!(c < 1e-8, "{} cotton forms {c}", m.label());
        assert!(anti < 1e-10 && tr < 1e-5, "{} {anti} {tr}", m.label());
    }
}

#[test]
fn frame_invariants() {
    let m = bumped_s2s3();
    let worst = max_over(&m, |f| {
        let s = f.second()?;
        let tr_e = crate::tensor::trace(&f.e, &f.metric)?.abs();
        let tr_h = (crate::tensor::trace(&s.hess_r, &f.metric)? - s.lap_r).abs();
        let tr_h0 = crate::tensor::trace(&s.hess_r_tracefree, &f.metric)?.abs();
        let w_tr = f.w.max_trace(&f.metric)?;
        // Δ|E|² = 2|∇E|² + 2⟨E, ΔE⟩
        let lap_n = (s.lap_e_norm2 - 2.0 * f.first()?.grad_e_norm2 - 2.0 * inner(&f.e, &s.lap_e, &f.metric)?).abs();
        Ok([tr_e, tr_h, tr_h0, w_tr, lap_n / 10.0].into_iter().fold(0.0, f64::max))
    });
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn recentred_frames_match_direct_ones() {
    // Away from the axes the direct chart is accurate, so both routes agree.
    let m = bumped_s2s3();
    let x = [1.1, 0.4, 1.3, 2.0, 0.0];
    let direct = EngineOptions {
        recentre: false,
        ..EngineOptions::default()
    };
    let a = frame_at(&m, &x, &EngineOptions::default()).unwrap();
    let b = frame_at(&m, &x, &direct).unwrap();
    assert!((a.r - b.r).abs() < 1e-12);
    assert!(on_max(&a.riemann.sub(&b.riemann).unwrap(), &a.metric) < 1e-11);
    let (sa, sb) = (a.second().unwrap(), b.second().unwrap());
    assert!(on_max(&sa.lap_e.sub(&sb.lap_e).unwrap(), &a.metric) < 1e-5);
    let (fa, fb) = (a.first().unwrap(), b.first().unwrap());
    assert!(on_max(&fa.div_w.sub(&fb.div_w).unwrap(), &a.metric) < 1e-5);
}

#[test]
fn scaled_and_raw_components_agree() {
    let m = chart(MetricSpec::WarpedCircleSphere {
        n: 4,
        circle_radius: 1.0,
        warp: FourierSeries {
            c0: 1.0,
            cos: vec![0.2],
            sin: vec![],
        },
    });
    let raw = EngineOptions {
        scaled_components: false,
        ..EngineOptions::default()
    };
    let x = [0.7, 1.2, 1.9, 0.0];
    let a = frame_at(&m, &x, &EngineOptions::default()).unwrap();
    let b = frame_at(&m, &x, &raw).unwrap();
    let (sa, sb) = (a.second().unwrap(), b.second().unwrap());
    assert!(on_max(&sa.lap_e.sub(&sb.lap_e).unwrap(), &a.metric) < 1e-4);
    assert!(on_max(&sa.hess_r.sub(&sb.hess_r).unwrap(), &a.metric) < 1e-4);
}

/// `g = e^{2u(x)} δ` on `T³` with `u = a cos x`: closed-form `R` and `R'`.
fn conformal_torus_r(a: f64, x: f64) -> (f64, f64) {
    let (u, u1, u2, u3) = (a * x.cos(), -a * x.sin(), -a * x.cos(), a * x.sin());
    let n = 3.0;
    let e = (-2.0 * u).exp();
    let bracket = 2.0 * (n - 1.0) * u2 + (n - 1.0) * (n - 2.0) * u1 * u1;
    let dbracket = 2.0 * (n - 1.0) * u3 + 2.0 * (n - 1.0) * (n - 2.0) * u1 * u2;
    (-e * bracket, 2.0 * u1 * e * bracket - e * dbracket)
}

#[test]
fn fourth_order_convergence() {
    let a = 0.3;
    let spec = MetricSpec::Conformal {
        base: Box::new(MetricSpec::FlatTorus {
            n: 3,
            side: std::f64::consts::TAU,
        }),
        coord: 0,
        u: FourierSeries {
            c0: 0.0,
            cos: vec![a],
            sin: vec![],
        },
    };
    let err = |periodic: usize| {
        let m = build::<f64>(&spec, GridSpec { periodic, polar: 8 }).unwrap();
        // Same point, steps tied to the grid spacing.
        let x = [0.9, 0.0, 0.0];
        let f = frame_at(&m, &x, &EngineOptions::with_order(DerivOrder::First)).unwrap();
        let (r, dr) = conformal_torus_r(a, x[0]);
        assert!((f.r - r).abs() < 1e-12);
        (f.first().unwrap().grad_r.get(&[0]) - dr).abs()
    };
    let (e1, e2, e3) = (err(12), err(24), err(48));
    assert!(e1 / e2 >= 8.0 && e2 / e3 >= 8.0, "{e1} {e2} {e3}");
}
