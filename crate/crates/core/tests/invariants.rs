use std::f64::consts::TAU;

use critmetric::catalog::{build, FourierSeries, GridSpec, MetricSpec};
use critmetric::flow::{objective, AnsatzFamily};
use critmetric::functional::{scaling_check, CriticalLocus, QuadParams};
use critmetric::identities::{
    check_huisken, check_okumura, random_rotation, rotate, synthetic_identity_suite, synthetic_inequality_suite,
    IdentityVerdict,
};
use critmetric::tensor::{random_tracefree, random_weyl_like, seeded_rng, MetricAtPoint};
use critmetric::Chart;
use proptest::prelude::*;

fn small_grid() -> GridSpec {
    GridSpec { periodic: 8, polar: 6 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_identities_hold(n in 3usize..=6, seed in any::<u64>()) {
        for v in synthetic_identity_suite::<f64>(n, 1, seed >> 1, 1e-10).unwrap() {
            prop_assert!(v.pass, "{} {}", v.id, v.max_residual);
        }
    }

    #[test]
    fn sharp_inequalities_hold(n in 3usize..=6, seed in any::<u64>()) {
        for v in synthetic_inequality_suite::<f64>(n, 1, seed >> 1, 1e-12).unwrap() {
            prop_assert!(v.pass, "{} {}", v.id, v.max_residual);
        }
    }

    #[test]
    fn huisken_and_okumura_are_frame_invariant(n in 4usize..=6, seed in 0u64..1_000_000) {
        let g = MetricAtPoint::<f64>::identity(n);
        let w = random_weyl_like::<f64>(n, seed);
        let e = random_tracefree(&g, &mut seeded_rng(seed ^ 0x5a5a));
        let q = random_rotation::<f64>(n, seed.wrapping_add(17));
        let (wq, eq) = (rotate(&w, &q), rotate(&e, &q));
        let scale = 1.0 + check_huisken(&w, &e, &g).abs();
        prop_assert!((check_huisken(&w, &e, &g) - check_huisken(&wq, &eq, &g)).abs() < 1e-10 * scale);
        let (a, b) = (check_okumura(&e, &g), check_okumura(&eq, &g));
        prop_assert!((a.0 - b.0).abs() < 1e-10 * (1.0 + a.0.abs()));
        prop_assert!((a.1 - b.1).abs() < 1e-10 * (1.0 + a.1.abs()));
    }

    #[test]
    fn verdict_merge_is_associative(xs in prop::collection::vec(0.0f64..1.0, 3..12), cut1 in 0usize..4, cut2 in 0usize..4) {
        let fold = |part: &[f64]| {
            let mut v = IdentityVerdict::new("x", 0.5);
            for (k, &r) in part.iter().enumerate() {
                v.record(r, Some(k as u64), None);
            }
            v
        };
        let i = cut1.min(xs.len());
        let j = (i + cut2).min(xs.len());
        let (a, b, c) = (fold(&xs[..i]), fold(&xs[i..j]), fold(&xs[j..]));
        let left = a.clone().merge(b.clone()).merge(c.clone());
        let right = a.merge(b.merge(c));
        prop_assert_eq!(left.max_residual, right.max_residual);
        prop_assert_eq!(left.samples, right.samples);
        prop_assert_eq!(left.pass, right.pass);
    }

    #[test]
    fn locus_root_is_a_zero(n in 3usize..=8, s in -2.0f64..2.0) {
        let l = CriticalLocus::new(n).unwrap();
        let t = l.root_t(s);
        prop_assert!(l.eval(t, s).abs() < 1e-12 * (1.0 + s.abs()) * (n * n) as f64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn functional_scales_with_c_to_the_n_minus_4(
        n in 3usize..=5,
        c in 0.3f64..3.0,
        t in -1.0f64..1.0,
        s in -1.0f64..1.0,
        a in -0.3f64..0.3,
    ) {
        let spec = MetricSpec::Conformal {
            base: Box::new(MetricSpec::FlatTorus { n, side: TAU }),
            coord: 0,
            u: FourierSeries { c0: 0.0, cos: vec![a], sin: vec![0.1] },
        };
        let m: Chart = build(&spec, small_grid()).unwrap();
        let p = QuadParams::new(n, t, s).unwrap();
        prop_assert!(scaling_check(&m, &p, c).unwrap() < 1e-8);
    }

    #[test]
    fn conformal_mode_zero_only_changes_volume(
        shift in -1.0f64..1.0,
        th in prop::collection::vec(-0.05f64..0.05, 5),
        t in -0.5f64..0.5,
        s in -0.5f64..0.5,
    ) {
        let fam = AnsatzFamily::ConformalTorus { n: 3, modes: 2 };
        let p = QuadParams::new(3, t, s).unwrap();
        let a = objective(&fam, &th, &p, small_grid()).unwrap();
        let mut moved = th.clone();
        moved[0] += shift;
        let b = objective(&fam, &moved, &p, small_grid()).unwrap();
        prop_assert!((a.value - b.value).abs() < 1e-8 * a.value.abs().max(1.0));
    }
}
