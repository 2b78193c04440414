use std::f64::consts::PI;

use rand::Rng;

use super::*;
use crate::tensor::seeded_rng;

fn warped(modes: usize) -> AnsatzFamily {
    AnsatzFamily::WarpedCircleSphere { n: 3, modes }
}

fn params(t: f64, s: f64) -> QuadParams<f64> {
    QuadParams::new(3, t, s).unwrap()
}

fn grid() -> GridSpec {
    GridSpec::default()
}

#[test]
fn base_points() {
    let f = objective(&warped(4), &[0.0; 9], &params(0.0, 0.0), grid()).unwrap();
    let vol = 8.0 * PI * PI;
    // density 2 at unit volume: 2 c⁻⁴ with c = vol^{-1/3}
    assert!((f.value - 2.0 * vol.powf(4.0 / 3.0)).abs() < 1e-9 * f.value);
    assert!((f.volume - vol).abs() < 1e-9 * vol);
    let torus = AnsatzFamily::ConformalTorus { n: 3, modes: 2 };
    assert_eq!(objective(&torus, &[0.0; 5], &params(0.3, 0.7), grid()).unwrap().value, 0.0);
}

#[test]
fn second_variation_of_the_product() {
    // At t = -1/2 a warp ε cos kθ changes the unit-volume objective by
    // -8π² (8π²)^{1/3} k²(k²-2) ε² to second order.
    let p = params(-0.5, 0.0);
    let eps = 1e-3;
    for k in 1..=3 {
        let mut th = vec![0.0; 7];
        th[2 * k - 1] = eps;
        let f = objective(&warped(3), &th, &p, grid()).unwrap().value;
        let kk = (k * k) as f64;
        let want = -8.0 * PI * PI * (8.0 * PI * PI).powf(1.0 / 3.0) * kk * (kk - 2.0) * eps * eps;
        assert!((f - want).abs() < 1e-2 * want.abs(), "k={k}: {f} vs {want}");
    }
}

#[test]
fn gradient_at_the_product() {
    let fam = warped(2);
    let th = [0.0; 5];
    let scale = 2.0 * (8.0 * PI * PI).powf(4.0 / 3.0);
    let g = gradient(&fam, &th, &params(-0.5, 0.0), grid()).unwrap();
    assert!(norm(&g) < 1e-6 * scale, "{g:?}");
    let f = objective(&fam, &th, &params(0.0, 0.0), grid()).unwrap().value;
    let g = gradient(&fam, &th, &params(0.0, 0.0), grid()).unwrap();
    assert!(norm(&g) > 1e-3 * f);
    // Only the radius ratio moves at first order; Fourier modes are
    // stationary by the translation symmetry of the product.
    assert!(g[0].abs() > 1e-3 * f);
    assert!(g[1..].iter().all(|x| x.abs() < 1e-6 * f));
}

#[test]
fn mode_zero_only_changes_volume() {
    let fam = AnsatzFamily::ConformalTorus { n: 3, modes: 2 };
    let p = params(0.2, 0.1);
    let mut th = vec![0.0, 0.05, -0.03, 0.02, 0.01];
    let a = objective(&fam, &th, &p, grid()).unwrap();
    th[0] = 0.7;
    let b = objective(&fam, &th, &p, grid()).unwrap();
    assert!((a.value - b.value).abs() < 1e-8 * a.value.abs().max(1.0));
    assert!((b.volume / a.volume - (2.1f64).exp()).abs() < 1e-9 * b.volume / a.volume);
}

#[test]
fn stationary_start_takes_no_steps() {
    let tr = descend(&warped(1), &[0.0; 3], &params(-0.5, 0.0), &DescentOptions::default()).unwrap();
    assert_eq!(tr.iterates.len(), 1);
    assert_eq!(tr.accepted, 0);
    assert!(tr.converged());
    let res = tr.final_residuals.unwrap();
    assert!(res.critical(1e-5));
}

#[test]
fn conformal_descent_reaches_flat() {
    let fam = AnsatzFamily::ConformalTorus { n: 3, modes: 2 };
    let mut rng = seeded_rng(11);
    let th0: Vec<f64> = (0..5).map(|_| rng.gen_range(-0.02..0.02)).collect();
    let tr = descend(&fam, &th0, &params(0.0, 0.0), &DescentOptions::default()).unwrap();
    assert!(tr.objective.windows(2).all(|w| w[1] <= w[0]));
    assert!(tr.objective[0] > 1.0);
    assert!(*tr.objective.last().unwrap() < 1e-8, "{:?}", tr.objective.last());
    assert!(tr.converged());
}

#[test]
fn positivity_barrier() {
    let fam = warped(1);
    let o = objective(&fam, &[-0.5, 0.6, 0.0], &params(0.0, 0.0), grid()).unwrap();
    assert!(o.barrier && o.value == f64::INFINITY);
    assert!(descend(&fam, &[-0.5, 0.6, 0.0], &params(0.0, 0.0), &DescentOptions::default()).is_err());
    assert!(gradient(&fam, &[-0.4, 0.59995, 0.0], &params(0.0, 0.0), grid()).is_err());
}

#[test]
fn tangent_pairings_at_the_product() {
    let fam = warped(2);
    let th = [0.0; 5];
    let crit = tangent_pairings(&fam, &th, &params(-0.5, 0.0), grid()).unwrap();
    assert!(crit.iter().all(|x| x.abs() < 1e-6), "{crit:?}");
    let off = tangent_pairings(&fam, &th, &params(0.0, 0.0), grid()).unwrap();
    assert!(off[0].abs() > 1e-2, "{off:?}");
    assert!(off[1..].iter().all(|x| x.abs() < 1e-6 * off[0].abs()), "{off:?}");
}

#[test]
fn family_ids() {
    assert_eq!(AnsatzFamily::from_id("warped", 3, 4).unwrap().param_len(), 9);
    assert!(AnsatzFamily::from_id("sphere", 3, 4).is_err());
    assert!(warped(2).spec(&[0.0; 4]).is_err());
    assert!(objective(&warped(1), &[0.0; 3], &QuadParams::new(4, 0.0, 0.0).unwrap(), grid()).is_err());
}
