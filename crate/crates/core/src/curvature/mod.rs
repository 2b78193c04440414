//! Curvature frames: the full set of curvature quantities at a grid point.
//!
//! Zeroth-order quantities (Riemann, Ricci, `E`, `W`) come from the analytic
//! metric jet. Covariant derivatives are built from 4th-order central
//! differences along the coordinates the metric depends on, corrected with
//! the analytic Christoffel symbols and their analytic first partials.
//! Tensor components are differenced after dividing by `√g_ii` per index and
//! converted back with the analytic log-derivatives of the metric, so fields
//! that are parallel in a diagonal metric difference exactly. Second
//! derivatives of `R`, `E` and `|E|²` use the second-difference and a
//! diagonal mixed stencil directly rather than differencing twice.
//!
//! Points near the axes of a round sphere factor are evaluated at an
//! isometric image on the equator and pulled back.

pub mod algebra;
mod checks;
pub(crate) mod point;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use checks::{
    check_commutation, check_contracted_bianchi, check_cotton_forms, check_cotton_symmetries, check_divweyl_cotton,
    check_weyl_reconstruction, on_max, DivWeylCotton,
};

use crate::catalog::{ChartMetric, MetricJet, Node};
use crate::tensor::{change_basis, LabeledTensor, MetricAtPoint, Symmetry};
use crate::{Error, Real, Result};
use point::{PointCurvature, SampleLayout};

/// How many derivative orders a frame carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivOrder {
    Pointwise,
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineOptions {
    pub order: DerivOrder,
    /// Combine steps `h` and `h/2` as `(16 D(h/2) - D(h)) / 15`.
    pub richardson: bool,
    /// Step as a fraction of the smallest active grid spacing; also caps the
    /// step at this fraction of the distance to a polar singularity.
    pub step_fraction: f64,
    pub min_step: f64,
    /// Difference components divided by `√g_ii` per index instead of raw
    /// coordinate components.
    pub scaled_components: bool,
    /// Evaluate at the isometric image with round factors on their equator
    /// and pull the result back.
    pub recentre: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            order: DerivOrder::Second,
            richardson: false,
            step_fraction: 0.25,
            min_step: 1e-7,
            scaled_components: true,
            recentre: true,
        }
    }
}

impl EngineOptions {
    pub fn with_order(order: DerivOrder) -> Self {
        Self {
            order,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct FirstOrder<T> {
    /// `R_{,i}`
    pub grad_r: LabeledTensor<T>,
    /// `E_{ij,k}` at `[i, j, k]`.
    pub grad_e: LabeledTensor<T>,
    /// `R_{ij,k} = E_{ij,k} + R_{,k} g_ij / n`.
    pub grad_ric: LabeledTensor<T>,
    /// Cotton tensor from the `E` form.
    pub c: LabeledTensor<T>,
    /// Cotton tensor from the Ricci form.
    pub c_ricci_form: LabeledTensor<T>,
    /// `W_{ijkl,l}` at `[i, j, k]`.
    pub div_w: LabeledTensor<T>,
    /// `|∇E|²`
    pub grad_e_norm2: T,
    /// `|∇|E||²`, undefined where `E` vanishes.
    pub grad_abs_e_norm2: Option<T>,
}

#[derive(Clone, Debug)]
pub struct SecondOrder<T> {
    /// `R_{,ij}`
    pub hess_r: LabeledTensor<T>,
    /// `R_{,ij} - (ΔR/n) g_ij`
    pub hess_r_tracefree: LabeledTensor<T>,
    pub lap_r: T,
    /// `E_{ij,ab} = ∇_b ∇_a E_ij` at `[i, j, a, b]`.
    pub hess_e: LabeledTensor<T>,
    /// `ΔE_ij`
    pub lap_e: LabeledTensor<T>,
    /// `C_{kij,k}`
    pub div_c: LabeledTensor<T>,
    /// `Δ|E|²`, differenced from the scalar field `|E|²`.
    pub lap_e_norm2: T,
}

#[derive(Clone, Debug)]
pub struct CurvatureFrame<T> {
    pub point: Vec<T>,
    pub metric: MetricAtPoint<T>,
    pub riemann: LabeledTensor<T>,
    pub ric: LabeledTensor<T>,
    pub r: T,
    pub e: LabeledTensor<T>,
    pub w: LabeledTensor<T>,
    pub norm_rm2: T,
    pub norm_e2: T,
    pub norm_w2: T,
    /// Finite-difference step used at this point (`None` when the metric has
    /// no active coordinates or no derivatives were requested).
    pub step: Option<T>,
    pub first: Option<FirstOrder<T>>,
    pub second: Option<SecondOrder<T>>,
}

impl<T: Real> CurvatureFrame<T> {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn first(&self) -> Result<&FirstOrder<T>> {
        self.first
            .as_ref()
            .ok_or_else(|| Error::Numerical("frame was computed without first derivatives".into()))
    }

    pub fn second(&self) -> Result<&SecondOrder<T>> {
        self.second
            .as_ref()
            .ok_or_else(|| Error::Numerical("frame was computed without second derivatives".into()))
    }

    /// `|Ric|²`
    pub fn norm_ric2(&self) -> T {
        point::sym_norm_sq(&self.ric, &self.metric)
    }

    pub fn norm_c2(&self) -> Result<T> {
        Ok(algebra::full_norm_sq(&self.first()?.c, &self.metric))
    }
}

/// Partial derivatives of the sampled fields.
struct Partials<T> {
    /// Per coordinate, empty when inactive.
    d1: Vec<Vec<T>>,
    /// `d2[a*n + b]` for active `a <= b`, empty otherwise.
    d2: Vec<Vec<T>>,
}

const W1: [f64; 4] = [1.0, -8.0, 8.0, -1.0];
const OFFS: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];

fn partials<T: Real>(
    m: &ChartMetric<T>,
    x: &[T],
    h: T,
    layout: &SampleLayout,
    center: &[T],
    second: bool,
) -> Result<Partials<T>> {
    let n = m.dim();
    let active = m.active_coords();
    let mut jet = MetricJet::default();
    let mut buf = Vec::new();
    let mut y = x.to_vec();
    let mut d1 = vec![Vec::new(); n];
    let mut d2 = vec![Vec::new(); n * n];
    let twelve_h = T::lit(12.0) * h;
    let mixed_len = layout.mixed_len();
    for &a in &active {
        let mut acc = vec![T::zero(); layout.axis_len()];
        let mut acc2 = vec![T::zero(); if second { mixed_len } else { 0 }];
        for (&o, &w) in OFFS.iter().zip(&W1) {
            y[a] = x[a] + T::lit(o) * h;
            layout.sample(m, &y, true, &mut jet, &mut buf)?;
            let w = T::lit(w);
            for (s, v) in acc.iter_mut().zip(&buf) {
                *s = *s + w * *v;
            }
            // -1, 16, -30, 16, -1
            let w2 = T::lit(if o.abs() == 2.0 { -1.0 } else { 16.0 });
            for (s, v) in acc2.iter_mut().zip(&buf) {
                *s = *s + w2 * *v;
            }
        }
        y[a] = x[a];
        acc.iter_mut().for_each(|s| *s = *s / twelve_h);
        if second {
            let denom = twelve_h * h;
            for (s, c) in acc2.iter_mut().zip(center) {
                *s = (*s - T::lit(30.0) * *c) / denom;
            }
            d2[a * n + a] = acc2;
        }
        d1[a] = acc;
    }
    if second {
        // (16 A(h) - A(2h)) / (48 h²) with A(k) the four-corner difference
        // along the diagonals; fourth order and half the points of the
        // product stencil.
        let denom = T::lit(48.0) * h * h;
        for (ia, &a) in active.iter().enumerate() {
            for &b in &active[ia + 1..] {
                let mut acc = vec![T::zero(); mixed_len];
                for (k, wk) in [(1.0, 16.0), (2.0, -1.0)] {
                    for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                        y[a] = x[a] + T::lit(sa * k) * h;
                        y[b] = x[b] + T::lit(sb * k) * h;
                        layout.sample(m, &y, false, &mut jet, &mut buf)?;
                        let w = T::lit(wk * sa * sb);
                        for (s, v) in acc.iter_mut().zip(&buf) {
                            *s = *s + w * *v;
                        }
                    }
                }
                y[a] = x[a];
                y[b] = x[b];
                acc.iter_mut().for_each(|s| *s = *s / denom);
                d2[a * n + b] = acc;
            }
        }
    }
    Ok(Partials { d1, d2 })
}

fn richardson<T: Real>(coarse: Partials<T>, fine: Partials<T>) -> Partials<T> {
    let mix = |c: Vec<Vec<T>>, f: Vec<Vec<T>>| -> Vec<Vec<T>> {
        c.into_iter()
            .zip(f)
            .map(|(c, f)| {
                c.iter()
                    .zip(&f)
                    .map(|(&c, &f)| (T::lit(16.0) * f - c) / T::lit(15.0))
                    .collect()
            })
            .collect()
    };
    Partials {
        d1: mix(coarse.d1, fine.d1),
        d2: mix(coarse.d2, fine.d2),
    }
}

/// Finite-difference step at `x`.
pub fn step_at<T: Real>(m: &ChartMetric<T>, x: &[T], opts: &EngineOptions) -> Result<Option<T>> {
    let Some(spacing) = m.min_spacing() else {
        return Ok(None);
    };
    let frac = T::lit(opts.step_fraction);
    let mut h = spacing * frac;
    if let Some(d) = m.boundary_distance(x) {
        h = h.min(d * frac);
    }
    if !(h >= T::lit(opts.min_step)) {
        return Err(Error::Numerical(format!(
            "finite-difference step {h} underflows near the chart boundary"
        )));
    }
    Ok(Some(h))
}

/// All curvature quantities at `x`.
pub fn frame_at<T: Real>(m: &ChartMetric<T>, x: &[T], opts: &EngineOptions) -> Result<CurvatureFrame<T>> {
    m.validate_point(x)?;
    if opts.recentre {
        if let Some((y, jac)) = m.recentred(x) {
            let f = frame_in_chart(m, &y, opts)?;
            return pull_back(&f, x, &jac, m.metric_at(x)?);
        }
    }
    frame_in_chart(m, x, opts)
}

/// Frame pulled back along a map with Jacobian `jac = ∂y/∂x` (row-major,
/// rows indexed by `y`).
fn pull_back<T: Real>(f: &CurvatureFrame<T>, x: &[T], jac: &[T], metric: MetricAtPoint<T>) -> Result<CurvatureFrame<T>> {
    let pb = |t: &LabeledTensor<T>| change_basis(t, jac);
    let first = f.first.as_ref().map(|d| FirstOrder {
        grad_r: pb(&d.grad_r),
        grad_e: pb(&d.grad_e),
        grad_ric: pb(&d.grad_ric),
        c: pb(&d.c),
        c_ricci_form: pb(&d.c_ricci_form),
        div_w: pb(&d.div_w),
        grad_e_norm2: d.grad_e_norm2,
        grad_abs_e_norm2: d.grad_abs_e_norm2,
    });
    let second = f.second.as_ref().map(|d| SecondOrder {
        hess_r: pb(&d.hess_r),
        hess_r_tracefree: pb(&d.hess_r_tracefree),
        lap_r: d.lap_r,
        hess_e: pb(&d.hess_e),
        lap_e: pb(&d.lap_e),
        div_c: pb(&d.div_c),
        lap_e_norm2: d.lap_e_norm2,
    });
    Ok(CurvatureFrame {
        point: x.to_vec(),
        metric,
        riemann: pb(&f.riemann),
        ric: pb(&f.ric),
        r: f.r,
        e: pb(&f.e),
        w: pb(&f.w),
        norm_rm2: f.norm_rm2,
        norm_e2: f.norm_e2,
        norm_w2: f.norm_w2,
        step: f.step,
        first,
        second,
    })
}

fn frame_in_chart<T: Real>(m: &ChartMetric<T>, x: &[T], opts: &EngineOptions) -> Result<CurvatureFrame<T>> {
    let n = m.dim();
    if n < 3 {
        return Err(Error::UnsupportedDimension {
            n,
            reason: "curvature frames need n >= 3",
        });
    }
    let mut jet = MetricJet::default();
    m.jet_at(x, &mut jet);
    let pc = PointCurvature::new(&jet)?;
    let w = pc.weyl()?;
    let metric = pc.geo.metric.clone();
    let norm_rm2 = algebra::full_norm_sq(&pc.riemann, &metric);
    let norm_w2 = algebra::full_norm_sq(&w, &metric);

    let mut frame = CurvatureFrame {
        point: x.to_vec(),
        metric,
        riemann: pc.riemann.clone(),
        ric: pc.ric.clone(),
        r: pc.r,
        e: pc.e.clone(),
        w: w.clone(),
        norm_rm2,
        norm_e2: pc.e_norm2,
        norm_w2,
        step: None,
        first: None,
        second: None,
    };
    if opts.order == DerivOrder::Pointwise {
        return Ok(frame);
    }
    let second = opts.order == DerivOrder::Second;
    let layout = SampleLayout {
        n,
        scaled: opts.scaled_components,
    };
    let mut center = Vec::new();
    layout.push_fields(&pc, false, &mut center)?;

    let step = step_at(m, x, opts)?;
    let parts = match step {
        None => Partials {
            d1: vec![Vec::new(); n],
            d2: vec![Vec::new(); n * n],
        },
        Some(h) => {
            let coarse = partials(m, x, h, &layout, &center, second)?;
            if opts.richardson {
                let fine = partials(m, x, h * T::lit(0.5), &layout, &center, second)?;
                richardson(coarse, fine)
            } else {
                coarse
            }
        }
    };
    frame.step = step;
    let active = m.active_coords();
    let cp = CoordPartials::new(&pc, &w, &jet, &layout, &parts, second);
    let first = first_order(&pc, &w, &cp)?;
    if second {
        let dgamma = pc.geo.dgamma(&jet, &active);
        frame.second = Some(second_order(&pc, &first, &cp, &dgamma)?);
    }
    frame.first = Some(first);
    Ok(frame)
}

/// Coordinate partials `∂_a`, `∂_a ∂_b` of `R`, `|E|²`, `E_ij` and `W_ijkl`,
/// recovered from the partials of the scaled samples by the product rule
/// with the analytic `∂ log √g_ii`.
struct CoordPartials<T> {
    n: usize,
    dr: Vec<T>,
    dn: Vec<T>,
    /// `a*n² + ij`
    de: Vec<T>,
    /// `m*n⁴ + ijkl`
    dw: Vec<T>,
    /// `a*n + b`
    d2r: Vec<T>,
    d2n: Vec<T>,
    /// `(a*n + b)*n² + ij`
    d2e: Vec<T>,
}

impl<T: Real> CoordPartials<T> {
    fn new(
        pc: &PointCurvature<T>,
        w: &LabeledTensor<T>,
        jet: &MetricJet<T>,
        layout: &SampleLayout,
        parts: &Partials<T>,
        second: bool,
    ) -> Self {
        let n = pc.geo.n;
        let n2 = n * n;
        let n4 = n2 * n2;
        let g = &pc.geo.metric;
        let two = T::lit(2.0);
        let p1 = |a: usize, slot: usize| parts.d1[a].get(slot).copied().unwrap_or(T::zero());
        let p2 = |a: usize, b: usize, slot: usize| {
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            parts.d2[a * n + b].get(slot).copied().unwrap_or(T::zero())
        };
        let s: Vec<T> = layout.inv_scales(g).into_iter().map(|v| T::one() / v).collect();
        // ℓ_{a,i} = ∂_a g_ii / (2 g_ii)
        let mut ell = vec![T::zero(); n2];
        let mut dell = vec![T::zero(); if second { n2 * n } else { 0 }];
        if layout.scaled {
            for a in 0..n {
                for i in 0..n {
                    ell[a * n + i] = jet.dg[(a * n + i) * n + i] / (two * g.g(i, i));
                }
            }
            if second {
                for a in 0..n {
                    for b in 0..n {
                        for i in 0..n {
                            let gii = g.g(i, i);
                            let d2 = jet.d2g[((a * n + b) * n + i) * n + i];
                            let da = jet.dg[(a * n + i) * n + i];
                            let db = jet.dg[(b * n + i) * n + i];
                            dell[(a * n + b) * n + i] = d2 / (two * gii) - da * db / (two * gii * gii);
                        }
                    }
                }
            }
        }
        let e = pc.e.as_slice();
        let dr: Vec<T> = (0..n).map(|a| p1(a, SampleLayout::R)).collect();
        let dn: Vec<T> = (0..n).map(|a| p1(a, SampleLayout::E_NORM2)).collect();
        let mut de = vec![T::zero(); n * n2];
        for a in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let ij = i * n + j;
                    de[a * n2 + ij] =
                        e[ij] * (ell[a * n + i] + ell[a * n + j]) + s[i] * s[j] * p1(a, SampleLayout::E + ij);
                }
            }
        }
        let ws = w.as_slice();
        let w_off = layout.w();
        let mut dw = vec![T::zero(); n * n4];
        for mm in 0..n {
            if parts.d1[mm].is_empty() {
                continue;
            }
            let l = &ell[mm * n..mm * n + n];
            for f in 0..n4 {
                let (i, j, k, q) = (f / (n2 * n), (f / n2) % n, (f / n) % n, f % n);
                dw[mm * n4 + f] =
                    ws[f] * (l[i] + l[j] + l[k] + l[q]) + s[i] * s[j] * s[k] * s[q] * p1(mm, w_off + f);
            }
        }
        let (mut d2r, mut d2n, mut d2e) = (Vec::new(), Vec::new(), Vec::new());
        if second {
            d2r = vec![T::zero(); n2];
            d2n = vec![T::zero(); n2];
            d2e = vec![T::zero(); n2 * n2];
            for a in 0..n {
                for b in 0..n {
                    d2r[a * n + b] = p2(a, b, SampleLayout::R);
                    d2n[a * n + b] = p2(a, b, SampleLayout::E_NORM2);
                    for i in 0..n {
                        for j in 0..n {
                            let ij = i * n + j;
                            let sij = s[i] * s[j];
                            d2e[(a * n + b) * n2 + ij] = de[b * n2 + ij] * (ell[a * n + i] + ell[a * n + j])
                                + if layout.scaled {
                                    e[ij] * (dell[(a * n + b) * n + i] + dell[(a * n + b) * n + j])
                                } else {
                                    T::zero()
                                }
                                + sij * (ell[b * n + i] + ell[b * n + j]) * p1(a, SampleLayout::E + ij)
                                + sij * p2(a, b, SampleLayout::E + ij);
                        }
                    }
                }
            }
        }
        Self {
            n,
            dr,
            dn,
            de,
            dw,
            d2r,
            d2n,
            d2e,
        }
    }

    #[inline]
    fn de(&self, a: usize, ij: usize) -> T {
        self.de[a * self.n * self.n + ij]
    }
}

/// `∇_a T_ij = ∂_a T_ij - Γ^m_{ai} T_mj - Γ^m_{aj} T_im` at `(i*n + j)*n + a`.
fn covariant_sym<T: Real>(pc: &PointCurvature<T>, t: &[T], partial: impl Fn(usize, usize) -> T) -> Vec<T> {
    let n = pc.geo.n;
    let mut out = vec![T::zero(); n * n * n];
    for i in 0..n {
        for j in 0..n {
            for a in 0..n {
                let mut v = partial(a, i * n + j);
                for m in 0..n {
                    v = v - pc.geo.gam(m, a, i) * t[m * n + j] - pc.geo.gam(m, a, j) * t[i * n + m];
                }
                out[(i * n + j) * n + a] = v;
            }
        }
    }
    out
}

fn first_order<T: Real>(pc: &PointCurvature<T>, w: &LabeledTensor<T>, cp: &CoordPartials<T>) -> Result<FirstOrder<T>> {
    let n = cp.n;
    let g = &pc.geo.metric;
    let nf = T::from_usize_lossy(n);
    let grad_r = cp.dr.clone();
    let grad_e = covariant_sym(pc, pc.e.as_slice(), |a, ij| cp.de(a, ij));
    // ∇Ric = ∇E + (∇R/n) g, since g is parallel.
    let grad_ric: Vec<T> = (0..n * n * n)
        .map(|f| grad_e[f] + grad_r[f % n] / nf * g.g(f / (n * n), (f / n) % n))
        .collect();
    let c = algebra::cotton_from_traceless(&grad_e, &grad_r, g).tagged_unchecked(Symmetry::CottonType);
    let c_ricci_form = algebra::cotton_from_ricci(&grad_ric, &grad_r, g).tagged_unchecked(Symmetry::CottonType);

    // W_{ijkl,l} = g^{lm} (∂_m W_ijkl - Γ-corrections on all four slots)
    let ws = w.as_slice();
    let n4 = n.pow(4);
    let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
    let mut div_w = vec![T::zero(); n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = T::zero();
                for l in 0..n {
                    for mm in 0..n {
                        let gi = g.inv(l, mm);
                        if gi == T::zero() {
                            continue;
                        }
                        let mut v = cp.dw[mm * n4 + idx(i, j, k, l)];
                        for p in 0..n {
                            v = v - pc.geo.gam(p, mm, i) * ws[idx(p, j, k, l)]
                                - pc.geo.gam(p, mm, j) * ws[idx(i, p, k, l)]
                                - pc.geo.gam(p, mm, k) * ws[idx(i, j, p, l)]
                                - pc.geo.gam(p, mm, l) * ws[idx(i, j, k, p)];
                        }
                        acc = acc + gi * v;
                    }
                }
                div_w[(i * n + j) * n + k] = acc;
            }
        }
    }

    let grad_e = LabeledTensor::new(n, 3, grad_e, Symmetry::None)?;
    let grad_e_norm2 = algebra::full_norm_sq(&grad_e, g);
    // ∇_k |E| = E^{ij} E_{ij,k} / |E|
    let grad_abs_e_norm2 = if pc.e_norm2 > T::lit(1e-24) {
        let half_grad = crate::tensor::contract(&pc.e, &grad_e, &[(0, 0), (1, 1)], g)?;
        Some(algebra::full_norm_sq(&half_grad, g) / pc.e_norm2)
    } else {
        None
    };
    Ok(FirstOrder {
        grad_r: LabeledTensor::new(n, 1, grad_r, Symmetry::None)?,
        grad_e,
        grad_ric: LabeledTensor::new(n, 3, grad_ric, Symmetry::None)?,
        c,
        c_ricci_form,
        div_w: LabeledTensor::new(n, 3, div_w, Symmetry::None)?,
        grad_e_norm2,
        grad_abs_e_norm2,
    })
}

fn second_order<T: Real>(
    pc: &PointCurvature<T>,
    first: &FirstOrder<T>,
    cp: &CoordPartials<T>,
    dgamma: &[T],
) -> Result<SecondOrder<T>> {
    let n = cp.n;
    let n2 = n * n;
    let geo = &pc.geo;
    let g = &geo.metric;
    let nf = T::from_usize_lossy(n);

    let hess_scalar = |d2: &[T], grad: &[T]| -> Vec<T> {
        let mut h = vec![T::zero(); n2];
        for a in 0..n {
            for b in a..n {
                let mut v = T::lit(0.5) * (d2[a * n + b] + d2[b * n + a]);
                for m in 0..n {
                    v = v - geo.gam(m, a, b) * grad[m];
                }
                h[a * n + b] = v;
                h[b * n + a] = v;
            }
        }
        h
    };
    let laplacian = |h: &[T]| -> T {
        let mut acc = T::zero();
        for a in 0..n {
            for b in 0..n {
                acc = acc + g.inv(a, b) * h[a * n + b];
            }
        }
        acc
    };

    let hess_r = hess_scalar(&cp.d2r, &cp.dr);
    let lap_r = laplacian(&hess_r);
    let lap_e_norm2 = laplacian(&hess_scalar(&cp.d2n, &cp.dn));

    // E_{ij,ab} = ∂_b(∇_a E_ij) - Γ^m_{bi} ∇_a E_mj - Γ^m_{bj} ∇_a E_im - Γ^m_{ba} ∇_m E_ij
    let e = pc.e.as_slice();
    let ge = first.grad_e.as_slice();
    let de = |b: usize, ij: usize| cp.de(b, ij);
    let dgam = |b: usize, m: usize, a: usize, i: usize| dgamma[((b * n + m) * n + a) * n + i];
    let mut hess_e = vec![T::zero(); n2 * n2];
    for i in 0..n {
        for j in i..n {
            for a in 0..n {
                for b in 0..n {
                    let mut v = cp.d2e[(a * n + b) * n2 + i * n + j];
                    for m in 0..n {
                        v = v - dgam(b, m, a, i) * e[m * n + j]
                            - geo.gam(m, a, i) * de(b, m * n + j)
                            - dgam(b, m, a, j) * e[i * n + m]
                            - geo.gam(m, a, j) * de(b, i * n + m)
                            - geo.gam(m, b, i) * ge[(m * n + j) * n + a]
                            - geo.gam(m, b, j) * ge[(i * n + m) * n + a]
                            - geo.gam(m, b, a) * ge[(i * n + j) * n + m];
                    }
                    hess_e[((i * n + j) * n + a) * n + b] = v;
                    hess_e[((j * n + i) * n + a) * n + b] = v;
                }
            }
        }
    }
    let he = |i: usize, j: usize, a: usize, b: usize| hess_e[((i * n + j) * n + a) * n + b];
    let mut lap_e = vec![T::zero(); n2];
    let mut div_c = vec![T::zero(); n2];
    let c = (nf - T::lit(2.0)) / (T::lit(2.0) * nf * (nf - T::one()));
    for i in 0..n {
        for j in 0..n {
            let mut lap = T::zero();
            let mut cross = T::zero();
            for a in 0..n {
                for b in 0..n {
                    let gi = g.inv(a, b);
                    if gi == T::zero() {
                        continue;
                    }
                    lap = lap + gi * he(i, j, a, b);
                    cross = cross + gi * he(j, a, i, b);
                }
            }
            lap_e[i * n + j] = lap;
            div_c[i * n + j] = lap - cross + c * (lap_r * g.g(i, j) - hess_r[i * n + j]);
        }
    }
    // ΔE is symmetric in exact arithmetic; drop the rounding asymmetry.
    for i in 0..n {
        for j in i + 1..n {
            let v = T::lit(0.5) * (lap_e[i * n + j] + lap_e[j * n + i]);
            lap_e[i * n + j] = v;
            lap_e[j * n + i] = v;
        }
    }
    let hess_r_tracefree: Vec<T> = (0..n2).map(|f| hess_r[f] - lap_r / nf * g.g(f / n, f % n)).collect();
    Ok(SecondOrder {
        hess_r: LabeledTensor::new(n, 2, hess_r, Symmetry::SymmetricPair)?,
        hess_r_tracefree: LabeledTensor::new(n, 2, hess_r_tracefree, Symmetry::SymmetricPair)?,
        lap_r,
        hess_e: LabeledTensor::new(n, 4, hess_e, Symmetry::None)?,
        lap_e: LabeledTensor::new(n, 2, lap_e, Symmetry::SymmetricPair)?,
        div_c: LabeledTensor::new(n, 2, div_c, Symmetry::None)?,
        lap_e_norm2,
    })
}

/// Computes a frame at every quadrature node and maps it through `f`.
/// Results come back in node order regardless of scheduling.
pub fn map_frames<T, R, F>(m: &ChartMetric<T>, opts: &EngineOptions, f: F) -> Result<Vec<R>>
where
    T: Real,
    R: Send,
    F: Fn(&Node<T>, &CurvatureFrame<T>) -> Result<R> + Sync,
{
    let count = m.node_count();
    let direct = || -> Result<Vec<R>> {
        (0..count)
            .into_par_iter()
            .map(|k| {
                let node = m.node(k);
                let frame = frame_at(m, &node.point, opts)?;
                f(&node, &frame)
            })
            .collect()
    };
    if !opts.recentre || m.round_blocks().is_empty() {
        return direct();
    }
    // Nodes related by the round symmetries share one evaluation.
    let images: Vec<Option<(Vec<T>, Vec<T>)>> = (0..count).map(|k| m.recentred(&m.node(k).point)).collect();
    let key = |y: &[T]| -> Vec<u64> { y.iter().map(|v| v.as_f64().to_bits()).collect() };
    let mut slot = BTreeMap::new();
    let mut unique = Vec::new();
    for (k, img) in images.iter().enumerate() {
        let y = match img {
            Some((y, _)) => y.clone(),
            None => m.node(k).point,
        };
        slot.entry(key(&y)).or_insert_with(|| {
            unique.push(y);
            unique.len() - 1
        });
    }
    if unique.len() * 4 > count {
        return direct();
    }
    let frames: Vec<CurvatureFrame<T>> = unique.par_iter().map(|y| frame_in_chart(m, y, opts)).collect::<Result<_>>()?;
    (0..count)
        .into_par_iter()
        .map(|k| {
            let node = m.node(k);
            match &images[k] {
                Some((y, jac)) => {
                    let base = &frames[slot[&key(y)]];
                    let frame = pull_back(base, &node.point, jac, m.metric_at(&node.point)?)?;
                    f(&node, &frame)
                }
                None => f(&node, &frames[slot[&key(&node.point)]]),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests;
