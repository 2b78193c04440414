//! Volume-normalised gradient descent of `F_{t,s}` over small ansatz
//! families.
//!
//! The objective is always taken at unit volume, using
//! `F(c²g) = c^{n-4} F(g)` rather than rebuilding the rescaled metric.
//! Gradients are central differences in the parameters.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{build, rescale_to_unit_volume, ChartMetric, FourierSeries, GridSpec, MetricSpec};
use crate::curvature::{frame_at, EngineOptions};
use crate::functional::{el_residuals, evaluate_functional, node_defects, QuadParams, ResidualReport};
use crate::tensor::{LabeledTensor, MetricAtPoint};
use crate::{Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum AnsatzFamily {
    /// `dθ² + f(θ)² g_{S^{n-1}}` with `f = 1 + Fourier(θ)`.
    WarpedCircleSphere { n: usize, modes: usize },
    /// `e^{2u} g_flat` on the torus of side `2π`, `u = Fourier(x₀)`.
    ConformalTorus { n: usize, modes: usize },
}

impl AnsatzFamily {
    pub fn from_id(id: &str, n: usize, modes: usize) -> Result<Self> {
        match id {
            "warped_circle_sphere" | "warped" => Ok(Self::WarpedCircleSphere { n, modes }),
            "conformal_torus" | "conformal" => Ok(Self::ConformalTorus { n, modes }),
            other => Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::WarpedCircleSphere { n, .. } | Self::ConformalTorus { n, .. } => n,
        }
    }

    pub fn modes(&self) -> usize {
        match *self {
            Self::WarpedCircleSphere { modes, .. } | Self::ConformalTorus { modes, .. } => modes,
        }
    }

    /// Length of `θ = [c0, a1, b1, …, aK, bK]`.
    pub fn param_len(&self) -> usize {
        2 * self.modes() + 1
    }

    fn series(&self, theta: &[f64], offset: f64) -> FourierSeries {
        let k = self.modes();
        FourierSeries {
            c0: offset + theta[0],
            cos: (0..k).map(|i| theta[1 + 2 * i]).collect(),
            sin: (0..k).map(|i| theta[2 + 2 * i]).collect(),
        }
    }

    pub fn spec(&self, theta: &[f64]) -> Result<MetricSpec> {
        if theta.len() != self.param_len() {
            return Err(Error::DimensionMismatch {
                expected: self.param_len(),
                found: theta.len(),
            });
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite parameter".into()));
        }
        Ok(match *self {
            Self::WarpedCircleSphere { n, .. } => MetricSpec::WarpedCircleSphere {
                n,
                circle_radius: 1.0,
                warp: self.series(theta, 1.0),
            },
            Self::ConformalTorus { n, .. } => MetricSpec::Conformal {
                base: Box::new(MetricSpec::FlatTorus { n, side: TAU }),
                coord: 0,
                u: self.series(theta, 0.0),
            },
        })
    }

    /// The metric at `θ`; `Ok(None)` when `θ` leaves the positive region.
    pub fn metric<T: Real>(&self, theta: &[f64], grid: GridSpec) -> Result<Option<ChartMetric<T>>> {
        match build(&self.spec(theta)?, grid) {
            Ok(m) => Ok(Some(m)),
            Err(Error::InvalidParameter(msg)) if msg.contains("not strictly positive") => Ok(None),
            Err(e) => Err(e),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Objective<T> {
    /// `F_{t,s}` of the unit-volume metric; `+∞` outside the family's
    /// positive region.
    pub value: T,
    pub volume: T,
    pub barrier: bool,
}

/// `F_{t,s}` at unit volume.
pub fn objective<T: Real>(family: &AnsatzFamily, theta: &[f64], p: &QuadParams<T>, grid: GridSpec) -> Result<Objective<T>> {
    check_dims(family, p)?;
    let barrier = Objective {
        value: T::infinity(),
        volume: T::nan(),
        barrier: true,
    };
    let Some(m) = family.metric::<T>(theta, grid)? else {
        return Ok(barrier);
    };
    // Overflowing conformal factors degrade into the same barrier.
    let v = match evaluate_functional(&m, p) {
        Ok(v) => v,
        Err(Error::Numerical(_) | Error::NotPositiveDefinite) => return Ok(barrier),
        Err(e) => return Err(e),
    };
    let n = T::from_usize_lossy(p.n);
    // c = Vol^{-1/n}, F(c²g) = c^{n-4} F(g)
    let value = v.volume.powf((T::lit(4.0) - n) / n) * v.value;
    if !value.is_finite() {
        return Ok(barrier);
    }
    Ok(Objective {
        value,
        volume: v.volume,
        barrier: false,
    })
}

fn check_dims<T: Real>(family: &AnsatzFamily, p: &QuadParams<T>) -> Result<()> {
    if family.dim() != p.n {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: p.n,
        });
    }
    Ok(())
}

/// Central-difference step for coordinate `i`.
pub fn fd_step(theta_i: f64) -> f64 {
    1e-4 * (1.0 + theta_i.abs())
}

/// Parametric gradient of the unit-volume objective. Fails inside the
/// barrier, where the objective is not differentiable.
pub fn gradient<T: Real>(family: &AnsatzFamily, theta: &[f64], p: &QuadParams<T>, grid: GridSpec) -> Result<Vec<T>> {
    check_dims(family, p)?;
    (0..theta.len())
        .into_par_iter()
        .map(|i| {
            let h = fd_step(theta[i]);
            let mut up = theta.to_vec();
            let mut down = theta.to_vec();
            up[i] += h;
            down[i] -= h;
            let fp = objective(family, &up, p, grid)?;
            let fm = objective(family, &down, p, grid)?;
            if fp.barrier || fm.barrier {
                return Err(Error::Numerical(format!(
                    "difference stencil for parameter {i} leaves the positive region"
                )));
            }
            Ok((fp.value - fm.value) / T::lit(2.0 * h))
        })
        .collect()
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &x| a + x * x).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentOptions {
    pub steps: usize,
    pub learning_rate: f64,
    pub tol: f64,
    /// Halvings tried per step before giving up.
    pub max_halvings: usize,
    pub grid: GridSpec,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            steps: 2000,
            learning_rate: 1e-2,
            tol: 1e-5,
            max_halvings: 40,
            grid: GridSpec::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    StepsExhausted,
    /// No halving of the step decreased the objective.
    Stalled,
    /// The gradient stencil hit the positivity barrier.
    Barrier,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowTrace<T> {
    pub family: AnsatzFamily,
    pub iterates: Vec<Vec<f64>>,
    /// Unit-volume objective at each iterate.
    pub objective: Vec<T>,
    pub grad_norm: Vec<T>,
    /// Step size used to reach each iterate after the first.
    pub step_size: Vec<f64>,
    pub stop: StopReason,
    pub accepted: usize,
    pub final_residuals: Option<ResidualReport<T>>,
}

impl<T: Real> FlowTrace<T> {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    pub fn incomplete(&self) -> bool {
        self.stop == StopReason::Barrier
    }

    pub fn last(&self) -> &[f64] {
        self.iterates.last().expect("a trace holds its starting point")
    }
}

/// Gradient descent with step halving until the objective decreases. The
/// final metric is handed to [`el_residuals`] for an independent verdict.
pub fn descend<T: Real>(
    family: &AnsatzFamily,
    theta0: &[f64],
    p: &QuadParams<T>,
    opts: &DescentOptions,
) -> Result<FlowTrace<T>> {
    let grid = opts.grid;
    let start = objective(family, theta0, p, grid)?;
    if start.barrier {
        return Err(Error::InvalidParameter("starting parameters violate positivity".into()));
    }
    let mut theta = theta0.to_vec();
    let mut f = start.value;
    let mut trace = FlowTrace {
        family: *family,
        iterates: vec![theta.clone()],
        objective: vec![f],
        grad_norm: Vec::new(),
        step_size: Vec::new(),
        stop: StopReason::StepsExhausted,
        accepted: 0,
        final_residuals: None,
    };
    let mut grad = match gradient(family, &theta, p, grid) {
        Ok(g) => g,
        Err(_) => {
            trace.stop = StopReason::Barrier;
            return Ok(trace);
        }
    };
    trace.grad_norm.push(norm(&grad));
    for _ in 0..opts.steps {
        if norm(&grad) < T::lit(opts.tol) {
            trace.stop = StopReason::Converged;
            break;
        }
        let mut lr = opts.learning_rate;
        let mut next = None;
        for _ in 0..=opts.max_halvings {
            let cand: Vec<f64> = theta.iter().zip(&grad).map(|(x, g)| x - lr * g.as_f64()).collect();
            let o = objective(family, &cand, p, grid)?;
            if !o.barrier && o.value < f {
                next = Some((cand, o.value));
                break;
            }
            lr *= 0.5;
        }
        let Some((cand, value)) = next else {
            trace.stop = StopReason::Stalled;
            break;
        };
        theta = cand;
        f = value;
        trace.accepted += 1;
        trace.iterates.push(theta.clone());
        trace.objective.push(f);
        trace.step_size.push(lr);
        grad = match gradient(family, &theta, p, grid) {
            Ok(g) => g,
            Err(_) => {
                trace.stop = StopReason::Barrier;
                return Ok(trace);
            }
        };
        trace.grad_norm.push(norm(&grad));
    }
    if trace.stop == StopReason::StepsExhausted && norm(&grad) < T::lit(opts.tol) {
        trace.stop = StopReason::Converged;
    }
    if let Some(m) = family.metric::<T>(&theta, grid)? {
        let (unit, _) = rescale_to_unit_volume(&m)?;
        trace.final_residuals = Some(el_residuals(&unit, p)?);
    }
    Ok(trace)
}

/// `∫⟨D, ∂g/∂θ_i⟩ dv` on the unit-volume metric for each parameter, with
/// `D` the traceless Euler–Lagrange defect and the tangent taken by
/// central differences of the normalised metric.
pub fn tangent_pairings<T: Real>(family: &AnsatzFamily, theta: &[f64], p: &QuadParams<T>, grid: GridSpec) -> Result<Vec<T>> {
    check_dims(family, p)?;
    let unit_at = |th: &[f64]| -> Result<ChartMetric<T>> {
        let m = family
            .metric::<T>(th, grid)?
            .ok_or_else(|| Error::Numerical("tangent stencil leaves the positive region".into()))?;
        Ok(rescale_to_unit_volume(&m)?.0)
    };
    let base = unit_at(theta)?;
    let lambda = evaluate_functional(&base, p)?.value;
    let n = p.n;
    // A constant warp leaves its coordinate lumped into one node; integrate
    // on the grid of a nearby non-constant member so every mode is resolved.
    let mut probe = theta.to_vec();
    for v in probe.iter_mut().skip(1).step_by(2) {
        *v += fd_step(*v);
    }
    let nodes = unit_at(&probe)?;
    let defects = (0..nodes.node_count())
        .into_par_iter()
        .map(|k| {
            let x = nodes.node(k).point;
            let f = frame_at(&base, &x, &EngineOptions::default())?;
            let d = node_defects(&f, p, lambda)?;
            let w = nodes.node(k).weight * f.metric.volume_density();
            Ok((x, w, raise_both(&d.traceless, &f.metric)))
        })
        .collect::<Result<Vec<_>>>()?;
    (0..theta.len())
        .map(|i| {
            let h = fd_step(theta[i]);
            let mut up = theta.to_vec();
            let mut down = theta.to_vec();
            up[i] += h;
            down[i] -= h;
            let (mp, mm) = (unit_at(&up)?, unit_at(&down)?);
            let mut acc = T::zero();
            for (x, w, d_up) in &defects {
                let gp = mp.metric_at(x)?;
                let gm = mm.metric_at(x)?;
                let mut s = T::zero();
                for a in 0..n {
                    for b in 0..n {
                        s = s + d_up[a * n + b] * (gp.g(a, b) - gm.g(a, b));
                    }
                }
                acc = acc + *w * s / T::lit(2.0 * h);
            }
            Ok(acc)
        })
        .collect()
}

/// `D^{ab}` as a flat row-major array.
fn raise_both<T: Real>(d: &LabeledTensor<T>, g: &MetricAtPoint<T>) -> Vec<T> {
    let n = g.dim();
    let mut out = vec![T::zero(); n * n];
    for a in 0..n {
        for b in 0..n {
            let mut v = T::zero();
            for k in 0..n {
                for l in 0..n {
                    v = v + g.inv(a, k) * g.inv(b, l) * d.get(&[k, l]);
                }
            }
            out[a * n + b] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests;
