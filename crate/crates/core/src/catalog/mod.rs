//! Test metrics on a single chart with periodic identifications.
//!
//! Sphere factors use hyperspherical angles `ψ_1, …, ψ_{m-1} ∈ (0, π)` and a
//! periodic `φ`; polar directions get Gauss nodes in `cos ψ` matched to the
//! `sin^k ψ` factor of the volume density (strictly interior) and periodic
//! directions the trapezoid rule. Coordinates the
//! metric does not depend on are lumped into a single node carrying the
//! whole length, which is exact for every quantity built from the metric.

mod quadrature;
mod separable;
mod symmetry;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use quadrature::{gauss_gegenbauer, gauss_legendre, QuadGrid, Rule};
pub use separable::{DiagEntry, FourierSeries, LogFactor, SeparableDiagonal};
pub use symmetry::RoundBlock;

use crate::tensor::MetricAtPoint;
use crate::{Error, Real, Result};

/// Metric coefficients with first and second partials at a point.
///
/// Layout: `g[i*n + j]`, `dg[(k*n + i)*n + j] = ∂_k g_ij`,
/// `d2g[((k*n + l)*n + i)*n + j] = ∂_k ∂_l g_ij`.
#[derive(Clone, Debug, Default)]
pub struct MetricJet<T> {
    pub n: usize,
    pub g: Vec<T>,
    pub dg: Vec<T>,
    pub d2g: Vec<T>,
}

impl<T: Real> MetricJet<T> {
    pub fn reset(&mut self, n: usize) {
        self.n = n;
        for (v, len) in [(&mut self.g, n * n), (&mut self.dg, n * n * n), (&mut self.d2g, n * n * n * n)] {
            v.clear();
            v.resize(len, T::zero());
        }
    }

    fn scale(&mut self, c: T) {
        for v in self.g.iter_mut().chain(self.dg.iter_mut()).chain(self.d2g.iter_mut()) {
            *v = *v * c;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.g.iter().chain(&self.dg).chain(&self.d2g).all(|x| x.is_finite())
    }
}

/// Closed-form metric coefficients on a chart.
pub trait MetricField<T>: Send + Sync {
    fn dim(&self) -> usize;
    /// Writes `g`, `∂g`, `∂∂g` at `x` into `out` (non-finite values signal a
    /// degenerate point).
    fn eval(&self, x: &[T], out: &mut MetricJet<T>);
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordKind {
    Periodic { period: f64 },
    /// Open interval `(0, π)`; the endpoints are coordinate singularities.
    /// The volume density carries `sin^{sine_power}` of this angle.
    Polar { sine_power: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coordinate {
    pub label: String,
    pub kind: CoordKind,
    /// Whether the metric coefficients depend on this coordinate.
    pub active: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub periodic: usize,
    pub polar: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            periodic: 24,
            polar: 16,
        }
    }
}

impl GridSpec {
    pub fn refined(self, factor: usize) -> Self {
        Self {
            periodic: self.periodic * factor,
            polar: self.polar * factor,
        }
    }
}

/// One quadrature node.
#[derive(Clone, Debug, PartialEq)]
pub struct Node<T> {
    pub index: usize,
    pub point: Vec<T>,
    /// Coordinate quadrature weight (without the volume density).
    pub weight: T,
}

#[derive(Clone)]
pub struct ChartMetric<T> {
    label: String,
    coords: Vec<Coordinate>,
    field: Arc<dyn MetricField<T>>,
    scale_sq: T,
    grid: GridSpec,
    quad: QuadGrid<T>,
    round: Vec<RoundBlock>,
}

impl<T: Real> std::fmt::Debug for ChartMetric<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartMetric")
            .field("label", &self.label)
            .field("coords", &self.coords)
            .field("scale_sq", &self.scale_sq)
            .field("grid", &self.grid)
            .finish()
    }
}

impl<T: Real> ChartMetric<T> {
    /// Wraps an arbitrary field. `coords[i].active == false` promises that the
    /// field does not depend on coordinate `i`.
    pub fn from_field(
        label: impl Into<String>,
        coords: Vec<Coordinate>,
        field: Arc<dyn MetricField<T>>,
        grid: GridSpec,
    ) -> Result<Self> {
        if coords.len() != field.dim() {
            return Err(Error::DimensionMismatch {
                expected: field.dim(),
                found: coords.len(),
            });
        }
        if grid.periodic == 0 || grid.polar == 0 {
            return Err(Error::InvalidParameter("grid resolution must be positive".into()));
        }
        let quad = build_quad(&coords, grid);
        Ok(Self {
            label: label.into(),
            coords,
            field,
            scale_sq: T::one(),
            grid,
            quad,
            round: Vec::new(),
        })
    }

    /// Declares round sphere factors the field is invariant under.
    pub fn with_round_blocks(mut self, blocks: Vec<RoundBlock>) -> Self {
        self.round = blocks.into_iter().filter(RoundBlock::movable).collect();
        self
    }

    pub fn round_blocks(&self) -> &[RoundBlock] {
        &self.round
    }

    /// An isometric image `y` of `x` with every free angle of every round
    /// factor at `π/2`, and `∂y/∂x` row-major. `None` if `x` is already there.
    pub fn recentred(&self, x: &[T]) -> Option<(Vec<T>, Vec<T>)> {
        let n = self.dim();
        let mut y = x.to_vec();
        let mut jac = vec![T::zero(); n * n];
        for i in 0..n {
            jac[i * n + i] = T::one();
        }
        let mut moved = false;
        for b in &self.round {
            moved |= symmetry::recentre(b, x, &mut y, &mut jac);
        }
        moved.then_some((y, jac))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn active_coords(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&c| self.coords[c].active).collect()
    }

    /// Constant factor `c²` applied on top of the field.
    pub fn scale_sq(&self) -> T {
        self.scale_sq
    }

    /// Same metric with a different quadrature resolution.
    pub fn with_grid(&self, grid: GridSpec) -> Self {
        Self {
            quad: build_quad(&self.coords, grid),
            grid,
            ..self.clone()
        }
    }

    /// The metric `c² g`.
    pub fn scaled(&self, c: T) -> Self {
        Self {
            scale_sq: self.scale_sq * c * c,
            ..self.clone()
        }
    }

    pub fn jet_at(&self, x: &[T], out: &mut MetricJet<T>) {
        self.field.eval(x, out);
        if self.scale_sq != T::one() {
            out.scale(self.scale_sq);
        }
    }

    pub fn metric_at(&self, x: &[T]) -> Result<MetricAtPoint<T>> {
        let mut jet = MetricJet::default();
        self.jet_at(x, &mut jet);
        if !jet.is_finite() {
            return Err(Error::Numerical(format!("metric not finite at {x:?}")));
        }
        MetricAtPoint::new(self.dim(), jet.g)
    }

    pub fn node_count(&self) -> usize {
        self.quad.len()
    }

    pub fn node(&self, index: usize) -> Node<T> {
        let mut point = vec![T::zero(); self.dim()];
        let weight = self.quad.node(index, &mut point);
        Node { index, point, weight }
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node<T>> + '_ {
        (0..self.node_count()).map(|k| self.node(k))
    }

    /// Checks a point lies in the open chart.
    pub fn validate_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        for (c, (&v, coord)) in x.iter().zip(&self.coords).enumerate() {
            let ok = v.is_finite()
                && match coord.kind {
                    CoordKind::Polar { .. } => v > T::zero() && v < T::PI(),
                    CoordKind::Periodic { .. } => true,
                };
            if !ok {
                return Err(Error::OutsideChart(format!("coordinate {c} = {v}")));
            }
        }
        Ok(())
    }

    /// Smallest grid spacing over the active coordinates (`None` if none).
    pub fn min_spacing(&self) -> Option<T> {
        self.active_coords()
            .into_iter()
            .map(|c| match self.coords[c].kind {
                CoordKind::Periodic { period } => T::lit(period / self.grid.periodic as f64),
                CoordKind::Polar { .. } => T::lit(PI / self.grid.polar as f64),
            })
            .reduce(T::min)
    }

    /// Distance from `x` to the nearest polar singularity among active
    /// coordinates.
    pub fn boundary_distance(&self, x: &[T]) -> Option<T> {
        self.active_coords()
            .into_iter()
            .filter(|&c| matches!(self.coords[c].kind, CoordKind::Polar { .. }))
            .map(|c| x[c].min(T::PI() - x[c]))
            .reduce(T::min)
    }

    /// Total volume by quadrature.
    pub fn volume(&self) -> Result<T> {
        let mut vol = T::zero();
        for node in self.nodes() {
            let g = self.metric_at(&node.point)?;
            vol = vol + node.weight * g.volume_density();
        }
        if !vol.is_finite() || vol <= T::zero() {
            return Err(Error::Numerical(format!("volume {vol}")));
        }
        Ok(vol)
    }
}

fn build_quad<T: Real>(coords: &[Coordinate], grid: GridSpec) -> QuadGrid<T> {
    let rules = coords
        .iter()
        .map(|c| match (c.kind, c.active) {
            (CoordKind::Periodic { period }, true) => Rule::periodic(grid.periodic, period),
            (CoordKind::Periodic { period }, false) => Rule::lumped(0.0, period),
            (CoordKind::Polar { sine_power }, true) => Rule::polar(grid.polar, sine_power),
            (CoordKind::Polar { .. }, false) => Rule::lumped(0.5 * PI, PI),
        })
        .collect();
    QuadGrid { rules }
}

/// Rescales `m` to total volume one: returns `(c² g, c)` with `c^n Vol(g) = 1`.
pub fn rescale_to_unit_volume<T: Real>(m: &ChartMetric<T>) -> Result<(ChartMetric<T>, T)> {
    let vol = m.volume()?;
    let c = vol.powf(-T::one() / T::from_usize_lossy(m.dim()));
    if !c.is_finite() || c <= T::zero() {
        return Err(Error::Numerical(format!("cannot rescale volume {vol}")));
    }
    if (vol - T::one()).abs() <= T::lit(4.0) * T::epsilon() {
        return Ok((m.clone(), T::one()));
    }
    Ok((m.scaled(c), c))
}

/// Catalog entry with its constructor parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum MetricSpec {
    FlatTorus {
        n: usize,
        #[serde(default = "one")]
        side: f64,
    },
    RoundSphere {
        n: usize,
        #[serde(default = "one")]
        r: f64,
    },
    /// `S¹(L) × S^{n-1}(r)`.
    ProductCircleSphere {
        n: usize,
        #[serde(default = "one", rename = "L")]
        circle_radius: f64,
        #[serde(default = "one")]
        r: f64,
    },
    /// `S^p(a) × S^q(b)`.
    ProductSpheres {
        p: usize,
        q: usize,
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "one")]
        b: f64,
    },
    /// `L² dθ² + f(θ)² g_{S^{n-1}}`.
    WarpedCircleSphere {
        n: usize,
        #[serde(default = "one", rename = "L")]
        circle_radius: f64,
        warp: FourierSeries,
    },
    /// `e^{2u} g_base` with `u` a Fourier series in coordinate `coord`.
    Conformal {
        base: Box<MetricSpec>,
        coord: usize,
        u: FourierSeries,
    },
}

fn one() -> f64 {
    1.0
}

/// Loose parameter bag used when entries are addressed by id string.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CatalogParams {
    pub n: Option<usize>,
    pub side: Option<f64>,
    pub r: Option<f64>,
    #[serde(rename = "L")]
    pub circle_radius: Option<f64>,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub warp: Option<FourierSeries>,
    pub base: Option<Box<MetricSpec>>,
    pub coord: Option<usize>,
    pub u: Option<FourierSeries>,
}

pub const CATALOG_IDS: [&str; 6] = [
    "flat_torus",
    "round_sphere",
    "product_circle_sphere",
    "product_spheres",
    "warped_circle_sphere",
    "conformal",
];

impl MetricSpec {
    pub fn from_id(id: &str, p: &CatalogParams) -> Result<Self> {
        let need_n = || p.n.ok_or_else(|| Error::InvalidParameter(format!("{id} needs n")));
        Ok(match id {
            "flat_torus" => MetricSpec::FlatTorus {
                n: need_n()?,
                side: p.side.unwrap_or(1.0),
            },
            "round_sphere" => MetricSpec::RoundSphere {
                n: need_n()?,
                r: p.r.unwrap_or(1.0),
            },
            "product_circle_sphere" => MetricSpec::ProductCircleSphere {
                n: need_n()?,
                circle_radius: p.circle_radius.unwrap_or(1.0),
                r: p.r.unwrap_or(1.0),
            },
            "product_spheres" => MetricSpec::ProductSpheres {
                p: p.p.ok_or_else(|| Error::InvalidParameter("product_spheres needs p".into()))?,
                q: p.q.ok_or_else(|| Error::InvalidParameter("product_spheres needs q".into()))?,
                a: p.a.unwrap_or(1.0),
                b: p.b.unwrap_or(1.0),
            },
            "warped_circle_sphere" => MetricSpec::WarpedCircleSphere {
                n: need_n()?,
                circle_radius: p.circle_radius.unwrap_or(1.0),
                warp: p.warp.clone().unwrap_or_else(|| FourierSeries::constant(1.0)),
            },
            "conformal" => MetricSpec::Conformal {
                base: p
                    .base
                    .clone()
                    .ok_or_else(|| Error::InvalidParameter("conformal needs a base metric".into()))?,
                coord: p.coord.unwrap_or(0),
                u: p.u.clone().unwrap_or_default(),
            },
            other => return Err(Error::UnknownMetric(other.to_string())),
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            MetricSpec::FlatTorus { .. } => "flat_torus",
            MetricSpec::RoundSphere { .. } => "round_sphere",
            MetricSpec::ProductCircleSphere { .. } => "product_circle_sphere",
            MetricSpec::ProductSpheres { .. } => "product_spheres",
            MetricSpec::WarpedCircleSphere { .. } => "warped_circle_sphere",
            MetricSpec::Conformal { .. } => "conformal",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MetricSpec::FlatTorus { n, .. }
            | MetricSpec::RoundSphere { n, .. }
            | MetricSpec::ProductCircleSphere { n, .. }
            | MetricSpec::WarpedCircleSphere { n, .. } => *n,
            MetricSpec::ProductSpheres { p, q, .. } => p + q,
            MetricSpec::Conformal { base, .. } => base.dim(),
        }
    }

    /// Closed-form volume where one exists.
    pub fn closed_form_volume(&self) -> Option<f64> {
        match *self {
            MetricSpec::FlatTorus { n, side } => Some(side.powi(n as i32)),
            MetricSpec::RoundSphere { n, r } => Some(sphere_volume(n, r)),
            MetricSpec::ProductCircleSphere { n, circle_radius, r } => {
                Some(2.0 * PI * circle_radius * sphere_volume(n - 1, r))
            }
            MetricSpec::ProductSpheres { p, q, a, b } => Some(sphere_volume(p, a) * sphere_volume(q, b)),
            MetricSpec::WarpedCircleSphere { ref warp, .. } if warp.is_constant() => {
                let MetricSpec::WarpedCircleSphere { n, circle_radius, .. } = *self else {
                    unreachable!()
                };
                Some(2.0 * PI * circle_radius * sphere_volume(n - 1, warp.c0))
            }
            MetricSpec::Conformal { ref base, ref u, .. } if u.is_constant() => {
                base.closed_form_volume().map(|v| v * (u.c0 * base.dim() as f64).exp())
            }
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            MetricSpec::FlatTorus { n, side } => format!("flat_torus(n={n}, side={side})"),
            MetricSpec::RoundSphere { n, r } => format!("round_sphere(n={n}, r={r})"),
            MetricSpec::ProductCircleSphere { n, circle_radius, r } => {
                format!("product_circle_sphere(n={n}, L={circle_radius}, r={r})")
            }
            MetricSpec::ProductSpheres { p, q, a, b } => format!("product_spheres(p={p}, q={q}, a={a}, b={b})"),
            MetricSpec::WarpedCircleSphere { n, circle_radius, .. } => {
                format!("warped_circle_sphere(n={n}, L={circle_radius})")
            }
            MetricSpec::Conformal { base, coord, .. } => format!("conformal({}, coord={coord})", base.label()),
        }
    }
}

/// Volume of the round `m`-sphere of radius `r`: `2π^{(m+1)/2} r^m / Γ((m+1)/2)`.
pub fn sphere_volume(m: usize, r: f64) -> f64 {
    // Γ at integers and half-integers by recursion.
    let half_gamma = |k: usize| -> f64 {
        // Γ(k/2)
        let mut acc = if k % 2 == 0 { 1.0 } else { PI.sqrt() };
        let mut x = if k % 2 == 0 { 1.0 } else { 0.5 };
        while x < k as f64 / 2.0 - 1e-9 {
            acc *= x;
            x += 1.0;
        }
        acc
    };
    2.0 * PI.powf((m as f64 + 1.0) / 2.0) / half_gamma(m + 1) * r.powi(m as i32)
}

/// Hyperspherical block for `S^m(r)`.
fn sphere_block(m: usize, r: f64) -> Block {
    let mut d = SeparableDiagonal::new(m);
    let mut coords = Vec::with_capacity(m);
    let polar: Vec<usize> = (0..m.saturating_sub(1)).map(|c| d.push_factor(c, LogFactor::SinSq)).collect();
    for i in 0..m {
        d.entries[i].log_const = 2.0 * r.ln();
        d.entries[i].factors = polar[..i].to_vec();
    }
    for c in 0..m.saturating_sub(1) {
        coords.push(Coordinate {
            label: format!("psi{}", c + 1),
            kind: CoordKind::Polar { sine_power: m - 1 - c },
            active: true,
        });
    }
    coords.push(Coordinate {
        label: "phi".into(),
        kind: CoordKind::Periodic { period: 2.0 * PI },
        active: false,
    });
    (d, coords, vec![RoundBlock { offset: 0, dim: m, pinned: 0 }])
}

type Block = (SeparableDiagonal, Vec<Coordinate>, Vec<RoundBlock>);

fn shifted(blocks: Vec<RoundBlock>, by: usize) -> impl Iterator<Item = RoundBlock> {
    blocks.into_iter().map(move |b| RoundBlock { offset: b.offset + by, ..b })
}

fn circle_block(radius: f64, period: f64, label: &str) -> Block {
    let mut d = SeparableDiagonal::new(1);
    d.entries[0].log_const = 2.0 * radius.ln();
    (
        d,
        vec![Coordinate {
            label: label.into(),
            kind: CoordKind::Periodic { period },
            active: false,
        }],
        Vec::new(),
    )
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn min_dim(id: &str, n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParameter(format!("{id} needs dimension >= {min}, got {n}")));
    }
    Ok(())
}

fn separable_for(spec: &MetricSpec, grid: GridSpec) -> Result<Block> {
    match spec {
        &MetricSpec::FlatTorus { n, side } => {
            min_dim("flat_torus", n, 1)?;
            positive("side", side)?;
            let mut d = SeparableDiagonal::new(n);
            let coords = (0..n)
                .map(|c| Coordinate {
                    label: format!("x{}", c + 1),
                    kind: CoordKind::Periodic { period: side },
                    active: false,
                })
                .collect();
            d.entries.iter_mut().for_each(|e| e.log_const = 0.0);
            Ok((d, coords, Vec::new()))
        }
        &MetricSpec::RoundSphere { n, r } => {
            min_dim("round_sphere", n, 2)?;
            positive("r", r)?;
            Ok(sphere_block(n, r))
        }
        &MetricSpec::ProductCircleSphere { n, circle_radius, r } => {
            min_dim("product_circle_sphere", n, 3)?;
            positive("L", circle_radius)?;
            positive("r", r)?;
            let (c, mut cc, _) = circle_block(circle_radius, 2.0 * PI, "theta");
            let (s, sc, sb) = sphere_block(n - 1, r);
            cc.extend(sc);
            Ok((c.direct_sum(&s), cc, shifted(sb, 1).collect()))
        }
        &MetricSpec::ProductSpheres { p, q, a, b } => {
            min_dim("product_spheres", p, 2)?;
            min_dim("product_spheres", q, 2)?;
            positive("a", a)?;
            positive("b", b)?;
            let (s1, mut c1, mut b1) = sphere_block(p, a);
            let (s2, c2, b2) = sphere_block(q, b);
            b1.extend(shifted(b2, p));
            c1.extend(c2.into_iter().map(|mut c| {
                c.label = format!("{}'", c.label);
                c
            }));
            Ok((s1.direct_sum(&s2), c1, b1))
        }
        MetricSpec::WarpedCircleSphere { n, circle_radius, warp } => {
            let n = *n;
            min_dim("warped_circle_sphere", n, 3)?;
            positive("L", *circle_radius)?;
            let (c, mut cc, _) = circle_block(*circle_radius, 2.0 * PI, "theta");
            // Warp must stay positive on the nodes and the midpoints between them.
            let samples = 2 * grid.periodic.max(1);
            for k in 0..samples {
                let x = 2.0 * PI * k as f64 / samples as f64;
                let (f, _, _) = warp.eval(x, 1.0);
                if !(f > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "warp function not strictly positive at theta = {x:.4} (f = {f})"
                    )));
                }
            }
            let (mut s, sc, sb) = sphere_block(n - 1, 1.0);
            if warp.is_constant() {
                for e in &mut s.entries {
                    e.log_const += 2.0 * warp.c0.ln();
                }
            } else {
                cc[0].active = true;
            }
            let mut d = c.direct_sum(&s);
            if !warp.is_constant() {
                let k = d.push_factor(
                    0,
                    LogFactor::Warp {
                        series: warp.clone(),
                        omega: 1.0,
                    },
                );
                for e in d.entries.iter_mut().skip(1) {
                    e.factors.push(k);
                }
            }
            cc.extend(sc);
            Ok((d, cc, shifted(sb, 1).collect()))
        }
        MetricSpec::Conformal { base, coord, u } => {
            let (mut d, mut coords, mut blocks) = separable_for(base, grid)?;
            let c = *coord;
            if c >= coords.len() {
                return Err(Error::InvalidParameter(format!(
                    "conformal coordinate {c} out of range for dimension {}",
                    coords.len()
                )));
            }
            let omega = match coords[c].kind {
                CoordKind::Periodic { period } => 2.0 * PI / period,
                CoordKind::Polar { .. } => {
                    if u.sin.iter().any(|&b| b != 0.0) {
                        return Err(Error::InvalidParameter(
                            "sine modes in a polar angle are not smooth at the poles".into(),
                        ));
                    }
                    1.0
                }
            };
            if u.is_constant() {
                for e in &mut d.entries {
                    e.log_const += 2.0 * u.c0;
                }
            } else {
                let k = d.push_factor(
                    c,
                    LogFactor::Conformal {
                        series: u.clone(),
                        omega,
                    },
                );
                for e in &mut d.entries {
                    e.factors.push(k);
                }
                coords[c].active = true;
                for b in &mut blocks {
                    if (b.offset..b.offset + b.dim).contains(&c) {
                        b.pinned = b.pinned.max(c - b.offset + 1);
                    }
                }
            }
            Ok((d, coords, blocks))
        }
    }
}

/// Builds a catalog entry on the given quadrature grid.
pub fn build<T: Real>(spec: &MetricSpec, grid: GridSpec) -> Result<ChartMetric<T>> {
    let (field, coords, blocks) = separable_for(spec, grid)?;
    debug_assert!(coords
        .iter()
        .enumerate()
        .all(|(c, coord)| coord.active == field.depends_on(c)));
    Ok(ChartMetric::from_field(spec.label(), coords, Arc::new(field), grid)?.with_round_blocks(blocks))
}

/// Builds an entry addressed by id string.
pub fn build_by_id<T: Real>(id: &str, params: &CatalogParams, grid: GridSpec) -> Result<ChartMetric<T>> {
    build(&MetricSpec::from_id(id, params)?, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vol(spec: &MetricSpec) -> f64 {
        build::<f64>(spec, GridSpec::default()).unwrap().volume().unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn closed_form_sphere_volumes() {
        assert!((sphere_volume(1, 1.0) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(2, 1.0) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(3, 1.0) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_volume(4, 2.0) - 8.0 / 3.0 * PI * PI * 16.0).abs() < 1e-11);
    }

    #[test]
    fn catalog_volumes() {
        let s3 = MetricSpec::RoundSphere { n: 3, r: 1.0 };
        assert!(rel(vol(&s3), 2.0 * PI * PI) < 1e-6);
        let t3 = MetricSpec::FlatTorus { n: 3, side: 1.0 };
        assert_eq!(vol(&t3), 1.0);
        let p3 = MetricSpec::ProductCircleSphere {
            n: 3,
            circle_radius: 1.0,
            r: 1.0,
        };
        assert!(rel(vol(&p3), 2.0 * PI * 4.0 * PI) < 1e-6);
        for spec in [
            MetricSpec::RoundSphere { n: 5, r: 0.7 },
            MetricSpec::ProductSpheres { p: 2, q: 3, a: 1.0, b: 1.3 },
            MetricSpec::ProductCircleSphere {
                n: 4,
                circle_radius: 2.0,
                r: 0.5,
            },
        ] {
            let want = spec.closed_form_volume().unwrap();
            assert!(rel(vol(&spec), want) < 1e-6, "{spec:?}");
        }
    }

    #[test]
    fn volume_error_shrinks_under_refinement() {
        let spec = MetricSpec::RoundSphere { n: 4, r: 1.0 };
        let want = spec.closed_form_volume().unwrap();
        let coarse = build::<f64>(&spec, GridSpec { periodic: 4, polar: 3 }).unwrap();
        let fine = coarse.with_grid(GridSpec { periodic: 8, polar: 6 });
        let e1 = rel(coarse.volume().unwrap(), want);
        let e2 = rel(fine.volume().unwrap(), want);
        assert!(e2 < e1, "{e1} {e2}");
    }

    #[test]
    fn rescale_cases() {
        let grid = GridSpec::default();
        let t = build::<f64>(&MetricSpec::FlatTorus { n: 3, side: 1.0 }, grid).unwrap();
        let (_, c) = rescale_to_unit_volume(&t).unwrap();
        assert_eq!(c, 1.0);

        let s = build::<f64>(&MetricSpec::RoundSphere { n: 3, r: 1.0 }, grid).unwrap();
        let (s1, c) = rescale_to_unit_volume(&s).unwrap();
        assert!(rel(c, (2.0 * PI * PI).powf(-1.0 / 3.0)) < 1e-6);
        assert!((s1.volume().unwrap() - 1.0).abs() < 1e-8);

        let p = build::<f64>(
            &MetricSpec::ProductCircleSphere {
                n: 3,
                circle_radius: 1.0,
                r: 1.0,
            },
            grid,
        )
        .unwrap();
        let (p1, c) = rescale_to_unit_volume(&p).unwrap();
        assert!(rel(c, (8.0 * PI * PI).powf(-1.0 / 3.0)) < 1e-6);
        assert!((p1.volume().unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn build_errors() {
        let grid = GridSpec::default();
        assert!(matches!(
            build_by_id::<f64>("klein_bottle", &CatalogParams::default(), grid),
            Err(Error::UnknownMetric(_))
        ));
        assert!(build::<f64>(&MetricSpec::RoundSphere { n: 3, r: -1.0 }, grid).is_err());
        let bad_warp = MetricSpec::WarpedCircleSphere {
            n: 3,
            circle_radius: 1.0,
            warp: FourierSeries {
                c0: 0.5,
                cos: vec![1.0],
                sin: vec![],
            },
        };
        assert!(build::<f64>(&bad_warp, grid).is_err());
        let polar_sine = MetricSpec::Conformal {
            base: Box::new(MetricSpec::RoundSphere { n: 3, r: 1.0 }),
            coord: 0,
            u: FourierSeries {
                c0: 0.0,
                cos: vec![],
                sin: vec![0.1],
            },
        };
        assert!(build::<f64>(&polar_sine, grid).is_err());
    }

    #[test]
    fn nodes_are_interior_and_positive() {
        let m = build::<f64>(&MetricSpec::ProductSpheres { p: 2, q: 3, a: 1.0, b: 1.0 }, GridSpec::default()).unwrap();
        for node in m.nodes() {
            m.validate_point(&node.point).unwrap();
            assert!(node.weight > 0.0);
            assert!(m.metric_at(&node.point).is_ok());
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let spec = MetricSpec::Conformal {
            base: Box::new(MetricSpec::WarpedCircleSphere {
                n: 4,
                circle_radius: 1.2,
                warp: FourierSeries {
                    c0: 1.0,
                    cos: vec![0.2],
                    sin: vec![0.1, 0.05],
                },
            }),
            coord: 1,
            u: FourierSeries {
                c0: 0.1,
                cos: vec![0.3, 0.1],
                sin: vec![],
            },
        };
        let m = build::<f64>(&spec, GridSpec::default()).unwrap();
        let n = m.dim();
        let mut rng = crate::tensor::seeded_rng(4);
        use rand::Rng;
        for _ in 0..5 {
            let x: Vec<f64> = (0..n)
                .map(|c| match m.coords()[c].kind {
                    CoordKind::Polar { .. } => rng.gen_range(0.3..2.8),
                    CoordKind::Periodic { period } => rng.gen_range(0.0..period),
                })
                .collect();
            let mut jet = MetricJet::default();
            m.jet_at(&x, &mut jet);
            let h = 1e-4;
            for k in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let (mut jp, mut jm) = (MetricJet::default(), MetricJet::default());
                m.jet_at(&xp, &mut jp);
                m.jet_at(&xm, &mut jm);
                for ij in 0..n * n {
                    let fd = (jp.g[ij] - jm.g[ij]) / (2.0 * h);
                    assert!((fd - jet.dg[k * n * n + ij]).abs() < 1e-6, "dg k={k} ij={ij}");
                    for l in 0..n {
                        let fd2 = (jp.dg[l * n * n + ij] - jm.dg[l * n * n + ij]) / (2.0 * h);
                        assert!((fd2 - jet.d2g[(k * n + l) * n * n + ij]).abs() < 1e-5, "d2g");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_conformal_and_constant_warp_reduce_to_base() {
        let grid = GridSpec::default();
        let base = MetricSpec::ProductSpheres { p: 2, q: 2, a: 1.0, b: 2.0 };
        let conf = MetricSpec::Conformal {
            base: Box::new(base.clone()),
            coord: 0,
            u: FourierSeries::default(),
        };
        let a = build::<f64>(&base, grid).unwrap();
        let b = build::<f64>(&conf, grid).unwrap();
        let warped = build::<f64>(
            &MetricSpec::WarpedCircleSphere {
                n: 3,
                circle_radius: 1.0,
                warp: FourierSeries::constant(1.5),
            },
            grid,
        )
        .unwrap();
        let prod = build::<f64>(
            &MetricSpec::ProductCircleSphere {
                n: 3,
                circle_radius: 1.0,
                r: 1.5,
            },
            grid,
        )
        .unwrap();
        let x = [0.4, 1.0, 2.0, 0.3];
        let (mut ja, mut jb) = (MetricJet::default(), MetricJet::default());
        a.jet_at(&x, &mut ja);
        b.jet_at(&x, &mut jb);
        assert_eq!(ja.g, jb.g);
        assert_eq!(ja.d2g, jb.d2g);
        let y = [0.4, 1.0, 2.0];
        warped.jet_at(&y, &mut ja);
        prod.jet_at(&y, &mut jb);
        for (u, v) in ja.g.iter().zip(&jb.g) {
            assert!((u - v).abs() < 1e-14);
        }
        assert_eq!(warped.node_count(), prod.node_count());
    }
}
