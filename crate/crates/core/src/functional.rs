//! The quadratic functional `F_{t,s}`, its Euler–Lagrange system and the
//! integrands of the rigidity inequalities.
//!
//! Node densities are computed in parallel; every reduction runs in node
//! order so results are reproducible bit for bit.

use serde::{Deserialize, Serialize};

use crate::catalog::{rescale_to_unit_volume, ChartMetric};
use crate::curvature::algebra::{curvature_on_sym, full_norm_sq, mat_product, quartic_square};
use crate::curvature::{map_frames, on_max, CurvatureFrame, DerivOrder, EngineOptions};
use crate::tensor::{LabeledTensor, MetricAtPoint};
use crate::{Error, Real, Result};

/// Volume must be within this of one before the Euler–Lagrange system is
/// evaluated.
pub const UNIT_VOLUME_TOL: f64 = 1e-8;
/// `|E|` below this counts as zero for negative powers of `|E|`.
pub const E_ZERO: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadParams<T> {
    pub n: usize,
    pub t: T,
    pub s: T,
    /// `F_{t,s}` of the unit-volume metric, once evaluated.
    pub lambda: Option<T>,
}

impl<T: Real> QuadParams<T> {
    pub fn new(n: usize, t: T, s: T) -> Result<Self> {
        if n < 3 {
            return Err(Error::UnsupportedDimension { n, reason: "the functional needs n >= 3" });
        }
        if !t.is_finite() || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite (t, s) = ({t}, {s})")));
        }
        Ok(Self { n, t, s, lambda: None })
    }

    pub fn with_lambda(mut self, lambda: T) -> Self {
        self.lambda = Some(lambda);
        self
    }

    fn check(&self, m: &ChartMetric<T>) -> Result<()> {
        if m.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: m.dim(),
            });
        }
        if let Some(l) = self.lambda {
            if !l.is_finite() {
                return Err(Error::InvalidParameter("lambda is not finite".into()));
            }
        }
        Ok(())
    }

    fn nf(&self) -> T {
        T::from_usize_lossy(self.n)
    }

    /// `n + 4(n-1)t + 4s`
    pub fn scalar_coefficient(&self) -> T {
        let n = self.nf();
        n + T::lit(4.0) * (n - T::one()) * self.t + T::lit(4.0) * self.s
    }

    /// `4s(n²-3n+4) + 4(n-2)`
    pub fn cubic_coefficient(&self) -> T {
        let n = self.nf();
        let four = T::lit(4.0);
        four * self.s * (n * n - T::lit(3.0) * n + four) + four * (n - T::lit(2.0))
    }

    /// `4 - 2n - 2n(n-1)t + 4(n-2)s`
    pub fn mixed_coefficient(&self) -> T {
        let n = self.nf();
        let two = T::lit(2.0);
        T::lit(4.0) - two * n - two * n * (n - T::one()) * self.t + T::lit(4.0) * (n - two) * self.s
    }
}

/// Ingredient integrals of `F_{t,s}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FunctionalValue<T> {
    pub ric2: T,
    pub r2: T,
    pub rm2: T,
    pub value: T,
    pub volume: T,
}

fn pointwise() -> EngineOptions {
    EngineOptions::with_order(DerivOrder::Pointwise)
}

/// Sums `weight · density` in node order.
fn quadrature<T: Real>(rows: &[(T, T)]) -> T {
    rows.iter().fold(T::zero(), |acc, &(w, d)| acc + w * d)
}

fn dv<T: Real>(weight: T, metric: &MetricAtPoint<T>) -> T {
    weight * metric.volume_density()
}

/// `(∫|Ric|², ∫R², ∫|Rm|², F, Vol)`.
pub fn evaluate_functional<T: Real>(m: &ChartMetric<T>, p: &QuadParams<T>) -> Result<FunctionalValue<T>> {
    p.check(m)?;
    let rows = map_frames(m, &pointwise(), |node, f| {
        Ok([dv(node.weight, &f.metric), f.norm_ric2(), f.r * f.r, f.norm_rm2])
    })?;
    let mut acc = [T::zero(); 4];
    for row in &rows {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("curvature density is not finite".into()));
        }
        acc[0] = acc[0] + row[0];
        for k in 1..4 {
            acc[k] = acc[k] + row[0] * row[k];
        }
    }
    let [volume, ric2, r2, rm2] = acc;
    Ok(FunctionalValue {
        ric2,
        r2,
        rm2,
        value: ric2 + p.t * r2 + p.s * rm2,
        volume,
    })
}

/// `|F(c²g) - c^{n-4} F(g)| / max(1, |F(g)|)`.
pub fn scaling_check<T: Real>(m: &ChartMetric<T>, p: &QuadParams<T>, c: T) -> Result<T> {
    if !(c > T::zero()) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("scale factor {c} must be positive")));
    }
    let base = evaluate_functional(m, p)?.value;
    let scaled = evaluate_functional(&m.scaled(c), p)?.value;
    let expect = c.powi(p.n as i32 - 4) * base;
    Ok((scaled - expect).abs() / base.abs().max(T::one()))
}

/// Sup-norm defects of the Euler–Lagrange system and of its consequences.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport<T> {
    /// Sup over nodes of the orthonormal max-abs component of the
    /// traceless equation's defect.
    pub residual_traceless: T,
    /// Sup over nodes of the scalar equation's defect.
    pub residual_scalar: T,
    pub bochner1: T,
    pub bochner2: T,
    pub volume: T,
    pub lambda: T,
    /// Gap between the traceless defect in its two algebraically equal forms.
    pub form_gap: T,
    /// Largest trace of the traceless defect.
    pub defect_trace: T,
    /// `sup |Rm|²`, the scale the normalised residuals are divided by.
    pub curvature_scale: T,
    pub normalized_traceless: T,
    pub normalized_scalar: T,
    pub nodes: usize,
}

impl<T: Real> ResidualReport<T> {
    /// Both equations hold to `tol`.
    pub fn critical(&self, tol: T) -> bool {
        self.residual_traceless < tol && self.residual_scalar < tol
    }

    pub fn entries(&self) -> [T; 4] {
        [self.residual_traceless, self.residual_scalar, self.bochner1, self.bochner2]
    }
}

/// Defects at one node.
#[derive(Clone, Debug)]
pub struct NodeDefects<T> {
    /// Traceless equation in the form with `W` and `E` only.
    pub traceless: LabeledTensor<T>,
    /// Same equation written with the full Riemann tensor.
    pub traceless_original: LabeledTensor<T>,
    pub scalar: T,
    pub bochner1: T,
    pub bochner2: LabeledTensor<T>,
}

/// Tensor `Σ c_k A_k + c_g g` over symmetric 2-tensors.
fn combine<T: Real>(n: usize, terms: &[(T, &LabeledTensor<T>)], g_coeff: T, g: &MetricAtPoint<T>) -> LabeledTensor<T> {
    LabeledTensor::from_fn(n, 2, |ix| {
        let mut v = g_coeff * g.g(ix[0], ix[1]);
        for (c, a) in terms {
            v = v + *c * a.get(ix);
        }
        v
    })
}

fn sym_inner<T: Real>(a: &LabeledTensor<T>, b: &LabeledTensor<T>, g: &MetricAtPoint<T>) -> T {
    let n = g.dim();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            let mut row = T::zero();
            for k in 0..n {
                for l in 0..n {
                    row = row + g.inv(i, k) * g.inv(j, l) * b.get(&[k, l]);
                }
            }
            s = s + a.get(&[i, j]) * row;
        }
    }
    s
}

fn trace2<T: Real>(a: &LabeledTensor<T>, g: &MetricAtPoint<T>) -> T {
    let n = g.dim();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            s = s + g.inv(i, j) * a.get(&[i, j]);
        }
    }
    s
}

/// Euler–Lagrange defects at a frame carrying second derivatives.
pub fn node_defects<T: Real>(f: &CurvatureFrame<T>, p: &QuadParams<T>, lambda: T) -> Result<NodeDefects<T>> {
    let n = f.dim();
    let first = f.first()?;
    let second = f.second()?;
    let g = &f.metric;
    let (t, s) = (p.t, p.s);
    let nf = p.nf();
    let (one, two, four) = (T::one(), T::lit(2.0), T::lit(4.0));
    let nm2 = nf - two;
    let nm1 = nf - one;
    let a1 = one + two * t + two * s;
    let a4 = one + four * s;

    // R̊_{,ij} = R_{,ij} - (ΔR/n) g_ij
    let rho = &second.hess_r_tracefree;
    let ee = mat_product(&f.e, &f.e, g);
    let we = curvature_on_sym(&f.w, &f.e, g);
    let ww = quartic_square(&f.w, &f.w, g);
    let re = curvature_on_sym(&f.riemann, &f.e, g);
    let rr = quartic_square(&f.riemann, &f.riemann, g);
    let (e2, w2, rm2) = (f.norm_e2, f.norm_w2, f.norm_rm2);
    let r = f.r;
    let cubic = p.cubic_coefficient();
    let mixed = p.mixed_coefficient();

    let rhs = combine(
        n,
        &[
            (a1, rho),
            (-(two * nm2 + four * nf * s) / nm2, &we),
            (-two * s, &ww),
            (cubic / (nm2 * nm2), &ee),
            (mixed / (nf * nm1) * r, &f.e),
        ],
        -cubic / (nf * nm2 * nm2) * e2 + two * s / nf * w2,
        g,
    );
    let rhs_original = combine(
        n,
        &[
            (a1, rho),
            (-two * (one + two * s), &re),
            (-(two + two * nf * t - four * s) / nf * r, &f.e),
            (-two * s, &rr),
            (four * s, &ee),
        ],
        two / nf * (e2 + s * rm2),
        g,
    );
    let lhs = second.lap_e.scaled(a4);
    let traceless = lhs.sub(&rhs)?;
    let traceless_original = lhs.sub(&rhs_original)?;

    let scalar = p.scalar_coefficient() * second.lap_r
        - (nf - four) * (f.norm_ric2() + t * r * r + s * rm2 - lambda);

    let grad_e2 = full_norm_sq(&first.grad_e, g);
    let tr_e3 = trace2(&mat_product(&ee, &f.e, g), g);
    let b1_rhs = a4 * grad_e2 + a1 * sym_inner(&second.hess_r, &f.e, g)
        - (two * nm2 + four * nf * s) / nm2 * sym_inner(&we, &f.e, g)
        - two * s * sym_inner(&ww, &f.e, g)
        + cubic / (nm2 * nm2) * tr_e3
        + mixed / (nf * nm1) * r * e2;
    let bochner1 = a4 / two * second.lap_e_norm2 - b1_rhs;

    let b2_rhs = combine(
        n,
        &[
            (p.scalar_coefficient() / (two * nm1), rho),
            (-(nm2 + T::lit(8.0) * s) / nm2, &we),
            (-two * s, &ww),
            (-(nf - four) * (nm2 + four * s) / (nm2 * nm2), &ee),
            ((T::lit(4.0) - T::lit(3.0) * nf - T::lit(8.0) * s - two * nf * nm1 * t) / (nf * nm1) * r, &f.e),
        ],
        two * s / nf * w2 + (nf - four) * (nm2 + four * s) / (nm2 * nm2 * nf) * e2,
        g,
    );
    let bochner2 = second.div_c.scaled(a4).sub(&b2_rhs)?;

    Ok(NodeDefects {
        traceless,
        traceless_original,
        scalar,
        bochner1,
        bochner2,
    })
}

/// Evaluates the Euler–Lagrange system on a unit-volume metric with
/// `λ = F_{t,s}(g)`.
pub fn el_residuals<T: Real>(m: &ChartMetric<T>, p: &QuadParams<T>) -> Result<ResidualReport<T>> {
    el_residuals_with(m, p, &EngineOptions::default())
}

pub fn el_residuals_with<T: Real>(m: &ChartMetric<T>, p: &QuadParams<T>, opts: &EngineOptions) -> Result<ResidualReport<T>> {
    let mut out = el_residuals_batch(m, std::slice::from_ref(p), opts)?;
    Ok(out.pop().expect("one report per parameter set"))
}

/// Evaluates several `(t, s)` on one set of frames.
pub fn el_residuals_batch<T: Real>(
    m: &ChartMetric<T>,
    ps: &[QuadParams<T>],
    opts: &EngineOptions,
) -> Result<Vec<ResidualReport<T>>> {
    const COLS: usize = 7;
    for p in ps {
        p.check(m)?;
    }
    let Some(first) = ps.first() else {
        return Ok(Vec::new());
    };
    let value = evaluate_functional(m, first)?;
    if (value.volume - T::one()).abs() > T::lit(UNIT_VOLUME_TOL) {
        return Err(Error::NotUnitVolume {
            volume: value.volume.as_f64(),
        });
    }
    let lambdas: Vec<T> = ps.iter().map(|p| value.ric2 + p.t * value.r2 + p.s * value.rm2).collect();
    let opts = EngineOptions {
        order: DerivOrder::Second,
        ..*opts
    };
    let rows = map_frames(m, &opts, |_, f| {
        let g = &f.metric;
        let mut row = Vec::with_capacity(ps.len() * COLS);
        for (p, &lambda) in ps.iter().zip(&lambdas) {
            let d = node_defects(f, p, lambda)?;
            row.extend([
                on_max(&d.traceless, g),
                d.scalar.abs(),
                d.bochner1.abs(),
                on_max(&d.bochner2, g),
                on_max(&d.traceless.sub(&d.traceless_original)?, g),
                trace2(&d.traceless, g).abs(),
                f.norm_rm2,
            ]);
        }
        Ok(row)
    })?;
    let mut sup = vec![T::zero(); ps.len() * COLS];
    for row in &rows {
        for (acc, v) in sup.iter_mut().zip(row) {
            // NaN must not be swallowed by max.
            *acc = if v.is_nan() || acc.is_nan() { T::nan() } else { acc.max(*v) };
        }
    }
    Ok(sup
        .chunks(COLS)
        .zip(lambdas)
        .map(|(sup, lambda)| {
            let scale = if sup[6] > T::zero() { sup[6] } else { T::one() };
            ResidualReport {
                residual_traceless: sup[0],
                residual_scalar: sup[1],
                bochner1: sup[2],
                bochner2: sup[3],
                volume: value.volume,
                lambda,
                form_gap: sup[4],
                defect_trace: sup[5],
                curvature_scale: sup[6],
                normalized_traceless: sup[0] / scale,
                normalized_scalar: sup[1] / scale,
                nodes: rows.len(),
            }
        })
        .collect())
}

/// Rescales to unit volume, then evaluates the Euler–Lagrange system.
pub fn el_residuals_normalized<T: Real>(m: &ChartMetric<T>, p: &QuadParams<T>) -> Result<ResidualReport<T>> {
    let (unit, _) = rescale_to_unit_volume(m)?;
    el_residuals(&unit, p)
}

/// Product criticality locus `L(t,s) = (n-2) + 2s + (n-1)(n-2)t` for
/// `S¹ × S^{n-1}`, together with the equality constraints of the rigidity
/// theorems that reduce to it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalLocus {
    pub n: usize,
}

impl CriticalLocus {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::UnsupportedDimension { n, reason: "the functional needs n >= 3" });
        }
        Ok(Self { n })
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        let n = self.nf();
        (n - 2.0) + 2.0 * s + (n - 1.0) * (n - 2.0) * t
    }

    /// The `t` with `L(t, s) = 0`.
    pub fn root_t(&self, s: f64) -> f64 {
        let n = self.nf();
        -((n - 2.0) + 2.0 * s) / ((n - 1.0) * (n - 2.0))
    }

    /// Removing the absolute values needs `n - 2 + 4s > 0`.
    pub fn sign_condition(&self, s: f64) -> bool {
        self.nf() - 2.0 + 4.0 * s > 0.0
    }

    /// `±(n-4)/(n-2)|n-2+4s| + 4 - 3n - 8s - 2n(n-1)t`, with `+` in the
    /// first case of the theorem (`n+4(n-1)t+4s > 0`) and `-` in the second.
    pub fn thm11_constraint(&self, t: f64, s: f64, first_case: bool) -> f64 {
        let n = self.nf();
        let sign = if first_case { 1.0 } else { -1.0 };
        sign * (n - 4.0) / (n - 2.0) * (n - 2.0 + 4.0 * s).abs() + 4.0 - 3.0 * n - 8.0 * s - 2.0 * n * (n - 1.0) * t
    }

    /// `-|4s(n²-3n+4)+4(n-2)| + (n-2)[4-2n-2n(n-1)t+4(n-2)s]`.
    pub fn thm12_constraint(&self, t: f64, s: f64) -> f64 {
        let n = self.nf();
        -(4.0 * s * (n * n - 3.0 * n + 4.0) + 4.0 * (n - 2.0)).abs()
            + (n - 2.0) * (4.0 - 2.0 * n - 2.0 * n * (n - 1.0) * t + 4.0 * (n - 2.0) * s)
    }

    /// `thm11_constraint(.., true) = -2n/(n-2) · L` when `n-2+4s > 0`.
    pub fn thm11_reduced(&self, t: f64, s: f64) -> f64 {
        let n = self.nf();
        -2.0 * n / (n - 2.0) * self.eval(t, s)
    }

    /// `thm12_constraint = -2n · L` when `4s(n²-3n+4)+4(n-2) > 0`.
    pub fn thm12_reduced(&self, t: f64, s: f64) -> f64 {
        -2.0 * self.nf() * self.eval(t, s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrand {
    #[serde(rename = "1For-th-1")]
    Thm11First,
    #[serde(rename = "1For-th-2")]
    Thm11Second,
    #[serde(rename = "3For-th-1")]
    Thm12,
    #[serde(rename = "3lem-Form-2")]
    Lemma31,
}

impl Integrand {
    pub const ALL: [Integrand; 4] = [Self::Thm11First, Self::Thm11Second, Self::Thm12, Self::Lemma31];

    pub fn id(self) -> &'static str {
        match self {
            Self::Thm11First => "1For-th-1",
            Self::Thm11Second => "1For-th-2",
            Self::Thm12 => "3For-th-1",
            Self::Lemma31 => "3lem-Form-2",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|w| w.id() == id)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown integrand `{id}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrandReport<T> {
    pub which: Integrand,
    /// Density per node, in node order.
    pub density: Vec<T>,
    pub integral: T,
    /// Right-hand side for the two-sided lemma.
    pub rhs_density: Option<Vec<T>>,
    pub rhs_integral: Option<T>,
}

/// Coefficients that do not depend on the point.
struct IntegrandCoeffs<T> {
    e3: T,
    re2: T,
    we2: T,
    w2e: T,
}

fn thm11_coeffs<T: Real>(p: &QuadParams<T>) -> IntegrandCoeffs<T> {
    let n = p.nf();
    let (one, two, four) = (T::one(), T::lit(2.0), T::lit(4.0));
    IntegrandCoeffs {
        e3: (n - four) * (n - two + four * p.s).abs() / ((n - two) * (n * (n - one)).sqrt()),
        re2: (four - T::lit(3.0) * n - T::lit(8.0) * p.s - two * n * (n - one) * p.t) / (n * (n - one)),
        we2: (n - two + T::lit(8.0) * p.s).abs() / (two * (n - two) * (n - one)).sqrt(),
        w2e: two * p.s.abs(),
    }
}

/// Pointwise densities of the rigidity inequalities and their integrals.
pub fn theorem_integrands<T: Real>(m: &ChartMetric<T>, p: &QuadParams<T>, which: Integrand) -> Result<IntegrandReport<T>> {
    p.check(m)?;
    let n = p.nf();
    let (one, two, four) = (T::one(), T::lit(2.0), T::lit(4.0));
    let a4 = one + four * p.s;
    let order = match which {
        Integrand::Thm12 => DerivOrder::Pointwise,
        _ => DerivOrder::First,
    };
    let opts = EngineOptions::with_order(order);
    let lemma = if which == Integrand::Lemma31 {
        Some(lemma31_coeffs(p)?)
    } else {
        None
    };
    let rows = map_frames(m, &opts, |node, f| {
        let e = f.norm_e2.max(T::zero()).sqrt();
        let w = f.norm_w2.max(T::zero()).sqrt();
        let r = f.r;
        let (lhs, rhs) = match which {
            Integrand::Thm11First | Integrand::Thm11Second => {
                let c = thm11_coeffs(p);
                let sg = if which == Integrand::Thm11First { one } else { -one };
                let d = a4 / two * f.norm_c2()? + sg * c.e3 * e * e * e + c.re2 * r * e * e + sg * c.we2 * w * e * e
                    + sg * c.w2e * w * w * e;
                (d, T::zero())
            }
            Integrand::Thm12 => {
                let k = (two * (n - two) + four * n * p.s).abs() / (two * (n - two) * (n - one)).sqrt();
                let cubic = p.cubic_coefficient().abs() / ((n - two) * (n * (n - one)).sqrt());
                let mixed = p.mixed_coefficient() / (n * (n - one));
                let pw = |x: T| if e < T::lit(E_ZERO) { T::zero() } else { e.powf(x) };
                let d = -k * w * pw((n - two) / n) - two * p.s.abs() * w * w * pw(-two / n) - cubic * pw(two * (n - one) / n)
                    + mixed * r * pw((n - two) / n);
                (d, T::zero())
            }
            Integrand::Lemma31 => {
                let (aa, bb) = lemma.expect("coefficients computed above");
                if !(r > T::zero()) {
                    return Err(Error::Hypothesis(format!(
                        "scalar curvature {r} <= 0 at node {}",
                        node.index
                    )));
                }
                let grad = full_norm_sq(&f.first()?.grad_e, &f.metric);
                let lhs = (a4 * r * r + aa * aa * bb * e * e) * grad / r;
                let cubic = p.cubic_coefficient().abs() / ((n - two) * (n * (n - one)).sqrt());
                let mixed = p.mixed_coefficient() / (n * (n - one));
                let rhs = (cubic * e - mixed * r) * r * e * e;
                (lhs, rhs)
            }
        };
        Ok((dv(node.weight, &f.metric), lhs, rhs))
    })?;
    let density: Vec<T> = rows.iter().map(|r| r.1).collect();
    let integral = quadrature(&rows.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>());
    let (rhs_density, rhs_integral) = if which == Integrand::Lemma31 {
        let d: Vec<T> = rows.iter().map(|r| r.2).collect();
        let i = quadrature(&rows.iter().map(|r| (r.0, r.2)).collect::<Vec<_>>());
        (Some(d), Some(i))
    } else {
        (None, None)
    };
    Ok(IntegrandReport {
        which,
        density,
        integral,
        rhs_density,
        rhs_integral,
    })
}

/// `(A, B)` with the lemma's left density `[(1+4s)R² + A²B|E|²]|∇E|²/R`.
fn lemma31_coeffs<T: Real>(p: &QuadParams<T>) -> Result<(T, T)> {
    if p.n == 4 {
        return Err(Error::UnsupportedDimension {
            n: 4,
            reason: "the lemma divides by n - 4",
        });
    }
    let n = p.nf();
    let (one, two, four) = (T::one(), T::lit(2.0), T::lit(4.0));
    let k = p.scalar_coefficient();
    let a1 = one + two * p.t + two * p.s;
    let b = n - two + four * p.s;
    if k == T::zero() || a1 == T::zero() || b == T::zero() {
        return Err(Error::InvalidParameter(
            "the lemma needs n+4(n-1)t+4s, 1+2t+2s and n-2+4s nonzero".into(),
        ));
    }
    let aa = (one + four * p.s) / two + (n - one) * (n - four) * b * a1 / (n * (n - two) * k);
    let bb = two * n * n * k / ((n - two) * (n - four) * a1 * b);
    Ok((aa, bb))
}

#[cfg(test)]
mod tests;
