//! Curvature at a single point from the analytic metric jet.

use crate::catalog::{ChartMetric, MetricJet};
use crate::tensor::{LabeledTensor, MetricAtPoint, Symmetry};
use crate::{Error, Real, Result};

use super::algebra;

/// Metric, inverse and Christoffel symbols at a point.
pub(crate) struct Geometry<T> {
    pub n: usize,
    pub metric: MetricAtPoint<T>,
    /// `Γ^m_{ai}` at `(m*n + a)*n + i`.
    pub gamma: Vec<T>,
    /// `Γ_{p,ai} = ½(∂_a g_pi + ∂_i g_pa - ∂_p g_ai)` at `(p*n + a)*n + i`.
    pub gamma_low: Vec<T>,
}

impl<T: Real> Geometry<T> {
    pub fn new(jet: &MetricJet<T>) -> Result<Self> {
        let n = jet.n;
        if !jet.is_finite() {
            return Err(Error::Numerical("metric jet is not finite".into()));
        }
        let metric = MetricAtPoint::new(n, jet.g.clone())?;
        let half = T::lit(0.5);
        let dg = |k: usize, i: usize, j: usize| jet.dg[(k * n + i) * n + j];
        let mut gamma_low = vec![T::zero(); n * n * n];
        for p in 0..n {
            for a in 0..n {
                for i in a..n {
                    let v = half * (dg(a, p, i) + dg(i, p, a) - dg(p, a, i));
                    gamma_low[(p * n + a) * n + i] = v;
                    gamma_low[(p * n + i) * n + a] = v;
                }
            }
        }
        let mut gamma = vec![T::zero(); n * n * n];
        for m in 0..n {
            for p in 0..n {
                let gi = metric.inv(m, p);
                if gi == T::zero() {
                    continue;
                }
                for ai in 0..n * n {
                    gamma[m * n * n + ai] = gamma[m * n * n + ai] + gi * gamma_low[p * n * n + ai];
                }
            }
        }
        Ok(Self {
            n,
            metric,
            gamma,
            gamma_low,
        })
    }

    #[inline]
    pub fn gam(&self, m: usize, a: usize, i: usize) -> T {
        self.gamma[(m * self.n + a) * self.n + i]
    }

    /// Riemann tensor
    /// `R_ijkl = ½(∂_j∂_k g_il + ∂_i∂_l g_jk - ∂_i∂_k g_jl - ∂_j∂_l g_ik)
    ///         + Γ^p_{jk} Γ_{p,il} - Γ^p_{jl} Γ_{p,ik}`.
    pub fn riemann(&self, jet: &MetricJet<T>) -> LabeledTensor<T> {
        let n = self.n;
        let half = T::lit(0.5);
        let d2 = |k: usize, l: usize, i: usize, j: usize| jet.d2g[((k * n + l) * n + i) * n + j];
        let mut data = vec![T::zero(); n * n * n * n];
        let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    for l in k + 1..n {
                        if (k, l) < (i, j) {
                            continue;
                        }
                        let mut v = half * (d2(j, k, i, l) + d2(i, l, j, k) - d2(i, k, j, l) - d2(j, l, i, k));
                        for p in 0..n {
                            v = v + self.gam(p, j, k) * self.gamma_low[(p * n + i) * n + l]
                                - self.gam(p, j, l) * self.gamma_low[(p * n + i) * n + k];
                        }
                        for (a, b, c, d, s) in [
                            (i, j, k, l, v),
                            (j, i, k, l, -v),
                            (i, j, l, k, -v),
                            (j, i, l, k, v),
                            (k, l, i, j, v),
                            (l, k, i, j, -v),
                            (k, l, j, i, -v),
                            (l, k, j, i, v),
                        ] {
                            data[idx(a, b, c, d)] = s;
                        }
                    }
                }
            }
        }
        LabeledTensor::from_fn(n, 4, |ix| data[idx(ix[0], ix[1], ix[2], ix[3])]).tagged_unchecked(Symmetry::RiemannType)
    }

    /// `∂_b Γ^m_{ai}` at `((b*n + m)*n + a)*n + i`, zero for `b` outside `active`.
    pub fn dgamma(&self, jet: &MetricJet<T>, active: &[usize]) -> Vec<T> {
        let n = self.n;
        let half = T::lit(0.5);
        let d2 = |k: usize, l: usize, i: usize, j: usize| jet.d2g[((k * n + l) * n + i) * n + j];
        let dg = |k: usize, i: usize, j: usize| jet.dg[(k * n + i) * n + j];
        let mut out = vec![T::zero(); n * n * n * n];
        let mut low = vec![T::zero(); n * n * n];
        for &b in active {
            // ∂_b Γ_{p,ai} - ∂_b g_pr Γ^r_{ai}
            for p in 0..n {
                for a in 0..n {
                    for i in 0..n {
                        let mut v = half * (d2(b, a, p, i) + d2(b, i, p, a) - d2(b, p, a, i));
                        for r in 0..n {
                            let d = dg(b, p, r);
                            if d != T::zero() {
                                v = v - d * self.gam(r, a, i);
                            }
                        }
                        low[(p * n + a) * n + i] = v;
                    }
                }
            }
            for m in 0..n {
                for p in 0..n {
                    let gi = self.metric.inv(m, p);
                    if gi == T::zero() {
                        continue;
                    }
                    let dst = (b * n + m) * n * n;
                    for ai in 0..n * n {
                        out[dst + ai] = out[dst + ai] + gi * low[p * n * n + ai];
                    }
                }
            }
        }
        out
    }
}

/// Analytic curvature at a point.
pub(crate) struct PointCurvature<T> {
    pub geo: Geometry<T>,
    pub riemann: LabeledTensor<T>,
    pub ric: LabeledTensor<T>,
    pub r: T,
    pub e: LabeledTensor<T>,
    pub e_norm2: T,
}

impl<T: Real> PointCurvature<T> {
    pub fn new(jet: &MetricJet<T>) -> Result<Self> {
        let geo = Geometry::new(jet)?;
        let riemann = geo.riemann(jet);
        let ric = algebra::ricci(&riemann, &geo.metric)?;
        let r = algebra::scalar(&ric, &geo.metric)?;
        let e = algebra::traceless_ricci(&ric, r, &geo.metric)?;
        let e_norm2 = sym_norm_sq(&e, &geo.metric);
        Ok(Self {
            geo,
            riemann,
            ric,
            r,
            e,
            e_norm2,
        })
    }

    pub fn weyl(&self) -> Result<LabeledTensor<T>> {
        algebra::weyl_from(&self.riemann, &self.e, self.r, &self.geo.metric)
    }
}

/// `|A|²` for a symmetric 2-tensor via `tr((g⁻¹A)²)`.
pub(crate) fn sym_norm_sq<T: Real>(a: &LabeledTensor<T>, metric: &MetricAtPoint<T>) -> T {
    let n = metric.dim();
    let mut m = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = T::zero();
            for k in 0..n {
                acc = acc + metric.inv(i, k) * a.get(&[k, j]);
            }
            m[i * n + j] = acc;
        }
    }
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            s = s + m[i * n + j] * m[j * n + i];
        }
    }
    s
}

/// Field values sampled at stencil points, with tensor components divided
/// by `√g_ii` per index (so a field that is parallel in a diagonal metric
/// samples as a constant). The layout is `[R, |E|², Ê (n²), Ŵ (n⁴)]`;
/// mixed-derivative points only carry the prefix up to and including `Ê`.
pub(crate) struct SampleLayout {
    pub n: usize,
    pub scaled: bool,
}

impl SampleLayout {
    pub const R: usize = 0;
    pub const E_NORM2: usize = 1;
    pub const E: usize = 2;

    pub fn w(&self) -> usize {
        2 + self.n * self.n
    }

    pub fn mixed_len(&self) -> usize {
        2 + self.n * self.n
    }

    pub fn axis_len(&self) -> usize {
        2 + self.n * self.n + self.n.pow(4)
    }

    /// `1/√g_ii`, or ones when scaling is off.
    pub fn inv_scales<T: Real>(&self, g: &MetricAtPoint<T>) -> Vec<T> {
        (0..self.n)
            .map(|i| if self.scaled { T::one() / g.g(i, i).sqrt() } else { T::one() })
            .collect()
    }

    pub fn push_fields<T: Real>(&self, pc: &PointCurvature<T>, axis: bool, out: &mut Vec<T>) -> Result<()> {
        let n = self.n;
        let is = self.inv_scales(&pc.geo.metric);
        out.clear();
        out.push(pc.r);
        out.push(pc.e_norm2);
        for i in 0..n {
            for j in 0..n {
                out.push(pc.e.get(&[i, j]) * is[i] * is[j]);
            }
        }
        if axis {
            let w = pc.weyl()?;
            let ws = w.as_slice();
            for i in 0..n {
                for j in 0..n {
                    let sij = is[i] * is[j];
                    for k in 0..n {
                        for l in 0..n {
                            out.push(ws[((i * n + j) * n + k) * n + l] * sij * is[k] * is[l]);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn sample<T: Real>(
        &self,
        m: &ChartMetric<T>,
        x: &[T],
        axis: bool,
        jet: &mut MetricJet<T>,
        out: &mut Vec<T>,
    ) -> Result<()> {
        m.jet_at(x, jet);
        let pc = PointCurvature::new(jet)?;
        self.push_fields(&pc, axis, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build, GridSpec, MetricSpec};

    #[test]
    fn unit_two_sphere_component() {
        let m = build::<f64>(&MetricSpec::RoundSphere { n: 2, r: 1.0 }, GridSpec::default()).unwrap();
        let mut jet = MetricJet::default();
        let th = 0.7f64;
        m.jet_at(&[th, 0.3], &mut jet);
        let geo = Geometry::new(&jet).unwrap();
        let rm = geo.riemann(&jet);
        assert!((rm.get(&[0, 1, 0, 1]) - th.sin().powi(2)).abs() < 1e-14);
        assert!(rm.symmetry_residual() < 1e-14);
    }

    #[test]
    fn dgamma_matches_differences() {
        let m = build::<f64>(&MetricSpec::RoundSphere { n: 3, r: 1.3 }, GridSpec::default()).unwrap();
        let x = [0.8, 1.9, 0.0];
        let mut jet = MetricJet::default();
        m.jet_at(&x, &mut jet);
        let geo = Geometry::new(&jet).unwrap();
        let dgam = geo.dgamma(&jet, &[0, 1]);
        let n = 3;
        let h = 1e-5;
        for b in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[b] += h;
            xm[b] -= h;
            m.jet_at(&xp, &mut jet);
            let gp = Geometry::new(&jet).unwrap();
            m.jet_at(&xm, &mut jet);
            let gm = Geometry::new(&jet).unwrap();
            for f in 0..n * n * n {
                let fd = (gp.gamma[f] - gm.gamma[f]) / (2.0 * h);
                assert!((fd - dgam[b * n * n * n + f]).abs() < 1e-7);
            }
        }
    }
}
