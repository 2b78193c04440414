//! Diagonal metrics whose log-coefficients are sums of one-variable terms.
//!
//! Every catalog metric has the form `g_ii(x) = exp(c_i + Σ_k φ_k(x_{c(k)}))`,
//! so the exact first and second partials follow from `(φ, φ', φ'')` of each
//! term.

use serde::{Deserialize, Serialize};

use super::{MetricField, MetricJet};
use crate::Real;

/// Truncated Fourier series `c0 + Σ_k a_k cos(kωx) + b_k sin(kωx)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    #[serde(default)]
    pub c0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl FourierSeries {
    pub fn constant(c0: f64) -> Self {
        Self {
            c0,
            ..Self::default()
        }
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|&c| c == 0.0)
    }

    /// `(f, f', f'')` at `x` for angular frequency `omega`.
    pub fn eval<T: Real>(&self, x: T, omega: T) -> (T, T, T) {
        let mut f = T::lit(self.c0);
        let mut d1 = T::zero();
        let mut d2 = T::zero();
        let terms = self.cos.len().max(self.sin.len());
        for k in 1..=terms {
            let w = omega * T::from_usize_lossy(k);
            let (s, c) = (w * x).sin_cos();
            if let Some(&a) = self.cos.get(k - 1) {
                let a = T::lit(a);
                f = f + a * c;
                d1 = d1 - a * w * s;
                d2 = d2 - a * w * w * c;
            }
            if let Some(&b) = self.sin.get(k - 1) {
                let b = T::lit(b);
                f = f + b * s;
                d1 = d1 + b * w * c;
                d2 = d2 - b * w * w * s;
            }
        }
        (f, d1, d2)
    }
}

/// One-variable contribution to a log-coefficient.
#[derive(Clone, Debug, PartialEq)]
pub enum LogFactor {
    /// `log sin²x`
    SinSq,
    /// `2 log f(x)` for a positive warp function `f`.
    Warp { series: FourierSeries, omega: f64 },
    /// `2 u(x)` for a conformal exponent `u`.
    Conformal { series: FourierSeries, omega: f64 },
}

impl LogFactor {
    #[inline]
    fn eval<T: Real>(&self, x: T) -> (T, T, T) {
        let two = T::lit(2.0);
        match self {
            LogFactor::SinSq => {
                let (s, c) = x.sin_cos();
                (two * s.abs().ln(), two * c / s, -two / (s * s))
            }
            LogFactor::Warp { series, omega } => {
                let (f, d1, d2) = series.eval(x, T::lit(*omega));
                let r1 = d1 / f;
                (two * f.ln(), two * r1, two * (d2 / f - r1 * r1))
            }
            LogFactor::Conformal { series, omega } => {
                let (u, d1, d2) = series.eval(x, T::lit(*omega));
                (two * u, two * d1, two * d2)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagEntry {
    pub log_const: f64,
    /// Indices into [`SeparableDiagonal::factors`].
    pub factors: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparableDiagonal {
    pub dim: usize,
    /// `(coordinate, factor)` table shared by the entries.
    pub factors: Vec<(usize, LogFactor)>,
    pub entries: Vec<DiagEntry>,
}

impl SeparableDiagonal {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            factors: Vec::new(),
            entries: vec![
                DiagEntry {
                    log_const: 0.0,
                    factors: Vec::new(),
                };
                dim
            ],
        }
    }

    pub fn push_factor(&mut self, coord: usize, factor: LogFactor) -> usize {
        self.factors.push((coord, factor));
        self.factors.len() - 1
    }

    /// Whether some factor depends on `coord`.
    pub fn depends_on(&self, coord: usize) -> bool {
        self.factors.iter().any(|(c, f)| {
            *c == coord
                && match f {
                    LogFactor::SinSq => true,
                    LogFactor::Warp { series, .. } | LogFactor::Conformal { series, .. } => !series.is_constant(),
                }
        })
    }

    /// Appends `other` as a block on new coordinates.
    pub fn direct_sum(mut self, other: &SeparableDiagonal) -> Self {
        let coord_offset = self.dim;
        let factor_offset = self.factors.len();
        self.factors
            .extend(other.factors.iter().map(|(c, f)| (c + coord_offset, f.clone())));
        self.entries.extend(other.entries.iter().map(|e| DiagEntry {
            log_const: e.log_const,
            factors: e.factors.iter().map(|k| k + factor_offset).collect(),
        }));
        self.dim += other.dim;
        self
    }
}

impl<T: Real> MetricField<T> for SeparableDiagonal {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[T], out: &mut MetricJet<T>) {
        let n = self.dim;
        out.reset(n);
        let vals: Vec<(T, T, T)> = self.factors.iter().map(|(c, f)| f.eval(x[*c])).collect();
        let mut grad = vec![T::zero(); n];
        let mut hess_diag = vec![T::zero(); n];
        for (i, entry) in self.entries.iter().enumerate() {
            grad.iter_mut().for_each(|v| *v = T::zero());
            hess_diag.iter_mut().for_each(|v| *v = T::zero());
            let mut phi = T::lit(entry.log_const);
            for &k in &entry.factors {
                let c = self.factors[k].0;
                let (v, d1, d2) = vals[k];
                phi = phi + v;
                grad[c] = grad[c] + d1;
                hess_diag[c] = hess_diag[c] + d2;
            }
            let gii = phi.exp();
            let ii = i * n + i;
            out.g[ii] = gii;
            for a in 0..n {
                if grad[a] == T::zero() && hess_diag[a] == T::zero() {
                    continue;
                }
                out.dg[a * n * n + ii] = gii * grad[a];
                for b in 0..n {
                    let mut h = grad[a] * grad[b];
                    if a == b {
                        h = h + hess_diag[a];
                    }
                    out.d2g[(a * n + b) * n * n + ii] = gii * h;
                }
            }
        }
    }
}
