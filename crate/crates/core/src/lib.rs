//! Numerical toolkit for quadratic curvature functionals
//! `F_{t,s}(g) = ∫|Ric|² + t∫R² + s∫|Rm|²` on closed chart metrics.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`] dense component tensors at a point, metric-aware contraction
//!   and random generators that respect curvature symmetries;
//! * [`catalog`] chart metrics with exact first and second partials and
//!   tensor-product quadrature grids;
//! * [`curvature`] Riemann, Ricci, Weyl, Cotton and the covariant derivatives
//!   needed by the Euler–Lagrange system;
//! * [`identities`] pointwise algebraic identities and sharp inequalities;
//! * [`functional`] the functional itself, its Euler–Lagrange residuals and
//!   the rigidity integrands;
//! * [`regions`] the `(t, s)` inequality systems and pinching checks;
//! * [`flow`] volume-normalised gradient descent over ansatz families.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the bottom of this file fix the scalar to `f64`, which is what the
//! finite-difference tolerances are calibrated for.

pub mod catalog;
pub mod curvature;
pub mod error;
pub mod flow;
pub mod functional;
pub mod identities;
pub mod regions;
pub mod tensor;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub use error::{Error, Result};

/// Floating point scalar the toolkit is written against.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + serde::Serialize
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot
    /// represent finite `f64` values, which never happens for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(k: usize) -> Self {
        Self::from_usize(k).expect("usize fits in a float")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Tensor = tensor::LabeledTensor<f64>;
pub type Metric = tensor::MetricAtPoint<f64>;
pub type Chart = catalog::ChartMetric<f64>;
pub type Frame = curvature::CurvatureFrame<f64>;
pub type Params = functional::QuadParams<f64>;
pub type Residuals = functional::ResidualReport<f64>;
pub type Trace = flow::FlowTrace<f64>;
