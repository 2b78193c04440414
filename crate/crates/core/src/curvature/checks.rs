//! Residuals of the structural identities a frame must satisfy.
//!
//! Every residual is the largest component in a `g`-orthonormal basis, so
//! values are comparable across charts.

use serde::Serialize;

use super::{algebra, CurvatureFrame};
use crate::tensor::{LabeledTensor, MetricAtPoint};
use crate::{Error, Real, Result};

/// Largest orthonormal-frame component of `t`.
pub fn on_max<T: Real>(t: &LabeledTensor<T>, metric: &MetricAtPoint<T>) -> T {
    metric.to_orthonormal(t).max_abs()
}

/// `max |Rm - assemble(W, E, R, g)|`.
pub fn check_weyl_reconstruction<T: Real>(f: &CurvatureFrame<T>) -> Result<T> {
    let back = algebra::assemble_riemann(&f.w, &f.e, f.r, &f.metric)?;
    Ok(on_max(&f.riemann.sub(&back)?, &f.metric))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DivWeylCotton<T> {
    pub residual: T,
    /// Largest component of `W_{ijkl,l}`.
    pub div_w: T,
    /// Largest component of `(n-3)/(n-2) C_ijk`.
    pub cotton: T,
}

/// `W_{ijkl,l} + (n-3)/(n-2) C_ijk`, defined for `n >= 4`.
pub fn check_divweyl_cotton<T: Real>(f: &CurvatureFrame<T>) -> Result<DivWeylCotton<T>> {
    let n = f.dim();
    if n < 4 {
        return Err(Error::UnsupportedDimension {
            n,
            reason: "divergence of Weyl relates to Cotton only for n >= 4",
        });
    }
    let first = f.first()?;
    let nf = T::from_usize_lossy(n);
    let k = (nf - T::lit(3.0)) / (nf - T::lit(2.0));
    let cot = first.c.scaled(k);
    let res = first.div_w.add(&cot)?;
    Ok(DivWeylCotton {
        residual: on_max(&res, &f.metric),
        div_w: on_max(&first.div_w, &f.metric),
        cotton: on_max(&cot, &f.metric),
    })
}

/// `E_{kj,ik}` minus its closed form
/// `(n-2)/(2n) R_{,ij} + n/(n-2) E_ik E_jk + R E_ij/(n-1) - E_kl W_ikjl - |E|² g_ij/(n-2)`.
pub fn check_commutation<T: Real>(f: &CurvatureFrame<T>) -> Result<T> {
    let second = f.second()?;
    let n = f.dim();
    let g = &f.metric;
    let nf = T::from_usize_lossy(n);
    let two = T::lit(2.0);
    let ee = algebra::mat_product(&f.e, &f.e, g);
    let we = algebra::curvature_on_sym(&f.w, &f.e, g);
    let he = second.hess_e.as_slice();
    let res = LabeledTensor::from_fn(n, 2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        let mut lhs = T::zero();
        for k in 0..n {
            for kk in 0..n {
                let gi = g.inv(k, kk);
                if gi != T::zero() {
                    lhs = lhs + gi * he[((k * n + j) * n + i) * n + kk];
                }
            }
        }
        let rhs = (nf - two) / (two * nf) * second.hess_r.get(ix) + nf / (nf - two) * ee.get(ix)
            + f.r * f.e.get(ix) / (nf - T::one())
            - we.get(ix)
            - f.norm_e2 * g.g(i, j) / (nf - two);
        lhs - rhs
    });
    Ok(on_max(&res, g))
}

/// `E_{kj,k} - (n-2)/(2n) R_{,j}`.
pub fn check_contracted_bianchi<T: Real>(f: &CurvatureFrame<T>) -> Result<T> {
    let first = f.first()?;
    let n = f.dim();
    let g = &f.metric;
    let nf = T::from_usize_lossy(n);
    let ge = first.grad_e.as_slice();
    let res = LabeledTensor::from_fn(n, 1, |ix| {
        let j = ix[0];
        let mut div = T::zero();
        for k in 0..n {
            for kk in 0..n {
                div = div + g.inv(k, kk) * ge[(k * n + j) * n + kk];
            }
        }
        div - (nf - T::lit(2.0)) / (T::lit(2.0) * nf) * first.grad_r.get(ix)
    });
    Ok(on_max(&res, g))
}

/// Gap between the Ricci-form and `E`-form Cotton tensors.
pub fn check_cotton_forms<T: Real>(f: &CurvatureFrame<T>) -> Result<T> {
    let first = f.first()?;
    Ok(on_max(&first.c.sub(&first.c_ricci_form)?, &f.metric))
}

/// Antisymmetry, cyclic sum and largest single trace of `C`.
pub fn check_cotton_symmetries<T: Real>(f: &CurvatureFrame<T>) -> Result<(T, T)> {
    let c = &f.first()?.c;
    Ok((c.symmetry_residual(), c.max_trace(&f.metric)?))
}
