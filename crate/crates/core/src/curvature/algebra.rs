//! Pointwise algebra on curvature tensors: traces, the Weyl decomposition
//! and the two forms of the Cotton tensor.

use crate::tensor::{kulkarni_nomizu, LabeledTensor, MetricAtPoint, Symmetry};
use crate::{Error, Real, Result};

fn check_dim<T: Real>(t: &LabeledTensor<T>, rank: usize, metric: &MetricAtPoint<T>) -> Result<()> {
    if t.dim() != metric.dim() {
        return Err(Error::DimensionMismatch {
            expected: metric.dim(),
            found: t.dim(),
        });
    }
    if t.rank() != rank {
        return Err(Error::DimensionMismatch {
            expected: rank,
            found: t.rank(),
        });
    }
    Ok(())
}

/// `Ric_{jl} = g^{ik} R_{ijkl}`.
pub fn ricci<T: Real>(riem: &LabeledTensor<T>, metric: &MetricAtPoint<T>) -> Result<LabeledTensor<T>> {
    check_dim(riem, 4, metric)?;
    let n = metric.dim();
    let r = riem.as_slice();
    let mut out = vec![T::zero(); n * n];
    for j in 0..n {
        for l in j..n {
            let mut acc = T::zero();
            for i in 0..n {
                for k in 0..n {
                    let gi = metric.inv(i, k);
                    if gi != T::zero() {
                        acc = acc + gi * r[((i * n + j) * n + k) * n + l];
                    }
                }
            }
            out[j * n + l] = acc;
            out[l * n + j] = acc;
        }
    }
    LabeledTensor::new(n, 2, out, Symmetry::SymmetricPair)
}

/// `R = g^{jl} Ric_{jl}`.
pub fn scalar<T: Real>(ric: &LabeledTensor<T>, metric: &MetricAtPoint<T>) -> Result<T> {
    crate::tensor::trace(ric, metric)
}

/// `E = Ric - (R/n) g`.
pub fn traceless_ricci<T: Real>(ric: &LabeledTensor<T>, r: T, metric: &MetricAtPoint<T>) -> Result<LabeledTensor<T>> {
    check_dim(ric, 2, metric)?;
    let n = metric.dim();
    let mean = r / T::from_usize_lossy(n);
    Ok(LabeledTensor::from_fn(n, 2, |ix| ric.get(ix) - mean * metric.g(ix[0], ix[1]))
        .with_symmetry(Symmetry::SymmetricPair)?)
}

/// `R/(n(n-1)) · ½ g⊙g + 1/(n-2) E⊙g`, the non-Weyl part of the curvature.
fn ricci_part<T: Real>(e: &LabeledTensor<T>, r: T, metric: &MetricAtPoint<T>) -> Result<LabeledTensor<T>> {
    let n = metric.dim();
    if n < 3 {
        return Err(Error::UnsupportedDimension {
            n,
            reason: "the Weyl decomposition needs n >= 3",
        });
    }
    let g = metric.as_tensor();
    let nf = T::from_usize_lossy(n);
    let e_part = kulkarni_nomizu(e, &g).scaled(T::one() / (nf - T::lit(2.0)));
    let r_part = kulkarni_nomizu(&g, &g).scaled(r / (T::lit(2.0) * nf * (nf - T::one())));
    e_part.add(&r_part)
}

/// Weyl tensor `W = Rm - E⊙g/(n-2) - R g⊙g/(2n(n-1))`.
pub fn weyl_part<T: Real>(riem: &LabeledTensor<T>, metric: &MetricAtPoint<T>) -> Result<LabeledTensor<T>> {
    check_dim(riem, 4, metric)?;
    let ric = ricci(riem, metric)?;
    let r = scalar(&ric, metric)?;
    let e = traceless_ricci(&ric, r, metric)?;
    weyl_from(riem, &e, r, metric)
}

/// Weyl tensor when `E` and `R` are already known.
pub fn weyl_from<T: Real>(
    riem: &LabeledTensor<T>,
    e: &LabeledTensor<T>,
    r: T,
    metric: &MetricAtPoint<T>,
) -> Result<LabeledTensor<T>> {
    let w = riem.sub(&ricci_part(e, r, metric)?)?;
    Ok(w.tagged_unchecked(Symmetry::WeylType))
}

/// Reassembles `Rm` from its Weyl, traceless Ricci and scalar parts.
pub fn assemble_riemann<T: Real>(
    w: &LabeledTensor<T>,
    e: &LabeledTensor<T>,
    r: T,
    metric: &MetricAtPoint<T>,
) -> Result<LabeledTensor<T>> {
    check_dim(w, 4, metric)?;
    check_dim(e, 2, metric)?;
    let out = w.add(&ricci_part(e, r, metric)?)?;
    Ok(out.tagged_unchecked(Symmetry::RiemannType))
}

/// Cotton tensor from covariant derivatives of Ricci:
/// `C_ijk = R_{kj,i} - R_{ki,j} - (R_{,i} g_jk - R_{,j} g_ik)/(2(n-1))`.
///
/// `grad_ric[(a*n + b)*n + c] = R_{ab,c}`.
pub fn cotton_from_ricci<T: Real>(grad_ric: &[T], grad_r: &[T], metric: &MetricAtPoint<T>) -> LabeledTensor<T> {
    let n = metric.dim();
    let c = T::one() / (T::lit(2.0) * T::from_usize_lossy(n - 1));
    LabeledTensor::from_fn(n, 3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        grad_ric[(k * n + j) * n + i] - grad_ric[(k * n + i) * n + j]
            - c * (grad_r[i] * metric.g(j, k) - grad_r[j] * metric.g(i, k))
    })
}

/// Same tensor from derivatives of `E`:
/// `C_ijk = E_{kj,i} - E_{ki,j} + (n-2)/(2n(n-1)) (R_{,i} g_jk - R_{,j} g_ik)`.
pub fn cotton_from_traceless<T: Real>(grad_e: &[T], grad_r: &[T], metric: &MetricAtPoint<T>) -> LabeledTensor<T> {
    let n = metric.dim();
    let nf = T::from_usize_lossy(n);
    let c = (nf - T::lit(2.0)) / (T::lit(2.0) * nf * (nf - T::one()));
    LabeledTensor::from_fn(n, 3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        grad_e[(k * n + j) * n + i] - grad_e[(k * n + i) * n + j]
            + c * (grad_r[i] * metric.g(j, k) - grad_r[j] * metric.g(i, k))
    })
}

/// `|T|²` with every index raised, for a tensor given by its raw components.
pub(crate) fn full_norm_sq<T: Real>(t: &LabeledTensor<T>, metric: &MetricAtPoint<T>) -> T {
    crate::tensor::norm_sq(t, metric).expect("same dimension")
}

/// `(A·B)_{ij} = A_{ik} g^{kl} B_{lj}` for rank-2 tensors.
pub(crate) fn mat_product<T: Real>(a: &LabeledTensor<T>, b: &LabeledTensor<T>, metric: &MetricAtPoint<T>) -> LabeledTensor<T> {
    let n = metric.dim();
    let mut raised = vec![T::zero(); n * n];
    for k in 0..n {
        for j in 0..n {
            let mut acc = T::zero();
            for l in 0..n {
                acc = acc + metric.inv(k, l) * b.get(&[l, j]);
            }
            raised[k * n + j] = acc;
        }
    }
    LabeledTensor::from_fn(n, 2, |ix| (0..n).map(|k| a.get(&[ix[0], k]) * raised[k * n + ix[1]]).sum())
}

/// `(W∘E)_ij = W_{ikjl} E^{kl}`.
pub(crate) fn curvature_on_sym<T: Real>(w: &LabeledTensor<T>, e: &LabeledTensor<T>, metric: &MetricAtPoint<T>) -> LabeledTensor<T> {
    let n = metric.dim();
    let mut e_up = vec![T::zero(); n * n];
    for k in 0..n {
        for l in 0..n {
            let mut acc = T::zero();
            for a in 0..n {
                for b in 0..n {
                    acc = acc + metric.inv(k, a) * metric.inv(l, b) * e.get(&[a, b]);
                }
            }
            e_up[k * n + l] = acc;
        }
    }
    let ws = w.as_slice();
    LabeledTensor::from_fn(n, 2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        let mut acc = T::zero();
        for k in 0..n {
            for l in 0..n {
                acc = acc + ws[((i * n + k) * n + j) * n + l] * e_up[k * n + l];
            }
        }
        acc
    })
}

/// `(A*B)_ij = A_{ikpq} B_j^{kpq}` for rank-4 tensors.
pub(crate) fn quartic_square<T: Real>(a: &LabeledTensor<T>, b: &LabeledTensor<T>, metric: &MetricAtPoint<T>) -> LabeledTensor<T> {
    crate::tensor::contract(a, b, &[(1, 1), (2, 2), (3, 3)], metric).expect("rank 4 operands")
}
