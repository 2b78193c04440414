//! Round sphere factors and the reflections that move a point onto their
//! equator.
//!
//! Coordinate curvature in hyperspherical angles loses accuracy like
//! `ε/ρ⁴` where `ρ` is the radius of the orbit through the point, which gets
//! small at grid corners. Every sphere factor in the catalog is round, so a
//! point can be reflected to where all free angles equal `π/2`, evaluated
//! there, and pulled back with the Jacobian of the reflection.

use serde::{Deserialize, Serialize};

use crate::Real;

/// Coordinates `offset..offset + dim` are hyperspherical angles
/// `(ψ_1, .., ψ_{dim-1}, φ)` of a round factor. The metric is invariant under
/// orthogonal maps of the ambient `R^{dim+1}` that fix the first `pinned`
/// ambient axes (equivalently, that keep `ψ_1..ψ_pinned`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundBlock {
    pub offset: usize,
    pub dim: usize,
    pub pinned: usize,
}

impl RoundBlock {
    /// True when some non-trivial polar angle is free to move.
    pub fn movable(&self) -> bool {
        self.pinned + 1 < self.dim
    }
}

/// Unit embedding of hyperspherical angles `a = (ψ_1, .., ψ_{m-1}, φ)` and
/// its partials `d[j][k] = ∂x_k/∂a_j`.
fn embed<T: Real>(a: &[T]) -> (Vec<T>, Vec<Vec<T>>) {
    let m = a.len();
    // x_k = Π_{i < min(k, m-1)} sin a_i · last_k, where last_k is cos a_k for
    // k < m and sin a_{m-1} for k = m.
    let factor = |k: usize, i: usize, diff: bool| -> T {
        let lim = k.min(m - 1);
        if i < lim {
            if diff {
                a[i].cos()
            } else {
                a[i].sin()
            }
        } else if k < m {
            // i == k
            if diff {
                -a[i].sin()
            } else {
                a[i].cos()
            }
        } else if diff {
            a[i].cos()
        } else {
            a[i].sin()
        }
    };
    let uses = |k: usize| -> Vec<usize> {
        let lim = k.min(m - 1);
        let mut v: Vec<usize> = (0..lim).collect();
        v.push(if k < m { k } else { m - 1 });
        v
    };
    let mut x = vec![T::zero(); m + 1];
    let mut d = vec![vec![T::zero(); m + 1]; m];
    for k in 0..=m {
        let u = uses(k);
        x[k] = u.iter().fold(T::one(), |acc, &i| acc * factor(k, i, false));
        for &j in &u {
            d[j][k] = u
                .iter()
                .fold(T::one(), |acc, &i| acc * factor(k, i, i == j));
        }
    }
    (x, d)
}

/// Reflection of a round block sending `x` to the point whose free angles
/// are all `π/2`. Writes the image into `y` and the block of `∂y/∂x` into
/// `jac` (row-major `n × n`, rows indexed by `y`). Leaves both untouched and
/// returns false when the point is already there.
pub(crate) fn recentre<T: Real>(b: &RoundBlock, x: &[T], y: &mut [T], jac: &mut [T]) -> bool {
    let n = x.len();
    let m = b.dim;
    let p = b.pinned;
    let a = &x[b.offset..b.offset + m];
    let half_pi = T::PI() * T::lit(0.5);
    let mut target = a.to_vec();
    for t in target.iter_mut().skip(p) {
        *t = half_pi;
    }
    if target == a {
        return false;
    }
    let (xa, da) = embed(a);
    let (_, dt) = embed(&target);
    // v = free part of the ambient point, reflected onto ρ e_m.
    let rho = xa[p..].iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
    let mut w: Vec<T> = xa[p..].iter().map(|&v| v / rho).collect();
    *w.last_mut().unwrap() = *w.last().unwrap() - T::one();
    let ww = w.iter().fold(T::zero(), |s, &v| s + v * v);
    let reflect = |v: &[T]| -> Vec<T> {
        let mut out = v.to_vec();
        if ww > T::zero() {
            let dot = w.iter().zip(&v[p..]).fold(T::zero(), |s, (&a, &b)| s + a * b);
            let k = T::lit(2.0) * dot / ww;
            for (o, &wi) in out[p..].iter_mut().zip(&w) {
                *o = *o - k * wi;
            }
        }
        out
    };
    for (i, &t) in target.iter().enumerate() {
        y[b.offset + i] = t;
    }
    for jb in 0..m {
        let hv = reflect(&da[jb]);
        for ja in 0..m {
            let ea = &dt[ja];
            let norm2 = ea.iter().fold(T::zero(), |s, &v| s + v * v);
            let dot = ea.iter().zip(&hv).fold(T::zero(), |s, (&u, &v)| s + u * v);
            jac[(b.offset + ja) * n + b.offset + jb] = dot / norm2;
        }
    }
    true
}
