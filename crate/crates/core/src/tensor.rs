//! Dense component tensors at a point.
//!
//! Components are stored row-major over `dim^rank` with every index lowered;
//! the inverse metric only enters inside [`contract`]. Rank-4 curvature
//! tensors use the index order `R_{ijkl}` with `R_{ijij}` the sectional
//! curvature of the `(e_i, e_j)` plane for an orthonormal pair.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::algebra;
use crate::{Error, Real, Result};

/// Relative tolerance for symmetry checks on construction.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    None,
    SymmetricPair,
    RiemannType,
    WeylType,
    CottonType,
}

impl Symmetry {
    fn required_rank(self) -> Option<usize> {
        match self {
            Symmetry::None => None,
            Symmetry::SymmetricPair => Some(2),
            Symmetry::RiemannType | Symmetry::WeylType => Some(4),
            Symmetry::CottonType => Some(3),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledTensor<T> {
    dim: usize,
    rank: usize,
    data: Vec<T>,
    symmetry: Symmetry,
}

fn pow(n: usize, k: usize) -> usize {
    n.pow(k as u32)
}

/// Decodes a flat row-major offset into `idx`.
#[inline]
fn decode(mut flat: usize, n: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % n;
        flat /= n;
    }
}

impl<T: Real> LabeledTensor<T> {
    pub fn zeros(dim: usize, rank: usize) -> Self {
        Self {
            dim,
            rank,
            data: vec![T::zero(); pow(dim, rank)],
            symmetry: Symmetry::None,
        }
    }

    /// Zero tensor carrying a symmetry tag (the zero tensor satisfies every tag).
    pub fn zeros_tagged(dim: usize, rank: usize, symmetry: Symmetry) -> Self {
        Self {
            symmetry,
            ..Self::zeros(dim, rank)
        }
    }

    pub fn scalar(value: T) -> Self {
        Self {
            dim: 1,
            rank: 0,
            data: vec![value],
            symmetry: Symmetry::None,
        }
    }

    /// Untagged tensor with components `f(index)`.
    pub fn from_fn(dim: usize, rank: usize, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let len = pow(dim, rank);
        let mut idx = vec![0; rank];
        let data = (0..len)
            .map(|flat| {
                decode(flat, dim, &mut idx);
                f(&idx)
            })
            .collect();
        Self {
            dim,
            rank,
            data,
            symmetry: Symmetry::None,
        }
    }

    /// Builds a tensor and checks the metric-free part of its symmetry tag.
    pub fn new(dim: usize, rank: usize, data: Vec<T>, symmetry: Symmetry) -> Result<Self> {
        if data.len() != pow(dim, rank) {
            return Err(Error::DimensionMismatch {
                expected: pow(dim, rank),
                found: data.len(),
            });
        }
        let t = Self {
            dim,
            rank,
            data,
            symmetry: Symmetry::None,
        };
        t.with_symmetry(symmetry)
    }

    /// Retags the tensor, validating the new tag.
    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Result<Self> {
        if let Some(r) = symmetry.required_rank() {
            if r != self.rank {
                return Err(Error::Symmetry {
                    what: format!("{symmetry:?} requires rank {r}, got {}", self.rank),
                    residual: f64::NAN,
                });
            }
        }
        let scale = self.max_abs().max(T::one());
        let residual = symmetry_residual(&self, symmetry);
        if residual > T::lit(SYMMETRY_TOL) * scale {
            return Err(Error::Symmetry {
                what: format!("{symmetry:?}"),
                residual: residual.as_f64(),
            });
        }
        self.symmetry = symmetry;
        Ok(self)
    }

    /// Drops the symmetry tag; used for intermediate values.
    pub fn untagged(mut self) -> Self {
        self.symmetry = Symmetry::None;
        self
    }

    /// Sets a tag without checking it. Only for values that satisfy it by
    /// construction.
    pub(crate) fn tagged_unchecked(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> T {
        self.data[self.offset(idx)]
    }

    /// Value of a rank-0 tensor.
    pub fn value(&self) -> T {
        self.data[0]
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// Plain sum of squared components (the norm when the metric is Euclidean).
    pub fn component_sq_sum(&self) -> T {
        self.data.iter().map(|&x| x * x).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            data: self.data.iter().map(|&x| a * x).collect(),
            ..self.clone()
        }
    }

    /// `alpha * self + beta * other`; keeps the tag only when both agree.
    pub fn lin_comb(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        self.check_shape(other)?;
        let symmetry = if self.symmetry == other.symmetry {
            self.symmetry
        } else {
            Symmetry::None
        };
        Ok(Self {
            dim: self.dim,
            rank: self.rank,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| alpha * a + beta * b)
                .collect(),
            symmetry,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lin_comb(T::one(), other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(T::one(), other, -T::one())
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.rank != other.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                found: other.rank,
            });
        }
        Ok(())
    }

    /// Reorders indices: component `out[idx] = self[idx permuted]` where output
    /// axis `k` reads input axis `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.rank);
        let mut src = vec![0; self.rank];
        Self::from_fn(self.dim, self.rank, |idx| {
            for (k, &p) in perm.iter().enumerate() {
                src[p] = idx[k];
            }
            self.get(&src)
        })
    }

    /// Symmetric part of a rank-2 tensor.
    pub fn symmetrized(&self) -> Result<Self> {
        if self.rank != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: self.rank,
            });
        }
        let half = T::lit(0.5);
        let n = self.dim;
        let t = Self::from_fn(n, 2, |ix| half * (self.get(&[ix[0], ix[1]]) + self.get(&[ix[1], ix[0]])));
        Ok(t.tagged_unchecked(Symmetry::SymmetricPair))
    }

    /// Metric-free symmetry residual for the current tag.
    pub fn symmetry_residual(&self) -> T {
        symmetry_residual(self, self.symmetry)
    }

    /// Largest single trace against `metric` (all index pairs).
    pub fn max_trace(&self, metric: &MetricAtPoint<T>) -> Result<T> {
        let mut worst = T::zero();
        for a in 0..self.rank {
            for b in a + 1..self.rank {
                let tr = self_trace(self, a, b, metric)?;
                worst = worst.max(tr.max_abs());
            }
        }
        Ok(worst)
    }

    /// Checks the trace conditions of weyl/cotton tags against `metric`.
    pub fn validate_traces(&self, metric: &MetricAtPoint<T>) -> Result<()> {
        if matches!(self.symmetry, Symmetry::WeylType | Symmetry::CottonType) {
            let tr = self.max_trace(metric)?;
            let scale = self.max_abs().max(T::one());
            if tr > T::lit(SYMMETRY_TOL) * scale {
                return Err(Error::Symmetry {
                    what: format!("{:?} traces", self.symmetry),
                    residual: tr.as_f64(),
                });
            }
        }
        Ok(())
    }
}

fn symmetry_residual<T: Real>(t: &LabeledTensor<T>, symmetry: Symmetry) -> T {
    let n = t.dim;
    let mut worst = T::zero();
    let mut upd = |x: T| worst = worst.max(x.abs());
    match symmetry {
        Symmetry::None => {}
        Symmetry::SymmetricPair => {
            for i in 0..n {
                for j in 0..n {
                    upd(t.get(&[i, j]) - t.get(&[j, i]));
                }
            }
        }
        Symmetry::RiemannType | Symmetry::WeylType => {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let v = t.get(&[i, j, k, l]);
                            upd(v + t.get(&[j, i, k, l]));
                            upd(v + t.get(&[i, j, l, k]));
                            upd(v - t.get(&[k, l, i, j]));
                            upd(v + t.get(&[j, k, i, l]) + t.get(&[k, i, j, l]));
                        }
                    }
                }
            }
        }
        Symmetry::CottonType => {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let v = t.get(&[i, j, k]);
                        upd(v + t.get(&[j, i, k]));
                        upd(v + t.get(&[j, k, i]) + t.get(&[k, i, j]));
                    }
                }
            }
        }
    }
    worst
}

/// Trace of `t` over axes `a < b` against the inverse metric.
fn self_trace<T: Real>(
    t: &LabeledTensor<T>,
    a: usize,
    b: usize,
    metric: &MetricAtPoint<T>,
) -> Result<LabeledTensor<T>> {
    let n = t.dim;
    let out_rank = t.rank - 2;
    let mut src = vec![0; t.rank];
    let mut out = LabeledTensor::zeros(n, out_rank);
    let mut idx = vec![0; out_rank];
    for flat in 0..out.data.len() {
        decode(flat, n, &mut idx);
        let mut it = idx.iter();
        for (axis, slot) in src.iter_mut().enumerate() {
            if axis != a && axis != b {
                *slot = *it.next().expect("free index");
            }
        }
        let mut acc = T::zero();
        for p in 0..n {
            for q in 0..n {
                let gi = metric.inv(p, q);
                if gi == T::zero() {
                    continue;
                }
                src[a] = p;
                src[b] = q;
                acc = acc + gi * t.get(&src);
            }
        }
        out.data[flat] = acc;
    }
    Ok(out)
}

/// Metric coefficients at a point together with their inverse and Cholesky
/// factor.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricAtPoint<T> {
    dim: usize,
    g: Vec<T>,
    g_inv: Vec<T>,
    chol: Vec<T>,
    identity: bool,
}

impl<T: Real> MetricAtPoint<T> {
    /// Validates symmetry and positive-definiteness (all Cholesky pivots > 0).
    pub fn new(dim: usize, g: Vec<T>) -> Result<Self> {
        if g.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: g.len(),
            });
        }
        let scale = g.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        for i in 0..dim {
            for j in 0..i {
                let d = (g[i * dim + j] - g[j * dim + i]).abs();
                if !(d <= T::lit(1e-12) * scale) {
                    return Err(Error::Symmetry {
                        what: "metric".into(),
                        residual: d.as_f64(),
                    });
                }
            }
        }
        let chol = cholesky(dim, &g).ok_or(Error::NotPositiveDefinite)?;
        let g_inv = inverse_from_cholesky(dim, &chol);
        Ok(Self {
            dim,
            g,
            g_inv,
            chol,
            identity: false,
        })
    }

    pub fn identity(dim: usize) -> Self {
        let mut g = vec![T::zero(); dim * dim];
        for i in 0..dim {
            g[i * dim + i] = T::one();
        }
        Self {
            dim,
            g: g.clone(),
            g_inv: g.clone(),
            chol: g,
            identity: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    #[inline]
    pub fn g(&self, i: usize, j: usize) -> T {
        self.g[i * self.dim + j]
    }

    #[inline]
    pub fn inv(&self, i: usize, j: usize) -> T {
        self.g_inv[i * self.dim + j]
    }

    pub fn g_slice(&self) -> &[T] {
        &self.g
    }

    pub fn inv_slice(&self) -> &[T] {
        &self.g_inv
    }

    pub fn det(&self) -> T {
        let n = self.dim;
        (0..n).map(|i| self.chol[i * n + i]).fold(T::one(), |a, d| a * d * d)
    }

    /// `sqrt(det g)`, the volume density in the chart.
    pub fn volume_density(&self) -> T {
        let n = self.dim;
        (0..n).map(|i| self.chol[i * n + i]).fold(T::one(), |a, d| a * d)
    }

    pub fn as_tensor(&self) -> LabeledTensor<T> {
        LabeledTensor {
            dim: self.dim,
            rank: 2,
            data: self.g.clone(),
            symmetry: Symmetry::SymmetricPair,
        }
    }

    /// Largest entry of `g g^{-1} - I`.
    pub fn inverse_residual(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let mut acc = if i == j { -T::one() } else { T::zero() };
                for k in 0..n {
                    acc = acc + self.g(i, k) * self.inv(k, j);
                }
                worst = worst.max(acc.abs());
            }
        }
        worst
    }

    /// Raises `axis` of `t` with the inverse metric (result still stored in
    /// the same slot).
    pub fn raise(&self, t: &LabeledTensor<T>, axis: usize) -> LabeledTensor<T> {
        if self.identity {
            return t.clone().untagged();
        }
        apply_matrix(t, axis, &self.g_inv, false)
    }

    /// Columns of `F = L^{-T}` form a `g`-orthonormal basis (`Fᵀ g F = I`).
    pub fn orthonormal_basis(&self) -> Vec<T> {
        let n = self.dim;
        // Solve L^T F = I column by column (back substitution).
        let mut f = vec![T::zero(); n * n];
        for col in 0..n {
            for row in (0..n).rev() {
                let mut acc = if row == col { T::one() } else { T::zero() };
                for k in row + 1..n {
                    acc = acc - self.chol[k * n + row] * f[k * n + col];
                }
                f[row * n + col] = acc / self.chol[row * n + row];
            }
        }
        f
    }

    /// Components of `t` in the orthonormal basis of [`Self::orthonormal_basis`].
    pub fn to_orthonormal(&self, t: &LabeledTensor<T>) -> LabeledTensor<T> {
        if self.identity {
            return t.clone();
        }
        let f = self.orthonormal_basis();
        change_basis(t, &f)
    }
}

/// Components of `t` in the basis whose vectors are the columns of `f`:
/// `out_{a..} = t_{i..} f_{ia} ...`.
pub fn change_basis<T: Real>(t: &LabeledTensor<T>, f: &[T]) -> LabeledTensor<T> {
    let mut out = t.clone();
    for axis in 0..t.rank {
        out = apply_matrix(&out, axis, f, true);
    }
    out.symmetry = t.symmetry;
    out
}

/// Contracts `axis` of `t` with matrix `m`: `out[.., a, ..] = Σ_i t[.., i, ..] m(a, i)`
/// (or `m(i, a)` when `transpose`).
fn apply_matrix<T: Real>(t: &LabeledTensor<T>, axis: usize, m: &[T], transpose: bool) -> LabeledTensor<T> {
    let n = t.dim;
    let inner = pow(n, t.rank - axis - 1);
    let outer = pow(n, axis);
    let mut data = vec![T::zero(); t.data.len()];
    for o in 0..outer {
        for a in 0..n {
            for i in 0..n {
                let c = if transpose { m[i * n + a] } else { m[a * n + i] };
                if c == T::zero() {
                    continue;
                }
                let src = (o * n + i) * inner;
                let dst = (o * n + a) * inner;
                for r in 0..inner {
                    data[dst + r] = data[dst + r] + c * t.data[src + r];
                }
            }
        }
    }
    LabeledTensor {
        dim: n,
        rank: t.rank,
        data,
        symmetry: Symmetry::None,
    }
}

fn cholesky<T: Real>(n: usize, g: &[T]) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = g[i * n + j];
            for k in 0..j {
                acc = acc - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(acc > T::zero()) {
                    return None;
                }
                l[i * n + i] = acc.sqrt();
            } else {
                l[i * n + j] = acc / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn inverse_from_cholesky<T: Real>(n: usize, l: &[T]) -> Vec<T> {
    // L^{-1} by forward substitution, then g^{-1} = L^{-T} L^{-1}.
    let mut linv = vec![T::zero(); n * n];
    for col in 0..n {
        for row in col..n {
            let mut acc = if row == col { T::one() } else { T::zero() };
            for k in col..row {
                acc = acc - l[row * n + k] * linv[k * n + col];
            }
            linv[row * n + col] = acc / l[row * n + row];
        }
    }
    let mut inv = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = T::zero();
            for k in i..n {
                acc = acc + linv[k * n + i] * linv[k * n + j];
            }
            inv[i * n + j] = acc;
            inv[j * n + i] = acc;
        }
    }
    inv
}

/// Contracts `a` with `b` over `pairs = [(axis_in_a, axis_in_b), ..]`,
/// inserting `g^{-1}` for each pair. Free indices of `a` come first (in
/// order), then the free indices of `b`.
pub fn contract<T: Real>(
    a: &LabeledTensor<T>,
    b: &LabeledTensor<T>,
    pairs: &[(usize, usize)],
    metric: &MetricAtPoint<T>,
) -> Result<LabeledTensor<T>> {
    let n = metric.dim();
    for d in [a.dim, b.dim] {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, found: d });
        }
    }
    for (k, &(pa, pb)) in pairs.iter().enumerate() {
        if pa >= a.rank || pb >= b.rank {
            return Err(Error::InvalidPair(pa, pb));
        }
        if pairs[..k].iter().any(|&(qa, qb)| qa == pa || qb == pb) {
            return Err(Error::InvalidPair(pa, pb));
        }
    }
    let mut raised = std::borrow::Cow::Borrowed(a);
    if !metric.is_identity() {
        for &(pa, _) in pairs {
            raised = std::borrow::Cow::Owned(metric.raise(&raised, pa));
        }
    }
    Ok(euclidean_contract(&raised, b, pairs))
}

fn euclidean_contract<T: Real>(
    a: &LabeledTensor<T>,
    b: &LabeledTensor<T>,
    pairs: &[(usize, usize)],
) -> LabeledTensor<T> {
    let n = a.dim;
    let stride = |rank: usize, axis: usize| pow(n, rank - 1 - axis);
    let free_a: Vec<usize> = (0..a.rank).filter(|x| !pairs.iter().any(|p| p.0 == *x)).collect();
    let free_b: Vec<usize> = (0..b.rank).filter(|x| !pairs.iter().any(|p| p.1 == *x)).collect();
    let out_rank = free_a.len() + free_b.len();
    let sum_a: Vec<usize> = pairs.iter().map(|p| stride(a.rank, p.0)).collect();
    let sum_b: Vec<usize> = pairs.iter().map(|p| stride(b.rank, p.1)).collect();
    let n_sum = pow(n, pairs.len());
    // Precompute summation offsets once.
    let mut sidx = vec![0; pairs.len()];
    let sum_offsets: Vec<(usize, usize)> = (0..n_sum)
        .map(|s| {
            decode(s, n, &mut sidx);
            let oa = sidx.iter().zip(&sum_a).map(|(i, st)| i * st).sum();
            let ob = sidx.iter().zip(&sum_b).map(|(i, st)| i * st).sum();
            (oa, ob)
        })
        .collect();
    let mut out = LabeledTensor::zeros(n, out_rank);
    let mut idx = vec![0; out_rank];
    for flat in 0..out.data.len() {
        decode(flat, n, &mut idx);
        let base_a: usize = free_a
            .iter()
            .zip(&idx[..free_a.len()])
            .map(|(&ax, &i)| i * stride(a.rank, ax))
            .sum();
        let base_b: usize = free_b
            .iter()
            .zip(&idx[free_a.len()..])
            .map(|(&ax, &i)| i * stride(b.rank, ax))
            .sum();
        let mut acc = T::zero();
        for &(oa, ob) in &sum_offsets {
            acc = acc + a.data[base_a + oa] * b.data[base_b + ob];
        }
        out.data[flat] = acc;
    }
    out
}

/// Full contraction `⟨a, b⟩_g` of two tensors of equal rank.
pub fn inner<T: Real>(a: &LabeledTensor<T>, b: &LabeledTensor<T>, metric: &MetricAtPoint<T>) -> Result<T> {
    if a.rank != b.rank {
        return Err(Error::DimensionMismatch {
            expected: a.rank,
            found: b.rank,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..a.rank).map(|k| (k, k)).collect();
    Ok(contract(a, b, &pairs, metric)?.value())
}

/// `|a|²_g` by full self-contraction.
pub fn norm_sq<T: Real>(a: &LabeledTensor<T>, metric: &MetricAtPoint<T>) -> Result<T> {
    inner(a, a, metric)
}

/// `g^{ij} a_{ij}` for a rank-2 tensor.
pub fn trace<T: Real>(a: &LabeledTensor<T>, metric: &MetricAtPoint<T>) -> Result<T> {
    if a.rank != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: a.rank,
        });
    }
    Ok(g_trace(a, metric))
}

/// Trace-free part `a - (tr_g a / n) g` of a symmetric 2-tensor.
pub fn tracefree_part<T: Real>(a: &LabeledTensor<T>, metric: &MetricAtPoint<T>) -> Result<LabeledTensor<T>> {
    if a.rank != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: a.rank,
        });
    }
    let scale = a.max_abs().max(T::one());
    let asym = symmetry_residual(a, Symmetry::SymmetricPair);
    if asym > T::lit(SYMMETRY_TOL) * scale {
        return Err(Error::Symmetry {
            what: "tracefree_part needs a symmetric input".into(),
            residual: asym.as_f64(),
        });
    }
    let n = metric.dim();
    let tr = g_trace(a, metric);
    let mean = tr / T::from_usize_lossy(n);
    let out = LabeledTensor::from_fn(n, 2, |ix| a.get(ix) - mean * metric.g(ix[0], ix[1]));
    Ok(out.tagged_unchecked(Symmetry::SymmetricPair))
}

/// `g^{ij} a_{ij}` without shape validation (rank 2 assumed).
pub(crate) fn g_trace<T: Real>(a: &LabeledTensor<T>, metric: &MetricAtPoint<T>) -> T {
    let n = metric.dim();
    let mut tr = T::zero();
    for i in 0..n {
        for j in 0..n {
            tr = tr + metric.inv(i, j) * a.get(&[i, j]);
        }
    }
    tr
}

/// Kulkarni–Nomizu product `(h ⊙ k)_{ijkl} = h_ik k_jl + h_jl k_ik - h_il k_jk - h_jk k_il`.
pub fn kulkarni_nomizu<T: Real>(h: &LabeledTensor<T>, k: &LabeledTensor<T>) -> LabeledTensor<T> {
    let n = h.dim();
    let t = LabeledTensor::from_fn(n, 4, |ix| {
        let (i, j, a, b) = (ix[0], ix[1], ix[2], ix[3]);
        h.get(&[i, a]) * k.get(&[j, b]) + h.get(&[j, b]) * k.get(&[i, a])
            - h.get(&[i, b]) * k.get(&[j, a])
            - h.get(&[j, a]) * k.get(&[i, b])
    });
    if h.symmetry() == Symmetry::SymmetricPair && k.symmetry() == Symmetry::SymmetricPair {
        t.tagged_unchecked(Symmetry::RiemannType)
    } else {
        t
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric matrix with entries uniform in `[-1, 1]`.
pub fn random_symmetric<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> LabeledTensor<T> {
    let mut data = vec![T::zero(); dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let v = T::lit(rng.gen_range(-1.0..1.0));
            data[i * dim + j] = v;
            data[j * dim + i] = v;
        }
    }
    LabeledTensor {
        dim,
        rank: 2,
        data,
        symmetry: Symmetry::SymmetricPair,
    }
}

/// Random symmetric trace-free tensor with respect to `metric`.
pub fn random_tracefree<T: Real, R: Rng + ?Sized>(metric: &MetricAtPoint<T>, rng: &mut R) -> LabeledTensor<T> {
    let a = random_symmetric(metric.dim(), rng);
    tracefree_part(&a, metric).expect("symmetric by construction")
}

/// Random positive-definite metric `AᵀA + I/2`.
pub fn random_metric<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> MetricAtPoint<T> {
    let a: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut g = vec![T::zero(); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = if i == j { 0.5 } else { 0.0 };
            for k in 0..dim {
                acc += a[k * dim + i] * a[k * dim + j];
            }
            g[i * dim + j] = T::lit(acc);
        }
    }
    MetricAtPoint::new(dim, g).expect("SPD by construction")
}

/// Random orthogonal matrix (row-major) via Gram–Schmidt.
pub fn random_orthogonal<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<T> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while q.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for u in &q {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            q.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    // Columns are the orthonormal vectors.
    let mut out = vec![T::zero(); dim * dim];
    for (col, v) in q.iter().enumerate() {
        for (row, &x) in v.iter().enumerate() {
            out[row * dim + col] = T::lit(x);
        }
    }
    out
}

/// Random algebraic curvature tensor: a sum of Kulkarni–Nomizu products of
/// random symmetric matrices.
pub fn random_riemann_like<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> LabeledTensor<T> {
    let mut acc = LabeledTensor::zeros_tagged(dim, 4, Symmetry::RiemannType);
    for _ in 0..dim.max(2) {
        let h = random_symmetric(dim, rng);
        let k = random_symmetric(dim, rng);
        acc = acc.add(&kulkarni_nomizu(&h, &k)).expect("same shape");
    }
    acc.scaled(T::lit(0.5))
}

/// Random totally trace-free algebraic curvature tensor with respect to the
/// Euclidean metric. Zero for `dim <= 3`.
pub fn random_weyl_like<T: Real>(dim: usize, seed: u64) -> LabeledTensor<T> {
    if dim <= 3 {
        return LabeledTensor::zeros_tagged(dim, 4, Symmetry::WeylType);
    }
    let mut rng = seeded_rng(seed);
    let riem = random_riemann_like::<T, _>(dim, &mut rng);
    let metric = MetricAtPoint::identity(dim);
    algebra::weyl_part(&riem, &metric).expect("dim >= 4")
}
