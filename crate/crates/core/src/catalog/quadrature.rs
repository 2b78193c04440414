//! One-dimensional rules combined into tensor-product grids.

use crate::Real;

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss rule for `∫_{-1}^{1} f(u) (1-u²)^a du` (Golub–Welsch on the
/// Gegenbauer recurrence). Nodes ascending.
pub fn gauss_gegenbauer(n: usize, a: f64) -> (Vec<f64>, Vec<f64>) {
    let jac = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            let k = i.max(j) as f64;
            (k * (k + 2.0 * a) / ((2.0 * k + 2.0 * a + 1.0) * (2.0 * k + 2.0 * a - 1.0))).sqrt()
        } else {
            0.0
        }
    });
    let eig = jac.symmetric_eigen();
    let mu0 = std::f64::consts::PI.sqrt() * gamma_half(2.0 * a + 2.0) / gamma_half(2.0 * a + 3.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| (eig.eigenvalues[j], mu0 * eig.eigenvectors[(0, j)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    // Symmetrize against eigen-solver rounding.
    for j in 0..n / 2 {
        let (u, w) = (0.5 * (pairs[n - 1 - j].0 - pairs[j].0), 0.5 * (pairs[j].1 + pairs[n - 1 - j].1));
        pairs[j] = (-u, w);
        pairs[n - 1 - j] = (u, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// `Γ(k/2)` for a positive integer `k` given as a float.
fn gamma_half(k: f64) -> f64 {
    let mut x = if k.rem_euclid(2.0) == 0.0 { 1.0 } else { 0.5 };
    let mut acc = if x == 1.0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    while x < k / 2.0 - 1e-9 {
        acc *= x;
        x += 1.0;
    }
    acc
}

/// A 1D rule: nodes and positive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> Rule<T> {
    /// Gauss–Legendre mapped to `(lo, hi)`.
    pub fn gauss(n: usize, lo: f64, hi: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        Self {
            nodes: x.iter().map(|&t| T::lit(mid + half * t)).collect(),
            weights: w.iter().map(|&t| T::lit(half * t)).collect(),
        }
    }

    /// Rule on `(0, π)` for integrands `F(ψ) = f(cos ψ) sin^k ψ`: Gauss in
    /// `u = cos ψ` with weight `(1-u²)^{(k-1)/2}`, returned as weights for
    /// `F` itself. Nodes stay well away from the poles, where coordinate
    /// curvature formulas lose precision.
    pub fn polar(n: usize, sine_power: usize) -> Self {
        let (u, w) = gauss_gegenbauer(n, (sine_power as f64 - 1.0) / 2.0);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (&u, &w) in u.iter().zip(&w).rev() {
            let psi = u.acos();
            nodes.push(T::lit(psi));
            weights.push(T::lit(w / psi.sin().powi(sine_power as i32)));
        }
        Self { nodes, weights }
    }

    /// Trapezoid rule on a full period (equispaced, equal weights).
    pub fn periodic(n: usize, period: f64) -> Self {
        let h = period / n as f64;
        Self {
            nodes: (0..n).map(|k| T::lit(k as f64 * h)).collect(),
            weights: vec![T::lit(h); n],
        }
    }

    /// A single node carrying the whole length, for coordinates the
    /// integrand does not depend on.
    pub fn lumped(node: f64, length: f64) -> Self {
        Self {
            nodes: vec![T::lit(node)],
            weights: vec![T::lit(length)],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Tensor-product grid over per-coordinate rules, enumerated row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadGrid<T> {
    pub rules: Vec<Rule<T>>,
}

impl<T: Real> QuadGrid<T> {
    pub fn len(&self) -> usize {
        self.rules.iter().map(Rule::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point and weight of node `flat`.
    pub fn node(&self, mut flat: usize, point: &mut [T]) -> T {
        let mut w = T::one();
        for (c, rule) in self.rules.iter().enumerate().rev() {
            let k = flat % rule.len();
            flat /= rule.len();
            point[c] = rule.nodes[k];
            w = w * rule.weights[k];
        }
        w
    }
}
