//! `(t, s)` inequality systems of the rigidity results, plane scans and the
//! pointwise pinching conditions.
//!
//! Conditions are evaluated in the printed order and evaluation stops at the
//! first failure, so a condition that divides by an earlier factor is only
//! reached once that factor's sign is known.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::ChartMetric;
use crate::curvature::{map_frames, DerivOrder, EngineOptions};
use crate::functional::QuadParams;
use crate::{Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
    /// `value <= 0`
    NonPositive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Condition<T> {
    pub value: T,
    pub sign: Sign,
}

impl<T: Real> Condition<T> {
    fn holds(&self) -> bool {
        match self.sign {
            Sign::Positive => self.value > T::zero(),
            Sign::Negative => self.value < T::zero(),
            Sign::NonPositive => self.value <= T::zero(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum RegionSystem {
    /// Five conditions for locally conformally flat rigidity, `n = 3`.
    Thm13N3,
    /// Five conditions for locally conformally flat rigidity, `n >= 5`.
    Thm13N5plus { n: usize },
    /// Two conditions of the integral lemma, `n = 3`.
    Lem31N3,
    /// Two conditions of the integral lemma, `n >= 5`.
    Lem31N5plus { n: usize },
}

impl fmt::Display for RegionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Thm13N3 => write!(f, "thm13_n3"),
            Self::Thm13N5plus { n } => write!(f, "thm13_n5plus({n})"),
            Self::Lem31N3 => write!(f, "lem31_n3"),
            Self::Lem31N5plus { n } => write!(f, "lem31_n5plus({n})"),
        }
    }
}

impl RegionSystem {
    /// Parses `thm13_n3`, `thm13_n5plus`, `lem31_n3`, `lem31_n5plus`; the
    /// `n5plus` systems take `n` separately.
    pub fn from_id(id: &str, n: Option<usize>) -> Result<Self> {
        let need = |n: Option<usize>| -> Result<usize> {
            let n = n.ok_or_else(|| Error::InvalidParameter(format!("{id} needs n")))?;
            if n < 5 {
                return Err(Error::UnsupportedDimension { n, reason: "system is stated for n >= 5" });
            }
            Ok(n)
        };
        Ok(match id {
            "thm13_n3" => Self::Thm13N3,
            "lem31_n3" => Self::Lem31N3,
            "thm13_n5plus" => Self::Thm13N5plus { n: need(n)? },
            "lem31_n5plus" => Self::Lem31N5plus { n: need(n)? },
            other => return Err(Error::InvalidParameter(format!("unknown system `{other}`"))),
        })
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Thm13N3 | Self::Thm13N5plus { .. } => 5,
            Self::Lem31N3 | Self::Lem31N5plus { .. } => 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::Thm13N3 | Self::Lem31N3 => 3,
            Self::Thm13N5plus { n } | Self::Lem31N5plus { n } => n,
        }
    }

    /// Condition `k` (0-based) at `(t, s)`.
    pub fn condition<T: Real>(&self, k: usize, t: T, s: T) -> Condition<T> {
        use Sign::*;
        let l = T::lit;
        let one = T::one();
        let c = |value, sign| Condition { value, sign };
        let a1 = one + l(2.0) * t + l(2.0) * s;
        match *self {
            Self::Thm13N3 => {
                let d = one + l(6.0) * t - l(2.0) * s;
                let k3 = l(3.0) + l(8.0) * t + l(4.0) * s;
                let a4 = one + l(4.0) * s;
                match k {
                    0 => c(a1, Positive),
                    1 => c(a4, Positive),
                    2 => c(k3, Positive),
                    3 => c(d, Negative),
                    _ => {
                        let lhs = l(24.0) * a4 * a4 / (d * d);
                        let q = l(5.0) + l(16.0) * t + l(4.0) * s;
                        let rhs = q * q / (l(2.0) * k3 * a1);
                        c(lhs - rhs, Positive)
                    }
                }
            }
            Self::Thm13N5plus { n } => {
                let p = QuadParams {
                    n,
                    t,
                    s,
                    lambda: None,
                };
                let nf = T::from_usize_lossy(n);
                let b = nf - l(2.0) + l(4.0) * s;
                let kk = p.scalar_coefficient();
                let mm = p.mixed_coefficient();
                match k {
                    0 => c(a1, Positive),
                    1 => c(b, Positive),
                    2 => c(kk, Negative),
                    3 => c(mm, Positive),
                    _ => {
                        let a4 = one + l(4.0) * s;
                        let nm2 = nf - l(2.0);
                        let nm4 = nf - l(4.0);
                        let aa = a4 / l(2.0) + (nf - one) * nm4 * b * a1 / (nf * nm2 * kk);
                        let lhs = -aa * aa * l(2.0) * nf * nf * kk / (nm2 * nm4 * a4 * a1 * b);
                        let q = p.cubic_coefficient();
                        let rhs = nf * (nf - one) * q * q / (nm2 * nm2 * mm * mm);
                        c(lhs - rhs, NonPositive)
                    }
                }
            }
            Self::Lem31N3 => match k {
                0 => c(a1, Positive),
                _ => c((one + l(4.0) * s) * (l(3.0) + l(8.0) * t + l(4.0) * s), Positive),
            },
            Self::Lem31N5plus { n } => {
                let nf = T::from_usize_lossy(n);
                match k {
                    0 => c(a1, Positive),
                    _ => c(
                        (nf - l(2.0) + l(4.0) * s) * (nf + l(4.0) * (nf - one) * t + l(4.0) * s),
                        Negative,
                    ),
                }
            }
        }
    }

    /// Whether `1 + 4s <= 0`, which the `n >= 5` system divides by without
    /// listing it as a condition.
    pub fn flags_one_plus_4s<T: Real>(&self, s: T) -> bool {
        matches!(self, Self::Thm13N5plus { .. }) && T::one() + T::lit(4.0) * s <= T::zero()
    }

    pub fn feasible<T: Real>(&self, t: T, s: T) -> Verdict<T> {
        let mut values = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            let c = self.condition(k, t, s);
            values.push(c.value);
            if c.value.is_nan() {
                return Verdict {
                    feasible: false,
                    first_fail: Some(k + 1),
                    values,
                    diagnostic: Some(format!("condition {} is NaN", k + 1)),
                };
            }
            if !c.holds() {
                return Verdict {
                    feasible: false,
                    first_fail: Some(k + 1),
                    values,
                    diagnostic: None,
                };
            }
        }
        Verdict {
            feasible: true,
            first_fail: None,
            values,
            diagnostic: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict<T> {
    pub feasible: bool,
    /// 1-based index of the first failing condition in printed order.
    pub first_fail: Option<usize>,
    /// Values of the conditions evaluated before stopping.
    pub values: Vec<T>,
    pub diagnostic: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
}

impl AxisRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// Node `k` of `res`, computed as `lo + (hi - lo)·k / (res - 1)` so that
    /// nodes shared by two resolutions agree bit for bit.
    pub fn at(&self, k: usize, res: usize) -> f64 {
        if res <= 1 {
            return self.lo;
        }
        self.lo + (self.hi - self.lo) * k as f64 / (res - 1) as f64
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub s: f64,
    pub feasible: bool,
    /// 0 when feasible.
    pub first_fail: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionReport {
    pub system: RegionSystem,
    pub t: AxisRange,
    pub s: AxisRange,
    pub t_res: usize,
    pub s_res: usize,
    /// Row-major with `s` outer, `t` inner.
    pub rows: Vec<ScanRow>,
    pub feasible: usize,
    /// Points with `1 + 4s <= 0` in a system that divides by it.
    pub flagged_one_plus_4s: usize,
}

impl RegionReport {
    pub const CSV_HEADER: &'static str = "t,s,feasible,first_fail";

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.rows.len() + 1));
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.t, r.s, r.feasible, r.first_fail));
        }
        out
    }
}

/// Verdicts over a `t_res × s_res` grid. An empty range or zero resolution
/// gives an empty report.
pub fn scan(system: RegionSystem, t: AxisRange, s: AxisRange, t_res: usize, s_res: usize) -> RegionReport {
    let (t_res, s_res) = if t.is_empty() || s.is_empty() { (0, 0) } else { (t_res, s_res) };
    let rows: Vec<ScanRow> = (0..s_res)
        .into_par_iter()
        .flat_map_iter(|j| {
            let sv = s.at(j, s_res);
            (0..t_res).map(move |i| {
                let tv = t.at(i, t_res);
                let v = system.feasible(tv, sv);
                ScanRow {
                    t: tv,
                    s: sv,
                    feasible: v.feasible,
                    first_fail: v.first_fail.unwrap_or(0),
                }
            })
        })
        .collect();
    let feasible = rows.iter().filter(|r| r.feasible).count();
    let flagged_one_plus_4s = rows.iter().filter(|r| system.flags_one_plus_4s(r.s)).count();
    RegionReport {
        system,
        t,
        s,
        t_res,
        s_res,
        rows,
        feasible,
        flagged_one_plus_4s,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PinchReport<T> {
    /// Smallest normalised margin over nodes; positive means the pinching
    /// holds strictly everywhere.
    pub margin: T,
    pub worst_node: usize,
    pub worst_point: Vec<T>,
    /// Every node had `R = 0` and `E = 0`.
    pub boundary: bool,
    pub nodes: usize,
}

/// `(numerator, denominator²)` with the pinching `num/den² |E|² < R²`.
pub fn pinch_coefficients<T: Real>(p: &QuadParams<T>) -> Result<(T, T)> {
    let l = T::lit;
    match p.n {
        3 => {
            let a4 = T::one() + l(4.0) * p.s;
            let d = T::one() + l(6.0) * p.t - l(2.0) * p.s;
            Ok((l(24.0) * a4 * a4, d * d))
        }
        4 => Err(Error::UnsupportedDimension {
            n: 4,
            reason: "no pinching condition is stated for n = 4",
        }),
        n => {
            let nf = T::from_usize_lossy(n);
            let q = p.cubic_coefficient();
            let m = p.mixed_coefficient();
            let nm2 = nf - l(2.0);
            Ok((nf * (nf - T::one()) * q * q, nm2 * nm2 * m * m))
        }
    }
}

/// Cross-multiplied pinching margin `R²·den² - num·|E|²` per node, divided
/// by `R²·den² + num·|E|²`. A node with both terms zero has margin 0.
pub fn pinch_check<T: Real>(m: &ChartMetric<T>, p: &QuadParams<T>) -> Result<PinchReport<T>> {
    if m.dim() != p.n {
        return Err(Error::DimensionMismatch {
            expected: p.n,
            found: m.dim(),
        });
    }
    let (num, den2) = pinch_coefficients(p)?;
    let rows = map_frames(m, &EngineOptions::with_order(DerivOrder::Pointwise), |node, f| {
        let rhs = f.r * f.r * den2;
        let lhs = num * f.norm_e2;
        let scale = rhs + lhs;
        let margin = if scale > T::zero() { (rhs - lhs) / scale } else { T::zero() };
        Ok((margin, scale == T::zero(), node.index))
    })?;
    let mut worst = 0;
    for (k, r) in rows.iter().enumerate() {
        if r.0.is_nan() || r.0 < rows[worst].0 {
            worst = k;
            if r.0.is_nan() {
                break;
            }
        }
    }
    let Some(&(margin, _, worst_node)) = rows.get(worst) else {
        return Err(Error::Numerical("metric has no quadrature nodes".into()));
    };
    Ok(PinchReport {
        margin,
        worst_node,
        worst_point: m.node(worst_node).point,
        boundary: rows.iter().all(|r| r.1),
        nodes: rows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build, GridSpec, MetricSpec};
    use proptest::prelude::*;

    #[test]
    fn remark_points() {
        let sys = RegionSystem::Thm13N3;
        assert!(sys.feasible(0.0, 0.68).feasible);
        let v = sys.feasible(0.0f64, 1.0);
        assert!(v.feasible);
        assert_eq!(v.values[..4], [3.0, 5.0, 7.0, -1.0]);
        assert!((v.values[4] - (600.0 - 81.0 / 42.0)).abs() < 1e-12);
        let v = sys.feasible(0.0, 0.0);
        assert_eq!(v.first_fail, Some(4));
        assert!(!v.feasible);
    }

    #[test]
    fn n3_scan_contains_remark_point() {
        let rep = scan(
            RegionSystem::Thm13N3,
            AxisRange::new(-1.0, 1.0),
            AxisRange::new(-1.0, 2.0),
            201,
            201,
        );
        assert_eq!(rep.rows.len(), 201 * 201);
        assert!(rep.feasible > 0);
        let hit = rep
            .rows
            .iter()
            .find(|r| r.t == 0.0 && (r.s - 0.68).abs() < 1e-12)
            .expect("grid contains (0, 0.68)");
        assert!(hit.feasible);
    }

    #[test]
    fn n5_has_feasible_t_at_s_zero() {
        let sys = RegionSystem::Thm13N5plus { n: 5 };
        let rep = scan(sys, AxisRange::new(-0.5, -5.0 / 16.0), AxisRange::new(0.0, 0.0), 1000, 1);
        let inner: Vec<_> = rep.rows.iter().filter(|r| r.t > -0.5 && r.t < -5.0 / 16.0).collect();
        assert!(inner.iter().any(|r| r.feasible));
    }

    #[test]
    fn empty_and_degenerate_ranges() {
        let rep = scan(RegionSystem::Lem31N3, AxisRange::new(1.0, 0.0), AxisRange::new(0.0, 1.0), 10, 10);
        assert!(rep.rows.is_empty());
        assert_eq!(rep.to_csv(), "t,s,feasible,first_fail\n");
        let rep = scan(RegionSystem::Thm13N3, AxisRange::new(0.0, 0.0), AxisRange::new(0.68, 0.68), 1, 1);
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.feasible, 1);
    }

    #[test]
    fn refinement_keeps_common_points() {
        let (t, s) = (AxisRange::new(-1.0, 1.0), AxisRange::new(-1.0, 2.0));
        let coarse = scan(RegionSystem::Thm13N3, t, s, 201, 201);
        let fine = scan(RegionSystem::Thm13N3, t, s, 401, 401);
        for j in 0..201 {
            for i in 0..201 {
                let a = &coarse.rows[j * 201 + i];
                let b = &fine.rows[2 * j * 401 + 2 * i];
                assert_eq!((a.t.to_bits(), a.s.to_bits()), (b.t.to_bits(), b.s.to_bits()));
                assert_eq!(a.feasible, b.feasible);
            }
        }
    }

    #[test]
    fn lemma_systems() {
        assert!(RegionSystem::Lem31N3.feasible(0.0, 0.0).feasible);
        let v = RegionSystem::Lem31N3.feasible(-1.0, 0.0);
        assert_eq!(v.first_fail, Some(1));
        let sys = RegionSystem::Lem31N5plus { n: 5 };
        assert!(sys.feasible(-0.4, 0.0).feasible);
        assert_eq!(sys.feasible(0.0, 0.0).first_fail, Some(2));
        assert!(RegionSystem::from_id("thm13_n5plus", Some(4)).is_err());
        assert_eq!(RegionSystem::from_id("thm13_n5plus", Some(6)).unwrap().to_string(), "thm13_n5plus(6)");
    }

    #[test]
    fn flags_nonpositive_one_plus_4s() {
        let sys = RegionSystem::Thm13N5plus { n: 5 };
        let rep = scan(sys, AxisRange::new(-1.0, 1.0), AxisRange::new(-0.5, 0.5), 11, 11);
        // s = -0.5, -0.4, -0.3 have 1 + 4s <= 0.
        assert_eq!(rep.flagged_one_plus_4s, 11 * 3);
        assert!(sys.flags_one_plus_4s(-0.25) && !sys.flags_one_plus_4s(-0.2));
    }

    fn chart(spec: MetricSpec) -> ChartMetric<f64> {
        build(&spec, GridSpec::default()).unwrap()
    }

    #[test]
    fn pinching_on_catalog() {
        let sphere = chart(MetricSpec::RoundSphere { n: 3, r: 1.0 });
        let rep = pinch_check(&sphere, &QuadParams::new(3, 0.0, 1.0).unwrap()).unwrap();
        assert!(rep.margin > 0.0 && !rep.boundary);

        let product = chart(MetricSpec::ProductCircleSphere {
            n: 3,
            circle_radius: 1.0,
            r: 1.0,
        });
        let rep = pinch_check(&product, &QuadParams::new(3, 0.0, 1.0).unwrap()).unwrap();
        // 6·1 - 24·25 over 6 + 600
        assert!((rep.margin - (6.0 - 600.0) / 606.0).abs() < 1e-9, "{}", rep.margin);

        let torus = chart(MetricSpec::FlatTorus { n: 3, side: 1.0 });
        let rep = pinch_check(&torus, &QuadParams::new(3, 0.0, 1.0).unwrap()).unwrap();
        assert!(rep.boundary && rep.margin == 0.0);

        let s5 = chart(MetricSpec::ProductCircleSphere {
            n: 5,
            circle_radius: 1.0,
            r: 1.0,
        });
        assert!(pinch_check(&s5, &QuadParams::new(5, -0.4, 0.0).unwrap()).is_ok());
        let s4 = chart(MetricSpec::RoundSphere { n: 4, r: 1.0 });
        assert!(pinch_check(&s4, &QuadParams::new(4, 0.0, 0.0).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn cross_multiplied_sign_matches_division(t in -2.0f64..2.0, s in -1.0f64..2.0, e2 in 0.0f64..5.0, r in 0.01f64..5.0, n in prop::sample::select(vec![3usize, 5, 6, 7])) {
            let p = QuadParams::new(n, t, s).unwrap();
            let (num, den2) = pinch_coefficients(&p).unwrap();
            prop_assume!(den2 > 1e-9);
            let divided = num / den2 * e2 < r * r;
            let crossed = r * r * den2 - num * e2 > 0.0;
            prop_assume!((r * r * den2 - num * e2).abs() > 1e-12 * (r * r * den2 + num * e2));
            prop_assert_eq!(divided, crossed);
        }

        #[test]
        fn scan_matches_pointwise(t0 in -1.0f64..0.0, s0 in -1.0f64..1.0, res in 2usize..12) {
            let (t, s) = (AxisRange::new(t0, t0 + 1.0), AxisRange::new(s0, s0 + 1.5));
            for sys in [RegionSystem::Thm13N3, RegionSystem::Thm13N5plus { n: 6 }, RegionSystem::Lem31N3] {
                let rep = scan(sys, t, s, res, res);
                for row in &rep.rows {
                    let v = sys.feasible(row.t, row.s);
                    prop_assert_eq!(v.feasible, row.feasible);
                    prop_assert_eq!(v.first_fail.unwrap_or(0), row.first_fail);
                }
            }
        }

        #[test]
        fn feasible_means_every_condition_holds(t in -1.0f64..1.0, s in -1.0f64..2.0) {
            for sys in [RegionSystem::Thm13N3, RegionSystem::Thm13N5plus { n: 5 }, RegionSystem::Lem31N5plus { n: 7 }] {
                let v = sys.feasible(t, s);
                let all = (0..sys.len()).all(|k| sys.condition(k, t, s).holds());
                prop_assert_eq!(v.feasible, all);
            }
        }
    }
}
