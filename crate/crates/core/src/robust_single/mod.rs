//! Single-buyer robust mechanism design.
//!
//! A mechanism is a menu `(x, p)` over the support of a reference
//! distribution. The adversary moves mass downward within an EMD budget; the
//! seller picks the menu whose worst case is largest.

mod adversary;
mod irregular;
mod optimal;

pub use adversary::{minimax_value, worst_case_revenue, worst_case_value, WorstCase};
pub use irregular::{solve_robust_irregular, IrregularSolution};
pub use optimal::{
    candidate_mechanism, deterministic_robust_price, solve_robust_optimal, DeterministicPrice,
};

use serde::{Deserialize, Serialize};

use crate::distkit::DiscreteDistribution;
use crate::error::{Error, Result};

/// Tolerance for the IC and IR inequalities.
pub const IC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mechanism {
    pub values: Vec<f64>,
    pub allocation: Vec<f64>,
    pub payment: Vec<f64>,
}

impl Mechanism {
    pub fn new(values: Vec<f64>, allocation: Vec<f64>, payment: Vec<f64>) -> Result<Self> {
        if values.len() != allocation.len() || values.len() != payment.len() {
            return Err(Error::SupportMismatch(format!(
                "{} values, {} allocations, {} payments",
                values.len(),
                allocation.len(),
                payment.len()
            )));
        }
        Ok(Self {
            values,
            allocation,
            payment,
        })
    }

    /// Payments from the discrete Myerson identity
    /// `p_i = Σ_{j ≤ i} (x_j − x_{j−1}) v_j` with `x_{−1} = 0`.
    pub fn from_allocation(values: &[f64], allocation: Vec<f64>) -> Result<Self> {
        if values.len() != allocation.len() {
            return Err(Error::SupportMismatch(format!(
                "{} values but {} allocations",
                values.len(),
                allocation.len()
            )));
        }
        let mut payment = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (&v, &x) in values.iter().zip(&allocation) {
            acc += (x - prev) * v;
            prev = x;
            payment.push(acc);
        }
        Ok(Self {
            values: values.to_vec(),
            allocation,
            payment,
        })
    }

    /// Posted price at `price`: every type `v ≥ price` buys at `price`.
    pub fn posted_price(values: &[f64], price: f64) -> Self {
        let allocation = values
            .iter()
            .map(|&v| if v >= price { 1.0 } else { 0.0 })
            .collect();
        let payment = values
            .iter()
            .map(|&v| if v >= price { price } else { 0.0 })
            .collect();
        Self {
            values: values.to_vec(),
            allocation,
            payment,
        }
    }

    /// Sells to every type at the lowest support value.
    pub fn sell_all(values: &[f64]) -> Self {
        Self {
            values: values.to_vec(),
            allocation: vec![1.0; values.len()],
            payment: vec![values[0]; values.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Expected payment `Σ p_i f_i`; `f` must live on the same support.
    pub fn revenue(&self, f: &DiscreteDistribution) -> Result<f64> {
        same_support(&self.values, f.values())?;
        Ok(self.payment.iter().zip(f.masses()).map(|(p, m)| p * m).sum())
    }
}

pub(crate) fn same_support(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::SupportMismatch(format!(
            "mechanism has {} types, distribution has {} support points",
            a.len(),
            b.len()
        )));
    }
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
            return Err(Error::SupportMismatch(format!(
                "type {i} has value {x}, support has {y}"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Type `i` prefers the option of type `j`; `gain` is the utility gained.
    Ic { i: usize, j: usize, gain: f64 },
    /// Type `i` has utility `utility < 0`.
    Ir { i: usize, utility: f64 },
    /// Allocation outside `[0, 1]`.
    Range { i: usize, allocation: f64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IcReport {
    pub violations: Vec<Violation>,
}

impl IcReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// Largest violation amount, 0 when truthful.
    pub fn worst(&self) -> f64 {
        self.violations
            .iter()
            .map(|v| match *v {
                Violation::Ic { gain, .. } => gain,
                Violation::Ir { utility, .. } => -utility,
                Violation::Range { allocation, .. } => {
                    if allocation < 0.0 {
                        -allocation
                    } else {
                        allocation - 1.0
                    }
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Checks every pairwise IC inequality and IR against `values`.
///
/// `(p_i − p_j)/v_i ≤ x_i − x_j ≤ (p_i − p_j)/v_j` is checked in the
/// multiplied-out form so that `v_0 = 0` is allowed.
pub fn check_ic_ir(mech: &Mechanism, values: &[f64]) -> Result<IcReport> {
    if mech.allocation.len() != values.len() || mech.payment.len() != values.len() {
        return Err(Error::SupportMismatch(format!(
            "mechanism arrays have lengths {} and {}, support has {}",
            mech.allocation.len(),
            mech.payment.len(),
            values.len()
        )));
    }
    let (x, p) = (&mech.allocation, &mech.payment);
    let mut report = IcReport::default();
    for (i, &xi) in x.iter().enumerate() {
        if !(-IC_TOLERANCE..=1.0 + IC_TOLERANCE).contains(&xi) {
            report.violations.push(Violation::Range { i, allocation: xi });
        }
    }
    let utility = |i: usize, j: usize| values[i] * x[j] - p[j];
    for i in 0..values.len() {
        let u = utility(i, i);
        if u < -IC_TOLERANCE {
            report.violations.push(Violation::Ir { i, utility: u });
        }
        for j in 0..values.len() {
            if i == j {
                continue;
            }
            let gain = utility(i, j) - u;
            if gain > IC_TOLERANCE {
                report.violations.push(Violation::Ic { i, j, gain });
            }
        }
    }
    Ok(report)
}

/// Optimal dual solution of the adversary program.
///
/// `z_0 = p_0`, `z_i = p_i − β_i`, and the certified worst-case revenue is
/// `Σ z_i f_i − λ ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub lambda: f64,
    /// `β_1 … β_n`.
    pub beta: Vec<f64>,
    /// `z_0 … z_n`.
    pub z: Vec<f64>,
}

impl DualCertificate {
    /// Componentwise-smallest feasible `β` for a given `λ`:
    /// `β_i = max(0, β_{i−1} + (p_i − p_{i−1}) − λ (v_i − v_{i−1}))`.
    pub fn for_lambda(mech: &Mechanism, lambda: f64) -> Self {
        let (v, p) = (&mech.values, &mech.payment);
        let mut beta = Vec::with_capacity(v.len().saturating_sub(1));
        let mut z = Vec::with_capacity(v.len());
        z.push(p[0]);
        let mut prev = 0.0;
        for i in 1..v.len() {
            let b = (prev + (p[i] - p[i - 1]) - lambda * (v[i] - v[i - 1])).max(0.0);
            beta.push(b);
            z.push(p[i] - b);
            prev = b;
        }
        Self { lambda, beta, z }
    }

    /// `Σ z_i f_i − λ ε`.
    pub fn value(&self, f: &DiscreteDistribution, eps: f64) -> f64 {
        self.z.iter().zip(f.masses()).map(|(z, m)| z * m).sum::<f64>() - self.lambda * eps
    }

    /// Largest violation of `λ ≥ 0`, `β ≥ 0`, `z_0 = p_0`, `z_i = p_i − β_i`
    /// and `z_i − z_{i−1} ≤ λ (v_i − v_{i−1})`.
    pub fn residual(&self, mech: &Mechanism) -> f64 {
        let (v, p) = (&mech.values, &mech.payment);
        let mut worst = (-self.lambda).max(0.0).max((self.z[0] - p[0]).abs());
        for i in 1..v.len() {
            let b = self.beta[i - 1];
            worst = worst
                .max(-b)
                .max((self.z[i] - (p[i] - b)).abs())
                .max(self.z[i] - self.z[i - 1] - self.lambda * (v[i] - v[i - 1]));
        }
        worst
    }

    /// Reads `z` as a payment rule: `x′_0 = x0`,
    /// `x′_i = x′_{i−1} + (z_i − z_{i−1})/v_i`.
    pub fn payment_mechanism(&self, values: &[f64], x0: f64) -> Mechanism {
        let mut allocation = Vec::with_capacity(values.len());
        let mut x = x0;
        allocation.push(x);
        for i in 1..values.len() {
            x += (self.z[i] - self.z[i - 1]) / values[i];
            allocation.push(x);
        }
        Mechanism {
            values: values.to_vec(),
            allocation,
            payment: self.z.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyTag {
    /// Allocate to everyone at price `v_0`.
    SellAll,
    /// Ramp `x_i ∝ Σ_{j=a}^{i} (v_j − v_{j−1})/v_j` on the index range `[a, b]`.
    Interval { a: usize, b: usize },
    /// Logarithmic ramp over the value intervals of an [`IntervalSet`].
    LogRamp { s: usize },
    /// Deterministic price at support index `index`.
    PostedPrice { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustSolution {
    pub mechanism: Mechanism,
    pub value: f64,
    pub worst_distribution: DiscreteDistribution,
    pub certificate: DualCertificate,
    pub family_tag: FamilyTag,
}

/// Disjoint increasing value intervals with `λ = 1 / Σ ln(b_i / a_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    pub intervals: Vec<(f64, f64)>,
    pub lambda: f64,
}

impl IntervalSet {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        let mut total = 0.0;
        for (k, &(a, b)) in intervals.iter().enumerate() {
            if !(a > 0.0 && a <= b) {
                return Err(Error::Domain(format!(
                    "interval {k} = ({a}, {b}) is not 0 < a ≤ b"
                )));
            }
            if k > 0 && a <= intervals[k - 1].1 {
                return Err(Error::Domain(format!("interval {k} overlaps its predecessor")));
            }
            total += (b / a).ln();
        }
        if !(total > 0.0) {
            return Err(Error::Domain("intervals have zero total log-length".into()));
        }
        Ok(Self {
            intervals,
            lambda: 1.0 / total,
        })
    }

    /// `x(v) = λ Σ_i ln(clamp(v, a_i, b_i) / a_i)`, exactly 1 from `b_s` on.
    pub fn allocation_at(&self, v: f64) -> f64 {
        let last = self.intervals.last().map_or(0.0, |iv| iv.1);
        if v >= last {
            return 1.0;
        }
        let s: f64 = self
            .intervals
            .iter()
            .map(|&(a, b)| (v.clamp(a, b) / a).ln())
            .sum();
        (self.lambda * s).clamp(0.0, 1.0)
    }
}
