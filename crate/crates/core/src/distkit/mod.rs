//! Discrete value distributions on a finite support, the one-dimensional earth
//! mover's distance between them, downward transfer plans, virtual values and
//! revenue curves.
//!
//! A distribution stores the support `v_0 < v_1 < … < v_n` and the masses
//! `f_0 … f_n`. Everything downstream (the single-buyer adversary, the
//! second-price functional) indexes into this support, so the type keeps its
//! cumulative sums precomputed.

mod generators;
pub mod io;

pub use generators::{bimodal, discretize, equal_revenue, power_grid, random_regular, uniform_grid};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ f_i = 1` before a distribution is rejected.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Tolerance used when checking transfer-plan feasibility.
pub const TRANSFER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct DiscreteDistribution {
    values: Vec<f64>,
    masses: Vec<f64>,
    cumulative: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawDistribution {
    values: Vec<f64>,
    masses: Vec<f64>,
}

impl TryFrom<RawDistribution> for DiscreteDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        DiscreteDistribution::new(raw.values, raw.masses)
    }
}

impl From<DiscreteDistribution> for RawDistribution {
    fn from(d: DiscreteDistribution) -> Self {
        RawDistribution {
            values: d.values,
            masses: d.masses,
        }
    }
}

impl DiscreteDistribution {
    /// Validates and builds a distribution.
    ///
    /// Masses whose sum is within [`MASS_TOLERANCE`] of one are renormalised;
    /// anything further off is rejected rather than silently rescaled.
    pub fn new(values: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if values.len() != masses.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} values but {} masses",
                values.len(),
                masses.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "value {v} at index {i} is negative or not finite"
                )));
            }
            if i > 0 && v <= values[i - 1] {
                return Err(Error::InvalidDistribution(format!(
                    "values not strictly increasing at index {i}"
                )));
            }
        }
        let mut masses = masses;
        for (i, m) in masses.iter_mut().enumerate() {
            if !m.is_finite() || *m < -1e-12 {
                return Err(Error::InvalidDistribution(format!(
                    "mass {m} at index {i} is negative or not finite"
                )));
            }
            if *m < 0.0 {
                *m = 0.0;
            }
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, not 1"
            )));
        }
        // Sums off by rounding only are kept verbatim so that files round-trip.
        if (total - 1.0).abs() > masses.len() as f64 * f64::EPSILON {
            for m in masses.iter_mut() {
                *m /= total;
            }
        }
        let mut cumulative = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for &m in &masses {
            acc += m;
            cumulative.push(acc.min(1.0));
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self {
            values,
            masses,
            cumulative,
        })
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        Self::new(vec![value], vec![1.0])
    }

    /// Builds a distribution from CDF levels `F_0 ≤ … ≤ F_n = 1` at each value.
    pub fn from_cdf(values: Vec<f64>, cdf: &[f64]) -> Result<Self> {
        if values.len() != cdf.len() {
            return Err(Error::InvalidDistribution(
                "cdf length differs from support".into(),
            ));
        }
        let mut masses = Vec::with_capacity(cdf.len());
        let mut prev = 0.0;
        for (i, &c) in cdf.iter().enumerate() {
            let level = if i + 1 == cdf.len() { 1.0 } else { c };
            let m = level - prev;
            if m < -1e-9 {
                return Err(Error::InvalidDistribution(format!("cdf decreases at index {i}")));
            }
            masses.push(m.max(0.0));
            prev = level.max(prev);
        }
        Self::new(values, masses)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Number of support points (`n + 1`).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `F_i = Σ_{j ≤ i} f_j`.
    pub fn cdf(&self, i: usize) -> f64 {
        self.cumulative[i]
    }

    pub fn cdf_levels(&self) -> &[f64] {
        &self.cumulative
    }

    /// `Pr[value ≥ v_i]`.
    pub fn survival(&self, i: usize) -> f64 {
        if i == 0 {
            1.0
        } else {
            (1.0 - self.cumulative[i - 1]).max(0.0)
        }
    }

    /// Right-continuous step CDF `Pr[value ≤ x]`.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.masses).map(|(v, f)| v * f).sum()
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }

    pub fn max_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Revenue of posting `price` to a single buyer: `price · Pr[value ≥ price]`.
    pub fn posted_price_revenue(&self, price: f64) -> f64 {
        let k = self.values.partition_point(|&v| v < price);
        if k == self.values.len() {
            0.0
        } else {
            price * self.survival(k)
        }
    }

    /// Optimal single-buyer revenue `max_i v_i · Pr[value ≥ v_i]` and the
    /// smallest maximising index.
    pub fn monopoly(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for i in 0..self.len() {
            let r = self.values[i] * self.survival(i);
            if r > best.1 + 1e-15 {
                best = (i, r);
            }
        }
        best
    }

    /// Drops zero-mass support points.
    pub fn strip_zero_mass(&self) -> Self {
        let (values, masses): (Vec<_>, Vec<_>) = self
            .values
            .iter()
            .zip(&self.masses)
            .filter(|(_, &m)| m > 0.0)
            .map(|(&v, &m)| (v, m))
            .unzip();
        Self::new(values, masses).expect("stripping zero masses keeps a valid distribution")
    }

    /// Same distribution on `support ∪ {x}`; returns the index of `x`.
    pub fn with_point(&self, x: f64) -> (Self, usize) {
        let k = self.values.partition_point(|&v| v < x);
        if k < self.len() && self.values[k] == x {
            return (self.clone(), k);
        }
        let mut values = self.values.clone();
        let mut masses = self.masses.clone();
        values.insert(k, x);
        masses.insert(k, 0.0);
        (
            Self::new(values, masses).expect("inserting a zero-mass point keeps validity"),
            k,
        )
    }

    /// Extends the value domain below `v_0` with zero-mass points: the grid
    /// ratio `v_1/v_0` is continued downward while the points stay `≥ lowest`,
    /// and a final point is placed at 0.
    ///
    /// Adversaries only move mass within the support, so a distribution whose
    /// support starts at `v_0 > 0` cannot lose mass below `v_0`; padding models
    /// a value domain that reaches down to 0.
    pub fn pad_below(&self, lowest: f64) -> Result<Self> {
        if self.len() < 2 || self.values[0] <= 0.0 {
            return Err(Error::Domain(
                "padding needs at least two support points and v_0 > 0".into(),
            ));
        }
        if !(lowest > 0.0 && lowest <= self.values[0]) {
            return Err(Error::Domain(format!(
                "padding floor must lie in (0, v_0], got {lowest}"
            )));
        }
        let ratio = self.values[1] / self.values[0];
        let mut below = Vec::new();
        let mut v = self.values[0] / ratio;
        while v >= lowest {
            below.push(v);
            v /= ratio;
        }
        below.push(0.0);
        below.reverse();
        let pad = below.len();
        let mut values = below;
        values.extend_from_slice(&self.values);
        let mut masses = vec![0.0; pad];
        masses.extend_from_slice(&self.masses);
        Self::new(values, masses)
    }

    /// Re-expresses the distribution on a superset support (zero masses on
    /// the new points).
    pub fn on_support(&self, support: &[f64]) -> Result<Self> {
        let mut masses = vec![0.0; support.len()];
        let mut j = 0;
        for (i, &v) in self.values.iter().enumerate() {
            while j < support.len() && support[j] < v {
                j += 1;
            }
            if j == support.len() || support[j] != v {
                return Err(Error::SupportMismatch(format!(
                    "value {v} missing from target support"
                )));
            }
            masses[j] = self.masses[i];
        }
        Self::new(support.to_vec(), masses)
    }
}

/// Sorted union of two supports.
pub fn union_support(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    out
}

/// Earth mover's distance on a shared support:
/// `Σ_{i ≥ 1} (v_i − v_{i−1}) |Σ_{j<i} (f_j − g_j)|`.
pub fn emd(f: &DiscreteDistribution, g: &DiscreteDistribution) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::SupportMismatch(format!(
            "supports have {} and {} points",
            f.len(),
            g.len()
        )));
    }
    for (i, (a, b)) in f.values.iter().zip(&g.values).enumerate() {
        if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
            return Err(Error::SupportMismatch(format!(
                "support values differ at index {i}: {a} vs {b}"
            )));
        }
    }
    let mut dist = 0.0;
    let mut diff = 0.0;
    for i in 1..f.len() {
        diff += f.masses[i - 1] - g.masses[i - 1];
        dist += (f.values[i] - f.values[i - 1]) * diff.abs();
    }
    Ok(dist)
}

/// EMD after aligning both distributions on the union of their supports.
pub fn emd_aligned(f: &DiscreteDistribution, g: &DiscreteDistribution) -> Result<f64> {
    let support = union_support(&f.values, &g.values);
    emd(&f.on_support(&support)?, &g.on_support(&support)?)
}

/// Downward mass moves: `t[i−1]` is the mass moved from `v_i` to `v_{i−1}`
/// (`i = 1..=n`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferPlan {
    pub t: Vec<f64>,
}

impl TransferPlan {
    pub fn new(t: Vec<f64>) -> Self {
        Self { t }
    }

    pub fn zero(support_len: usize) -> Self {
        Self {
            t: vec![0.0; support_len.saturating_sub(1)],
        }
    }

    /// `Σ t_i (v_i − v_{i−1})`.
    pub fn cost(&self, values: &[f64]) -> f64 {
        self.t
            .iter()
            .enumerate()
            .map(|(k, t)| t * (values[k + 1] - values[k]))
            .sum()
    }

    /// Checks `t_i ≥ 0`, `t_n ≤ f_n` and `t_i ≤ t_{i+1} + f_i`.
    pub fn validate(&self, f: &DiscreteDistribution) -> Result<()> {
        let n = f.len() - 1;
        if self.t.len() != n {
            return Err(Error::SupportMismatch(format!(
                "transfer plan has {} entries for a support of {} points",
                self.t.len(),
                f.len()
            )));
        }
        for i in 1..=n {
            let ti = self.t[i - 1];
            if !ti.is_finite() || ti < -TRANSFER_TOLERANCE {
                return Err(Error::InfeasibleTransfer(format!("t_{i} = {ti} < 0")));
            }
            let above = if i == n { 0.0 } else { self.t[i] };
            if ti > above + f.masses[i] + TRANSFER_TOLERANCE {
                return Err(Error::InfeasibleTransfer(format!(
                    "t_{i} = {ti} exceeds available mass {}",
                    above + f.masses[i]
                )));
            }
        }
        Ok(())
    }
}

/// `f′_i = f_i + t_{i+1} − t_i` with `t_0 = t_{n+1} = 0`.
pub fn apply_transfer(f: &DiscreteDistribution, plan: &TransferPlan) -> Result<DiscreteDistribution> {
    plan.validate(f)?;
    let n = f.len() - 1;
    let t = |i: usize| -> f64 {
        if i == 0 || i > n {
            0.0
        } else {
            plan.t[i - 1].max(0.0)
        }
    };
    let masses = (0..=n)
        .map(|i| (f.masses[i] + t(i + 1) - t(i)).max(0.0))
        .collect();
    DiscreteDistribution::new(f.values.clone(), masses)
}

/// Discrete virtual values `φ_i = v_i − (v_{i+1} − v_i)(1 − F_i)/f_i`, with
/// `φ_n = v_n`.
pub fn virtual_values(f: &DiscreteDistribution) -> Result<Vec<f64>> {
    let n = f.len() - 1;
    if let Some(i) = f.masses.iter().position(|&m| m <= 0.0) {
        return Err(Error::ZeroMass(i));
    }
    // Tail sums accumulated from the top avoid the cancellation in 1 − F_i.
    let mut phi = vec![f.values[n]; f.len()];
    let mut tail = 0.0;
    for i in (0..n).rev() {
        tail += f.masses[i + 1];
        phi[i] = f.values[i] - (f.values[i + 1] - f.values[i]) * tail / f.masses[i];
    }
    Ok(phi)
}

/// Regularity: non-decreasing virtual values after dropping zero-mass points,
/// up to `1e-9` of the largest value.
pub fn is_regular(f: &DiscreteDistribution) -> bool {
    let phi = virtual_values(&f.strip_zero_mass()).expect("zero masses stripped");
    let tol = 1e-9 * f.max_value().max(1.0);
    phi.windows(2).all(|w| w[1] >= w[0] - tol)
}

/// Piecewise-linear revenue curve in quantile space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevenueCurve {
    /// `(q, R(q))`, quantiles non-decreasing, first point `(0, 0)`.
    pub points: Vec<(f64, f64)>,
    pub gamma: Option<f64>,
}

impl RevenueCurve {
    /// Linear interpolation; clamps outside `[0, 1]`.
    pub fn value_at(&self, q: f64) -> f64 {
        let pts = &self.points;
        if q <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let ((q0, r0), (q1, r1)) = (w[0], w[1]);
            if q <= q1 {
                if q1 - q0 <= 0.0 {
                    return r1;
                }
                return r0 + (r1 - r0) * (q - q0) / (q1 - q0);
            }
        }
        pts.last().unwrap().1
    }

    pub fn max_revenue(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    /// Chord slopes non-increasing (ignoring zero-width segments).
    pub fn is_concave(&self, tol: f64) -> bool {
        let slopes: Vec<f64> = self
            .points
            .windows(2)
            .filter(|w| w[1].0 - w[0].0 > 1e-15)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        slopes.windows(2).all(|s| s[1] <= s[0] + tol)
    }

    /// The curve capped at level `gamma` (`min(R(q), γ)`), with the crossing
    /// points inserted.
    pub fn flattened(&self, gamma: f64) -> RevenueCurve {
        let mut out = Vec::with_capacity(self.points.len() + 4);
        out.push((self.points[0].0, self.points[0].1.min(gamma)));
        for w in self.points.windows(2) {
            let ((q0, r0), (q1, r1)) = (w[0], w[1]);
            if (r0 - gamma) * (r1 - gamma) < 0.0 {
                let q = q0 + (gamma - r0) * (q1 - q0) / (r1 - r0);
                out.push((q, gamma));
            }
            out.push((q1, r1.min(gamma)));
        }
        RevenueCurve {
            points: out,
            gamma: Some(gamma),
        }
    }
}

/// `(q_i, q_i · v_i)` for every support value with `q_i = Pr[value ≥ v_i]`,
/// plus the origin.
pub fn revenue_curve(f: &DiscreteDistribution) -> RevenueCurve {
    let mut points = Vec::with_capacity(f.len() + 1);
    points.push((0.0, 0.0));
    for i in (0..f.len()).rev() {
        let q = f.survival(i);
        points.push((q, q * f.values[i]));
    }
    RevenueCurve { points, gamma: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64], m: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(v.to_vec(), m.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(DiscreteDistribution::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![-1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![1.0, 2.0], vec![0.5, 0.4]).is_err());
        assert!(DiscreteDistribution::new(vec![1.0, 2.0], vec![1.2, -0.2]).is_err());
        assert!(DiscreteDistribution::new(vec![], vec![]).is_err());
        // within tolerance: renormalised
        let d = DiscreteDistribution::new(vec![1.0, 2.0], vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!((d.masses().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn emd_examples() {
        let f = dist(&[1.0, 2.0, 4.0], &[0.5, 0.5, 0.0]);
        let g = dist(&[1.0, 2.0, 4.0], &[0.0, 0.5, 0.5]);
        assert_eq!(emd(&f, &f).unwrap(), 0.0);
        assert!((emd(&f, &g).unwrap() - 1.5).abs() < 1e-12);

        let a = dist(&[0.9, 1.0], &[0.0, 1.0]);
        let b = dist(&[0.9, 1.0], &[1.0, 0.0]);
        assert!((emd(&a, &b).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn emd_support_mismatch() {
        let f = dist(&[1.0, 2.0], &[0.5, 0.5]);
        let g = dist(&[1.0, 2.0, 3.0], &[0.5, 0.5, 0.0]);
        assert!(matches!(emd(&f, &g), Err(Error::SupportMismatch(_))));
        let h = dist(&[1.0, 3.0], &[0.5, 0.5]);
        assert!(matches!(emd(&f, &h), Err(Error::SupportMismatch(_))));
        // union-support alignment: move 0.5 from 2 to 3
        assert!((emd_aligned(&f, &h).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn transfer_examples() {
        let f = dist(&[1.0, 2.0], &[0.5, 0.5]);
        assert_eq!(apply_transfer(&f, &TransferPlan::zero(2)).unwrap(), f);

        let plan = TransferPlan::new(vec![0.3]);
        let g = apply_transfer(&f, &plan).unwrap();
        assert!((g.masses()[0] - 0.8).abs() < 1e-12);
        assert!((g.masses()[1] - 0.2).abs() < 1e-12);
        assert!((emd(&f, &g).unwrap() - 0.3).abs() < 1e-12);
        assert!((plan.cost(f.values()) - 0.3).abs() < 1e-12);

        let f3 = dist(&[1.0, 2.0, 3.0], &[0.2, 0.3, 0.5]);
        // t_1 = f_1 + t_2 + 0.01 breaks the chain constraint
        let bad = TransferPlan::new(vec![0.3 + 0.1 + 0.01, 0.1]);
        assert!(matches!(
            apply_transfer(&f3, &bad),
            Err(Error::InfeasibleTransfer(_))
        ));
        assert!(apply_transfer(&f3, &TransferPlan::new(vec![0.4, 0.1])).is_ok());
        assert!(apply_transfer(&f3, &TransferPlan::new(vec![0.0, 0.6])).is_err());
        assert!(apply_transfer(&f3, &TransferPlan::new(vec![-0.1, 0.0])).is_err());
    }

    #[test]
    fn virtual_value_examples() {
        let f = dist(&[1.0, 2.0], &[0.5, 0.5]);
        let phi = virtual_values(&f).unwrap();
        assert!((phi[0] - 0.0).abs() < 1e-12);
        assert!((phi[1] - 2.0).abs() < 1e-12);
        assert!(is_regular(&f));

        let c = DiscreteDistribution::point_mass(3.0).unwrap();
        assert_eq!(virtual_values(&c).unwrap(), vec![3.0]);
        assert!(is_regular(&c));

        let z = dist(&[1.0, 2.0, 3.0], &[0.5, 0.0, 0.5]);
        assert_eq!(virtual_values(&z), Err(Error::ZeroMass(1)));
        assert!(is_regular(&z));
    }

    #[test]
    fn irregular_detected() {
        // heavy low mass, light middle, heavy top
        let f = dist(&[1.0, 2.0, 3.0, 4.0], &[0.1, 0.6, 0.05, 0.25]);
        let phi = virtual_values(&f).unwrap();
        assert!(phi.windows(2).any(|w| w[1] < w[0]));
        assert!(!is_regular(&f));
    }

    #[test]
    fn revenue_curve_examples() {
        let c = DiscreteDistribution::point_mass(2.5).unwrap();
        assert_eq!(revenue_curve(&c).points, vec![(0.0, 0.0), (1.0, 2.5)]);

        let f = dist(&[1.0, 2.0], &[0.5, 0.5]);
        let rc = revenue_curve(&f);
        assert_eq!(rc.points, vec![(0.0, 0.0), (0.5, 1.0), (1.0, 1.0)]);
        assert!(rc.is_concave(1e-12));
        assert!((rc.value_at(0.25) - 0.5).abs() < 1e-12);

        let flat = rc.flattened(0.8);
        assert_eq!(flat.points, vec![(0.0, 0.0), (0.4, 0.8), (0.5, 0.8), (1.0, 0.8)]);
    }

    #[test]
    fn step_cdf_and_posted_prices() {
        let f = dist(&[1.0, 2.0, 4.0], &[0.25, 0.25, 0.5]);
        assert_eq!(f.cdf_at(0.5), 0.0);
        assert_eq!(f.cdf_at(1.0), 0.25);
        assert_eq!(f.cdf_at(3.0), 0.5);
        assert_eq!(f.cdf_at(4.0), 1.0);
        assert_eq!(f.posted_price_revenue(2.0), 2.0 * 0.75);
        assert_eq!(f.posted_price_revenue(3.0), 3.0 * 0.5);
        assert_eq!(f.posted_price_revenue(5.0), 0.0);
        assert_eq!(f.monopoly(), (2, 2.0));
    }

    #[test]
    fn padding_below() {
        let f = dist(&[1.0, 2.0, 4.0], &[0.25, 0.25, 0.5]);
        let g = f.pad_below(0.2).unwrap();
        assert_eq!(g.values(), &[0.0, 0.25, 0.5, 1.0, 2.0, 4.0]);
        assert_eq!(g.masses(), &[0.0, 0.0, 0.0, 0.25, 0.25, 0.5]);
        assert_eq!(f.pad_below(1.0).unwrap().values(), &[0.0, 1.0, 2.0, 4.0]);
        assert!(f.pad_below(0.0).is_err());
        assert!(g.pad_below(0.1).is_err());
    }

    #[test]
    fn support_alignment() {
        let f = dist(&[1.0, 3.0], &[0.5, 0.5]);
        let (g, k) = f.with_point(2.0);
        assert_eq!(k, 1);
        assert_eq!(g.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(g.masses(), &[0.5, 0.0, 0.5]);
        assert_eq!(f.with_point(3.0).1, 1);
        assert_eq!(
            union_support(&[1.0, 3.0], &[0.5, 3.0, 4.0]),
            vec![0.5, 1.0, 3.0, 4.0]
        );
        let rebuilt = DiscreteDistribution::from_cdf(vec![1.0, 2.0, 3.0], &[0.5, 0.5, 1.0]).unwrap();
        assert_eq!(rebuilt, g);
    }
}
