//! Second-price auctions with `m` i.i.d. buyers against an EMD adversary.
//!
//! Revenue is `∫ ψ(F(v)) dv` with `ψ(x) = 1 + (m−1)xᵐ − m·xᵐ⁻¹`, the
//! probability that the second-highest of `m` draws exceeds `v`. On a step
//! CDF the integral is an exact sum over support gaps.

mod reserve;
mod worst;

pub use reserve::{robust_reserve_fptas, worst_case_spa_with_reserve, FptasGrids, ReserveSolution};
pub use worst::{flatten_at_quantile, worst_case_spa};

use serde::{Deserialize, Serialize};

use crate::distkit::DiscreteDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaInstance {
    pub prior: DiscreteDistribution,
    pub m: usize,
    pub eps: f64,
    #[serde(rename = "H")]
    pub h: f64,
}

impl SpaInstance {
    pub fn new(prior: DiscreteDistribution, m: usize, eps: f64, h: f64) -> Result<Self> {
        let inst = Self { prior, m, eps, h };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        check_buyers(self.m)?;
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return Err(Error::Domain(format!(
                "budget must be finite and ≥ 0, got {}",
                self.eps
            )));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::Domain(format!("H must be finite and > 0, got {}", self.h)));
        }
        if self.prior.max_value() > self.h {
            return Err(Error::InvalidDistribution(format!(
                "support reaches {} above H = {}",
                self.prior.max_value(),
                self.h
            )));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }
}

/// Worst-case distribution for a second-price auction.
///
/// `distribution` equals the prior below `k` and from `l` on, and has CDF
/// `flat_level` on `[k, l)`. With a reserve, `reserve_level` is the CDF at
/// the reserve (`max(F, reserve_level)` holds between the reserve and `k`);
/// without one it is `G(v_0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseSpaResult {
    pub k: f64,
    pub l: f64,
    pub flat_level: f64,
    pub reserve_level: f64,
    pub distribution: DiscreteDistribution,
    pub revenue: f64,
}

fn check_buyers(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::Domain(format!(
            "a second-price auction needs m ≥ 2 buyers, got {m}"
        )));
    }
    Ok(())
}

/// `ψ(x) = 1 + (m−1)xᵐ − m·xᵐ⁻¹`, written as `1 − xᵐ − m·xᵐ⁻¹(1 − x)`.
pub fn psi(x: f64, m: usize) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let lower = x.powi(m as i32 - 1);
    (1.0 - lower * x - m as f64 * lower * (1.0 - x)).clamp(0.0, 1.0)
}

/// CDF level where `ψ` changes from concave to convex.
pub fn inflection(m: usize) -> f64 {
    (m as f64 - 2.0) / (m as f64 - 1.0)
}

/// Expected second-highest of `m` i.i.d. draws from `f`.
pub fn spa_revenue(f: &DiscreteDistribution, m: usize) -> Result<f64> {
    check_buyers(m)?;
    let v = f.values();
    let mut total = v[0];
    for i in 0..v.len() - 1 {
        total += (v[i + 1] - v[i]) * psi(f.cdf(i), m);
    }
    Ok(total)
}

/// Second price with reserve `r`; a buyer must bid strictly above `r` to win.
///
/// `r(1 − F(r)ᵐ) + ∫_r^∞ ψ(F(v)) dv` with the right-continuous step CDF.
pub fn spa_reserve_revenue(f: &DiscreteDistribution, m: usize, r: f64) -> Result<f64> {
    check_buyers(m)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("reserve must be finite and ≥ 0, got {r}")));
    }
    let v = f.values();
    let mut total = r * (1.0 - f.cdf_at(r).powi(m as i32));
    let start = v.partition_point(|&x| x <= r);
    if start > 0 && start < v.len() {
        total += (v[start] - r) * psi(f.cdf(start - 1), m);
    } else if start == 0 {
        total += v[0] - r;
    }
    for i in start..v.len().saturating_sub(1) {
        total += (v[i + 1] - v[i]) * psi(f.cdf(i), m);
    }
    Ok(total)
}

/// Prefix sums over support cells `[v_i, v_{i+1})` of a fixed CDF.
///
/// Cell `i` has width `gap_i` and level `F_i`; `level(n) = 1` closes the top.
pub(crate) struct Cells {
    levels: Vec<f64>,
    width: Vec<f64>,
    weighted: Vec<f64>,
    revenue: Vec<f64>,
    m: usize,
}

impl Cells {
    pub(crate) fn new(f: &DiscreteDistribution, m: usize) -> Self {
        let v = f.values();
        let n = v.len() - 1;
        let mut levels = f.cdf_levels().to_vec();
        levels[n] = 1.0;
        let (mut width, mut weighted, mut revenue) = (vec![0.0], vec![0.0], vec![0.0]);
        for i in 0..n {
            let g = v[i + 1] - v[i];
            width.push(width[i] + g);
            weighted.push(weighted[i] + g * levels[i]);
            revenue.push(revenue[i] + g * psi(levels[i], m));
        }
        Self {
            levels,
            width,
            weighted,
            revenue,
            m,
        }
    }

    /// Number of cells `n`.
    pub(crate) fn cells(&self) -> usize {
        self.levels.len() - 1
    }

    pub(crate) fn level(&self, i: usize) -> f64 {
        self.levels[i]
    }

    pub(crate) fn width(&self, a: usize, b: usize) -> f64 {
        self.width[b] - self.width[a]
    }

    pub(crate) fn psi_sum(&self, a: usize, b: usize) -> f64 {
        self.revenue[b] - self.revenue[a]
    }

    /// `∫` of `c − F` over cells `[a, b)`.
    pub(crate) fn lift_cost(&self, a: usize, b: usize, c: f64) -> f64 {
        c * (self.width[b] - self.width[a]) - (self.weighted[b] - self.weighted[a])
    }

    /// First index in `[a, b]` whose level is `≥ c`, or `b`.
    pub(crate) fn first_at_least(&self, a: usize, b: usize, c: f64) -> usize {
        a + self.levels[a..b].partition_point(|&x| x < c)
    }

    /// Cost of lifting every cell from `a` on to at least `c`, and the first
    /// index already at `c`.
    pub(crate) fn flat_cost(&self, a: usize, c: f64) -> (usize, f64) {
        let j = self.first_at_least(a, self.cells(), c);
        (j, self.lift_cost(a, j, c).max(0.0))
    }

    /// Level `c ≤ cap` with `flat_cost(a, c) = budget`, capped at `cap`
    /// (where the spend may fall short). Also returns the end index.
    pub(crate) fn level_for(&self, a: usize, end: usize, budget: f64, cap: f64) -> (f64, usize) {
        if budget <= 0.0 || a >= end {
            return (self.levels[a], a);
        }
        // level(end) is treated as `cap` so the search stays inside [a, end].
        let at = |j: usize| {
            let c = if j == end { cap } else { self.levels[j].min(cap) };
            self.lift_cost(a, j, c)
        };
        if at(end) <= budget {
            return (cap, end);
        }
        let (mut lo, mut hi) = (a + 1, end);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if at(mid) >= budget {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let j = lo;
        let c = (budget + self.weighted[j] - self.weighted[a]) / self.width(a, j);
        (c.min(cap), j)
    }

    pub(crate) fn psi(&self, x: f64) -> f64 {
        psi(x, self.m)
    }
}
