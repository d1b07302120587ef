use serde::{Deserialize, Serialize};

use super::adversary::worst_case_revenue;
use super::{FamilyTag, IntervalSet, Mechanism, RobustSolution};
use crate::distkit::{revenue_curve, DiscreteDistribution, RevenueCurve};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrregularSolution {
    pub solution: RobustSolution,
    /// Present when the log-ramp mechanism won.
    pub intervals: Option<IntervalSet>,
    pub gamma: f64,
    pub curve: RevenueCurve,
    pub flattened: RevenueCurve,
}

/// Robust mechanism for an arbitrary (possibly irregular) grid distribution.
///
/// The revenue curve is read as the piecewise-linear curve of a continuous
/// distribution. Capping it at level `γ` costs
/// `∫ max(0, R(q) − γ)/q dq` of EMD; `γ` is bisected until that equals `eps`.
/// Each run of quantiles `(q_lo, q_hi)` where the curve exceeds `γ` gives the
/// value interval `(γ/q_hi, γ/q_lo)`, and the mechanism ramps the allocation
/// logarithmically across those intervals. Its worst case on the grid is then
/// computed exactly and compared with selling to everyone at `v_0`.
pub fn solve_robust_irregular(f: &DiscreteDistribution, eps: f64) -> Result<IrregularSolution> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("budget must be finite and ≥ 0, got {eps}")));
    }
    let v = f.values();
    let curve = revenue_curve(f);
    let capacity = f.mean() - f.min_value();
    let top = curve.max_revenue();

    let sell_all = || -> Result<IrregularSolution> {
        let mech = Mechanism::sell_all(v);
        let sol = certify(mech, f, eps, FamilyTag::SellAll)?;
        let gamma = f.min_value();
        Ok(IrregularSolution {
            solution: sol,
            intervals: None,
            gamma,
            flattened: curve.flattened(gamma),
            curve: curve.clone(),
        })
    };
    if eps >= capacity {
        return sell_all();
    }

    let gamma = if eps == 0.0 {
        top
    } else {
        let tol = (eps * 1e-6).max(1e-8);
        let (mut lo, mut hi) = (0.0, top);
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let d = flattening_cost(&curve, mid);
            if (d - eps).abs() <= tol {
                break;
            }
            if d > eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        mid
    };

    let runs = runs_above(&curve, gamma);
    let intervals: Vec<(f64, f64)> = runs
        .iter()
        .rev()
        .map(|&(q_lo, q_hi)| (gamma / q_hi, gamma / q_lo))
        .fold(Vec::new(), |mut acc: Vec<(f64, f64)>, (a, b)| {
            match acc.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => acc.push((a, b)),
            }
            acc
        });
    let set = IntervalSet::new(intervals)
        .ok()
        .filter(|s| s.lambda.is_finite() && s.lambda < 1e12);

    let (mech, tag) = match &set {
        Some(s) => {
            let x = v.iter().map(|&vi| s.allocation_at(vi)).collect();
            (
                Mechanism::from_allocation(v, x)?,
                FamilyTag::LogRamp { s: s.intervals.len() },
            )
        }
        None => {
            let (k, _) = f.monopoly();
            (
                Mechanism::posted_price(v, v[k]),
                FamilyTag::PostedPrice { index: k },
            )
        }
    };
    let sol = certify(mech, f, eps, tag)?;
    let fallback = sell_all()?;
    if fallback.solution.value > sol.value + 1e-12 {
        return Ok(fallback);
    }
    Ok(IrregularSolution {
        solution: sol,
        intervals: set,
        gamma,
        flattened: curve.flattened(gamma),
        curve,
    })
}

fn certify(mech: Mechanism, f: &DiscreteDistribution, eps: f64, tag: FamilyTag) -> Result<RobustSolution> {
    let wc = worst_case_revenue(&mech, f, eps)?;
    Ok(RobustSolution {
        mechanism: mech,
        value: wc.value,
        worst_distribution: wc.worst,
        certificate: wc.certificate,
        family_tag: tag,
    })
}

/// Non-degenerate segments `(q0, r0, q1, r1)` in increasing quantile order.
fn segments(curve: &RevenueCurve) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
    curve
        .points
        .windows(2)
        .filter(|w| w[1].0 > w[0].0)
        .map(|w| (w[0].0, w[0].1, w[1].0, w[1].1))
}

/// Sub-interval of a segment where the curve lies above `gamma`.
fn above(seg: (f64, f64, f64, f64), gamma: f64) -> Option<(f64, f64)> {
    let (q0, r0, q1, r1) = seg;
    let cross = || q0 + (gamma - r0) * (q1 - q0) / (r1 - r0);
    match (r0 > gamma, r1 > gamma) {
        (true, true) => Some((q0, q1)),
        (false, true) => Some((cross(), q1)),
        (true, false) => Some((q0, cross())),
        (false, false) => None,
    }
}

/// `∫ max(0, R(q) − γ)/q dq` in closed form per linear piece.
pub(crate) fn flattening_cost(curve: &RevenueCurve, gamma: f64) -> f64 {
    let mut total = 0.0;
    for seg in segments(curve) {
        let Some((lo, hi)) = above(seg, gamma) else {
            continue;
        };
        let (q0, r0, q1, r1) = seg;
        let slope = (r1 - r0) / (q1 - q0);
        let intercept = r0 - slope * q0;
        if lo > 0.0 {
            total += (intercept - gamma) * (hi / lo).ln();
        }
        total += slope * (hi - lo);
    }
    total
}

/// Maximal quantile runs where the curve exceeds `gamma`, increasing.
fn runs_above(curve: &RevenueCurve, gamma: f64) -> Vec<(f64, f64)> {
    let mut runs: Vec<(f64, f64)> = Vec::new();
    for seg in segments(curve) {
        if let Some((lo, hi)) = above(seg, gamma) {
            match runs.last_mut() {
                Some(last) if last.1 >= lo => last.1 = hi,
                _ => runs.push((lo, hi)),
            }
        }
    }
    runs.retain(|&(lo, hi)| hi > lo && lo > 0.0);
    runs
}
