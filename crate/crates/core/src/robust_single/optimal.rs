use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adversary::{parametric_value, worst_case_revenue};
use super::{DualCertificate, FamilyTag, Mechanism, RobustSolution};
use crate::distkit::{is_regular, DiscreteDistribution};
use crate::error::{Error, Result};

/// Candidates whose worst-case values differ by less than this are tied and
/// the earlier one in enumeration order wins.
const TIE_TOLERANCE: f64 = 1e-12;

/// Ramp mechanism on the index range `[a, b]`.
///
/// `λ = 1 / Σ_{j=a}^{b} (v_j − v_{j−1})/v_j` with `v_{−1} = 0`, `x_i = 0` below
/// `a`, `x_i = λ Σ_{j=a}^{i} (v_j − v_{j−1})/v_j` on `[a, b]` (so `x_b = 1`)
/// and 1 above; payments follow the discrete Myerson identity.
pub fn candidate_mechanism(values: &[f64], a: usize, b: usize) -> Result<Mechanism> {
    if a > b || b >= values.len() {
        return Err(Error::Index(format!(
            "need 0 ≤ a ≤ b ≤ {}, got a = {a}, b = {b}",
            values.len().saturating_sub(1)
        )));
    }
    Mechanism::from_allocation(values, ramp(values, a, b))
}

fn ramp(values: &[f64], a: usize, b: usize) -> Vec<f64> {
    let step = |j: usize| {
        let below = if j == 0 { 0.0 } else { values[j - 1] };
        if values[j] > 0.0 {
            (values[j] - below) / values[j]
        } else {
            0.0
        }
    };
    let total: f64 = (a..=b).map(step).sum();
    let mut x = vec![0.0; values.len()];
    let mut acc = 0.0;
    for (i, xi) in x.iter_mut().enumerate().skip(a) {
        if i >= b || total <= 0.0 {
            *xi = 1.0;
        } else {
            acc += step(i);
            *xi = (acc / total).min(1.0);
        }
    }
    x
}

fn regular_input(f: &DiscreteDistribution, eps: f64) -> Result<()> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("budget must be finite and ≥ 0, got {eps}")));
    }
    if !is_regular(f) {
        return Err(Error::Irregular);
    }
    Ok(())
}

/// Best mechanism among sell-all-at-`v_0` and every ramp `(a, b)`.
///
/// Candidates are scored in parallel with the exact parametric adversary;
/// the winner is then re-solved with the LP adversary, which supplies the
/// reported value, worst distribution and certificate.
pub fn solve_robust_optimal(f: &DiscreteDistribution, eps: f64) -> Result<RobustSolution> {
    regular_input(f, eps)?;
    let v = f.values();
    let n = v.len();
    let mut tags = vec![FamilyTag::SellAll];
    for a in 0..n {
        for b in a..n {
            tags.push(FamilyTag::Interval { a, b });
        }
    }
    let scores: Vec<f64> = tags
        .par_iter()
        .map(|tag| {
            let mech = mechanism_for(v, tag);
            parametric_value(v, &mech.payment, f.masses(), eps)
        })
        .collect();
    let best = pick_first_max(&scores);
    let family_tag = tags.swap_remove(best);
    let mechanism = mechanism_for(v, &family_tag);
    let wc = worst_case_revenue(&mechanism, f, eps)?;
    Ok(RobustSolution {
        mechanism,
        value: wc.value,
        worst_distribution: wc.worst,
        certificate: wc.certificate,
        family_tag,
    })
}

fn mechanism_for(values: &[f64], tag: &FamilyTag) -> Mechanism {
    match *tag {
        FamilyTag::SellAll => Mechanism::sell_all(values),
        FamilyTag::Interval { a, b } => {
            Mechanism::from_allocation(values, ramp(values, a, b)).expect("lengths agree")
        }
        FamilyTag::PostedPrice { index } => Mechanism::posted_price(values, values[index]),
        FamilyTag::LogRamp { .. } => unreachable!("not enumerated"),
    }
}

/// Index of the first score within [`TIE_TOLERANCE`] of the maximum.
fn pick_first_max(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] + TIE_TOLERANCE {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterministicPrice {
    pub price: f64,
    pub index: usize,
    pub value: f64,
    pub mechanism: Mechanism,
    pub worst_distribution: DiscreteDistribution,
    pub certificate: DualCertificate,
}

/// Best posted price on the support against the EMD adversary; ties go to
/// the lower price.
pub fn deterministic_robust_price(f: &DiscreteDistribution, eps: f64) -> Result<DeterministicPrice> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("budget must be finite and ≥ 0, got {eps}")));
    }
    let v = f.values();
    let scores: Vec<f64> = (0..v.len())
        .into_par_iter()
        .map(|k| {
            let mech = Mechanism::posted_price(v, v[k]);
            parametric_value(v, &mech.payment, f.masses(), eps)
        })
        .collect();
    let index = pick_first_max(&scores);
    let mechanism = Mechanism::posted_price(v, v[index]);
    let wc = worst_case_revenue(&mechanism, f, eps)?;
    Ok(DeterministicPrice {
        price: v[index],
        index,
        value: wc.value,
        mechanism,
        worst_distribution: wc.worst,
        certificate: wc.certificate,
    })
}
