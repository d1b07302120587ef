use rand::Rng;

use super::DiscreteDistribution;
use crate::error::{Error, Result};

/// Equal-revenue distribution `F(v) = 1 − 1/v` on a geometric grid of `n`
/// points over `[1, h]`, with the tail mass `1/h` placed as an atom at `h`.
///
/// Every grid price earns revenue exactly 1.
pub fn equal_revenue(h: f64, n: usize) -> Result<DiscreteDistribution> {
    if !(h > 1.0) || !h.is_finite() {
        return Err(Error::Domain(format!("equal-revenue needs h > 1, got {h}")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("equal-revenue needs n ≥ 2, got {n}")));
    }
    let values: Vec<f64> = (0..n)
        .map(|i| {
            if i == n - 1 {
                h
            } else {
                h.powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect();
    let masses = (0..n)
        .map(|i| {
            if i == n - 1 {
                1.0 / h
            } else {
                1.0 / values[i] - 1.0 / values[i + 1]
            }
        })
        .collect();
    DiscreteDistribution::new(values, masses)
}

/// `n` equally spaced, equally likely points on `[lo, hi]` (endpoints included).
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Result<DiscreteDistribution> {
    if n == 0 || !(hi >= lo) || lo < 0.0 {
        return Err(Error::Domain(format!(
            "uniform grid needs 0 ≤ lo ≤ hi and n ≥ 1, got [{lo}, {hi}], n={n}"
        )));
    }
    if n == 1 || hi == lo {
        return DiscreteDistribution::point_mass(lo);
    }
    let values = grid(lo, hi, n);
    DiscreteDistribution::new(values, vec![1.0 / n as f64; n])
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Discretises a continuous CDF onto `n` equally spaced points of `[lo, hi]`.
///
/// Each point receives the mass of the cell between the midpoints around it;
/// anything `cdf` leaves above `hi` becomes an atom at `hi`.
pub fn discretize<F: Fn(f64) -> f64>(cdf: F, lo: f64, hi: f64, n: usize) -> Result<DiscreteDistribution> {
    if n < 2 || !(hi > lo) || lo < 0.0 {
        return Err(Error::Domain(format!(
            "discretize needs 0 ≤ lo < hi and n ≥ 2, got [{lo}, {hi}], n={n}"
        )));
    }
    let values = grid(lo, hi, n);
    let mut masses = Vec::with_capacity(n);
    let mut prev = 0.0;
    for i in 0..n {
        let level = if i == n - 1 {
            1.0
        } else {
            cdf(0.5 * (values[i] + values[i + 1])).clamp(0.0, 1.0).max(prev)
        };
        masses.push(level - prev);
        prev = level;
    }
    DiscreteDistribution::new(values, masses)
}

/// Discretised power law `F(v) = ((v − lo)/(hi − lo))^k`; regular for `k ≥ 1`.
pub fn power_grid(k: f64, lo: f64, hi: f64, n: usize) -> Result<DiscreteDistribution> {
    discretize(|v| ((v - lo) / (hi - lo)).clamp(0.0, 1.0).powf(k), lo, hi, n)
}

/// Two-block mixture: weight `w_high` uniform on `high`, the rest uniform on
/// `low`, discretised on `n` points of `[low.0, high.1]`. Produces a
/// two-humped revenue curve when the blocks are well separated.
pub fn bimodal(low: (f64, f64), high: (f64, f64), w_high: f64, n: usize) -> Result<DiscreteDistribution> {
    if !(low.0 < low.1 && low.1 <= high.0 && high.0 < high.1) || !(0.0..=1.0).contains(&w_high) {
        return Err(Error::Domain("bimodal needs ordered, disjoint blocks".into()));
    }
    let block = |v: f64, (a, b): (f64, f64)| ((v - a) / (b - a)).clamp(0.0, 1.0);
    discretize(
        |v| (1.0 - w_high) * block(v, low) + w_high * block(v, high),
        low.0,
        high.1,
        n,
    )
}

/// Random regular distribution on the given support.
///
/// Virtual values are drawn first (non-decreasing, `φ_i < v_i`, `φ_n = v_n`)
/// and the masses are solved backwards from
/// `f_i = (v_{i+1} − v_i) · Pr[value > v_i] / (v_i − φ_i)`, so the result is
/// regular by construction.
pub fn random_regular<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> Result<DiscreteDistribution> {
    let n = values.len();
    if n == 0 {
        return Err(Error::Domain("empty support".into()));
    }
    if n == 1 {
        return DiscreteDistribution::point_mass(values[0]);
    }
    let top = values[n - 1];
    let mut phi = vec![0.0; n];
    phi[0] = values[0] - rng.gen_range(0.05..1.0) * top;
    for i in 1..n - 1 {
        phi[i] = phi[i - 1] + rng.gen_range(0.0..0.9) * (values[i] - phi[i - 1]);
    }
    phi[n - 1] = top;

    let mut masses = vec![0.0; n];
    masses[n - 1] = 1.0;
    let mut tail = 1.0;
    // The recursion grows geometrically on fine grids. Rescaling by a power
    // of two is exact, so coarse grids are unaffected.
    let shrink = 2f64.powi(-512);
    for i in (0..n - 1).rev() {
        masses[i] = (values[i + 1] - values[i]) * tail / (values[i] - phi[i]);
        tail += masses[i];
        if tail > 2f64.powi(512) {
            masses[i..].iter_mut().for_each(|m| *m *= shrink);
            tail *= shrink;
        }
    }
    let masses = masses.into_iter().map(|m| m / tail).collect();
    let f = DiscreteDistribution::new(values.to_vec(), masses)?;
    Ok(f)
}
