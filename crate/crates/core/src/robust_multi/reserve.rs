use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{spa_reserve_revenue, Cells, SpaInstance, WorstCaseSpaResult};
use crate::distkit::DiscreteDistribution;
use crate::error::{Error, Result};

/// Reserve grid `{i·eps1 : 0 ≤ i ≤ ⌊H/eps1⌋}` and quantile grid with step
/// `eps2/(m²H)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FptasGrids {
    pub eps1: f64,
    pub eps2: f64,
    pub reserve_grid: Vec<f64>,
    pub quantile_step: f64,
}

impl FptasGrids {
    pub fn new(eps1: f64, eps2: f64, m: usize, h: f64) -> Result<Self> {
        if !(eps1 > 0.0 && eps2 > 0.0) || !eps1.is_finite() || !eps2.is_finite() {
            return Err(Error::Domain(format!(
                "grid steps must be > 0, got {eps1} and {eps2}"
            )));
        }
        if !(h > 0.0) || !h.is_finite() || m < 2 {
            return Err(Error::Domain(format!(
                "need H > 0 and m ≥ 2, got H = {h}, m = {m}"
            )));
        }
        let count = (h / eps1 * (1.0 + 1e-12)).floor() as usize;
        let reserve_grid = (0..=count).map(|i| (i as f64 * eps1).min(h)).collect();
        let quantile_step = (eps2 / ((m * m) as f64 * h)).min(1.0);
        Ok(Self {
            eps1,
            eps2,
            reserve_grid,
            quantile_step,
        })
    }

    /// `eps1 = eps2 = eps_prime / 2`.
    pub fn from_accuracy(eps_prime: f64, m: usize, h: f64) -> Result<Self> {
        Self::new(eps_prime / 2.0, eps_prime / 2.0, m, h)
    }

    /// Grid CDF levels `0, δ, 2δ, …, 1`.
    pub fn quantile_levels(&self) -> Vec<f64> {
        let cells = (1.0 / self.quantile_step - 1e-9).ceil() as usize;
        (0..=cells)
            .map(|j| (j as f64 * self.quantile_step).min(1.0))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReserveSolution {
    pub reserve: f64,
    /// Worst-case revenue at `reserve`.
    pub value: f64,
    pub worst: WorstCaseSpaResult,
    pub eps1: f64,
    pub eps2: f64,
}

struct Shape {
    start: usize,
    level: f64,
    end: usize,
    lift: f64,
}

/// Worst-case distribution for a second-price auction with reserve `r`.
///
/// Candidates keep `G = F` below `r`, raise it to `max(F, ρ)` between `r`
/// and the flat start `k`, hold it at `c ≥ ρ` on `[k, l)` and return to `F`
/// from `l`. Flat starts and levels run over the quantile grid with `ρ`
/// pinned by the remaining budget; every support point is also tried as a
/// flat start with the whole budget on the flat part. The reserve is
/// inserted into the support as a zero-mass point when it is not already
/// there, and the returned distribution lives on that support.
pub fn worst_case_spa_with_reserve(
    inst: &SpaInstance,
    r: f64,
    grids: &FptasGrids,
) -> Result<WorstCaseSpaResult> {
    inst.validate()?;
    if !(r >= 0.0 && r <= inst.h) {
        return Err(Error::Domain(format!(
            "reserve must lie in [0, {}], got {r}",
            inst.h
        )));
    }
    let (f, at) = inst.prior.with_point(r);
    let cells = Cells::new(&f, inst.m);
    let n = cells.cells();
    let eps = inst.eps;
    if eps == 0.0 || at >= n {
        let plain = Shape {
            start: at,
            level: f.cdf(at),
            end: at,
            lift: f.cdf(at),
        };
        return build(&f, inst.m, r, at, &plain);
    }
    let slack = 1e-12 * eps.max(1.0);
    let m = inst.m as i32;

    let eval = |start: usize, c: f64| -> Option<(f64, Shape)> {
        let (end, flat) = cells.flat_cost(start, c);
        if flat > eps + slack {
            return None;
        }
        let (lift, upto) = cells.level_for(at, start, (eps - flat).max(0.0), c);
        let g_at = if at < start {
            lift
        } else if end > start {
            c
        } else {
            cells.level(at)
        };
        let value = r * (1.0 - g_at.powi(m))
            + cells.psi(lift) * cells.width(at, upto)
            + cells.psi_sum(upto, start)
            + cells.psi(c) * cells.width(start, end)
            + cells.psi_sum(end, n);
        Some((
            value,
            Shape {
                start,
                level: c,
                end,
                lift,
            },
        ))
    };

    let mut best: Option<(f64, Shape)> = None;
    let mut offer = |cand: Option<(f64, Shape)>| {
        if let Some((value, shape)) = cand {
            if best.as_ref().is_none_or(|b| value < b.0) {
                best = Some((value, shape));
            }
        }
    };

    let levels = grids.quantile_levels();
    let mut starts: Vec<usize> = levels.iter().map(|&q| cells.first_at_least(at, n, q)).collect();
    starts.dedup();
    for &start in &starts {
        let base = cells.level(start);
        offer(eval(start, base));
        let first = levels.partition_point(|&q| q <= base);
        for &c in &levels[first..] {
            let cand = eval(start, c);
            if cand.is_none() {
                break;
            }
            offer(cand);
        }
    }
    for start in at..=n {
        let (c, _) = cells.level_for(start, n, eps, 1.0);
        offer(eval(start, c));
    }

    let (_, shape) = best.expect("the unlifted shape is always feasible");
    build(&f, inst.m, r, at, &shape)
}

fn build(f: &DiscreteDistribution, m: usize, r: f64, at: usize, s: &Shape) -> Result<WorstCaseSpaResult> {
    let v = f.values();
    let levels: Vec<f64> = f
        .cdf_levels()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if i >= at && i < s.start {
                x.max(s.lift)
            } else if i >= s.start && i < s.end {
                x.max(s.level)
            } else {
                x
            }
        })
        .collect();
    let g = DiscreteDistribution::from_cdf(v.to_vec(), &levels)?;
    let revenue = spa_reserve_revenue(&g, m, r)?;
    Ok(WorstCaseSpaResult {
        k: v[s.start],
        l: v[s.end],
        flat_level: if s.end > s.start { s.level } else { f.cdf(s.start) },
        reserve_level: g.cdf(at),
        distribution: g,
        revenue,
    })
}

/// Reserve on the `eps1` grid maximising the worst-case revenue, with
/// `eps1 = eps2 = eps_prime / 2`. Reserves are evaluated in parallel; ties go
/// to the smaller reserve.
pub fn robust_reserve_fptas(inst: &SpaInstance, eps_prime: f64) -> Result<ReserveSolution> {
    inst.validate()?;
    if !(eps_prime > 0.0) || !eps_prime.is_finite() {
        return Err(Error::Domain(format!(
            "accuracy must be finite and > 0, got {eps_prime}"
        )));
    }
    let grids = FptasGrids::from_accuracy(eps_prime, inst.m, inst.h)?;
    let results = grids
        .reserve_grid
        .par_iter()
        .map(|&r| worst_case_spa_with_reserve(inst, r, &grids))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, w) in results.iter().enumerate() {
        if w.revenue > results[best].revenue {
            best = i;
        }
    }
    let reserve = grids.reserve_grid[best];
    let worst = results.into_iter().nth(best).expect("index in range");
    Ok(ReserveSolution {
        reserve,
        value: worst.revenue,
        worst,
        eps1: grids.eps1,
        eps2: grids.eps2,
    })
}
