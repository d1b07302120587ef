use super::{inflection, spa_revenue, Cells, SpaInstance, WorstCaseSpaResult};
use crate::distkit::DiscreteDistribution;
use crate::error::Result;

/// Revenue-minimising distribution in the EMD ball for a reserve-free
/// second-price auction.
///
/// The adversary raises the CDF to a constant level `c` on `[k, l)` and
/// leaves it alone elsewhere. For every flat start on the grid the level is
/// pinned by `EMD = eps`; the cheapest start wins (earliest on ties). When the
/// budget exceeds what a full flattening from `v_0` costs, the result is the
/// point mass at `v_0`.
pub fn worst_case_spa(inst: &SpaInstance) -> Result<WorstCaseSpaResult> {
    inst.validate()?;
    let f = &inst.prior;
    let cells = Cells::new(f, inst.m);
    let n = cells.cells();
    if n == 0 || inst.eps == 0.0 {
        return Ok(unchanged(f, inst.m));
    }
    let mut best: Option<(f64, usize, f64, usize)> = None;
    for start in 0..n {
        let (c, end) = cells.level_for(start, n, inst.eps, 1.0);
        let score = cells.psi_sum(0, start) + cells.psi(c) * cells.width(start, end) + cells.psi_sum(end, n);
        if best.is_none_or(|b| score < b.0) {
            best = Some((score, start, c, end));
        }
    }
    let (_, start, c, end) = best.expect("at least one cell");
    build(f, inst.m, start, c, end)
}

/// The flat region starts at the `(m−2)/(m−1)` quantile of the prior (first
/// support point with `F ≥ (m−2)/(m−1)`); the level is pinned by `EMD = eps`.
/// If flattening everything above that point cannot absorb the budget, the
/// start moves left one point at a time.
pub fn flatten_at_quantile(inst: &SpaInstance) -> Result<WorstCaseSpaResult> {
    inst.validate()?;
    let f = &inst.prior;
    let cells = Cells::new(f, inst.m);
    let n = cells.cells();
    if n == 0 || inst.eps == 0.0 {
        return Ok(unchanged(f, inst.m));
    }
    let mut start = cells.first_at_least(0, n - 1, inflection(inst.m));
    loop {
        let (c, end) = cells.level_for(start, n, inst.eps, 1.0);
        if c < 1.0 || start == 0 {
            return build(f, inst.m, start, c, end);
        }
        start -= 1;
    }
}

fn unchanged(f: &DiscreteDistribution, m: usize) -> WorstCaseSpaResult {
    let v0 = f.min_value();
    WorstCaseSpaResult {
        k: v0,
        l: v0,
        flat_level: f.cdf(0),
        reserve_level: f.cdf(0),
        distribution: f.clone(),
        revenue: spa_revenue(f, m).expect("m checked"),
    }
}

fn build(f: &DiscreteDistribution, m: usize, start: usize, c: f64, end: usize) -> Result<WorstCaseSpaResult> {
    let v = f.values();
    let levels: Vec<f64> = f
        .cdf_levels()
        .iter()
        .enumerate()
        .map(|(i, &x)| if i >= start && i < end { c.max(x) } else { x })
        .collect();
    let g = DiscreteDistribution::from_cdf(v.to_vec(), &levels)?;
    let revenue = spa_revenue(&g, m)?;
    Ok(WorstCaseSpaResult {
        k: v[start],
        l: v[end],
        flat_level: if end > start { c } else { f.cdf(start) },
        reserve_level: g.cdf(0),
        distribution: g,
        revenue,
    })
}
