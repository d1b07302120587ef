//! Brute-force references for the solvers.
//!
//! Nothing here calls into `lpcore`, `robust_single` or `robust_multi`; the
//! oracles read raw values and masses and recompute everything themselves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distkit::{DiscreteDistribution, TransferPlan};
use crate::error::{Error, Result};

/// Largest support handled by [`brute_adversary`].
pub const MAX_ADVERSARY_POINTS: usize = 7;
/// Largest support handled by [`brute_maxmin`].
pub const MAX_MAXMIN_POINTS: usize = 5;

pub const DEFAULT_ALLOC_STEP: f64 = 0.05;

/// Default transfer step, `eps/50` in cost units.
pub fn default_transfer_step(eps: f64) -> f64 {
    (eps / 50.0).max(1e-12)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteWorst {
    pub value: f64,
    pub worst: DiscreteDistribution,
    pub plan: Vec<f64>,
}

/// Lowest revenue of the menu with payments `payment` over downward transfer
/// plans whose per-coordinate cost is a multiple of `step` (or exactly uses
/// up the mass or budget available there).
pub fn brute_adversary(payment: &[f64], f: &DiscreteDistribution, eps: f64, step: f64) -> Result<BruteWorst> {
    let v = f.values();
    if v.len() > MAX_ADVERSARY_POINTS {
        return Err(Error::TooLarge(format!(
            "{} support points, brute force handles at most {MAX_ADVERSARY_POINTS}",
            v.len()
        )));
    }
    if payment.len() != v.len() {
        return Err(Error::SupportMismatch(format!(
            "{} payments for {} support points",
            payment.len(),
            v.len()
        )));
    }
    if !(step > 0.0) || !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!(
            "need step > 0 and eps ≥ 0, got {step}, {eps}"
        )));
    }
    let search = Search::new(payment, f.masses(), v, eps, step);
    let (gain, plan) = search.run(f64::INFINITY);
    let nominal: f64 = payment.iter().zip(f.masses()).map(|(p, m)| p * m).sum();
    let mut masses = f.masses().to_vec();
    for i in 1..v.len() {
        masses[i] -= plan[i - 1];
        masses[i - 1] += plan[i - 1];
    }
    let masses = masses.into_iter().map(|m| m.max(0.0)).collect();
    Ok(BruteWorst {
        value: nominal - gain,
        worst: DiscreteDistribution::new(v.to_vec(), masses)?,
        plan,
    })
}

/// Depth-first search over `t_n, t_{n−1}, …, t_1`, maximising the revenue
/// drop `Σ t_i (p_i − p_{i−1})`.
struct Search<'a> {
    drop: Vec<f64>,
    gap: Vec<f64>,
    mass: &'a [f64],
    eps: f64,
    step: f64,
    /// `max_{j ≤ i} drop_j / gap_j`, bounds what the remaining budget can buy.
    best_rate: Vec<f64>,
}

impl<'a> Search<'a> {
    fn new(p: &[f64], mass: &'a [f64], v: &[f64], eps: f64, step: f64) -> Self {
        let n = v.len();
        let drop: Vec<f64> = (1..n).map(|i| p[i] - p[i - 1]).collect();
        let gap: Vec<f64> = (1..n).map(|i| v[i] - v[i - 1]).collect();
        let mut best_rate = Vec::with_capacity(drop.len());
        let mut acc: f64 = 0.0;
        for (d, g) in drop.iter().zip(&gap) {
            acc = acc.max(d / g);
            best_rate.push(acc);
        }
        Self {
            drop,
            gap,
            mass,
            eps,
            step,
            best_rate,
        }
    }

    /// Returns the largest drop found and its plan. Stops early once a drop
    /// of at least `enough` is reached.
    fn run(&self, enough: f64) -> (f64, Vec<f64>) {
        let k = self.drop.len();
        let mut plan = vec![0.0; k];
        let mut best = (0.0, vec![0.0; k]);
        if k > 0 {
            self.descend(k, 0.0, self.eps, 0.0, &mut plan, &mut best, enough);
        }
        best
    }

    /// Chooses `t_pos` (1-based) given `carry = t_{pos+1}`.
    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        pos: usize,
        carry: f64,
        budget: f64,
        gained: f64,
        plan: &mut Vec<f64>,
        best: &mut (f64, Vec<f64>),
        enough: f64,
    ) -> bool {
        if pos == 0 {
            if gained > best.0 {
                *best = (gained, plan.clone());
            }
            return best.0 >= enough;
        }
        let i = pos - 1;
        if gained + budget * self.best_rate[i].max(0.0) <= best.0 + 1e-15 {
            return false;
        }
        let gap = self.gap[i];
        let available = self.mass[pos] + carry;
        let top = available.min(budget / gap);
        let mut options = vec![top];
        let mut k = (top * gap / self.step).floor();
        while k >= 0.0 {
            let t = k * self.step / gap;
            if t < top {
                options.push(t);
            }
            k -= 1.0;
        }
        for t in options {
            plan[i] = t;
            let spent = (budget - t * gap).max(0.0);
            if self.descend(pos - 1, t, spent, gained + t * self.drop[i], plan, best, enough) {
                return true;
            }
        }
        plan[i] = 0.0;
        false
    }
}

/// Best worst-case revenue over monotone allocations on the `alloc_step`
/// lattice with payments `p_i = Σ_{j ≤ i} (x_j − x_{j−1}) v_j`, each scored
/// by [`brute_adversary`] at `transfer_step`.
pub fn brute_maxmin(f: &DiscreteDistribution, eps: f64, alloc_step: f64, transfer_step: f64) -> Result<f64> {
    let v = f.values();
    if v.len() > MAX_MAXMIN_POINTS {
        return Err(Error::TooLarge(format!(
            "{} support points, brute force handles at most {MAX_MAXMIN_POINTS}",
            v.len()
        )));
    }
    if !(alloc_step > 0.0 && alloc_step <= 1.0) || !(transfer_step > 0.0) {
        return Err(Error::Domain("lattice steps must be positive".into()));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("budget must be finite and ≥ 0, got {eps}")));
    }
    let levels = (1.0 / alloc_step).round() as usize;
    let mut menus: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut x = vec![0usize; v.len()];
    lattice(&mut x, 0, 0, levels, &mut |x| {
        let p = myerson_payments(v, x, levels);
        let nominal = p.iter().zip(f.masses()).map(|(a, b)| a * b).sum();
        menus.push((nominal, p));
    });
    menus.sort_by(|a, b| b.0.total_cmp(&a.0));

    let masses = f.masses();
    let mut best = f64::NEG_INFINITY;
    let mut killers: Vec<Vec<f64>> = Vec::new();
    for (nominal, p) in &menus {
        if *nominal <= best {
            break;
        }
        let drop_of = |t: &[f64]| -> f64 { t.iter().enumerate().map(|(i, ti)| ti * (p[i + 1] - p[i])).sum() };
        if killers.iter().any(|t| nominal - drop_of(t) <= best) {
            continue;
        }
        let search = Search::new(p, masses, v, eps, transfer_step);
        let (drop, plan) = search.run(nominal - best);
        let value = nominal - drop;
        if value > best {
            best = value;
        }
        killers.push(plan);
    }
    Ok(best)
}

fn lattice(x: &mut Vec<usize>, pos: usize, lo: usize, levels: usize, visit: &mut impl FnMut(&[usize])) {
    if pos == x.len() {
        visit(x);
        return;
    }
    for k in lo..=levels {
        x[pos] = k;
        lattice(x, pos + 1, k, levels, visit);
    }
}

fn myerson_payments(v: &[f64], x: &[usize], levels: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    let mut prev = 0usize;
    for (vi, &xi) in v.iter().zip(x) {
        acc += (xi - prev) as f64 / levels as f64 * vi;
        prev = xi;
        out.push(acc);
    }
    out
}

/// Simulated second-price revenue with reserve `r` (a bid must be strictly
/// above `r` to win; the winner pays `max(second bid, r)`). Returns the
/// sample mean and its standard error.
pub fn monte_carlo_spa(
    f: &DiscreteDistribution,
    m: usize,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples < 10_000 {
        return Err(Error::Domain(format!(
            "need at least 10000 samples, got {samples}"
        )));
    }
    if m < 2 {
        return Err(Error::Domain(format!("need m ≥ 2, got {m}")));
    }
    let v = f.values();
    let mut cum = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    for &p in f.masses() {
        acc += p;
        cum.push(acc);
    }
    let total = acc;
    let draw = |rng: &mut ChaCha8Rng| {
        let u = (1.0 - rng.gen::<f64>()) * total;
        let i = cum.partition_point(|&c| c < u).min(v.len() - 1);
        v[i]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..samples {
        let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for _ in 0..m {
            let b = draw(&mut rng);
            if b > first {
                second = first;
                first = b;
            } else if b > second {
                second = b;
            }
        }
        let pay = if first > r { second.max(r) } else { 0.0 };
        sum += pay;
        sq += pay * pay;
    }
    let k = samples as f64;
    let mean = sum / k;
    let var = ((sq / k - mean * mean) * k / (k - 1.0)).max(0.0);
    Ok((mean, (var / k).sqrt()))
}

/// Random feasible downward transfer plan with cost at most `eps`.
///
/// Each coordinate keeps a uniform fraction of what it could move (about a
/// third are zeroed), then the plan is scaled to fit the budget. With
/// `saturate`, the plan is scaled up toward the budget as far as the mass
/// constraints allow.
pub fn random_downward_transfer<R: Rng + ?Sized>(
    f: &DiscreteDistribution,
    eps: f64,
    saturate: bool,
    rng: &mut R,
) -> TransferPlan {
    let v = f.values();
    let mass = f.masses();
    let n = v.len();
    if n < 2 {
        return TransferPlan::new(Vec::new());
    }
    let mut t = vec![0.0; n - 1];
    let mut carry = 0.0;
    for i in (1..n).rev() {
        let u: f64 = if rng.gen_bool(1.0 / 3.0) { 0.0 } else { rng.gen() };
        t[i - 1] = u * (mass[i] + carry);
        carry = t[i - 1];
    }
    let cost: f64 = t.iter().enumerate().map(|(i, x)| x * (v[i + 1] - v[i])).sum();
    if cost > 0.0 {
        // A common factor s keeps s·t_i ≤ s·t_{i+1} + f_i while s ≤ room.
        let mut room = f64::INFINITY;
        for i in 1..n {
            let above = if i + 1 < n { t[i] } else { 0.0 };
            let rise = t[i - 1] - above;
            if rise > 0.0 {
                room = room.min(mass[i] / rise);
            }
        }
        let s = (eps / cost).min(if saturate { room } else { 1.0 });
        for x in t.iter_mut() {
            *x *= s * (1.0 - 1e-12);
        }
    }
    TransferPlan::new(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteReserve {
    pub reserve: f64,
    pub value: f64,
}

/// Grid search for the robust second-price reserve.
///
/// For each reserve `r = i·reserve_step` in `[0, h]`, the adversary's CDF
/// is `F` below `r`, `max(F, ρ)` from `r` to a flat start `k`, `max(F, c)`
/// from `k` on, with `k` ranging over every support point, `c` over multiples
/// of `level_step`, and `ρ ≤ c` spending the leftover budget. Also tries `c`
/// spending the whole budget. Returns the best reserve (smallest on ties).
pub fn brute_reserve_spa(
    f: &DiscreteDistribution,
    m: usize,
    eps: f64,
    h: f64,
    reserve_step: f64,
    level_step: f64,
) -> Result<BruteReserve> {
    if m < 2 || !(reserve_step > 0.0) || !(level_step > 0.0) || !(eps >= 0.0) || !(h > 0.0) {
        return Err(Error::Domain(
            "need m ≥ 2, positive steps, eps ≥ 0 and H > 0".into(),
        ));
    }
    let count = (h / reserve_step * (1.0 + 1e-12)).floor() as usize;
    let reserves: Vec<f64> = (0..=count).map(|i| (i as f64 * reserve_step).min(h)).collect();
    let values: Vec<f64> = reserves
        .par_iter()
        .map(|&r| reserve_worst(f, m, eps, r, level_step))
        .collect();
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] > values[best] {
            best = i;
        }
    }
    Ok(BruteReserve {
        reserve: reserves[best],
        value: values[best],
    })
}

fn second_survival(x: f64, m: usize) -> f64 {
    // Pr[at least two of m draws exceed the level] by the binomial sum.
    let s = 1.0 - x;
    let mut total = 0.0;
    let mut binom = 1.0;
    for k in 0..=m {
        if k >= 2 {
            total += binom * s.powi(k as i32) * x.powi((m - k) as i32);
        }
        binom = binom * (m - k) as f64 / (k + 1) as f64;
    }
    total
}

fn reserve_worst(f: &DiscreteDistribution, m: usize, eps: f64, r: f64, level_step: f64) -> f64 {
    // Support with r added, CDF on each cell [w_i, w_{i+1}).
    let mut w: Vec<f64> = Vec::with_capacity(f.len() + 1);
    let mut cdf: Vec<f64> = Vec::with_capacity(f.len() + 1);
    let mut acc = 0.0;
    let mut inserted = false;
    for (&x, &p) in f.values().iter().zip(f.masses()) {
        if !inserted && r < x {
            w.push(r);
            cdf.push(acc);
            inserted = true;
        }
        if x == r {
            inserted = true;
        }
        acc += p;
        w.push(x);
        cdf.push(acc);
    }
    if !inserted {
        w.push(r);
        cdf.push(acc);
    }
    let last = cdf.len() - 1;
    cdf[last] = 1.0;
    let at = w.iter().position(|&x| x == r).expect("r inserted");
    let n = w.len() - 1;

    // Prefix sums over cells: width, width·F, width·ψ(F).
    let mut sw = vec![0.0; n + 1];
    let mut sf = vec![0.0; n + 1];
    let mut sp = vec![0.0; n + 1];
    for i in 0..n {
        let d = w[i + 1] - w[i];
        sw[i + 1] = sw[i] + d;
        sf[i + 1] = sf[i] + d * cdf[i];
        sp[i + 1] = sp[i] + d * second_survival(cdf[i], m);
    }
    // Cells in [a, b) below `level`: [a, first(a, b, level)).
    let first = |a: usize, b: usize, level: f64| a + cdf[a..b].partition_point(|&x| x < level);
    let lift = |a: usize, b: usize, level: f64| -> f64 {
        let e = first(a, b, level);
        level * (sw[e] - sw[a]) - (sf[e] - sf[a])
    };
    // Level ≤ cap on cells [a, b) costing `budget`: the first cell whose own
    // level already costs that much bounds the lifted run.
    let pin = |a: usize, b: usize, budget: f64, cap: f64| -> f64 {
        if a >= b || lift(a, b, cap) <= budget {
            return if a >= b { cap } else { cap.max(cdf[a]) };
        }
        let cost_at = |e: usize| cdf[e] * (sw[e] - sw[a]) - (sf[e] - sf[a]);
        let (mut lo, mut hi) = (a + 1, b);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if cost_at(mid) >= budget {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        ((budget + sf[lo] - sf[a]) / (sw[lo] - sw[a])).min(cap)
    };
    let revenue = |rho: f64, k: usize, c: f64| -> f64 {
        let e1 = first(at, k, rho);
        let e2 = first(k, n, c);
        let g_at = if at < k {
            cdf[at].max(rho)
        } else if at < n {
            cdf[at].max(c)
        } else {
            cdf[at]
        };
        r * (1.0 - g_at.powi(m as i32))
            + second_survival(rho, m) * (sw[e1] - sw[at])
            + (sp[k] - sp[e1])
            + second_survival(c, m) * (sw[e2] - sw[k])
            + (sp[n] - sp[e2])
    };

    let mut best = revenue(0.0, n, 0.0);
    if eps == 0.0 || at >= n {
        return best;
    }
    let steps = (1.0 / level_step).ceil() as usize;
    for k in at..=n {
        let mut levels: Vec<f64> = vec![cdf[k]];
        levels.extend(
            (0..=steps)
                .map(|j| (j as f64 * level_step).min(1.0))
                .filter(|&c| c > cdf[k]),
        );
        levels.push(pin(k, n, eps, 1.0));
        for c in levels {
            let flat = lift(k, n, c);
            if flat > eps + 1e-12 {
                continue;
            }
            let rho = pin(at, k, eps - flat, c);
            let value = revenue(rho, k, c);
            if value < best {
                best = value;
            }
        }
    }
    best
}
