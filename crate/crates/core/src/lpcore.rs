//! Small dense two-phase simplex with dual multipliers.
//!
//! Problems here are tiny (a few hundred variables at most), so the solver
//! keeps a full dense tableau. Entering variables follow Dantzig's rule until
//! a run of degenerate pivots is seen, after which Bland's rule takes over for
//! the rest of the solve; the pivot sequence is deterministic either way.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const OPT_TOL: f64 = 1e-10;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// New program with every variable bounded to `[0, +∞)`.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs = dot(&c.coeffs, x);
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &xj) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - xj).max(xj - self.upper[j]);
        }
        worst
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::MalformedProgram("bound vectors have wrong length".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::MalformedProgram(format!(
                    "row {i} has {} coefficients, objective has {n}",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(Error::MalformedProgram(format!("row {i} is not finite")));
            }
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j]
                || self.lower[j] == f64::INFINITY
                || self.upper[j] == f64::NEG_INFINITY
            {
                return Err(Error::MalformedProgram(format!("bad bounds on variable {j}")));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedProgram("objective is not finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// One multiplier per constraint. For a maximisation, `≤` rows carry
    /// non-negative multipliers; for a minimisation, `≥` rows do.
    pub dual: Vec<f64>,
    /// `c − Aᵀy`.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    /// Dual objective `bᵀy` plus the bound terms priced by the reduced costs.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        let mut value: f64 = lp
            .constraints
            .iter()
            .zip(&self.dual)
            .map(|(c, y)| c.rhs * y)
            .sum();
        let at_lower = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        for (j, &rc) in self.reduced_costs.iter().enumerate() {
            if rc == 0.0 {
                continue;
            }
            let bound = if at_lower * rc > 0.0 {
                lp.lower[j]
            } else {
                lp.upper[j]
            };
            if bound.is_finite() {
                value += rc * bound;
            }
        }
        value
    }

    /// Largest sign violation of the dual multipliers and reduced costs.
    pub fn dual_residual(&self, lp: &LinearProgram) -> f64 {
        let flip = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut worst: f64 = 0.0;
        for (c, &y) in lp.constraints.iter().zip(&self.dual) {
            let y = flip * y;
            worst = worst.max(match c.relation {
                Relation::Le => y,
                Relation::Ge => -y,
                Relation::Eq => 0.0,
            });
        }
        for (j, &rc) in self.reduced_costs.iter().enumerate() {
            let rc = flip * rc;
            if rc > 0.0 && lp.lower[j] == f64::NEG_INFINITY {
                worst = worst.max(rc);
            }
            if rc < 0.0 && lp.upper[j] == f64::INFINITY {
                worst = worst.max(-rc);
            }
        }
        worst
    }
}

/// How a user variable is expressed through tableau columns.
struct VarMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    rc: Vec<f64>,
    allowed: Vec<bool>,
    bland: bool,
    degenerate_run: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = 1.0 / self.rows[r][c];
        for a in self.rows[r].iter_mut() {
            *a *= inv;
        }
        self.rhs[r] *= inv;
        self.rows[r][c] = 1.0;
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r];
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor != 0.0 {
                for (a, p) in row.iter_mut().zip(&pivot_row) {
                    *a -= factor * p;
                }
                row[c] = 0.0;
                self.rhs[i] -= factor * pivot_rhs;
                if self.rhs[i].abs() < 1e-14 {
                    self.rhs[i] = self.rhs[i].max(0.0);
                }
            }
        }
        let factor = self.rc[c];
        if factor != 0.0 {
            for (a, p) in self.rc.iter_mut().zip(&pivot_row) {
                *a -= factor * p;
            }
            self.rc[c] = 0.0;
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    fn price(&mut self, costs: &[f64]) {
        self.rc = costs.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = costs[b];
            if cb != 0.0 {
                for (r, a) in self.rc.iter_mut().zip(row) {
                    *r -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            self.rc[b] = 0.0;
        }
    }

    fn entering(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (j, &r) in self.rc.iter().enumerate() {
            if !self.allowed[j] || r >= -OPT_TOL {
                continue;
            }
            if self.bland {
                return Some(j);
            }
            if best.is_none_or(|(_, b)| r < b) {
                best = Some((j, r));
            }
        }
        best.map(|(j, _)| j)
    }

    fn leaving(&self, c: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let a = row[c];
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs[i].max(0.0) / a;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let tie = (ratio - br).abs() <= 1e-12 * br.abs().max(1.0);
                    if (tie && self.basis[i] < self.basis[bi]) || (!tie && ratio < br) {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self) -> Result<Outcome> {
        let limit = 50 * (self.rows.len() + self.rc.len()) + 1000;
        for _ in 0..limit {
            let Some(c) = self.entering() else {
                return Ok(Outcome::Optimal);
            };
            let Some(r) = self.leaving(c) else {
                return Ok(Outcome::Unbounded);
            };
            if self.rhs[r] <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run >= DEGENERATE_RUN {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(r, c);
        }
        Err(Error::Solver("simplex iteration limit reached".into()))
    }
}

/// Solves the program; statuses other than `Optimal` carry empty vectors.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();

    // Column substitution for bounds.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo.is_finite() {
            maps.push(VarMap {
                offset: lo,
                cols: vec![(ncols, 1.0)],
            });
            if hi.is_finite() {
                bound_rows.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap {
                offset: hi,
                cols: vec![(ncols, -1.0)],
            });
            ncols += 1;
        } else {
            maps.push(VarMap {
                offset: 0.0,
                cols: vec![(ncols, 1.0), (ncols + 1, -1.0)],
            });
            ncols += 2;
        }
    }

    // Rows over structural columns, normalised to non-negative rhs.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut a = vec![0.0; ncols];
        let mut rhs = c.rhs;
        for (j, map) in maps.iter().enumerate() {
            let coef = c.coeffs[j];
            if coef == 0.0 {
                continue;
            }
            rhs -= coef * map.offset;
            for &(col, s) in &map.cols {
                a[col] += coef * s;
            }
        }
        rows.push((a, c.relation, rhs));
    }
    for &(col, width) in &bound_rows {
        let mut a = vec![0.0; ncols];
        a[col] = 1.0;
        rows.push((a, Relation::Le, width));
    }
    let mut flipped = vec![false; rows.len()];
    for (k, (a, rel, rhs)) in rows.iter_mut().enumerate() {
        if *rhs < 0.0 {
            flipped[k] = true;
            *rhs = -*rhs;
            for x in a.iter_mut() {
                *x = -*x;
            }
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // Slack / surplus / artificial columns.
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let width = ncols + n_slack + n_art;
    let art_start = ncols + n_slack;
    let mut tab_rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut id_col = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (ncols, art_start);
    for (a, rel, b) in rows {
        let mut row = a;
        row.resize(width, 0.0);
        match rel {
            Relation::Le => {
                row[next_slack] = 1.0;
                basis.push(next_slack);
                id_col.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                basis.push(next_art);
                id_col.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = 1.0;
                basis.push(next_art);
                id_col.push(next_art);
                next_art += 1;
            }
        }
        tab_rows.push(row);
        rhs.push(b);
    }

    let mut tab = Tableau {
        rows: tab_rows,
        rhs,
        basis,
        rc: vec![0.0; width],
        allowed: vec![true; width],
        bland: false,
        degenerate_run: 0,
    };

    let infeasible = || LpSolution {
        status: LpStatus::Infeasible,
        primal: Vec::new(),
        dual: Vec::new(),
        reduced_costs: Vec::new(),
        objective: f64::NAN,
    };

    if n_art > 0 {
        let mut costs = vec![0.0; width];
        for c in costs.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        tab.price(&costs);
        tab.run()?;
        let infeas: f64 = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .filter(|(&b, _)| b >= art_start)
            .map(|(_, &x)| x)
            .sum();
        let scale = tab.rhs.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        if infeas > 1e-9 * scale {
            return Ok(infeasible());
        }
        for r in 0..m {
            if tab.basis[r] >= art_start {
                if let Some(c) = (0..art_start).find(|&c| tab.rows[r][c].abs() > 1e-9) {
                    tab.pivot(r, c);
                }
            }
        }
        for a in tab.allowed.iter_mut().skip(art_start) {
            *a = false;
        }
        tab.bland = false;
        tab.degenerate_run = 0;
    }

    let flip = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut costs = vec![0.0; width];
    for (j, map) in maps.iter().enumerate() {
        for &(col, s) in &map.cols {
            costs[col] = flip * lp.objective[j] * s;
        }
    }
    tab.price(&costs);
    if let Outcome::Unbounded = tab.run()? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            primal: Vec::new(),
            dual: Vec::new(),
            reduced_costs: Vec::new(),
            objective: flip * f64::NEG_INFINITY,
        });
    }

    let mut col_value = vec![0.0; width];
    for (r, &b) in tab.basis.iter().enumerate() {
        col_value[b] = tab.rhs[r].max(0.0);
    }
    let primal: Vec<f64> = maps
        .iter()
        .map(|map| map.offset + map.cols.iter().map(|&(c, s)| s * col_value[c]).sum::<f64>())
        .collect();

    let dual: Vec<f64> = (0..lp.constraints.len())
        .map(|k| {
            let y = -tab.rc[id_col[k]];
            let y = if flipped[k] { -y } else { y };
            flip * y
        })
        .collect();
    let reduced_costs = (0..n)
        .map(|j| {
            lp.objective[j]
                - lp.constraints
                    .iter()
                    .zip(&dual)
                    .map(|(c, y)| c.coeffs[j] * y)
                    .sum::<f64>()
        })
        .collect();

    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: lp.objective_value(&primal),
        primal,
        dual,
        reduced_costs,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
