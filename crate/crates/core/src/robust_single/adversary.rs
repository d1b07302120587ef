use serde::{Deserialize, Serialize};

use super::{check_ic_ir, same_support, DualCertificate, Mechanism};
use crate::distkit::{apply_transfer, DiscreteDistribution, TransferPlan};
use crate::error::{Error, Result};
use crate::lpcore::{solve, LinearProgram, LpStatus, Relation, Sense};

/// Primal/dual agreement required of every certificate.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    /// Revenue of the mechanism on `worst`.
    pub value: f64,
    /// `Σ z_i f_i − λ ε` from the certificate.
    pub dual_value: f64,
    pub worst: DiscreteDistribution,
    pub plan: TransferPlan,
    pub certificate: DualCertificate,
}

/// Minimum revenue of `mech` over the EMD ball of radius `eps` around `f`.
///
/// Solves the transfer program
/// `min −Σ t_i (p_i − p_{i−1})` s.t. `t_i − t_{i+1} ≤ f_i`, `t_n ≤ f_n`,
/// `Σ t_i (v_i − v_{i−1}) ≤ ε`, `t ≥ 0`, reads `λ` off the budget row and
/// checks that the induced certificate reproduces the primal value.
pub fn worst_case_revenue(mech: &Mechanism, f: &DiscreteDistribution, eps: f64) -> Result<WorstCase> {
    check_inputs(mech, f, eps)?;
    let report = check_ic_ir(mech, f.values())?;
    if !report.ok() {
        return Err(Error::NotTruthful(format!(
            "{} violated inequalities, largest {:.3e}",
            report.violations.len(),
            report.worst()
        )));
    }
    let v = f.values();
    let fm = f.masses();
    let n = v.len() - 1;
    if n == 0 {
        let value = mech.payment[0];
        return Ok(WorstCase {
            value,
            dual_value: value,
            worst: f.clone(),
            plan: TransferPlan::zero(1),
            certificate: DualCertificate::for_lambda(mech, 0.0),
        });
    }

    // Values are scaled by v_n so the program is O(1) regardless of currency.
    let scale = v[n];
    let p = &mech.payment;
    let objective = (1..=n).map(|i| -(p[i] - p[i - 1]) / scale).collect();
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for i in 1..=n {
        let mut row = vec![0.0; n];
        row[i - 1] = 1.0;
        if i < n {
            row[i] = -1.0;
        }
        lp.add_constraint(row, Relation::Le, fm[i]);
    }
    let gaps: Vec<f64> = (1..=n).map(|i| (v[i] - v[i - 1]) / scale).collect();
    lp.add_constraint(gaps, Relation::Le, eps / scale);
    let sol = solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!(
            "adversary program returned {:?}",
            sol.status
        )));
    }

    // Remove round-off before applying the plan.
    let mut t: Vec<f64> = sol.primal.iter().map(|x| x.max(0.0)).collect();
    t[n - 1] = t[n - 1].min(fm[n]);
    for i in (1..n).rev() {
        t[i - 1] = t[i - 1].min(t[i] + fm[i]);
    }
    let plan = TransferPlan::new(t);
    let cost = plan.cost(v);
    let plan = if cost > eps && cost > 0.0 {
        TransferPlan::new(plan.t.iter().map(|x| x * eps / cost).collect())
    } else {
        plan
    };
    let worst = apply_transfer(f, &plan)?;
    let value = mech.revenue(&worst)?;

    let lambda = (-sol.dual[n]).max(0.0);
    let certificate = DualCertificate::for_lambda(mech, lambda);
    let dual_value = certificate.value(f, eps);
    if (value - dual_value).abs() > CERTIFICATE_TOLERANCE * value.abs().max(1.0) {
        return Err(Error::CertificateMismatch {
            primal: value,
            dual: dual_value,
        });
    }
    Ok(WorstCase {
        value,
        dual_value,
        worst,
        plan,
        certificate,
    })
}

fn check_inputs(mech: &Mechanism, f: &DiscreteDistribution, eps: f64) -> Result<()> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("budget must be finite and ≥ 0, got {eps}")));
    }
    same_support(&mech.values, f.values())?;
    if mech.payment.len() != f.len() || mech.allocation.len() != f.len() {
        return Err(Error::SupportMismatch(
            "mechanism arrays do not match the support".into(),
        ));
    }
    Ok(())
}

/// Worst-case revenue without the LP: maximises the concave piecewise-linear
/// dual `D(λ) = −λε − Σ f_i β_i(λ)` (with the smallest feasible `β`) by
/// bisection on its slope. Agrees with [`worst_case_revenue`] to round-off;
/// the mechanism is assumed truthful and is not checked.
pub fn worst_case_value(mech: &Mechanism, f: &DiscreteDistribution, eps: f64) -> Result<f64> {
    check_inputs(mech, f, eps)?;
    Ok(parametric_value(f.values(), &mech.payment, f.masses(), eps))
}

pub(crate) fn parametric_value(v: &[f64], p: &[f64], f: &[f64], eps: f64) -> f64 {
    let nominal: f64 = p.iter().zip(f).map(|(a, b)| a * b).sum();
    let n = v.len() - 1;
    if n == 0 {
        return nominal;
    }
    let mut hi: f64 = 0.0;
    for i in 1..=n {
        hi = hi.max((p[i] - p[i - 1]) / (v[i] - v[i - 1]));
    }
    if hi <= 0.0 {
        return nominal;
    }
    let (d0, s0) = dual_at(0.0, v, p, f, eps);
    if s0 <= 0.0 {
        return nominal + d0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dual_at(mid, v, p, f, eps).1 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    nominal + dual_at(lo, v, p, f, eps).0.max(dual_at(hi, v, p, f, eps).0)
}

/// `(D(λ), D′(λ⁺))`.
fn dual_at(lambda: f64, v: &[f64], p: &[f64], f: &[f64], eps: f64) -> (f64, f64) {
    let mut beta = 0.0;
    let mut base = 0.0;
    let mut weighted = 0.0;
    let mut slope = -eps;
    for i in 1..v.len() {
        let cand = beta + (p[i] - p[i - 1]) - lambda * (v[i] - v[i - 1]);
        if cand > 0.0 {
            if beta == 0.0 {
                base = v[i - 1];
            }
            beta = cand;
            weighted += f[i] * beta;
            slope += f[i] * (v[i] - base);
        } else {
            beta = 0.0;
        }
    }
    (-lambda * eps - weighted, slope)
}

/// `min` over the EMD ball of the best single-buyer revenue
/// `max_k v_k · Pr[value ≥ v_k]`, with the minimising distribution.
///
/// By the minimax theorem this equals the max-min revenue over all truthful
/// menus, so it upper-bounds (and at the optimum equals) what any robust
/// mechanism can guarantee. Solved as one LP over the transfer plan and the
/// revenue cap `τ`: `v_k (Pr_F[value ≥ v_k] − t_k) ≤ τ` for every `k`.
pub fn minimax_value(f: &DiscreteDistribution, eps: f64) -> Result<(f64, DiscreteDistribution)> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("budget must be finite and ≥ 0, got {eps}")));
    }
    let v = f.values();
    let fm = f.masses();
    let n = v.len() - 1;
    if n == 0 {
        return Ok((v[0], f.clone()));
    }
    let scale = v[n];
    // variables t_1 … t_n, τ
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for i in 1..=n {
        let mut row = vec![0.0; n + 1];
        row[i - 1] = 1.0;
        if i < n {
            row[i] = -1.0;
        }
        lp.add_constraint(row, Relation::Le, fm[i]);
    }
    let mut gaps: Vec<f64> = (1..=n).map(|i| (v[i] - v[i - 1]) / scale).collect();
    gaps.push(0.0);
    lp.add_constraint(gaps, Relation::Le, eps / scale);
    let mut low = vec![0.0; n + 1];
    low[n] = 1.0;
    lp.add_constraint(low, Relation::Ge, v[0] / scale);
    for k in 1..=n {
        let mut row = vec![0.0; n + 1];
        row[k - 1] = v[k] / scale;
        row[n] = 1.0;
        lp.add_constraint(row, Relation::Ge, v[k] * f.survival(k) / scale);
    }
    let sol = solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!(
            "minimax program returned {:?}",
            sol.status
        )));
    }
    let mut t: Vec<f64> = sol.primal[..n].iter().map(|x| x.max(0.0)).collect();
    t[n - 1] = t[n - 1].min(fm[n]);
    for i in (1..n).rev() {
        t[i - 1] = t[i - 1].min(t[i] + fm[i]);
    }
    let plan = TransferPlan::new(t);
    let cost = plan.cost(v);
    let plan = if cost > eps && cost > 0.0 {
        TransferPlan::new(plan.t.iter().map(|x| x * eps / cost).collect())
    } else {
        plan
    };
    let worst = apply_transfer(f, &plan)?;
    Ok((worst.monopoly().1, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distkit::emd;

    fn dist(v: &[f64], m: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(v.to_vec(), m.to_vec()).unwrap()
    }

    #[test]
    fn zero_budget_is_nominal() {
        let f = dist(&[1.0, 2.0, 4.0], &[0.2, 0.3, 0.5]);
        let m = Mechanism::from_allocation(f.values(), vec![0.0, 0.5, 1.0]).unwrap();
        let wc = worst_case_revenue(&m, &f, 0.0).unwrap();
        let nominal = m.revenue(&f).unwrap();
        assert!((wc.value - nominal).abs() < 1e-12);
        assert_eq!(wc.worst, f);
        assert!((worst_case_value(&m, &f, 0.0).unwrap() - nominal).abs() < 1e-12);
    }

    #[test]
    fn two_point_posted_price() {
        let f = dist(&[1.0, 2.0], &[0.5, 0.5]);
        let m = Mechanism::posted_price(f.values(), 2.0);
        let wc = worst_case_revenue(&m, &f, 0.3).unwrap();
        assert!((wc.value - 0.4).abs() < 1e-12);
        assert!((wc.plan.t[0] - 0.3).abs() < 1e-12);
        assert!((wc.worst.masses()[0] - 0.8).abs() < 1e-12);
        assert!((wc.dual_value - 0.4).abs() < 1e-12);
        assert!((wc.certificate.lambda - 2.0).abs() < 1e-12);
        assert!((worst_case_value(&m, &f, 0.3).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn sell_all_is_budget_proof() {
        let f = dist(&[1.0, 2.0, 3.0], &[0.2, 0.3, 0.5]);
        let m = Mechanism::sell_all(f.values());
        for eps in [0.0, 0.1, 1.0, 10.0] {
            assert!((worst_case_revenue(&m, &f, eps).unwrap().value - 1.0).abs() < 1e-12);
            assert!((worst_case_value(&m, &f, eps).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_untruthful_and_mismatched() {
        let f = dist(&[1.0, 2.0], &[0.5, 0.5]);
        let bad = Mechanism::new(f.values().to_vec(), vec![0.0, 1.0], vec![0.0, 3.0]).unwrap();
        assert!(matches!(
            worst_case_revenue(&bad, &f, 0.1),
            Err(Error::NotTruthful(_))
        ));
        let other = Mechanism::posted_price(&[1.0, 3.0], 3.0);
        assert!(matches!(
            worst_case_revenue(&other, &f, 0.1),
            Err(Error::SupportMismatch(_))
        ));
        let m = Mechanism::posted_price(f.values(), 2.0);
        assert!(matches!(worst_case_revenue(&m, &f, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn single_point_support() {
        let f = DiscreteDistribution::point_mass(3.0).unwrap();
        let m = Mechanism::posted_price(f.values(), 3.0);
        let wc = worst_case_revenue(&m, &f, 1.0).unwrap();
        assert_eq!(wc.value, 3.0);
    }

    #[test]
    fn minimax_two_point() {
        // best reply to (1 − q, q) on {1, 2} earns max(1, 2q); the budget lowers q
        let f = dist(&[1.0, 2.0], &[0.2, 0.8]);
        let (value, g) = minimax_value(&f, 0.1).unwrap();
        assert!((value - 1.4).abs() < 1e-9);
        assert!((g.masses()[1] - 0.7).abs() < 1e-9);
        let (value, _) = minimax_value(&f, 0.5).unwrap();
        assert!((value - 1.0).abs() < 1e-9);
        let (value, _) = minimax_value(&f, 0.0).unwrap();
        assert!((value - 1.6).abs() < 1e-9);
    }

    #[test]
    fn worst_distribution_stays_in_ball() {
        let f = dist(&[0.5, 1.0, 1.5, 2.0, 4.0], &[0.1, 0.2, 0.3, 0.2, 0.2]);
        let m = Mechanism::from_allocation(f.values(), vec![0.0, 0.3, 0.6, 0.8, 1.0]).unwrap();
        for eps in [0.01, 0.1, 0.5, 5.0] {
            let wc = worst_case_revenue(&m, &f, eps).unwrap();
            assert!(emd(&f, &wc.worst).unwrap() <= eps + 1e-9);
            assert!(wc.certificate.residual(&m) <= 1e-9);
            let fast = worst_case_value(&m, &f, eps).unwrap();
            assert!((fast - wc.value).abs() <= 1e-9, "{fast} vs {}", wc.value);
        }
    }
}
