use std::fs;
use std::path::PathBuf;

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ral_core::distkit::{apply_transfer, emd, io, is_regular};
use ral_core::oracles::{
    brute_adversary, brute_maxmin, default_transfer_step, random_downward_transfer, DEFAULT_ALLOC_STEP,
    MAX_MAXMIN_POINTS,
};
use ral_core::robust_single::{
    check_ic_ir, deterministic_robust_price, minimax_value, solve_robust_irregular, solve_robust_optimal,
    worst_case_revenue, Mechanism, RobustSolution,
};
use ral_core::{DiscreteDistribution, Error};

use crate::{fmt_sig, CliResult, Failure, Level};

#[derive(Args)]
pub struct VerifyArgs {
    file: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_enum, default_value = "fast")]
    level: Level,
    /// Also check a mechanism file (`{"values","allocation","payment"}` or a
    /// `solve-single` report).
    #[arg(long)]
    mechanism: Option<PathBuf>,
    /// Random perturbations tried against the solver's mechanism.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

struct Row {
    name: String,
    residual: f64,
    tolerance: f64,
    note: String,
}

impl Row {
    fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual: residual.max(0.0),
            tolerance,
            note: String::new(),
        }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    fn pass(&self) -> bool {
        self.residual <= self.tolerance
    }
}

pub fn run(args: VerifyArgs, seed: u64) -> CliResult<u8> {
    let f = io::load(&args.file)?;
    if !(args.eps >= 0.0) || !args.eps.is_finite() {
        return Err(Failure::new(
            4,
            format!("eps must be finite and ≥ 0, got {}", args.eps),
        ));
    }
    if args.level == Level::Full && f.len() > MAX_MAXMIN_POINTS {
        return Err(Error::TooLarge(format!(
            "{} support points; the full level enumerates menus on at most {MAX_MAXMIN_POINTS}",
            f.len()
        ))
        .into());
    }
    let supplied = args.mechanism.as_ref().map(load_mechanism).transpose()?;

    let regular = is_regular(&f);
    let solve = |eps: f64| -> CliResult<RobustSolution> {
        Ok(if regular {
            solve_robust_optimal(&f, eps)?
        } else {
            solve_robust_irregular(&f, eps)?.solution
        })
    };
    let sol = solve(args.eps)?;
    let mut rows = solver_rows(&f, args.eps, &sol, regular, args.samples, seed)?;

    let half = solve(args.eps / 2.0)?.value;
    let double = solve(args.eps * 2.0)?.value;
    rows.push(
        Row::new(
            "value non-increasing in eps",
            (sol.value - half).max(0.0).max(double - sol.value),
            1e-9,
        )
        .note(format!(
            "{} ≥ {} ≥ {}",
            fmt_sig(half, 8),
            fmt_sig(sol.value, 8),
            fmt_sig(double, 8)
        )),
    );

    if regular {
        let det = deterministic_robust_price(&f, args.eps)?;
        rows.push(
            Row::new("posted price ≤ optimal menu", det.value - sol.value, 1e-7).note(format!(
                "price {} earns {}",
                fmt_sig(det.price, 8),
                fmt_sig(det.value, 8)
            )),
        );
    }

    if args.level == Level::Full {
        rows.extend(full_rows(&f, args.eps, &sol, regular)?);
    }

    if let Some(m) = &supplied {
        rows.extend(mechanism_rows(m, &f, args.eps)?);
    }

    print_table(&f, args.eps, regular, &rows);
    Ok(if rows.iter().all(Row::pass) { 0 } else { 1 })
}

fn solver_rows(
    f: &DiscreteDistribution,
    eps: f64,
    sol: &RobustSolution,
    regular: bool,
    samples: usize,
    seed: u64,
) -> CliResult<Vec<Row>> {
    let v = f.values();
    let mech = &sol.mechanism;
    let cert = &sol.certificate;
    let mut rows = Vec::new();

    let solver = if regular { "optimal" } else { "irregular" };
    rows.push(Row::new(
        format!("{solver} menu IC/IR"),
        check_ic_ir(mech, v)?.worst(),
        0.0,
    ));
    rows.push(Row::new("certificate feasible", cert.residual(mech), 1e-9));

    let primal = mech.revenue(&sol.worst_distribution)?;
    let dual = cert.value(f, eps);
    rows.push(
        Row::new("primal = dual", (primal - dual).abs(), 1e-7)
            .note(format!("primal {}", fmt_sig(primal, 10))),
    );

    let dips = cert.z.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    rows.push(Row::new("z non-decreasing", dips, 1e-12));

    let rebuilt = cert.payment_mechanism(v, mech.allocation[0]);
    rows.push(Row::new(
        "z is an IC/IR payment rule",
        check_ic_ir(&rebuilt, v)?.worst(),
        0.0,
    ));

    let d = emd(f, &sol.worst_distribution)?;
    rows.push(
        Row::new("worst case inside the ball", (d - eps).max(0.0), 1e-9)
            .note(format!("emd {}", fmt_sig(d, 8))),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lowest = f64::INFINITY;
    for i in 0..samples {
        let plan = random_downward_transfer(f, eps, i % 2 == 0, &mut rng);
        lowest = lowest.min(mech.revenue(&apply_transfer(f, &plan)?)?);
    }
    if samples > 0 {
        rows.push(
            Row::new(
                format!("{samples} random perturbations"),
                (sol.value - lowest).max(0.0),
                1e-9,
            )
            .note(format!("lowest {}", fmt_sig(lowest, 8))),
        );
    }
    Ok(rows)
}

fn full_rows(f: &DiscreteDistribution, eps: f64, sol: &RobustSolution, regular: bool) -> CliResult<Vec<Row>> {
    let mut rows = Vec::new();
    let step = if eps > 0.0 {
        default_transfer_step(eps)
    } else {
        0.01
    };

    let brute = brute_adversary(&sol.mechanism.payment, f, eps, step)?;
    let spread = sol.mechanism.payment.last().unwrap() - sol.mechanism.payment[0];
    let gap = brute.value - sol.value;
    let residual = (-gap).max(gap - 5.0 * step * spread.max(1.0)).max(0.0);
    rows.push(
        Row::new("brute-force adversary agreement", residual, 1e-9)
            .note(format!("brute {}", fmt_sig(brute.value, 8))),
    );

    let grid = brute_maxmin(f, eps, DEFAULT_ALLOC_STEP, step)?;
    // The menu lattice bounds the optimum from below up to its resolution,
    // so only the optimal solver is held to two-sided agreement.
    let residual = if regular {
        (sol.value - grid).abs()
    } else {
        (sol.value - grid).max(0.0)
    };
    rows.push(
        Row::new("brute_maxmin agreement", residual, 2e-2).note(format!("lattice {}", fmt_sig(grid, 8))),
    );

    if regular {
        let (minimax, _) = minimax_value(f, eps)?;
        rows.push(
            Row::new("saddle value", (minimax - sol.value).abs(), 1e-6)
                .note(format!("min-max {}", fmt_sig(minimax, 10))),
        );
    }
    Ok(rows)
}

fn mechanism_rows(m: &Mechanism, f: &DiscreteDistribution, eps: f64) -> CliResult<Vec<Row>> {
    if m.values != f.values() {
        return Err(
            Error::SupportMismatch("mechanism values differ from the distribution's support".into()).into(),
        );
    }
    let report = check_ic_ir(m, f.values())?;
    let note = match report.violations.first() {
        None => String::new(),
        Some(v) => format!(
            "{} violation(s), first {}",
            report.violations.len(),
            serde_json::to_string(v).expect("violation serialises")
        ),
    };
    let mut rows = vec![Row::new("supplied mechanism IC/IR", report.worst(), 0.0).note(note)];
    if report.ok() {
        let wc = worst_case_revenue(m, f, eps)?;
        rows.push(
            Row::new(
                "supplied mechanism primal = dual",
                (wc.value - wc.dual_value).abs(),
                1e-7,
            )
            .note(format!("worst case {}", fmt_sig(wc.value, 10))),
        );
    }
    Ok(rows)
}

fn load_mechanism(path: &PathBuf) -> CliResult<Mechanism> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?;
    let raw: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?;
    let body = raw.pointer("/solution/mechanism").unwrap_or(&raw).clone();
    let m: Mechanism =
        serde_json::from_value(body).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?;
    Ok(Mechanism::new(m.values, m.allocation, m.payment)?)
}

fn print_table(f: &DiscreteDistribution, eps: f64, regular: bool, rows: &[Row]) {
    println!(
        "{} support points, eps {eps}, {}",
        f.len(),
        if regular { "regular" } else { "irregular" }
    );
    println!("{:<34} {:>10} {:>8}  result", "check", "residual", "tol");
    for r in rows {
        let verdict = if r.pass() { "PASS" } else { "FAIL" };
        let line = format!(
            "{:<34} {:>10.2e} {:>8.0e}  {verdict}",
            r.name, r.residual, r.tolerance
        );
        if r.note.is_empty() {
            println!("{line}");
        } else {
            println!("{line}  {}", r.note);
        }
    }
    let failed = rows.iter().filter(|r| !r.pass()).count();
    println!("{} of {} checks passed", rows.len() - failed, rows.len());
}
