//! `ral`: robust auction toolkit.
//!
//! Exit codes: 0 ok, 1 a `verify` check failed, 2 unparsable input,
//! 3 semantically invalid input, 4 violated precondition, 5 refused as too
//! large.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod verify;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use ral_core::distkit::{self, io};
use ral_core::robust_multi::{
    robust_reserve_fptas, worst_case_spa, worst_case_spa_with_reserve, FptasGrids, SpaInstance,
};
use ral_core::robust_single::{
    solve_robust_irregular, solve_robust_optimal, IntervalSet, IrregularSolution, RobustSolution,
};
use ral_core::{DiscreteDistribution, Error};

#[derive(Parser)]
#[command(
    name = "ral",
    version,
    about = "Revenue-maximising auctions robust to EMD misspecification"
)]
struct Cli {
    /// Seed for every randomised step. Identical seeds and inputs give
    /// byte-identical output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Earth mover's distance between two distribution files.
    Emd { f: PathBuf, g: PathBuf },
    /// Max-min optimal menu for one buyer.
    SolveSingle(SolveSingle),
    /// Robust reserve price for a second-price auction (FPTAS).
    SolveReserve {
        instance: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        eps_prime: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst-case distribution for a second-price auction.
    WorstCaseSpa {
        instance: PathBuf,
        /// Reserve price; without it the auction has none.
        #[arg(long)]
        reserve: Option<f64>,
        /// Accuracy that sets the quantile grid when a reserve is given.
        #[arg(long, default_value_t = 0.05)]
        eps_prime: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the solvers against independent oracles.
    Verify(verify::VerifyArgs),
    /// Write a distribution (or second-price instance) from a generator.
    Gen(Gen),
}

#[derive(Args)]
struct SolveSingle {
    file: PathBuf,
    #[arg(long)]
    eps: f64,
    /// Accept irregular distributions (flattened revenue curve construction).
    #[arg(long)]
    irregular: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV of the revenue curve and its flattened version.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Args)]
struct Gen {
    #[command(subcommand)]
    kind: GenKind,
    /// `.csv` writes CSV, anything else JSON; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Wrap the distribution in a second-price instance with this many buyers.
    #[arg(long, global = true, requires = "spa_eps")]
    spa_m: Option<usize>,
    #[arg(long, global = true)]
    spa_eps: Option<f64>,
    /// Value cap of the instance; defaults to the top of the support.
    #[arg(long, global = true)]
    spa_h: Option<f64>,
}

#[derive(Subcommand)]
enum GenKind {
    /// `F(v) = 1 − 1/v` on a geometric grid over `[1, h]`.
    EqualRevenue {
        #[arg(long)]
        h: f64,
        #[arg(long)]
        n: usize,
        /// Continue the grid below 1 down to this floor with zero-mass
        /// points, plus one at 0.
        #[arg(long)]
        pad_below: Option<f64>,
    },
    /// Equally likely points on `[lo, hi]`.
    Uniform {
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 1.0)]
        hi: f64,
        #[arg(long)]
        n: usize,
    },
    /// `F(v) = ((v − lo)/(hi − lo))^k` discretised on `n` points.
    Power {
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 1.0)]
        hi: f64,
        #[arg(long)]
        n: usize,
    },
    /// Two uniform blocks; `--low a,b --high c,d`.
    Bimodal {
        #[arg(long, value_delimiter = ',')]
        low: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        high: Vec<f64>,
        #[arg(long)]
        weight: f64,
        #[arg(long)]
        n: usize,
    },
    /// Random regular masses on an equally spaced grid (uses `--seed`).
    RandomRegular {
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 1.0)]
        hi: f64,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
pub enum Level {
    Fast,
    Full,
}

/// A message plus the exit code it maps to.
pub struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    pub fn new(code: u8, msg: impl Into<String>) -> Self {
        Self {
            code,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => 2,
            Error::InvalidDistribution(_)
            | Error::SupportMismatch(_)
            | Error::InfeasibleTransfer(_)
            | Error::Index(_)
            | Error::NotTruthful(_)
            | Error::MalformedProgram(_) => 3,
            Error::Domain(_) | Error::Irregular | Error::ZeroMass(_) => 4,
            Error::TooLarge(_) => 5,
            Error::CertificateMismatch { .. } | Error::Solver(_) => 1,
        };
        let msg = match e {
            Error::Irregular => "distribution is not regular (virtual values decrease somewhere); \
                 rerun with --irregular to use the flattened revenue curve construction"
                .to_string(),
            Error::TooLarge(m) => format!("{m}; use --level fast"),
            other => other.to_string(),
        };
        Self { code, msg }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

/// Report written by `solve-single`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleReport {
    pub eps: f64,
    pub lambda: f64,
    pub solution: RobustSolution,
    pub intervals: Option<IntervalSet>,
    pub gamma: Option<f64>,
}

/// Instance file before validation, so that a missing field is a parse
/// error and bad masses are a semantic one.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    prior: RawDistribution,
    m: usize,
    eps: f64,
    #[serde(rename = "H")]
    h: f64,
}

#[derive(Deserialize)]
struct RawDistribution {
    values: Vec<f64>,
    masses: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.code);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("RAL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::new(2, format!("RAL_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::new(1, e.to_string()))
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.cmd {
        Command::Emd { f, g } => {
            let (f, g) = (io::load(&f)?, io::load(&g)?);
            println!("{}", fmt_sig(distkit::emd(&f, &g)?, 12));
            Ok(0)
        }
        Command::SolveSingle(args) => solve_single(args).map(|_| 0),
        Command::SolveReserve {
            instance,
            eps_prime,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let start = Instant::now();
            let sol = robust_reserve_fptas(&inst, eps_prime)?;
            let elapsed = start.elapsed();
            if let Some(path) = &out {
                write_json(path, &sol)?;
            }
            println!("reserve      {}", fmt_sig(sol.reserve, 12));
            println!("value        {}", fmt_sig(sol.value, 12));
            println!(
                "flat [k, l)  [{}, {})",
                fmt_sig(sol.worst.k, 8),
                fmt_sig(sol.worst.l, 8)
            );
            println!("flat level   {}", fmt_sig(sol.worst.flat_level, 12));
            println!("grids        eps1 {} eps2 {}", sol.eps1, sol.eps2);
            // timing goes to stderr so stdout stays reproducible
            eprintln!("runtime      {:.3}s", elapsed.as_secs_f64());
            Ok(0)
        }
        Command::WorstCaseSpa {
            instance,
            reserve,
            eps_prime,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let w = match reserve {
                None => worst_case_spa(&inst)?,
                Some(r) => {
                    let grids = FptasGrids::from_accuracy(eps_prime, inst.m, inst.h)?;
                    worst_case_spa_with_reserve(&inst, r, &grids)?
                }
            };
            if let Some(path) = &out {
                write_json(path, &w)?;
            }
            println!("revenue      {}", fmt_sig(w.revenue, 12));
            println!("flat [k, l)  [{}, {})", fmt_sig(w.k, 8), fmt_sig(w.l, 8));
            println!("flat level   {}", fmt_sig(w.flat_level, 12));
            if reserve.is_some() {
                println!("at reserve   {}", fmt_sig(w.reserve_level, 12));
            }
            Ok(0)
        }
        Command::Verify(args) => verify::run(args, cli.seed),
        Command::Gen(args) => generate(args, cli.seed).map(|_| 0),
    }
}

fn solve_single(args: SolveSingle) -> CliResult<()> {
    let f = io::load(&args.file)?;
    let (sol, irregular) = if args.irregular {
        let out = solve_robust_irregular(&f, args.eps)?;
        (out.solution.clone(), Some(out))
    } else {
        (solve_robust_optimal(&f, args.eps)?, None)
    };
    let report = SingleReport {
        eps: args.eps,
        lambda: sol.certificate.lambda,
        intervals: irregular.as_ref().and_then(|o| o.intervals.clone()),
        gamma: irregular.as_ref().map(|o| o.gamma),
        solution: sol,
    };
    if let Some(path) = &args.out {
        write_json(path, &report)?;
    }
    if let Some(path) = &args.plot_data {
        let curves = match irregular {
            Some(o) => o,
            None => solve_robust_irregular(&f, args.eps)?,
        };
        write_text(path, &plot_csv(&curves))?;
    }
    print_single(&f, &report);
    Ok(())
}

fn print_single(f: &DiscreteDistribution, r: &SingleReport) {
    let sol = &r.solution;
    let x = &sol.mechanism.allocation;
    let sells = x.iter().position(|&xi| xi > 0.0);
    println!(
        "support      {} points on [{}, {}]",
        f.len(),
        fmt_sig(f.min_value(), 6),
        fmt_sig(f.max_value(), 6)
    );
    println!("eps          {}", r.eps);
    println!(
        "family       {}",
        serde_json::to_string(&sol.family_tag).expect("tag serialises")
    );
    println!("value        {}", fmt_sig(sol.value, 12));
    println!("nominal      {}", fmt_sig(f.monopoly().1, 12));
    println!("lambda       {}", fmt_sig(r.lambda, 12));
    if let Some(g) = r.gamma {
        println!("gamma        {}", fmt_sig(g, 12));
    }
    if let Some(i) = sells {
        println!(
            "first sale   v = {} (x = {})",
            fmt_sig(f.values()[i], 8),
            fmt_sig(x[i], 6)
        );
    }
}

/// Columns `q,revenue,flattened` on the union of both curves' breakpoints.
fn plot_csv(o: &IrregularSolution) -> String {
    let mut qs: Vec<f64> = o
        .curve
        .points
        .iter()
        .chain(&o.flattened.points)
        .map(|p| p.0)
        .collect();
    qs.sort_by(f64::total_cmp);
    qs.dedup();
    let mut out = String::from("q,revenue,flattened\n");
    for q in qs {
        out.push_str(&format!(
            "{},{},{}\n",
            io::fmt_sig17(q),
            io::fmt_sig17(o.curve.value_at(q)),
            io::fmt_sig17(o.flattened.value_at(q))
        ));
    }
    out
}

fn load_instance(path: &Path) -> CliResult<SpaInstance> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?;
    let raw: RawInstance =
        serde_json::from_str(&text).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?;
    let prior = DiscreteDistribution::new(raw.prior.values, raw.prior.masses)?;
    Ok(SpaInstance::new(prior, raw.m, raw.eps, raw.h)?)
}

fn generate(args: Gen, seed: u64) -> CliResult<()> {
    let f = match args.kind {
        GenKind::EqualRevenue { h, n, pad_below } => {
            let f = distkit::equal_revenue(h, n)?;
            match pad_below {
                Some(x) => f.pad_below(x)?,
                None => f,
            }
        }
        GenKind::Uniform { lo, hi, n } => distkit::uniform_grid(lo, hi, n)?,
        GenKind::Power { k, lo, hi, n } => distkit::power_grid(k, lo, hi, n)?,
        GenKind::Bimodal { low, high, weight, n } => {
            if low.len() != 2 || high.len() != 2 {
                return Err(Failure::new(
                    2,
                    "--low and --high take two comma-separated values",
                ));
            }
            distkit::bimodal((low[0], low[1]), (high[0], high[1]), weight, n)?
        }
        GenKind::RandomRegular { lo, hi, n } => {
            let support = distkit::uniform_grid(lo, hi, n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            distkit::random_regular(support.values(), &mut rng)?
        }
    };
    let body = match (args.spa_m, args.spa_eps) {
        (Some(m), Some(eps)) => {
            let h = args.spa_h.unwrap_or(f.max_value());
            let inst = SpaInstance::new(f, m, eps, h)?;
            to_json(&inst)
        }
        _ => match &args.out {
            Some(path) if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => {
                io::to_csv_string(&f)
            }
            _ => io::to_json_string(&f) + "\n",
        },
    };
    match &args.out {
        Some(path) => write_text(path, &body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

pub fn to_json<T: Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("report serialises") + "\n"
}

pub fn write_json<T: Serialize>(path: &Path, x: &T) -> CliResult<()> {
    write_text(path, &to_json(x))
}

fn write_text(path: &Path, body: &str) -> CliResult<()> {
    fs::write(path, body).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))
}

/// `digits` significant digits in positional notation where that stays
/// readable, scientific otherwise.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = digits as i32 - 1 - mag;
    if (-6..=15).contains(&mag) && decimals >= 0 {
        format!("{x:.*}", decimals as usize)
    } else {
        format!("{x:.*e}", digits - 1)
    }
}
