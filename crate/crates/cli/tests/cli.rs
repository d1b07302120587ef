use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ral_core::distkit::{equal_revenue, io, uniform_grid};
use ral_core::robust_multi::{
    robust_reserve_fptas, worst_case_spa, ReserveSolution, SpaInstance, WorstCaseSpaResult,
};
use ral_core::robust_single::{solve_robust_optimal, FamilyTag, IntervalSet, RobustSolution};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tempfile::TempDir;

/// Field-for-field mirror of the `solve-single` report.
#[derive(Serialize, Deserialize)]
struct Report {
    eps: f64,
    lambda: f64,
    solution: RobustSolution,
    intervals: Option<IntervalSet>,
    gamma: Option<f64>,
}

fn ral(args: &[&str]) -> Output {
    ral_env(args, None)
}

fn ral_env(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ral"));
    cmd.args(args).env_remove("RAL_THREADS");
    if let Some(t) = threads {
        cmd.env("RAL_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn data(name: &str) -> String {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name);
    root.to_str().unwrap().to_string()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = path(dir, name);
    fs::write(&p, body).unwrap();
    p
}

fn field(line_prefix: &str, text: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(line_prefix))
        .unwrap_or_else(|| panic!("no `{line_prefix}` line in\n{text}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn emd_examples_and_errors() {
    let out = ral(&["emd", &data("emd_f.json"), &data("emd_g.json")]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "1.50000000000");

    let out = ral(&["emd", &data("emd_f.json"), &data("emd_f.json")]);
    assert_eq!(stdout(&out).trim().parse::<f64>().unwrap(), 0.0);

    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{\"values\": [1, 2");
    assert_eq!(code(&ral(&["emd", s(&bad), &data("emd_f.json")])), 2);
    assert_eq!(
        code(&ral(&["emd", &data("two_point.json"), &data("emd_f.json")])),
        3
    );
    let masses = write(&dir, "m.json", r#"{"values":[1,2],"masses":[0.5,0.7]}"#);
    assert_eq!(code(&ral(&["emd", s(&masses), &data("two_point.json")])), 3);
}

#[test]
fn solve_single_equal_revenue() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "report.json");
    let out = ral(&[
        "solve-single",
        &data("equal_revenue_h100_padded.json"),
        "--eps",
        "0.1",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    let value = report["solution"]["value"].as_f64().unwrap();
    let target = 1.0 - 0.1 / 100f64.ln();
    assert!((0.95..=1.0).contains(&value));
    assert!((value - target).abs() <= 0.02 * target);
    assert!((field("value", &stdout(&out)) - value).abs() < 1e-11);
}

#[test]
fn solve_single_report_round_trips() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "report.json");
    let out = ral(&[
        "solve-single",
        &data("small.csv"),
        "--eps",
        "0.2",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&out_path).unwrap();
    let report: Report = serde_json::from_str(&text).unwrap();

    let f = io::load(Path::new(&data("small.csv"))).unwrap();
    assert_eq!(report.solution, solve_robust_optimal(&f, 0.2).unwrap());
    assert_eq!(report.lambda, report.solution.certificate.lambda);
    assert!(report.eps == 0.2 && report.intervals.is_none() && report.gamma.is_none());
    // re-emitting gives the same bytes
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again, text);
}

#[test]
fn zero_budget_posts_a_price() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "report.json");
    let out = ral(&[
        "solve-single",
        &data("small.csv"),
        "--eps",
        "0",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    let sol: RobustSolution = serde_json::from_value(report["solution"].clone()).unwrap();
    assert!(
        sol.mechanism.allocation.iter().all(|&x| x == 0.0 || x == 1.0),
        "{:?}",
        sol.family_tag
    );
}

#[test]
fn irregular_needs_the_flag() {
    let out = ral(&["solve-single", &data("bimodal.csv"), "--eps", "0.005"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--irregular"));

    let dir = TempDir::new().unwrap();
    let (rep, plot) = (path(&dir, "r.json"), path(&dir, "p.csv"));
    let out = ral(&[
        "solve-single",
        &data("bimodal.csv"),
        "--eps",
        "0.005",
        "--irregular",
        "--out",
        s(&rep),
        "--plot-data",
        s(&plot),
    ]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    let tag: FamilyTag = serde_json::from_value(report["solution"]["family_tag"].clone()).unwrap();
    assert_eq!(tag, FamilyTag::LogRamp { s: 2 });
    assert_eq!(report["intervals"]["intervals"].as_array().unwrap().len(), 2);

    let csv = fs::read_to_string(&plot).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("q,revenue,flattened"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(rows.windows(2).all(|w| w[1][0] >= w[0][0]));
    let gamma = report["gamma"].as_f64().unwrap();
    assert!(rows.iter().all(|r| r[2] <= r[1] + 1e-12 && r[2] <= gamma + 1e-12));
}

#[test]
fn solve_reserve_examples() {
    let dir = TempDir::new().unwrap();
    let zero = path(&dir, "zero.json");
    let big = path(&dir, "big.json");
    for (p, eps) in [(&zero, "0"), (&big, "0.1")] {
        let out = ral(&[
            "gen",
            "uniform",
            "--n",
            "101",
            "--spa-m",
            "2",
            "--spa-eps",
            eps,
            "--out",
            s(p),
        ]);
        assert_eq!(code(&out), 0);
    }
    let run = |inst: &Path| {
        let out_path = inst.with_extension("out.json");
        let out = ral(&[
            "solve-reserve",
            s(inst),
            "--eps-prime",
            "0.05",
            "--out",
            s(&out_path),
        ]);
        assert_eq!(code(&out), 0);
        let sol: ReserveSolution = serde_json::from_str(&fs::read_to_string(out_path).unwrap()).unwrap();
        sol
    };
    let (a, b) = (run(&zero), run(&big));
    assert!((a.reserve - 0.5).abs() <= a.eps1 + 1e-12, "reserve {}", a.reserve);
    assert!(b.reserve < a.reserve && b.value < a.value);

    // the file is exactly what the library computes
    let inst = SpaInstance::new(uniform_grid(0.0, 1.0, 101).unwrap(), 2, 0.1, 1.0).unwrap();
    assert_eq!(b, robust_reserve_fptas(&inst, 0.05).unwrap());
}

#[test]
fn solve_reserve_errors() {
    let dir = TempDir::new().unwrap();
    let one = write(
        &dir,
        "one.json",
        r#"{"prior":{"values":[0,1],"masses":[0.5,0.5]},"m":1,"eps":0.1,"H":1}"#,
    );
    assert_eq!(code(&ral(&["solve-reserve", s(&one)])), 4);
    let missing = write(
        &dir,
        "missing.json",
        r#"{"prior":{"values":[0,1],"masses":[0.5,0.5]},"eps":0.1,"H":1}"#,
    );
    assert_eq!(code(&ral(&["solve-reserve", s(&missing)])), 2);
    let above = write(
        &dir,
        "above.json",
        r#"{"prior":{"values":[0,2],"masses":[0.5,0.5]},"m":2,"eps":0.1,"H":1}"#,
    );
    assert_eq!(code(&ral(&["solve-reserve", s(&above)])), 3);
    assert_eq!(
        code(&ral(&[
            "solve-reserve",
            &data("uniform_m3.json"),
            "--eps-prime",
            "0"
        ])),
        4
    );
}

#[test]
fn worst_case_spa_matches_library() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "w.json");
    let out = ral(&["worst-case-spa", &data("uniform_m3.json"), "--out", s(&out_path)]);
    assert_eq!(code(&out), 0);
    let got: WorstCaseSpaResult = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    let inst = SpaInstance::new(uniform_grid(0.0, 1.0, 101).unwrap(), 3, 0.02, 1.0).unwrap();
    assert_eq!(got, worst_case_spa(&inst).unwrap());

    let out = ral(&["worst-case-spa", &data("uniform_m3.json"), "--reserve", "0.3"]);
    assert_eq!(code(&out), 0);
    assert!(
        field("revenue", &stdout(&out))
            <= field(
                "revenue",
                &stdout(&ral(&["worst-case-spa", &data("uniform_m3.json")]))
            ) + 0.3
    );
    assert_eq!(
        code(&ral(&[
            "worst-case-spa",
            &data("uniform_m3.json"),
            "--reserve",
            "2"
        ])),
        4
    );
}

#[test]
fn verify_shipped_files() {
    for (file, eps) in [
        ("two_point.json", "0.1"),
        ("small.csv", "0.2"),
        ("bimodal.csv", "0.005"),
        ("equal_revenue_h100_padded.json", "0.1"),
    ] {
        let out = ral(&["verify", &data(file), "--eps", eps, "--samples", "200"]);
        assert_eq!(code(&out), 0, "{file}\n{}", stdout(&out));
        assert!(!stdout(&out).contains("FAIL"));
    }
}

#[test]
fn verify_full_level() {
    let out = ral(&["verify", &data("small.csv"), "--eps", "0.2", "--level", "full"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out)
        .lines()
        .any(|l| l.starts_with("brute_maxmin agreement") && l.contains("PASS")));

    let out = ral(&[
        "verify",
        &data("equal_revenue_h100.json"),
        "--eps",
        "0.1",
        "--level",
        "full",
    ]);
    assert_eq!(code(&out), 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--level fast"));
}

#[test]
fn verify_reports_corrupted_mechanism() {
    let dir = TempDir::new().unwrap();
    let rep = path(&dir, "r.json");
    assert_eq!(
        code(&ral(&[
            "solve-single",
            &data("small.csv"),
            "--eps",
            "0.2",
            "--out",
            s(&rep)
        ])),
        0
    );
    let mut report: Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();

    let out = ral(&[
        "verify",
        &data("small.csv"),
        "--eps",
        "0.2",
        "--mechanism",
        s(&rep),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let p = report["solution"]["mechanism"]["payment"][2].as_f64().unwrap();
    report["solution"]["mechanism"]["payment"][2] = (p + 0.3).into();
    let bad = write(&dir, "bad.json", &report.to_string());
    let out = ral(&[
        "verify",
        &data("small.csv"),
        "--eps",
        "0.2",
        "--mechanism",
        s(&bad),
    ]);
    assert_eq!(code(&out), 1);
    let line = stdout(&out)
        .lines()
        .find(|l| l.starts_with("supplied mechanism IC/IR"))
        .unwrap()
        .to_string();
    assert!(line.contains("FAIL") && line.contains("\"ic\""), "{line}");
}

#[test]
fn gen_outputs() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "er.csv");
    assert_eq!(
        code(&ral(&[
            "gen",
            "equal-revenue",
            "--h",
            "10",
            "--n",
            "20",
            "--out",
            s(&csv)
        ])),
        0
    );
    let f = io::load(&csv).unwrap();
    let expect = equal_revenue(10.0, 20).unwrap();
    assert_eq!(f.values(), expect.values());
    for (a, b) in f.masses().iter().zip(expect.masses()) {
        assert!((a - b).abs() < 1e-16);
    }

    let json = stdout(&ral(&["gen", "uniform", "--n", "5"]));
    let f = io::from_json_str(&json).unwrap();
    assert_eq!(f, uniform_grid(0.0, 1.0, 5).unwrap());

    let padded = stdout(&ral(&[
        "gen",
        "equal-revenue",
        "--h",
        "10",
        "--n",
        "5",
        "--pad-below",
        "0.5",
    ]));
    let f = io::from_json_str(&padded).unwrap();
    let pad = f.len() - 5;
    assert!(pad >= 2 && f.values()[0] == 0.0 && f.values()[1] >= 0.5);
    assert!(f.masses()[..pad].iter().all(|&m| m == 0.0));

    assert_eq!(code(&ral(&["gen", "equal-revenue", "--h", "0.5", "--n", "5"])), 4);
    assert_eq!(
        code(&ral(&[
            "gen", "bimodal", "--low", "1", "--high", "4,5", "--weight", "0.3", "--n", "50"
        ])),
        2
    );
}

#[test]
fn seeds_control_randomness() {
    let gen = |seed: &str| stdout(&ral(&["gen", "random-regular", "--n", "12", "--seed", seed]));
    assert_eq!(gen("7"), gen("7"));
    assert_ne!(gen("7"), gen("8"));
    let f = io::from_json_str(&gen("7")).unwrap();
    assert!(ral_core::distkit::is_regular(&f));
}

/// Every command, run twice with the same seed, writes identical bytes.
#[test]
fn outputs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let runs: Vec<Vec<String>> = vec![
        vec!["emd".into(), data("emd_f.json"), data("emd_g.json")],
        vec![
            "solve-single".into(),
            data("small.csv"),
            "--eps".into(),
            "0.2".into(),
            "--out".into(),
            "{out}".into(),
            "--plot-data".into(),
            "{aux}".into(),
        ],
        vec![
            "solve-reserve".into(),
            data("uniform_m3.json"),
            "--out".into(),
            "{out}".into(),
        ],
        vec![
            "worst-case-spa".into(),
            data("uniform_m3.json"),
            "--reserve".into(),
            "0.3".into(),
            "--out".into(),
            "{out}".into(),
        ],
        vec![
            "verify".into(),
            data("small.csv"),
            "--eps".into(),
            "0.2".into(),
            "--samples".into(),
            "300".into(),
        ],
        vec![
            "gen".into(),
            "random-regular".into(),
            "--n".into(),
            "9".into(),
            "--out".into(),
            "{out}".into(),
        ],
    ];
    for args in runs {
        let mut seen = Vec::new();
        for (k, threads) in [None, Some("1"), None].into_iter().enumerate() {
            let out_path = path(&dir, &format!("out{k}"));
            let aux_path = path(&dir, &format!("aux{k}"));
            let args: Vec<String> = args
                .iter()
                .map(|a| a.replace("{out}", s(&out_path)).replace("{aux}", s(&aux_path)))
                .chain(["--seed".to_string(), "5".to_string()])
                .collect();
            let refs: Vec<&str> = args.iter().map(String::as_str).collect();
            let out = ral_env(&refs, threads);
            assert_eq!(code(&out), 0, "{args:?}");
            let read = |p: &Path| fs::read(p).unwrap_or_default();
            seen.push((out.stdout, read(&out_path), read(&aux_path)));
        }
        assert!(
            seen.windows(2).all(|w| w[0] == w[1]),
            "{} differs between runs",
            args[0]
        );
    }
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = ral_env(&["emd", &data("emd_f.json"), &data("emd_g.json")], Some("zero"));
    assert_eq!(code(&out), 2);
}
