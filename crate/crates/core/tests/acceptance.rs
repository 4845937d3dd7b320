//! Acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so every line is printed on every run;
//! the process exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use popmaxent::analysis::{analyze_record, AnalysisOptions};
use popmaxent::cli::{run_from_args, AnalysisDocument};
use popmaxent::game_model::{mixed_nash, treatment_catalog};
use popmaxent::lattice::{self, degeneracy, mean_observation, tally, MeanObservation};
use popmaxent::maxent::{binomial_prediction, ect_bound, empirical_entropy, DualSolver};
use popmaxent::reproduce;
use popmaxent::rng::Xoshiro256;
use popmaxent::session_io::SessionIdentity;
use popmaxent::simulator::{run_ensemble, run_session, PolicySpec};
use popmaxent::stats::{chi_square_gof, chi_square_quantile, one_sample_t_test};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ect_values() -> Outcome {
    let targets = [(2400, 0.0071), (1200, 0.0141), (200, 0.0848)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (m, target) in targets {
        let v = ect_bound(m, 22, 0.95).unwrap();
        ok &= (v - target).abs() <= 0.0005;
        parts.push(format!("M={m}: {v:.7}"));
    }
    outcome(ok, parts.join(", "))
}

fn chi_quantile() -> Outcome {
    let v = chi_square_quantile(22.0, 0.95).unwrap();
    outcome((v - 33.92).abs() <= 0.01, format!("chi2_22(0.95) = {v:.6}"))
}

fn entropy_bound_random_sessions() -> Outcome {
    let cat = treatment_catalog();
    let mut rng = Xoshiro256::seed_from_u64(2031);
    let mut worst = f64::NEG_INFINITY;
    let sessions = 1000;
    for s in 0..sessions {
        let t = &cat[rng.below(cat.len() as u64) as usize];
        let mix = (rng.next_f64(), rng.next_f64());
        let rounds = 50 + rng.below(2400 - 50 + 1) as u32;
        let rec = run_session(t, &PolicySpec::IidMixed { mix: Some(mix) }, rounds, s).unwrap();
        let observed = tally(&rec.rounds, 4).unwrap();
        let s_t = binomial_prediction(mean_observation(&observed), 4).s_t;
        worst = worst.max(empirical_entropy(&observed) - s_t);
    }
    outcome(
        worst <= 1e-12,
        format!("{sessions} sessions, max(S_e - S_t) = {worst:.3e}"),
    )
}

fn dual_matches_closed_form() -> Outcome {
    let mut rng = Xoshiro256::seed_from_u64(99);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mean = MeanObservation::new(0.01 + 0.98 * rng.next_f64(), 0.01 + 0.98 * rng.next_f64())
            .unwrap();
        // Cold start, so the solver cannot begin at the closed-form answer.
        let dual = DualSolver {
            start: Some((0.0, 0.0)),
            ..DualSolver::default()
        }
        .solve(mean, 4)
        .unwrap()
        .densities;
        let closed = binomial_prediction(mean, 4);
        worst = worst.max(dual.sup_distance(&closed.densities).unwrap());
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-8 && elapsed < 1.0,
        format!("100 means, sup gap {worst:.2e}, {elapsed:.3} s"),
    )
}

fn nash_sessions(
    sessions: u32,
    rounds: u32,
    seed: u64,
) -> Vec<popmaxent::simulator::SessionRecord> {
    let cat = treatment_catalog();
    (0..sessions)
        .map(|s| {
            run_session(
                &cat[s as usize % cat.len()],
                &PolicySpec::NASH,
                rounds,
                seed + s as u64,
            )
            .unwrap()
        })
        .collect()
}

fn identity(k: usize) -> SessionIdentity {
    SessionIdentity {
        treatment_id: 0,
        group_id: k as u32 + 1,
        source: format!("acceptance-{k}"),
    }
}

fn ect_coverage() -> Outcome {
    let recs = nash_sessions(100, 2400, 5_000);
    let opts = AnalysisOptions::default();
    let covered = recs
        .iter()
        .enumerate()
        .filter(|(k, r)| {
            analyze_record(r, identity(*k), &opts)
                .unwrap()
                .entropy
                .within_bound
        })
        .count();
    let frac = covered as f64 / 100.0;
    outcome(frac >= 0.85, format!("coverage {covered}/100 = {frac:.2}"))
}

fn chi_square_calibration() -> Outcome {
    let recs = nash_sessions(200, 2400, 9_000);
    let exceed = recs
        .iter()
        .filter(|r| {
            let observed = tally(&r.rounds, 4).unwrap();
            let pred = binomial_prediction(mean_observation(&observed), 4);
            chi_square_gof(&observed, &pred).unwrap().exceeds
        })
        .count();
    let frac = exceed as f64 / 200.0;
    outcome(
        (0.01..=0.15).contains(&frac),
        format!("exceedance {exceed}/200 = {frac:.3}"),
    )
}

fn deviation_scale() -> Outcome {
    let run = reproduce::run(&treatment_catalog(), 20_260_101).unwrap();
    let d = run.summary.total.d_te.expect("108 groups");
    let ok = run.summary.groups.len() == 108 && d.mean > 0.0 && d.mean < 0.02;
    outcome(
        ok,
        format!(
            "{} groups, Total D_te = {:.4} (SE {:.4})",
            run.summary.groups.len(),
            d.mean,
            d.std_error
        ),
    )
}

/// Rationality used for the engineered non-Maxent sessions.
const DETECTOR_LAMBDA: f64 = 5.0;

fn detector_sanity() -> Outcome {
    let cat = treatment_catalog();
    let policy = PolicySpec::LogitResponse {
        lambda: DETECTOR_LAMBDA,
        initial: (0.5, 0.5),
    };
    let recs: Vec<_> = (0..50u32)
        .map(|g| {
            run_session(
                &cat[g as usize % cat.len()],
                &policy,
                200,
                40_000 + g as u64,
            )
            .unwrap()
        })
        .collect();
    let opts = AnalysisOptions::default();
    let reports: Vec<_> = recs
        .iter()
        .enumerate()
        .map(|(k, r)| analyze_record(r, identity(k), &opts).unwrap())
        .collect();
    let exceed = reports.iter().filter(|r| r.chi_square.exceeds).count();
    let zs: Vec<f64> = reports.iter().map(|r| r.deviation.z).collect();
    let t = one_sample_t_test(&zs, 0.0).unwrap();
    let rate = exceed as f64 / 50.0;
    outcome(
        rate >= 0.5 && t.p_value < 0.01,
        format!(
            "lambda {DETECTOR_LAMBDA}: exceedance {rate:.2}, Z mean {:.4}, p = {:.2e}",
            t.mean, t.p_value
        ),
    )
}

fn nash_solver() -> Outcome {
    let mut worst = 0.0f64;
    for t in treatment_catalog() {
        let eq = mixed_nash(&t.payoffs).unwrap();
        let (x1, x2) = t.payoffs.row_payoffs(eq.q_star);
        let (y1, y2) = t.payoffs.column_payoffs(eq.p_star);
        worst = worst.max((x1 - x2).abs()).max((y1 - y2).abs());
    }
    let g1 = mixed_nash(&treatment_catalog()[0].payoffs).unwrap();
    let g1_err = (g1.p_star - 1.0 / 11.0)
        .abs()
        .max((g1.q_star - 10.0 / 11.0).abs());
    outcome(
        worst <= 1e-12 && g1_err <= 1e-12,
        format!(
            "max residual {worst:.1e}, game 1 = ({:.6}, {:.6})",
            g1.p_star, g1.q_star
        ),
    )
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    files
}

fn cli(args: &[&str]) -> i32 {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let o = run_from_args(
        std::iter::once("popmaxent").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    o.exit_code
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    let codes = [
        cli(&["reproduce", "--seed", "17", "--out", a.to_str().unwrap()]),
        cli(&["reproduce", "--seed", "17", "--out", b.to_str().unwrap()]),
    ];
    let (ta, tb) = (tree(&a), tree(&b));
    let reproduce_same = codes == [0, 0] && !ta.is_empty() && ta == tb;

    let sim = root.path().join("sim");
    let json = root.path().join("analysis.json");
    let s = sim.to_str().unwrap();
    let c1 = cli(&[
        "simulate",
        "--treatment",
        "4",
        "--groups",
        "5",
        "--seed",
        "8",
        "--out",
        s,
    ]);
    let files: Vec<String> = (1..=5)
        .map(|g| sim.join(format!("t04_g{g:02}.csv")).display().to_string())
        .collect();
    let mut args = vec!["analyze", "--out", json.to_str().unwrap()];
    args.extend(files.iter().map(String::as_str));
    let c2 = cli(&args);
    let doc: AnalysisDocument =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();

    let t = &treatment_catalog()[3];
    let in_process: Vec<_> = run_ensemble(t, &PolicySpec::NASH, 5, 200, 8)
        .unwrap()
        .iter()
        .zip(&files)
        .zip(1..)
        .map(|((r, f), g)| {
            let id = SessionIdentity {
                treatment_id: 4,
                group_id: g,
                source: f.clone(),
            };
            analyze_record(r, id, &AnalysisOptions::default()).unwrap()
        })
        .collect();
    let pipeline_same = c1 == 0 && c2 == 0 && doc.reports == in_process;
    let json_same = doc
        .reports
        .iter()
        .zip(&in_process)
        .all(|(x, y)| x.to_json() == y.to_json());
    outcome(
        reproduce_same && pipeline_same && json_same,
        format!(
            "reproduce trees identical ({} files): {reproduce_same}; file pipeline == in-process: {}",
            ta.len(),
            pipeline_same && json_same
        ),
    )
}

fn degeneracy_facts() -> Outcome {
    let d13 = degeneracy(4, 1, 3).unwrap();
    let total: u128 = lattice::cells(4)
        .map(|(i, j)| degeneracy(4, i, j).unwrap())
        .sum();
    outcome(
        d13 == 16 && total == 256,
        format!("D(1,3) = {d13}, sum = {total}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    // `cargo test -- --list` and filters are accepted but not interpreted.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [Criterion; 11] = [
        ("ECT criterion values", ect_values),
        ("chi-square quantile", chi_quantile),
        ("structural entropy bound", entropy_bound_random_sessions),
        ("dual solver vs closed form", dual_matches_closed_form),
        ("simulated-Nash ECT coverage", ect_coverage),
        ("chi-square calibration", chi_square_calibration),
        ("deviation scale", deviation_scale),
        ("detector sanity", detector_sanity),
        ("Nash solver", nash_solver),
        ("determinism", determinism),
        ("degeneracy facts", degeneracy_facts),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!(
            "[{status}] {:>2} {name}: {} ({:.2} s)",
            k + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
