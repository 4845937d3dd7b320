//! Deviation pattern of one session as an SVG lattice plot.
//!
//! `cargo run --example deviation_svg -- out.svg`

use popmaxent::game_model::treatment_catalog;
use popmaxent::lattice::{mean_observation, tally};
use popmaxent::maxent::binomial_prediction;
use popmaxent::session_io::lattice_svg;
use popmaxent::simulator::{run_session, PolicySpec};
use popmaxent::stats::deviation_report;

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "deviation.svg".into());
    let policy = PolicySpec::LogitResponse {
        lambda: 1.0,
        initial: (0.5, 0.5),
    };
    let rec = run_session(&treatment_catalog()[5], &policy, 200, 9).unwrap();
    let observed = tally(&rec.rounds, 4).unwrap();
    let mean = mean_observation(&observed);
    let pred = binomial_prediction(mean, 4);
    let dev = deviation_report(
        &observed,
        &pred,
        popmaxent::maxent::empirical_entropy(&observed),
    )
    .unwrap();
    let title = format!("treatment 6, logit 1 (Z = {:.4})", dev.z);
    std::fs::write(&out, lattice_svg(&observed, &pred, mean, Some(&title))).unwrap();
    println!("wrote {out}; Z = {:.5}, D_te = {:?}", dev.z, dev.d_te);
}
