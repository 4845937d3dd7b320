//! The binomial Maxent prediction for a mean, checked against the dual solver.
//!
//! `cargo run --example maxent_prediction -- 0.3 0.8`

use popmaxent::lattice::MeanObservation;
use popmaxent::maxent::{binomial_prediction, DualSolver};

fn main() {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("a number"))
        .collect();
    let (o_p, o_q) = match args.as_slice() {
        [p, q] => (*p, *q),
        _ => (1.0 / 11.0, 10.0 / 11.0),
    };
    let mean = MeanObservation::new(o_p, o_q).expect("mean in [0, 1]^2");
    let pred = binomial_prediction(mean, 4);
    for i in 0..=4 {
        let row: Vec<String> = (0..=4)
            .map(|j| format!("{:.6}", pred.density(i, j)))
            .collect();
        println!("{}", row.join("  "));
    }
    println!("S_t = {:.6}", pred.s_t);
    if mean.is_interior() {
        let dual = DualSolver {
            start: Some((0.0, 0.0)),
            ..DualSolver::default()
        }
        .solve(mean, 4)
        .unwrap();
        let gap = dual.densities.sup_distance(&pred.densities).unwrap();
        println!(
            "dual solver: {} Newton steps, sup gap {gap:.2e}",
            dual.iterations
        );
    }
}
