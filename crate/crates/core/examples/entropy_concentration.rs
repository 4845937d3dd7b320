//! Entropy-concentration bounds and how simulated sessions sit inside them.

use popmaxent::game_model::treatment_catalog;
use popmaxent::lattice::{mean_observation, tally};
use popmaxent::maxent::{binomial_prediction, ect_bound, empirical_entropy};
use popmaxent::simulator::{run_session, PolicySpec};

fn main() {
    for m in [2400, 1200, 200] {
        println!(
            "M = {m:>4}: delta S = {:.4}",
            ect_bound(m, 22, 0.95).unwrap()
        );
    }
    let game = &treatment_catalog()[0];
    println!("\nrounds  S_e      S_t      gap      bound");
    for (k, rounds) in [200u32, 1200, 2400].into_iter().enumerate() {
        let rec = run_session(game, &PolicySpec::NASH, rounds, 100 + k as u64).unwrap();
        let observed = tally(&rec.rounds, 4).unwrap();
        let s_e = empirical_entropy(&observed);
        let s_t = binomial_prediction(mean_observation(&observed), 4).s_t;
        let bound = ect_bound(rounds as u64, 22, 0.95).unwrap();
        println!(
            "{rounds:<7} {s_e:.5}  {s_t:.5}  {:.5}  {bound:.5}",
            s_t - s_e
        );
    }
}
