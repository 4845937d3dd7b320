//! χ² fit of equilibrium play versus concentrated logit play.

use popmaxent::game_model::treatment_catalog;
use popmaxent::lattice::{mean_observation, tally};
use popmaxent::maxent::binomial_prediction;
use popmaxent::simulator::{run_session, PolicySpec};
use popmaxent::stats::chi_square_gof;

fn main() {
    let game = &treatment_catalog()[4];
    let policies = [
        PolicySpec::NASH,
        PolicySpec::LogitResponse {
            lambda: 0.3,
            initial: (0.5, 0.5),
        },
        PolicySpec::LogitResponse {
            lambda: 5.0,
            initial: (0.5, 0.5),
        },
    ];
    for policy in policies {
        let rec = run_session(game, &policy, 2400, 3).unwrap();
        let observed = tally(&rec.rounds, 4).unwrap();
        let pred = binomial_prediction(mean_observation(&observed), 4);
        let fit = chi_square_gof(&observed, &pred).unwrap();
        println!(
            "{:<18} chi2 = {:>10.2}  criterion {:.2}  exceeds {}",
            policy.to_string(),
            fit.statistic,
            fit.criterion,
            fit.exceeds
        );
    }
}
