//! The social-state lattice: degeneracies and a tally of a short session.

use popmaxent::game_model::treatment_catalog;
use popmaxent::lattice::{self, degeneracy, mean_observation, tally};
use popmaxent::simulator::{run_session, PolicySpec};

fn main() {
    let n = 4;
    println!("degeneracy D_ij = C(4,i) C(4,j), rows i, columns j");
    for i in 0..=n {
        let row: Vec<String> = (0..=n)
            .map(|j| format!("{:>3}", degeneracy(n, i, j).unwrap()))
            .collect();
        println!("  {}", row.join(" "));
    }
    let total: u128 = lattice::cells(n)
        .map(|(i, j)| degeneracy(n, i, j).unwrap())
        .sum();
    println!("microstates: {total}");

    let rec = run_session(&treatment_catalog()[2], &PolicySpec::NASH, 200, 12).unwrap();
    let observed = tally(&rec.rounds, n).unwrap();
    println!("\ncounts from 200 rounds of treatment 3");
    for i in 0..=n {
        let row: Vec<String> = (0..=n)
            .map(|j| format!("{:>3}", observed.count(i, j)))
            .collect();
        println!("  {}", row.join(" "));
    }
    let mean = mean_observation(&observed);
    println!("mean observation ({:.4}, {:.4})", mean.o_p, mean.o_q);
}
