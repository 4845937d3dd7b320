//! The full 108-group layout with equilibrium players, as text tables.

use popmaxent::game_model::treatment_catalog;
use popmaxent::reproduce;

fn main() {
    let seed = std::env::args()
        .nth(1)
        .map_or(1, |s| s.parse().expect("seed"));
    let run = reproduce::run(&treatment_catalog(), seed).unwrap();
    print!("{}", reproduce::criterion_table(&run.summary.criterion));
    println!();
    print!("{}", reproduce::treatment_table(&run.summary));
    let t = &run.summary.total.z_t_test;
    println!(
        "\nZ over {} groups: mean {:.5}, t = {:.3}, p = {:.3}",
        run.summary.groups.len(),
        t.mean,
        t.t,
        t.p_value
    );
}
