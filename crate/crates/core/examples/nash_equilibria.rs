//! Mixed equilibria of the built-in treatments, with the indifference check.

use popmaxent::game_model::{mixed_nash, treatment_catalog};

fn main() {
    println!("id  groups  p*        q*        residual");
    for t in treatment_catalog() {
        let eq = mixed_nash(&t.payoffs).expect("every built-in game has an interior equilibrium");
        let (x1, x2) = t.payoffs.row_payoffs(eq.q_star);
        let (y1, y2) = t.payoffs.column_payoffs(eq.p_star);
        let residual = (x1 - x2).abs().max((y1 - y2).abs());
        println!(
            "{:<3} {:<7} {:.6}  {:.6}  {residual:.1e}",
            t.id, t.groups, eq.p_star, eq.q_star
        );
    }
}
