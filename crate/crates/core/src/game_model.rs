//! 2×2 bimatrix population games and their interior mixed equilibria.
//!
//! Row population X chooses between X1 and X2, column population Y between
//! Y1 and Y2. Cell `(r, c)` pays `a_rc` to the X-agent and `b_rc` to the
//! Y-agent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::session_io;

/// Payoff cells of a 2×2 bimatrix game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub b11: f64,
    pub b12: f64,
    pub b21: f64,
    pub b22: f64,
}

impl PayoffMatrix {
    /// Builds a matrix from cells listed in table order:
    /// `a11, b11, a12, b12, a21, b21, a22, b22`.
    pub fn from_cells(cells: [f64; 8]) -> Result<Self, GameError> {
        if cells.iter().any(|c| !c.is_finite()) {
            return Err(GameError::NonFinitePayoff);
        }
        let [a11, b11, a12, b12, a21, b21, a22, b22] = cells;
        Ok(Self {
            a11,
            a12,
            a21,
            a22,
            b11,
            b12,
            b21,
            b22,
        })
    }

    /// Cells in table order, the inverse of [`PayoffMatrix::from_cells`].
    pub fn cells(&self) -> [f64; 8] {
        [
            self.a11, self.b11, self.a12, self.b12, self.a21, self.b21, self.a22, self.b22,
        ]
    }

    /// Expected payoffs `(X1, X2)` of an X-agent facing a Y population
    /// that plays Y1 with probability `q`.
    pub fn row_payoffs(&self, q: f64) -> (f64, f64) {
        (
            self.a11 * q + self.a12 * (1.0 - q),
            self.a21 * q + self.a22 * (1.0 - q),
        )
    }

    /// Expected payoffs `(Y1, Y2)` of a Y-agent facing an X population
    /// that plays X1 with probability `p`.
    pub fn column_payoffs(&self, p: f64) -> (f64, f64) {
        (
            self.b11 * p + self.b21 * (1.0 - p),
            self.b12 * p + self.b22 * (1.0 - p),
        )
    }
}

/// One payoff configuration of the experiment layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Treatment {
    pub id: u32,
    pub payoffs: PayoffMatrix,
    pub groups: u32,
    pub rounds_per_group: u32,
}

/// Interior mixed-strategy equilibrium: `p_star` is the X1 share of the X
/// population, `q_star` the Y1 share of the Y population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub p_star: f64,
    pub q_star: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("payoff cells must be finite")]
    NonFinitePayoff,
    #[error("degenerate game: {population} indifference denominator is zero")]
    DegenerateGame { population: &'static str },
    #[error("no interior equilibrium: (p*, q*) = ({p_star}, {q_star})")]
    NoInteriorEquilibrium { p_star: f64, q_star: f64 },
    #[error("unknown treatment id {0}")]
    UnknownTreatment(u32),
}

/// Solves the two indifference conditions of a 2×2 game.
///
/// `p*` makes the Y population indifferent and `q*` makes the X population
/// indifferent. Boundary or exterior solutions are rejected rather than
/// clamped.
pub fn mixed_nash(payoffs: &PayoffMatrix) -> Result<EquilibriumPoint, GameError> {
    let m = payoffs;
    let row_den = m.a11 - m.a12 - m.a21 + m.a22;
    let col_den = m.b11 - m.b12 - m.b21 + m.b22;
    if col_den == 0.0 {
        return Err(GameError::DegenerateGame { population: "Y" });
    }
    if row_den == 0.0 {
        return Err(GameError::DegenerateGame { population: "X" });
    }
    let p_star = (m.b22 - m.b21) / col_den;
    let q_star = (m.a22 - m.a12) / row_den;
    let interior = |v: f64| v > 0.0 && v < 1.0;
    if !interior(p_star) || !interior(q_star) {
        return Err(GameError::NoInteriorEquilibrium { p_star, q_star });
    }
    Ok(EquilibriumPoint { p_star, q_star })
}

/// The catalog file shipped with the crate.
pub const CATALOG_SOURCE: &str = include_str!("../data/treatments.txt");

/// The twelve built-in treatments: ids 1–6 are constant-sum games with 12
/// groups each, ids 7–12 non-constant-sum with 6 groups, all 200 rounds.
pub fn treatment_catalog() -> Vec<Treatment> {
    session_io::parse_treatment_config(CATALOG_SOURCE).expect("shipped catalog is well formed")
}

/// Looks up one treatment by id in a catalog.
pub fn find_treatment(catalog: &[Treatment], id: u32) -> Result<&Treatment, GameError> {
    catalog
        .iter()
        .find(|t| t.id == id)
        .ok_or(GameError::UnknownTreatment(id))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game1() -> PayoffMatrix {
        PayoffMatrix::from_cells([10.0, 8.0, 0.0, 18.0, 9.0, 9.0, 10.0, 8.0]).unwrap()
    }

    // Brute-force oracle: on a probability grid, find the opponent mix where
    // the two pure strategies are closest to indifferent.
    fn grid_indifference(f: impl Fn(f64) -> (f64, f64)) -> f64 {
        (0..=1000)
            .map(|k| k as f64 / 1000.0)
            .min_by(|x, y| {
                let dx = (f(*x).0 - f(*x).1).abs();
                let dy = (f(*y).0 - f(*y).1).abs();
                dx.partial_cmp(&dy).unwrap()
            })
            .unwrap()
    }

    #[test]
    fn game1_equilibrium() {
        let eq = mixed_nash(&game1()).unwrap();
        assert!((eq.p_star - 1.0 / 11.0).abs() < 1e-12);
        assert!((eq.q_star - 10.0 / 11.0).abs() < 1e-12);
        let m = game1();
        let q_grid = grid_indifference(|q| m.row_payoffs(q));
        let p_grid = grid_indifference(|p| m.column_payoffs(p));
        assert!((q_grid - eq.q_star).abs() <= 1e-3);
        assert!((p_grid - eq.p_star).abs() <= 1e-3);
    }

    #[test]
    fn matching_pennies() {
        let m = PayoffMatrix::from_cells([1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
        let eq = mixed_nash(&m).unwrap();
        assert_eq!((eq.p_star, eq.q_star), (0.5, 0.5));
    }

    #[test]
    fn dominance_has_no_interior_equilibrium() {
        // X1 strictly dominates X2 for the row population.
        let m = PayoffMatrix::from_cells([2.0, 1.0, 3.0, 0.0, 1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            mixed_nash(&m),
            Err(GameError::NoInteriorEquilibrium { .. })
        ));
    }

    #[test]
    fn zero_denominator_is_degenerate() {
        let m = PayoffMatrix::from_cells([1.0; 8]).unwrap();
        assert!(matches!(
            mixed_nash(&m),
            Err(GameError::DegenerateGame { .. })
        ));
    }

    #[test]
    fn non_finite_payoffs_rejected() {
        let mut cells = [1.0; 8];
        cells[3] = f64::NAN;
        assert_eq!(
            PayoffMatrix::from_cells(cells),
            Err(GameError::NonFinitePayoff)
        );
    }

    #[test]
    fn catalog_matches_table() {
        let cat = treatment_catalog();
        assert_eq!(cat.len(), 12);
        assert_eq!(
            cat[4].payoffs.cells(),
            [7.0, 2.0, 0.0, 9.0, 4.0, 5.0, 8.0, 1.0]
        );
        assert_eq!(
            cat[11].payoffs.cells(),
            [7.0, 3.0, 3.0, 9.0, 3.0, 5.0, 10.0, 0.0]
        );
        for t in &cat {
            assert_eq!(t.groups, if t.id <= 6 { 12 } else { 6 });
            assert_eq!(t.rounds_per_group, 200);
        }
    }

    #[test]
    fn catalog_equilibria_are_interior_and_indifferent() {
        for t in treatment_catalog() {
            let eq = mixed_nash(&t.payoffs).unwrap();
            let (x1, x2) = t.payoffs.row_payoffs(eq.q_star);
            let (y1, y2) = t.payoffs.column_payoffs(eq.p_star);
            assert!((x1 - x2).abs() <= 1e-12, "treatment {}", t.id);
            assert!((y1 - y2).abs() <= 1e-12, "treatment {}", t.id);
        }
    }

    #[test]
    fn unknown_treatment() {
        let cat = treatment_catalog();
        assert_eq!(
            find_treatment(&cat, 13),
            Err(GameError::UnknownTreatment(13))
        );
        assert_eq!(find_treatment(&cat, 3).unwrap().id, 3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn shifted(m: &PayoffMatrix, c: f64, row: bool) -> PayoffMatrix {
            let mut out = *m;
            if row {
                out.a11 += c;
                out.a12 += c;
                out.a21 += c;
                out.a22 += c;
            } else {
                out.b11 += c;
                out.b12 += c;
                out.b21 += c;
                out.b22 += c;
            }
            out
        }

        fn scaled(m: &PayoffMatrix, s: f64, row: bool) -> PayoffMatrix {
            let mut out = *m;
            if row {
                out.a11 *= s;
                out.a12 *= s;
                out.a21 *= s;
                out.a22 *= s;
            } else {
                out.b11 *= s;
                out.b12 *= s;
                out.b21 *= s;
                out.b22 *= s;
            }
            out
        }

        proptest! {
            #[test]
            fn translation_invariance(idx in 0usize..12, c in -50i32..50, row in any::<bool>()) {
                let m = treatment_catalog()[idx].payoffs;
                let base = mixed_nash(&m).unwrap();
                let moved = mixed_nash(&shifted(&m, c as f64, row)).unwrap();
                prop_assert!((base.p_star - moved.p_star).abs() <= 1e-12);
                prop_assert!((base.q_star - moved.q_star).abs() <= 1e-12);
            }

            #[test]
            fn positive_scaling_invariance(idx in 0usize..12, s in 0.01f64..100.0, row in any::<bool>()) {
                let m = treatment_catalog()[idx].payoffs;
                let base = mixed_nash(&m).unwrap();
                let moved = mixed_nash(&scaled(&m, s, row)).unwrap();
                prop_assert!((base.p_star - moved.p_star).abs() <= 1e-12);
                prop_assert!((base.q_star - moved.q_star).abs() <= 1e-12);
            }
        }
    }
}
