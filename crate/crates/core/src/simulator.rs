//! Seeded simulation of two-population 2×2 games with random matching.
//!
//! Each round consumes the random stream in a fixed order: one uniform per
//! X-agent (by index), one per Y-agent, then the Fisher–Yates draws of the
//! matching permutation. Identical inputs therefore give bit-identical
//! sessions on every host, and an ensemble computed in parallel equals the
//! sequential one.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game_model::{mixed_nash, GameError, PayoffMatrix, Treatment};
use crate::lattice::{SocialState, DEFAULT_POPULATION};
use crate::rng::{derive_seed, Xoshiro256};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("a session needs at least one round")]
    InvalidRounds,
    #[error("an ensemble needs at least one group")]
    InvalidGroups,
    #[error("population size must be at least 1")]
    InvalidPopulation,
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// How agents choose actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicySpec {
    /// Independent draws: X-agents play X1 with probability `p`, Y-agents
    /// play Y1 with probability `q`. `None` uses the treatment's mixed
    /// equilibrium.
    IidMixed { mix: Option<(f64, f64)> },
    /// Every agent plays the logit response, at rationality `lambda`, to the
    /// opponent population's mix observed in the previous round. `initial`
    /// is the first-round mix.
    LogitResponse { lambda: f64, initial: (f64, f64) },
}

impl PolicySpec {
    pub const NASH: PolicySpec = PolicySpec::IidMixed { mix: None };

    pub fn validate(&self) -> Result<(), SimError> {
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        match *self {
            PolicySpec::IidMixed { mix: Some((p, q)) } if !prob(p) || !prob(q) => Err(
                SimError::InvalidPolicy(format!("mix ({p}, {q}) outside [0, 1]")),
            ),
            PolicySpec::LogitResponse { lambda, .. } if !(lambda.is_finite() && lambda >= 0.0) => {
                Err(SimError::InvalidPolicy(format!(
                    "lambda {lambda} must be finite and >= 0"
                )))
            }
            PolicySpec::LogitResponse {
                initial: (p, q), ..
            } if !prob(p) || !prob(q) => Err(SimError::InvalidPolicy(format!(
                "initial mix ({p}, {q}) outside [0, 1]"
            ))),
            _ => Ok(()),
        }
    }
}

/// Labels use the same syntax [`FromStr`] accepts: `nash`, `iid:P,Q`,
/// `logit:LAMBDA` or `logit:LAMBDA,P0,Q0`.
impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::IidMixed { mix: None } => write!(f, "nash"),
            PolicySpec::IidMixed { mix: Some((p, q)) } => write!(f, "iid:{p},{q}"),
            PolicySpec::LogitResponse {
                lambda,
                initial: (p, q),
            } => {
                write!(f, "logit:{lambda},{p},{q}")
            }
        }
    }
}

impl FromStr for PolicySpec {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SimError::InvalidPolicy(format!("cannot parse policy {s:?}"));
        let numbers = |rest: &str| -> Result<Vec<f64>, SimError> {
            rest.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
                .collect()
        };
        let spec = if s == "nash" {
            PolicySpec::NASH
        } else if let Some(rest) = s.strip_prefix("iid:") {
            match numbers(rest)?[..] {
                [p, q] => PolicySpec::IidMixed { mix: Some((p, q)) },
                _ => return Err(bad()),
            }
        } else if let Some(rest) = s.strip_prefix("logit:") {
            match numbers(rest)?[..] {
                [lambda] => PolicySpec::LogitResponse {
                    lambda,
                    initial: (0.5, 0.5),
                },
                [lambda, p, q] => PolicySpec::LogitResponse {
                    lambda,
                    initial: (p, q),
                },
                _ => return Err(bad()),
            }
        } else {
            return Err(bad());
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// How X-agents are paired with Y-agents each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchingScheme {
    /// A uniformly random perfect matching, redrawn every round.
    #[default]
    Uniform,
    /// X-agent `k` always meets Y-agent `k`; consumes no randomness.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub population: u32,
    pub matching: MatchingScheme,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            population: DEFAULT_POPULATION,
            matching: MatchingScheme::Uniform,
        }
    }
}

/// One simulated or ingested session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub treatment_id: u32,
    /// Absent for sessions not produced by the simulator.
    pub seed: Option<u64>,
    pub n: u32,
    pub rounds: Vec<SocialState>,
    pub policy_id: Option<String>,
}

/// Everything that happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundDetail {
    pub state: SocialState,
    /// `true` = first strategy (X1 / Y1).
    pub x_actions: Vec<bool>,
    pub y_actions: Vec<bool>,
    /// `partners[k]` is the Y-agent matched with X-agent `k`.
    pub partners: Vec<usize>,
    pub x_payoffs: Vec<f64>,
    pub y_payoffs: Vec<f64>,
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn logit_response(payoffs: &PayoffMatrix, lambda: f64, p_seen: f64, q_seen: f64) -> (f64, f64) {
    let (x1, x2) = payoffs.row_payoffs(q_seen);
    let (y1, y2) = payoffs.column_payoffs(p_seen);
    (logistic(lambda * (x1 - x2)), logistic(lambda * (y1 - y2)))
}

/// A running session; yields one [`RoundDetail`] per call to `next`.
pub struct RoundStream<'a> {
    payoffs: &'a PayoffMatrix,
    policy: PolicySpec,
    n: usize,
    matching: MatchingScheme,
    rng: Xoshiro256,
    mix: (f64, f64),
}

impl<'a> RoundStream<'a> {
    pub fn new(
        treatment: &'a Treatment,
        policy: &PolicySpec,
        seed: u64,
        options: &SimOptions,
    ) -> Result<Self, SimError> {
        policy.validate()?;
        if options.population == 0 {
            return Err(SimError::InvalidPopulation);
        }
        let mix = match *policy {
            PolicySpec::IidMixed { mix: Some(m) } => m,
            PolicySpec::IidMixed { mix: None } => {
                let eq = mixed_nash(&treatment.payoffs)?;
                (eq.p_star, eq.q_star)
            }
            PolicySpec::LogitResponse { initial, .. } => initial,
        };
        Ok(Self {
            payoffs: &treatment.payoffs,
            policy: *policy,
            n: options.population as usize,
            matching: options.matching,
            rng: Xoshiro256::seed_from_u64(seed),
            mix,
        })
    }

    /// The mix agents will use in the coming round.
    pub fn current_mix(&self) -> (f64, f64) {
        self.mix
    }

    fn play_round(&mut self) -> RoundDetail {
        let (p, q) = self.mix;
        let x_actions: Vec<bool> = (0..self.n).map(|_| self.rng.bernoulli(p)).collect();
        let y_actions: Vec<bool> = (0..self.n).map(|_| self.rng.bernoulli(q)).collect();
        let mut partners: Vec<usize> = (0..self.n).collect();
        if self.matching == MatchingScheme::Uniform {
            self.rng.shuffle(&mut partners);
        }
        let m = self.payoffs;
        let (mut x_payoffs, mut y_payoffs) = (vec![0.0; self.n], vec![0.0; self.n]);
        for (k, &partner) in partners.iter().enumerate() {
            let (a, b) = match (x_actions[k], y_actions[partner]) {
                (true, true) => (m.a11, m.b11),
                (true, false) => (m.a12, m.b12),
                (false, true) => (m.a21, m.b21),
                (false, false) => (m.a22, m.b22),
            };
            x_payoffs[k] = a;
            y_payoffs[partner] = b;
        }
        let i = x_actions.iter().filter(|a| **a).count() as u32;
        let j = y_actions.iter().filter(|a| **a).count() as u32;
        let n = self.n as u32;
        let state = SocialState::new(n, i, j).expect("counts bounded by n");

        if let PolicySpec::LogitResponse { lambda, .. } = self.policy {
            let (p_seen, q_seen) = state.position();
            self.mix = logit_response(self.payoffs, lambda, p_seen, q_seen);
        }
        RoundDetail {
            state,
            x_actions,
            y_actions,
            partners,
            x_payoffs,
            y_payoffs,
        }
    }
}

impl Iterator for RoundStream<'_> {
    type Item = RoundDetail;

    fn next(&mut self) -> Option<RoundDetail> {
        Some(self.play_round())
    }
}

/// [`run_session_with`] using four agents per population and uniform
/// matching.
pub fn run_session(
    treatment: &Treatment,
    policy: &PolicySpec,
    rounds: u32,
    seed: u64,
) -> Result<SessionRecord, SimError> {
    run_session_with(treatment, policy, rounds, seed, &SimOptions::default())
}

pub fn run_session_with(
    treatment: &Treatment,
    policy: &PolicySpec,
    rounds: u32,
    seed: u64,
    options: &SimOptions,
) -> Result<SessionRecord, SimError> {
    if rounds == 0 {
        return Err(SimError::InvalidRounds);
    }
    let stream = RoundStream::new(treatment, policy, seed, options)?;
    let states = stream.take(rounds as usize).map(|r| r.state).collect();
    Ok(SessionRecord {
        treatment_id: treatment.id,
        seed: Some(seed),
        n: options.population,
        rounds: states,
        policy_id: Some(policy.to_string()),
    })
}

/// Seed of group `group` (1-based) in an ensemble rooted at `base_seed`.
pub fn group_seed(base_seed: u64, group: u32) -> u64 {
    derive_seed(base_seed, group as u64)
}

/// `groups` independent sessions; group `g` (1-based) is seeded with
/// [`group_seed`]`(base_seed, g)`. Groups run in parallel.
pub fn run_ensemble(
    treatment: &Treatment,
    policy: &PolicySpec,
    groups: u32,
    rounds: u32,
    base_seed: u64,
) -> Result<Vec<SessionRecord>, SimError> {
    run_ensemble_with(
        treatment,
        policy,
        groups,
        rounds,
        base_seed,
        &SimOptions::default(),
    )
}

pub fn run_ensemble_with(
    treatment: &Treatment,
    policy: &PolicySpec,
    groups: u32,
    rounds: u32,
    base_seed: u64,
    options: &SimOptions,
) -> Result<Vec<SessionRecord>, SimError> {
    if groups == 0 {
        return Err(SimError::InvalidGroups);
    }
    (1..=groups)
        .into_par_iter()
        .map(|g| run_session_with(treatment, policy, rounds, group_seed(base_seed, g), options))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_model::treatment_catalog;
    use crate::lattice::{self, tally};
    use crate::maxent::binomial_prediction;

    fn game(id: u32) -> Treatment {
        treatment_catalog()
            .into_iter()
            .find(|t| t.id == id)
            .unwrap()
    }

    #[test]
    fn deterministic_policy() {
        let rec = run_session(
            &game(1),
            &PolicySpec::IidMixed {
                mix: Some((1.0, 0.0)),
            },
            10,
            99,
        )
        .unwrap();
        assert_eq!(rec.rounds.len(), 10);
        assert!(rec.rounds.iter().all(|s| (s.i(), s.j()) == (4, 0)));
    }

    #[test]
    fn same_seed_same_record() {
        let a = run_session(&game(3), &PolicySpec::NASH, 200, 7).unwrap();
        let b = run_session(&game(3), &PolicySpec::NASH, 200, 7).unwrap();
        assert_eq!(a, b);
        let c = run_session(&game(3), &PolicySpec::NASH, 200, 8).unwrap();
        assert_ne!(a.rounds, c.rounds);
    }

    #[test]
    fn nash_mean_within_three_standard_errors() {
        let rec = run_session(&game(1), &PolicySpec::NASH, 2400, 2024).unwrap();
        let m = lattice::mean_observation(&tally(&rec.rounds, 4).unwrap());
        let p: f64 = 1.0 / 11.0;
        let se = 3.0 * (p * (1.0 - p) / (4.0 * 2400.0)).sqrt();
        assert!((m.o_p - p).abs() <= se, "{} vs {p}", m.o_p);
        assert!((m.o_q - (1.0 - p)).abs() <= se, "{} vs {}", m.o_q, 1.0 - p);
    }

    #[test]
    fn errors() {
        assert_eq!(
            run_session(&game(1), &PolicySpec::NASH, 0, 1),
            Err(SimError::InvalidRounds)
        );
        let flat = Treatment {
            id: 99,
            payoffs: PayoffMatrix::from_cells([1.0; 8]).unwrap(),
            groups: 1,
            rounds_per_group: 10,
        };
        assert!(matches!(
            run_session(&flat, &PolicySpec::NASH, 5, 1),
            Err(SimError::Game(GameError::DegenerateGame { .. }))
        ));
        let bad = PolicySpec::IidMixed {
            mix: Some((1.2, 0.5)),
        };
        assert!(matches!(
            run_session(&game(1), &bad, 5, 1),
            Err(SimError::InvalidPolicy(_))
        ));
        let bad = PolicySpec::LogitResponse {
            lambda: -1.0,
            initial: (0.5, 0.5),
        };
        assert!(matches!(
            run_session(&game(1), &bad, 5, 1),
            Err(SimError::InvalidPolicy(_))
        ));
        assert_eq!(
            run_ensemble(&game(1), &PolicySpec::NASH, 0, 5, 1),
            Err(SimError::InvalidGroups)
        );
    }

    #[test]
    fn matching_is_a_perfect_matching() {
        let t = game(2);
        let stream = RoundStream::new(&t, &PolicySpec::NASH, 5, &SimOptions::default()).unwrap();
        for round in stream.take(500) {
            let mut seen = round.partners.clone();
            seen.sort_unstable();
            assert_eq!(seen, vec![0, 1, 2, 3]);
            assert_eq!(round.x_actions.len(), 4);
            assert_eq!(round.y_actions.len(), 4);
        }
    }

    #[test]
    fn payoffs_follow_the_matching() {
        let t = game(7);
        let stream = RoundStream::new(&t, &PolicySpec::NASH, 11, &SimOptions::default()).unwrap();
        let m = t.payoffs;
        for round in stream.take(50) {
            for (k, &partner) in round.partners.iter().enumerate() {
                let expect = match (round.x_actions[k], round.y_actions[partner]) {
                    (true, true) => (m.a11, m.b11),
                    (true, false) => (m.a12, m.b12),
                    (false, true) => (m.a21, m.b21),
                    (false, false) => (m.a22, m.b22),
                };
                assert_eq!((round.x_payoffs[k], round.y_payoffs[partner]), expect);
            }
        }
    }

    #[test]
    fn logit_with_zero_lambda_is_fair_coin_play() {
        let t = game(4);
        let logit = PolicySpec::LogitResponse {
            lambda: 0.0,
            initial: (0.5, 0.5),
        };
        let coin = PolicySpec::IidMixed {
            mix: Some((0.5, 0.5)),
        };
        let a = run_session(&t, &logit, 300, 17).unwrap();
        let b = run_session(&t, &coin, 300, 17).unwrap();
        assert_eq!(a.rounds, b.rounds);
    }

    #[test]
    fn iid_pool_converges_to_binomial_product() {
        let t = game(5);
        let rec = run_session(
            &t,
            &PolicySpec::IidMixed {
                mix: Some((0.3, 0.7)),
            },
            100_000,
            3,
        )
        .unwrap();
        let observed = tally(&rec.rounds, 4).unwrap();
        let pred = binomial_prediction(lattice::MeanObservation::new(0.3, 0.7).unwrap(), 4);
        let gap = observed
            .density_grid()
            .sup_distance(&pred.densities)
            .unwrap();
        assert!(gap <= 0.02, "gap {gap}");
    }

    #[test]
    fn matching_scheme_irrelevant_under_iid_play() {
        let t = game(6);
        let policy = PolicySpec::NASH;
        let fixed = SimOptions {
            matching: MatchingScheme::Fixed,
            ..SimOptions::default()
        };
        let a = run_session_with(&t, &policy, 50_000, 21, &SimOptions::default()).unwrap();
        let b = run_session_with(&t, &policy, 50_000, 21, &fixed).unwrap();
        let da = tally(&a.rounds, 4).unwrap().density_grid();
        let db = tally(&b.rounds, 4).unwrap().density_grid();
        assert!(da.sup_distance(&db).unwrap() <= 0.02);
    }

    #[test]
    fn ensemble_groups_are_isolated() {
        let t = game(8);
        let ens = run_ensemble(&t, &PolicySpec::NASH, 6, 200, 77).unwrap();
        assert_eq!(ens.len(), 6);
        for (g, rec) in (1..=6u32).zip(&ens) {
            let solo = run_session(&t, &PolicySpec::NASH, 200, group_seed(77, g)).unwrap();
            assert_eq!(&solo, rec);
        }
        let single = run_ensemble(&t, &PolicySpec::NASH, 1, 200, 77).unwrap();
        assert_eq!(single[0], ens[0]);
    }

    #[test]
    fn ensemble_layout_matches_constant_sum_treatment() {
        let t = game(2);
        let ens = run_ensemble(&t, &PolicySpec::NASH, t.groups, t.rounds_per_group, 1).unwrap();
        assert_eq!(ens.len(), 12);
        assert!(ens.iter().all(|r| r.rounds.len() == 200 && r.n == 4));
    }

    #[test]
    fn policy_labels_round_trip() {
        for spec in [
            PolicySpec::NASH,
            PolicySpec::IidMixed {
                mix: Some((0.25, 1.0)),
            },
            PolicySpec::LogitResponse {
                lambda: 2.5,
                initial: (0.1, 0.9),
            },
        ] {
            let label = spec.to_string();
            assert!(!label.contains(char::is_whitespace));
            assert_eq!(label.parse::<PolicySpec>().unwrap(), spec);
        }
        assert_eq!(
            "logit:3".parse::<PolicySpec>().unwrap(),
            PolicySpec::LogitResponse {
                lambda: 3.0,
                initial: (0.5, 0.5)
            }
        );
        assert!("iid:0.5".parse::<PolicySpec>().is_err());
        assert!("greedy".parse::<PolicySpec>().is_err());
        assert!("iid:2,0".parse::<PolicySpec>().is_err());
    }

    #[test]
    fn other_population_sizes() {
        let opts = SimOptions {
            population: 6,
            ..SimOptions::default()
        };
        let rec = run_session_with(&game(1), &PolicySpec::NASH, 100, 4, &opts).unwrap();
        assert!(rec
            .rounds
            .iter()
            .all(|s| s.n() == 6 && s.i() <= 6 && s.j() <= 6));
    }
}
