//! Maximum-entropy predictions on the social-state lattice.
//!
//! Entropy is measured over individual action profiles: a density `ρ_ij`
//! spread evenly over the `D_ij` profiles of its state gives
//! `S = -Σ ρ_ij log(ρ_ij / D_ij)`, taken in base `2^(2n)` so that `S ∈ [0, 1]`.
//! Under two mean constraints the maximizer is the product of two binomials.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{self, LatticeDistribution, LatticeGrid, MeanObservation};
use crate::stats;

/// Slack allowed on `Σ ρ_ij = 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaxentError {
    #[error("densities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("negative density {value} at ({i}, {j})")]
    NegativeDensity { i: u32, j: u32, value: f64 },
    #[error("confidence {0} must lie strictly between 0 and 1")]
    InvalidConfidence(f64),
    #[error("sample size and degrees of freedom must be positive")]
    InvalidSampleSize,
    #[error("mean ({o_p}, {o_q}) is not strictly inside the unit square")]
    BoundaryMean { o_p: f64, o_q: f64 },
    #[error("dual solver did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Number of bits per microstate for population size `n`, `2n`.
pub fn natural_base_bits(n: u32) -> u32 {
    2 * n
}

/// Degeneracy-corrected entropy in base `2^(2n)`.
pub fn entropy(densities: &LatticeGrid) -> Result<f64, MaxentError> {
    entropy_in_base(densities, natural_base_bits(densities.n()))
}

/// Degeneracy-corrected entropy in base `2^base_bits`, with `0 · log 0 = 0`.
pub fn entropy_in_base(densities: &LatticeGrid, base_bits: u32) -> Result<f64, MaxentError> {
    let n = densities.n();
    let mut sum = 0.0;
    let mut acc = 0.0;
    for ((i, j), rho) in densities.iter() {
        if rho < 0.0 {
            return Err(MaxentError::NegativeDensity { i, j, value: rho });
        }
        sum += rho;
        if rho > 0.0 {
            let d = lattice::binomial(n, i) as f64 * lattice::binomial(n, j) as f64;
            acc -= rho * (rho.ln() - d.ln());
        }
    }
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(MaxentError::NotNormalized { sum });
    }
    Ok(acc / (base_bits as f64 * std::f64::consts::LN_2))
}

/// Entropy of an observed distribution, `S_e`.
pub fn empirical_entropy(dist: &LatticeDistribution) -> f64 {
    entropy(&dist.density_grid()).expect("empirical densities are normalized")
}

/// The binomial-product prediction `E_ij` and its entropy `S_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxentPrediction {
    pub n: u32,
    pub densities: LatticeGrid,
    pub mean: MeanObservation,
    pub s_t: f64,
}

impl MaxentPrediction {
    pub fn density(&self, i: u32, j: u32) -> f64 {
        self.densities.get(i, j)
    }
}

fn binomial_pmf(n: u32, k: u32, p: f64) -> f64 {
    // powi(0.0, 0) == 1 gives the 0^0 = 1 convention on the lattice edges.
    lattice::binomial(n, k) as f64 * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// `E_ij = C(n,i) C(n,j) Ō_p^i (1-Ō_p)^(n-i) Ō_q^j (1-Ō_q)^(n-j)`.
pub fn binomial_prediction(mean: MeanObservation, n: u32) -> MaxentPrediction {
    let row: Vec<f64> = (0..=n).map(|i| binomial_pmf(n, i, mean.o_p)).collect();
    let col: Vec<f64> = (0..=n).map(|j| binomial_pmf(n, j, mean.o_q)).collect();
    let densities = LatticeGrid::from_fn(n, |i, j| row[i as usize] * col[j as usize]);
    let s_t = entropy(&densities).expect("binomial product is normalized");
    MaxentPrediction {
        n,
        densities,
        mean,
        s_t,
    }
}

/// `S_t` of a prediction.
pub fn theoretical_entropy(pred: &MaxentPrediction) -> f64 {
    pred.s_t
}

/// Degrees of freedom left by the two mean constraints: `(n+1)² - 2 - 1`.
pub fn default_freedoms(n: u32) -> u32 {
    let cells = (n + 1) * (n + 1);
    cells.saturating_sub(3).max(1)
}

/// Units for the concentration bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EctScale {
    /// `χ²_k(F) / 2M` compared directly against base-`2^(2n)` entropies.
    #[default]
    Literal,
    /// The literal bound (which lives in nats) converted to base `2^(2n)`.
    BaseCorrected,
}

/// Entropy-concentration width `ΔS = χ²_k(F) / 2M`.
pub fn ect_bound(sample_size: u64, freedoms: u32, confidence: f64) -> Result<f64, MaxentError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(MaxentError::InvalidConfidence(confidence));
    }
    if sample_size == 0 || freedoms == 0 {
        return Err(MaxentError::InvalidSampleSize);
    }
    let quantile = stats::chi_square_quantile(freedoms as f64, confidence)
        .map_err(|_| MaxentError::InvalidConfidence(confidence))?;
    Ok(quantile / (2.0 * sample_size as f64))
}

/// [`ect_bound`] expressed in the requested units for population size `n`.
pub fn ect_bound_scaled(
    sample_size: u64,
    freedoms: u32,
    confidence: f64,
    scale: EctScale,
    n: u32,
) -> Result<f64, MaxentError> {
    let literal = ect_bound(sample_size, freedoms, confidence)?;
    Ok(match scale {
        EctScale::Literal => literal,
        EctScale::BaseCorrected => literal / (natural_base_bits(n) as f64 * std::f64::consts::LN_2),
    })
}

/// Observed vs. maximal entropy and the concentration check `S_t - S_e ≤ ΔS`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub s_e: f64,
    pub s_t: f64,
    pub delta_s_bound: f64,
    pub sample_size: u64,
    pub within_bound: bool,
}

/// Settings for [`entropy_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EctSettings {
    pub confidence: f64,
    pub freedoms: Option<u32>,
    pub scale: EctScale,
    /// Overrides `M`; defaults to the number of tallied rounds.
    pub sample_size: Option<u64>,
}

impl Default for EctSettings {
    fn default() -> Self {
        Self {
            confidence: 0.95,
            freedoms: None,
            scale: EctScale::Literal,
            sample_size: None,
        }
    }
}

pub fn entropy_report(
    observed: &LatticeDistribution,
    predicted: &MaxentPrediction,
    settings: &EctSettings,
) -> Result<EntropyReport, MaxentError> {
    let n = observed.n();
    let s_e = empirical_entropy(observed);
    let s_t = predicted.s_t;
    let sample_size = settings.sample_size.unwrap_or(observed.total());
    let freedoms = settings.freedoms.unwrap_or_else(|| default_freedoms(n));
    let delta_s_bound = ect_bound_scaled(
        sample_size,
        freedoms,
        settings.confidence,
        settings.scale,
        n,
    )?;
    Ok(EntropyReport {
        s_e,
        s_t,
        delta_s_bound,
        sample_size,
        within_bound: s_t - s_e <= delta_s_bound,
    })
}

/// Damped Newton solver for the entropy maximizer in exponential-family
/// form `ρ_ij ∝ D_ij · exp(θ_p i + θ_q j)`.
///
/// The two natural parameters are found by minimizing the convex dual
/// `log Z(θ) - θ · (n Ō)`; its gradient is the moment mismatch and its
/// Hessian the covariance of `(i, j)`. Nothing here uses the product
/// structure of the solution, so it checks [`binomial_prediction`]
/// independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualSolver {
    /// Convergence bound on the moment mismatch (in units of `i/n`, `j/n`).
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Starting natural parameters; `None` starts from the log-odds of the
    /// target mean, which is the exact solution.
    pub start: Option<(f64, f64)>,
}

impl Default for DualSolver {
    fn default() -> Self {
        Self {
            tolerance: 1e-13,
            max_iterations: 200,
            start: None,
        }
    }
}

/// Result of a dual solve.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub densities: LatticeGrid,
    pub theta: (f64, f64),
    pub iterations: usize,
}

struct DualState {
    value: f64,
    grad: [f64; 2],
    hess: [[f64; 2]; 2],
    densities: Vec<f64>,
}

fn dual_state(n: u32, log_deg: &[f64], theta: (f64, f64), target: [f64; 2]) -> DualState {
    let logits: Vec<f64> = lattice::cells(n)
        .zip(log_deg)
        .map(|((i, j), ld)| ld + theta.0 * i as f64 + theta.1 * j as f64)
        .collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = weights.iter().sum();
    let log_z = max + z.ln();
    let densities: Vec<f64> = weights.iter().map(|w| w / z).collect();

    let nf = n as f64;
    let (mut m_p, mut m_q) = (0.0, 0.0);
    for ((i, j), r) in lattice::cells(n).zip(&densities) {
        m_p += r * i as f64 / nf;
        m_q += r * j as f64 / nf;
    }
    let (mut c_pp, mut c_pq, mut c_qq) = (0.0, 0.0, 0.0);
    for ((i, j), r) in lattice::cells(n).zip(&densities) {
        let dp = i as f64 / nf - m_p;
        let dq = j as f64 / nf - m_q;
        c_pp += r * dp * dp;
        c_pq += r * dp * dq;
        c_qq += r * dq * dq;
    }
    // Parameters act on raw counts i, j while moments are in i/n units.
    let value = log_z - nf * (theta.0 * target[0] + theta.1 * target[1]);
    let grad = [nf * (m_p - target[0]), nf * (m_q - target[1])];
    let hess = [
        [nf * nf * c_pp, nf * nf * c_pq],
        [nf * nf * c_pq, nf * nf * c_qq],
    ];
    DualState {
        value,
        grad,
        hess,
        densities,
    }
}

impl DualSolver {
    pub fn solve(&self, mean: MeanObservation, n: u32) -> Result<DualSolution, MaxentError> {
        if !mean.is_interior() {
            return Err(MaxentError::BoundaryMean {
                o_p: mean.o_p,
                o_q: mean.o_q,
            });
        }
        let target = [mean.o_p, mean.o_q];
        let log_deg: Vec<f64> = lattice::cells(n)
            .map(|(i, j)| (lattice::binomial(n, i) as f64 * lattice::binomial(n, j) as f64).ln())
            .collect();
        let logit = |p: f64| (p / (1.0 - p)).ln();
        let mut theta = self.start.unwrap_or((logit(mean.o_p), logit(mean.o_q)));
        let mut state = dual_state(n, &log_deg, theta, target);
        let nf = n as f64;

        for iteration in 0..=self.max_iterations {
            let residual = state.grad[0].abs().max(state.grad[1].abs()) / nf;
            if residual <= self.tolerance {
                let densities = LatticeGrid::from_values(n, state.densities).expect("lattice size");
                return Ok(DualSolution {
                    densities,
                    theta,
                    iterations: iteration,
                });
            }
            if iteration == self.max_iterations {
                return Err(MaxentError::NoConvergence {
                    iterations: iteration,
                    residual,
                });
            }
            let [[h00, h01], [h10, h11]] = state.hess;
            let det = h00 * h11 - h01 * h10;
            let step = if det.abs() > 1e-300 {
                [
                    -(h11 * state.grad[0] - h01 * state.grad[1]) / det,
                    -(-h10 * state.grad[0] + h00 * state.grad[1]) / det,
                ]
            } else {
                [-state.grad[0], -state.grad[1]]
            };
            let slope = state.grad[0] * step[0] + state.grad[1] * step[1];

            // Armijo backtracking on the dual objective. Once the predicted
            // decrease is below the objective's rounding error the test is
            // meaningless, and a step that shrinks the gradient is accepted.
            let grad_norm = |g: [f64; 2]| g[0].hypot(g[1]);
            let unresolved = -slope <= 1e-12 * (1.0 + state.value.abs());
            let mut t = 1.0;
            loop {
                let trial = (theta.0 + t * step[0], theta.1 + t * step[1]);
                let next = dual_state(n, &log_deg, trial, target);
                let armijo = next.value <= state.value + 1e-4 * t * slope;
                let settles = unresolved && grad_norm(next.grad) < grad_norm(state.grad);
                if armijo || settles || t < 1e-12 {
                    theta = trial;
                    state = next;
                    break;
                }
                t *= 0.5;
            }
        }
        unreachable!("loop returns on the final iteration")
    }
}

/// Entropy maximizer under the mean constraint, found numerically.
pub fn dual_maxent_solve(
    mean: MeanObservation,
    n: u32,
    tolerance: f64,
) -> Result<LatticeGrid, MaxentError> {
    DualSolver {
        tolerance,
        ..DualSolver::default()
    }
    .solve(mean, n)
    .map(|s| s.densities)
}
