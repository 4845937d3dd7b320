//! Goodness-of-fit and deviation statistics for lattice distributions.

pub mod special;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{LatticeDistribution, LatticeGrid, MeanObservation};
use crate::maxent::{self, MaxentPrediction};

pub use special::{
    chi_square_cdf, chi_square_quantile, student_t_cdf, student_t_quantile, student_t_two_sided,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("probability {0} must lie strictly between 0 and 1")]
    InvalidProbability(f64),
    #[error("degrees of freedom must be positive, got {0}")]
    InvalidFreedoms(f64),
    #[error("need at least 2 values, got {0}")]
    InsufficientData(usize),
    #[error("theoretical entropy is zero; the deviation ratio is undefined")]
    DegenerateTheory,
    #[error("observed lattice n = {observed} but prediction n = {predicted}")]
    LatticeMismatch { observed: u32, predicted: u32 },
}

/// χ² goodness of fit of observed counts against `T · E_ij`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub freedoms: u32,
    pub criterion: f64,
    /// `statistic > criterion`, or an observation in a zero-probability cell.
    pub exceeds: bool,
    pub cells_used: u32,
    /// Smallest expected count among the cells used.
    pub min_expected: f64,
    /// Cells with observations where the prediction puts zero mass.
    pub impossible_cells: u32,
    /// Set when `impossible_cells > 0`: the discrepancy is unbounded and
    /// `statistic` covers only the remaining cells.
    pub infinite_discrepancy: bool,
}

fn same_lattice(observed: &LatticeDistribution, n: u32) -> Result<(), StatsError> {
    if observed.n() != n {
        return Err(StatsError::LatticeMismatch {
            observed: observed.n(),
            predicted: n,
        });
    }
    Ok(())
}

/// [`chi_square_gof_with`] at `(n+1)² - 3` freedoms and 95% confidence.
pub fn chi_square_gof(
    observed: &LatticeDistribution,
    predicted: &MaxentPrediction,
) -> Result<ChiSquareReport, StatsError> {
    chi_square_gof_with(
        observed,
        predicted,
        maxent::default_freedoms(predicted.n),
        0.95,
    )
}

/// `χ² = Σ (O_ij - T E_ij)² / (T E_ij)` over all cells with `E_ij > 0`.
///
/// No pooling of sparse edge cells is done; `min_expected` shows how thin
/// the expected counts get.
pub fn chi_square_gof_with(
    observed: &LatticeDistribution,
    predicted: &MaxentPrediction,
    freedoms: u32,
    confidence: f64,
) -> Result<ChiSquareReport, StatsError> {
    same_lattice(observed, predicted.n)?;
    chi_square_counts(
        &observed.count_grid(),
        observed.total() as f64,
        predicted,
        freedoms,
        confidence,
    )
}

/// χ² core over a grid of (possibly fractional) observed counts summing to
/// `total`.
pub(crate) fn chi_square_counts(
    counts: &LatticeGrid,
    total: f64,
    predicted: &MaxentPrediction,
    freedoms: u32,
    confidence: f64,
) -> Result<ChiSquareReport, StatsError> {
    let criterion = chi_square_quantile(freedoms as f64, confidence)?;
    let mut statistic = 0.0;
    let mut cells_used = 0;
    let mut impossible_cells = 0;
    let mut min_expected = f64::INFINITY;
    for ((i, j), e) in predicted.densities.iter() {
        let o = counts.get(i, j);
        if e > 0.0 {
            let expected = total * e;
            statistic += (o - expected).powi(2) / expected;
            cells_used += 1;
            min_expected = min_expected.min(expected);
        } else if o != 0.0 {
            impossible_cells += 1;
        }
    }
    let infinite_discrepancy = impossible_cells > 0;
    Ok(ChiSquareReport {
        statistic,
        freedoms,
        criterion,
        exceeds: infinite_discrepancy || statistic > criterion,
        cells_used,
        min_expected,
        impossible_cells,
        infinite_discrepancy,
    })
}

/// `D = 1 - S_e / S_t`.
pub fn entropy_deviation(s_e: f64, s_t: f64) -> Result<f64, StatsError> {
    if s_t <= 0.0 {
        return Err(StatsError::DegenerateTheory);
    }
    Ok(1.0 - s_e / s_t)
}

/// Signed per-cell density residuals `O_ij / T - E_ij`.
pub fn density_residuals(
    observed: &LatticeDistribution,
    predicted: &MaxentPrediction,
) -> Result<LatticeGrid, StatsError> {
    same_lattice(observed, predicted.n)?;
    Ok(LatticeGrid::from_fn(predicted.n, |i, j| {
        observed.density(i, j) - predicted.density(i, j)
    }))
}

/// `Z = Σ ‖x_ij - Ō‖ (E_ij - ρ_ij)`, Euclidean distance, densities.
///
/// Negative values mean the observed mass sits farther from the mean than
/// the prediction's.
pub fn z_statistic(
    observed: &LatticeDistribution,
    predicted: &MaxentPrediction,
    mean: MeanObservation,
) -> Result<f64, StatsError> {
    let residuals = density_residuals(observed, predicted)?;
    Ok(z_from_residuals(&residuals, mean))
}

fn z_from_residuals(residuals: &LatticeGrid, mean: MeanObservation) -> f64 {
    let n = residuals.n() as f64;
    residuals
        .iter()
        .map(|((i, j), r)| {
            let dp = i as f64 / n - mean.o_p;
            let dq = j as f64 / n - mean.o_q;
            dp.hypot(dq) * -r
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    /// `1 - S_e/S_t`; absent when `S_t = 0`.
    pub d_te: Option<f64>,
    pub z: f64,
    pub per_cell: LatticeGrid,
}

pub fn deviation_report(
    observed: &LatticeDistribution,
    predicted: &MaxentPrediction,
    s_e: f64,
) -> Result<DeviationReport, StatsError> {
    let per_cell = density_residuals(observed, predicted)?;
    let z = z_from_residuals(&per_cell, predicted.mean);
    let d_te = match entropy_deviation(s_e, predicted.s_t) {
        Ok(d) => Some(d),
        Err(StatsError::DegenerateTheory) => None,
        Err(e) => return Err(e),
    };
    Ok(DeviationReport { d_te, z, per_cell })
}

/// One-sample t-test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestReport {
    #[serde(with = "nonfinite")]
    pub t: f64,
    pub freedoms: u32,
    /// Two-sided.
    pub p_value: f64,
    pub mean: f64,
    /// All values equal; `t` is 0 or infinite.
    pub zero_variance: bool,
}

fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

pub fn one_sample_t_test(values: &[f64], mu0: f64) -> Result<TTestReport, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::InsufficientData(values.len()));
    }
    let freedoms = (values.len() - 1) as u32;
    let (mean, sd) = mean_and_sd(values);
    if sd == 0.0 {
        let diff = mean - mu0;
        let (t, p_value) = if diff == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(diff), 0.0)
        };
        return Ok(TTestReport {
            t,
            freedoms,
            p_value,
            mean,
            zero_variance: true,
        });
    }
    let t = (mean - mu0) / (sd / (values.len() as f64).sqrt());
    let p_value = student_t_two_sided(freedoms as f64, t);
    Ok(TTestReport {
        t,
        freedoms,
        p_value,
        mean,
        zero_variance: false,
    })
}

/// Mean, standard error and t-based confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub sample_count: usize,
}

pub fn summarize(values: &[f64], confidence: f64) -> Result<SummaryStats, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::InsufficientData(values.len()));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(StatsError::InvalidProbability(confidence));
    }
    let (mean, sd) = mean_and_sd(values);
    let std_error = sd / (values.len() as f64).sqrt();
    let t = student_t_quantile((values.len() - 1) as f64, 0.5 + confidence / 2.0)?;
    Ok(SummaryStats {
        mean,
        std_error,
        ci_low: mean - t * std_error,
        ci_high: mean + t * std_error,
        confidence,
        sample_count: values.len(),
    })
}

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float {other:?}"))),
            },
        }
    }
}
