//! The per-session analysis pipeline and ensemble summaries.

use serde::{Deserialize, Serialize};

use crate::lattice::{self, tally};
use crate::maxent::{self, binomial_prediction, EctSettings};
use crate::session_io::{self, AnalysisReport, SessionIdentity};
use crate::simulator::SessionRecord;
use crate::stats::{self, SummaryStats, TTestReport};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub ect: EctSettings,
    /// Confidence of the χ² criterion.
    pub chi_confidence: f64,
    /// χ² degrees of freedom; defaults to `(n+1)² - 3`.
    pub freedoms: Option<u32>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            ect: EctSettings::default(),
            chi_confidence: 0.95,
            freedoms: None,
        }
    }
}

/// Runs the full battery on one session: mean, Maxent prediction, entropy
/// bound, χ² fit and deviation pattern.
pub fn analyze_record(
    record: &SessionRecord,
    session: SessionIdentity,
    options: &AnalysisOptions,
) -> Result<AnalysisReport, Error> {
    let observed = tally(&record.rounds, record.n)?;
    let mean = lattice::mean_observation(&observed);
    let predicted = binomial_prediction(mean, record.n);
    let freedoms = options
        .freedoms
        .unwrap_or_else(|| maxent::default_freedoms(record.n));
    let ect = EctSettings {
        freedoms: Some(options.ect.freedoms.unwrap_or(freedoms)),
        ..options.ect
    };
    let entropy = maxent::entropy_report(&observed, &predicted, &ect)?;
    let chi_square =
        stats::chi_square_gof_with(&observed, &predicted, freedoms, options.chi_confidence)?;
    let deviation = stats::deviation_report(&observed, &predicted, entropy.s_e)?;
    Ok(AnalysisReport {
        session,
        n: record.n,
        rounds: observed.total(),
        mean,
        entropy,
        chi_square,
        deviation,
        tool_version: session_io::TOOL_VERSION.to_string(),
        input_digest: session_io::session_digest(record),
    })
}

/// Table-style summary over a set of analysed sessions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub sessions: usize,
    /// Summary of `1 - S_e/S_t` over sessions where it is defined.
    pub d_te: Option<SummaryStats>,
    /// Summary of `S_t - S_e`.
    pub entropy_gap: SummaryStats,
    pub z: SummaryStats,
    /// Two-sided test of `Z = 0`.
    pub z_t_test: TTestReport,
    pub within_bound: usize,
    pub chi_square_exceedances: usize,
}

pub fn summarize_ensemble(
    reports: &[AnalysisReport],
    confidence: f64,
) -> Result<EnsembleSummary, Error> {
    let d_values: Vec<f64> = reports.iter().filter_map(|r| r.deviation.d_te).collect();
    let gaps: Vec<f64> = reports
        .iter()
        .map(|r| r.entropy.s_t - r.entropy.s_e)
        .collect();
    let zs: Vec<f64> = reports.iter().map(|r| r.deviation.z).collect();
    let d_te = if d_values.len() >= 2 {
        Some(stats::summarize(&d_values, confidence)?)
    } else {
        None
    };
    Ok(EnsembleSummary {
        sessions: reports.len(),
        d_te,
        entropy_gap: stats::summarize(&gaps, confidence)?,
        z: stats::summarize(&zs, confidence)?,
        z_t_test: stats::one_sample_t_test(&zs, 0.0)?,
        within_bound: reports.iter().filter(|r| r.entropy.within_bound).count(),
        chi_square_exceedances: reports.iter().filter(|r| r.chi_square.exceeds).count(),
    })
}
