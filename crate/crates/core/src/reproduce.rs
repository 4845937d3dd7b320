//! Full experiment layout with simulated equilibrium players: every
//! treatment at its group count and round length, analysed and summarised
//! per treatment and per group.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze_record, summarize_ensemble, AnalysisOptions, EnsembleSummary};
use crate::game_model::{mixed_nash, EquilibriumPoint, Treatment};
use crate::lattice::{self, tally};
use crate::maxent::{self, binomial_prediction};
use crate::rng::derive_seed;
use crate::session_io::{self, AnalysisReport, SessionIdentity};
use crate::simulator::{run_ensemble, PolicySpec, SessionRecord};
use crate::stats::{self, SummaryStats};
use crate::Error;

/// Sample sizes listed in the criterion block: a 12-group treatment, a
/// 6-group treatment, and a single group.
pub const CRITERION_SAMPLE_SIZES: [u64; 3] = [2400, 1200, 200];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionRow {
    pub sample_size: u64,
    pub freedoms: u32,
    pub confidence: f64,
    pub delta_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreatmentRow {
    pub id: u32,
    pub groups: u32,
    pub payoffs: [f64; 8],
    pub equilibrium: EquilibriumPoint,
    pub d_te: SummaryStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub treatment_id: u32,
    pub group_id: u32,
    pub s_e: f64,
    pub s_t: f64,
    pub d_te: Option<f64>,
    pub chi_square: f64,
    pub exceeds: bool,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproduction {
    pub seed: u64,
    pub policy: String,
    pub criterion: Vec<CriterionRow>,
    pub treatments: Vec<TreatmentRow>,
    pub total: EnsembleSummary,
    pub groups: Vec<GroupRow>,
}

/// Seed of the ensemble for `treatment_id` under a run seed.
pub fn treatment_seed(seed: u64, treatment_id: u32) -> u64 {
    derive_seed(seed, 1_000_000 + treatment_id as u64)
}

pub fn criterion_rows(freedoms: u32, confidence: f64) -> Result<Vec<CriterionRow>, Error> {
    CRITERION_SAMPLE_SIZES
        .iter()
        .map(|&m| {
            Ok(CriterionRow {
                sample_size: m,
                freedoms,
                confidence,
                delta_s: maxent::ect_bound(m, freedoms, confidence)?,
            })
        })
        .collect()
}

/// Everything a reproduction produces, before it is written anywhere.
pub struct ReproductionRun {
    pub summary: Reproduction,
    pub sessions: Vec<SessionRecord>,
    pub reports: Vec<AnalysisReport>,
}

fn session_stem(treatment_id: u32, group_id: u32) -> String {
    format!("t{treatment_id:02}_g{group_id:02}")
}

pub fn run(catalog: &[Treatment], seed: u64) -> Result<ReproductionRun, Error> {
    let options = AnalysisOptions::default();
    let per_treatment: Vec<(Vec<SessionRecord>, Vec<AnalysisReport>)> = catalog
        .par_iter()
        .map(|t| -> Result<_, Error> {
            let sessions = run_ensemble(
                t,
                &PolicySpec::NASH,
                t.groups,
                t.rounds_per_group,
                treatment_seed(seed, t.id),
            )?;
            let reports = sessions
                .iter()
                .zip(1..)
                .map(|(rec, g)| {
                    let identity = SessionIdentity {
                        treatment_id: t.id,
                        group_id: g,
                        source: format!("sessions/{}.csv", session_stem(t.id, g)),
                    };
                    analyze_record(rec, identity, &options)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((sessions, reports))
        })
        .collect::<Result<_, _>>()?;

    let mut treatments = Vec::new();
    for (t, (_, reports)) in catalog.iter().zip(&per_treatment) {
        let d: Vec<f64> = reports.iter().filter_map(|r| r.deviation.d_te).collect();
        treatments.push(TreatmentRow {
            id: t.id,
            groups: t.groups,
            payoffs: t.payoffs.cells(),
            equilibrium: mixed_nash(&t.payoffs)?,
            d_te: stats::summarize(&d, 0.99)?,
        });
    }
    let (sessions, reports): (Vec<_>, Vec<_>) = per_treatment.into_iter().unzip();
    let sessions: Vec<SessionRecord> = sessions.into_iter().flatten().collect();
    let reports: Vec<AnalysisReport> = reports.into_iter().flatten().collect();
    let groups = reports
        .iter()
        .map(|r| GroupRow {
            treatment_id: r.session.treatment_id,
            group_id: r.session.group_id,
            s_e: r.entropy.s_e,
            s_t: r.entropy.s_t,
            d_te: r.deviation.d_te,
            chi_square: r.chi_square.statistic,
            exceeds: r.chi_square.exceeds,
            z: r.deviation.z,
        })
        .collect();
    let summary = Reproduction {
        seed,
        policy: PolicySpec::NASH.to_string(),
        criterion: criterion_rows(maxent::default_freedoms(lattice::DEFAULT_POPULATION), 0.95)?,
        treatments,
        total: summarize_ensemble(&reports, 0.99)?,
        groups,
    };
    Ok(ReproductionRun {
        summary,
        sessions,
        reports,
    })
}

/// Treatment-level table: payoffs and the mean, standard error and 99%
/// interval of the entropy deviation, plus a total row.
pub fn treatment_table(rep: &Reproduction) -> String {
    let mut s = String::from("T,G\ta11,b11\ta12,b12\ta21,b21\ta22,b22\tMean\tS.E.\t[99% c.i.]\n");
    for row in &rep.treatments {
        let c = row.payoffs;
        let _ = writeln!(
            s,
            "{},{}\t{},{}\t{},{}\t{},{}\t{},{}\t{:.3}\t{:.3}\t{:.3},{:.3}",
            row.id,
            row.groups,
            c[0],
            c[1],
            c[2],
            c[3],
            c[4],
            c[5],
            c[6],
            c[7],
            row.d_te.mean,
            row.d_te.std_error,
            row.d_te.ci_low,
            row.d_te.ci_high
        );
    }
    if let Some(d) = &rep.total.d_te {
        let _ = writeln!(
            s,
            "Total\t\t\t\t\t{:.3}\t{:.3}\t{:.3},{:.3}",
            d.mean, d.std_error, d.ci_low, d.ci_high
        );
    }
    s
}

/// Group-level table: one row per treatment-group.
pub fn group_table(rep: &Reproduction) -> String {
    let mut s = String::from("T-G\tD_te\tchi2\texceeds\tZ\n");
    for g in &rep.groups {
        let d = g
            .d_te
            .map_or_else(|| "-".to_string(), |d| format!("{d:.3}"));
        let _ = writeln!(
            s,
            "{}-{}\t{}\t{:.2}\t{}\t{:.5}",
            g.treatment_id, g.group_id, d, g.chi_square, g.exceeds, g.z
        );
    }
    s
}

pub fn criterion_table(rows: &[CriterionRow]) -> String {
    let mut s = String::from("M\tk\tF\tdelta_S\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{:.4}",
            r.sample_size, r.freedoms, r.confidence, r.delta_s
        );
    }
    s
}

/// Writes the run under `out`: `sessions/*.csv`, `reports/*.json`,
/// `svg/*.svg` for groups over the χ² criterion, `summary.json` and the
/// three text tables. Returns the files written.
pub fn write(run: &ReproductionRun, out: &Path) -> Result<Vec<PathBuf>, Error> {
    let mkdir =
        |p: &Path| std::fs::create_dir_all(p).map_err(|e| session_io::SessionIoError::io(p, e));
    for sub in ["sessions", "reports", "svg"] {
        mkdir(&out.join(sub))?;
    }
    let mut written = Vec::new();
    for (rec, report) in run.sessions.iter().zip(&run.reports) {
        let stem = session_stem(report.session.treatment_id, report.session.group_id);
        let csv = out.join("sessions").join(format!("{stem}.csv"));
        session_io::write_session_csv(rec, &csv)?;
        written.push(csv);
        let json = out.join("reports").join(format!("{stem}.json"));
        session_io::write_json(report, &json)?;
        written.push(json);
        if report.chi_square.exceeds {
            let observed = tally(&rec.rounds, rec.n)?;
            let predicted = binomial_prediction(report.mean, rec.n);
            let title = format!(
                "{}-{} ({:.4})",
                report.session.treatment_id, report.session.group_id, report.deviation.z
            );
            let svg = session_io::lattice_svg(&observed, &predicted, report.mean, Some(&title));
            let path = out.join("svg").join(format!("{stem}.svg"));
            std::fs::write(&path, svg).map_err(|e| session_io::SessionIoError::io(&path, e))?;
            written.push(path);
        }
    }
    let text_files = [
        ("table_treatments.tsv", treatment_table(&run.summary)),
        ("table_groups.tsv", group_table(&run.summary)),
        ("criterion.tsv", criterion_table(&run.summary.criterion)),
    ];
    for (name, body) in text_files {
        let path = out.join(name);
        std::fs::write(&path, body).map_err(|e| session_io::SessionIoError::io(&path, e))?;
        written.push(path);
    }
    let summary = out.join("summary.json");
    session_io::write_json(&run.summary, &summary)?;
    written.push(summary);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_model::treatment_catalog;

    #[test]
    fn criterion_block() {
        let rows = criterion_rows(22, 0.95).unwrap();
        let text = criterion_table(&rows);
        assert!(text.contains("2400\t22\t0.95\t0.0071"));
        assert!(text.contains("1200\t22\t0.95\t0.0141"));
        assert!(text.contains("200\t22\t0.95\t0.0848"));
    }

    #[test]
    fn full_layout() {
        let cat = treatment_catalog();
        let run = run(&cat, 11).unwrap();
        assert_eq!(run.summary.groups.len(), 108);
        assert_eq!(run.sessions.len(), 108);
        assert_eq!(run.summary.treatments.len(), 12);
        let table = treatment_table(&run.summary);
        assert_eq!(table.lines().count(), 1 + 12 + 1);
        assert_eq!(group_table(&run.summary).lines().count(), 109);
    }
}
