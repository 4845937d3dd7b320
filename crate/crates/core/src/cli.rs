//! The `popmaxent` command line: `simulate`, `analyze`, `reproduce` and
//! `predict`.
//!
//! Commands write human output to the given sink and return a
//! [`CommandOutcome`] instead of exiting, so they can be driven from tests.
//! Exit codes: 0 success, 1 analysis flagged under `--strict`, 2 usage or
//! input error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze_record, summarize_ensemble, AnalysisOptions, EnsembleSummary};
use crate::game_model::{find_treatment, treatment_catalog, Treatment};
use crate::lattice::{self, tally, MeanObservation};
use crate::maxent::{self, binomial_prediction, DualSolver, EctScale, EctSettings};
use crate::session_io::{self, AnalysisReport, SessionIdentity};
use crate::simulator::{run_ensemble_with, PolicySpec, SimOptions};
use crate::{reproduce, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FLAGGED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
}

impl CommandOutcome {
    fn ok(artifacts: Vec<PathBuf>) -> Self {
        Self {
            exit_code: EXIT_OK,
            artifacts,
        }
    }

    fn usage() -> Self {
        Self {
            exit_code: EXIT_USAGE,
            artifacts: Vec::new(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "popmaxent",
    version,
    about = "Maximum-entropy tests for 2x2 population games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate sessions of one treatment and write them as CSV.
    Simulate(SimulateArgs),
    /// Analyse session CSVs against their Maxent predictions.
    Analyze(AnalyzeArgs),
    /// Run every built-in treatment with equilibrium players and tabulate.
    Reproduce(ReproduceArgs),
    /// Print the Maxent prediction for a mean observation.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Treatment id, looked up in the built-in table or in `--config`.
    #[arg(long)]
    pub treatment: Option<u32>,
    /// Treatment table to use instead of the built-in one.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `nash`, `iid:P,Q` or `logit:LAMBDA[,P0,Q0]`.
    #[arg(long, default_value = "nash")]
    pub policy: String,
    /// Rounds per group; defaults to the treatment's.
    #[arg(long)]
    pub rounds: Option<u32>,
    /// Number of groups; defaults to the treatment's.
    #[arg(long)]
    pub groups: Option<u32>,
    #[arg(long)]
    pub seed: u64,
    /// Agents per population.
    #[arg(long, default_value_t = lattice::DEFAULT_POPULATION)]
    pub population: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Session CSV files, or directories whose `*.csv` files are read in
    /// name order.
    pub paths: Vec<PathBuf>,
    /// Confidence of the ensemble intervals.
    #[arg(long, default_value_t = 0.99)]
    pub confidence: f64,
    /// Confidence `F` of the entropy-concentration bound.
    #[arg(long, default_value_t = 0.95)]
    pub ect_significance: f64,
    /// Confidence of the χ² criterion.
    #[arg(long, default_value_t = 0.95)]
    pub chi_significance: f64,
    /// Degrees of freedom; defaults to `(n+1)^2 - 3`.
    #[arg(long)]
    pub freedoms: Option<u32>,
    /// Sample size `M` of the bound; defaults to each session's length.
    #[arg(long)]
    pub rounds_per_group: Option<u64>,
    /// Divide the bound by `2n ln 2` to express it in the entropy's base.
    #[arg(long)]
    pub base_corrected: bool,
    /// Write the JSON document here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write one SVG deviation plot per session into this directory.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Exit with 1 if any session exceeds the χ² criterion.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Closed,
    Dual,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(allow_negative_numbers = true)]
    pub o_p: f64,
    #[arg(allow_negative_numbers = true)]
    pub o_q: f64,
    #[arg(long, default_value_t = lattice::DEFAULT_POPULATION)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = Solver::Closed)]
    pub solver: Solver,
}

/// One simulated group as listed in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub group_id: u32,
    pub seed: u64,
    pub file: String,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationManifest {
    pub treatment_id: u32,
    pub payoffs: [f64; 8],
    pub policy: String,
    pub population: u32,
    pub rounds: u32,
    pub groups: u32,
    pub seed: u64,
    pub tool_version: String,
    pub sessions: Vec<ManifestEntry>,
}

/// What `analyze` emits: one report per input, plus a summary when there
/// are at least two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisDocument {
    pub reports: Vec<AnalysisReport>,
    pub summary: Option<EnsembleSummary>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            CommandOutcome {
                exit_code: code,
                artifacts: Vec::new(),
            }
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CommandOutcome {
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Reproduce(a) => cmd_reproduce(a, out),
        Command::Predict(a) => cmd_predict(a, out),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e}");
        CommandOutcome::usage()
    })
}

/// Errors every command can report; all map to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] Error),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
}

type CliResult = Result<CommandOutcome, CliError>;

fn lib<E: Into<Error>>(e: E) -> CliError {
    CliError::Library(e.into())
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| lib(session_io::SessionIoError::io(path, e)))
}

fn select_treatment(args: &SimulateArgs) -> Result<Treatment, CliError> {
    let catalog = match &args.config {
        Some(path) => session_io::read_treatment_config(path).map_err(lib)?,
        None => treatment_catalog(),
    };
    match (args.treatment, catalog.as_slice()) {
        (Some(id), _) => Ok(find_treatment(&catalog, id).map_err(lib)?.clone()),
        (None, [only]) => Ok(only.clone()),
        (None, _) => Err(CliError::Usage(
            "--treatment is required unless the config has exactly one row".into(),
        )),
    }
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> CliResult {
    let treatment = select_treatment(args)?;
    let policy: PolicySpec = args.policy.parse().map_err(lib)?;
    let rounds = args.rounds.unwrap_or(treatment.rounds_per_group);
    let groups = args.groups.unwrap_or(treatment.groups);
    let options = SimOptions {
        population: args.population,
        ..SimOptions::default()
    };
    let sessions =
        run_ensemble_with(&treatment, &policy, groups, rounds, args.seed, &options).map_err(lib)?;

    create_dir(&args.out)?;
    let mut artifacts = Vec::new();
    let mut entries = Vec::new();
    for (rec, g) in sessions.iter().zip(1..) {
        let file = format!("t{:02}_g{g:02}.csv", treatment.id);
        let path = args.out.join(&file);
        session_io::write_session_csv(rec, &path).map_err(lib)?;
        entries.push(ManifestEntry {
            group_id: g,
            seed: rec.seed.expect("simulated sessions carry their seed"),
            file,
            digest: session_io::session_digest(rec),
        });
        artifacts.push(path);
    }
    let manifest = SimulationManifest {
        treatment_id: treatment.id,
        payoffs: treatment.payoffs.cells(),
        policy: policy.to_string(),
        population: args.population,
        rounds,
        groups,
        seed: args.seed,
        tool_version: session_io::TOOL_VERSION.to_string(),
        sessions: entries,
    };
    let manifest_path = args.out.join("manifest.json");
    session_io::write_json(&manifest, &manifest_path).map_err(lib)?;
    artifacts.push(manifest_path);
    writeln!(
        out,
        "wrote {groups} sessions of treatment {} to {}",
        treatment.id,
        args.out.display()
    )?;
    Ok(CommandOutcome::ok(artifacts))
}

fn expand_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries =
                std::fs::read_dir(p).map_err(|e| lib(session_io::SessionIoError::io(p, e)))?;
            let mut csvs: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect();
            csvs.sort();
            files.extend(csvs);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(CliError::Usage("no session files given".into()));
    }
    Ok(files)
}

impl AnalyzeArgs {
    pub fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            ect: EctSettings {
                confidence: self.ect_significance,
                freedoms: self.freedoms,
                scale: if self.base_corrected {
                    EctScale::BaseCorrected
                } else {
                    EctScale::Literal
                },
                sample_size: self.rounds_per_group,
            },
            chi_confidence: self.chi_significance,
            freedoms: self.freedoms,
        }
    }
}

pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> CliResult {
    let files = expand_inputs(&args.paths)?;
    let options = args.options();
    let mut artifacts = Vec::new();
    let mut reports = Vec::with_capacity(files.len());
    if let Some(dir) = &args.svg {
        create_dir(dir)?;
    }
    for (path, g) in files.iter().zip(1..) {
        let rec = session_io::read_session_csv(path).map_err(lib)?;
        let identity = SessionIdentity {
            treatment_id: rec.treatment_id,
            group_id: g,
            source: path.display().to_string(),
        };
        let report = analyze_record(&rec, identity, &options).map_err(lib)?;
        if let Some(dir) = &args.svg {
            let observed = tally(&rec.rounds, rec.n).map_err(lib)?;
            let predicted = binomial_prediction(report.mean, rec.n);
            let stem = path.file_stem().map_or_else(
                || format!("session{g}"),
                |s| s.to_string_lossy().into_owned(),
            );
            let title = format!("{} ({:.4})", stem, report.deviation.z);
            let svg_path = dir.join(format!("{stem}.svg"));
            let svg = session_io::lattice_svg(&observed, &predicted, report.mean, Some(&title));
            std::fs::write(&svg_path, svg)
                .map_err(|e| lib(session_io::SessionIoError::io(&svg_path, e)))?;
            artifacts.push(svg_path);
        }
        reports.push(report);
    }
    let summary = if reports.len() >= 2 {
        Some(summarize_ensemble(&reports, args.confidence)?)
    } else {
        None
    };
    let flagged = reports.iter().filter(|r| r.chi_square.exceeds).count();
    let doc = AnalysisDocument { reports, summary };
    let json = session_io::to_json_string(&doc);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &json)
                .map_err(|e| lib(session_io::SessionIoError::io(path, e)))?;
            artifacts.push(path.clone());
            writeln!(
                out,
                "analysed {} sessions, {flagged} over the chi-square criterion",
                doc.reports.len()
            )?;
        }
        None => out.write_all(json.as_bytes())?,
    }
    let exit_code = if args.strict && flagged > 0 {
        EXIT_FLAGGED
    } else {
        EXIT_OK
    };
    Ok(CommandOutcome {
        exit_code,
        artifacts,
    })
}

pub fn cmd_reproduce(args: &ReproduceArgs, out: &mut dyn Write) -> CliResult {
    let run = reproduce::run(&treatment_catalog(), args.seed)?;
    let artifacts = reproduce::write(&run, &args.out)?;
    out.write_all(reproduce::criterion_table(&run.summary.criterion).as_bytes())?;
    writeln!(out)?;
    out.write_all(reproduce::treatment_table(&run.summary).as_bytes())?;
    writeln!(
        out,
        "\n{} files written to {}",
        artifacts.len(),
        args.out.display()
    )?;
    Ok(CommandOutcome::ok(artifacts))
}

pub fn cmd_predict(args: &PredictArgs, out: &mut dyn Write) -> CliResult {
    if args.n == 0 {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    let mean = MeanObservation::new(args.o_p, args.o_q).ok_or_else(|| {
        CliError::Usage(format!(
            "mean ({}, {}) outside [0, 1]^2",
            args.o_p, args.o_q
        ))
    })?;
    let pred = binomial_prediction(mean, args.n);
    writeln!(
        out,
        "E_ij for mean ({}, {}), n = {}; rows i, columns j",
        args.o_p, args.o_q, args.n
    )?;
    write!(out, "i\\j")?;
    for j in 0..=args.n {
        write!(out, "\t{j}")?;
    }
    writeln!(out)?;
    for i in 0..=args.n {
        write!(out, "{i}")?;
        for j in 0..=args.n {
            write!(out, "\t{:.6}", pred.density(i, j))?;
        }
        writeln!(out)?;
    }
    writeln!(out, "S_t = {:.10}", pred.s_t)?;
    if args.solver == Solver::Dual {
        if !mean.is_interior() {
            return Err(CliError::Usage(
                "the dual solver needs an interior mean".into(),
            ));
        }
        let sol = DualSolver {
            start: Some((0.0, 0.0)),
            ..DualSolver::default()
        }
        .solve(mean, args.n)
        .map_err(lib)?;
        let gap = sol.densities.sup_distance(&pred.densities).map_err(lib)?;
        writeln!(
            out,
            "dual solver: {} iterations, sup-norm gap = {gap:.3e}",
            sol.iterations
        )?;
        let s_dual = maxent::entropy(&sol.densities).map_err(lib)?;
        writeln!(out, "dual S_t = {s_dual:.10}")?;
    }
    Ok(CommandOutcome::ok(Vec::new()))
}
