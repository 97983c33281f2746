//! Batch front end behind the `refmeasure` binary.
//!
//! Every command reads a JSON [`config::RunConfig`] and writes either a JSON
//! [`report::RunReport`] or, for `converge`, a CSV series. Exit codes:
//! `0` success, `2` configuration error, `3` a numerical or existence status
//! that is not ok (the report is still written).

pub mod config;
pub mod demo;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::choquet::{comonotonic_additivity_test, functional_invariance_test, Dictionary, DictionaryStrategy, FunctionalOracle, DEFAULT_SEED};
use crate::elicit::{candidate_from_extremum, convergence_study, elicit_var, proportionality_residual, recover_parameter, CandidateReport, CandidateStatus, ConvergenceSeries, ParameterFamily, Statistic};
use crate::error::{Error, Result};
use crate::games::{check_invariance, classify_properties, Family, Game};
use crate::space::{FiniteSpace, ProbabilityCharge, PAIR_SCAN_CAP};
use crate::supports::{dictionary_extremum, loose_extremum, loose_extremum_checked, sandwich_constants, strict_extremum, DictionarySide, ExtremumReport, GameSide, Normalization, LP_ATOM_CAP};
use crate::TOL;

use config::{RunConfig, Target, Task};
use report::{format_real, section, RunReport, RunStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_OK: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "refmeasure", version, about = "Elicit reference probabilities from games and functionals on finite spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Properties, extrema, sandwich constants and candidate of a target.
    Analyze(RunArgs),
    /// Level and reference probability of a Value-at-Risk capacity.
    ElicitVar(RunArgs),
    /// Loose extremum statistic under refinement, as CSV.
    Converge(RunArgs),
    /// Reproduce a named scenario and compare with its golden file.
    Demo(RunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rewrite golden files instead of comparing against them.
    #[arg(long)]
    pub golden_update: bool,
}

impl Command {
    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Analyze(a) | Command::ElicitVar(a) | Command::Converge(a) | Command::Demo(a) => a,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::ElicitVar(_) => "elicit-var",
            Command::Converge(_) => "converge",
            Command::Demo(_) => "demo",
        }
    }

    fn accepts(&self, task: &Task) -> bool {
        matches!(
            (self, task),
            (Command::Analyze(_), Task::Analyze) | (Command::ElicitVar(_), Task::ElicitVar) | (Command::Converge(_), Task::Converge) | (Command::Demo(_), Task::Demo(_))
        )
    }
}

/// Errors caused by the input rather than by the computation.
pub fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::UnknownDemo(_)
            | Error::Io(_)
            | Error::BadRational(_)
            | Error::NotNormalized(_)
            | Error::NegativeWeight { .. }
            | Error::ZeroTotal
            | Error::EmptySpace
            | Error::TableLength { .. }
            | Error::NotAGame(_)
            | Error::ParameterOutOfRange(_)
            | Error::TooManyAtoms { .. }
            | Error::PinNotInDictionary
            | Error::EmptyDictionary
    )
}

pub fn exit_code(e: &Error) -> i32 {
    if is_config_error(e) {
        EXIT_CONFIG
    } else {
        EXIT_NOT_OK
    }
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(&cli.command) {
        Ok(RunStatus::Ok) => EXIT_OK,
        Ok(RunStatus::NotOk) => EXIT_NOT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs one command, writing its output file.
pub fn execute(command: &Command) -> Result<RunStatus> {
    let args = command.args();
    let cfg = RunConfig::load(&args.config)?;
    if !command.accepts(&cfg.task) {
        return Err(Error::Config(format!("config task {:?} does not match command {}", cfg.task, command.name())));
    }
    let seed = args.seed.or(cfg.options.seed).unwrap_or(DEFAULT_SEED);
    if let Command::Converge(_) = command {
        let series = cmd_converge(&cfg)?;
        write_file(&args.out, &converge_csv(&series))?;
        println!("converge: {} rows, diverging = {}", series.rows.len(), series.diverging);
        return Ok(RunStatus::Ok);
    }
    let result = match (command, &cfg.task) {
        (Command::Analyze(_), _) => cmd_analyze(&cfg, seed),
        (Command::ElicitVar(_), _) => cmd_elicit_var(&cfg, seed),
        (Command::Demo(_), Task::Demo(name)) => {
            let dir = cfg.options.golden_dir.clone().unwrap_or_else(demo::default_golden_dir);
            demo::cmd_demo(name, seed, &dir, args.golden_update)
        }
        _ => unreachable!("task checked above"),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) if is_config_error(&e) => return Err(e),
        Err(e) => {
            let mut r = RunReport::new(command.name(), seed, section(&cfg)?);
            r.fail(e.to_string());
            r
        }
    };
    write_file(&args.out, &report.to_json()?)?;
    for m in &report.messages {
        eprintln!("{m}");
    }
    println!("{}: status {:?}", command.name(), report.status);
    Ok(report.status)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn timed<T>(report: &mut RunReport, stage: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    report.timings.insert(stage.to_string(), start.elapsed().as_secs_f64() * 1e3);
    out
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

/// Which case of the elicitation argument applies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    /// `a`: zero extremum, `b`: not a multiple of the declared probability,
    /// `c`: proportional candidate.
    pub path: char,
    pub conclusion: String,
}

pub fn verdict(candidate: &CandidateReport, extremum: Option<&ExtremumReport>, declared: &ProbabilityCharge, zero_one: bool) -> Verdict {
    match candidate.status {
        CandidateStatus::ZeroExtremum => {
            let mut conclusion = "zero extremum: no conclusion about the reference probability".to_string();
            if zero_one {
                conclusion.push_str("; the target is a 0/1 capacity, run elicit-var");
            }
            Verdict { path: 'a', conclusion }
        }
        CandidateStatus::Signed | CandidateStatus::NotProportional => {
            Verdict { path: 'b', conclusion: "extremum is not a multiple of a probability: the target cannot be law invariant".into() }
        }
        CandidateStatus::Ok => {
            let mu = extremum.and_then(|e| e.extremum.as_ref());
            let residual = mu.map_or(f64::INFINITY, |m| proportionality_residual(m, declared));
            if residual <= crate::elicit::PROPORTIONALITY_TOL {
                Verdict { path: 'c', conclusion: "extremum is a multiple of the declared probability, the only viable reference".into() }
            } else {
                Verdict {
                    path: 'b',
                    conclusion: format!("extremum is not a multiple of the declared probability (residual {}): not law invariant with respect to it", format_real(residual)),
                }
            }
        }
    }
}

pub fn cmd_analyze(cfg: &RunConfig, seed: u64) -> Result<RunReport> {
    let space = cfg.space()?;
    let mut report = RunReport::new("analyze", seed, section(cfg)?);
    match cfg.target(&space)? {
        Target::Game { game, family } => analyze_game(&mut report, &game, family.as_ref(), &space)?,
        Target::Functional(phi) => {
            let strategy = cfg.options.dictionary.clone().unwrap_or(DictionaryStrategy::Indicators);
            let dictionary = Dictionary::generate(&strategy, space.atoms())?;
            analyze_functional(&mut report, &phi, &dictionary, &space, seed)?
        }
    }
    Ok(report)
}

fn analyze_game(report: &mut RunReport, game: &Game, family: Option<&Family>, space: &FiniteSpace) -> Result<()> {
    let n = game.atoms();
    let p = space.probability();
    if n <= PAIR_SCAN_CAP {
        let props = timed(report, "properties", || classify_properties(game))?;
        report.insert("properties", &props)?;
    }
    let mut loose = Vec::new();
    for (name, side) in [("loose_anticore_sup", GameSide::AnticoreSup), ("loose_core_inf", GameSide::CoreInf)] {
        let r = if n <= LP_ATOM_CAP {
            let r = timed(report, name, || loose_extremum_checked(game, side))?;
            if r.lp_discrepancy.is_some_and(|d| d > TOL) {
                report.fail(format!("{name}: closed form and LP disagree"));
            }
            r
        } else {
            loose_extremum(game, side)
        };
        report.insert(name, &r)?;
        loose.push(r);
    }
    if n <= LP_ATOM_CAP {
        for (name, side) in [("anticore_sup", GameSide::AnticoreSup), ("core_inf", GameSide::CoreInf)] {
            let r = timed(report, name, || strict_extremum(game, side))?;
            report.insert(name, &r)?;
        }
    }
    report.insert("sandwich", &sandwich_constants(game, p)?)?;

    let extremum = &loose[1];
    let candidate = candidate_from_extremum(extremum)?;
    report.insert("candidate", &candidate)?;
    let v = verdict(&candidate, Some(extremum), p, game.is_zero_one());
    if v.path == 'c' {
        report.insert("invariance", &check_invariance(game, p)?)?;
        if let (Some(c), Some(family)) = (candidate.scale, family) {
            let which = match family {
                Family::Es { .. } => Some(ParameterFamily::Es),
                Family::Entropic { .. } => Some(ParameterFamily::Entropic),
                _ => None,
            };
            if let Some(which) = which {
                match recover_parameter(which, c) {
                    Ok(x) => report.insert("parameter", &serde_json::json!({ "family": which, "estimate": x, "scale": c }))?,
                    Err(e) => report.note(format!("parameter recovery: {e}")),
                }
                if which == ParameterFamily::Entropic {
                    report.note("entropic scale at finite n underestimates (e^alpha - 1)/alpha; see converge");
                }
            }
        }
    }
    report.insert("verdict", &v)?;
    Ok(())
}

fn analyze_functional(report: &mut RunReport, phi: &FunctionalOracle, dictionary: &Dictionary, space: &FiniteSpace, seed: u64) -> Result<()> {
    let p = space.probability();
    let lower = timed(report, "lower_sup", || dictionary_extremum(phi, dictionary, DictionarySide::LowerSup, &Normalization::None))?;
    let upper = timed(report, "upper_inf", || dictionary_extremum(phi, dictionary, DictionarySide::UpperInf, &Normalization::None))?;
    report.insert("lower_sup", &lower)?;
    report.insert("upper_inf", &upper)?;
    let Some(extremum) = [&lower, &upper].into_iter().find(|r| r.extremum.is_some()) else {
        report.fail("neither supporting set has an extremum");
        return Ok(());
    };
    let candidate = candidate_from_extremum(extremum)?;
    report.insert("candidate", &candidate)?;
    let v = verdict(&candidate, Some(extremum), p, false);
    if v.path == 'c' {
        report.insert("invariance", &functional_invariance_test(phi, p, dictionary)?)?;
    }
    report.insert("verdict", &v)?;
    let comonotonic = timed(report, "comonotonic", || comonotonic_additivity_test(phi, space, 200, seed))?;
    report.insert("comonotonic_additivity", &comonotonic)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// elicit-var
// ---------------------------------------------------------------------------

pub const DEFAULT_DEPTH: usize = 4;

pub fn cmd_elicit_var(cfg: &RunConfig, seed: u64) -> Result<RunReport> {
    let space = cfg.space()?;
    let mut report = RunReport::new("elicit-var", seed, section(cfg)?);
    let Target::Game { game, .. } = cfg.target(&space)? else {
        return Err(Error::Config("elicit-var needs a capacity target".into()));
    };
    let depth = cfg.options.depth.unwrap_or(DEFAULT_DEPTH);
    match timed(&mut report, "elicit_var", || elicit_var(&game, &space, depth)) {
        Ok(e) => {
            report.insert("exact", &matches!(e.gamma_estimate, crate::elicit::GammaEstimate::Exact { .. }))?;
            for w in &e.diagnostics.warnings {
                report.note(w.clone());
            }
            report.insert("elicitation", &e)?;
        }
        Err(e) if is_config_error(&e) => return Err(e),
        Err(e) => report.fail(format!("elicitation failed: {e}")),
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

pub fn default_n_sequence() -> Vec<usize> {
    (2..=12).map(|k| 1usize << k).collect()
}

pub fn cmd_converge(cfg: &RunConfig) -> Result<ConvergenceSeries> {
    let family = cfg.convergence_family()?;
    let ns = cfg.options.n_sequence.clone().unwrap_or_else(default_n_sequence);
    convergence_study(&family, &ns, cfg.options.statistic.unwrap_or(Statistic::Total))
}

pub const CONVERGE_HEADER: &str = "n,statistic,limit,abs_error";

pub fn converge_csv(series: &ConvergenceSeries) -> String {
    let opt = |x: Option<f64>| x.map(format_real).unwrap_or_default();
    let mut out = String::from(CONVERGE_HEADER);
    out.push('\n');
    for r in &series.rows {
        out.push_str(&format!("{},{},{},{}\n", r.n, format_real(r.statistic), opt(r.limit), opt(r.abs_error)));
    }
    out
}
