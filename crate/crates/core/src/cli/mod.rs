//! Command-line front end: `metrics`, `view`, `check` and `corpus`.

mod corpus;

pub use corpus::{corpus_summary, CorpusAggregates, CorpusRow, CorpusSummary};

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{cl_report, AnalysisError, CLConfig, CognitiveLoadReport, ConfigError};
use crate::emit::{emit_view, EmitError, Unbreakable, VirtualView};
use crate::interp::check_equivalence;
use crate::refactor::{optimize_with, OptimizeTrace};
use crate::syntax::{parse_source, ModuleAst, SourceUnit, Span, SyntaxError};

pub const CONFIG_ENV: &str = "COGNIVIEW_CONFIG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_EQUIVALENT: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cogniview", version, about = "Cognitive-load-reduced views of MiniPy programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the cognitive-load report of a file
    Metrics {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        shared: Shared,
    },
    /// Write the virtual view of a file with its provenance map and trace
    View {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[arg(long)]
        map: Option<PathBuf>,
        /// Skip the equivalence oracle (unsafe)
        #[arg(long)]
        no_check: bool,
        #[command(flatten)]
        shared: Shared,
    },
    /// Compare two programs with the differential oracle
    Check {
        orig: PathBuf,
        view: PathBuf,
        #[command(flatten)]
        shared: Shared,
    },
    /// Process every .mpy file in a directory
    Corpus {
        dir: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Where to write views; nothing is written when absent
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        no_check: bool,
        #[command(flatten)]
        shared: Shared,
    },
}

#[derive(Debug, Args, Default)]
struct Shared {
    #[arg(long)]
    capacity: Option<usize>,
    #[arg(long)]
    line_limit: Option<usize>,
    #[arg(long)]
    depth_budget: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
}

impl Shared {
    fn apply(&self, mut cfg: CLConfig) -> CLConfig {
        cfg.capacity = self.capacity.unwrap_or(cfg.capacity);
        cfg.line_limit = self.line_limit.unwrap_or(cfg.line_limit);
        cfg.depth_budget = self.depth_budget.unwrap_or(cfg.depth_budget);
        cfg.max_iters = self.max_iters.unwrap_or(cfg.max_iters);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.fuzz_trials = self.trials.unwrap_or(cfg.fuzz_trials);
        cfg
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{message}")]
    Io { path: String, message: String },
    #[error("{err}")]
    Syntax { path: String, err: SyntaxError },
    #[error("{err}")]
    Analysis { path: String, err: AnalysisError },
    #[error("{message}")]
    Config { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => EXIT_USAGE,
            _ => EXIT_ERROR,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "IoError",
            CliError::Syntax { err, .. } => err.kind(),
            CliError::Analysis { err, .. } => err.kind(),
            CliError::Config { .. } => "ConfigError",
        }
    }

    fn location(&self) -> (&str, Span) {
        match self {
            CliError::Io { path, .. } | CliError::Config { path, .. } => (path, Span::default()),
            CliError::Syntax { path, err } => (path, err.span()),
            CliError::Analysis { path, err } => (path, err.span()),
        }
    }

    /// `error: <kind>: <detail> at <file>:<line>:<col>`
    pub fn diagnostic(&self) -> String {
        let (path, span) = self.location();
        format!("error: {}: {} at {}:{}:{}", self.kind(), self, path, span.line, span.col)
    }

    fn from_emit(path: &str, e: EmitError) -> CliError {
        match e {
            EmitError::Syntax(err) => CliError::Syntax { path: path.to_string(), err },
            EmitError::Analysis(err) => CliError::Analysis { path: path.to_string(), err },
        }
    }
}

pub fn display_path(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

pub fn read_source(path: &Path) -> Result<SourceUnit, CliError> {
    let shown = display_path(path);
    let bytes = std::fs::read(path).map_err(|e| CliError::Io { path: shown.clone(), message: e.to_string() })?;
    SourceUnit::from_bytes(shown.clone(), &bytes).map_err(|err| CliError::Syntax { path: shown, err })
}

fn parse_unit(unit: &SourceUnit) -> Result<ModuleAst, CliError> {
    parse_source(unit).map_err(|err| CliError::Syntax { path: unit.path.clone(), err })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io { path: display_path(path), message: e.to_string() })
}

/// Defaults, then the JSON file named by `env_config`, then flags.
fn load_config(env_config: Option<&Path>, shared: &Shared) -> Result<CLConfig, CliError> {
    let base = match env_config {
        Some(path) => {
            let shown = display_path(path);
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config { path: shown.clone(), message: e.to_string() })?;
            serde_json::from_str(&text).map_err(|e| CliError::Config { path: shown, message: e.to_string() })?
        }
        None => CLConfig::default(),
    };
    let cfg = shared.apply(base);
    cfg.validate().map_err(|e: ConfigError| CliError::Config { path: "<config>".into(), message: e.to_string() })?;
    Ok(cfg)
}

/// Everything `view` produces for one file.
#[derive(Debug, Clone)]
pub struct ViewOutcome {
    pub view: VirtualView,
    pub trace: OptimizeTrace,
    /// False only when the final re-check of the whole view failed.
    pub final_check_passed: bool,
}

impl ViewOutcome {
    pub fn equivalence_failed(&self) -> bool {
        self.trace.equivalence_failures() > 0 || !self.final_check_passed
    }
}

/// Optimizes and emits the view of one source unit.
pub fn build_view(unit: &SourceUnit, cfg: &CLConfig, check: bool) -> Result<ViewOutcome, CliError> {
    let module = parse_unit(unit)?;
    cl_report(&module, unit, cfg).map_err(|err| CliError::Analysis { path: unit.path.clone(), err })?;
    let (optimized, trace) = optimize_with(&module, unit, cfg, check);
    let final_check_passed = !check || trace.applied_count() == 0 || check_equivalence(&module, &optimized, cfg).equivalent;
    let view = emit_view(&optimized, unit, cfg).map_err(|e| CliError::from_emit(&unit.path, e))?;
    Ok(ViewOutcome { view, trace, final_check_passed })
}

/// `x.mpy` becomes `x<suffix>`; other names get the suffix appended.
pub fn sibling_path(path: &Path, suffix: &str) -> PathBuf {
    let s = display_path(path);
    match s.strip_suffix(".mpy") {
        Some(stem) => PathBuf::from(format!("{stem}{suffix}")),
        None => PathBuf::from(format!("{s}{suffix}")),
    }
}

/// Writes the view text, provenance sidecar and trace next to `view_path`.
pub fn write_view_files(outcome: &ViewOutcome, view_path: &Path, map_path: &Path) -> Result<(), CliError> {
    write_file(view_path, &outcome.view.text)?;
    write_file(map_path, &to_json(&outcome.view.provenance))?;
    write_file(&sibling_path(view_path, ".trace.json"), &to_json(&outcome.trace))
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct ViewSummary<'a> {
    file: &'a str,
    before: &'a CognitiveLoadReport,
    after: &'a CognitiveLoadReport,
    applied: usize,
    equivalence_failures: usize,
    unbreakable: &'a [Unbreakable],
}

fn human_report(r: &CognitiveLoadReport) -> String {
    let mut out = format!(
        "{}\n  composite score: {}\n  capacity: {}, line limit: {}\n",
        r.file,
        crate::analysis::score_number(r.composite_score),
        r.capacity,
        r.line_limit
    );
    for f in &r.functions {
        out.push_str(&format!(
            "  {}: max nesting {}, mean nesting {:.2}, peak live {}, overloads {}\n",
            f.name, f.max_nesting, f.mean_nesting, f.peak_live, f.overload_count
        ));
    }
    out.push_str(&format!("  call depth: {}", r.call.max_depth));
    if !r.call.recursive.is_empty() {
        out.push_str(&format!(" (recursive: {})", r.call.recursive.join(", ")));
    }
    out.push('\n');
    for l in &r.overlong_lines {
        out.push_str(&format!("  line {} is {} characters\n", l.line, l.length));
    }
    out
}

fn run(command: Command, env_config: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Metrics { file, json, shared } => {
            let cfg = load_config(env_config, &shared)?;
            let unit = read_source(&file)?;
            let module = parse_unit(&unit)?;
            let report = cl_report(&module, &unit, &cfg).map_err(|e| CliError::Analysis { path: unit.path.clone(), err: e })?;
            let text = if json { to_json(&report) } else { human_report(&report) };
            let _ = out.write_all(text.as_bytes());
            Ok(EXIT_OK)
        }
        Command::View { file, output, map, no_check, shared } => {
            let cfg = load_config(env_config, &shared)?;
            let unit = read_source(&file)?;
            let outcome = build_view(&unit, &cfg, !no_check)?;
            let view_path = output.unwrap_or_else(|| sibling_path(&file, ".view.mpy"));
            let map_path = map.unwrap_or_else(|| sibling_path(&view_path, ".map.json"));
            write_view_files(&outcome, &view_path, &map_path)?;
            let summary = ViewSummary {
                file: &unit.path,
                before: &outcome.view.report_before,
                after: &outcome.view.report_after,
                applied: outcome.trace.applied_count(),
                equivalence_failures: outcome.trace.equivalence_failures(),
                unbreakable: &outcome.view.unbreakable,
            };
            let _ = out.write_all(to_json(&summary).as_bytes());
            if outcome.equivalence_failed() {
                let _ = writeln!(err, "warning: equivalence failures occurred; unsafe transformations were skipped");
                return Ok(EXIT_NOT_EQUIVALENT);
            }
            Ok(EXIT_OK)
        }
        Command::Check { orig, view, shared } => {
            let cfg = load_config(env_config, &shared)?;
            let a = parse_unit(&read_source(&orig)?)?;
            let b = parse_unit(&read_source(&view)?)?;
            let verdict = check_equivalence(&a, &b, &cfg);
            let _ = out.write_all(to_json(&verdict).as_bytes());
            Ok(if verdict.equivalent { EXIT_OK } else { EXIT_NOT_EQUIVALENT })
        }
        Command::Corpus { dir, report, out_dir, no_check, shared } => {
            let cfg = load_config(env_config, &shared)?;
            let started = std::time::Instant::now();
            let summary = corpus_summary(&dir, &cfg, !no_check, out_dir.as_deref())?;
            write_file(&report, &to_json(&summary))?;
            let _ = writeln!(
                out,
                "{} files, mean score reduction {}, {}% at score 0",
                summary.aggregates.file_count,
                summary.aggregates.mean_score_reduction,
                summary.aggregates.percent_zero_after
            );
            let _ = writeln!(err, "corpus runtime: {:.3} s", started.elapsed().as_secs_f64());
            for row in summary.files.iter().filter(|r| r.error.is_some()) {
                let _ = writeln!(err, "{}", row.error.as_deref().unwrap_or_default());
            }
            Ok(summary.exit_code())
        }
    }
}

/// Runs the tool with `argv` (program name first) and the config file named
/// by `env_config`; returns the exit code.
pub fn run_with_config(argv: &[String], env_config: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match run(cli.command, env_config, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", e.diagnostic());
            e.exit_code()
        }
    }
}

/// Entry point honoring `COGNIVIEW_CONFIG`.
pub fn run_cli(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
    run_with_config(argv, env.as_deref(), out, err)
}

