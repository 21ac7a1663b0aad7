//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 input or parse error,
//! 3 internal invariant violation. Output files are only written once
//! every step has succeeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::containment::ContainmentMode;
use crate::dsl::parse_rules;
use crate::evaluation::{evaluate_all, Dataset, OutcomeMatrix};
use crate::partition::{partition, PartitionOptions, PartitionReport};
use crate::report::{explain_rule, export_dot, report_json, GraphDoc};
use crate::rule::RuleSet;
use crate::value_check::{ValueCheckConfig, ValueCheckMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ruleprune", version, about = "Find redundant business rules by expression-tree containment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a rules file and dump the parsed rules as JSON.
    Parse {
        rules: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split the rules into core and correlated sets.
    Analyze {
        rules: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Report JSON path (standard output when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the relationship graph as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Explain one rule's classification.
    Explain {
        rules: PathBuf,
        rule_id: String,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Per-rule PASS/FAIL/NOT_EVALUABLE group counts as CSV.
    Eval {
        rules: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        parallel: bool,
    },
}

#[derive(Debug, Args)]
struct AnalysisArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Ac)]
    mode: ModeArg,
    #[arg(long = "value-check", value_enum, default_value_t = ValueCheckArg::Symbolic)]
    value_check: ValueCheckArg,
    #[arg(long = "min-support", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    min_support: u64,
    /// Evaluate pairwise checks concurrently; output is identical.
    #[arg(long)]
    parallel: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Ac,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ValueCheckArg {
    Off,
    Symbolic,
    Empirical,
    Both,
}

impl From<ValueCheckArg> for ValueCheckMode {
    fn from(v: ValueCheckArg) -> Self {
        match v {
            ValueCheckArg::Off => ValueCheckMode::Off,
            ValueCheckArg::Symbolic => ValueCheckMode::Symbolic,
            ValueCheckArg::Empirical => ValueCheckMode::Empirical,
            ValueCheckArg::Both => ValueCheckMode::Both,
        }
    }
}

enum Failure {
    Usage(String),
    Input(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Input(_) => EXIT_INPUT,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Internal(m) => m,
        }
    }
}

/// Runs the CLI with process stdout/stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// Runs the CLI, writing to the given streams. `args[0]` is the program name.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("usage error");
            let _ = writeln!(stderr, "{line}");
            return EXIT_USAGE;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

/// Pending output: path (or stdout when `None`) and contents.
type Output = (Option<PathBuf>, String);

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    let outputs: Vec<Output> = match cli.command {
        Command::Parse { rules, out } => {
            let set = load_rules(&rules)?;
            let json = serde_json::to_string_pretty(set.rules()).map_err(|e| Failure::Internal(e.to_string()))?;
            vec![(out, json + "\n")]
        }
        Command::Analyze { rules, analysis, out, dot } => {
            let set = load_rules(&rules)?;
            let report = analyze(&set, &analysis)?;
            let mut outputs = vec![(out, report_json(&report) + "\n")];
            if let Some(path) = dot {
                outputs.push((Some(path), export_dot(&GraphDoc::from_report(&report))));
            }
            outputs
        }
        Command::Explain { rules, rule_id, analysis } => {
            let set = load_rules(&rules)?;
            let report = analyze(&set, &analysis)?;
            let text = explain_rule(&rule_id, &set, &report).map_err(|e| Failure::Input(e.to_string()))?;
            vec![(None, text)]
        }
        Command::Eval { rules, data, parallel } => {
            let data = data.ok_or_else(|| Failure::Usage("eval requires --data".into()))?;
            let set = load_rules(&rules)?;
            let matrix = load_matrix(&set, &data, parallel)?;
            vec![(None, matrix.counts_csv())]
        }
    };
    for (path, contents) in outputs {
        match path {
            Some(p) => std::fs::write(&p, contents)
                .map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display())))?,
            None => stdout
                .write_all(contents.as_bytes())
                .map_err(|e| Failure::Input(format!("cannot write output: {e}")))?,
        }
    }
    Ok(())
}

fn load_rules(path: &Path) -> Result<RuleSet, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_rules(&text).map_err(|e| Failure::Input(format!("{}:{e}", path.display())))
}

fn load_matrix(set: &RuleSet, data: &Path, parallel: bool) -> Result<OutcomeMatrix, Failure> {
    let ds = Dataset::load(data).map_err(|e| Failure::Input(format!("{}: {e}", data.display())))?;
    evaluate_all(set, &ds, parallel).map_err(|e| Failure::Input(e.to_string()))
}

fn analyze(set: &RuleSet, args: &AnalysisArgs) -> Result<PartitionReport, Failure> {
    let vc_mode = ValueCheckMode::from(args.value_check);
    if vc_mode.needs_data() && args.data.is_none() {
        return Err(Failure::Usage(format!("--value-check {vc_mode} requires --data")));
    }
    let options = PartitionOptions {
        mode: match args.mode {
            ModeArg::Strict => ContainmentMode::Strict,
            ModeArg::Ac => ContainmentMode::AcEmbed,
        },
        value_check: ValueCheckConfig::new(vc_mode, usize::try_from(args.min_support).unwrap_or(usize::MAX)),
        parallel: args.parallel,
    };
    let matrix = match (&args.data, vc_mode.needs_data()) {
        (Some(path), true) => Some(load_matrix(set, path, args.parallel)?),
        _ => None,
    };
    let report = partition(set, &options, matrix.as_ref()).map_err(|e| Failure::Usage(e.to_string()))?;
    report.check_invariants().map_err(|e| Failure::Internal(format!("invariant violated: {e}")))?;
    Ok(report)
}
