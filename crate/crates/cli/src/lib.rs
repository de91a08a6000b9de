//! `verdict-bn` command line. Exit codes: 0 success, 1 domain error
//! (bad file, unknown variable, ...), 2 usage error.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use verdict_core::{
    build_negligence_skeleton, builtin_audit_extract, infer_report, learn_parameters,
    parse_case_csv, run_scenario, summarize, Dataset, Evidence, InferReport, LearningConfig,
    NamedScenario, Network, ScenarioResult,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Directory served at `/` by `serve`, overridable through this variable.
pub const UI_DIR_ENV: &str = "VERDICT_BN_UI_DIR";
const DEFAULT_UI_DIR: &str = "webui/dist";

#[derive(Debug, Parser)]
#[command(
    name = "verdict-bn",
    version,
    about = "Negligence-litigation Bayesian network"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a model file.
    Validate {
        #[arg(long, env = "VERDICT_BN_MODEL")]
        model: PathBuf,
    },
    /// Learn the negligence model from case data and write model JSON.
    Learn {
        /// Case-audit CSV; defaults to the bundled extract.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Posterior marginals under evidence.
    Infer {
        #[arg(long, env = "VERDICT_BN_MODEL")]
        model: PathBuf,
        /// Observation as Var=state; repeatable.
        #[arg(long = "evidence", value_parser = parse_assignment)]
        evidence: Vec<(String, String)>,
        /// Variables to report; defaults to every unobserved variable.
        #[arg(long, num_args = 1..)]
        query: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Run a named scenario.
    Scenario {
        name: String,
        #[arg(long, env = "VERDICT_BN_MODEL")]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Tally the case data the way the audit's totals row does.
    Summarize {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, env = "VERDICT_BN_MODEL")]
        model: PathBuf,
        #[arg(long)]
        port: u16,
    },
}

fn parse_assignment(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((var, state)) if !var.trim().is_empty() && !state.trim().is_empty() => {
            Ok((var.trim().to_string(), state.trim().to_string()))
        }
        _ => Err(format!("expected Var=state, got `{s}`")),
    }
}

/// One-line diagnostic for a domain failure.
#[derive(Debug)]
struct Failure(String);

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<verdict_core::Error> for Failure {
    fn from(e: verdict_core::Error) -> Self {
        Failure(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<Network, Failure> {
    Network::from_json(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_data(path: Option<&Path>) -> Result<Dataset, Failure> {
    match path {
        Some(p) => parse_case_csv(&read(p)?).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => Ok(builtin_audit_extract()),
    }
}

/// Runs the CLI with `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            EXIT_DOMAIN
        }
    }
}

fn io_fail(e: std::io::Error) -> Failure {
    Failure(format!("write failed: {e}"))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Validate { model } => {
            let net = load_model(&model)?;
            writeln!(out, "ok: {} variables, {} arcs", net.len(), net.arc_count()).map_err(io_fail)
        }
        Command::Learn {
            data,
            alpha,
            out: path,
        } => {
            let ds = load_data(data.as_deref())?;
            let net = learn_parameters(
                &ds,
                &build_negligence_skeleton(),
                &LearningConfig::with_alpha(alpha),
            )?;
            let mut text = net.to_json();
            text.push('\n');
            std::fs::write(&path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            writeln!(
                err,
                "learned {} variables from {} records -> {}",
                net.len(),
                ds.len(),
                path.display()
            )
            .map_err(io_fail)
        }
        Command::Infer {
            model,
            evidence,
            query,
            format,
        } => {
            let net = load_model(&model)?;
            let evidence: Evidence = evidence.into_iter().collect();
            let query: Vec<&str> = query.iter().map(String::as_str).collect();
            let report = infer_report(&net, &evidence, (!query.is_empty()).then_some(&query[..]))?;
            match format {
                Format::Json => write_json(out, &report),
                Format::Table => write_table(out, None, &report),
            }
        }
        Command::Scenario {
            name,
            model,
            format,
        } => {
            let scenario = NamedScenario::from_id(&name)?;
            let net = load_model(&model)?;
            let result = run_scenario(&net, &scenario.into())?;
            match format {
                Format::Json => write_json(out, &result),
                Format::Table => write_table(out, Some(&result), &result.report),
            }
        }
        Command::Summarize { data } => {
            let ds = load_data(data.as_deref())?;
            write!(out, "{}", summarize(&ds)).map_err(io_fail)
        }
        Command::Serve { model, port } => {
            let net = load_model(&model)?;
            let ui_dir = std::env::var_os(UI_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_UI_DIR));
            let ui_dir = ui_dir.is_dir().then_some(ui_dir);
            let addr = SocketAddr::from(([127, 0, 0, 1], port));
            writeln!(err, "listening on http://{addr}").map_err(io_fail)?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure(e.to_string()))?;
            runtime
                .block_on(verdict_service::serve(net, addr, ui_dir))
                .map_err(|e| Failure(format!("serve: {e}")))
        }
    }
}

fn write_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure(e.to_string()))?;
    writeln!(out, "{text}").map_err(io_fail)
}

fn write_table(
    out: &mut dyn Write,
    scenario: Option<&ScenarioResult>,
    report: &InferReport,
) -> Result<(), Failure> {
    let mut lines = Vec::new();
    if let Some(s) = scenario {
        lines.push(format!("scenario: {}", s.scenario));
    }
    let ev: Vec<String> = report
        .evidence
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    lines.push(format!(
        "evidence: {}",
        if ev.is_empty() {
            "(none)".to_string()
        } else {
            ev.join(" ")
        }
    ));
    if report.zero_evidence {
        lines.push("evidence has zero probability under the model; no posteriors".into());
    } else {
        lines.push(format!("P(evidence) = {:.6}", report.evidence_probability));
        let width = report
            .posteriors
            .keys()
            .map(String::len)
            .max()
            .unwrap_or(8)
            .max(8);
        lines.push(format!(
            "{:<width$}  {:<8}  probability",
            "variable", "state"
        ));
        for (var, dist) in &report.posteriors {
            for (state, p) in dist {
                lines.push(format!("{var:<width$}  {state:<8}  {p:.6}"));
            }
        }
    }
    for l in lines {
        writeln!(out, "{l}").map_err(io_fail)?;
    }
    Ok(())
}
