//! Command-line front end: config parsing, the scenario registry and the
//! CSV/SVG writers.

pub mod config;
pub mod output;
pub mod scenarios;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::diagnostics::cauchy_ladder;
use crate::eigenbasis::{beam_basis, sine_basis, Order};
use crate::error::{Result, SolverError};

pub use config::{parse_config, parse_forcing, parse_profile, OutputOptions, RunConfig};
pub use scenarios::{run_config, run_scenario, Overrides, ScenarioReport, REGISTRY};

#[derive(Debug, Parser)]
#[command(
    name = "solver",
    version,
    about = "Spectral Galerkin solver for FK/EFK reaction-diffusion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a named scenario or a config file.
    Run(RunArgs),
    /// Successive-difference table over increasing basis sizes.
    Converge(ConvergeArgs),
    /// Eigenvalue table `j,lambda,kappa`.
    Basis(BasisArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario name.
    pub scenario: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    /// Single-run scenario providing the problem.
    #[arg(default_value = "efk_kink")]
    pub scenario: String,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "n-list", value_delimiter = ',', default_values_t = [4usize, 8, 16, 32])]
    pub n_list: Vec<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub n: usize,
    #[arg(long = "L", default_value_t = 1.0)]
    pub length: f64,
}

fn read_config(path: &PathBuf) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| SolverError::Io {
        path: path.clone(),
        source,
    })?;
    parse_config(&text)
}

fn positive_override(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(SolverError::invalid(format!(
            "--{name} must be positive, got {x}"
        ))),
        _ => Ok(()),
    }
}

fn run(args: RunArgs, stdout: &mut dyn Write) -> Result<()> {
    positive_override("tau", args.tau)?;
    if let Some(g) = args.gamma {
        if !(g.is_finite() && g >= 0.0) {
            return Err(SolverError::invalid(format!(
                "--gamma must be >= 0, got {g}"
            )));
        }
    }
    if args.n == Some(0) {
        return Err(SolverError::invalid("--n must be at least 1"));
    }
    let ov = Overrides {
        n: args.n,
        tau: args.tau,
        gamma: args.gamma,
    };
    let (label, report, out) = match (&args.scenario, &args.config) {
        (Some(_), Some(_)) => {
            return Err(SolverError::invalid(
                "give either a scenario name or --config, not both",
            ));
        }
        (None, None) => {
            return Err(SolverError::invalid(format!(
                "missing scenario; available: {}",
                REGISTRY.join(", ")
            )));
        }
        (Some(name), None) => {
            if !REGISTRY.contains(&name.as_str()) {
                return Err(SolverError::invalid(format!(
                    "unknown scenario `{name}`; available: {}",
                    REGISTRY.join(", ")
                )));
            }
            let out = args
                .out
                .clone()
                .unwrap_or_else(|| scenarios::default_out(name));
            (name.clone(), run_scenario(name, &ov, &out, args.svg)?, out)
        }
        (None, Some(path)) => {
            let cfg = read_config(path)?;
            let label = cfg.scenario.clone().unwrap_or_else(|| "config".into());
            let out = args
                .out
                .clone()
                .or_else(|| cfg.output.dir.clone())
                .unwrap_or_else(|| scenarios::default_out(&label));
            (label.clone(), run_config(&cfg, &ov, &out, args.svg)?, out)
        }
    };
    report_summary(stdout, &label, &report, &out)?;
    if !report.audit.passed() {
        let failed: Vec<&str> = report
            .audit
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.check.as_str())
            .collect();
        return Err(SolverError::AuditFailed(format!(
            "{label}: {}",
            failed.join(", ")
        )));
    }
    Ok(())
}

fn report_summary(
    stdout: &mut dyn Write,
    label: &str,
    report: &ScenarioReport,
    out: &std::path::Path,
) -> Result<()> {
    let io = |e| SolverError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    writeln!(stdout, "{label}: outputs in {}", out.display()).map_err(io)?;
    for r in &report.runs {
        writeln!(
            stdout,
            "  run {} n={} scheme={} tau={} halvings={}",
            r.label,
            r.n,
            r.scheme.name(),
            output::fmt_short(r.tau_used),
            r.halvings
        )
        .map_err(io)?;
    }
    for c in &report.audit.checks {
        writeln!(
            stdout,
            "  {} {} lhs={} rhs={}",
            if c.pass { "ok  " } else { "FAIL" },
            c.check,
            output::fmt_num(c.lhs),
            output::fmt_num(c.rhs)
        )
        .map_err(io)?;
    }
    Ok(())
}

fn converge(args: ConvergeArgs, stdout: &mut dyn Write) -> Result<()> {
    positive_override("tau", args.tau)?;
    let mut cfg = match &args.config {
        Some(path) => {
            let cfg = read_config(path)?;
            match &cfg.scenario {
                Some(name) => scenarios::base_config(name)?,
                None => cfg,
            }
        }
        None => scenarios::base_config(&args.scenario)?,
    };
    Overrides {
        tau: args.tau,
        ..Overrides::default()
    }
    .apply(&mut cfg);
    let rows = cauchy_ladder(&cfg.problem, &cfg.resolved_scheme(), &args.n_list)?;
    let mut text = String::from("n,next_n,distance\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{}\n",
            r.n,
            r.next_n,
            output::fmt_num(r.distance)
        ));
    }
    if let Some(dir) = &args.out {
        output::ensure_dir(dir)?;
        let path = dir.join("ladder.csv");
        std::fs::write(&path, &text).map_err(|source| SolverError::Io { path, source })?;
    }
    stdout
        .write_all(text.as_bytes())
        .map_err(|source| SolverError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn basis(args: BasisArgs, stdout: &mut dyn Write) -> Result<()> {
    let b = match Order::from_m(args.m)? {
        Order::Laplacian => sine_basis(args.length, args.n)?,
        Order::Biharmonic => beam_basis(args.length, args.n)?,
    };
    let mut text = String::from("j,lambda,kappa\n");
    for (j, (l, k)) in b.lambdas().iter().zip(b.kappas()).enumerate() {
        text.push_str(&format!(
            "{},{},{}\n",
            j + 1,
            output::fmt_num(*l),
            output::fmt_num(k)
        ));
    }
    stdout
        .write_all(text.as_bytes())
        .map_err(|source| SolverError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Run(a) => run(a, stdout),
        Command::Converge(a) => converge(a, stdout),
        Command::Basis(a) => basis(a, stdout),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            if code == 0 {
                let _ = write!(stdout, "{e}");
            } else {
                let _ = write!(stderr, "{e}");
            }
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
