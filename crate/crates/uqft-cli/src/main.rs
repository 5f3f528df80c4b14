//! `uqft`: scenario-driven front end for the uqft library.
//!
//! Every subcommand reads a TOML scenario (`--scenario`), evaluates it and
//! writes a table as CSV or JSON to `--out` or standard output. Invalid
//! scenarios exit with status 2 and a JSON error list on standard error;
//! evaluation failures and failed verification criteria exit with status 1.

mod kinds;
mod params;
mod scenario;
mod sweep;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uqft::checks::{run_check, CRITERIA};

use kinds::{Context, CrossSectionJob, L0Model, Likelihood, OptimizeG, Orbit};
use params::Reader;
use scenario::{describe_units, Format, Kind, LoadedScenario};
use sweep::{run_job, RunError};
use table::{Cell, Column, Provenance, Table};

#[derive(Debug, Parser)]
#[command(
    name = "uqft",
    version,
    about = "Scalar products, likelihoods and cross sections of minimum-packet states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; defaults to the scenario setting, then the file extension, then CSV.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Integration or quadrature tolerance overriding the scenario.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run whatever kind the scenario declares.
    Run,
    /// Integrate a classical n-body trajectory.
    Orbit,
    /// Transition likelihood of the two-body circular orbit.
    Likelihood,
    /// Coupling strength g from the likelihood optimization.
    OptimizeG,
    /// Dynamic momentum-spread model along an escape trajectory.
    L0Model,
    /// Elastic differential cross section and its plane-wave convergence.
    CrossSection,
    /// Run the acceptance checks and emit a pass/fail table.
    Verify {
        /// Criteria to run, e.g. `1,6,13`; all by default.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<usize>,
    },
}

impl Command {
    fn kind(&self) -> Option<Kind> {
        match self {
            Command::Run => None,
            Command::Orbit => Some(Kind::Orbit),
            Command::Likelihood => Some(Kind::Likelihood),
            Command::OptimizeG => Some(Kind::OptimizeG),
            Command::L0Model => Some(Kind::L0Model),
            Command::CrossSection => Some(Kind::CrossSection),
            Command::Verify { .. } => Some(Kind::Verify),
        }
    }
}

/// Exit status with the messages to report.
struct Failure {
    code: u8,
    errors: Vec<String>,
}

impl Failure {
    fn invalid(errors: Vec<String>) -> Self {
        Self { code: 2, errors }
    }

    fn failed(errors: Vec<String>) -> Self {
        Self { code: 1, errors }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Invalid(v) => Failure::invalid(v),
            RunError::Failed(v) => Failure::failed(v),
        }
    }
}

fn load(cli: &Cli) -> Result<LoadedScenario, Failure> {
    match (&cli.scenario, &cli.command) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::invalid(vec![format!("cannot read {}: {e}", path.display())])
            })?;
            LoadedScenario::parse(&text).map_err(Failure::invalid)
        }
        (None, Command::Verify { .. }) => Ok(LoadedScenario::empty(Kind::Verify)),
        (None, _) => Err(Failure::invalid(vec![
            "--scenario is required for this subcommand".into(),
        ])),
    }
}

fn resolve_kind(cli: &Cli, loaded: &LoadedScenario) -> Result<Kind, Failure> {
    match (cli.command.kind(), loaded.scenario.kind) {
        (Some(c), Some(s)) if c != s => Err(Failure::invalid(vec![format!(
            "scenario kind `{s}` does not match subcommand `{c}`"
        )])),
        (Some(c), _) => Ok(c),
        (None, Some(s)) => Ok(s),
        (None, None) => Err(Failure::invalid(vec![
            "scenario has no `kind`; set it or use a kind subcommand".into(),
        ])),
    }
}

fn verify(cli: &Cli, loaded: &LoadedScenario) -> Result<(Table, bool), Failure> {
    let s = &loaded.scenario;
    if s.sweep.is_some() {
        return Err(Failure::invalid(vec![
            "sweep: kind `verify` does not support sweeps".into(),
        ]));
    }
    let mut r = Reader::new(&s.parameters);
    let listed: Vec<usize> = r
        .f64_list_or("criteria", &[])
        .into_iter()
        .map(|v| v as usize)
        .collect();
    r.finish().map_err(Failure::invalid)?;
    let requested = match &cli.command {
        Command::Verify { criteria } if !criteria.is_empty() => criteria.clone(),
        _ if !listed.is_empty() => listed,
        _ => CRITERIA.iter().map(|c| c.0).collect(),
    };
    let unknown: Vec<String> = requested
        .iter()
        .filter(|id| !CRITERIA.iter().any(|c| c.0 == **id))
        .map(|id| format!("criteria: no criterion {id}"))
        .collect();
    if !unknown.is_empty() {
        return Err(Failure::invalid(unknown));
    }

    let mut table = Table::new(vec![
        Column::num("id", "1"),
        Column::text("name"),
        Column::text("result"),
        Column::num("budget", "s"),
        Column::text("detail"),
    ]);
    let mut all = true;
    for id in requested {
        let Some(o) = run_check(id) else { continue };
        eprintln!("{}", o.line());
        all &= o.passed;
        table.timings.push(format!(
            "criterion {id} took {:.3} s",
            o.elapsed.as_secs_f64()
        ));
        table.push(vec![
            Cell::from(o.id),
            o.name.into(),
            (if o.passed { "PASS" } else { "FAIL" }).into(),
            o.budget.as_secs_f64().into(),
            o.detail.into(),
        ]);
    }
    let passed = table
        .rows
        .iter()
        .filter(|r| r[2] == Cell::from("PASS"))
        .count();
    eprintln!("verify: {passed}/{} criteria passed", table.rows.len());
    Ok((table, all))
}

fn output_format(cli: &Cli, loaded: &LoadedScenario, path: Option<&Path>) -> Format {
    cli.format
        .or(loaded.scenario.output.format)
        .unwrap_or_else(|| match path.and_then(|p| p.extension()) {
            Some(ext) if ext == "json" => Format::Json,
            _ => Format::Csv,
        })
}

fn execute(cli: &Cli) -> Result<bool, Failure> {
    let loaded = load(cli)?;
    let kind = resolve_kind(cli, &loaded)?;
    let units = loaded
        .scenario
        .units
        .resolve()
        .map_err(|e| Failure::invalid(vec![e]))?;
    if let Some(t) = cli.tolerance {
        if !(t > 0.0 && t < 1.0) {
            return Err(Failure::invalid(vec![format!(
                "--tolerance must lie in (0, 1), got {t}"
            )]));
        }
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::invalid(vec!["--threads must be positive".into()]));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::failed(vec![format!("thread pool: {e}")]))?;
    }
    let ctx = Context {
        units,
        tolerance: cli.tolerance,
    };
    let s = &loaded.scenario;
    let sweep = s.sweep.as_ref();
    let params = &s.parameters;
    let name = kind.name();
    let (table, ok) = match kind {
        Kind::Orbit => (run_job::<Orbit>(params, sweep, name, &ctx)?, true),
        Kind::Likelihood => (run_job::<Likelihood>(params, sweep, name, &ctx)?, true),
        Kind::OptimizeG => (run_job::<OptimizeG>(params, sweep, name, &ctx)?, true),
        Kind::L0Model => (run_job::<L0Model>(params, sweep, name, &ctx)?, true),
        Kind::CrossSection => (run_job::<CrossSectionJob>(params, sweep, name, &ctx)?, true),
        Kind::Verify => verify(cli, &loaded)?,
    };

    let prov = Provenance {
        kind: name.into(),
        scenario_sha256: loaded.sha256.clone(),
        units: describe_units(&units),
    };
    let path = cli.out.clone().or_else(|| s.output.path.clone());
    let format = output_format(cli, &loaded, path.as_deref());
    let written = match &path {
        Some(p) => File::create(p)
            .map_err(anyhow::Error::from)
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                table.write(&prov, format, &mut w)?;
                w.flush()?;
                Ok(())
            })
            .map_err(|e| anyhow::anyhow!("{}: {e}", p.display())),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write(&prov, format, &mut lock)
        }
    };
    written.map_err(|e| Failure::failed(vec![format!("writing output: {e}")]))?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(f) => {
            eprintln!("{}", serde_json::json!({ "errors": f.errors }));
            ExitCode::from(f.code)
        }
    }
}
