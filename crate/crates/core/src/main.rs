use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use imcf::error::Error;
use imcf::harness::config::GridConfig;
use imcf::harness::{
    check_flux, check_static, resolve_threads, run_scenario, run_sweep, write_atomic, ExitStatus, FluxCheck, Report,
    ScenarioConfig, StaticCheck, SweepConfig, Timings, Verdict,
};
use imcf::sphere::GridMode;

#[derive(Parser)]
#[command(name = "imcf", about = "Inverse mean curvature flow in Schwarzschild space", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Scenario or sweep file (JSON, comments allowed).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding the file's `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads for sweeps (falls back to IMCF_THREADS).
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one flow scenario and write its trace and report.
    Run,
    /// Sample the background and check the static identities.
    CheckStatic {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
        #[arg(long, hide = true)]
        corrupt_lambda_dd: bool,
    },
    /// Check flux constancy on random star-shaped surfaces.
    CheckFlux {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long = "n-theta", default_value_t = 256)]
        n_theta: usize,
        /// Longitudinal nodes; selects the lat-long grid.
        #[arg(long = "n-psi")]
        n_psi: Option<usize>,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Evaluate the Minkowski gap over a parameter grid.
    Sweep,
    Version,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    let status = match dispatch(&cli) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("imcf: {e}");
            match e {
                Failure::Lib(Error::Breakdown { .. }) => ExitStatus::Breakdown,
                _ => ExitStatus::ConfigError,
            }
        }
    };
    ExitCode::from(status.code() as u8)
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(PathBuf, std::io::Error),
    Usage(&'static str),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(p, e) => write!(f, "{}: {e}", p.display()),
            Failure::Usage(msg) => f.write_str(msg),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    write_atomic(path, bytes).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn say(g: &Global, line: impl AsRef<str>) {
    if !g.quiet {
        println!("{}", line.as_ref());
    }
}

fn print_verdicts(g: &Global, verdicts: &[Verdict]) {
    for v in verdicts {
        say(
            g,
            format!(
                "{:<28} {} measured={:.6e} tolerance={:.3e}",
                v.name,
                if v.pass { "PASS" } else { "FAIL" },
                v.measured,
                v.tolerance
            ),
        );
    }
}

fn dispatch(cli: &Cli) -> Result<ExitStatus, Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Version => {
            println!("imcf {}", env!("CARGO_PKG_VERSION"));
            Ok(ExitStatus::Pass)
        }
        Command::Run => {
            let path = g.config.as_ref().ok_or(Failure::Usage("run requires --config"))?;
            let mut config = ScenarioConfig::load(path)?;
            if let Some(dir) = &g.out {
                config.output.dir = dir.clone();
            }
            if let Some(seed) = g.seed {
                config.seed = seed;
            }
            let result = run_scenario(&config)?;
            let dir = &config.output.dir;
            write(&dir.join(&config.output.trace), result.trace.to_csv_string()?.as_bytes())?;
            write(&dir.join(&config.output.report), result.report.to_json().as_bytes())?;
            if result.status == ExitStatus::Breakdown {
                eprintln!("imcf: flow stopped early: {:?}", result.trace.outcome);
            }
            say(
                g,
                format!("{}: {} steps, {} snapshots", config.scenario, result.trace.steps, result.trace.records.len()),
            );
            print_verdicts(g, &result.report.verdicts);
            Ok(result.status)
        }
        Command::CheckStatic { n, m, samples, tolerance, corrupt_lambda_dd } => {
            let start = Instant::now();
            let cases = match (n, m) {
                (Some(n), Some(m)) => vec![(*n, *m)],
                (Some(n), None) => [0.5, 1.0, 2.0].map(|m| (*n, m)).to_vec(),
                (None, Some(m)) => (3..=6).map(|n| (n, *m)).collect(),
                (None, None) => StaticCheck::default_cases(),
            };
            let check = StaticCheck {
                cases,
                samples: *samples,
                seed: g.seed.unwrap_or(0),
                tolerance: *tolerance,
                corrupt_lambda_dd: *corrupt_lambda_dd,
            };
            let rep = check_static(&check)?;
            for row in &rep.rows {
                say(
                    g,
                    format!(
                        "n={} m={}: scalar curvature {:.3e}, static residual {:.3e}",
                        row.n, row.m, row.max_scalar_curvature, row.max_static_residual
                    ),
                );
            }
            let verdicts =
                vec![Verdict::new("static_identities", rep.status == ExitStatus::Pass, rep.worst, check.tolerance)];
            print_verdicts(g, &verdicts);
            let effective = serde_json::to_value(&check).expect("serializable");
            write_side_report(g, "check-static", effective, verdicts, start)?;
            Ok(rep.status)
        }
        Command::CheckFlux { n, m, n_theta, n_psi, count, tolerance, corrupt } => {
            let start = Instant::now();
            let mode = if n_psi.is_some() { GridMode::LatLong2d } else { GridMode::Axisym1d };
            let check = FluxCheck {
                n: *n,
                m: *m,
                grid: GridConfig { mode, n_theta: *n_theta, n_psi: *n_psi, stencil_order: 4 },
                count: *count,
                seed: g.seed.unwrap_or(0),
                tolerance: *tolerance,
                corrupt: *corrupt,
            };
            let rep = check_flux(&check)?;
            say(
                g,
                format!(
                    "expected flux {:.15e}, {} surfaces, worst deviation {:.3e}",
                    rep.expected,
                    rep.fluxes.len(),
                    rep.worst_deviation
                ),
            );
            let verdicts = vec![Verdict::at_most("flux_constancy", rep.worst_deviation, check.tolerance)];
            print_verdicts(g, &verdicts);
            let effective = serde_json::to_value(&check).expect("serializable");
            write_side_report(g, "check-flux", effective, verdicts, start)?;
            Ok(rep.status)
        }
        Command::Sweep => {
            let start = Instant::now();
            let path = g.config.as_ref().ok_or(Failure::Usage("sweep requires --config"))?;
            let mut config: SweepConfig = imcf::harness::config::load_json(path)?;
            if let Some(dir) = &g.out {
                config.output.dir = dir.clone();
            }
            let compute = Instant::now();
            let result = run_sweep(&config, resolve_threads(g.threads))?;
            let compute_seconds = compute.elapsed().as_secs_f64();
            write(&config.output.dir.join(&config.output.trace), &result.to_csv_bytes()?)?;
            let report = Report {
                scenario: config.scenario.clone(),
                effective_config: serde_json::to_value(&config).expect("serializable"),
                verdicts: result.verdicts.clone(),
                timings: Timings { total_seconds: start.elapsed().as_secs_f64(), compute_seconds },
            };
            write(&config.output.dir.join(&config.output.report), report.to_json().as_bytes())?;
            say(g, format!("{}: {} rows", config.scenario, result.rows.len()));
            print_verdicts(g, &result.verdicts);
            Ok(result.status)
        }
    }
}

/// `check-*` commands only write a report when `--out` is given.
fn write_side_report(
    g: &Global,
    name: &str,
    effective_config: serde_json::Value,
    verdicts: Vec<Verdict>,
    start: Instant,
) -> Result<(), Failure> {
    let Some(dir) = &g.out else { return Ok(()) };
    let seconds = start.elapsed().as_secs_f64();
    let report = Report {
        scenario: name.to_string(),
        effective_config,
        verdicts,
        timings: Timings { total_seconds: seconds, compute_seconds: seconds },
    };
    write(&dir.join("report.json"), report.to_json().as_bytes())
}
