//! The `snbif` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::base_flow::BasePoint;
use crate::bifurcation::{estimate_spectrum, locate_bifurcation, sweep, CountPredicate, Observable};
use crate::dconcavity::{classify_sdc, DcInterval};
use crate::equilibria::census;
use crate::integrator::schwarzian;
use crate::report::{diagram_csv, diagram_summary};
use crate::scenario::{parse_scenario, validate_model, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DEGRADED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "snbif", version, about = "Minimal sets and bifurcations of scalar ODEs over torus rotations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (JSON).
    #[arg(short, long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,
    /// Numerics override, e.g. `--set grid_n=64`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Worker threads (fallback: SNBIF_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ObservableArg {
    A2,
    Fx0,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check coercivity, d-concavity and family compatibility.
    Validate,
    /// Minimal-set census at one parameter value.
    Census {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
    },
    /// Census over the sweep grid; CSV rows plus a summary JSON next to it.
    Sweep,
    /// Bisect a census predicate on an interval.
    Locate {
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
        interval: Vec<f64>,
        /// `count=N` or `count>=N`; default: the census signature at LO.
        #[arg(long)]
        predicate: Option<String>,
    },
    /// Positivity measure of the standardized module of d-concavity.
    Dc {
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
        interval: Vec<f64>,
        #[arg(long)]
        eps: Vec<f64>,
    },
    /// Spectrum bracket of an observable from finite-time averages.
    Spectrum {
        #[arg(long, value_enum, default_value = "a2")]
        observable: ObservableArg,
        #[arg(long)]
        horizons: Vec<f64>,
    },
    /// Schwarzian derivative of the flow map.
    Schwarzian {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long)]
        t: f64,
        /// Base point; the origin when omitted.
        #[arg(long, allow_hyphen_values = true)]
        theta: Vec<f64>,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                so.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json") + "\n"
}

fn load(path: &Path, overrides: &[String]) -> Result<Scenario, (i32, String)> {
    let text = fs::read_to_string(path).map_err(|e| (EXIT_USAGE, format!("cannot read {}: {e}", path.display())))?;
    let mut s = parse_scenario(&text).map_err(|e| (EXIT_INVALID, format!("{}: {e}", path.display())))?;
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| (EXIT_USAGE, format!("override `{o}` is not KEY=VALUE")))?;
        s.numerics.set(k.trim(), v.trim()).map_err(|e| (EXIT_USAGE, format!("override `{o}`: {e}")))?;
    }
    s.check().map_err(|e| (EXIT_INVALID, e.to_string()))?;
    Ok(s)
}

fn configure_threads(requested: Option<usize>) {
    let n = requested.or_else(|| std::env::var("SNBIF_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = n.filter(|n| *n > 0) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err((code, msg)) => {
            eprintln!("snbif: {msg}");
            code
        }
    }
}

fn io_err(e: std::io::Error) -> (i32, String) {
    (EXIT_USAGE, format!("cannot write output: {e}"))
}

/// Writes what is known so far with a `degraded` marker; exit 1.
fn degraded_artifact(out: &Option<PathBuf>, mut partial: serde_json::Value, msg: String) -> Result<i32, (i32, String)> {
    eprintln!("snbif: {msg}");
    partial["degraded"] = json!([msg]);
    emit(out, &pretty(&partial)).map_err(io_err)?;
    Ok(EXIT_DEGRADED)
}

fn execute(cli: &Cli) -> Result<i32, (i32, String)> {
    configure_threads(cli.threads);
    let path = cli
        .scenario
        .as_ref()
        .ok_or((EXIT_USAGE, "a scenario file is required (-s FILE)".to_string()))?;
    let s = load(path, &cli.overrides)?;
    let validation = validate_model(&s);
    if let Command::Validate = cli.command {
        emit(&cli.out, &pretty(&json!(validation))).map_err(io_err)?;
        return Ok(if validation.passed() { EXIT_OK } else { EXIT_INVALID });
    }
    if !validation.passed() && !matches!(cli.command, Command::Dc { .. } | Command::Spectrum { .. } | Command::Schwarzian { .. }) {
        emit(&cli.out, &pretty(&json!({"validation": validation}))).map_err(io_err)?;
        return Ok(EXIT_INVALID);
    }
    match &cli.command {
        Command::Validate => unreachable!(),
        Command::Census { lambda } => {
            let r = match census(&s, *lambda) {
                Ok(r) => r,
                Err(e) => return degraded_artifact(&cli.out, json!({"lambda": lambda}), e.to_string()),
            };
            let degraded = r.is_degraded();
            let v = json!({
                "lambda": r.lambda,
                "count": r.count,
                "sets": r.sets,
                "pinched": r.pinched,
                "gap_min": r.gap_min,
                "gap_max": r.gap_max,
                "gamma_alpha": r.sample.gamma_alpha,
                "gamma_kappa": r.sample.gamma_kappa,
                "gamma_beta": r.sample.gamma_beta,
                "horizon": r.sample.pullback_horizon_used,
                "degraded": r.degraded,
            });
            emit(&cli.out, &pretty(&v)).map_err(io_err)?;
            Ok(if degraded { EXIT_DEGRADED } else { EXIT_OK })
        }
        Command::Sweep => {
            let d = sweep(&s).map_err(|e| (EXIT_INVALID, e.to_string()))?;
            let csv = diagram_csv(&d);
            let summary = pretty(&diagram_summary(&d));
            match &cli.out {
                Some(p) => {
                    fs::write(p, csv).map_err(io_err)?;
                    fs::write(p.with_extension("json"), summary).map_err(io_err)?;
                }
                None => emit(&None, &csv).map_err(io_err)?,
            }
            Ok(if d.degraded.is_empty() { EXIT_OK } else { EXIT_DEGRADED })
        }
        Command::Locate { interval, predicate } => {
            let (lo, hi) = (interval[0], interval[1]);
            let partial = json!({"interval": [lo, hi]});
            let located = match predicate {
                Some(p) => {
                    let pred = CountPredicate::parse(p).ok_or((EXIT_USAGE, format!("bad predicate `{p}`")))?;
                    locate_bifurcation(&s, lo, hi, |r| pred.holds(r))
                }
                None => match census(&s, lo) {
                    Ok(r) => {
                        let sig = r.signature();
                        locate_bifurcation(&s, lo, hi, |r| r.signature() == sig)
                    }
                    Err(e) => return degraded_artifact(&cli.out, partial, e.to_string()),
                },
            };
            let loc = match located {
                Ok(l) => l,
                Err(e) => return degraded_artifact(&cli.out, partial, e.to_string()),
            };
            emit(&cli.out, &pretty(&json!(loc))).map_err(io_err)?;
            Ok(if loc.degraded { EXIT_DEGRADED } else { EXIT_OK })
        }
        Command::Dc { interval, eps } => {
            let j = DcInterval::new(interval[0], interval[1]).map_err(|e| (EXIT_USAGE, e.to_string()))?;
            if eps.is_empty() {
                return Err((EXIT_USAGE, "--eps is required".into()));
            }
            let v = if eps.len() == 1 {
                let report = classify_sdc(&s, j, eps).map_err(|e| (EXIT_USAGE, e.to_string()))?;
                json!({"eps": eps[0], "measure": report.measures[0], "horizon": report.horizon, "spacing": report.spacing, "report": report})
            } else {
                json!(classify_sdc(&s, j, eps).map_err(|e| (EXIT_USAGE, e.to_string()))?)
            };
            emit(&cli.out, &pretty(&v)).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Spectrum { observable, horizons } => {
            let obs = match observable {
                ObservableArg::A2 => Observable::A2Coefficient,
                ObservableArg::Fx0 => Observable::FxAtZeroSection,
            };
            let hs = if horizons.is_empty() {
                vec![s.numerics.birkhoff_t]
            } else {
                horizons.clone()
            };
            let e = estimate_spectrum(&s, obs, &hs).map_err(|e| (EXIT_INVALID, e.to_string()))?;
            emit(&cli.out, &pretty(&json!(e))).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Schwarzian { lambda, x0, t, theta } => {
            let omega = if theta.is_empty() {
                s.base.origin()
            } else {
                BasePoint::new(theta.clone())
            };
            if omega.theta.len() != s.base.dim() {
                return Err((EXIT_USAGE, format!("--theta needs {} coordinates", s.base.dim())));
            }
            match schwarzian(&s, *lambda, &omega, *x0, *t) {
                Ok(v) => {
                    emit(&cli.out, &pretty(&json!({"lambda": lambda, "x0": x0, "t": t, "schwarzian": v}))).map_err(io_err)?;
                    Ok(EXIT_OK)
                }
                Err(status) => {
                    emit(&cli.out, &pretty(&json!({"status": status, "degraded": [format!("{status:?}")]}))).map_err(io_err)?;
                    Ok(EXIT_DEGRADED)
                }
            }
        }
    }
}
