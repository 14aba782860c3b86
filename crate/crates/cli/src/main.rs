//! `trtc`: experiment runner for max-min fair beamforming in TRTC-served
//! cells. Subcommands: `solve` (one scenario), `sweep` (Monte Carlo parameter
//! sweep to CSV), `bench` (closed-form vs reference solver timings), and
//! `selftest` (numeric cross-checks).
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 1 anything else.

use clap::{Parser, Subcommand};
use std::fs::File;
use std::path::PathBuf;
use std::str::FromStr;
use trtc_maxmin::config::{RawConfig, SystemConfig};
use trtc_maxmin::experiment::{
    bench_runtime, run_scenario, run_sweep, selftest, write_sweep_csv, write_trace_csv,
    ExperimentError, Scheme, SweepParam, SweepSpec,
};
use trtc_maxmin::optimizer::SubproblemPath;
use trtc_maxmin::oracle::OracleSettings;

#[derive(Parser)]
#[command(
    name = "trtc",
    version,
    about = "Max-min fair transmit beamforming experiments for TRTC-served multi-cell downlinks"
)]
struct Cli {
    /// Scenario config file, TOML or JSON; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one config field, e.g. --set num_units=25. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// RNG seed; shorthand for --set rng_seed=N.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one scenario and print the per-user rate report.
    Solve {
        /// Monte Carlo trial index; selects the user drop and fading draw.
        #[arg(long, default_value_t = 0)]
        trial: u32,
        /// Power-constraint scheme: trtc, baseline, or both.
        #[arg(long, default_value = "trtc")]
        scheme: String,
        /// Subproblem route: closed or reference.
        #[arg(long, default_value = "closed")]
        solver: String,
        /// Write the per-iteration trace CSV here.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter over Monte Carlo trials; one CSV row per
    /// (value, scheme).
    Sweep {
        /// Swept parameter: unit_power_dbm, users_per_cell, cell_radius,
        /// num_cells, pathloss_exponent, or num_units.
        #[arg(long)]
        param: String,
        /// Comma-separated values, e.g. 0,5,10,15.
        #[arg(long)]
        values: String,
        /// Channel realizations per sweep point.
        #[arg(long, default_value_t = 100)]
        trials: u32,
        /// trtc, baseline, or both.
        #[arg(long, default_value = "both")]
        scheme: String,
        /// Subproblem route: closed or reference.
        #[arg(long, default_value = "closed")]
        solver: String,
        /// Output CSV path; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Time the closed-form subproblem path against the iterative reference
    /// on identical instances.
    Bench {
        /// Instances to time (median is reported); at least 3.
        #[arg(long, default_value_t = 5)]
        trials: u32,
    },
    /// Cross-check the production numerics against their reference routes.
    Selftest,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match dispatch(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                ExperimentError::Config(_) | ExperimentError::Invalid(_) => 2,
                ExperimentError::Channel(_)
                | ExperimentError::Optimize(_)
                | ExperimentError::SelfTest(_) => 3,
                ExperimentError::Io(_) | ExperimentError::Csv(_) => 1,
            }
        }
    });
}

fn load_raw(cli: &Cli) -> Result<RawConfig, ExperimentError> {
    let mut raw = match &cli.config {
        Some(path) => SystemConfig::load_raw(path)?,
        None => RawConfig::default(),
    };
    for kv in &cli.set {
        let (key, value) = kv.split_once('=').ok_or_else(|| {
            ExperimentError::Invalid(format!("--set expects KEY=VALUE, got `{kv}`"))
        })?;
        raw.apply_override(key.trim(), value.trim())?;
    }
    if let Some(seed) = cli.seed {
        raw.apply_override("rng_seed", &seed.to_string())?;
    }
    Ok(raw)
}

fn parse_schemes(s: &str) -> Result<Vec<Scheme>, ExperimentError> {
    if s.eq_ignore_ascii_case("both") {
        Ok(vec![Scheme::Trtc, Scheme::Baseline])
    } else {
        Ok(vec![s.parse()?])
    }
}

fn parse_solver(s: &str) -> Result<SubproblemPath, ExperimentError> {
    match s.to_ascii_lowercase().as_str() {
        "closed" => Ok(SubproblemPath::ClosedForm),
        "reference" => Ok(SubproblemPath::ProjectedGradient(OracleSettings::default())),
        other => Err(ExperimentError::Invalid(format!(
            "unknown solver `{other}`, expected `closed` or `reference`"
        ))),
    }
}

fn create_out(path: &PathBuf) -> Result<File, ExperimentError> {
    File::create(path).map_err(|e| {
        ExperimentError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn dispatch(cli: &Cli) -> Result<(), ExperimentError> {
    let raw = load_raw(cli)?;
    match &cli.cmd {
        Cmd::Solve {
            trial,
            scheme,
            solver,
            out,
        } => {
            let cfg = SystemConfig::from_raw(&raw)?;
            let path = parse_solver(solver)?;
            for scheme in parse_schemes(scheme)? {
                let result = run_scenario(&cfg, *trial, scheme, &path)?;
                let report = &result.report;
                let status = if result.trace.converged {
                    "converged"
                } else {
                    "iteration cap"
                };
                println!(
                    "scheme {scheme}  trial {trial}  seed {}  {} iterations ({status})",
                    cfg.rng_seed,
                    result.trace.records.len()
                );
                println!(
                    "  objective {:.6} bits/s/Hz ({:.6} nats)",
                    report.objective_bits(),
                    report.objective_nats
                );
                for g in 0..cfg.num_cells {
                    let rates: Vec<String> = (0..cfg.users_per_cell)
                        .map(|k| {
                            format!(
                                "{:.4}",
                                report.rates[cfg.user_index(g, k)] / std::f64::consts::LN_2
                            )
                        })
                        .collect();
                    println!(
                        "  cell {g}: min {:.4} bits/s/Hz (user {})  rates [{}]",
                        report.cell_min[g] / std::f64::consts::LN_2,
                        report.min_user[g],
                        rates.join(", ")
                    );
                }
                if let Some(last) = result.trace.records.last() {
                    println!("  worst power ratio {:.9}", last.max_power_ratio);
                }
                if let Some(path) = out {
                    write_trace_csv(&result.trace, create_out(path)?)?;
                    eprintln!("trace written to {}", path.display());
                }
            }
            Ok(())
        }
        Cmd::Sweep {
            param,
            values,
            trials,
            scheme,
            solver,
            out,
        } => {
            let spec = SweepSpec {
                param: SweepParam::from_str(param)?,
                values: values
                    .split(',')
                    .map(|v| {
                        v.trim().parse::<f64>().map_err(|e| {
                            ExperimentError::Invalid(format!("bad sweep value `{v}`: {e}"))
                        })
                    })
                    .collect::<Result<_, _>>()?,
                trials: *trials,
                schemes: parse_schemes(scheme)?,
            };
            let path = parse_solver(solver)?;
            let rows = run_sweep(&raw, &spec, &path)?;
            for row in &rows {
                eprintln!(
                    "point {}={} scheme={} mean {:.4} bits/s/Hz (std {:.4}, {:.1} iters, {:.1} ms)",
                    row.param,
                    row.value,
                    row.scheme,
                    row.mean_sumrate_bps_hz,
                    row.std_sumrate,
                    row.mean_iters,
                    row.mean_ms_per_solve
                );
            }
            match out {
                Some(path) => {
                    write_sweep_csv(&rows, create_out(path)?)?;
                    eprintln!("sweep written to {}", path.display());
                }
                None => write_sweep_csv(&rows, std::io::stdout().lock())?,
            }
            Ok(())
        }
        Cmd::Bench { trials } => {
            let cfg = SystemConfig::from_raw(&raw)?;
            let report = bench_runtime(&cfg, *trials)?;
            println!(
                "bench over {} instances (G={}, K={}, N={})",
                report.trials, cfg.num_cells, cfg.users_per_cell, cfg.num_units
            );
            println!(
                "  closed form: median {:.3} ms/solve, {:.3} ms in subproblems",
                report.closed_wall_ms, report.closed_subproblem_ms
            );
            println!(
                "  reference:   median {:.3} ms/solve, {:.3} ms in subproblems",
                report.oracle_wall_ms, report.oracle_subproblem_ms
            );
            println!(
                "  speedup: {:.1}x wall, {:.1}x subproblem time, objective gap {:.2e}",
                report.wall_speedup(),
                report.subproblem_speedup(),
                report.objective_gap_rel
            );
            Ok(())
        }
        Cmd::Selftest => {
            for line in selftest()? {
                println!("{line}");
            }
            println!("all checks passed");
            Ok(())
        }
    }
}
