//! Experiment drivers: single-scenario solves, Monte Carlo parameter sweeps,
//! runtime benchmarks, and a self-test that cross-checks the production
//! numerics against their reference routes.
//!
//! Randomness discipline: every random quantity (user drop, fading, random
//! init) is drawn from its own counter-derived stream keyed by the trial
//! index and the entity indices, never from one shared sequential generator.
//! Two sweeps that share a trial index therefore see identical user drops and
//! identical fading wherever dimensions allow, which is what makes the
//! monotonicity comparisons across swept values meaningful rather than noise.

use crate::baseline::solve_sum_power_baseline;
use crate::channel::{drop_users, generate_channels, ChannelError};
use crate::config::{ConfigError, RawConfig, SystemConfig};
use crate::optimizer::{
    initial_beams, run, IterationTrace, OptimizeError, RunResult, SubproblemPath,
};
use crate::oracle::OracleSettings;
use crate::rates::PowerConstraint;
use rayon::prelude::*;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("self-test failed: {0}")]
    SelfTest(String),
}

/// Which power-constraint scheme a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Per-unit power budgets, the architecture under study.
    Trtc,
    /// Pooled per-cell budget, the conventional comparison point.
    Baseline,
}

impl Scheme {
    pub fn constraint(self) -> PowerConstraint {
        match self {
            Scheme::Trtc => PowerConstraint::PerUnit,
            Scheme::Baseline => PowerConstraint::SumPower,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Trtc => "trtc",
            Scheme::Baseline => "baseline",
        })
    }
}

impl FromStr for Scheme {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "trtc" => Ok(Scheme::Trtc),
            "baseline" => Ok(Scheme::Baseline),
            other => Err(ExperimentError::Invalid(format!(
                "unknown scheme `{other}`, expected `trtc` or `baseline`"
            ))),
        }
    }
}

/// Drops users, generates channels, and runs the chosen solver. Deterministic
/// in `(cfg, trial)`.
pub fn run_scenario(
    cfg: &SystemConfig,
    trial: u32,
    scheme: Scheme,
    path: &SubproblemPath,
) -> Result<RunResult, ExperimentError> {
    let drop = drop_users(cfg, trial);
    let channels = generate_channels(cfg, &drop, trial)?;
    let init = initial_beams(&channels, cfg, trial);
    let result = match scheme {
        Scheme::Trtc => run(&channels, cfg, init, PowerConstraint::PerUnit, path)?,
        Scheme::Baseline => solve_sum_power_baseline(&channels, cfg, init, path)?,
    };
    Ok(result)
}

/// Scenario parameter a sweep varies, one value per set of Monte Carlo trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    UnitPowerDbm,
    UsersPerCell,
    CellRadius,
    NumCells,
    PathlossExponent,
    NumUnits,
}

impl SweepParam {
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::UnitPowerDbm => "unit_power_dbm",
            SweepParam::UsersPerCell => "users_per_cell",
            SweepParam::CellRadius => "cell_radius",
            SweepParam::NumCells => "num_cells",
            SweepParam::PathlossExponent => "pathloss_exponent",
            SweepParam::NumUnits => "num_units",
        }
    }

    fn is_integer(self) -> bool {
        matches!(
            self,
            SweepParam::UsersPerCell | SweepParam::NumCells | SweepParam::NumUnits
        )
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SweepParam {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "unit_power_dbm" => Ok(SweepParam::UnitPowerDbm),
            "users_per_cell" => Ok(SweepParam::UsersPerCell),
            "cell_radius" => Ok(SweepParam::CellRadius),
            "num_cells" => Ok(SweepParam::NumCells),
            "pathloss_exponent" => Ok(SweepParam::PathlossExponent),
            "num_units" => Ok(SweepParam::NumUnits),
            other => Err(ExperimentError::Invalid(format!(
                "unknown sweep parameter `{other}`"
            ))),
        }
    }
}

/// Applies one swept value on top of a base raw config and validates the
/// result. Integer parameters reject fractional values instead of rounding.
pub fn apply_sweep_value(
    base: &RawConfig,
    param: SweepParam,
    value: f64,
) -> Result<SystemConfig, ExperimentError> {
    let mut raw = base.clone();
    if param.is_integer() {
        if value.fract() != 0.0 || value < 1.0 || value > u32::MAX as f64 {
            return Err(ExperimentError::Invalid(format!(
                "sweep value {value} for `{param}` must be a positive integer"
            )));
        }
        let v = value as usize;
        match param {
            SweepParam::UsersPerCell => raw.users_per_cell = v,
            SweepParam::NumCells => raw.num_cells = v,
            SweepParam::NumUnits => raw.num_units = v,
            _ => unreachable!(),
        }
    } else {
        match param {
            SweepParam::UnitPowerDbm => raw.unit_power_dbm = value,
            SweepParam::CellRadius => raw.cell_radius = value,
            SweepParam::PathlossExponent => raw.pathloss_exponent = value,
            _ => unreachable!(),
        }
    }
    Ok(SystemConfig::from_raw(&raw)?)
}

/// One Monte Carlo sweep: a parameter, its values, the trial count per value,
/// and which schemes to run at every point.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub trials: u32,
    pub schemes: Vec<Scheme>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.values.is_empty() {
            return Err(ExperimentError::Invalid(
                "sweep needs at least one value".into(),
            ));
        }
        if self.trials == 0 {
            return Err(ExperimentError::Invalid(
                "sweep needs at least one trial".into(),
            ));
        }
        if self.schemes.is_empty() {
            return Err(ExperimentError::Invalid(
                "sweep needs at least one scheme".into(),
            ));
        }
        Ok(())
    }
}

/// Aggregated result for one (value, scheme) sweep point. Field names match
/// the CSV columns.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub scheme: Scheme,
    pub trial_count: u32,
    /// Mean final objective across trials, bits/s/Hz.
    pub mean_sumrate_bps_hz: f64,
    /// Sample standard deviation of the final objective, bits/s/Hz.
    pub std_sumrate: f64,
    pub mean_iters: f64,
    pub mean_ms_per_solve: f64,
}

fn mean_and_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs the sweep, fanning trials out across the thread pool. Rows come back
/// in (value, scheme) input order; per-trial results are reduced in trial
/// order, so repeated runs aggregate identically.
pub fn run_sweep(
    base: &RawConfig,
    spec: &SweepSpec,
    path: &SubproblemPath,
) -> Result<Vec<SweepRow>, ExperimentError> {
    spec.validate()?;
    // surface config problems for every point before burning solver time
    let cfgs = spec
        .values
        .iter()
        .map(|&v| apply_sweep_value(base, spec.param, v))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::with_capacity(spec.values.len() * spec.schemes.len());
    for (&value, cfg) in spec.values.iter().zip(&cfgs) {
        for &scheme in &spec.schemes {
            let per_trial: Vec<(f64, f64, f64)> = (0..spec.trials)
                .into_par_iter()
                .map(|trial| {
                    let clock = Instant::now();
                    let result = run_scenario(cfg, trial, scheme, path)?;
                    let ms = clock.elapsed().as_secs_f64() * 1e3;
                    Ok((
                        result.report.objective_bits(),
                        result.trace.records.len() as f64,
                        ms,
                    ))
                })
                .collect::<Result<_, ExperimentError>>()?;
            let rates: Vec<f64> = per_trial.iter().map(|t| t.0).collect();
            let iters: Vec<f64> = per_trial.iter().map(|t| t.1).collect();
            let times: Vec<f64> = per_trial.iter().map(|t| t.2).collect();
            let (mean_rate, std_rate) = mean_and_std(&rates);
            rows.push(SweepRow {
                param: spec.param,
                value,
                scheme,
                trial_count: spec.trials,
                mean_sumrate_bps_hz: mean_rate,
                std_sumrate: std_rate,
                mean_iters: mean_and_std(&iters).0,
                mean_ms_per_solve: mean_and_std(&times).0,
            });
        }
    }
    Ok(rows)
}

/// Writes sweep rows as CSV with the documented header. Numeric formatting is
/// fixed so identical rows always serialize to identical bytes.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "sweep_param",
        "value",
        "scheme",
        "trial_count",
        "mean_sumrate_bps_hz",
        "std_sumrate",
        "mean_iters",
        "mean_ms_per_solve",
    ])?;
    for r in rows {
        w.write_record(&[
            r.param.to_string(),
            format!("{}", r.value),
            r.scheme.to_string(),
            r.trial_count.to_string(),
            format!("{:.6}", r.mean_sumrate_bps_hz),
            format!("{:.6}", r.std_sumrate),
            format!("{:.2}", r.mean_iters),
            format!("{:.3}", r.mean_ms_per_solve),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one solve's per-iteration trace as CSV.
pub fn write_trace_csv<W: Write>(trace: &IterationTrace, out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "iter",
        "objective_nats",
        "sumrate_bps_hz",
        "backtracks",
        "aux_gain_nats",
        "max_power_ratio",
        "wall_ms",
    ])?;
    for rec in &trace.records {
        w.write_record(&[
            rec.iter.to_string(),
            format!("{:.12}", rec.objective_nats),
            format!("{:.12}", rec.objective_nats / std::f64::consts::LN_2),
            rec.backtracks.to_string(),
            format!("{:.3e}", rec.aux_gain_nats),
            format!("{:.9}", rec.max_power_ratio),
            format!("{:.3}", rec.wall_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Median timings of the closed-form and iterative-reference subproblem paths
/// over the same instances.
#[derive(Debug, Clone)]
pub struct BenchReport {
    pub trials: u32,
    /// Median wall-clock per full solve, ms.
    pub closed_wall_ms: f64,
    pub oracle_wall_ms: f64,
    /// Median time spent strictly inside the block maximizer, ms.
    pub closed_subproblem_ms: f64,
    pub oracle_subproblem_ms: f64,
    /// Largest relative gap between the two paths' final objectives.
    pub objective_gap_rel: f64,
}

impl BenchReport {
    pub fn wall_speedup(&self) -> f64 {
        self.oracle_wall_ms / self.closed_wall_ms
    }
    pub fn subproblem_speedup(&self) -> f64 {
        self.oracle_subproblem_ms / self.closed_subproblem_ms
    }
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

/// Times both subproblem paths on the same instances, sequentially so wall
/// clocks are not distorted by thread contention.
pub fn bench_runtime(cfg: &SystemConfig, trials: u32) -> Result<BenchReport, ExperimentError> {
    if trials < 3 {
        return Err(ExperimentError::Invalid(
            "bench needs at least 3 trials for a median".into(),
        ));
    }
    let oracle_path = SubproblemPath::ProjectedGradient(OracleSettings::default());
    let mut closed_wall = Vec::new();
    let mut oracle_wall = Vec::new();
    let mut closed_sub = Vec::new();
    let mut oracle_sub = Vec::new();
    let mut gap: f64 = 0.0;
    for trial in 0..trials {
        let drop = drop_users(cfg, trial);
        let channels = generate_channels(cfg, &drop, trial)?;
        let init = initial_beams(&channels, cfg, trial);

        let clock = Instant::now();
        let closed = run(
            &channels,
            cfg,
            init.clone(),
            PowerConstraint::PerUnit,
            &SubproblemPath::ClosedForm,
        )?;
        closed_wall.push(clock.elapsed().as_secs_f64() * 1e3);
        closed_sub.push(closed.trace.subproblem_time.as_secs_f64() * 1e3);

        let clock = Instant::now();
        let oracle = run(&channels, cfg, init, PowerConstraint::PerUnit, &oracle_path)?;
        oracle_wall.push(clock.elapsed().as_secs_f64() * 1e3);
        oracle_sub.push(oracle.trace.subproblem_time.as_secs_f64() * 1e3);

        let a = closed.report.objective_nats;
        let b = oracle.report.objective_nats;
        gap = gap.max((a - b).abs() / a.abs().max(1.0));
    }
    Ok(BenchReport {
        trials,
        closed_wall_ms: median(&mut closed_wall),
        oracle_wall_ms: median(&mut oracle_wall),
        closed_subproblem_ms: median(&mut closed_sub),
        oracle_subproblem_ms: median(&mut oracle_sub),
        objective_gap_rel: gap,
    })
}

/// Cross-checks the production numerics end to end on small instances: the
/// surrogate is tight after an auxiliary refresh, the block quadratic agrees
/// with the full surrogate, the closed-form ball maximizer matches the
/// iterative reference, the smoothed minimum brackets the true minimum, and a
/// short solve is monotone and feasible. Returns one line per check.
pub fn selftest() -> Result<Vec<String>, ExperimentError> {
    use crate::config::InitScheme;
    use crate::fp::{
        assemble_coefficients, eval_transformed_rate, update_gamma, update_omega, AuxiliaryState,
    };
    use crate::oracle::projected_gradient_oracle;
    use crate::rates::user_rate;
    use crate::subproblem::{reduce_to_subvector, softmin, solve_ball_qp};
    use crate::{norm_sq, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    let mut lines = Vec::new();
    let instances = 5u32;

    let mut worst_tight: f64 = 0.0;
    let mut worst_reduce: f64 = 0.0;
    for trial in 0..instances {
        let mut raw = RawConfig::default();
        raw.num_units = 4;
        raw.init = InitScheme::RandomFeasible;
        let cfg = SystemConfig::from_raw(&raw)?;
        let drop = drop_users(&cfg, trial);
        let channels = generate_channels(&cfg, &drop, trial)?;
        let beams = initial_beams(&channels, &cfg, trial);
        let mut aux = AuxiliaryState::new(&cfg);
        update_gamma(&channels, &beams, &cfg, &mut aux);
        update_omega(&channels, &beams, &cfg, &mut aux);

        for g in 0..cfg.num_cells {
            for k in 0..cfg.users_per_cell {
                let direct = user_rate(&channels, &beams, &cfg, g, k);
                let surrogate = eval_transformed_rate(&channels, &beams, &cfg, &aux, g, k);
                worst_tight = worst_tight.max((surrogate - direct).abs() / direct.max(1e-30));
            }
        }

        let coeffs = assemble_coefficients(&channels, &cfg, &aux);
        let mut rng = ChaCha8Rng::seed_from_u64(900 + trial as u64);
        for g in 0..cfg.num_cells {
            let n = trial as usize % cfg.num_units;
            let sub = reduce_to_subvector(&coeffs, &beams, g, n, cfg.unit_power);
            let mut x: Vec<C64> = (0..cfg.users_per_cell)
                .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let scale = (cfg.unit_power / norm_sq(&x)).sqrt();
            x.iter_mut().for_each(|v| *v *= scale);
            let mut probe = beams.clone();
            probe.set_subvector(g, n, &x);
            for j in 0..cfg.num_cells {
                for k in 0..cfg.users_per_cell {
                    let via_block = sub.terms[j][k].eval(&x);
                    let via_full = eval_transformed_rate(&channels, &probe, &cfg, &aux, j, k);
                    worst_reduce =
                        worst_reduce.max((via_block - via_full).abs() / via_full.abs().max(1e-30));
                }
            }
        }
    }
    if worst_tight > 1e-10 {
        return Err(ExperimentError::SelfTest(format!(
            "surrogate not tight at refreshed auxiliaries: relative error {worst_tight:.2e}"
        )));
    }
    lines.push(format!(
        "ok surrogate tightness         {instances} instances, worst relative error {worst_tight:.1e}"
    ));
    if worst_reduce > 1e-10 {
        return Err(ExperimentError::SelfTest(format!(
            "block quadratic disagrees with full surrogate: relative error {worst_reduce:.2e}"
        )));
    }
    lines.push(format!(
        "ok block reduction             {instances} instances, worst relative error {worst_reduce:.1e}"
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut worst_qp: f64 = 0.0;
    for _ in 0..20 {
        let dim = 1 + rng.gen_range(0..5);
        let alpha = -(0.1 + 10.0 * rng.gen::<f64>());
        let b8: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let radius_sq = 0.5 + 2.0 * rng.gen::<f64>();
        let value = |x: &[C64]| alpha * norm_sq(x) + 2.0 * crate::dot_conj(&b8, x).re;
        let closed = solve_ball_qp(alpha, &b8, radius_sq)
            .map_err(|e| ExperimentError::SelfTest(e.to_string()))?;
        let reference =
            projected_gradient_oracle(alpha, &b8, radius_sq, &OracleSettings::default())
                .map_err(|e| ExperimentError::SelfTest(e.to_string()))?;
        let (a, b) = (value(&closed), value(&reference));
        worst_qp = worst_qp.max((a - b).abs() / a.abs().max(1e-12));
    }
    if worst_qp > 1e-6 {
        return Err(ExperimentError::SelfTest(format!(
            "ball maximizer disagrees with iterative reference: relative gap {worst_qp:.2e}"
        )));
    }
    lines.push(format!(
        "ok ball maximizer vs reference 20 instances, worst relative gap {worst_qp:.1e}"
    ));

    let mu = 25.0;
    for _ in 0..200 {
        let vals: Vec<f64> = (0..4).map(|_| 10.0 * (rng.gen::<f64>() - 0.2)).collect();
        let s = softmin(&vals, mu);
        let vmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let lower = vmin - (vals.len() as f64).ln() / mu;
        if !(lower <= s && s <= vmin) {
            return Err(ExperimentError::SelfTest(format!(
                "smoothed minimum {s} escapes its bracket [{lower}, {vmin}]"
            )));
        }
    }
    lines.push("ok smoothed-minimum bracket    200 random vectors".to_string());

    let mut raw = RawConfig::default();
    raw.num_units = 4;
    raw.max_outer_iters = 15;
    let cfg = SystemConfig::from_raw(&raw)?;
    let result = run_scenario(&cfg, 0, Scheme::Trtc, &SubproblemPath::ClosedForm)?;
    for pair in result.trace.records.windows(2) {
        if pair[1].objective_nats < pair[0].objective_nats {
            return Err(ExperimentError::SelfTest(format!(
                "objective trace decreased: {} -> {}",
                pair[0].objective_nats, pair[1].objective_nats
            )));
        }
    }
    if let Some(bad) = result
        .trace
        .records
        .iter()
        .find(|r| r.max_power_ratio > 1.0 + 1e-9)
    {
        return Err(ExperimentError::SelfTest(format!(
            "iterate exceeded its power budget by ratio {}",
            bad.max_power_ratio
        )));
    }
    lines.push(format!(
        "ok short solve                 monotone and feasible over {} iterations",
        result.trace.records.len()
    ));

    Ok(lines)
}
