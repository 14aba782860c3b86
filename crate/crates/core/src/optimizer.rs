//! Block-coordinate fixed-point loop with SQUAREM acceleration.
//!
//! One outer iteration refreshes the fractional-programming auxiliaries,
//! reassembles the per-user quadratics, and then visits every block (one
//! transmissive unit under per-unit budgets, one whole cell under the
//! sum-power baseline). Each block visit applies the minorize-maximize map
//! `F` twice, extrapolates the two steps with the SQUAREM steplength
//! `tau = -||r|| / ||v||`, projects back onto the power ball, and walks `tau`
//! toward -1 while the extrapolated point fails to improve the true max-min
//! objective. `tau = -1` reproduces the plain double step `F(F(x))` exactly;
//! if even that fails to improve, the block keeps its current value, so the
//! reported objective trace is non-decreasing by construction.

use crate::channel::{stream_id, stream_rng, ChannelSet, STREAM_INIT};
use crate::config::{InitScheme, SystemConfig};
use crate::fp::{
    assemble_coefficients, eval_transformed_rate, update_gamma, update_omega, AuxiliaryState,
    QuadraticCoefficients,
};
use crate::oracle::projected_gradient_oracle;
use crate::rates::{self, BeamformerSet, PowerConstraint, RateError, RateReport};
use crate::subproblem::{
    mm_alpha, mm_linear, reduce_to_cell, reduce_to_subvector, softmin, softmin_weights,
    solve_ball_qp, SolverError, SubproblemCoeffs,
};
use crate::{norm_sq, C64};
use rand::Rng;
use rand_distr::StandardNormal;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Extrapolation steplengths with squared residual below this are treated as
/// already converged and skip the acceleration.
const SQUAREM_RESIDUAL_FLOOR: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Subproblem(#[from] SolverError),
    #[error(transparent)]
    Power(#[from] RateError),
}

/// How each block's concave quadratic is maximised.
#[derive(Debug, Clone)]
pub enum SubproblemPath {
    /// The closed-form ball maximizer; the production path.
    ClosedForm,
    /// The iterative reference solver, for certification and benchmarks.
    ProjectedGradient(crate::oracle::OracleSettings),
}

/// Snapshot taken at the end of each outer iteration.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iter: usize,
    /// True max-min objective, nats. Non-decreasing across records.
    pub objective_nats: f64,
    /// Worst per-user rate of each cell, nats.
    pub cell_min_rates: Vec<f64>,
    /// Steplength halvings spent across all block updates this iteration.
    pub backtracks: u32,
    /// Increase of the surrogate objective from refreshing the auxiliaries.
    pub aux_gain_nats: f64,
    /// Worst radiated-to-budgeted power ratio over the active constraints.
    pub max_power_ratio: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    /// Whether the improvement threshold stopped the loop (as opposed to the
    /// iteration cap).
    pub converged: bool,
    /// Time spent strictly inside the block maximizer calls.
    pub subproblem_time: Duration,
}

#[derive(Debug)]
pub struct RunResult {
    pub beams: BeamformerSet,
    pub trace: IterationTrace,
    pub report: RateReport,
}

/// Starting beamformers. Both schemes meet every per-unit budget with
/// equality, which also saturates the pooled sum-power budget, so one common
/// starting point serves either constraint set.
pub fn initial_beams(channels: &ChannelSet, cfg: &SystemConfig, trial: u32) -> BeamformerSet {
    let (gc, kc, n) = (cfg.num_cells, cfg.users_per_cell, cfg.num_units);
    let mut beams = BeamformerSet::zeros(gc, kc, n);
    match cfg.init {
        InitScheme::MatchedPhase => {
            let amp = (cfg.unit_power / kc as f64).sqrt();
            for g in 0..gc {
                for k in 0..kc {
                    let h = channels.channel(g, g, k);
                    let beam = beams.user_beam_mut(g, k);
                    for t in 0..n {
                        let m = h[t].norm();
                        beam[t] = if m > 0.0 {
                            amp * h[t] / m
                        } else {
                            C64::new(amp, 0.0)
                        };
                    }
                }
            }
        }
        InitScheme::RandomFeasible => {
            for g in 0..gc {
                for k in 0..kc {
                    let mut rng = stream_rng(
                        cfg.rng_seed,
                        stream_id(STREAM_INIT, trial as u64, 0, g as u64, k as u64),
                    );
                    for v in beams.user_beam_mut(g, k) {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        *v = C64::new(re, im);
                    }
                }
            }
            for g in 0..gc {
                for t in 0..n {
                    let x = beams.subvector(g, t);
                    let scale = (cfg.unit_power / norm_sq(&x)).sqrt();
                    let scaled: Vec<C64> = x.iter().map(|z| z * scale).collect();
                    beams.set_subvector(g, t, &scaled);
                }
            }
        }
    }
    beams
}

/// One application of the minorize-maximize map: smooth, minorize, and
/// maximise the aggregate quadratic over the ball. Returns the new block and
/// the time spent inside the final maximizer call.
pub fn fixed_point_map(
    sub: &SubproblemCoeffs,
    mu: f64,
    x0: &[C64],
    path: &SubproblemPath,
) -> Result<(Vec<C64>, Duration), SolverError> {
    let dim = x0.len();
    let mut alpha_bar = 0.0;
    let mut b8 = vec![C64::new(0.0, 0.0); dim];
    for cell in &sub.terms {
        let vals: Vec<f64> = cell.iter().map(|t| t.eval(x0)).collect();
        let value = softmin(&vals, mu);
        let weights = softmin_weights(&vals, mu);
        let alpha = mm_alpha(cell, mu, sub.radius_sq);
        let (b6, _) = mm_linear(cell, &weights, value, alpha, x0);
        alpha_bar += alpha;
        for t in 0..dim {
            b8[t] += b6[t];
        }
    }
    let clock = Instant::now();
    let x = match path {
        SubproblemPath::ClosedForm => solve_ball_qp(alpha_bar, &b8, sub.radius_sq)?,
        SubproblemPath::ProjectedGradient(settings) => {
            projected_gradient_oracle(alpha_bar, &b8, sub.radius_sq, settings)?
        }
    };
    Ok((x, clock.elapsed()))
}

/// SQUAREM extrapolation of two fixed-point steps, projected onto the ball.
/// `tau = -1` reproduces `f2` exactly.
pub fn squarem_candidate(x0: &[C64], f1: &[C64], f2: &[C64], tau: f64, radius_sq: f64) -> Vec<C64> {
    let mut cand: Vec<C64> = (0..x0.len())
        .map(|t| {
            let j1 = f1[t] - x0[t];
            let j2 = f2[t] - f1[t] - j1;
            x0[t] - 2.0 * tau * j1 + tau * tau * j2
        })
        .collect();
    project_to_ball(&mut cand, radius_sq);
    cand
}

fn project_to_ball(x: &mut [C64], radius_sq: f64) {
    let p = norm_sq(x);
    if p > radius_sq {
        let scale = (radius_sq / p).sqrt();
        for v in x.iter_mut() {
            *v *= scale;
        }
    }
}

#[derive(Clone, Copy)]
enum Block {
    Unit(usize, usize),
    Cell(usize),
}

struct BlockOutcome {
    objective: f64,
    backtracks: u32,
}

/// Updates one block in place, never letting the true objective decrease.
#[allow(clippy::too_many_arguments)]
fn update_block(
    channels: &ChannelSet,
    cfg: &SystemConfig,
    beams: &mut BeamformerSet,
    coeffs: &QuadraticCoefficients,
    mu: f64,
    block: Block,
    path: &SubproblemPath,
    obj_old: f64,
    subproblem_time: &mut Duration,
) -> Result<BlockOutcome, SolverError> {
    let (sub, x0) = match block {
        Block::Unit(g, n) => (
            reduce_to_subvector(coeffs, beams, g, n, cfg.unit_power),
            beams.subvector(g, n),
        ),
        Block::Cell(g) => (
            reduce_to_cell(coeffs, beams, g, cfg.unit_power),
            beams.cell(g).to_vec(),
        ),
    };
    let (f1, t1) = fixed_point_map(&sub, mu, &x0, path)?;
    let (f2, t2) = fixed_point_map(&sub, mu, &f1, path)?;
    *subproblem_time += t1 + t2;

    let write = |beams: &mut BeamformerSet, x: &[C64]| match block {
        Block::Unit(g, n) => beams.set_subvector(g, n, x),
        Block::Cell(g) => beams.cell_mut(g).copy_from_slice(x),
    };
    let try_point = |beams: &mut BeamformerSet, x: &[C64]| -> Option<f64> {
        write(beams, x);
        let obj = rates::objective(channels, beams, cfg);
        (obj >= obj_old).then_some(obj)
    };

    let res_sq: f64 = (0..x0.len())
        .map(|t| {
            let j1 = f1[t] - x0[t];
            (f2[t] - f1[t] - j1).norm_sqr()
        })
        .sum();

    let mut backtracks = 0;
    if res_sq.sqrt() >= SQUAREM_RESIDUAL_FLOOR {
        let j1_norm: f64 = (0..x0.len())
            .map(|t| (f1[t] - x0[t]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let mut tau = -j1_norm / res_sq.sqrt();
        loop {
            let cand = squarem_candidate(&x0, &f1, &f2, tau, sub.radius_sq);
            if let Some(obj) = try_point(beams, &cand) {
                return Ok(BlockOutcome {
                    objective: obj,
                    backtracks,
                });
            }
            if backtracks >= cfg.max_backtracks {
                break;
            }
            tau = (tau - 1.0) / 2.0;
            backtracks += 1;
        }
    }
    // acceleration exhausted: fall back to the plain double step, and if even
    // that loses ground on the true objective, keep the current block
    if let Some(obj) = try_point(beams, &f2) {
        return Ok(BlockOutcome {
            objective: obj,
            backtracks,
        });
    }
    write(beams, &x0);
    Ok(BlockOutcome {
        objective: obj_old,
        backtracks,
    })
}

fn surrogate_objective(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    cfg: &SystemConfig,
    aux: &AuxiliaryState,
) -> f64 {
    (0..cfg.num_cells)
        .map(|g| {
            (0..cfg.users_per_cell)
                .map(|k| eval_transformed_rate(channels, beams, cfg, aux, g, k))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

fn cell_minima(channels: &ChannelSet, beams: &BeamformerSet, cfg: &SystemConfig) -> Vec<f64> {
    (0..cfg.num_cells)
        .map(|g| {
            (0..cfg.users_per_cell)
                .map(|k| rates::user_rate(channels, beams, cfg, g, k))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Runs the full solver from `init` under the given power constraint.
pub fn run(
    channels: &ChannelSet,
    cfg: &SystemConfig,
    init: BeamformerSet,
    scheme: PowerConstraint,
    path: &SubproblemPath,
) -> Result<RunResult, OptimizeError> {
    let mut beams = init;
    let mut aux = AuxiliaryState::new(cfg);
    let mut obj = rates::objective(channels, &beams, cfg);
    let mut trace = IterationTrace::default();

    for iter in 0..cfg.max_outer_iters {
        let clock = Instant::now();
        let prev_obj = obj;
        let mu = cfg.smoothing.at(iter);

        let before = surrogate_objective(channels, &beams, cfg, &aux);
        update_gamma(channels, &beams, cfg, &mut aux);
        update_omega(channels, &beams, cfg, &mut aux);
        let aux_gain = surrogate_objective(channels, &beams, cfg, &aux) - before;

        let coeffs = assemble_coefficients(channels, cfg, &aux);
        let mut backtracks = 0;
        match scheme {
            PowerConstraint::PerUnit => {
                for g in 0..cfg.num_cells {
                    for n in 0..cfg.num_units {
                        let out = update_block(
                            channels,
                            cfg,
                            &mut beams,
                            &coeffs,
                            mu,
                            Block::Unit(g, n),
                            path,
                            obj,
                            &mut trace.subproblem_time,
                        )?;
                        obj = out.objective;
                        backtracks += out.backtracks;
                    }
                }
            }
            PowerConstraint::SumPower => {
                for g in 0..cfg.num_cells {
                    let out = update_block(
                        channels,
                        cfg,
                        &mut beams,
                        &coeffs,
                        mu,
                        Block::Cell(g),
                        path,
                        obj,
                        &mut trace.subproblem_time,
                    )?;
                    obj = out.objective;
                    backtracks += out.backtracks;
                }
            }
        }

        trace.records.push(IterationRecord {
            iter: iter + 1,
            objective_nats: obj,
            cell_min_rates: cell_minima(channels, &beams, cfg),
            backtracks,
            aux_gain_nats: aux_gain,
            max_power_ratio: beams.max_power_ratio(scheme, cfg.unit_power),
            wall_ms: clock.elapsed().as_secs_f64() * 1e3,
        });

        if obj - prev_obj < cfg.convergence_tol {
            trace.converged = true;
            break;
        }
    }

    let report = rates::rate_report(channels, &beams, cfg, scheme)?;
    Ok(RunResult {
        beams,
        trace,
        report,
    })
}
