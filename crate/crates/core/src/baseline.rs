//! Sum-power baseline: the conventional design that pools each cell's budget
//! into a single `N * P` constraint instead of one budget per transmissive
//! unit. It runs the very same smoothing, minorization, and acceleration loop
//! as the per-unit scheme; the only differences are the block (the whole cell
//! beamformer at once) and the ball radius. With `N = 1` the two constraint
//! sets coincide and both pipelines must produce the same result.

use crate::channel::ChannelSet;
use crate::config::SystemConfig;
use crate::optimizer::{run, OptimizeError, RunResult, SubproblemPath};
use crate::rates::{BeamformerSet, PowerConstraint};

/// Solves the max-min problem under the pooled per-cell power budget.
pub fn solve_sum_power_baseline(
    channels: &ChannelSet,
    cfg: &SystemConfig,
    init: BeamformerSet,
    path: &SubproblemPath,
) -> Result<RunResult, OptimizeError> {
    run(channels, cfg, init, PowerConstraint::SumPower, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{drop_users, generate_channels};
    use crate::config::RawConfig;
    use crate::optimizer::initial_beams;

    #[test]
    fn baseline_trace_is_monotone_and_respects_the_pooled_budget() {
        let mut raw = RawConfig::default();
        raw.num_units = 4;
        raw.max_outer_iters = 30;
        let cfg = SystemConfig::from_raw(&raw).unwrap();
        let drop = drop_users(&cfg, 8);
        let ch = generate_channels(&cfg, &drop, 8).unwrap();
        let init = initial_beams(&ch, &cfg, 8);
        let result =
            solve_sum_power_baseline(&ch, &cfg, init, &SubproblemPath::ClosedForm).unwrap();
        for pair in result.trace.records.windows(2) {
            assert!(pair[1].objective_nats >= pair[0].objective_nats);
        }
        for rec in &result.trace.records {
            assert!(rec.max_power_ratio <= 1.0 + 1e-9);
        }
        // pooling the budget can only help: the per-unit optimum is feasible here
        let per_unit = run(
            &ch,
            &cfg,
            initial_beams(&ch, &cfg, 8),
            PowerConstraint::PerUnit,
            &SubproblemPath::ClosedForm,
        )
        .unwrap();
        assert!(
            result.report.objective_nats
                >= per_unit.report.objective_nats - 0.2 * per_unit.report.objective_nats.abs(),
            "pooled budget should be roughly competitive"
        );
    }

    #[test]
    fn single_unit_arrays_make_both_schemes_identical() {
        let mut raw = RawConfig::default();
        raw.num_units = 1;
        raw.users_per_cell = 3;
        raw.max_outer_iters = 40;
        let cfg = SystemConfig::from_raw(&raw).unwrap();
        let drop = drop_users(&cfg, 21);
        let ch = generate_channels(&cfg, &drop, 21).unwrap();
        let init = initial_beams(&ch, &cfg, 21);
        let per_unit = run(
            &ch,
            &cfg,
            init.clone(),
            PowerConstraint::PerUnit,
            &SubproblemPath::ClosedForm,
        )
        .unwrap();
        let pooled =
            solve_sum_power_baseline(&ch, &cfg, init, &SubproblemPath::ClosedForm).unwrap();
        let (a, b) = (per_unit.report.objective_nats, pooled.report.objective_nats);
        assert!(
            (a - b).abs() <= 1e-6 * a.abs().max(1.0),
            "per-unit {a} vs pooled {b}"
        );
    }
}
