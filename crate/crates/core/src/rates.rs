//! Beamformer storage, SINR and rate evaluation, and power-budget checks.
//!
//! Rates are natural-log throughputs (nats per channel use) everywhere inside
//! the crate; conversion to bits/s/Hz happens only at reporting boundaries.

use crate::channel::ChannelSet;
use crate::config::SystemConfig;
use crate::{dot_conj, norm_sq, C64};
use thiserror::Error;

/// Relative slack allowed when checking power budgets, to absorb the rounding
/// of ball projections.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RateError {
    #[error(
        "unit {unit} of cell {cell} radiates {power:.3e} W against a budget of {budget:.3e} W"
    )]
    UnitPowerExceeded {
        cell: usize,
        unit: usize,
        power: f64,
        budget: f64,
    },
    #[error("cell {cell} radiates {power:.3e} W against a total budget of {budget:.3e} W")]
    CellPowerExceeded {
        cell: usize,
        power: f64,
        budget: f64,
    },
}

/// Transmit beamformers of every cell. Cell `g` holds one length-`N` beam per
/// user, stacked user-major, so entry `n` of user `k` sits at `k * N + n`
/// within the cell vector. Unit `n`'s radiated power in cell `g` is the sum
/// of `|f_{g,k}[n]|^2` over users `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    pub num_cells: usize,
    pub users_per_cell: usize,
    pub num_units: usize,
    data: Vec<C64>,
}

impl BeamformerSet {
    pub fn zeros(num_cells: usize, users_per_cell: usize, num_units: usize) -> Self {
        BeamformerSet {
            num_cells,
            users_per_cell,
            num_units,
            data: vec![C64::new(0.0, 0.0); num_cells * users_per_cell * num_units],
        }
    }

    fn cell_span(&self) -> usize {
        self.users_per_cell * self.num_units
    }

    /// Full stacked beamformer of one cell.
    pub fn cell(&self, g: usize) -> &[C64] {
        let s = self.cell_span();
        &self.data[g * s..(g + 1) * s]
    }

    pub fn cell_mut(&mut self, g: usize) -> &mut [C64] {
        let s = self.cell_span();
        &mut self.data[g * s..(g + 1) * s]
    }

    /// Beam serving user `k` of cell `g`.
    pub fn user_beam(&self, g: usize, k: usize) -> &[C64] {
        let idx = (g * self.users_per_cell + k) * self.num_units;
        &self.data[idx..idx + self.num_units]
    }

    pub fn user_beam_mut(&mut self, g: usize, k: usize) -> &mut [C64] {
        let idx = (g * self.users_per_cell + k) * self.num_units;
        &mut self.data[idx..idx + self.num_units]
    }

    /// The K entries of cell `g` that unit `n` radiates, one per user.
    pub fn subvector(&self, g: usize, n: usize) -> Vec<C64> {
        (0..self.users_per_cell)
            .map(|k| self.data[(g * self.users_per_cell + k) * self.num_units + n])
            .collect()
    }

    pub fn set_subvector(&mut self, g: usize, n: usize, x: &[C64]) {
        debug_assert_eq!(x.len(), self.users_per_cell);
        for (k, v) in x.iter().enumerate() {
            self.data[(g * self.users_per_cell + k) * self.num_units + n] = *v;
        }
    }

    /// Power radiated by unit `n` of cell `g`.
    pub fn unit_power(&self, g: usize, n: usize) -> f64 {
        (0..self.users_per_cell)
            .map(|k| self.data[(g * self.users_per_cell + k) * self.num_units + n].norm_sqr())
            .sum()
    }

    /// Total power radiated by cell `g`.
    pub fn cell_power(&self, g: usize) -> f64 {
        norm_sq(self.cell(g))
    }

    /// Largest ratio of radiated to budgeted power over the constraint set:
    /// per unit for `PerUnit`, per cell against `N * P` for `SumPower`.
    pub fn max_power_ratio(&self, scheme: PowerConstraint, unit_power: f64) -> f64 {
        let mut worst: f64 = 0.0;
        match scheme {
            PowerConstraint::PerUnit => {
                for g in 0..self.num_cells {
                    for n in 0..self.num_units {
                        worst = worst.max(self.unit_power(g, n) / unit_power);
                    }
                }
            }
            PowerConstraint::SumPower => {
                let budget = self.num_units as f64 * unit_power;
                for g in 0..self.num_cells {
                    worst = worst.max(self.cell_power(g) / budget);
                }
            }
        }
        worst
    }
}

/// Which power budget a beamformer set is held to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerConstraint {
    /// Every transmissive unit has its own budget `P`.
    PerUnit,
    /// Conventional relaxation: one budget `N * P` per cell.
    SumPower,
}

/// Errors if any budget of `scheme` is exceeded beyond [`FEASIBILITY_SLACK`].
pub fn check_feasibility(
    beams: &BeamformerSet,
    scheme: PowerConstraint,
    unit_power: f64,
) -> Result<(), RateError> {
    match scheme {
        PowerConstraint::PerUnit => {
            let cap = unit_power * (1.0 + FEASIBILITY_SLACK);
            for g in 0..beams.num_cells {
                for n in 0..beams.num_units {
                    let p = beams.unit_power(g, n);
                    if p > cap {
                        return Err(RateError::UnitPowerExceeded {
                            cell: g,
                            unit: n,
                            power: p,
                            budget: unit_power,
                        });
                    }
                }
            }
        }
        PowerConstraint::SumPower => {
            let budget = beams.num_units as f64 * unit_power;
            let cap = budget * (1.0 + FEASIBILITY_SLACK);
            for g in 0..beams.num_cells {
                let p = beams.cell_power(g);
                if p > cap {
                    return Err(RateError::CellPowerExceeded {
                        cell: g,
                        power: p,
                        budget,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Desired-link response `h_{g,g,k}^H f_{g,k}` and the total received power
/// at user `(g, k)` across every beam of every cell, desired term included.
pub(crate) fn link_response(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    g: usize,
    k: usize,
) -> (C64, f64) {
    let mut total = 0.0;
    let mut desired = C64::new(0.0, 0.0);
    for i in 0..beams.num_cells {
        let h = channels.channel(i, g, k);
        for j in 0..beams.users_per_cell {
            let t = dot_conj(h, beams.user_beam(i, j));
            total += t.norm_sqr();
            if i == g && j == k {
                desired = t;
            }
        }
    }
    (desired, total)
}

/// SINR of user `k` in cell `g`: desired power over all other received
/// power plus noise.
pub fn sinr(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    cfg: &SystemConfig,
    g: usize,
    k: usize,
) -> f64 {
    let (desired, total) = link_response(channels, beams, g, k);
    let s = desired.norm_sqr();
    let interference = (total - s).max(0.0);
    s / (interference + cfg.noise(g, k))
}

/// Natural-log rate of user `k` in cell `g`, nats per channel use.
pub fn user_rate(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    cfg: &SystemConfig,
    g: usize,
    k: usize,
) -> f64 {
    sinr(channels, beams, cfg, g, k).ln_1p()
}

/// Sum over cells of the worst per-user rate, nats. No feasibility check;
/// this is the raw objective the optimizer climbs.
pub fn objective(channels: &ChannelSet, beams: &BeamformerSet, cfg: &SystemConfig) -> f64 {
    let mut total = 0.0;
    for g in 0..cfg.num_cells {
        let mut cell_min = f64::INFINITY;
        for k in 0..cfg.users_per_cell {
            cell_min = cell_min.min(user_rate(channels, beams, cfg, g, k));
        }
        total += cell_min;
    }
    total
}

/// Per-user rates plus the max-min objective for one beamformer set.
#[derive(Debug, Clone)]
pub struct RateReport {
    /// Nats, indexed `g * users_per_cell + k`.
    pub rates: Vec<f64>,
    /// Worst rate in each cell, nats.
    pub cell_min: Vec<f64>,
    /// Index of the worst user in each cell; ties go to the smallest index.
    pub min_user: Vec<usize>,
    /// Sum of `cell_min`, nats.
    pub objective_nats: f64,
}

impl RateReport {
    pub fn objective_bits(&self) -> f64 {
        self.objective_nats / std::f64::consts::LN_2
    }
}

/// Evaluates rates after checking the power budgets of `scheme`.
pub fn rate_report(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    cfg: &SystemConfig,
    scheme: PowerConstraint,
) -> Result<RateReport, RateError> {
    check_feasibility(beams, scheme, cfg.unit_power)?;
    let mut rates = Vec::with_capacity(cfg.num_users());
    let mut cell_min = Vec::with_capacity(cfg.num_cells);
    let mut min_user = Vec::with_capacity(cfg.num_cells);
    for g in 0..cfg.num_cells {
        let mut best = f64::INFINITY;
        let mut who = 0;
        for k in 0..cfg.users_per_cell {
            let r = user_rate(channels, beams, cfg, g, k);
            rates.push(r);
            if r < best {
                best = r;
                who = k;
            }
        }
        cell_min.push(best);
        min_user.push(who);
    }
    let objective_nats = cell_min.iter().sum();
    Ok(RateReport {
        rates,
        cell_min,
        min_user,
        objective_nats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{drop_users, generate_channels};
    use crate::config::RawConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_cfg() -> SystemConfig {
        let mut raw = RawConfig::default();
        raw.num_units = 3;
        SystemConfig::from_raw(&raw).unwrap()
    }

    fn random_beams(cfg: &SystemConfig, rng: &mut impl Rng, scale: f64) -> BeamformerSet {
        let mut beams = BeamformerSet::zeros(cfg.num_cells, cfg.users_per_cell, cfg.num_units);
        for g in 0..cfg.num_cells {
            for k in 0..cfg.users_per_cell {
                for v in beams.user_beam_mut(g, k) {
                    *v = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * scale;
                }
            }
        }
        beams
    }

    #[test]
    fn sinr_matches_direct_summation() {
        // Independent transcription of the SINR definition: desired power over
        // intra-cell interference + inter-cell interference + noise, summed
        // entry by entry with explicit loops.
        let cfg = small_cfg();
        let drop = drop_users(&cfg, 3);
        let ch = generate_channels(&cfg, &drop, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let beams = random_beams(&cfg, &mut rng, 0.05);

        for g in 0..cfg.num_cells {
            for k in 0..cfg.users_per_cell {
                let n = cfg.num_units;
                let inner = |i: usize, j: usize| -> C64 {
                    let h = ch.channel(i, g, k);
                    let f = beams.user_beam(i, j);
                    let mut acc = C64::new(0.0, 0.0);
                    for t in 0..n {
                        acc += h[t].conj() * f[t];
                    }
                    acc
                };
                let desired = inner(g, k).norm_sqr();
                let mut intra = 0.0;
                for j in 0..cfg.users_per_cell {
                    if j != k {
                        intra += inner(g, j).norm_sqr();
                    }
                }
                let mut inter = 0.0;
                for i in 0..cfg.num_cells {
                    if i == g {
                        continue;
                    }
                    for j in 0..cfg.users_per_cell {
                        inter += inner(i, j).norm_sqr();
                    }
                }
                let expected = desired / (intra + inter + cfg.noise(g, k));
                let got = sinr(&ch, &beams, &cfg, g, k);
                assert!(
                    (got - expected).abs() <= 1e-12 * expected.abs().max(1.0),
                    "cell {g} user {k}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn single_user_sinr_is_noise_limited() {
        let mut raw = RawConfig::default();
        raw.num_cells = 1;
        raw.users_per_cell = 1;
        raw.num_units = 4;
        let cfg = SystemConfig::from_raw(&raw).unwrap();
        let drop = drop_users(&cfg, 0);
        let ch = generate_channels(&cfg, &drop, 0).unwrap();
        let mut beams = BeamformerSet::zeros(1, 1, 4);
        let h: Vec<C64> = ch.channel(0, 0, 0).to_vec();
        beams.user_beam_mut(0, 0).copy_from_slice(&h);
        let expect = crate::norm_sq(&h).powi(2) / cfg.noise(0, 0);
        let got = sinr(&ch, &beams, &cfg, 0, 0);
        assert!((got - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn rate_report_tracks_minimum_and_ties() {
        let cfg = small_cfg();
        let drop = drop_users(&cfg, 1);
        let ch = generate_channels(&cfg, &drop, 1).unwrap();
        let beams = BeamformerSet::zeros(2, 2, 3);
        // all-zero beams: every rate is 0, ties must pick user 0
        let report = rate_report(&ch, &beams, &cfg, PowerConstraint::PerUnit).unwrap();
        assert_eq!(report.min_user, vec![0, 0]);
        assert_eq!(report.objective_nats, 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let beams = random_beams(&cfg, &mut rng, 0.01);
        let report = rate_report(&ch, &beams, &cfg, PowerConstraint::PerUnit).unwrap();
        for g in 0..2 {
            let r0 = report.rates[cfg.user_index(g, 0)];
            let r1 = report.rates[cfg.user_index(g, 1)];
            assert_eq!(report.cell_min[g], r0.min(r1));
        }
        assert!(
            (report.objective_nats - objective(&ch, &beams, &cfg)).abs() < 1e-15,
            "checked and unchecked objective agree"
        );
        assert!((report.objective_bits() - report.objective_nats / 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn feasibility_flags_the_offending_unit() {
        let cfg = small_cfg();
        let mut beams = BeamformerSet::zeros(2, 2, 3);
        beams.user_beam_mut(1, 0)[2] = C64::new(0.2, 0.0); // 0.04 W > 0.01 W
        match check_feasibility(&beams, PowerConstraint::PerUnit, cfg.unit_power) {
            Err(RateError::UnitPowerExceeded {
                cell: 1, unit: 2, ..
            }) => {}
            other => panic!("expected unit violation, got {other:?}"),
        }
        // inside the relative slack is fine
        let mut beams = BeamformerSet::zeros(2, 2, 3);
        let amp = (cfg.unit_power * (1.0 + 0.5 * FEASIBILITY_SLACK)).sqrt();
        beams.user_beam_mut(0, 0)[0] = C64::new(amp, 0.0);
        assert!(check_feasibility(&beams, PowerConstraint::PerUnit, cfg.unit_power).is_ok());
        // sum-power: the same beams satisfy the pooled budget
        assert!(check_feasibility(&beams, PowerConstraint::SumPower, cfg.unit_power).is_ok());
        let mut beams = BeamformerSet::zeros(2, 2, 3);
        for n in 0..3 {
            beams.user_beam_mut(0, 0)[n] = C64::new(2.0 * cfg.unit_power.sqrt(), 0.0);
        }
        assert!(matches!(
            check_feasibility(&beams, PowerConstraint::SumPower, cfg.unit_power),
            Err(RateError::CellPowerExceeded { cell: 0, .. })
        ));
    }

    #[test]
    fn subvector_roundtrip_and_unit_power() {
        let mut beams = BeamformerSet::zeros(2, 3, 4);
        let x = vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.0), C64::new(0.0, 3.0)];
        beams.set_subvector(1, 2, &x);
        assert_eq!(beams.subvector(1, 2), x);
        assert_eq!(beams.user_beam(1, 1)[2], x[1]);
        let p = beams.unit_power(1, 2);
        assert!((p - (5.0 + 0.25 + 9.0)).abs() < 1e-15);
        assert_eq!(beams.unit_power(1, 3), 0.0);
        assert!((beams.cell_power(1) - p).abs() < 1e-15);
    }

    #[test]
    fn per_user_phase_rotation_leaves_rates_unchanged() {
        let cfg = small_cfg();
        let drop = drop_users(&cfg, 2);
        let ch = generate_channels(&cfg, &drop, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let beams = random_beams(&cfg, &mut rng, 0.02);
        let base = objective(&ch, &beams, &cfg);
        for _ in 0..20 {
            let mut rotated = beams.clone();
            for g in 0..cfg.num_cells {
                for k in 0..cfg.users_per_cell {
                    let phase = C64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU);
                    for v in rotated.user_beam_mut(g, k) {
                        *v *= phase;
                    }
                }
            }
            let rotated_obj = objective(&ch, &rotated, &cfg);
            assert!(
                (rotated_obj - base).abs() <= 1e-12 * base.abs().max(1.0),
                "{rotated_obj} vs {base}"
            );
        }
    }
}
