//! Fractional-programming reformulation of the per-user rates.
//!
//! For fixed beamformers, each rate `log(1 + SINR)` equals the maximum over
//! two auxiliaries (a scalar `gamma` per user and a complex `omega` per user)
//! of a surrogate that is a concave *quadratic* in the beamformers:
//!
//! ```text
//! r(f, gamma, omega) = log(1 + gamma) - gamma
//!                    + 2 Re{ conj(omega) sqrt(1 + gamma) h^H f }
//!                    - |omega|^2 (total received power + noise)
//! ```
//!
//! The maximizing auxiliaries are `gamma* = SINR` and
//! `omega* = sqrt(1 + gamma) h^H f / (total received power + noise)`, and at
//! that point the surrogate is tight: `r(f, gamma*, omega*) = log(1 + SINR)`.
//! With the auxiliaries frozen, the surrogate collapses to constant, linear,
//! and quadratic coefficients in the beamformers; those are assembled here in
//! factored form and consumed by the per-unit subproblem reduction.

use crate::channel::ChannelSet;
use crate::config::SystemConfig;
use crate::rates::{link_response, BeamformerSet};
use crate::{dot_conj, C64};

/// Per-user auxiliaries, indexed `g * users_per_cell + k`. Zero-initialised;
/// zeros give a surrogate value of exactly 0 for every user.
#[derive(Debug, Clone)]
pub struct AuxiliaryState {
    pub gamma: Vec<f64>,
    pub omega: Vec<C64>,
}

impl AuxiliaryState {
    pub fn new(cfg: &SystemConfig) -> Self {
        AuxiliaryState {
            gamma: vec![0.0; cfg.num_users()],
            omega: vec![C64::new(0.0, 0.0); cfg.num_users()],
        }
    }
}

/// Sets every `gamma` to the user's current SINR, its closed-form maximizer.
/// A user with a dead direct link gets `gamma = 0`.
pub fn update_gamma(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    cfg: &SystemConfig,
    aux: &mut AuxiliaryState,
) {
    for g in 0..cfg.num_cells {
        for k in 0..cfg.users_per_cell {
            let (desired, total) = link_response(channels, beams, g, k);
            let s = desired.norm_sqr();
            let interference = (total - s).max(0.0);
            aux.gamma[cfg.user_index(g, k)] = s / (interference + cfg.noise(g, k));
        }
    }
}

/// Sets every `omega` to its closed-form maximizer at the current `gamma`.
/// The denominator includes the desired term and the noise, so it is always
/// positive; a dead link simply yields `omega = 0`.
pub fn update_omega(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    cfg: &SystemConfig,
    aux: &mut AuxiliaryState,
) {
    for g in 0..cfg.num_cells {
        for k in 0..cfg.users_per_cell {
            let idx = cfg.user_index(g, k);
            let (desired, total) = link_response(channels, beams, g, k);
            let gamma = aux.gamma[idx];
            aux.omega[idx] = (1.0 + gamma).sqrt() * desired / (total + cfg.noise(g, k));
        }
    }
}

/// Surrogate rate of user `(g, k)` at the given beams and auxiliaries, nats.
pub fn eval_transformed_rate(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    cfg: &SystemConfig,
    aux: &AuxiliaryState,
    g: usize,
    k: usize,
) -> f64 {
    let idx = cfg.user_index(g, k);
    let gamma = aux.gamma[idx];
    let omega = aux.omega[idx];
    let (desired, total) = link_response(channels, beams, g, k);
    gamma.ln_1p() - gamma + 2.0 * (omega.conj() * (1.0 + gamma).sqrt() * desired).re
        - omega.norm_sqr() * (total + cfg.noise(g, k))
}

/// The surrogate of user `(g, k)` written as a quadratic in the beams:
///
/// ```text
/// r(f) = c1 + 2 Re{ b1^H f_g } - sum_i f_i^H B1_i f_i
/// ```
///
/// `b1` is supported on user `k`'s block of cell `g` and stored as that block
/// only. Each `B1_i` is block-diagonal with `K` copies of `w w^H`, where
/// `w = omega * h_{i,g,k}`; only the factor `w` is stored, never the matrix.
#[derive(Debug, Clone)]
pub struct QuadraticCoefficients {
    num_cells: usize,
    users_per_cell: usize,
    num_units: usize,
    c1: Vec<f64>,
    b1: Vec<C64>,
    w: Vec<C64>,
}

impl QuadraticCoefficients {
    /// Constant term of user `(g, k)`'s quadratic.
    pub fn c1(&self, g: usize, k: usize) -> f64 {
        self.c1[g * self.users_per_cell + k]
    }

    /// User `k`'s block of the linear coefficient `b1` for cell `g`.
    pub fn b1_block(&self, g: usize, k: usize) -> &[C64] {
        let idx = (g * self.users_per_cell + k) * self.num_units;
        &self.b1[idx..idx + self.num_units]
    }

    /// Rank-one factor of the quadratic that cell `i`'s beams contribute to
    /// user `(g, k)`'s surrogate.
    pub fn weight(&self, tx_cell: usize, rx_cell: usize, user: usize) -> &[C64] {
        let idx =
            ((tx_cell * self.num_cells + rx_cell) * self.users_per_cell + user) * self.num_units;
        &self.w[idx..idx + self.num_units]
    }

    /// Power that cell `i`'s beams leak into user `(g, k)`'s weighted channel:
    /// `f_i^H B1_i f_i = sum_j |w^H f_{i,j}|^2`.
    pub fn leaked_power(
        &self,
        beams: &BeamformerSet,
        tx_cell: usize,
        rx_cell: usize,
        user: usize,
    ) -> f64 {
        let w = self.weight(tx_cell, rx_cell, user);
        (0..self.users_per_cell)
            .map(|j| dot_conj(w, beams.user_beam(tx_cell, j)).norm_sqr())
            .sum()
    }

    /// Evaluates the surrogate of user `(g, k)` through the assembled
    /// coefficients. Must agree with [`eval_transformed_rate`] to rounding.
    pub fn transformed_rate(&self, beams: &BeamformerSet, g: usize, k: usize) -> f64 {
        let mut value = self.c1(g, k);
        value += 2.0 * dot_conj(self.b1_block(g, k), beams.user_beam(g, k)).re;
        for i in 0..self.num_cells {
            value -= self.leaked_power(beams, i, g, k);
        }
        value
    }
}

/// Assembles the per-user quadratic coefficients at frozen auxiliaries.
pub fn assemble_coefficients(
    channels: &ChannelSet,
    cfg: &SystemConfig,
    aux: &AuxiliaryState,
) -> QuadraticCoefficients {
    let (gc, kc, n) = (cfg.num_cells, cfg.users_per_cell, cfg.num_units);
    let mut c1 = Vec::with_capacity(gc * kc);
    let mut b1 = Vec::with_capacity(gc * kc * n);
    let mut w = vec![C64::new(0.0, 0.0); gc * gc * kc * n];
    for g in 0..gc {
        for k in 0..kc {
            let idx = cfg.user_index(g, k);
            let gamma = aux.gamma[idx];
            let omega = aux.omega[idx];
            c1.push(gamma.ln_1p() - gamma - omega.norm_sqr() * cfg.noise(g, k));
            let lin = (1.0 + gamma).sqrt() * omega;
            b1.extend(channels.channel(g, g, k).iter().map(|h| lin * h));
            for i in 0..gc {
                let dst = ((i * gc + g) * kc + k) * n;
                for (t, h) in channels.channel(i, g, k).iter().enumerate() {
                    w[dst + t] = omega * h;
                }
            }
        }
    }
    QuadraticCoefficients {
        num_cells: gc,
        users_per_cell: kc,
        num_units: n,
        c1,
        b1,
        w,
    }
}
