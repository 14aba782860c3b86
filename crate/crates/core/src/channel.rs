//! User drops, path loss, and Rician channel generation.
//!
//! Randomness discipline: every random entity (a user position, one link's
//! small-scale fading) is drawn from its own counter-based RNG stream, keyed
//! by the entity's indices and the Monte Carlo trial number. Two scenarios
//! that share `rng_seed` and a trial number therefore see identical
//! randomness wherever their dimensions overlap, no matter which scalar
//! parameter (power, path loss exponent, unit count) differs between them.
//! That is what makes paired sweep comparisons meaningful.

use crate::config::{ArrayGeometry, SystemConfig};
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("link distance {0} is not positive")]
    InvalidDistance(f64),
}

const STREAM_DROP: u64 = 1;
const STREAM_FADING: u64 = 2;
pub(crate) const STREAM_INIT: u64 = 3;

/// Builds the stream id for one random entity. Bit layout keeps indices in
/// disjoint fields so streams never collide across entities or trials.
pub(crate) fn stream_id(tag: u64, trial: u64, i: u64, g: u64, k: u64) -> u64 {
    debug_assert!(tag < (1 << 8) && trial < (1 << 16));
    debug_assert!(i < (1 << 12) && g < (1 << 14) && k < (1 << 14));
    (tag << 56) | (trial << 40) | (i << 28) | (g << 14) | k
}

pub(crate) fn stream_rng(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Euclidean distance between two points.
pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Distance-based path loss `c0 * d^(-exponent)` with a 1 m reference.
pub fn path_loss(c0: f64, exponent: f64, dist: f64) -> Result<f64, ChannelError> {
    if !(dist > 0.0) {
        return Err(ChannelError::InvalidDistance(dist));
    }
    Ok(c0 * dist.powf(-exponent))
}

/// User positions for one Monte Carlo trial, indexed `g * users_per_cell + k`.
#[derive(Debug, Clone)]
pub struct UserDrop {
    pub positions: Vec<[f64; 3]>,
}

impl UserDrop {
    pub fn position(&self, cfg: &SystemConfig, cell: usize, user: usize) -> [f64; 3] {
        self.positions[cfg.user_index(cell, user)]
    }
}

/// Drops every user uniformly on the disk of radius `cell_radius` around its
/// serving TRTC, at `user_height`.
pub fn drop_users(cfg: &SystemConfig, trial: u32) -> UserDrop {
    let mut positions = Vec::with_capacity(cfg.num_users());
    for g in 0..cfg.num_cells {
        let center = cfg.trtc_positions[g];
        for k in 0..cfg.users_per_cell {
            let mut rng = stream_rng(
                cfg.rng_seed,
                stream_id(STREAM_DROP, trial as u64, 0, g as u64, k as u64),
            );
            let r = cfg.cell_radius * rng.gen::<f64>().sqrt();
            let theta = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            positions.push([
                center[0] + r * theta.cos(),
                center[1] + r * theta.sin(),
                cfg.user_height,
            ]);
        }
    }
    UserDrop { positions }
}

/// Unit-modulus array response of a TRTC at `origin` toward `target`,
/// half-wavelength element spacing.
pub fn steering_vector(
    geometry: ArrayGeometry,
    num_units: usize,
    origin: [f64; 3],
    target: [f64; 3],
) -> Vec<C64> {
    let d = distance(origin, target);
    let ux = (target[0] - origin[0]) / d;
    let uy = (target[1] - origin[1]) / d;
    match geometry {
        ArrayGeometry::Ula => (0..num_units)
            .map(|m| C64::from_polar(1.0, std::f64::consts::PI * m as f64 * ux))
            .collect(),
        ArrayGeometry::Upa => {
            let side = (num_units as f64).sqrt().round() as usize;
            debug_assert_eq!(side * side, num_units, "UPA needs square unit count");
            (0..num_units)
                .map(|n| {
                    let (p, q) = (n / side, n % side);
                    let phase = std::f64::consts::PI * (p as f64 * ux + q as f64 * uy);
                    C64::from_polar(1.0, phase)
                })
                .collect()
        }
    }
}

/// All downlink channels of one trial. `channel(i, g, k)` is the length-`N`
/// vector from TRTC `i` to user `k` of cell `g`.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub num_cells: usize,
    pub users_per_cell: usize,
    pub num_units: usize,
    data: Vec<C64>,
}

impl ChannelSet {
    /// Wraps explicit channel entries, laid out `[tx_cell][rx_cell][user][unit]`.
    /// Useful for synthetic instances in tests.
    pub fn from_entries(
        num_cells: usize,
        users_per_cell: usize,
        num_units: usize,
        data: Vec<C64>,
    ) -> Self {
        assert_eq!(
            data.len(),
            num_cells * num_cells * users_per_cell * num_units
        );
        ChannelSet {
            num_cells,
            users_per_cell,
            num_units,
            data,
        }
    }

    pub fn channel(&self, tx_cell: usize, rx_cell: usize, user: usize) -> &[C64] {
        let idx =
            ((tx_cell * self.num_cells + rx_cell) * self.users_per_cell + user) * self.num_units;
        &self.data[idx..idx + self.num_units]
    }
}

/// Generates Rician channels for a drop: dominant geometric component plus
/// i.i.d. CN(0, 1) scatter, scaled by the link path loss.
pub fn generate_channels(
    cfg: &SystemConfig,
    drop: &UserDrop,
    trial: u32,
) -> Result<ChannelSet, ChannelError> {
    let (gc, kc, n) = (cfg.num_cells, cfg.users_per_cell, cfg.num_units);
    let kappa = cfg.rician_factor;
    let los_scale = (kappa / (1.0 + kappa)).sqrt();
    let nlos_scale = (1.0 / (1.0 + kappa)).sqrt();
    let mut data = Vec::with_capacity(gc * gc * kc * n);
    for i in 0..gc {
        for g in 0..gc {
            for k in 0..kc {
                let target = drop.position(cfg, g, k);
                let origin = cfg.trtc_positions[i];
                let dist = distance(origin, target);
                let pl = path_loss(cfg.pathloss_ref, cfg.pathloss_exponent, dist)?;
                let amp = pl.sqrt();
                let los = steering_vector(cfg.array_geometry, n, origin, target);
                let mut rng = stream_rng(
                    cfg.rng_seed,
                    stream_id(STREAM_FADING, trial as u64, i as u64, g as u64, k as u64),
                );
                for a in los {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    let scatter = C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
                    data.push(amp * (los_scale * a + nlos_scale * scatter));
                }
            }
        }
    }
    Ok(ChannelSet {
        num_cells: gc,
        users_per_cell: kc,
        num_units: n,
        data,
    })
}
