//! Max-min fair transmit beamforming for multi-cell MISO downlinks served by
//! transmissive RIS transceivers (TRTCs).
//!
//! Each cell is covered by one TRTC with `N` transmissive units, serving `K`
//! single-antenna users. The per-unit power budget couples all users of a
//! cell, and inter-cell interference couples the cells. The solver maximises
//! the sum over cells of the minimum per-user rate by
//!
//! 1. reformulating each rate with fractional-programming auxiliaries so the
//!    beamformers appear in a concave quadratic,
//! 2. smoothing the per-cell minimum with a log-sum-exp softmin,
//! 3. minorising the smoothed objective with a quadratic surrogate whose
//!    curvature bound is available in closed form, and
//! 4. solving the resulting single-ball QP exactly, wrapped in a
//!    SQUAREM-accelerated block-coordinate fixed-point loop.
//!
//! No external optimisation solver is involved anywhere in the production
//! path; the only iterative numerics are the fixed-point loop itself and a
//! projected-gradient reference solver kept for certification and benchmarks.

pub mod baseline;
pub mod channel;
pub mod config;
pub mod experiment;
pub mod fp;
pub mod optimizer;
pub mod oracle;
pub mod rates;
pub mod subproblem;

pub use num_complex::Complex64 as C64;

/// Conjugated inner product `a^H b`.
pub fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}

/// Squared Euclidean norm of a complex vector.
pub fn norm_sq(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}
