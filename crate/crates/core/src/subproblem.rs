//! Per-unit subproblem: reduction, softmin smoothing, the quadratic
//! minorizer, and its closed-form ball-constrained maximizer.
//!
//! Fixing all beamformer entries except the `K` entries one transmissive unit
//! radiates turns every user's quadratic surrogate into a function of that
//! length-`K` subvector `x`:
//!
//! ```text
//! r_{j,k}(x) = -x^H B x + 2 Re{ b5^H x } + c5,      B is PSD
//! ```
//!
//! The per-cell minimum over `k` is smoothed by a softmin of sharpness `mu`,
//! and the smoothed objective is minorized at the current point `x0` by
//! `alpha ||x - x0||^2 + 2 Re{ b7^H (x - x0) } + const` with a closed-form
//! curvature bound `alpha < 0`. Summing over cells gives one strictly concave
//! quadratic whose maximizer over the power ball has an explicit formula. No
//! iterative solver appears anywhere in this path.

use crate::fp::QuadraticCoefficients;
use crate::rates::BeamformerSet;
use crate::{dot_conj, norm_sq, C64};
use thiserror::Error;

/// Curvature bounds this close to zero are clamped so the closed-form
/// maximizer never divides by zero.
pub const ALPHA_FLOOR: f64 = -1e-12;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("aggregated curvature bound {0} is not negative")]
    NonNegativeCurvature(f64),
    #[error("projected-gradient reference solver stalled after {iters} iterations (residual {residual:.3e})")]
    OracleNoConvergence {
        iters: usize,
        residual: f64,
        last: Vec<C64>,
    },
}

/// Quadratic part of one user's reduced surrogate, kept factored.
#[derive(Debug, Clone)]
pub enum QuadPart {
    /// `B = diag(d)`, the per-unit reduction: all `K` diagonal entries equal
    /// the squared weight of the unit being optimised.
    Diagonal(Vec<f64>),
    /// `B = blkdiag(w w^H, ..., w w^H)` with `blocks` copies, the whole-cell
    /// variant used by the sum-power baseline.
    BlockRankOne { w: Vec<C64>, blocks: usize },
}

impl QuadPart {
    pub fn dim(&self) -> usize {
        match self {
            QuadPart::Diagonal(d) => d.len(),
            QuadPart::BlockRankOne { w, blocks } => w.len() * blocks,
        }
    }

    /// `x^H B x`, always nonnegative.
    pub fn quad_form(&self, x: &[C64]) -> f64 {
        match self {
            QuadPart::Diagonal(d) => d.iter().zip(x).map(|(d, z)| d * z.norm_sqr()).sum(),
            QuadPart::BlockRankOne { w, blocks } => {
                let n = w.len();
                (0..*blocks)
                    .map(|b| dot_conj(w, &x[b * n..(b + 1) * n]).norm_sqr())
                    .sum()
            }
        }
    }

    /// `B x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        match self {
            QuadPart::Diagonal(d) => d.iter().zip(x).map(|(d, z)| d * z).collect(),
            QuadPart::BlockRankOne { w, blocks } => {
                let n = w.len();
                let mut out = Vec::with_capacity(n * blocks);
                for b in 0..*blocks {
                    let c = dot_conj(w, &x[b * n..(b + 1) * n]);
                    out.extend(w.iter().map(|wi| wi * c));
                }
                out
            }
        }
    }

    /// Largest eigenvalue of `B`, available in closed form for both shapes.
    pub fn lambda_max(&self) -> f64 {
        match self {
            QuadPart::Diagonal(d) => d.iter().cloned().fold(0.0, f64::max),
            QuadPart::BlockRankOne { w, .. } => norm_sq(w),
        }
    }

    /// Largest eigenvalue of `B B^H`; the square of `lambda_max` here since
    /// both shapes are Hermitian PSD.
    pub fn lambda_max_sq(&self) -> f64 {
        let l = self.lambda_max();
        l * l
    }

    /// Dense copy, for reference computations only.
    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let dim = self.dim();
        let mut m = vec![vec![C64::new(0.0, 0.0); dim]; dim];
        match self {
            QuadPart::Diagonal(d) => {
                for (i, di) in d.iter().enumerate() {
                    m[i][i] = C64::new(*di, 0.0);
                }
            }
            QuadPart::BlockRankOne { w, blocks } => {
                let n = w.len();
                for b in 0..*blocks {
                    for r in 0..n {
                        for c in 0..n {
                            m[b * n + r][b * n + c] = w[r] * w[c].conj();
                        }
                    }
                }
            }
        }
        m
    }
}

/// One user's reduced surrogate `-x^H B x + 2 Re{b5^H x} + c5`.
#[derive(Debug, Clone)]
pub struct QuadTerm {
    pub quad: QuadPart,
    pub b5: Vec<C64>,
    pub c5: f64,
}

impl QuadTerm {
    pub fn eval(&self, x: &[C64]) -> f64 {
        -self.quad.quad_form(x) + 2.0 * dot_conj(&self.b5, x).re + self.c5
    }
}

/// Reduced problem for one block update: per cell, one [`QuadTerm`] per user,
/// plus the squared radius of the feasible ball.
#[derive(Debug, Clone)]
pub struct SubproblemCoeffs {
    /// `terms[j][k]` is user `(j, k)`'s surrogate as a function of the block.
    pub terms: Vec<Vec<QuadTerm>>,
    pub radius_sq: f64,
}

impl SubproblemCoeffs {
    /// Smoothed objective: sum over cells of the softmin over users.
    pub fn smoothed(&self, x: &[C64], mu: f64) -> f64 {
        self.terms
            .iter()
            .map(|cell| {
                let vals: Vec<f64> = cell.iter().map(|t| t.eval(x)).collect();
                softmin(&vals, mu)
            })
            .sum()
    }
}

/// Frozen constant of user `(j, k)`'s surrogate when cell `var_cell`'s beams
/// are the variable: the original constant plus every term that involves only
/// other cells' beams.
fn frozen_constant(
    coeffs: &QuadraticCoefficients,
    beams: &BeamformerSet,
    var_cell: usize,
    j: usize,
    k: usize,
) -> f64 {
    let mut c = coeffs.c1(j, k);
    if j != var_cell {
        c += 2.0 * dot_conj(coeffs.b1_block(j, k), beams.user_beam(j, k)).re;
    }
    for i in 0..beams.num_cells {
        if i != var_cell {
            c -= coeffs.leaked_power(beams, i, j, k);
        }
    }
    c
}

/// Restricts every user's surrogate to the `K` entries unit `n` of cell `g`
/// radiates, with all other entries frozen at their current values.
///
/// For user `(j, k)` with weight `w = omega_{j,k} h_{g,j,k}`, the inner
/// products `w^H f_{g,kappa}` split into the frozen remainder
/// `r_kappa = w^H f_{g,kappa} - conj(w[n]) x_kappa` and the variable part,
/// giving `B = |w[n]|^2 I`, `b5 = b4 - w[n] r`, and a constant that absorbs
/// `|r|^2` and the frozen half of the linear term. The identity
/// `term.eval(x) = surrogate(f with unit n replaced by x)` is exact.
pub fn reduce_to_subvector(
    coeffs: &QuadraticCoefficients,
    beams: &BeamformerSet,
    g: usize,
    n: usize,
    unit_power: f64,
) -> SubproblemCoeffs {
    let (gc, kc) = (beams.num_cells, beams.users_per_cell);
    let x0 = beams.subvector(g, n);
    let mut terms = Vec::with_capacity(gc);
    for j in 0..gc {
        let mut cell_terms = Vec::with_capacity(kc);
        for k in 0..kc {
            let w = coeffs.weight(g, j, k);
            let wn = w[n];
            let mut b5 = Vec::with_capacity(kc);
            let mut c = frozen_constant(coeffs, beams, g, j, k);
            for (kappa, x0k) in x0.iter().enumerate() {
                let q = dot_conj(w, beams.user_beam(g, kappa));
                let r = q - wn.conj() * x0k;
                c -= r.norm_sqr();
                b5.push(-(wn * r));
            }
            if j == g {
                let b1 = coeffs.b1_block(g, k);
                b5[k] += b1[n];
                c += 2.0 * dot_conj(b1, beams.user_beam(g, k)).re - 2.0 * (b1[n].conj() * x0[k]).re;
            }
            cell_terms.push(QuadTerm {
                quad: QuadPart::Diagonal(vec![wn.norm_sqr(); kc]),
                b5,
                c5: c,
            });
        }
        terms.push(cell_terms);
    }
    SubproblemCoeffs {
        terms,
        radius_sq: unit_power,
    }
}

/// Whole-cell variant for the sum-power baseline: the block is cell `g`'s
/// entire stacked beamformer and the ball radius covers the pooled budget
/// `N * P`. No entries of cell `g` are frozen, so the remainder terms vanish.
pub fn reduce_to_cell(
    coeffs: &QuadraticCoefficients,
    beams: &BeamformerSet,
    g: usize,
    unit_power: f64,
) -> SubproblemCoeffs {
    let (gc, kc, nu) = (beams.num_cells, beams.users_per_cell, beams.num_units);
    let mut terms = Vec::with_capacity(gc);
    for j in 0..gc {
        let mut cell_terms = Vec::with_capacity(kc);
        for k in 0..kc {
            let w = coeffs.weight(g, j, k).to_vec();
            let mut b5 = vec![C64::new(0.0, 0.0); kc * nu];
            if j == g {
                b5[k * nu..(k + 1) * nu].copy_from_slice(coeffs.b1_block(g, k));
            }
            cell_terms.push(QuadTerm {
                quad: QuadPart::BlockRankOne { w, blocks: kc },
                b5,
                c5: frozen_constant(coeffs, beams, g, j, k),
            });
        }
        terms.push(cell_terms);
    }
    SubproblemCoeffs {
        terms,
        radius_sq: nu as f64 * unit_power,
    }
}

/// Log-sum-exp softmin `-(1/mu) log sum_k exp(-mu v_k)`, evaluated with a
/// max shift so that `min(v) - log(K)/mu <= softmin(v) <= min(v)` holds
/// exactly in floating point.
pub fn softmin(values: &[f64], mu: f64) -> f64 {
    debug_assert!(!values.is_empty() && mu > 0.0);
    let vmin = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let sum: f64 = values.iter().map(|v| (-mu * (v - vmin)).exp()).sum();
    vmin - sum.ln() / mu
}

/// Softmin weights `h_k` proportional to `exp(-mu v_k)`, summing to one.
/// `mu = 0` is the uniform limit.
pub fn softmin_weights(values: &[f64], mu: f64) -> Vec<f64> {
    debug_assert!(!values.is_empty() && mu >= 0.0);
    if mu == 0.0 {
        return vec![1.0 / values.len() as f64; values.len()];
    }
    let vmin = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = values.iter().map(|v| (-mu * (v - vmin)).exp()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|e| e / sum).collect()
}

/// Closed-form lower bound on the curvature of one cell's smoothed objective
/// over the ball of squared radius `radius_sq`:
///
/// ```text
/// alpha = -max_k lambda_max(B_k) - 2 mu max_k t_k,
/// t_k  = lambda_max(B_k B_k^H) radius_sq + ||b5_k||^2
///        + 2 sqrt(radius_sq) ||B_k b5_k||
/// ```
///
/// `t_k` bounds the squared gradient norm of user `k`'s surrogate on the
/// ball. The result is clamped to [`ALPHA_FLOOR`] so it is strictly negative
/// even when every coefficient vanishes.
pub fn mm_alpha(cell_terms: &[QuadTerm], mu: f64, radius_sq: f64) -> f64 {
    let mut worst_lambda: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    for term in cell_terms {
        worst_lambda = worst_lambda.max(term.quad.lambda_max());
        let bb5 = term.quad.apply(&term.b5);
        let t = term.quad.lambda_max_sq() * radius_sq
            + norm_sq(&term.b5)
            + 2.0 * radius_sq.sqrt() * norm_sq(&bb5).sqrt();
        worst_t = worst_t.max(t);
    }
    (-worst_lambda - 2.0 * mu * worst_t).min(ALPHA_FLOOR)
}

/// Linear and constant parts of one cell's minorizer around `x0`:
/// `s(x) = alpha ||x||^2 + 2 Re{b6^H x} + c6` with
/// `b6 = b7 - alpha x0`, `b7 = sum_k h_k (b5_k - B_k x0)`, and `c6` chosen so
/// `s(x0)` equals the smoothed objective there (first-order tangency).
pub fn mm_linear(
    cell_terms: &[QuadTerm],
    weights: &[f64],
    smoothed_at_x0: f64,
    alpha: f64,
    x0: &[C64],
) -> (Vec<C64>, f64) {
    debug_assert_eq!(cell_terms.len(), weights.len());
    let dim = x0.len();
    let mut b7 = vec![C64::new(0.0, 0.0); dim];
    for (term, h) in cell_terms.iter().zip(weights) {
        let bx = term.quad.apply(x0);
        for t in 0..dim {
            b7[t] += h * (term.b5[t] - bx[t]);
        }
    }
    let c6 = smoothed_at_x0 - 2.0 * dot_conj(&b7, x0).re + alpha * norm_sq(x0);
    let b6 = b7.iter().zip(x0).map(|(b, x)| b - alpha * x).collect();
    (b6, c6)
}

/// Maximizes `alpha_bar ||x||^2 + 2 Re{b8^H x}` over `||x||^2 <= radius_sq`
/// for `alpha_bar < 0`: the unconstrained stationary point `-b8 / alpha_bar`
/// if it fits inside the ball, otherwise `b8` scaled onto the sphere.
pub fn solve_ball_qp(alpha_bar: f64, b8: &[C64], radius_sq: f64) -> Result<Vec<C64>, SolverError> {
    if alpha_bar >= 0.0 {
        return Err(SolverError::NonNegativeCurvature(alpha_bar));
    }
    let b_norm_sq = norm_sq(b8);
    if b_norm_sq == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); b8.len()]);
    }
    let inv = -1.0 / alpha_bar;
    if b_norm_sq * inv * inv <= radius_sq {
        Ok(b8.iter().map(|b| b * inv).collect())
    } else {
        let scale = (radius_sq / b_norm_sq).sqrt();
        Ok(b8.iter().map(|b| b * scale).collect())
    }
}
