//! Reference numerics the production path is certified against.
//!
//! Two independent routes live here: a projected-gradient solver for the
//! ball-constrained quadratic (checked against the closed-form maximizer and
//! timed against it in benchmarks), and a dense Hessian of the smoothed
//! per-cell objective in stacked `[x; conj(x)]` coordinates, whose smallest
//! eigenvalue certifies the closed-form curvature bound. Neither is needed to
//! produce beamformers; both exist so the fast path can be cross-examined.

use crate::subproblem::{softmin_weights, QuadTerm, SolverError};
use crate::{dot_conj, norm_sq, C64};
use nalgebra::DMatrix;

/// Knobs of the projected-gradient reference solver.
#[derive(Debug, Clone)]
pub struct OracleSettings {
    pub max_iters: usize,
    /// Stationarity target, relative to the gradient scale of the instance.
    pub grad_tol: f64,
    /// Armijo sufficient-increase fraction.
    pub armijo_sigma: f64,
    pub max_halvings: u32,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            max_iters: 10_000,
            grad_tol: 1e-12,
            armijo_sigma: 1e-4,
            max_halvings: 60,
        }
    }
}

fn project(x: &mut [C64], radius_sq: f64) {
    let p = norm_sq(x);
    if p > radius_sq {
        let s = (radius_sq / p).sqrt();
        for v in x.iter_mut() {
            *v *= s;
        }
    }
}

/// Maximizes `alpha_bar ||x||^2 + 2 Re{b8^H x}` over the ball by projected
/// gradient ascent with a two-way backtracking Armijo line search: the trial
/// step doubles after every accepted iteration (capped at a few ball
/// diameters along the gradient) and halves until sufficient ascent holds,
/// so the method adapts to the problem scale using function and gradient
/// evaluations only. Stops when the unit-step projected-gradient
/// displacement is below `grad_tol` times the instance's gradient scale.
pub fn projected_gradient_oracle(
    alpha_bar: f64,
    b8: &[C64],
    radius_sq: f64,
    settings: &OracleSettings,
) -> Result<Vec<C64>, SolverError> {
    if alpha_bar >= 0.0 {
        return Err(SolverError::NonNegativeCurvature(alpha_bar));
    }
    let dim = b8.len();
    let value = |x: &[C64]| -> f64 { alpha_bar * norm_sq(x) + 2.0 * dot_conj(b8, x).re };
    let scale = norm_sq(b8).sqrt() + alpha_bar.abs() * radius_sq.sqrt();
    if scale == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); dim]);
    }
    let tol = settings.grad_tol * scale;

    let mut x = vec![C64::new(0.0, 0.0); dim];
    let mut current = 0.0;
    let mut step = 1.0f64;
    let mut residual = f64::INFINITY;
    for _ in 0..settings.max_iters {
        let grad: Vec<C64> = (0..dim).map(|t| alpha_bar * x[t] + b8[t]).collect();
        let mut probe: Vec<C64> = (0..dim).map(|t| x[t] + grad[t]).collect();
        project(&mut probe, radius_sq);
        residual = (0..dim)
            .map(|t| (probe[t] - x[t]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual <= tol {
            return Ok(x);
        }
        // Trial steps longer than a few ball diameters all project to the
        // same boundary point, so growing past that scale only wastes
        // halvings; cap the doubled step at that length.
        let grad_norm = norm_sq(&grad).sqrt();
        let step_cap = 4.0 * radius_sq.sqrt() / grad_norm;
        step = (step * 2.0).min(step_cap);
        let mut advanced = false;
        for _ in 0..=settings.max_halvings {
            let mut cand: Vec<C64> = (0..dim).map(|t| x[t] + step * grad[t]).collect();
            project(&mut cand, radius_sq);
            let ascent: f64 = (0..dim)
                .map(|t| (grad[t].conj() * (cand[t] - x[t])).re)
                .sum();
            let improved = value(&cand);
            // strict improvement keeps zero-measured-gain steps from being
            // accepted forever once the objective change falls below f64
            // resolution; exhausting the search then ends the solve at
            // numerical stationarity
            if ascent > 0.0
                && improved > current
                && improved >= current + settings.armijo_sigma * 2.0 * ascent
            {
                x = cand;
                current = improved;
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if !advanced {
            // the line search only exhausts at numerical stationarity
            return Ok(x);
        }
    }
    Err(SolverError::OracleNoConvergence {
        iters: settings.max_iters,
        residual,
        last: x,
    })
}

/// Dense Hessian of one cell's smoothed objective along the segment from
/// `x0` to `x_probe`, in stacked `[x; conj(x)]` coordinates:
///
/// ```text
/// Psi(tau) = sum_k h_k blkdiag(-B_k, -B_k)
///          - mu sum_k h_k u_k u_k^H
///          + mu (sum_k h_k u_k)(sum_k h_k u_k)^H,
/// u_k = [d_k; conj(d_k)],  d_k = b5_k - B_k (x0 + tau (x_probe - x0)),
/// ```
///
/// with the softmin weights `h` evaluated at the same point. The quadratic
/// form `[v; conj(v)]^H Psi [v; conj(v)]` is the second directional
/// derivative of the smoothed objective along `v`.
pub fn build_psi(
    cell_terms: &[QuadTerm],
    mu: f64,
    x0: &[C64],
    x_probe: &[C64],
    tau: f64,
) -> DMatrix<C64> {
    let dim = x0.len();
    let point: Vec<C64> = (0..dim)
        .map(|t| x0[t] + tau * (x_probe[t] - x0[t]))
        .collect();
    let vals: Vec<f64> = cell_terms.iter().map(|t| t.eval(&point)).collect();
    let weights = softmin_weights(&vals, mu);

    let mut psi = DMatrix::from_element(2 * dim, 2 * dim, C64::new(0.0, 0.0));
    let mut mean_u = vec![C64::new(0.0, 0.0); 2 * dim];
    for (term, h) in cell_terms.iter().zip(&weights) {
        let dense = term.quad.to_dense();
        for r in 0..dim {
            for c in 0..dim {
                psi[(r, c)] -= h * dense[r][c];
                psi[(dim + r, dim + c)] -= h * dense[r][c].conj();
            }
        }
        let bx = term.quad.apply(&point);
        let d: Vec<C64> = (0..dim).map(|t| term.b5[t] - bx[t]).collect();
        let u: Vec<C64> = d
            .iter()
            .cloned()
            .chain(d.iter().map(|z| z.conj()))
            .collect();
        for r in 0..2 * dim {
            for c in 0..2 * dim {
                psi[(r, c)] -= mu * h * u[r] * u[c].conj();
            }
            mean_u[r] += h * u[r];
        }
    }
    for r in 0..2 * dim {
        for c in 0..2 * dim {
            psi[(r, c)] += mu * mean_u[r] * mean_u[c].conj();
        }
    }
    psi
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn lambda_min_hermitian(m: &DMatrix<C64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subproblem::{mm_alpha, softmin, solve_ball_qp, QuadPart};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_terms(rng: &mut ChaCha8Rng, users: usize, dim: usize) -> Vec<QuadTerm> {
        (0..users)
            .map(|_| QuadTerm {
                quad: QuadPart::Diagonal((0..dim).map(|_| 2.0 * rng.gen::<f64>()).collect()),
                b5: (0..dim)
                    .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                    .collect(),
                c5: rng.gen::<f64>() - 0.5,
            })
            .collect()
    }

    fn random_ball_point(rng: &mut ChaCha8Rng, dim: usize, radius_sq: f64) -> Vec<C64> {
        let mut x: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let s = (radius_sq * rng.gen::<f64>() / norm_sq(&x)).sqrt();
        for v in &mut x {
            *v *= s;
        }
        x
    }

    #[test]
    fn reference_solver_matches_closed_form_on_both_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let settings = OracleSettings::default();
        for case in 0..60 {
            let dim = 1 + case % 4;
            let alpha = -(0.1 + 3.0 * rng.gen::<f64>());
            let radius_sq = 0.2 + 2.0 * rng.gen::<f64>();
            let mut b8: Vec<C64> = (0..dim)
                .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            // force interior and boundary cases alternately
            let unconstrained = norm_sq(&b8).sqrt() / alpha.abs();
            let target = if case % 2 == 0 { 0.5 } else { 1.7 };
            let adjust = target * radius_sq.sqrt() / unconstrained;
            for v in &mut b8 {
                *v *= adjust;
            }
            let exact = solve_ball_qp(alpha, &b8, radius_sq).unwrap();
            let approx = projected_gradient_oracle(alpha, &b8, radius_sq, &settings).unwrap();
            let value = |x: &[C64]| alpha * norm_sq(x) + 2.0 * dot_conj(&b8, x).re;
            let (ve, va) = (value(&exact), value(&approx));
            assert!(
                (ve - va).abs() <= 1e-6 * ve.abs().max(1.0),
                "case {case}: closed {ve} vs reference {va}"
            );
        }
    }

    #[test]
    fn reference_solver_hand_boundary_case() {
        let settings = OracleSettings::default();
        let x = projected_gradient_oracle(
            -1.0,
            &[C64::new(2.0, 0.0), C64::new(0.0, 0.0)],
            1.0,
            &settings,
        )
        .unwrap();
        assert!((x[0] - C64::new(1.0, 0.0)).norm() < 1e-6);
        assert!(x[1].norm() < 1e-9);
    }

    #[test]
    fn single_user_hessian_is_pure_block_diagonal() {
        // With one user the softmin is the identity and the rank-one pieces
        // of the Hessian cancel exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let terms = random_terms(&mut rng, 1, 3);
        let x0 = random_ball_point(&mut rng, 3, 1.0);
        let xp = random_ball_point(&mut rng, 3, 1.0);
        let psi = build_psi(&terms, 10.0, &x0, &xp, 0.3);
        let dense = terms[0].quad.to_dense();
        for r in 0..6 {
            for c in 0..6 {
                let expect = if r < 3 && c < 3 {
                    -dense[r][c]
                } else if r >= 3 && c >= 3 {
                    -dense[r - 3][c - 3].conj()
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!(
                    (psi[(r, c)] - expect).norm() <= 1e-12,
                    "rank-one parts must cancel for a single user"
                );
            }
        }
    }

    #[test]
    fn hessian_matches_finite_differences_along_the_segment() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mu = 7.0;
        let terms = random_terms(&mut rng, 3, 2);
        let x0 = random_ball_point(&mut rng, 2, 1.0);
        let xp = random_ball_point(&mut rng, 2, 1.0);
        let smoothed_at = |tau: f64| -> f64 {
            let p: Vec<C64> = (0..2).map(|t| x0[t] + tau * (xp[t] - x0[t])).collect();
            let vals: Vec<f64> = terms.iter().map(|t| t.eval(&p)).collect();
            softmin(&vals, mu)
        };
        for tau in [0.2, 0.5, 0.8] {
            let h = 1e-4;
            let fd =
                (smoothed_at(tau + h) - 2.0 * smoothed_at(tau) + smoothed_at(tau - h)) / (h * h);
            let psi = build_psi(&terms, mu, &x0, &xp, tau);
            let v: Vec<C64> = (0..2).map(|t| xp[t] - x0[t]).collect();
            let stacked: Vec<C64> = v
                .iter()
                .cloned()
                .chain(v.iter().map(|z| z.conj()))
                .collect();
            let mut quad = C64::new(0.0, 0.0);
            for r in 0..4 {
                for c in 0..4 {
                    quad += stacked[r].conj() * psi[(r, c)] * stacked[c];
                }
            }
            assert!(
                quad.im.abs() <= 1e-10,
                "Hermitian form must be real, got {quad}"
            );
            assert!(
                (quad.re - fd).abs() <= 1e-4 * fd.abs().max(1.0),
                "tau {tau}: Hessian form {} vs finite difference {fd}",
                quad.re
            );
        }
    }

    #[test]
    fn curvature_bound_sits_below_the_hessian_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let users = 1 + rng.gen_range(0..3);
            let dim = 1 + rng.gen_range(0..3);
            let mu = 1.0 + 20.0 * rng.gen::<f64>();
            let radius_sq = 0.3 + rng.gen::<f64>();
            let terms = random_terms(&mut rng, users, dim);
            let alpha = mm_alpha(&terms, mu, radius_sq);
            let x0 = random_ball_point(&mut rng, dim, radius_sq);
            let xp = random_ball_point(&mut rng, dim, radius_sq);
            for s in 0..10 {
                let tau = s as f64 / 9.0;
                let psi = build_psi(&terms, mu, &x0, &xp, tau);
                let lmin = lambda_min_hermitian(&psi);
                assert!(
                    alpha <= lmin + 1e-10 * lmin.abs().max(1.0),
                    "alpha {alpha} above lambda_min {lmin}"
                );
            }
        }
    }
}
