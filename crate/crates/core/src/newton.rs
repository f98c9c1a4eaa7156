//! Damped Newton minimization for smooth convex objectives.
//!
//! Used twice: once to freeze the optimum of catalog members without a closed
//! form, and once per time point along the Tikhonov path. Steps are Newton
//! directions from a Cholesky solve (with a Levenberg shift when the Hessian
//! is only semidefinite), globalized by Armijo backtracking.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// A twice-differentiable convex function on `R^d`.
pub trait SmoothConvex {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient_into(&self, x: &[f64], out: &mut [f64]);
    /// Row-major `d x d` Hessian.
    fn hessian_into(&self, x: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Stop once `|grad| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;

pub fn minimize<F: SmoothConvex + ?Sized>(
    f: &F,
    x0: &[f64],
    opts: NewtonOptions,
) -> Result<NewtonOutcome> {
    let d = f.dim();
    assert_eq!(x0.len(), d, "start point has wrong dimension");

    let mut x = x0.to_vec();
    let mut grad = vec![0.0; d];
    let mut hess = vec![0.0; d * d];
    let mut trial = vec![0.0; d];
    let mut trial_grad = vec![0.0; d];

    f.gradient_into(&x, &mut grad);
    let mut residual = linalg::norm(&grad);
    let mut fx = f.value(&x);

    for iter in 0..opts.max_iter {
        if residual <= opts.tol {
            return Ok(NewtonOutcome {
                x,
                residual,
                iterations: iter,
            });
        }
        if !residual.is_finite() || !fx.is_finite() {
            break;
        }

        f.hessian_into(&x, &mut hess);
        let dir = newton_direction(&hess, &grad, d);
        let slope = linalg::dot(&grad, &dir);

        // Full step accepted when it reduces the gradient norm: near the
        // optimum the value decrease drops below rounding and Armijo alone
        // would stall.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACK {
            for i in 0..d {
                trial[i] = x[i] + step * dir[i];
            }
            let f_trial = f.value(&trial);
            if f_trial.is_finite() {
                if f_trial <= fx + ARMIJO_C * step * slope {
                    accepted = true;
                    fx = f_trial;
                    break;
                }
                f.gradient_into(&trial, &mut trial_grad);
                if step == 1.0 && linalg::norm(&trial_grad) < residual && f_trial <= fx + 1e-12 * (1.0 + fx.abs()) {
                    accepted = true;
                    fx = f_trial;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        x.copy_from_slice(&trial);
        f.gradient_into(&x, &mut grad);
        residual = linalg::norm(&grad);
    }

    if residual <= opts.tol {
        return Ok(NewtonOutcome {
            x,
            residual,
            iterations: opts.max_iter,
        });
    }
    Err(Error::NewtonFailed {
        iterations: opts.max_iter,
        residual,
    })
}

/// Solves `H d = -g`, shifting `H` by `mu I` until the Cholesky factorization
/// succeeds. Falls back to steepest descent.
fn newton_direction(hess: &[f64], grad: &[f64], d: usize) -> Vec<f64> {
    let h = DMatrix::from_row_slice(d, d, hess);
    let rhs = -DVector::from_column_slice(grad);
    let scale = h.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);

    let mut mu = 0.0;
    for _ in 0..12 {
        let shifted = if mu == 0.0 {
            h.clone()
        } else {
            &h + DMatrix::identity(d, d) * mu
        };
        if let Some(chol) = shifted.cholesky() {
            let dir = chol.solve(&rhs);
            if dir.iter().all(|v| v.is_finite()) && dir.dot(&rhs) > 0.0 {
                return dir.iter().copied().collect();
            }
        }
        mu = if mu == 0.0 { 1e-12 * scale } else { mu * 100.0 };
    }
    grad.iter().map(|g| -g).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic {
        diag: Vec<f64>,
        center: Vec<f64>,
    }

    impl SmoothConvex for Quadratic {
        fn dim(&self) -> usize {
            self.diag.len()
        }
        fn value(&self, x: &[f64]) -> f64 {
            x.iter()
                .zip(&self.center)
                .zip(&self.diag)
                .map(|((xi, ci), di)| 0.5 * di * (xi - ci) * (xi - ci))
                .sum()
        }
        fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
            for i in 0..x.len() {
                out[i] = self.diag[i] * (x[i] - self.center[i]);
            }
        }
        fn hessian_into(&self, _x: &[f64], out: &mut [f64]) {
            let d = self.dim();
            out.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..d {
                out[i * d + i] = self.diag[i];
            }
        }
    }

    #[test]
    fn quadratic_in_one_step() {
        let f = Quadratic {
            diag: vec![2.0, 10.0],
            center: vec![1.0, -3.0],
        };
        let out = minimize(&f, &[0.0, 0.0], NewtonOptions::default()).unwrap();
        assert!(out.iterations <= 2);
        assert!((out.x[0] - 1.0).abs() < 1e-14);
        assert!((out.x[1] + 3.0).abs() < 1e-14);
    }

    /// Linear function: Hessian identically zero, no minimizer.
    struct Linear;

    impl SmoothConvex for Linear {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            x[0]
        }
        fn gradient_into(&self, _x: &[f64], out: &mut [f64]) {
            out[0] = 1.0;
        }
        fn hessian_into(&self, _x: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
    }

    #[test]
    fn unbounded_objective_reports_failure() {
        let err = minimize(
            &Linear,
            &[0.0],
            NewtonOptions {
                tol: 1e-10,
                max_iter: 50,
            },
        )
        .unwrap_err();
        match err {
            Error::NewtonFailed { residual, .. } => assert!((residual - 1.0).abs() < 1e-12),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
