use serde::{Deserialize, Serialize};

use super::Diagnostics;
use crate::error::{Error, Result};
use crate::linalg::{max_norm, Jacobian, LinearSolver};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iterations: usize,
    pub linear_solver: LinearSolver,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_iterations: 50,
            linear_solver: LinearSolver::DenseLu,
        }
    }
}

impl NewtonConfig {
    pub fn with_solver(mut self, solver: LinearSolver) -> Self {
        self.linear_solver = solver;
        self
    }
}

/// Solves `Z - base - shift * f(Z) = 0` by Newton's method with iteration
/// matrix `I - shift * J(Z)`, refreshing the Jacobian every iteration.
///
/// Converges once the update is below `abs_tol + rel_tol * |Z|` in the max
/// norm. A residual below the same bound ends the iteration with one chord
/// correction using the previous factorization. `stage` only labels errors.
#[allow(clippy::too_many_arguments)]
pub fn newton_solve(
    f: &dyn Fn(&[f64], &mut [f64]),
    jac: &dyn Fn(&[f64]) -> Jacobian,
    shift: f64,
    base: &[f64],
    guess: Vec<f64>,
    config: &NewtonConfig,
    diag: &mut Diagnostics,
    stage: usize,
) -> Result<Vec<f64>> {
    let n = base.len();
    let mut z = guess;
    let mut fz = vec![0.0; n];
    let mut resid = vec![0.0; n];
    let fail = |reason: String| Error::NewtonFailure { stage, reason };
    let mut previous: Option<crate::linalg::Factorization> = None;
    for iter in 0..=config.max_iterations {
        f(&z, &mut fz);
        diag.newton_rhs_evals += 1;
        for i in 0..n {
            resid[i] = z[i] - base[i] - shift * fz[i];
        }
        let rnorm = max_norm(&resid);
        if !rnorm.is_finite() {
            return Err(fail("non-finite residual".into()));
        }
        if rnorm == 0.0 {
            return Ok(z);
        }
        if let Some(lu) = &previous {
            if rnorm <= config.abs_tol + config.rel_tol * max_norm(&z) {
                for r in resid.iter_mut() {
                    *r = -*r;
                }
                lu.solve_in_place(&mut resid);
                for i in 0..n {
                    z[i] += resid[i];
                }
                return Ok(z);
            }
        }
        if iter == config.max_iterations {
            break;
        }
        let j = jac(&z);
        diag.jacobian_evals += 1;
        let lu = j
            .factor_shifted(shift, config.linear_solver)
            .map_err(|_| fail("singular iteration matrix".into()))?;
        for r in resid.iter_mut() {
            *r = -*r;
        }
        lu.solve_in_place(&mut resid);
        diag.newton_iterations += 1;
        for i in 0..n {
            z[i] += resid[i];
        }
        let dnorm = max_norm(&resid);
        if !dnorm.is_finite() || z.iter().any(|v| !v.is_finite()) {
            return Err(fail("non-finite iterate".into()));
        }
        if dnorm <= config.abs_tol + config.rel_tol * max_norm(&z) {
            return Ok(z);
        }
        previous = Some(lu);
    }
    Err(fail(format!("no convergence in {} iterations", config.max_iterations)))
}
