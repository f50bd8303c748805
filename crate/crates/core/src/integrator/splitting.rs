use super::fast::{solve_forced_fast_ivp, Forcing};
use super::newton::{newton_solve, NewtonConfig};
use super::{AdditiveProblem, Diagnostics, FastSolverConfig};
use crate::error::Result;

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(y, x)| y + a * x).collect()
}

fn explicit_rhs(problem: &dyn AdditiveProblem, t: f64, y: &[f64], diag: &mut Diagnostics) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    problem.f_explicit(t, y, &mut out);
    diag.explicit_evals += 1;
    out
}

fn implicit_rhs(problem: &dyn AdditiveProblem, t: f64, y: &[f64], diag: &mut Diagnostics) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    problem.f_implicit(t, y, &mut out);
    diag.implicit_evals += 1;
    out
}

/// Solves `Y = base + shift * f^{I}(t, Y)`.
#[allow(clippy::too_many_arguments)]
fn implicit_solve(
    problem: &dyn AdditiveProblem,
    t: f64,
    shift: f64,
    base: Vec<f64>,
    newton: &NewtonConfig,
    diag: &mut Diagnostics,
    stage: usize,
) -> Result<Vec<f64>> {
    let f = |y: &[f64], out: &mut [f64]| problem.f_implicit(t, y, out);
    let jac = |y: &[f64]| problem.jac_implicit(t, y);
    newton_solve(&f, &jac, shift, &base, base.clone(), newton, diag, stage)
}

/// Heun step of size `h` on `f^{E}` alone.
fn heun(problem: &dyn AdditiveProblem, t: f64, y: &[f64], h: f64, diag: &mut Diagnostics) -> Vec<f64> {
    let k1 = explicit_rhs(problem, t, y, diag);
    let k2 = explicit_rhs(problem, t + h, &axpy(y, h, &k1), diag);
    y.iter()
        .zip(k1.iter().zip(&k2))
        .map(|(y, (a, b))| y + 0.5 * h * (a + b))
        .collect()
}

/// First-order Lie-Trotter splitting: explicit Euler on `f^{E}`, backward
/// Euler on `f^{I}`, then the fast IVP over `[0, H]`.
pub fn lie_trotter_step(
    problem: &dyn AdditiveProblem,
    t_n: f64,
    y_n: &[f64],
    h: f64,
    fast: &FastSolverConfig,
    newton: &NewtonConfig,
    diag: &mut Diagnostics,
) -> Result<Vec<f64>> {
    let fe = explicit_rhs(problem, t_n, y_n, diag);
    let y1 = axpy(y_n, h, &fe);
    let y2 = implicit_solve(problem, t_n + h, h, y1, newton, diag, 2)?;
    let y = solve_forced_fast_ivp(problem, fast, t_n, 1.0, h, &y2, &Forcing::zero(), diag)?;
    diag.steps += 1;
    Ok(y)
}

/// Second-order Strang-Marchuk splitting: Heun and implicit-trapezoid half
/// steps on the slow partitions around a full fast solve.
pub fn strang_step(
    problem: &dyn AdditiveProblem,
    t_n: f64,
    y_n: &[f64],
    h: f64,
    fast: &FastSolverConfig,
    newton: &NewtonConfig,
    diag: &mut Diagnostics,
) -> Result<Vec<f64>> {
    let half = 0.5 * h;
    let t_mid = t_n + half;
    let y1 = heun(problem, t_n, y_n, half, diag);
    let fi1 = implicit_rhs(problem, t_n, &y1, diag);
    let y2 = implicit_solve(problem, t_mid, 0.25 * h, axpy(&y1, 0.25 * h, &fi1), newton, diag, 2)?;
    let y3 = solve_forced_fast_ivp(problem, fast, t_n, 1.0, h, &y2, &Forcing::zero(), diag)?;
    let fi3 = implicit_rhs(problem, t_mid, &y3, diag);
    let y4 = implicit_solve(problem, t_n + h, 0.25 * h, axpy(&y3, 0.25 * h, &fi3), newton, diag, 4)?;
    let y = heun(problem, t_mid, &y4, half, diag);
    diag.steps += 1;
    Ok(y)
}
