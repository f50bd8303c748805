use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{AdditiveProblem, Diagnostics, NewtonConfig, Trajectory};
use crate::linalg::{max_norm, Factorization, Jacobian};
use crate::tableaux::ButcherTable;

/// Single-rate diagonally implicit integration of the full right-hand side
/// with a simplified Newton iteration (Jacobian of all three partitions
/// frozen at the start of each step).
#[allow(clippy::too_many_arguments)]
pub fn dirk_solve(
    problem: &dyn AdditiveProblem,
    table: &ButcherTable,
    h: f64,
    t0: f64,
    y0: &[f64],
    output_times: &[f64],
    newton: &NewtonConfig,
) -> Result<Trajectory> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step size must be positive, got {h}")));
    }
    let n = y0.len();
    let s = table.stages();
    let (a, b, c) = (table.a(), table.b(), table.c());
    let mut diag = Diagnostics::default();
    let mut traj = Trajectory {
        method: "dirk-reference".into(),
        times: vec![t0],
        states: vec![y0.to_vec()],
        diagnostics: Diagnostics::default(),
        failure: None,
    };
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k = vec![vec![0.0; n]; s];
    let mut fz = vec![0.0; n];
    for &target in output_times {
        let interval = target - t;
        if interval <= 1e-12 * target.abs().max(1.0) {
            continue;
        }
        let steps = ((interval / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let start = t;
        for step in 0..steps {
            let tn = start + step as f64 * h;
            let hs = if step + 1 == steps { target - tn } else { h };
            let jac = {
                let ji = problem.jac_implicit(tn, &y);
                let jf = problem.jac_fast(tn, &y);
                match problem.jac_explicit(tn, &y) {
                    Some(je) => Jacobian::sum(&[&ji, &jf, &je]),
                    None => Jacobian::sum(&[&ji, &jf]),
                }
            };
            diag.jacobian_evals += 1;
            let mut cached: Option<(f64, Factorization)> = None;
            for l in 0..s {
                let mut base = y.clone();
                for j in 0..l {
                    let alj = a[(l, j)];
                    if alj != 0.0 {
                        for (bi, kj) in base.iter_mut().zip(&k[j]) {
                            *bi += hs * alj * kj;
                        }
                    }
                }
                let tl = tn + c[l] * hs;
                let gamma = hs * a[(l, l)];
                if gamma == 0.0 {
                    problem.f_full(tl, &base, &mut k[l]);
                    continue;
                }
                let fresh = !matches!(&cached, Some((g, _)) if *g == gamma);
                if fresh {
                    cached = Some((gamma, jac.factor_shifted(gamma, newton.linear_solver)?));
                }
                let lu = &cached.as_ref().expect("factored").1;
                let mut z = base.clone();
                let mut converged = false;
                for _ in 0..newton.max_iterations {
                    problem.f_full(tl, &z, &mut fz);
                    diag.newton_rhs_evals += 1;
                    let mut r: Vec<f64> = (0..n).map(|i| base[i] + gamma * fz[i] - z[i]).collect();
                    lu.solve_in_place(&mut r);
                    diag.newton_iterations += 1;
                    for i in 0..n {
                        z[i] += r[i];
                    }
                    let dn = max_norm(&r);
                    if !dn.is_finite() {
                        break;
                    }
                    if dn <= newton.abs_tol + newton.rel_tol * max_norm(&z) {
                        converged = true;
                        break;
                    }
                }
                if !converged {
                    traj.failure = Some(format!("stage {} Newton failure at t = {tn}", l + 1));
                    traj.diagnostics = diag;
                    return Ok(traj);
                }
                for i in 0..n {
                    k[l][i] = (z[i] - base[i]) / gamma;
                }
            }
            for l in 0..s {
                for (yi, kl) in y.iter_mut().zip(&k[l]) {
                    *yi += hs * b[l] * kl;
                }
            }
            diag.steps += 1;
        }
        t = target;
        traj.times.push(t);
        traj.states.push(y.clone());
    }
    traj.diagnostics = diag;
    Ok(traj)
}

/// A reference trajectory together with its Richardson self-consistency gap
/// (max difference between runs at `h` and `h/2`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceSolution {
    pub trajectory: Trajectory,
    pub step: f64,
    pub richardson_gap: f64,
    /// `gap / (2^p - 1)`: estimated error of the finer run.
    pub estimated_error: f64,
}

/// Runs [`dirk_solve`] at `h` and `h/2` and returns the finer trajectory.
pub fn reference_solution(
    problem: &dyn AdditiveProblem,
    table: &ButcherTable,
    order: u32,
    h: f64,
    y0: &[f64],
    output_times: &[f64],
) -> Result<ReferenceSolution> {
    let newton = NewtonConfig {
        abs_tol: 1e-14,
        rel_tol: 1e-13,
        max_iterations: 30,
        linear_solver: crate::linalg::LinearSolver::BandedLu,
    };
    let coarse = dirk_solve(problem, table, h, 0.0, y0, output_times, &newton)?;
    let fine = dirk_solve(problem, table, 0.5 * h, 0.0, y0, output_times, &newton)?;
    if let Some(f) = coarse.failure.as_ref().or(fine.failure.as_ref()) {
        return Err(Error::NewtonFailure { stage: 0, reason: f.clone() });
    }
    let gap = max_error(&coarse, &fine.times, &fine.states)?;
    Ok(ReferenceSolution {
        trajectory: fine,
        step: 0.5 * h,
        richardson_gap: gap,
        estimated_error: gap / (2f64.powi(order as i32) - 1.0),
    })
}

/// Max over matching output times of the max-norm state error.
pub fn max_error(traj: &Trajectory, times: &[f64], states: &[Vec<f64>]) -> Result<f64> {
    if traj.times.len() != times.len() {
        return Err(Error::DimensionMismatch(format!(
            "trajectory has {} outputs, reference {}",
            traj.times.len(),
            times.len()
        )));
    }
    let mut err = 0.0_f64;
    for ((t, y), (tr, yr)) in traj.times.iter().zip(&traj.states).zip(times.iter().zip(states)) {
        if (t - tr).abs() > 1e-10 * tr.abs().max(1.0) {
            return Err(Error::Domain(format!("output time mismatch: {t} vs {tr}")));
        }
        for (a, b) in y.iter().zip(yr) {
            let d = (a - b).abs();
            err = if d.is_nan() { f64::INFINITY } else { err.max(d) };
        }
    }
    Ok(err)
}

/// Max error against the problem's exact solution at the trajectory times.
pub fn max_error_exact(traj: &Trajectory, problem: &dyn AdditiveProblem) -> Result<f64> {
    let states = traj
        .times
        .iter()
        .map(|&t| problem.exact(t).ok_or_else(|| Error::Domain("problem has no exact solution".into())))
        .collect::<Result<Vec<_>>>()?;
    max_error(traj, &traj.times, &states)
}
