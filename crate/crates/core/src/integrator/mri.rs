use super::fast::solve_modified_fast_ivp;
use super::newton::{newton_solve, NewtonConfig};
use super::{AdditiveProblem, Diagnostics, FastSolverConfig};
use crate::error::{Error, Result};
use crate::tableaux::{averaged_couplings, stage_classes, MriCouplingScheme, StageClass};

/// Slow stage values and their cached slow right-hand sides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageCache {
    pub y: Vec<Vec<f64>>,
    pub fi: Vec<Vec<f64>>,
    pub fe: Vec<Vec<f64>>,
}

impl StageCache {
    fn start(y_n: &[f64]) -> Self {
        Self {
            y: vec![y_n.to_vec()],
            fi: Vec::new(),
            fe: Vec::new(),
        }
    }

    fn record_rhs(&mut self, problem: &dyn AdditiveProblem, t: f64, diag: &mut Diagnostics) {
        let y = self.y.last().expect("stage present");
        let mut fi = vec![0.0; y.len()];
        let mut fe = vec![0.0; y.len()];
        problem.f_implicit(t, y, &mut fi);
        problem.f_explicit(t, y, &mut fe);
        diag.implicit_evals += 1;
        diag.explicit_evals += 1;
        self.fi.push(fi);
        self.fe.push(fe);
    }
}

/// Known part `H Σ_{j<i} (γ̄_ij f^I_j + ω̄_ij f^E_j)` of stage `i` (0-based).
fn known_sum(gbar: &nalgebra::DMatrix<f64>, obar: &nalgebra::DMatrix<f64>, i: usize, cache: &StageCache, h: f64) -> Vec<f64> {
    let n = cache.y[0].len();
    let mut r = vec![0.0; n];
    for j in 0..i {
        let (g, w) = (gbar[(i, j)], obar[(i, j)]);
        for k in 0..n {
            r[k] += h * (g * cache.fi[j][k] + w * cache.fe[j][k]);
        }
    }
    r
}

/// Solves implicit stage `stage` (1-based):
/// `Y - Y_{i-1} - H γ̄_ii f^{I}(t_n + c_i H, Y) - r = 0`.
#[allow(clippy::too_many_arguments)]
pub fn implicit_stage_solve(
    scheme: &MriCouplingScheme,
    stage: usize,
    cache: &StageCache,
    t_n: f64,
    h: f64,
    problem: &dyn AdditiveProblem,
    newton: &NewtonConfig,
    diag: &mut Diagnostics,
) -> Result<Vec<f64>> {
    let s = scheme.stages();
    if !(2..=s).contains(&stage) {
        return Err(Error::StageOutOfRange { index: stage, stages: s });
    }
    let i = stage - 1;
    let (gbar, obar) = averaged_couplings(scheme);
    implicit_solve(&gbar, &obar, scheme, i, cache, t_n, h, problem, newton, diag)
}

#[allow(clippy::too_many_arguments)]
fn implicit_solve(
    gbar: &nalgebra::DMatrix<f64>,
    obar: &nalgebra::DMatrix<f64>,
    scheme: &MriCouplingScheme,
    i: usize,
    cache: &StageCache,
    t_n: f64,
    h: f64,
    problem: &dyn AdditiveProblem,
    newton: &NewtonConfig,
    diag: &mut Diagnostics,
) -> Result<Vec<f64>> {
    let r = known_sum(gbar, obar, i, cache, h);
    let base: Vec<f64> = cache.y[i - 1].iter().zip(&r).map(|(y, r)| y + r).collect();
    let t = t_n + scheme.c()[i] * h;
    let shift = h * gbar[(i, i)];
    let f = |y: &[f64], out: &mut [f64]| problem.f_implicit(t, y, out);
    let jac = |y: &[f64]| problem.jac_implicit(t, y);
    newton_solve(&f, &jac, shift, &base, base.clone(), newton, diag, i + 1)
}

/// One IMEX-MRI-GARK step of size `h` from `(t_n, y_n)`.
#[allow(clippy::too_many_arguments)]
pub fn mri_step(
    scheme: &MriCouplingScheme,
    problem: &dyn AdditiveProblem,
    t_n: f64,
    y_n: &[f64],
    h: f64,
    fast: &FastSolverConfig,
    newton: &NewtonConfig,
    diag: &mut Diagnostics,
) -> Result<Vec<f64>> {
    if !h.is_finite() || h < 0.0 {
        return Err(Error::Domain(format!("step size must be finite and non-negative, got {h}")));
    }
    let classes = stage_classes(scheme);
    if classes.contains(&StageClass::SolveCoupled) {
        return Err(Error::SolveCoupled(scheme.name().to_string()));
    }
    let s = scheme.stages();
    let (gbar, obar) = averaged_couplings(scheme);
    let mut cache = StageCache::start(y_n);
    if s > 1 {
        cache.record_rhs(problem, t_n, diag);
    }
    for i in 1..s {
        let yi = match classes[i] {
            StageClass::ErkLike => solve_modified_fast_ivp(scheme, i + 1, &cache, t_n, h, problem, fast, diag)?,
            StageClass::Implicit => implicit_solve(&gbar, &obar, scheme, i, &cache, t_n, h, problem, newton, diag)?,
            StageClass::ExplicitAlgebraic => {
                let r = known_sum(&gbar, &obar, i, &cache, h);
                cache.y[i - 1].iter().zip(&r).map(|(y, r)| y + r).collect()
            }
            StageClass::SolveCoupled => unreachable!("rejected above"),
        };
        cache.y.push(yi);
        if i + 1 < s {
            cache.record_rhs(problem, t_n + scheme.c()[i] * h, diag);
        }
    }
    diag.steps += 1;
    Ok(cache.y.pop().expect("at least one stage"))
}
