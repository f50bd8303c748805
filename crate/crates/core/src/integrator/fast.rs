use super::mri::StageCache;
use super::newton::newton_solve;
use super::{AdditiveProblem, Diagnostics, FastSolverConfig};
use crate::error::{Error, Result};
use crate::tableaux::MriCouplingScheme;

/// Polynomial forcing `g(θ) = Σ_k (θ/H)^k g_k` on `θ ∈ [0, H]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Forcing {
    pub coefficients: Vec<Vec<f64>>,
    pub horizon: f64,
}

impl Forcing {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Adds `g(θ)` to `out`.
    pub fn add_to(&self, theta: f64, out: &mut [f64]) {
        if self.coefficients.is_empty() {
            return;
        }
        let tau = theta / self.horizon;
        for (i, o) in out.iter_mut().enumerate() {
            *o += self.coefficients.iter().rev().fold(0.0, |acc, g| acc * tau + g[i]);
        }
    }

    /// Coefficients of stage `i` (0-based) of `scheme` from cached slow
    /// right-hand sides of stages `j < i`.
    pub fn for_stage(scheme: &MriCouplingScheme, i: usize, cache: &StageCache, horizon: f64) -> Self {
        let n = cache.y[0].len();
        let coefficients = scheme
            .gamma()
            .iter()
            .zip(scheme.omega())
            .map(|(g, w)| {
                let mut acc = vec![0.0; n];
                for j in 0..i {
                    let (gij, wij) = (g[(i, j)], w[(i, j)]);
                    if gij != 0.0 {
                        for (a, f) in acc.iter_mut().zip(&cache.fi[j]) {
                            *a += gij * f;
                        }
                    }
                    if wij != 0.0 {
                        for (a, f) in acc.iter_mut().zip(&cache.fe[j]) {
                            *a += wij * f;
                        }
                    }
                }
                acc
            })
            .collect();
        Self { coefficients, horizon }
    }
}

/// Integrates `v' = scale * f^{F}(t0 + scale*θ, v) + g(θ)` over `θ ∈ [0, H]`
/// from `v(0) = v0` with `config.substeps` steps of the inner table.
#[allow(clippy::too_many_arguments)]
pub fn solve_forced_fast_ivp(
    problem: &dyn AdditiveProblem,
    config: &FastSolverConfig,
    t0: f64,
    scale: f64,
    horizon: f64,
    v0: &[f64],
    forcing: &Forcing,
    diag: &mut Diagnostics,
) -> Result<Vec<f64>> {
    let n = v0.len();
    let table = &config.table;
    let s = table.stages();
    let (a, b, c) = (table.a(), table.b(), table.c());
    let m = config.substeps.max(1);
    let h = horizon / m as f64;
    let mut v = v0.to_vec();
    let mut k = vec![vec![0.0; n]; s];
    let mut z = vec![0.0; n];
    for step in 0..m {
        let theta0 = step as f64 * h;
        for l in 0..s {
            z.copy_from_slice(&v);
            for j in 0..l {
                let alj = a[(l, j)];
                if alj != 0.0 {
                    for (zi, kj) in z.iter_mut().zip(&k[j]) {
                        *zi += h * alj * kj;
                    }
                }
            }
            let theta = theta0 + c[l] * h;
            let t = t0 + scale * theta;
            let all = a[(l, l)];
            if all == 0.0 {
                problem.f_fast(t, &z, &mut k[l]);
                diag.fast_evals += 1;
                for kl in k[l].iter_mut() {
                    *kl *= scale;
                }
                forcing.add_to(theta, &mut k[l]);
            } else {
                let mut g = vec![0.0; n];
                forcing.add_to(theta, &mut g);
                let base: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi + h * all * gi).collect();
                let shift = h * all * scale;
                let f = |y: &[f64], out: &mut [f64]| problem.f_fast(t, y, out);
                let jac = |y: &[f64]| problem.jac_fast(t, y);
                let sol = newton_solve(&f, &jac, shift, &base, base.clone(), &config.newton, diag, l + 1)?;
                for i in 0..n {
                    k[l][i] = (sol[i] - base[i]) / (h * all) + g[i];
                }
            }
        }
        for l in 0..s {
            let bl = b[l];
            if bl != 0.0 {
                for (vi, kl) in v.iter_mut().zip(&k[l]) {
                    *vi += h * bl * kl;
                }
            }
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("fast solution became non-finite at θ = {}", theta0 + h)));
        }
    }
    Ok(v)
}

/// Evolves the modified fast IVP of erk-like stage `stage` (1-based) from
/// `Y_{stage-1}` over `[0, H]`.
#[allow(clippy::too_many_arguments)]
pub fn solve_modified_fast_ivp(
    scheme: &MriCouplingScheme,
    stage: usize,
    cache: &StageCache,
    t_n: f64,
    h_slow: f64,
    problem: &dyn AdditiveProblem,
    config: &FastSolverConfig,
    diag: &mut Diagnostics,
) -> Result<Vec<f64>> {
    let s = scheme.stages();
    if !(2..=s).contains(&stage) {
        return Err(Error::StageOutOfRange { index: stage, stages: s });
    }
    let i = stage - 1;
    let forcing = Forcing::for_stage(scheme, i, cache, h_slow);
    let t0 = t_n + scheme.c()[i - 1] * h_slow;
    let dc = scheme.delta_c()[i];
    solve_forced_fast_ivp(problem, config, t0, dc, h_slow, &cache.y[i - 1], &forcing, diag)
}
