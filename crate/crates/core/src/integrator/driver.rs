use serde::Serialize;

use super::mri::mri_step;
use super::newton::NewtonConfig;
use super::splitting::{lie_trotter_step, strang_step};
use super::{AdditiveProblem, Diagnostics, FastSolverConfig};
use crate::format::number;
use crate::catalog::{self, MethodData, SplittingKind};
use crate::error::{Error, Result};
use crate::tableaux::MriCouplingScheme;

/// A steppable multirate method.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Mri(MriCouplingScheme),
    LieTrotter,
    StrangMarchuk,
}

impl Method {
    /// Resolves a catalog name to a steppable method.
    pub fn from_name(name: &str) -> Result<Self> {
        let entry = catalog::get_method(name)?;
        match entry.data {
            MethodData::Coupling(s) => Ok(Method::Mri(s)),
            MethodData::Splitting(SplittingKind::LieTrotter) => Ok(Method::LieTrotter),
            MethodData::Splitting(SplittingKind::StrangMarchuk) => Ok(Method::StrangMarchuk),
            _ => Err(Error::InvalidScheme(format!(
                "`{name}` is a single-rate table, not a multirate method"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Method::Mri(s) => s.name(),
            Method::LieTrotter => "lie-trotter",
            Method::StrangMarchuk => "strang-marchuk",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepConfig {
    pub fast: FastSolverConfig,
    pub newton: NewtonConfig,
}

impl StepConfig {
    pub fn new(fast: FastSolverConfig) -> Self {
        Self {
            fast,
            newton: NewtonConfig::default(),
        }
    }
}

/// A method plus its configuration and accumulated work counters.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub method: Method,
    pub config: StepConfig,
    pub diagnostics: Diagnostics,
}

impl Stepper {
    pub fn new(method: Method, config: StepConfig) -> Self {
        Self {
            method,
            config,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn step(&mut self, problem: &dyn AdditiveProblem, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>> {
        let StepConfig { fast, newton } = &self.config;
        let d = &mut self.diagnostics;
        match &self.method {
            Method::Mri(s) => mri_step(s, problem, t, y, h, fast, newton, d),
            Method::LieTrotter => lie_trotter_step(problem, t, y, h, fast, newton, d),
            Method::StrangMarchuk => strang_step(problem, t, y, h, fast, newton, d),
        }
    }
}

/// States at the requested output times plus work counters. `failure` is
/// set when the march stopped early; the recorded states are then partial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub method: String,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub diagnostics: Diagnostics,
    pub failure: Option<String>,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn final_state(&self) -> Option<&[f64]> {
        self.states.last().map(|v| v.as_slice())
    }

    /// CSV with header `t,y1,...,yn`.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |s| s.len());
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",y{i}"));
        }
        out.push('\n');
        for (t, y) in self.times.iter().zip(&self.states) {
            out.push_str(&number(*t));
            for v in y {
                out.push_str(&format!(",{}", number(*v)));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Relative slack used when deciding whether a step lands on an output time.
const LANDING_TOL: f64 = 1e-12;

/// Fixed-step march from `t0` to `tf` recording the state at `t0`, at each
/// output time and at `tf`. The last step before every output time is
/// shortened so the step endpoint lands on it exactly.
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    method: &Method,
    problem: &dyn AdditiveProblem,
    t0: f64,
    tf: f64,
    h: f64,
    output_times: &[f64],
    y0: &[f64],
    config: &StepConfig,
) -> Result<Trajectory> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("step size must be positive, got {h}")));
    }
    if tf < t0 {
        return Err(Error::Domain(format!("final time {tf} precedes initial time {t0}")));
    }
    if y0.len() != problem.dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} entries, problem dimension is {}",
            y0.len(),
            problem.dim()
        )));
    }
    let span = (tf - t0).abs().max(1.0);
    let mut targets: Vec<f64> = Vec::with_capacity(output_times.len() + 1);
    for &t in output_times {
        if t < t0 - LANDING_TOL * span || t > tf + LANDING_TOL * span {
            return Err(Error::Domain(format!("output time {t} outside [{t0}, {tf}]")));
        }
        if let Some(&last) = targets.last() {
            if t < last {
                return Err(Error::Domain("output times must be sorted".into()));
            }
        }
        targets.push(t);
    }
    if targets.last().map_or(true, |&t| t < tf - LANDING_TOL * span) {
        targets.push(tf);
    }

    let mut stepper = Stepper::new(method.clone(), config.clone());
    let mut traj = Trajectory {
        method: method.name().to_string(),
        times: vec![t0],
        states: vec![y0.to_vec()],
        diagnostics: Diagnostics::default(),
        failure: None,
    };
    let mut t = t0;
    let mut y = y0.to_vec();
    'outer: for &target in &targets {
        let interval = target - t;
        if interval <= LANDING_TOL * span {
            continue;
        }
        let steps = ((interval / h) * (1.0 - LANDING_TOL)).ceil().max(1.0) as usize;
        let start = t;
        for k in 0..steps {
            let t_k = start + k as f64 * h;
            let step = if k + 1 == steps { target - t_k } else { h };
            match stepper.step(problem, t_k, &y, step) {
                Ok(next) => {
                    if next.iter().any(|v| !v.is_finite()) {
                        traj.failure = Some(format!("solution became non-finite at t = {}", t_k + step));
                        break 'outer;
                    }
                    y = next;
                }
                Err(e) => {
                    traj.failure = Some(format!("step from t = {t_k} failed: {e}"));
                    break 'outer;
                }
            }
        }
        t = target;
        traj.times.push(t);
        traj.states.push(y.clone());
    }
    traj.diagnostics = stepper.diagnostics;
    Ok(traj)
}
