//! Convergence studies and single runs on the built-in test problems,
//! configured from JSON.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::format::number;
use crate::catalog;
use crate::error::{Error, Result};
use crate::integrator::{integrate, AdditiveProblem, Diagnostics, FastSolverConfig, Method, NewtonConfig, StepConfig, Trajectory};
use crate::linalg::LinearSolver;
use crate::problems::{
    brusselator_output_times, brusselator_problem, kpr_output_times, kpr_problem, max_error, max_error_exact,
    reference_solution, BrusselatorConfig, ReferenceSolution, KprParameters, BRUSSELATOR_FINAL_TIME, KPR_FINAL_TIME,
};
use crate::tableaux::ButcherTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Kpr,
    Brusselator,
}

impl ProblemKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemKind::Kpr => "kpr",
            ProblemKind::Brusselator => "brusselator",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kpr" => Ok(ProblemKind::Kpr),
            "brusselator" => Ok(ProblemKind::Brusselator),
            other => Err(Error::Parse(format!("unknown problem `{other}`; expected kpr or brusselator"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: ProblemKind,
    #[serde(default)]
    pub kpr: KprParameters,
    #[serde(default)]
    pub brusselator: BrusselatorConfig,
}

impl ProblemSpec {
    pub fn new(name: ProblemKind) -> Self {
        Self {
            name,
            kpr: KprParameters::default(),
            brusselator: BrusselatorConfig::default(),
        }
    }

    pub fn build(&self) -> Result<BuiltProblem> {
        Ok(match self.name {
            ProblemKind::Kpr => {
                let p = kpr_problem(self.kpr);
                BuiltProblem {
                    y0: p.initial_state(),
                    problem: Box::new(p),
                    final_time: KPR_FINAL_TIME,
                    output_times: kpr_output_times(),
                    has_exact: true,
                }
            }
            ProblemKind::Brusselator => {
                let p = brusselator_problem(self.brusselator)?;
                BuiltProblem {
                    y0: p.initial_state(),
                    problem: Box::new(p),
                    final_time: BRUSSELATOR_FINAL_TIME,
                    output_times: brusselator_output_times(),
                    has_exact: false,
                }
            }
        })
    }

    pub fn default_solver(&self) -> LinearSolver {
        match self.name {
            ProblemKind::Kpr => LinearSolver::DenseLu,
            ProblemKind::Brusselator => LinearSolver::BandedLu,
        }
    }

    /// Largest step of the standard ladder `base / 2^k`.
    pub fn default_ladder_base(&self) -> f64 {
        match self.name {
            ProblemKind::Kpr => std::f64::consts::PI,
            ProblemKind::Brusselator => 0.1,
        }
    }
}

pub struct BuiltProblem {
    pub problem: Box<dyn AdditiveProblem>,
    pub y0: Vec<f64>,
    pub final_time: f64,
    pub output_times: Vec<f64>,
    pub has_exact: bool,
}

/// Slow step sizes: an explicit list or `base / 2^k` for `k_min..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ladder {
    Steps(Vec<f64>),
    Halving { base: f64, k_min: i32, k_max: i32 },
}

impl Ladder {
    pub fn steps(&self) -> Result<Vec<f64>> {
        let steps = match self {
            Ladder::Steps(v) => v.clone(),
            Ladder::Halving { base, k_min, k_max } => (*k_min..=*k_max).map(|k| base / 2f64.powi(k)).collect(),
        };
        if steps.is_empty() {
            return Err(Error::Domain("step ladder is empty".into()));
        }
        if steps.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::Domain("ladder steps must be positive and finite".into()));
        }
        if steps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Domain("ladder steps must be strictly decreasing".into()));
        }
        Ok(steps)
    }
}

/// Inner fast solver: a catalog table and the number of substeps `H / h`
/// per fast IVP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerSpec {
    pub table: String,
    pub substeps: usize,
}

impl InnerSpec {
    pub fn table(&self) -> Result<ButcherTable> {
        let entry = catalog::get_method(&self.table)?;
        entry
            .table()
            .cloned()
            .ok_or_else(|| Error::InvalidTable(format!("`{}` is not a single-rate table", self.table)))
    }
}

/// Single-rate DIRK reference for problems without an exact solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReferenceSpec {
    pub table: String,
    pub order: u32,
    pub step: f64,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        Self {
            table: "sdirk3".into(),
            order: 3,
            step: 1e-5,
        }
    }
}

/// Rate-fit window: an explicit index range into the ladder, or (default)
/// every completed entry with error in `[floor_factor * reference_error, ceiling]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitWindow {
    pub first: Option<usize>,
    pub last: Option<usize>,
    pub floor_factor: f64,
    pub ceiling: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            first: None,
            last: None,
            floor_factor: 10.0,
            ceiling: 1e-1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub method: String,
    pub problem: ProblemSpec,
    pub ladder: Ladder,
    pub inner: InnerSpec,
    #[serde(default)]
    pub newton: Option<NewtonConfig>,
    #[serde(default)]
    pub reference: ReferenceSpec,
    #[serde(default)]
    pub fit: FitWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderEntry {
    pub step: f64,
    pub error: f64,
    pub failure: Option<String>,
    pub diagnostics: Diagnostics,
}

impl LadderEntry {
    pub fn completed(&self) -> bool {
        self.failure.is_none() && self.error.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceResult {
    pub method: String,
    pub problem: ProblemKind,
    pub entries: Vec<LadderEntry>,
    /// Indices used for the fit.
    pub fitted: Vec<usize>,
    /// Least-squares slope of `log(error)` against `log(H)`; NaN with fewer
    /// than two fitted points.
    pub rate: f64,
    /// Estimated reference error (zero for an exact solution).
    pub reference_error: f64,
    /// Max difference between the reference runs at `h` and `h/2`.
    pub richardson_gap: f64,
    pub warnings: Vec<String>,
}

impl ConvergenceResult {
    /// CSV `H,max_error,status`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("H,max_error,status\n");
        for (i, e) in self.entries.iter().enumerate() {
            let status = if !e.completed() {
                "failed"
            } else if self.fitted.contains(&i) {
                "fitted"
            } else {
                "excluded"
            };
            out.push_str(&format!("{},{},{}\n", number(e.step), number(e.error), status));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn fit_rate(h: &[f64], err: &[f64]) -> f64 {
    let n = h.len().min(err.len());
    if n < 2 {
        return f64::NAN;
    }
    let xs: Vec<f64> = h[..n].iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = err[..n].iter().map(|x| x.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

impl ConvergenceStudy {
    pub fn step_config(&self) -> Result<StepConfig> {
        let newton = self
            .newton
            .unwrap_or_else(|| NewtonConfig::default().with_solver(self.problem.default_solver()));
        let mut fast = FastSolverConfig::new(self.inner.table()?, self.inner.substeps);
        fast.newton = newton;
        Ok(StepConfig { fast, newton })
    }

    /// Computes the reference solution this study compares against; `None`
    /// when the problem has an exact solution.
    pub fn reference_solution(&self) -> Result<Option<ReferenceSolution>> {
        let built = self.problem.build()?;
        if built.has_exact {
            return Ok(None);
        }
        let table = catalog::get_method(&self.reference.table)?
            .table()
            .cloned()
            .ok_or_else(|| Error::InvalidTable(format!("`{}` is not a single-rate table", self.reference.table)))?;
        reference_solution(
            built.problem.as_ref(),
            &table,
            self.reference.order,
            self.reference.step,
            &built.y0,
            &built.output_times,
        )
        .map(Some)
    }

    pub fn run(&self) -> Result<ConvergenceResult> {
        let reference = self.reference_solution()?;
        self.run_with_reference(reference.as_ref())
    }

    /// Runs the ladder against a precomputed reference (ignored when the
    /// problem has an exact solution).
    pub fn run_with_reference(&self, reference: Option<&ReferenceSolution>) -> Result<ConvergenceResult> {
        let steps = self.ladder.steps()?;
        let method = Method::from_name(&self.method)?;
        let config = self.step_config()?;
        let built = self.problem.build()?;
        let problem = built.problem.as_ref();
        let mut warnings = Vec::new();

        let (reference, reference_error, richardson_gap) = match (built.has_exact, reference) {
            (true, _) => (None, 0.0, 0.0),
            (false, Some(r)) => (Some(&r.trajectory), r.estimated_error, r.richardson_gap),
            (false, None) => {
                return Err(Error::Domain("problem has no exact solution and no reference was given".into()))
            }
        };

        let entries: Vec<LadderEntry> = steps
            .par_iter()
            .map(|&h| {
                let traj = integrate(&method, problem, 0.0, built.final_time, h, &built.output_times, &built.y0, &config);
                match traj {
                    Ok(t) => entry_from(h, t, reference, problem),
                    Err(e) => LadderEntry {
                        step: h,
                        error: f64::INFINITY,
                        failure: Some(e.to_string()),
                        diagnostics: Diagnostics::default(),
                    },
                }
            })
            .collect();

        let fitted: Vec<usize> = match (self.fit.first, self.fit.last) {
            (None, None) => {
                let floor = self.fit.floor_factor * reference_error;
                (0..entries.len())
                    .filter(|&i| {
                        let e = &entries[i];
                        e.completed() && e.error >= floor && e.error <= self.fit.ceiling && e.error > 0.0
                    })
                    .collect()
            }
            (first, last) => {
                let first = first.unwrap_or(0);
                let last = last.unwrap_or(entries.len().saturating_sub(1)).min(entries.len().saturating_sub(1));
                (first..=last).filter(|&i| entries[i].completed() && entries[i].error > 0.0).collect()
            }
        };
        for (i, e) in entries.iter().enumerate() {
            if let Some(f) = &e.failure {
                warnings.push(format!("H = {} failed: {f}", e.step));
            } else if !fitted.contains(&i) {
                warnings.push(format!("H = {} excluded from fit (error {})", e.step, e.error));
            }
        }
        let rate = fit_rate(
            &fitted.iter().map(|&i| entries[i].step).collect::<Vec<_>>(),
            &fitted.iter().map(|&i| entries[i].error).collect::<Vec<_>>(),
        );
        if rate.is_nan() {
            warnings.push("fewer than two usable ladder entries; rate undefined".into());
        }
        Ok(ConvergenceResult {
            method: self.method.clone(),
            problem: self.problem.name,
            entries,
            fitted,
            rate,
            reference_error,
            richardson_gap,
            warnings,
        })
    }
}

fn entry_from(h: f64, traj: Trajectory, reference: Option<&Trajectory>, problem: &dyn AdditiveProblem) -> LadderEntry {
    let diagnostics = traj.diagnostics;
    if let Some(f) = traj.failure {
        return LadderEntry {
            step: h,
            error: f64::INFINITY,
            failure: Some(f),
            diagnostics,
        };
    }
    let err = match reference {
        Some(r) => max_error(&traj, &r.times, &r.states),
        None => max_error_exact(&traj, problem),
    };
    match err {
        Ok(error) => LadderEntry {
            step: h,
            error,
            failure: None,
            diagnostics,
        },
        Err(e) => LadderEntry {
            step: h,
            error: f64::INFINITY,
            failure: Some(e.to_string()),
            diagnostics,
        },
    }
}

/// One fixed-step run recorded at the problem's standard output times
/// (or `output_times` when given).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationStudy {
    pub method: String,
    pub problem: ProblemSpec,
    pub step: f64,
    pub inner: InnerSpec,
    #[serde(default)]
    pub newton: Option<NewtonConfig>,
    #[serde(default)]
    pub output_times: Option<Vec<f64>>,
    #[serde(default)]
    pub final_time: Option<f64>,
}

impl IntegrationStudy {
    pub fn run(&self) -> Result<(Trajectory, BuiltProblem)> {
        let method = Method::from_name(&self.method)?;
        let newton = self
            .newton
            .unwrap_or_else(|| NewtonConfig::default().with_solver(self.problem.default_solver()));
        let mut fast = FastSolverConfig::new(self.inner.table()?, self.inner.substeps);
        fast.newton = newton;
        let config = StepConfig { fast, newton };
        let built = self.problem.build()?;
        let tf = self.final_time.unwrap_or(built.final_time);
        let outs: Vec<f64> = match &self.output_times {
            Some(v) => v.clone(),
            None => built.output_times.iter().copied().filter(|t| *t <= tf).collect(),
        };
        let traj = integrate(&method, built.problem.as_ref(), 0.0, tf, self.step, &outs, &built.y0, &config)?;
        Ok((traj, built))
    }
}

/// Trajectory CSV with `exact_*` and `error_*` columns appended when the
/// problem has an exact solution.
pub fn trajectory_csv(traj: &Trajectory, problem: &dyn AdditiveProblem) -> String {
    let n = problem.dim();
    let has_exact = problem.exact(0.0).is_some();
    let mut out = String::from("t");
    for i in 1..=n {
        out.push_str(&format!(",y{i}"));
    }
    if has_exact {
        for i in 1..=n {
            out.push_str(&format!(",exact{i}"));
        }
        for i in 1..=n {
            out.push_str(&format!(",error{i}"));
        }
    }
    out.push('\n');
    for (t, y) in traj.times.iter().zip(&traj.states) {
        out.push_str(&number(*t));
        for v in y {
            out.push_str(&format!(",{}", number(*v)));
        }
        if let Some(ex) = problem.exact(*t) {
            for v in &ex {
                out.push_str(&format!(",{}", number(*v)));
            }
            for (a, b) in y.iter().zip(&ex) {
                out.push_str(&format!(",{}", number(a - b)));
            }
        }
        out.push('\n');
    }
    out
}
