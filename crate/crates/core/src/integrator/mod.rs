//! Stepping engine: IMEX-MRI-GARK steps with a pluggable inner solver,
//! Newton-based implicit slow stages, the two classical splittings and a
//! fixed-step driver.

mod driver;
mod fast;
mod mri;
mod newton;
mod problem;
mod splitting;

pub use driver::{integrate, Method, StepConfig, Stepper, Trajectory};
pub use fast::{solve_forced_fast_ivp, solve_modified_fast_ivp, Forcing};
pub use mri::{implicit_stage_solve, mri_step, StageCache};
pub use newton::{newton_solve, NewtonConfig};
pub use problem::{AdditiveProblem, LinearProblem};
pub use splitting::{lie_trotter_step, strang_step};

use serde::Serialize;

use crate::tableaux::ButcherTable;

/// Inner solver for the fast IVPs: `substeps` steps of `table` per slow stage.
#[derive(Debug, Clone, PartialEq)]
pub struct FastSolverConfig {
    pub table: ButcherTable,
    pub substeps: usize,
    pub newton: NewtonConfig,
}

impl FastSolverConfig {
    pub fn new(table: ButcherTable, substeps: usize) -> Self {
        Self {
            table,
            substeps: substeps.max(1),
            newton: NewtonConfig::default(),
        }
    }
}

/// Work counters accumulated across steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub newton_iterations: usize,
    pub newton_rhs_evals: usize,
    pub jacobian_evals: usize,
    pub fast_evals: usize,
    pub implicit_evals: usize,
    pub explicit_evals: usize,
}

impl Diagnostics {
    pub fn add(&mut self, other: &Diagnostics) {
        self.steps += other.steps;
        self.newton_iterations += other.newton_iterations;
        self.newton_rhs_evals += other.newton_rhs_evals;
        self.jacobian_evals += other.jacobian_evals;
        self.fast_evals += other.fast_evals;
        self.implicit_evals += other.implicit_evals;
        self.explicit_evals += other.explicit_evals;
        self.explicit_evals += other.explicit_evals;
    }
}
