//! Test problems and error metrics.

mod brusselator;
mod kpr;
mod reference;

pub use brusselator::{
    brusselator_output_times, brusselator_problem, Brusselator, BrusselatorConfig, BRUSSELATOR_FINAL_TIME,
};
pub use kpr::{kpr_exact, kpr_output_times, kpr_problem, Kpr, KprParameters, KPR_FINAL_TIME};
pub use reference::{dirk_solve, max_error, max_error_exact, reference_solution, ReferenceSolution};
