use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::integrator::AdditiveProblem;
use crate::linalg::Jacobian;

/// Parameters of the two-component Kværnø-Prothero-Robinson problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KprParameters {
    pub lambda_f: f64,
    pub lambda_s: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for KprParameters {
    fn default() -> Self {
        Self {
            lambda_f: -10.0,
            lambda_s: -1.0,
            epsilon: 0.1,
            alpha: 1.0,
            beta: 20.0,
        }
    }
}

impl KprParameters {
    /// Coupling matrix `Λ`.
    pub fn lambda(&self) -> [[f64; 2]; 2] {
        let d = self.lambda_f - self.lambda_s;
        [
            [self.lambda_f, (1.0 - self.epsilon) / self.alpha * d],
            [-self.alpha * self.epsilon * d, self.lambda_s],
        ]
    }
}

/// KPR problem: `u` is the fast variable, `v` the slow one. The slow
/// time-forcing term is the explicit partition, the second row of the `Λ`
/// product the implicit partition, and the first row plus the fast forcing
/// the fast partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Kpr {
    pub params: KprParameters,
    lambda: [[f64; 2]; 2],
}

/// Final time of the standard KPR run.
pub const KPR_FINAL_TIME: f64 = 2.5 * std::f64::consts::PI;

pub fn kpr_problem(params: KprParameters) -> Kpr {
    Kpr {
        params,
        lambda: params.lambda(),
    }
}

pub fn kpr_exact(t: f64, params: &KprParameters) -> [f64; 2] {
    [(3.0 + (params.beta * t).cos()).sqrt(), (2.0 + t.cos()).sqrt()]
}

/// The 20 evenly spaced output times `kπ/8`, `k = 1..=20`.
pub fn kpr_output_times() -> Vec<f64> {
    (1..=20).map(|k| KPR_FINAL_TIME * k as f64 / 20.0).collect()
}

impl Kpr {
    fn phis(&self, t: f64, y: &[f64]) -> (f64, f64) {
        let (u, v) = (y[0], y[1]);
        let b = self.params.beta;
        (
            (-3.0 + u * u - (b * t).cos()) / (2.0 * u),
            (-2.0 + v * v - t.cos()) / (2.0 * v),
        )
    }

    fn dphis(&self, t: f64, y: &[f64]) -> (f64, f64) {
        let (u, v) = (y[0], y[1]);
        let b = self.params.beta;
        (
            0.5 + (3.0 + (b * t).cos()) / (2.0 * u * u),
            0.5 + (2.0 + t.cos()) / (2.0 * v * v),
        )
    }

    pub fn initial_state(&self) -> Vec<f64> {
        kpr_exact(0.0, &self.params).to_vec()
    }
}

impl AdditiveProblem for Kpr {
    fn dim(&self) -> usize {
        2
    }

    fn f_implicit(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let (p1, p2) = self.phis(t, y);
        out[0] = 0.0;
        out[1] = self.lambda[1][0] * p1 + self.lambda[1][1] * p2;
    }

    fn f_explicit(&self, t: f64, y: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        out[1] = -t.sin() / (2.0 * y[1]);
    }

    fn f_fast(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let (p1, p2) = self.phis(t, y);
        let b = self.params.beta;
        out[0] = self.lambda[0][0] * p1 + self.lambda[0][1] * p2 - b * (b * t).sin() / (2.0 * y[0]);
        out[1] = 0.0;
    }

    fn jac_implicit(&self, t: f64, y: &[f64]) -> Jacobian {
        let (d1, d2) = self.dphis(t, y);
        Jacobian::Dense(DMatrix::from_row_slice(
            2,
            2,
            &[0.0, 0.0, self.lambda[1][0] * d1, self.lambda[1][1] * d2],
        ))
    }

    fn jac_fast(&self, t: f64, y: &[f64]) -> Jacobian {
        let (d1, d2) = self.dphis(t, y);
        let b = self.params.beta;
        let u = y[0];
        Jacobian::Dense(DMatrix::from_row_slice(
            2,
            2,
            &[
                self.lambda[0][0] * d1 + b * (b * t).sin() / (2.0 * u * u),
                self.lambda[0][1] * d2,
                0.0,
                0.0,
            ],
        ))
    }

    fn jac_explicit(&self, t: f64, y: &[f64]) -> Option<Jacobian> {
        let v = y[1];
        Some(Jacobian::Dense(DMatrix::from_row_slice(
            2,
            2,
            &[0.0, 0.0, 0.0, t.sin() / (2.0 * v * v)],
        )))
    }

    fn exact(&self, t: f64) -> Option<Vec<f64>> {
        Some(kpr_exact(t, &self.params).to_vec())
    }
}
