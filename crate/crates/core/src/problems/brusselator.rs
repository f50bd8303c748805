use serde::{Deserialize, Serialize};

use crate::format::number;
use crate::error::{Error, Result};
use crate::integrator::AdditiveProblem;
use crate::linalg::{BandMatrix, Jacobian};

/// One-dimensional stiff brusselator on `x ∈ [0, 1]` with stationary
/// boundary values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BrusselatorConfig {
    pub n: usize,
    /// Diffusion coefficients for `(u, v, w)`.
    pub alpha: [f64; 3],
    /// Advection coefficients for `(u, v, w)`.
    pub rho: [f64; 3],
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
}

impl Default for BrusselatorConfig {
    fn default() -> Self {
        Self {
            n: 201,
            alpha: [1e-2; 3],
            rho: [1e-3; 3],
            a: 0.6,
            b: 2.0,
            epsilon: 1e-2,
        }
    }
}

pub const BRUSSELATOR_FINAL_TIME: f64 = 3.0;

/// The 10 evenly spaced output times `0.3 k`, `k = 1..=10`.
pub fn brusselator_output_times() -> Vec<f64> {
    (1..=10).map(|k| BRUSSELATOR_FINAL_TIME * k as f64 / 10.0).collect()
}

/// Spatially discretized brusselator with node-major interleaved state
/// `(u_0, v_0, w_0, u_1, ...)`. Advection is the explicit partition,
/// diffusion the implicit one and the reaction the fast one.
#[derive(Debug, Clone, PartialEq)]
pub struct Brusselator {
    pub config: BrusselatorConfig,
    dx: f64,
}

pub fn brusselator_problem(config: BrusselatorConfig) -> Result<Brusselator> {
    if config.n < 3 {
        return Err(Error::Domain(format!("brusselator needs at least 3 nodes, got {}", config.n)));
    }
    Ok(Brusselator {
        config,
        dx: 1.0 / (config.n - 1) as f64,
    })
}

impl Brusselator {
    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.config.n).map(|i| i as f64 * self.dx).collect()
    }

    pub fn initial_state(&self) -> Vec<f64> {
        let c = &self.config;
        let mut y = Vec::with_capacity(3 * c.n);
        for x in self.grid() {
            let s = 0.1 * (std::f64::consts::PI * x).sin();
            y.extend_from_slice(&[c.a + s, c.b / c.a + s, c.b + s]);
        }
        y
    }

    /// CSV snapshot `x,u,v,w` of one state.
    pub fn snapshot_csv(&self, y: &[f64]) -> String {
        let mut out = String::from("x,u,v,w\n");
        for (i, x) in self.grid().iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", number(*x), number(y[3 * i]), number(y[3 * i + 1]), number(y[3 * i + 2])));
        }
        out
    }

    fn stencil(&self, y: &[f64], out: &mut [f64], coef: impl Fn(usize) -> [f64; 3]) {
        let n = self.config.n;
        out[..3].fill(0.0);
        out[3 * (n - 1)..].fill(0.0);
        for i in 1..n - 1 {
            for c in 0..3 {
                let [wl, wc, wr] = coef(c);
                out[3 * i + c] = wl * y[3 * (i - 1) + c] + wc * y[3 * i + c] + wr * y[3 * (i + 1) + c];
            }
        }
    }

    fn stencil_matrix(&self, coef: impl Fn(usize) -> [f64; 3]) -> BandMatrix {
        let n = self.config.n;
        let mut m = BandMatrix::zeros(3 * n, 3, 3);
        for i in 1..n - 1 {
            for c in 0..3 {
                let [wl, wc, wr] = coef(c);
                let r = 3 * i + c;
                m.set(r, r - 3, wl);
                m.set(r, r, wc);
                m.set(r, r + 3, wr);
            }
        }
        m
    }

    fn diffusion(&self, c: usize) -> [f64; 3] {
        let k = self.config.alpha[c] / (self.dx * self.dx);
        [k, -2.0 * k, k]
    }

    fn advection(&self, c: usize) -> [f64; 3] {
        let k = self.config.rho[c] / (2.0 * self.dx);
        [-k, 0.0, k]
    }
}

impl AdditiveProblem for Brusselator {
    fn dim(&self) -> usize {
        3 * self.config.n
    }

    fn f_implicit(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        self.stencil(y, out, |c| self.diffusion(c));
    }

    fn f_explicit(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        self.stencil(y, out, |c| self.advection(c));
    }

    fn f_fast(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        let n = self.config.n;
        let BrusselatorConfig { a, b, epsilon, .. } = self.config;
        out[..3].fill(0.0);
        out[3 * (n - 1)..].fill(0.0);
        for i in 1..n - 1 {
            let (u, v, w) = (y[3 * i], y[3 * i + 1], y[3 * i + 2]);
            out[3 * i] = a - (w + 1.0) * u + u * u * v;
            out[3 * i + 1] = w * u - u * u * v;
            out[3 * i + 2] = (b - w) / epsilon - w * u;
        }
    }

    fn jac_implicit(&self, _t: f64, _y: &[f64]) -> Jacobian {
        Jacobian::Banded(self.stencil_matrix(|c| self.diffusion(c)))
    }

    fn jac_explicit(&self, _t: f64, _y: &[f64]) -> Option<Jacobian> {
        Some(Jacobian::Banded(self.stencil_matrix(|c| self.advection(c))))
    }

    fn jac_fast(&self, _t: f64, y: &[f64]) -> Jacobian {
        let n = self.config.n;
        let eps = self.config.epsilon;
        let mut m = BandMatrix::zeros(3 * n, 2, 2);
        for i in 1..n - 1 {
            let r = 3 * i;
            let (u, v, w) = (y[r], y[r + 1], y[r + 2]);
            let rows = [
                [-(w + 1.0) + 2.0 * u * v, u * u, -u],
                [w - 2.0 * u * v, -u * u, u],
                [-w, 0.0, -1.0 / eps - u],
            ];
            for (p, row) in rows.iter().enumerate() {
                for (q, val) in row.iter().enumerate() {
                    m.set(r + p, r + q, *val);
                }
            }
        }
        Jacobian::Banded(m)
    }
}
