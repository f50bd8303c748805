use nalgebra::DMatrix;

use crate::linalg::Jacobian;

/// A three-way additive IVP `y' = f^{I}(t,y) + f^{E}(t,y) + f^{F}(t,y)`.
///
/// `f_implicit` is the slow stiff partition, `f_explicit` the slow nonstiff
/// one and `f_fast` the fast partition. Implementations must be pure.
pub trait AdditiveProblem: Send + Sync {
    fn dim(&self) -> usize;
    fn f_implicit(&self, t: f64, y: &[f64], out: &mut [f64]);
    fn f_explicit(&self, t: f64, y: &[f64], out: &mut [f64]);
    fn f_fast(&self, t: f64, y: &[f64], out: &mut [f64]);
    fn jac_implicit(&self, t: f64, y: &[f64]) -> Jacobian;
    fn jac_fast(&self, t: f64, y: &[f64]) -> Jacobian;

    /// Jacobian of the explicit partition, when available. Only used by
    /// fully implicit single-rate reference solvers.
    fn jac_explicit(&self, _t: f64, _y: &[f64]) -> Option<Jacobian> {
        None
    }

    fn exact(&self, _t: f64) -> Option<Vec<f64>> {
        None
    }

    /// Sum of the three partitions.
    fn f_full(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let mut tmp = vec![0.0; n];
        self.f_implicit(t, y, out);
        self.f_explicit(t, y, &mut tmp);
        for (o, v) in out.iter_mut().zip(&tmp) {
            *o += v;
        }
        self.f_fast(t, y, &mut tmp);
        for (o, v) in out.iter_mut().zip(&tmp) {
            *o += v;
        }
    }
}

/// Autonomous linear problem `y' = (J_I + J_E + J_F) y` with dense matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProblem {
    pub implicit: DMatrix<f64>,
    pub explicit: DMatrix<f64>,
    pub fast: DMatrix<f64>,
}

impl LinearProblem {
    pub fn new(implicit: DMatrix<f64>, explicit: DMatrix<f64>, fast: DMatrix<f64>) -> Self {
        Self {
            implicit,
            explicit,
            fast,
        }
    }

    /// Scalar test equation `y' = λ_I y + λ_E y + λ_F y`.
    pub fn scalar(lambda_f: f64, lambda_e: f64, lambda_i: f64) -> Self {
        let m = |v| DMatrix::from_element(1, 1, v);
        Self::new(m(lambda_i), m(lambda_e), m(lambda_f))
    }

    /// Complex scalar test equation written as a real 2-vector `(Re y, Im y)`.
    pub fn complex(
        lambda_f: num_complex::Complex64,
        lambda_e: num_complex::Complex64,
        lambda_i: num_complex::Complex64,
    ) -> Self {
        let m = |z: num_complex::Complex64| DMatrix::from_row_slice(2, 2, &[z.re, -z.im, z.im, z.re]);
        Self::new(m(lambda_i), m(lambda_e), m(lambda_f))
    }

    fn apply(m: &DMatrix<f64>, y: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..y.len()).map(|j| m[(i, j)] * y[j]).sum();
        }
    }
}

impl AdditiveProblem for LinearProblem {
    fn dim(&self) -> usize {
        self.implicit.nrows()
    }
    fn f_implicit(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        Self::apply(&self.implicit, y, out)
    }
    fn f_explicit(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        Self::apply(&self.explicit, y, out)
    }
    fn f_fast(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        Self::apply(&self.fast, y, out)
    }
    fn jac_implicit(&self, _t: f64, _y: &[f64]) -> Jacobian {
        Jacobian::Dense(self.implicit.clone())
    }
    fn jac_fast(&self, _t: f64, _y: &[f64]) -> Jacobian {
        Jacobian::Dense(self.fast.clone())
    }
    fn jac_explicit(&self, _t: f64, _y: &[f64]) -> Option<Jacobian> {
        Some(Jacobian::Dense(self.explicit.clone()))
    }
}
