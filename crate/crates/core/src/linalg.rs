//! Jacobian storage and the direct solvers used by the Newton iterations.
//!
//! Dense systems go through nalgebra's partial-pivoting LU. Banded systems use
//! a small band LU with row pivoting that stores the factor in a window of
//! width `2*kl + ku + 1` per row, so fill-in from pivoting stays in place.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square matrix with `kl` sub-diagonals and `ku` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // row-major, entry (i, j) at i * width + (j + kl - i)
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i >= self.n || j >= self.n || !self.in_band(i, j) {
            return 0.0;
        }
        self.data[i * self.width() + j + self.kl - i]
    }

    /// Sets entry (i, j). Panics if the entry lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + j + self.kl - i] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let v = self.get(i, j);
        self.set(i, j, v + value);
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            out[i] = (lo..=hi).map(|j| self.get(i, j) * x[j]).sum();
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

/// Jacobian of one right-hand-side partition.
#[derive(Debug, Clone, PartialEq)]
pub enum Jacobian {
    Dense(DMatrix<f64>),
    Banded(BandMatrix),
}

impl Jacobian {
    pub fn dim(&self) -> usize {
        match self {
            Jacobian::Dense(m) => m.nrows(),
            Jacobian::Banded(b) => b.dim(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Jacobian::Dense(m) => m[(i, j)],
            Jacobian::Banded(b) => b.get(i, j),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Jacobian::Dense(m) => m.clone(),
            Jacobian::Banded(b) => b.to_dense(),
        }
    }

    /// Entrywise sum; banded when every term is banded.
    pub fn sum(terms: &[&Jacobian]) -> Jacobian {
        let n = terms.first().map_or(0, |j| j.dim());
        let all_banded = terms.iter().all(|j| matches!(j, Jacobian::Banded(_)));
        if all_banded {
            let (mut kl, mut ku) = (0, 0);
            for j in terms {
                if let Jacobian::Banded(b) = j {
                    kl = kl.max(b.kl);
                    ku = ku.max(b.ku);
                }
            }
            let mut m = BandMatrix::zeros(n, kl, ku);
            for j in terms {
                if let Jacobian::Banded(b) = j {
                    for i in 0..n {
                        let lo = i.saturating_sub(b.kl);
                        let hi = (i + b.ku).min(n - 1);
                        for c in lo..=hi {
                            m.add(i, c, b.get(i, c));
                        }
                    }
                }
            }
            Jacobian::Banded(m)
        } else {
            let mut m = DMatrix::zeros(n, n);
            for j in terms {
                m += j.to_dense();
            }
            Jacobian::Dense(m)
        }
    }

    /// Factors `I - shift * J`.
    pub fn factor_shifted(&self, shift: f64, solver: LinearSolver) -> Result<Factorization> {
        match (self, solver) {
            (Jacobian::Banded(b), LinearSolver::BandedLu) => {
                let (kl, ku) = b.bandwidths();
                let mut m = BandMatrix::zeros(b.dim(), kl, ku);
                for i in 0..b.dim() {
                    let lo = i.saturating_sub(kl);
                    let hi = (i + ku).min(b.dim() - 1);
                    for j in lo..=hi {
                        let id = if i == j { 1.0 } else { 0.0 };
                        m.set(i, j, id - shift * b.get(i, j));
                    }
                }
                Ok(Factorization::Banded(BandLu::factor(&m)?))
            }
            _ => {
                let j = self.to_dense();
                let n = j.nrows();
                let m = DMatrix::identity(n, n) - j * shift;
                DenseLu::factor(m).map(Factorization::Dense)
            }
        }
    }
}

/// Linear solver used for Newton iteration matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LinearSolver {
    #[default]
    DenseLu,
    BandedLu,
}

#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl DenseLu {
    pub fn factor(m: DMatrix<f64>) -> Result<Self> {
        let lu = m.lu();
        let u = lu.u();
        let singular = u
            .diagonal()
            .iter()
            .any(|d| *d == 0.0 || !d.is_finite());
        if singular {
            return Err(Error::SingularMatrix);
        }
        Ok(Self { lu })
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let mut b = nalgebra::DVector::from_column_slice(rhs);
        self.lu.solve_mut(&mut b);
        rhs.copy_from_slice(b.as_slice());
    }
}

/// Band LU with partial pivoting.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    // row i holds columns i - kl ..= i + kl + ku
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn w(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.w() + j + self.kl - i
    }

    pub fn factor(m: &BandMatrix) -> Result<Self> {
        let (n, kl, ku) = (m.n, m.kl, m.ku);
        let mut lu = Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (2 * kl + ku + 1)],
            pivots: vec![0; n],
        };
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n.saturating_sub(1));
            for j in lo..=hi {
                let k = lu.idx(i, j);
                lu.data[k] = m.get(i, j);
            }
        }
        let uw = kl + ku;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.data[lu.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = lu.data[lu.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix);
            }
            lu.pivots[k] = p;
            let jmax = (k + uw).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = lu.idx(k, j);
                    let b = lu.idx(p, j);
                    lu.data.swap(a, b);
                }
            }
            let pivot = lu.data[lu.idx(k, k)];
            for i in k + 1..=last {
                let ik = lu.idx(i, k);
                let l = lu.data[ik] / pivot;
                lu.data[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let kj = lu.data[lu.idx(k, j)];
                        let ij = lu.idx(i, j);
                        lu.data[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(lu)
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    b[i] -= self.data[self.idx(i, k)] * bk;
                }
            }
        }
        let uw = self.kl + self.ku;
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + uw).min(n - 1) {
                s -= self.data[self.idx(k, j)] * b[j];
            }
            b[k] = s / self.data[self.idx(k, k)];
        }
    }
}

#[derive(Debug, Clone)]
pub enum Factorization {
    Dense(DenseLu),
    Banded(BandLu),
}

impl Factorization {
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        match self {
            Factorization::Dense(lu) => lu.solve_in_place(rhs),
            Factorization::Banded(lu) => lu.solve_in_place(rhs),
        }
    }
}

pub(crate) fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_band(n: usize, kl: usize, ku: usize, vals: &[f64]) -> BandMatrix {
        let mut m = BandMatrix::zeros(n, kl, ku);
        let mut it = vals.iter().cycle();
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                m.set(i, j, *it.next().unwrap());
            }
        }
        m
    }

    #[test]
    fn band_get_outside_is_zero() {
        let m = BandMatrix::zeros(5, 1, 2);
        assert_eq!(m.get(4, 0), 0.0);
        assert_eq!(m.get(0, 4), 0.0);
    }

    #[test]
    fn singular_band_is_reported() {
        let m = BandMatrix::zeros(4, 1, 1);
        assert!(matches!(BandLu::factor(&m), Err(Error::SingularMatrix)));
    }

    #[test]
    fn pivoting_needed() {
        // zero on the leading diagonal forces a row swap
        let mut m = BandMatrix::zeros(3, 1, 1);
        m.set(0, 0, 0.0);
        m.set(0, 1, 2.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 1.0);
        m.set(1, 2, 1.0);
        m.set(2, 1, 3.0);
        m.set(2, 2, 4.0);
        let lu = BandLu::factor(&m).unwrap();
        let x = [1.0, -2.0, 0.5];
        let mut b = [0.0; 3];
        m.mul_vec(&x, &mut b);
        lu.solve_in_place(&mut b);
        for (a, e) in b.iter().zip(x) {
            assert!((a - e).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn band_lu_matches_dense(
            n in 3usize..25,
            kl in 0usize..4,
            ku in 0usize..4,
            vals in proptest::collection::vec(-1.0f64..1.0, 20..40),
            x in proptest::collection::vec(-5.0f64..5.0, 25),
        ) {
            let mut m = random_band(n, kl, ku, &vals);
            for i in 0..n {
                m.add(i, i, 3.0 + (kl + ku) as f64);
            }
            let lu = BandLu::factor(&m).unwrap();
            let mut b = vec![0.0; n];
            m.mul_vec(&x[..n], &mut b);
            lu.solve_in_place(&mut b);
            for i in 0..n {
                prop_assert!((b[i] - x[i]).abs() < 1e-10 * (1.0 + x[i].abs()));
            }
            let dense = DenseLu::factor(m.to_dense()).unwrap();
            let mut b2 = vec![0.0; n];
            m.mul_vec(&x[..n], &mut b2);
            dense.solve_in_place(&mut b2);
            for i in 0..n {
                prop_assert!((b2[i] - b[i]).abs() < 1e-10);
            }
        }
    }
}
