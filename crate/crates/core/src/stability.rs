//! Linear stability of coupling schemes on the scalar additive test problem
//! `y' = λ^{F} y + λ^{E} y + λ^{I} y`: φ-functions, the stability function
//! `R(z^{F}, z^{E}, z^{I})` and joint stability regions over sampled sectors.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::format::number;
use crate::error::{Error, Result};
use crate::tableaux::MriCouplingScheme;

/// Slack on `|R| ≤ 1` for region membership.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Evaluates `φ_0(z) = e^z` and `φ_k(z) = ∫₀¹ e^{z(1-t)} t^{k-1} dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhiEvaluator {
    /// Below this modulus the truncated Taylor series is used.
    pub series_threshold: f64,
    pub series_terms: usize,
}

impl Default for PhiEvaluator {
    fn default() -> Self {
        Self {
            series_threshold: 0.5,
            series_terms: 25,
        }
    }
}

impl PhiEvaluator {
    pub fn eval(&self, k: usize, z: Complex64) -> Complex64 {
        if z.norm() < self.series_threshold {
            self.series(k, z)
        } else {
            self.recurrence(k, z)
        }
    }

    /// `φ_k(z) = (k-1)! Σ_j z^j / (j+k)!` (plain exponential series for `k = 0`).
    pub fn series(&self, k: usize, z: Complex64) -> Complex64 {
        let mut term = if k == 0 { ONE } else { ONE / k as f64 };
        let mut sum = term;
        for j in 0..self.series_terms {
            term = term * z / (j + k + 1) as f64;
            sum += term;
        }
        sum
    }

    /// Upward recurrence `φ_1 = (e^z - 1)/z`, `φ_{k+1} = (k φ_k - 1)/z`.
    pub fn recurrence(&self, k: usize, z: Complex64) -> Complex64 {
        let mut phi = z.exp();
        if k == 0 {
            return phi;
        }
        phi = (phi - 1.0) / z;
        for m in 1..k {
            phi = (phi * m as f64 - 1.0) / z;
        }
        phi
    }

    /// `φ_0 ..= φ_k` at `z`.
    pub fn all(&self, k: usize, z: Complex64) -> Vec<Complex64> {
        if z.norm() < self.series_threshold {
            return (0..=k).map(|m| self.series(m, z)).collect();
        }
        let mut out = Vec::with_capacity(k + 1);
        out.push(z.exp());
        for m in 0..k {
            let prev = out[m];
            let next = if m == 0 { (prev - 1.0) / z } else { (prev * m as f64 - 1.0) / z };
            out.push(next);
        }
        out
    }
}

/// `φ_k(z)` with default settings.
pub fn phi(k: usize, z: Complex64) -> Complex64 {
    PhiEvaluator::default().eval(k, z)
}

/// Lower triangular pieces of `I - diag(φ_0(Δc z^F)) L - z^E η - z^I μ` for a
/// fixed `(z^F, z^I)`: `base = I - diag(φ_0) L - z^I μ` and `eta`.
struct StabilityMatrices {
    base: DMatrix<Complex64>,
    eta: DMatrix<Complex64>,
}

fn stability_matrices(scheme: &MriCouplingScheme, zf: Complex64, zi: Complex64, phi: &PhiEvaluator) -> StabilityMatrices {
    let s = scheme.stages();
    let kmax = scheme.k_max();
    let mut base = DMatrix::from_element(s, s, ZERO);
    let mut eta = DMatrix::from_element(s, s, ZERO);
    for i in 0..s {
        let phis = phi.all(kmax + 1, zf * scheme.delta_c()[i]);
        base[(i, i)] = ONE;
        if i > 0 {
            base[(i, i - 1)] -= phis[0];
        }
        for j in 0..=i {
            let mut mu = ZERO;
            let mut et = ZERO;
            for k in 0..=kmax {
                mu += phis[k + 1] * scheme.gamma()[k][(i, j)];
                et += phis[k + 1] * scheme.omega()[k][(i, j)];
            }
            base[(i, j)] -= zi * mu;
            eta[(i, j)] = et;
        }
    }
    StabilityMatrices { base, eta }
}

fn forward_solve(m: &DMatrix<Complex64>, rhs: &mut [Complex64]) -> bool {
    let s = rhs.len();
    for i in 0..s {
        let mut acc = rhs[i];
        for j in 0..i {
            acc -= m[(i, j)] * rhs[j];
        }
        let d = m[(i, i)];
        if d == ZERO {
            return false;
        }
        rhs[i] = acc / d;
    }
    true
}

/// `R(z^F, z^E, z^I) = e_sᵀ (I - diag(φ_0(Δc z^F)) L - z^E η(z^F) - z^I μ(z^F))⁻¹ e_1`.
pub fn stability_value(scheme: &MriCouplingScheme, zf: Complex64, ze: Complex64, zi: Complex64) -> Result<Complex64> {
    let StabilityMatrices { base, eta } = stability_matrices(scheme, zf, zi, &PhiEvaluator::default());
    let m = base - eta * ze;
    let s = scheme.stages();
    let mut x = vec![ZERO; s];
    x[0] = ONE;
    if !forward_solve(&m, &mut x) {
        return Err(Error::Pole(zi));
    }
    Ok(x[s - 1])
}

/// Coefficients of `R` as a polynomial in `z^E` for fixed `(z^F, z^I)`
/// (`η` is strictly lower triangular, so the degree is below `s`). `None`
/// marks a pole.
fn polynomial_in_ze(scheme: &MriCouplingScheme, zf: Complex64, zi: Complex64, phi: &PhiEvaluator) -> Option<Vec<Complex64>> {
    let StabilityMatrices { base, eta } = stability_matrices(scheme, zf, zi, phi);
    let s = scheme.stages();
    let mut v = vec![ZERO; s];
    v[0] = ONE;
    if !forward_solve(&base, &mut v) {
        return None;
    }
    let mut coeffs = vec![v[s - 1]];
    for _ in 1..s {
        let mut next: Vec<Complex64> = (0..s).map(|i| (0..i).map(|j| eta[(i, j)] * v[j]).sum()).collect();
        forward_solve(&base, &mut next);
        v = next;
        coeffs.push(v[s - 1]);
    }
    while coeffs.len() > 1 && coeffs.last() == Some(&ZERO) {
        coeffs.pop();
    }
    Some(coeffs)
}

/// Finite sample of the sector `{z : |arg(z) - π| ≤ angle}`: each radius on
/// `2 * rays + 1` rays spaced evenly from the negative real axis to the
/// sector boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSampling {
    /// Half-opening in degrees.
    pub angle: f64,
    pub radii: Vec<f64>,
    pub rays: usize,
}

impl SectorSampling {
    pub fn new(angle: f64) -> Result<Self> {
        Self::with_radii(angle, log_radii(1e-2, 1e3, 12), 5)
    }

    pub fn with_radii(angle: f64, radii: Vec<f64>, rays: usize) -> Result<Self> {
        if !(0.0..=90.0).contains(&angle) {
            return Err(Error::Domain(format!("sector angle {angle}° outside [0°, 90°]")));
        }
        if radii.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::Domain("sector radii must be finite and non-negative".into()));
        }
        Ok(Self { angle, radii, rays })
    }

    pub fn points(&self) -> Vec<Complex64> {
        let mut angles = vec![0.0];
        for j in 1..=self.rays {
            let a = (self.angle * j as f64 / self.rays as f64).to_radians();
            angles.push(a);
            angles.push(-a);
        }
        if self.angle == 0.0 {
            angles.truncate(1);
        }
        let mut out = Vec::new();
        for &r in &self.radii {
            if r == 0.0 {
                out.push(ZERO);
                continue;
            }
            for &a in &angles {
                out.push(-Complex64::from_polar(r, a));
            }
        }
        out
    }
}

/// `n` logarithmically spaced radii from `lo` to `hi`.
pub fn log_radii(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    let mut out: Vec<f64> = (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect();
    out[0] = lo;
    out[n - 1] = hi;
    out
}

/// Rectangular `z^E` grid with inclusive end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl Default for ZGrid {
    fn default() -> Self {
        Self {
            re_min: -6.0,
            re_max: 0.0,
            im_min: -4.0,
            im_max: 4.0,
            n_re: 241,
            n_im: 321,
        }
    }
}

impl ZGrid {
    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    /// Grid points, real part varying fastest.
    pub fn points(&self) -> Vec<Complex64> {
        let re = Self::axis(self.re_min, self.re_max, self.n_re);
        let im = Self::axis(self.im_min, self.im_max, self.n_im);
        im.iter()
            .flat_map(|&y| re.iter().map(move |&x| Complex64::new(x, y)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_re == 0 || self.n_im == 0 {
            return Err(Error::Domain("grid needs at least one point per axis".into()));
        }
        if self.re_max > 0.0 || self.re_min > self.re_max || self.im_min > self.im_max {
            return Err(Error::Domain("grid must be a rectangle in the closed left half-plane".into()));
        }
        Ok(())
    }

    pub fn cell_area(&self) -> f64 {
        let w = if self.n_re > 1 { (self.re_max - self.re_min) / (self.n_re - 1) as f64 } else { 0.0 };
        let h = if self.n_im > 1 { (self.im_max - self.im_min) / (self.n_im - 1) as f64 } else { 0.0 };
        w * h
    }
}

/// Precomputed `R(·, z^E, ·)` polynomials for every sampled `(z^F, z^I)`.
pub struct RegionEvaluator {
    polys: Vec<Vec<Complex64>>,
    has_pole: bool,
    tolerance: f64,
}

impl RegionEvaluator {
    pub fn new(scheme: &MriCouplingScheme, fast: &[Complex64], implicit: &[Complex64]) -> Self {
        let phi = PhiEvaluator::default();
        let mut polys = Vec::with_capacity(fast.len() * implicit.len());
        let mut has_pole = false;
        for &zf in fast {
            for &zi in implicit {
                match polynomial_in_ze(scheme, zf, zi, &phi) {
                    Some(p) => polys.push(p),
                    None => has_pole = true,
                }
            }
        }
        // largest samples first: they reject non-members soonest
        polys.reverse();
        Self {
            polys,
            has_pole,
            tolerance: MEMBERSHIP_TOL,
        }
    }

    /// Membership threshold `|R| ≤ 1 + tolerance` (default [`MEMBERSHIP_TOL`]).
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// `(member, max |R|)`. For non-members evaluation stops at the first
    /// sample exceeding the threshold, so the value is a lower bound.
    pub fn evaluate(&self, ze: Complex64) -> (bool, f64) {
        if self.has_pole {
            return (false, f64::INFINITY);
        }
        let mut max = 0.0_f64;
        for p in &self.polys {
            let r = p.iter().rev().fold(ZERO, |acc, c| acc * ze + c).norm();
            if !(r <= 1.0 + self.tolerance) {
                return (false, if r.is_nan() { f64::INFINITY } else { r });
            }
            max = max.max(r);
        }
        (true, max)
    }

    pub fn is_member(&self, ze: Complex64) -> bool {
        self.evaluate(ze).0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RasterMetadata {
    pub scheme: String,
    pub alpha: f64,
    pub beta: f64,
    pub grid: ZGrid,
    pub fast_sampling: Option<SectorSampling>,
    pub implicit_sampling: Option<SectorSampling>,
    pub fast_samples: usize,
    pub implicit_samples: usize,
    pub membership_tolerance: f64,
    pub member_count: usize,
    pub member_fraction: f64,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRaster {
    pub points: Vec<Complex64>,
    pub member: Vec<bool>,
    pub max_abs_r: Vec<f64>,
    pub metadata: RasterMetadata,
}

impl StabilityRaster {
    pub fn member_fraction(&self) -> f64 {
        self.metadata.member_fraction
    }

    pub fn area(&self) -> f64 {
        self.metadata.area
    }

    /// CSV `re_zE,im_zE,member,max_abs_R`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re_zE,im_zE,member,max_abs_R\n");
        for ((z, m), r) in self.points.iter().zip(&self.member).zip(&self.max_abs_r) {
            out.push_str(&format!("{},{},{},{}\n", number(z.re), number(z.im), u8::from(*m), number(*r)));
        }
        out
    }

    pub fn metadata_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.metadata)?)
    }
}

/// Joint stability region over explicit sample sets with membership
/// threshold `|R| ≤ 1 + tolerance`.
pub fn joint_region_samples(
    scheme: &MriCouplingScheme,
    grid: &ZGrid,
    fast: &[Complex64],
    implicit: &[Complex64],
    tolerance: f64,
) -> Result<StabilityRaster> {
    grid.validate()?;
    if !(tolerance >= 0.0) {
        return Err(Error::Domain(format!("membership tolerance must be non-negative, got {tolerance}")));
    }
    let eval = RegionEvaluator::new(scheme, fast, implicit).with_tolerance(tolerance);
    let points = grid.points();
    let results: Vec<(bool, f64)> = points.par_iter().map(|&z| eval.evaluate(z)).collect();
    let member: Vec<bool> = results.iter().map(|r| r.0).collect();
    let max_abs_r = results.iter().map(|r| r.1).collect();
    let count = member.iter().filter(|m| **m).count();
    Ok(StabilityRaster {
        metadata: RasterMetadata {
            scheme: scheme.name().to_string(),
            alpha: f64::NAN,
            beta: f64::NAN,
            grid: *grid,
            fast_sampling: None,
            implicit_sampling: None,
            fast_samples: fast.len(),
            implicit_samples: implicit.len(),
            membership_tolerance: tolerance,
            member_count: count,
            member_fraction: count as f64 / points.len() as f64,
            area: count as f64 * grid.cell_area(),
        },
        points,
        member,
        max_abs_r,
    })
}

/// Joint stability region `J_{α,β}`: grid points `z^E` with `|R| ≤ 1` for
/// every sampled `z^F ∈ S_α` and `z^I ∈ S_β`.
pub fn joint_region(
    scheme: &MriCouplingScheme,
    grid: &ZGrid,
    fast: &SectorSampling,
    implicit: &SectorSampling,
) -> Result<StabilityRaster> {
    let mut raster = joint_region_samples(scheme, grid, &fast.points(), &implicit.points(), MEMBERSHIP_TOL)?;
    raster.metadata.alpha = fast.angle;
    raster.metadata.beta = implicit.angle;
    raster.metadata.fast_sampling = Some(fast.clone());
    raster.metadata.implicit_sampling = Some(implicit.clone());
    Ok(raster)
}

/// Scan limit for [`real_axis_extent`].
pub const MAX_EXTENT: f64 = 1e3;

/// Largest `r` with every tested `z^E ∈ [-r, 0]` a member: outward scan,
/// then bisection to `1e-3` relative.
pub fn real_axis_extent(scheme: &MriCouplingScheme, fast: &[Complex64], implicit: &[Complex64]) -> f64 {
    let eval = RegionEvaluator::new(scheme, fast, implicit);
    let member = |r: f64| eval.is_member(Complex64::new(-r, 0.0));
    if !member(0.0) {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = None;
    while lo < MAX_EXTENT {
        let next = (lo + (0.02 * lo).max(1e-2)).min(MAX_EXTENT);
        if member(next) {
            lo = next;
        } else {
            hi = Some(next);
            break;
        }
    }
    let Some(mut hi) = hi else {
        return lo;
    };
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if member(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
