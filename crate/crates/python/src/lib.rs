//! Python bindings.
//!
//! Structured results cross the boundary as plain dicts and lists built from
//! the core crate's JSON serialization.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use imex_mri::catalog::{self, MethodCatalogEntry};
use imex_mri::order_conditions::{check_ark_order, check_scheme, DEFAULT_TOLERANCE};
use imex_mri::stability::{self, SectorSampling, ZGrid};
use imex_mri::study::{ConvergenceStudy, IntegrationStudy};
use imex_mri::tableaux::{scheme_from_json, ImexArkPair, MriCouplingScheme};
use imex_mri::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::NewtonFailure { .. } | Error::SingularMatrix | Error::Pole(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: serde::de::DeserializeOwned>(py: Python<'_>, value: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = if let Ok(s) = value.extract::<String>() {
        s
    } else {
        py.import("json")?.call_method1("dumps", (value,))?.extract()?
    };
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(format!("invalid study: {e}")))
}

fn entry(name: &str) -> PyResult<MethodCatalogEntry> {
    catalog::get_method(name).map_err(err)
}

/// Coupling scheme from a catalog name or a scheme JSON document.
fn scheme(method: &str) -> PyResult<MriCouplingScheme> {
    if method.trim_start().starts_with('{') {
        return scheme_from_json(method).map_err(err);
    }
    entry(method)?
        .scheme()
        .cloned()
        .ok_or_else(|| PyValueError::new_err(format!("`{method}` is not a coupling scheme")))
}

/// `[(name, family, declared_order), ...]`
#[pyfunction]
fn list_methods(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &catalog::list_methods())
}

/// Order-condition report for a catalog method or scheme JSON document.
#[pyfunction]
#[pyo3(signature = (method, order=None, tolerance=DEFAULT_TOLERANCE))]
fn check<'py>(py: Python<'py>, method: &str, order: Option<usize>, tolerance: f64) -> PyResult<Bound<'py, PyAny>> {
    let report = if method.trim_start().starts_with('{') {
        check_scheme(&scheme(method)?, order.unwrap_or(3), tolerance)
    } else {
        let e = entry(method)?;
        let p = order.unwrap_or(e.declared_order);
        if let Some(s) = e.scheme() {
            check_scheme(s, p, tolerance)
        } else if let Some(t) = e.table() {
            ImexArkPair::new(t.clone(), t.clone()).and_then(|ark| check_ark_order(&ark, p)).map(|r| r.with_tolerance(tolerance))
        } else if let Some(ark) = e.pair() {
            check_ark_order(ark, p).map(|r| r.with_tolerance(tolerance))
        } else {
            return Err(PyValueError::new_err(format!("`{method}` has no tableau to check")));
        }
    }
    .map_err(err)?;
    to_py(py, &report)
}

/// `φ_k(z) = ∫₀¹ e^{z(1-t)} t^{k-1} dt`.
#[pyfunction]
fn phi(k: usize, z: Complex64) -> Complex64 {
    stability::phi(k, z)
}

/// Amplification factor `R(zF, zE, zI)` of a coupling scheme.
#[pyfunction]
fn stability_value(method: &str, zf: Complex64, ze: Complex64, zi: Complex64) -> PyResult<Complex64> {
    stability::stability_value(&scheme(method)?, zf, ze, zi).map_err(err)
}

/// Joint stability raster as a dict with `metadata`, `re`, `im`, `member`
/// and `max_abs_r`.
#[pyfunction]
#[pyo3(signature = (method, alpha, beta, grid=None, radii=None, rays=5))]
fn joint_region<'py>(
    py: Python<'py>,
    method: &str,
    alpha: f64,
    beta: f64,
    grid: Option<(f64, f64, f64, f64, usize, usize)>,
    radii: Option<Vec<f64>>,
    rays: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let s = scheme(method)?;
    let grid = match grid {
        Some((re_min, re_max, im_min, im_max, n_re, n_im)) => ZGrid {
            re_min,
            re_max,
            im_min,
            im_max,
            n_re,
            n_im,
        },
        None => ZGrid::default(),
    };
    let sector = |angle| match &radii {
        Some(r) => SectorSampling::with_radii(angle, r.clone(), rays),
        None => SectorSampling::with_radii(angle, stability::log_radii(1e-2, 1e3, 12), rays),
    };
    let fast = sector(alpha).map_err(err)?;
    let implicit = sector(beta).map_err(err)?;
    let raster = py
        .detach(|| stability::joint_region(&s, &grid, &fast, &implicit))
        .map_err(err)?;
    #[derive(Serialize)]
    struct Out<'a> {
        metadata: &'a stability::RasterMetadata,
        re: Vec<f64>,
        im: Vec<f64>,
        member: &'a [bool],
        max_abs_r: &'a [f64],
    }
    to_py(
        py,
        &Out {
            metadata: &raster.metadata,
            re: raster.points.iter().map(|z| z.re).collect(),
            im: raster.points.iter().map(|z| z.im).collect(),
            member: &raster.member,
            max_abs_r: &raster.max_abs_r,
        },
    )
}

/// Largest `r` with `[-r, 0]` inside the joint region.
#[pyfunction]
#[pyo3(signature = (method, alpha, beta, rays=5))]
fn real_axis_extent(py: Python<'_>, method: &str, alpha: f64, beta: f64, rays: usize) -> PyResult<f64> {
    let s = scheme(method)?;
    let radii = stability::log_radii(1e-2, 1e3, 12);
    let fast = SectorSampling::with_radii(alpha, radii.clone(), rays).map_err(err)?;
    let implicit = SectorSampling::with_radii(beta, radii, rays).map_err(err)?;
    Ok(py.detach(|| stability::real_axis_extent(&s, &fast.points(), &implicit.points())))
}

/// Runs a convergence study given as a dict or JSON string.
#[pyfunction]
fn run_convergence<'py>(py: Python<'py>, study: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let study: ConvergenceStudy = from_py(py, study)?;
    let result = py.detach(|| study.run()).map_err(err)?;
    to_py(py, &result)
}

/// Runs a fixed-step integration study; returns the trajectory dict.
#[pyfunction]
fn run_integration<'py>(py: Python<'py>, study: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let study: IntegrationStudy = from_py(py, study)?;
    let (traj, _) = py.detach(|| study.run()).map_err(err)?;
    to_py(py, &traj)
}

#[pymodule]
pub fn pyimexmri(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(list_methods, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(stability_value, m)?)?;
    m.add_function(wrap_pyfunction!(joint_region, m)?)?;
    m.add_function(wrap_pyfunction!(real_axis_extent, m)?)?;
    m.add_function(wrap_pyfunction!(run_convergence, m)?)?;
    m.add_function(wrap_pyfunction!(run_integration, m)?)?;
    Ok(())
}
