//! Study files: JSON documents merged with command-line overrides.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

use imex_mri::catalog::{self, Family};
use imex_mri::study::{ProblemKind, ProblemSpec};

use crate::commands::Failure;
use crate::RunArgs;

pub fn load(path: Option<&Path>) -> Result<Map<String, Value>, Failure> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(Failure::usage(format!("{}: study file must be a JSON object", path.display()))),
        Err(e) => Err(Failure::usage(format!("{}: {e}", path.display()))),
    }
}

/// Object stored under `key`, created if missing.
pub fn object<'a>(doc: &'a mut Map<String, Value>, key: &str) -> &'a mut Map<String, Value> {
    let slot = doc.entry(key).or_insert_with(|| json!({}));
    if !slot.is_object() {
        *slot = json!({});
    }
    slot.as_object_mut().expect("object")
}

pub fn set<T: serde::Serialize>(doc: &mut Map<String, Value>, key: &str, value: Option<T>) {
    if let Some(v) = value {
        doc.insert(key.to_string(), json!(v));
    }
}

pub fn finish<T: DeserializeOwned>(doc: Map<String, Value>) -> Result<T, Failure> {
    serde_json::from_value(Value::Object(doc)).map_err(|e| Failure::usage(format!("invalid study: {e}")))
}

/// Applies the shared run flags and fills `problem`, `inner` and `newton`
/// defaults. Returns the resolved problem spec and the method's family.
pub fn apply_run_args(
    doc: &mut Map<String, Value>,
    args: &RunArgs,
    tolerance: Option<f64>,
) -> Result<(ProblemSpec, Family, usize), Failure> {
    set(doc, "method", args.method.clone());
    if let Some(Value::String(name)) = doc.get("problem").cloned() {
        doc.insert("problem".into(), json!({ "name": name }));
    }
    if let Some(p) = &args.problem {
        object(doc, "problem").insert("name".into(), json!(p));
    }
    if let Some(n) = args.grid_points {
        object(object(doc, "problem"), "brusselator").insert("n".into(), json!(n));
    }
    let method = match doc.get("method") {
        Some(Value::String(m)) => m.clone(),
        _ => return Err(Failure::usage("no method given (use --method or a study file)")),
    };
    let entry = catalog::get_method(&method)?;
    let problem: ProblemSpec = match doc.get("problem") {
        Some(p) => serde_json::from_value(p.clone()).map_err(|e| Failure::usage(format!("invalid problem: {e}")))?,
        None => return Err(Failure::usage("no problem given (use --problem kpr|brusselator or a study file)")),
    };

    let inner = object(doc, "inner");
    set(inner, "table", args.inner.clone());
    set(inner, "substeps", args.substeps);
    if !inner.contains_key("table") {
        inner.insert("table".into(), json!(default_inner(problem.name, entry.declared_order)));
    }
    if !inner.contains_key("substeps") {
        let m = match problem.name {
            ProblemKind::Kpr => 20,
            ProblemKind::Brusselator => 5,
        };
        inner.insert("substeps".into(), json!(m));
    }

    if tolerance.is_some() || doc.get("newton").is_some_and(|v| !v.is_null()) {
        let newton = object(doc, "newton");
        set(newton, "abs_tol", tolerance);
        if !newton.contains_key("linear_solver") {
            newton.insert("linear_solver".into(), json!(problem.default_solver()));
        }
    }
    Ok((problem, entry.family, entry.declared_order))
}

/// Inner table matching the outer method's order on each problem.
fn default_inner(problem: ProblemKind, order: usize) -> &'static str {
    match (problem, order) {
        (_, 1) => "euler",
        (ProblemKind::Kpr, 2) => "heun",
        (ProblemKind::Kpr, 3) => "rk32",
        (ProblemKind::Brusselator, 2) => "sdirk2-trap",
        (ProblemKind::Brusselator, 3) => "sdirk3",
        _ => "rk4",
    }
}
