use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use imex_mri::catalog::{self, Family, MethodData};
use imex_mri::format::number;
use imex_mri::order_conditions::{check_ark_order, check_scheme, ConditionReport, DEFAULT_TOLERANCE};
use imex_mri::stability::{joint_region_samples, log_radii, real_axis_extent, SectorSampling, ZGrid, MEMBERSHIP_TOL};
use imex_mri::study::{trajectory_csv, ConvergenceStudy, IntegrationStudy, ProblemKind};
use imex_mri::tableaux::{scheme_from_json, ImexArkPair, MriCouplingScheme};
use imex_mri::Error;

use crate::output::{csv_field, emit, sidecar_path};
use crate::studyfile::{self, object, set};
use crate::{CheckArgs, Cli, Command, ConvergeArgs, Format, IntegrateArgs, StabilityArgs};

/// A failed command: exit code 1 for numerical or condition failures, 2 for
/// usage errors.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NewtonFailure { .. } | Error::SingularMatrix | Error::Pole(_) => 1,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub fn run(cli: &Cli) -> Result<u8, Failure> {
    if let Some(t) = cli.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::usage(format!("--tolerance must be positive, got {t}")));
        }
    }
    match &cli.command {
        Command::Check(a) => check(cli, a),
        Command::Converge(a) => converge(cli, a),
        Command::Stability(a) => stability(cli, a),
        Command::Integrate(a) => integrate(cli, a),
        Command::List => list(cli),
    }
}

fn to_json(v: &impl serde::Serialize) -> Result<String, Failure> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Failure::numerical(e.to_string()))
}

fn looks_like_file(arg: &str) -> bool {
    arg.ends_with(".json") || Path::new(arg).is_file()
}

fn read_scheme_file(path: &str) -> Result<MriCouplingScheme, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {path}: {e}")))?;
    Ok(scheme_from_json(&text)?)
}

fn report_csv(report: &ConditionReport) -> String {
    let mut out = String::from("label,lhs,rhs,residual\n");
    for c in &report.conditions {
        out.push_str(&format!("{},{},{},{}\n", csv_field(&c.label), number(c.lhs), number(c.rhs), number(c.residual)));
    }
    out
}

fn check(cli: &Cli, args: &CheckArgs) -> Result<u8, Failure> {
    let tol = cli.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    let (name, order, report) = if looks_like_file(&args.method) {
        let scheme = read_scheme_file(&args.method)?;
        let order = args.order.unwrap_or(3);
        let report = check_scheme(&scheme, order, tol)?;
        (scheme.name().to_string(), order, report)
    } else {
        let entry = catalog::get_method(&args.method)?;
        let order = args.order.unwrap_or(entry.declared_order);
        let report = match &entry.data {
            MethodData::Coupling(s) => check_scheme(s, order, tol)?,
            MethodData::Table(t) => check_ark_order(&ImexArkPair::new(t.clone(), t.clone())?, order)?.with_tolerance(tol),
            MethodData::Pair(p) => check_ark_order(p, order)?.with_tolerance(tol),
            MethodData::Splitting(_) => {
                return Err(Failure::usage(format!("`{}` is a splitting and has no order conditions", entry.name)))
            }
        };
        (entry.name.to_string(), order, report)
    };
    let text = match cli.format {
        Format::Csv => report_csv(&report),
        Format::Json => to_json(&json!({ "method": name, "order": order, "report": report }))?,
    };
    emit(cli.out.as_deref(), &text)?;
    eprintln!(
        "{name}: order {order} {} (max residual {:e}, {} conditions, tolerance {:e})",
        if report.pass { "PASS" } else { "FAIL" },
        report.max_residual,
        report.conditions.len(),
        tol
    );
    Ok(if report.pass { 0 } else { 1 })
}

fn converge(cli: &Cli, args: &ConvergeArgs) -> Result<u8, Failure> {
    let mut doc = studyfile::load(args.run.study.as_deref())?;
    let (problem, family, _) = studyfile::apply_run_args(&mut doc, &args.run, cli.tolerance)?;
    if let Some(steps) = &args.steps {
        doc.insert("ladder".into(), json!(steps));
    } else if args.base.is_some() || args.k_min.is_some() || args.k_max.is_some() || !doc.contains_key("ladder") {
        if !doc.get("ladder").is_some_and(Value::is_object) {
            let k_max = match (problem.name, family) {
                (ProblemKind::Kpr, Family::Legacy) => 13,
                (ProblemKind::Kpr, _) => 10,
                (ProblemKind::Brusselator, _) => 7,
            };
            doc.insert(
                "ladder".into(),
                json!({ "base": problem.default_ladder_base(), "k_min": 3, "k_max": k_max }),
            );
        }
        let ladder = object(&mut doc, "ladder");
        set(ladder, "base", args.base);
        set(ladder, "k_min", args.k_min);
        set(ladder, "k_max", args.k_max);
    }
    if args.reference_step.is_some() {
        set(object(&mut doc, "reference"), "step", args.reference_step);
    }
    if args.fit_first.is_some() || args.fit_last.is_some() {
        let fit = object(&mut doc, "fit");
        set(fit, "first", args.fit_first);
        set(fit, "last", args.fit_last);
    }
    let study: ConvergenceStudy = studyfile::finish(doc)?;
    study.ladder.steps()?;
    let result = study.run()?;
    let text = match cli.format {
        Format::Csv => result.to_csv(),
        Format::Json => result.to_json()? + "\n",
    };
    emit(cli.out.as_deref(), &text)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "{} on {}: rate {:.4} from {} of {} steps",
        result.method,
        study.problem.name.as_str(),
        result.rate,
        result.fitted.len(),
        result.entries.len()
    );
    Ok(0)
}

fn stability_scheme(arg: &str) -> Result<MriCouplingScheme, Failure> {
    if looks_like_file(arg) {
        return read_scheme_file(arg);
    }
    let entry = catalog::get_method(arg)?;
    entry
        .scheme()
        .cloned()
        .ok_or_else(|| Failure::usage(format!("`{arg}` is not a multirate coupling scheme")))
}

fn study_number(doc: &Map<String, Value>, key: &str) -> Result<Option<f64>, Failure> {
    match doc.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| Failure::usage(format!("study field `{key}` must be a number"))),
    }
}

fn stability(cli: &Cli, args: &StabilityArgs) -> Result<u8, Failure> {
    let scheme = stability_scheme(&args.method)?;
    let mut doc = studyfile::load(args.study.as_deref())?;
    set(&mut doc, "alpha", args.alpha);
    set(&mut doc, "beta", args.beta);
    set(&mut doc, "radii", args.radii.clone());
    set(&mut doc, "rays", args.rays);
    {
        let grid = object(&mut doc, "grid");
        for (k, v) in [("re_min", args.re_min), ("re_max", args.re_max), ("im_min", args.im_min), ("im_max", args.im_max)] {
            set(grid, k, v);
        }
        set(grid, "n_re", args.n_re);
        set(grid, "n_im", args.n_im);
        let defaults = serde_json::to_value(ZGrid::default()).expect("grid serializes");
        for (k, v) in defaults.as_object().expect("object") {
            grid.entry(k.clone()).or_insert_with(|| v.clone());
        }
    }
    let grid: ZGrid = serde_json::from_value(doc["grid"].clone()).map_err(|e| Failure::usage(format!("invalid grid: {e}")))?;
    let alpha = study_number(&doc, "alpha")?.unwrap_or(10.0);
    let beta = study_number(&doc, "beta")?.unwrap_or(45.0);
    let radii: Vec<f64> = match doc.get("radii") {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| Failure::usage(format!("invalid radii: {e}")))?,
        None => log_radii(1e-2, 1e3, 12),
    };
    let rays = match doc.get("rays") {
        Some(v) => v.as_u64().ok_or_else(|| Failure::usage("study field `rays` must be a non-negative integer"))? as usize,
        None => 5,
    };
    let tol = cli.tolerance.unwrap_or(MEMBERSHIP_TOL);
    let fast = SectorSampling::with_radii(alpha, radii.clone(), rays)?;
    let implicit = SectorSampling::with_radii(beta, radii, rays)?;
    let mut raster = joint_region_samples(&scheme, &grid, &fast.points(), &implicit.points(), tol)?;
    raster.metadata.alpha = alpha;
    raster.metadata.beta = beta;
    raster.metadata.fast_sampling = Some(fast.clone());
    raster.metadata.implicit_sampling = Some(implicit.clone());
    let extent = args
        .extent
        .then(|| real_axis_extent(&scheme, &fast.points(), &implicit.points()));

    let generated = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut meta = serde_json::to_value(&raster.metadata).map_err(|e| Failure::numerical(e.to_string()))?;
    meta["generated_unix_time"] = json!(generated);
    if let Some(x) = extent {
        meta["real_axis_extent"] = json!(x);
    }
    match cli.format {
        Format::Csv => {
            emit(cli.out.as_deref(), &raster.to_csv())?;
            if let Some(out) = &cli.out {
                emit(Some(&sidecar_path(out)), &to_json(&meta)?)?;
            }
        }
        Format::Json => {
            let rows: Vec<Value> = raster
                .points
                .iter()
                .zip(&raster.member)
                .zip(&raster.max_abs_r)
                .map(|((z, m), r)| json!([z.re, z.im, m, if r.is_finite() { json!(r) } else { Value::Null }]))
                .collect();
            emit(cli.out.as_deref(), &to_json(&json!({ "metadata": meta, "columns": ["re_zE", "im_zE", "member", "max_abs_R"], "raster": rows }))?)?;
        }
    }
    eprintln!(
        "{}: alpha {alpha} beta {beta}: {} of {} points stable (area {:.4}){}",
        scheme.name(),
        raster.metadata.member_count,
        raster.points.len(),
        raster.area(),
        extent.map(|x| format!(", real-axis extent {x:.4}")).unwrap_or_default()
    );
    Ok(0)
}

fn integrate(cli: &Cli, args: &IntegrateArgs) -> Result<u8, Failure> {
    let mut doc = studyfile::load(args.run.study.as_deref())?;
    studyfile::apply_run_args(&mut doc, &args.run, cli.tolerance)?;
    set(&mut doc, "step", args.step);
    set(&mut doc, "final_time", args.final_time);
    set(&mut doc, "output_times", args.output_times.clone());
    if !doc.contains_key("step") {
        return Err(Failure::usage("no step size given (use --step or a study file)"));
    }
    let study: IntegrationStudy = studyfile::finish(doc)?;
    let (traj, built) = study.run()?;
    let text = match cli.format {
        Format::Csv => trajectory_csv(&traj, built.problem.as_ref()),
        Format::Json => traj.to_json()? + "\n",
    };
    emit(cli.out.as_deref(), &text)?;
    if let Some(f) = &traj.failure {
        return Err(Failure::numerical(format!("integration stopped early: {f}")));
    }
    eprintln!(
        "{}: {} steps, {} outputs",
        traj.method,
        traj.diagnostics.steps,
        traj.times.len()
    );
    Ok(0)
}

fn list(cli: &Cli) -> Result<u8, Failure> {
    let methods = catalog::list_methods();
    let family = |f: Family| serde_json::to_value(f).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let text = match cli.format {
        Format::Csv => {
            let mut out = String::from("name,family,order\n");
            for (name, f, order) in &methods {
                out.push_str(&format!("{name},{},{order}\n", family(*f)));
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = methods
                .iter()
                .map(|(name, f, order)| json!({ "name": name, "family": family(*f), "order": order }))
                .collect();
            to_json(&rows)?
        }
    };
    emit(cli.out.as_deref(), &text)?;
    Ok(0)
}
