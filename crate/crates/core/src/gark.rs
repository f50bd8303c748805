//! Generalized additive Runge-Kutta (GARK) form of a coupling scheme paired
//! with one step of a concrete fast table, and a direct GARK stepper.
//!
//! Fast stages are numbered block-major: stage `l` of fast block `λ` has
//! index `λ * s_fast + l`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{newton_solve, AdditiveProblem, Diagnostics, NewtonConfig};
use crate::order_conditions::{
    coupling_matrices, structural_matrices, Condition, ConditionReport, FastQuadratureConstants, DEFAULT_TOLERANCE,
};
use crate::tableaux::{induced_ark, ButcherTable, ImexArkPair, MriCouplingScheme};

/// Largest supported `s_fast * s_slow`.
pub const MAX_FAST_STAGES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GarkSystem {
    pub s_slow: usize,
    pub s_fast: usize,
    pub a_ff: DMatrix<f64>,
    pub a_fi: DMatrix<f64>,
    pub a_fe: DMatrix<f64>,
    pub a_sf: DMatrix<f64>,
    pub a_ii: DMatrix<f64>,
    pub a_ee: DMatrix<f64>,
    pub b_f: DVector<f64>,
    pub b_i: DVector<f64>,
    pub b_e: DVector<f64>,
    pub c_f: DVector<f64>,
    pub c_s: DVector<f64>,
}

fn powers(c: &DVector<f64>, k: usize) -> DVector<f64> {
    c.map(|x| x.powi(k as i32))
}

/// Assembles the GARK blocks of `scheme` with one step of `fast` per slow
/// stage.
pub fn build_gark(scheme: &MriCouplingScheme, fast: &ButcherTable) -> Result<GarkSystem> {
    let ss = scheme.stages();
    let sf = fast.stages();
    let s = ss.checked_mul(sf).unwrap_or(usize::MAX);
    if s > MAX_FAST_STAGES {
        return Err(Error::TooLarge(s));
    }
    let dc = scheme.delta_c();
    let st = structural_matrices(ss, dc)?;
    let ark = induced_ark(scheme);
    let (a, b, c) = (fast.a(), fast.b(), fast.c());
    let ones_f = DVector::from_element(sf, 1.0);
    let ones_b = &ones_f * b.transpose();

    let a_ff = DMatrix::from_diagonal(dc).kronecker(a) + (&st.l * &st.delta_c).kronecker(&ones_b);
    let c_f = (&st.l * scheme.c()).kronecker(&ones_f) + dc.kronecker(c);
    let b_f = dc.kronecker(b);
    let coupling = |slow: &DMatrix<f64>, family: &[DMatrix<f64>]| {
        family.iter().enumerate().fold((&st.l * slow).kronecker(&ones_f), |acc, (k, m)| {
            acc + m.kronecker(&(a * powers(c, k)))
        })
    };
    let a_fi = coupling(ark.implicit().a(), scheme.gamma());
    let a_fe = coupling(ark.explicit().a(), scheme.omega());
    let a_sf = st.delta_c.kronecker(&b.transpose());
    Ok(GarkSystem {
        s_slow: ss,
        s_fast: sf,
        a_ff,
        a_fi,
        a_fe,
        a_sf,
        a_ii: ark.implicit().a().clone(),
        a_ee: ark.explicit().a().clone(),
        b_f,
        b_i: ark.implicit().b().clone(),
        b_e: ark.explicit().b().clone(),
        c_f,
        c_s: scheme.c().clone(),
    })
}

#[derive(Serialize)]
struct GarkDocument {
    s_slow: usize,
    s_fast: usize,
    a_ff: Vec<Vec<f64>>,
    a_fi: Vec<Vec<f64>>,
    a_fe: Vec<Vec<f64>>,
    a_sf: Vec<Vec<f64>>,
    a_ii: Vec<Vec<f64>>,
    a_ee: Vec<Vec<f64>>,
    b_f: Vec<f64>,
    b_i: Vec<f64>,
    b_e: Vec<f64>,
    c_f: Vec<f64>,
    c_s: Vec<f64>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl GarkSystem {
    pub fn fast_stages(&self) -> usize {
        self.s_slow * self.s_fast
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = GarkDocument {
            s_slow: self.s_slow,
            s_fast: self.s_fast,
            a_ff: rows(&self.a_ff),
            a_fi: rows(&self.a_fi),
            a_fe: rows(&self.a_fe),
            a_sf: rows(&self.a_sf),
            a_ii: rows(&self.a_ii),
            a_ee: rows(&self.a_ee),
            b_f: self.b_f.iter().copied().collect(),
            b_i: self.b_i.iter().copied().collect(),
            b_e: self.b_e.iter().copied().collect(),
            c_f: self.c_f.iter().copied().collect(),
            c_s: self.c_s.iter().copied().collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Row-sum identities `A_SF 1 = c_S`, `A_FF 1 = c_F`, `A_FI 1 = c_F`,
    /// `A_FE 1 = c_F`, `A_II 1 = A_EE 1 = c_S`.
    pub fn check_row_sums(&self, tolerance: f64) -> ConditionReport {
        let diff = |m: &DMatrix<f64>, c: &DVector<f64>| (m.column_sum() - c).amax();
        ConditionReport::new(
            vec![
                Condition::new("A_SF·1 = c_S", diff(&self.a_sf, &self.c_s), 0.0),
                Condition::new("A_FF·1 = c_F", diff(&self.a_ff, &self.c_f), 0.0),
                Condition::new("A_FI·1 = c_F", diff(&self.a_fi, &self.c_f), 0.0),
                Condition::new("A_FE·1 = c_F", diff(&self.a_fe, &self.c_f), 0.0),
                Condition::new("A_II·1 = c_S", diff(&self.a_ii, &self.c_s), 0.0),
                Condition::new("A_EE·1 = c_S", diff(&self.a_ee, &self.c_s), 0.0),
            ],
            tolerance,
        )
    }
}

/// `ζ_k = bᵀ A c^k`, `β_k = (b∘c)ᵀ A c^k`, `ξ_k = bᵀ A A c^k` of a concrete
/// fast table.
pub fn table_quadrature_constants(fast: &ButcherTable, k_max: usize) -> FastQuadratureConstants {
    let (a, b, c) = (fast.a(), fast.b(), fast.c());
    let bc = b.component_mul(c);
    let mut out = FastQuadratureConstants {
        zeta: Vec::new(),
        beta: Vec::new(),
        xi: Vec::new(),
    };
    for k in 0..=k_max {
        let ack = a * powers(c, k);
        out.zeta.push(b.dot(&ack));
        out.beta.push(bc.dot(&ack));
        out.xi.push(b.dot(&(a * &ack)));
    }
    out
}

/// Checks the simplifying identities of the GARK form against `scheme` and
/// its base pair `ark`, plus the ten order-four coupling conditions that hold
/// automatically when both the base pair and the fast table have order four.
pub fn verify_simplifying_identities(
    gark: &GarkSystem,
    scheme: &MriCouplingScheme,
    ark: &ImexArkPair,
    fast: &ButcherTable,
) -> Result<ConditionReport> {
    if gark.s_slow != scheme.stages() || gark.s_fast != fast.stages() || ark.stages() != scheme.stages() {
        return Err(Error::DimensionMismatch("GARK system, scheme, pair and fast table disagree".into()));
    }
    let ss = scheme.stages();
    let dc = scheme.delta_c();
    let cs = scheme.c();
    let st = structural_matrices(ss, dc)?;
    let constants = table_quadrature_constants(fast, scheme.k_max());
    let cm = coupling_matrices(scheme, ark, &constants)?;
    let (a, b, c) = (fast.a(), fast.b(), fast.c());
    let ones_f = DVector::from_element(gark.s_fast, 1.0);
    let mut out = Vec::new();

    let half_c2 = cs.map(|x| 0.5 * x * x);
    out.push(Condition::new(
        "A_SF·c_F = c²/2",
        (&gark.a_sf * &gark.c_f - &half_c2).amax(),
        0.0,
    ));
    let bs = [("I", &gark.b_i), ("E", &gark.b_e)];
    for (tag, bsig) in bs {
        let lhs = gark.a_sf.tr_mul(bsig);
        let rhs = dc.component_mul(&(&st.d * bsig)).kronecker(b);
        out.push(Condition::new(format!("b_{tag}ᵀ·A_SF"), (lhs - rhs).amax(), 0.0));
    }
    for (tag, afs, az) in [("I", &gark.a_fi, &cm.implicit_zeta), ("E", &gark.a_fe, &cm.explicit_zeta)] {
        let lhs = afs.tr_mul(&gark.b_f);
        let rhs = az.tr_mul(dc);
        out.push(Condition::new(format!("b_Fᵀ·A_F{tag} = Δcᵀ·𝒜^{{{tag},ζ}}"), (lhs - rhs).amax(), 0.0));
    }
    let lc = &st.l * cs;
    let expansion = lc.map(|x| 0.5 * x * x).kronecker(&ones_f)
        + lc.component_mul(dc).kronecker(c)
        + dc.map(|x| x * x).kronecker(&(a * c));
    out.push(Condition::new(
        "A_FF·c_F expansion",
        (&gark.a_ff * &gark.c_f - expansion).amax(),
        0.0,
    ));

    let asf_cf = &gark.a_sf * &gark.c_f;
    let cf2 = gark.c_f.map(|x| x * x);
    let slow_tables = [("I", &gark.a_ii), ("E", &gark.a_ee)];
    for (tag, bsig) in bs {
        out.push(Condition::new(
            format!("(b_{tag}∘c)ᵀ·A_SF·c_F = 1/8"),
            bsig.component_mul(cs).dot(&asf_cf),
            1.0 / 8.0,
        ));
        for (ntag, ann) in slow_tables {
            out.push(Condition::new(
                format!("b_{tag}ᵀ·A_{ntag}{ntag}·A_SF·c_F = 1/24"),
                bsig.dot(&(ann * &asf_cf)),
                1.0 / 24.0,
            ));
        }
        out.push(Condition::new(
            format!("b_{tag}ᵀ·A_SF·c_F² = 1/12"),
            bsig.dot(&(&gark.a_sf * &cf2)),
            1.0 / 12.0,
        ));
        out.push(Condition::new(
            format!("b_{tag}ᵀ·A_SF·A_FF·c_F = 1/24"),
            bsig.dot(&(&gark.a_sf * (&gark.a_ff * &gark.c_f))),
            1.0 / 24.0,
        ));
    }
    Ok(ConditionReport::new(out, DEFAULT_TOLERANCE))
}

fn nonzero(x: f64) -> bool {
    x != 0.0
}

/// Accumulates `H Σ_j coeffs[j] * values[j]` into `out`, failing when a
/// required value has not been computed yet.
fn accumulate(
    out: &mut [f64],
    h: f64,
    coeffs: impl Iterator<Item = (usize, f64)>,
    values: &[Option<Vec<f64>>],
    scheme: &str,
) -> Result<()> {
    for (j, w) in coeffs {
        if !nonzero(w) {
            continue;
        }
        let v = values[j]
            .as_ref()
            .ok_or_else(|| Error::SolveCoupled(scheme.to_string()))?;
        for (o, x) in out.iter_mut().zip(v) {
            *o += h * w * x;
        }
    }
    Ok(())
}

/// One step of the assembled GARK method, solving fast blocks and slow stages
/// in interleaved order. Each slow stage whose fast block feeds it is
/// preceded by that block; otherwise the slow stage comes first.
pub fn gark_step(
    gark: &GarkSystem,
    problem: &dyn AdditiveProblem,
    t_n: f64,
    y_n: &[f64],
    h: f64,
    newton: &NewtonConfig,
) -> Result<Vec<f64>> {
    let n = y_n.len();
    if n != problem.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has {n} entries, problem dimension is {}",
            problem.dim()
        )));
    }
    let (ss, sf) = (gark.s_slow, gark.s_fast);
    let label = "gark";
    let mut diag = Diagnostics::default();
    let mut slow: Vec<Option<Vec<f64>>> = vec![None; ss];
    let mut fi: Vec<Option<Vec<f64>>> = vec![None; ss];
    let mut fe: Vec<Option<Vec<f64>>> = vec![None; ss];
    let mut ff: Vec<Option<Vec<f64>>> = vec![None; ss * sf];

    let slow_stage = |lam: usize,
                      fi: &mut Vec<Option<Vec<f64>>>,
                      fe: &mut Vec<Option<Vec<f64>>>,
                      ff: &[Option<Vec<f64>>],
                      slow: &mut Vec<Option<Vec<f64>>>,
                      diag: &mut Diagnostics|
     -> Result<()> {
        let mut base = y_n.to_vec();
        accumulate(&mut base, h, (0..ss).filter(|&j| j != lam).map(|j| (j, gark.a_ii[(lam, j)])), fi, label)?;
        accumulate(&mut base, h, (0..ss).map(|j| (j, gark.a_ee[(lam, j)])), fe, label)?;
        accumulate(&mut base, h, (0..ss * sf).map(|m| (m, gark.a_sf[(lam, m)])), ff, label)?;
        let t = t_n + gark.c_s[lam] * h;
        let d = gark.a_ii[(lam, lam)];
        let y = if nonzero(d) {
            let f = |y: &[f64], out: &mut [f64]| problem.f_implicit(t, y, out);
            let jac = |y: &[f64]| problem.jac_implicit(t, y);
            newton_solve(&f, &jac, h * d, &base, base.clone(), newton, diag, lam + 1)?
        } else {
            base
        };
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        problem.f_implicit(t, &y, &mut a);
        problem.f_explicit(t, &y, &mut b);
        fi[lam] = Some(a);
        fe[lam] = Some(b);
        slow[lam] = Some(y);
        Ok(())
    };

    let fast_block = |lam: usize,
                      fi: &[Option<Vec<f64>>],
                      fe: &[Option<Vec<f64>>],
                      ff: &mut Vec<Option<Vec<f64>>>,
                      diag: &mut Diagnostics|
     -> Result<()> {
        for l in 0..sf {
            let idx = lam * sf + l;
            let mut base = y_n.to_vec();
            accumulate(&mut base, h, (0..ss * sf).filter(|&m| m != idx).map(|m| (m, gark.a_ff[(idx, m)])), ff, label)?;
            accumulate(&mut base, h, (0..ss).map(|j| (j, gark.a_fi[(idx, j)])), fi, label)?;
            accumulate(&mut base, h, (0..ss).map(|j| (j, gark.a_fe[(idx, j)])), fe, label)?;
            let t = t_n + gark.c_f[idx] * h;
            let d = gark.a_ff[(idx, idx)];
            let y = if nonzero(d) {
                let f = |y: &[f64], out: &mut [f64]| problem.f_fast(t, y, out);
                let jac = |y: &[f64]| problem.jac_fast(t, y);
                newton_solve(&f, &jac, h * d, &base, base.clone(), newton, diag, lam + 1)?
            } else {
                base
            };
            let mut k = vec![0.0; n];
            problem.f_fast(t, &y, &mut k);
            ff[idx] = Some(k);
        }
        Ok(())
    };

    for lam in 0..ss {
        let feeds_slow = (0..sf).any(|l| (lam..ss).any(|i| nonzero(gark.a_sf[(i, lam * sf + l)])));
        if feeds_slow {
            fast_block(lam, &fi, &fe, &mut ff, &mut diag)?;
            slow_stage(lam, &mut fi, &mut fe, &ff, &mut slow, &mut diag)?;
        } else {
            slow_stage(lam, &mut fi, &mut fe, &ff, &mut slow, &mut diag)?;
            fast_block(lam, &fi, &fe, &mut ff, &mut diag)?;
        }
    }
    Ok(slow.pop().flatten().expect("all slow stages computed"))
}
