//! Consistency and order conditions for coupling schemes and IMEX-ARK pairs.
//!
//! Every check returns a [`ConditionReport`] listing each scalar condition
//! with its left-hand side, target and residual. Matrix-valued conditions
//! (row sums, table agreement) report the max-norm of the discrepancy as
//! `lhs` against a target of zero.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tableaux::{averaged_couplings, lower_ones, ImexArkPair, MriCouplingScheme};

/// Default pass tolerance for all reports.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl Condition {
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let residual = if lhs.is_finite() { (lhs - rhs).abs() } else { f64::INFINITY };
        Self {
            label: label.into(),
            lhs,
            rhs,
            residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub conditions: Vec<Condition>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ConditionReport {
    pub fn new(conditions: Vec<Condition>, tolerance: f64) -> Self {
        let max_residual = conditions.iter().fold(0.0_f64, |m, c| m.max(c.residual));
        Self {
            pass: max_residual <= tolerance,
            conditions,
            max_residual,
            tolerance,
        }
    }

    /// Concatenates two reports, keeping this report's tolerance.
    pub fn merge(mut self, other: ConditionReport) -> Self {
        self.conditions.extend(other.conditions);
        Self::new(self.conditions, self.tolerance)
    }

    pub fn with_tolerance(self, tolerance: f64) -> Self {
        Self::new(self.conditions, tolerance)
    }

    pub fn get(&self, label: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.label == label)
    }
}

/// `E`, `L`, `D` and `ΔC` for an `s`-stage scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralMatrices {
    pub e: DMatrix<f64>,
    pub l: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub delta_c: DMatrix<f64>,
}

impl StructuralMatrices {
    /// Bidiagonal inverse of `E`.
    pub fn e_inverse(&self) -> DMatrix<f64> {
        let s = self.e.nrows();
        DMatrix::identity(s, s) - &self.l
    }
}

pub fn structural_matrices(s: usize, delta_c: &DVector<f64>) -> Result<StructuralMatrices> {
    if delta_c.len() != s {
        return Err(Error::DimensionMismatch(format!("Δc has {} entries, expected {s}", delta_c.len())));
    }
    Ok(StructuralMatrices {
        e: lower_ones(s),
        l: DMatrix::from_fn(s, s, |i, j| if i == j + 1 { 1.0 } else { 0.0 }),
        d: DMatrix::from_fn(s, s, |i, j| if j >= i { 1.0 } else { 0.0 }),
        delta_c: DMatrix::from_fn(s, s, |i, j| if j <= i { delta_c[j] } else { 0.0 }),
    })
}

/// `ζ_k`, `β_k`, `ξ_k` for a fast method of sufficiently high order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FastQuadratureConstants {
    pub zeta: Vec<f64>,
    pub beta: Vec<f64>,
    pub xi: Vec<f64>,
}

pub fn fast_quadrature_constants(k_max: usize) -> FastQuadratureConstants {
    let k = |k: usize| k as f64;
    FastQuadratureConstants {
        zeta: (0..=k_max).map(|i| 1.0 / ((k(i) + 1.0) * (k(i) + 2.0))).collect(),
        beta: (0..=k_max).map(|i| 1.0 / ((k(i) + 1.0) * (k(i) + 3.0))).collect(),
        xi: (0..=k_max)
            .map(|i| 1.0 / ((k(i) + 1.0) * (k(i) + 2.0) * (k(i) + 3.0)))
            .collect(),
    }
}

/// The six matrices `𝒜^{σ,ζ}`, `𝒜^{σ,β}`, `𝒜^{σ,ξ}` for `σ ∈ {I, E}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrices {
    pub implicit_zeta: DMatrix<f64>,
    pub explicit_zeta: DMatrix<f64>,
    pub implicit_beta: DMatrix<f64>,
    pub explicit_beta: DMatrix<f64>,
    pub implicit_xi: DMatrix<f64>,
    pub explicit_xi: DMatrix<f64>,
}

impl CouplingMatrices {
    fn zeta(&self, p: Partition) -> &DMatrix<f64> {
        match p {
            Partition::Implicit => &self.implicit_zeta,
            Partition::Explicit => &self.explicit_zeta,
        }
    }
    fn beta(&self, p: Partition) -> &DMatrix<f64> {
        match p {
            Partition::Implicit => &self.implicit_beta,
            Partition::Explicit => &self.explicit_beta,
        }
    }
    fn xi(&self, p: Partition) -> &DMatrix<f64> {
        match p {
            Partition::Implicit => &self.implicit_xi,
            Partition::Explicit => &self.explicit_xi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Partition {
    Implicit,
    Explicit,
}

const PARTITIONS: [Partition; 2] = [Partition::Implicit, Partition::Explicit];

impl Partition {
    fn tag(self) -> &'static str {
        match self {
            Partition::Implicit => "I",
            Partition::Explicit => "E",
        }
    }
    fn table<'a>(self, ark: &'a ImexArkPair) -> (&'a DMatrix<f64>, &'a DVector<f64>) {
        let t = match self {
            Partition::Implicit => ark.implicit(),
            Partition::Explicit => ark.explicit(),
        };
        (t.a(), t.b())
    }
}

fn check_dims(scheme: &MriCouplingScheme, ark: &ImexArkPair) -> Result<()> {
    if scheme.stages() != ark.stages() {
        return Err(Error::DimensionMismatch(format!(
            "scheme has {} stages, ARK pair {}",
            scheme.stages(),
            ark.stages()
        )));
    }
    Ok(())
}

pub fn coupling_matrices(
    scheme: &MriCouplingScheme,
    ark: &ImexArkPair,
    constants: &FastQuadratureConstants,
) -> Result<CouplingMatrices> {
    check_dims(scheme, ark)?;
    let s = scheme.stages();
    if constants.zeta.len() < scheme.k_max() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "constants cover k ≤ {}, scheme needs k ≤ {}",
            constants.zeta.len() as isize - 1,
            scheme.k_max()
        )));
    }
    let l = structural_matrices(s, scheme.delta_c())?.l;
    let build = |a: &DMatrix<f64>, lead: f64, family: &[DMatrix<f64>], w: &[f64]| {
        family
            .iter()
            .zip(w)
            .fold(&l * a * lead, |acc, (m, wk)| acc + m * *wk)
    };
    let ai = ark.implicit().a();
    let ae = ark.explicit().a();
    let (g, o) = (scheme.gamma(), scheme.omega());
    Ok(CouplingMatrices {
        implicit_zeta: build(ai, 1.0, g, &constants.zeta),
        explicit_zeta: build(ae, 1.0, o, &constants.zeta),
        implicit_beta: build(ai, 0.5, g, &constants.beta),
        explicit_beta: build(ae, 0.5, o, &constants.beta),
        implicit_xi: build(ai, 0.5, g, &constants.xi),
        explicit_xi: build(ae, 0.5, o, &constants.xi),
    })
}

fn max_abs(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0_f64, |m, x| if x.is_finite() { m.max(x.abs()) } else { f64::INFINITY })
}

/// `Γ^{0} 1 = Ω^{0} 1 = Δc` and `Γ^{k} 1 = Ω^{k} 1 = 0` for `k ≥ 1`.
pub fn check_internal_consistency(scheme: &MriCouplingScheme) -> ConditionReport {
    let mut out = Vec::new();
    let dc = scheme.delta_c();
    for (tag, family) in [("Γ", scheme.gamma()), ("Ω", scheme.omega())] {
        for (k, m) in family.iter().enumerate() {
            let sums = m.column_sum();
            let r = if k == 0 {
                max_abs((0..sums.len()).map(|i| sums[i] - dc[i]))
            } else {
                max_abs(sums.iter().copied())
            };
            let target = if k == 0 { "Δc" } else { "0" };
            out.push(Condition::new(format!("{tag}^{k}·1 = {target}"), r, 0.0));
        }
    }
    ConditionReport::new(out, DEFAULT_TOLERANCE)
}

/// `E Γ̄ = A^{I,I}` and `E Ω̄ = A^{E,E}`.
pub fn check_ark_consistency(scheme: &MriCouplingScheme, ark: &ImexArkPair) -> Result<ConditionReport> {
    check_dims(scheme, ark)?;
    let (gbar, obar) = averaged_couplings(scheme);
    let e = lower_ones(scheme.stages());
    let ri = &e * gbar - ark.implicit().a();
    let re = &e * obar - ark.explicit().a();
    Ok(ConditionReport::new(
        vec![
            Condition::new("E·Γ̄ = A^II", max_abs(ri.iter().copied()), 0.0),
            Condition::new("E·Ω̄ = A^EE", max_abs(re.iter().copied()), 0.0),
        ],
        DEFAULT_TOLERANCE,
    ))
}

fn third_order_coupling(scheme: &MriCouplingScheme, m: &CouplingMatrices) -> Vec<Condition> {
    let dc = scheme.delta_c();
    let c = scheme.c();
    PARTITIONS
        .iter()
        .map(|p| {
            let lhs = dc.dot(&(m.zeta(*p) * c));
            Condition::new(format!("order3 Δc'·A{},ζ·c = 1/6", p.tag()), lhs, 1.0 / 6.0)
        })
        .collect()
}

/// Internal consistency, ARK consistency and the two third-order coupling
/// conditions.
pub fn check_order3(scheme: &MriCouplingScheme, ark: &ImexArkPair) -> Result<ConditionReport> {
    let consts = fast_quadrature_constants(scheme.k_max());
    let m = coupling_matrices(scheme, ark, &consts)?;
    let base = check_internal_consistency(scheme).merge(check_ark_consistency(scheme, ark)?);
    Ok(base.merge(ConditionReport::new(third_order_coupling(scheme, &m), DEFAULT_TOLERANCE)))
}

/// The fourteen fourth-order coupling conditions.
pub fn check_order4(scheme: &MriCouplingScheme, ark: &ImexArkPair) -> Result<ConditionReport> {
    let consts = fast_quadrature_constants(scheme.k_max());
    let m = coupling_matrices(scheme, ark, &consts)?;
    let s = scheme.stages();
    let st = structural_matrices(s, scheme.delta_c())?;
    let dc = scheme.delta_c();
    let c = scheme.c();
    let c2 = c.component_mul(c);
    let dc2 = dc.component_mul(dc);
    let lc = &st.l * c;
    let dc_lc = dc.component_mul(&lc);
    let mut out = Vec::new();
    for p in PARTITIONS {
        let t = p.tag();
        let lhs = dc_lc.dot(&(m.zeta(p) * c)) + dc2.dot(&(m.beta(p) * c));
        out.push(Condition::new(format!("(4a) σ={t}"), lhs, 1.0 / 8.0));
    }
    for p in PARTITIONS {
        let lhs = dc.dot(&(m.zeta(p) * &c2));
        out.push(Condition::new(format!("(4b) σ={}", p.tag()), lhs, 1.0 / 12.0));
    }
    for sigma in PARTITIONS {
        let (_, b) = sigma.table(ark);
        let w = dc.component_mul(&(&st.d * b));
        for nu in PARTITIONS {
            let lhs = w.dot(&(m.zeta(nu) * c));
            out.push(Condition::new(
                format!("(4c) σ={} ν={}", sigma.tag(), nu.tag()),
                lhs,
                1.0 / 24.0,
            ));
        }
    }
    let dc_l_dcm = (dc.transpose() * &st.l * &st.delta_c).transpose();
    for p in PARTITIONS {
        let lhs = dc2.dot(&(m.xi(p) * c)) + dc_l_dcm.dot(&(m.zeta(p) * c));
        out.push(Condition::new(format!("(4d) σ={}", p.tag()), lhs, 1.0 / 24.0));
    }
    for sigma in PARTITIONS {
        for nu in PARTITIONS {
            let (a, _) = nu.table(ark);
            let lhs = dc.dot(&(m.zeta(sigma) * (a * c)));
            out.push(Condition::new(
                format!("(4e) σ={} ν={}", sigma.tag(), nu.tag()),
                lhs,
                1.0 / 24.0,
            ));
        }
    }
    Ok(ConditionReport::new(out, DEFAULT_TOLERANCE))
}

/// `Δc^T (L + E^{-1}/2) A^{σ,σ} c = 1/6` for both tables of the pair.
pub fn check_mis_third_order(ark: &ImexArkPair, delta_c: &DVector<f64>) -> Result<ConditionReport> {
    let s = ark.stages();
    let st = structural_matrices(s, delta_c)?;
    let w = &st.l + st.e_inverse() * 0.5;
    let c = ark.c();
    let out = PARTITIONS
        .iter()
        .map(|p| {
            let (a, _) = p.table(ark);
            let lhs = delta_c.dot(&(&w * a * c));
            Condition::new(format!("mis3 Δc'·(L+E⁻¹/2)·A{}·c = 1/6", p.tag()), lhs, 1.0 / 6.0)
        })
        .collect();
    Ok(ConditionReport::new(out, DEFAULT_TOLERANCE))
}

/// Additive Runge-Kutta order conditions up to order `p ≤ 4`, including all
/// mixed trees, plus the row-sum conditions `A^{σ} 1 = c` the reduced set
/// relies on.
pub fn check_ark_order(ark: &ImexArkPair, p: usize) -> Result<ConditionReport> {
    if !(1..=4).contains(&p) {
        return Err(Error::Domain(format!("order {p} outside 1..=4")));
    }
    let c = ark.c();
    let mut out = Vec::new();
    for sig in PARTITIONS {
        let (a, _) = sig.table(ark);
        let r = max_abs((0..c.len()).map(|i| a.row(i).sum() - c[i]));
        out.push(Condition::new(format!("A{}·1 = c", sig.tag()), r, 0.0));
    }
    let pow = |k: i32| c.map(|x| x.powi(k));
    for sig in PARTITIONS {
        let t = sig.tag();
        let (_, b) = sig.table(ark);
        out.push(Condition::new(format!("b{t}'·1 = 1"), b.sum(), 1.0));
        if p >= 2 {
            out.push(Condition::new(format!("b{t}'·c = 1/2"), b.dot(c), 0.5));
        }
        if p >= 3 {
            out.push(Condition::new(format!("b{t}'·c² = 1/3"), b.dot(&pow(2)), 1.0 / 3.0));
            for nu in PARTITIONS {
                let (a, _) = nu.table(ark);
                out.push(Condition::new(
                    format!("b{t}'·A{}·c = 1/6", nu.tag()),
                    b.dot(&(a * c)),
                    1.0 / 6.0,
                ));
            }
        }
        if p >= 4 {
            out.push(Condition::new(format!("b{t}'·c³ = 1/4"), b.dot(&pow(3)), 0.25));
            let bc = b.component_mul(c);
            for nu in PARTITIONS {
                let (a, _) = nu.table(ark);
                let n = nu.tag();
                out.push(Condition::new(format!("(b{t}×c)'·A{n}·c = 1/8"), bc.dot(&(a * c)), 1.0 / 8.0));
                out.push(Condition::new(format!("b{t}'·A{n}·c² = 1/12"), b.dot(&(a * pow(2))), 1.0 / 12.0));
                for mu in PARTITIONS {
                    let (a2, _) = mu.table(ark);
                    out.push(Condition::new(
                        format!("b{t}'·A{n}·A{}·c = 1/24", mu.tag()),
                        b.dot(&(a * (a2 * c))),
                        1.0 / 24.0,
                    ));
                }
            }
        }
    }
    Ok(ConditionReport::new(out, DEFAULT_TOLERANCE))
}

/// Runs every check appropriate for a scheme of the given order against its
/// induced ARK pair (order must be 3 or 4 for the coupling conditions to apply).
pub fn check_scheme(scheme: &MriCouplingScheme, order: usize, tolerance: f64) -> Result<ConditionReport> {
    let ark = crate::tableaux::induced_ark(scheme);
    let mut report = check_order3(scheme, &ark)?.merge(check_ark_order(&ark, order.clamp(1, 4))?);
    if order >= 4 {
        report = report.merge(check_order4(scheme, &ark)?);
    }
    Ok(report.with_tolerance(tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::tableaux::induced_ark;

    #[test]
    fn structural_examples() {
        let st = structural_matrices(2, &DVector::from_vec(vec![0.0, 1.0])).unwrap();
        assert_eq!(st.l, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]));
        assert_eq!(st.e, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]));
        assert_eq!(st.d, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
        let st = structural_matrices(3, &DVector::from_vec(vec![0.0, 0.5, 0.5])).unwrap();
        assert_eq!(st.delta_c.row(2).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.5, 0.5]);
        let st = structural_matrices(8, &DVector::zeros(8)).unwrap();
        assert_eq!(&st.e * st.e_inverse(), DMatrix::identity(8, 8));
    }

    #[test]
    fn closed_form_constants() {
        let k = fast_quadrature_constants(2);
        assert_eq!(k.zeta[0], 0.5);
        assert!((k.zeta[1] - 1.0 / 6.0).abs() < 1e-16);
        assert!((k.beta[1] - 1.0 / 8.0).abs() < 1e-16);
        assert!((k.xi[1] - 1.0 / 24.0).abs() < 1e-16);
        assert!((k.beta[2] - 1.0 / 15.0).abs() < 1e-16);
        assert!((k.xi[2] - 1.0 / 60.0).abs() < 1e-16);
    }

    #[test]
    fn zero_scheme_order4_fails_on_4a() {
        let z = MriCouplingScheme::zero(4, 0);
        let ark = induced_ark(&z);
        let r = check_order4(&z, &ark).unwrap();
        assert!(!r.pass);
        assert!((r.get("(4a) σ=I").unwrap().residual - 0.125).abs() < 1e-16);
    }

    #[test]
    fn k0_zeta_matrix() {
        let s = catalog::imex_mri_gark3a();
        let ark = induced_ark(&s);
        let m = coupling_matrices(&s, &ark, &fast_quadrature_constants(0)).unwrap();
        let l = structural_matrices(8, s.delta_c()).unwrap().l;
        let expect = &l * ark.implicit().a() + &s.gamma()[0] * 0.5;
        assert!((m.implicit_zeta - expect).amax() < 1e-16);
    }

    #[test]
    fn erk33a_rows() {
        let s = catalog::mri_gark_erk33a();
        let r = check_internal_consistency(&s);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn perturbed_scheme_fails_internal_consistency() {
        let s = catalog::imex_mri_gark3b();
        let mut g = s.gamma().to_vec();
        g[0][(1, 0)] += 1e-3;
        let p = s.with_coefficients(g, Some(s.omega().to_vec())).unwrap();
        let r = check_internal_consistency(&p);
        assert!(!r.pass);
        assert!((r.max_residual - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn ark_order_textbook_tables() {
        let rk4 = catalog::rk4();
        let pair = ImexArkPair::new(rk4.clone(), rk4).unwrap();
        assert!(check_ark_order(&pair, 4).unwrap().pass);
        let eu = catalog::euler();
        let pair = ImexArkPair::new(eu.clone(), eu).unwrap();
        assert!(check_ark_order(&pair, 1).unwrap().pass);
        assert!(!check_ark_order(&pair, 2).unwrap().pass);
        let ark = catalog::ark343();
        assert!(check_ark_order(&ark, 3).unwrap().pass);
        assert!(!check_ark_order(&ark, 4).unwrap().pass);
        assert!(check_ark_order(&ark, 5).is_err());
    }

    #[test]
    fn mismatched_ark_reports_largest_discrepancy() {
        let s = catalog::imex_mri_gark3a();
        let ark = induced_ark(&s);
        let mut ai = ark.implicit().a().clone();
        ai[(4, 2)] += 0.25;
        ai[(6, 0)] -= 0.5;
        let im = crate::tableaux::ButcherTable::new(ai, ark.implicit().b().clone(), ark.c().clone()).unwrap();
        let bad = ImexArkPair::new(ark.explicit().clone(), im).unwrap();
        let r = check_ark_consistency(&s, &bad).unwrap();
        assert!(!r.pass);
        assert!((r.max_residual - 0.5).abs() < 1e-15);
    }

    #[test]
    fn report_serializes() {
        let r = check_internal_consistency(&catalog::imex_mri_gark3a());
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["conditions"].is_array());
        assert!(v["max_residual"].is_number());
        assert_eq!(v["pass"], serde_json::Value::Bool(true));
    }
}
