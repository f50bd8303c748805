//! Butcher tables, IMEX-ARK pairs and multirate coupling schemes, together
//! with the derived quantities the rest of the crate consumes: abscissa
//! increments, averaged couplings, induced ARK tables and per-stage
//! classification.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used for the structural checks of [`validate_butcher`].
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Threshold below which an averaged diagonal coupling counts as zero.
pub const DIAGONAL_ZERO_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableKind {
    Explicit,
    DiagonallyImplicit,
    General,
}

/// A single Runge-Kutta tableau `(A, b, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTable {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    kind: TableKind,
}

fn classify(a: &DMatrix<f64>) -> TableKind {
    let s = a.nrows();
    let mut kind = TableKind::Explicit;
    for i in 0..s {
        for j in i..s {
            if a[(i, j)] != 0.0 {
                if j > i {
                    return TableKind::General;
                }
                kind = TableKind::DiagonallyImplicit;
            }
        }
    }
    kind
}

impl ButcherTable {
    /// Builds a table and infers its structural kind from the nonzero pattern of `A`.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>) -> Result<Self> {
        let s = b.len();
        if s == 0 {
            return Err(Error::InvalidTable("table must have at least one stage".into()));
        }
        if a.nrows() != s || a.ncols() != s || c.len() != s {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}, b has {}, c has {}",
                a.nrows(),
                a.ncols(),
                s,
                c.len()
            )));
        }
        let kind = classify(&a);
        Ok(Self { a, b, c, kind })
    }

    /// Builds a table from row slices.
    pub fn from_rows(a: &[&[f64]], b: &[f64], c: &[f64]) -> Result<Self> {
        let s = b.len();
        let mut m = DMatrix::zeros(s, s);
        for (i, row) in a.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i < s && j < s {
                    m[(i, j)] = *v;
                }
            }
        }
        Self::new(m, DVector::from_column_slice(b), DVector::from_column_slice(c))
    }

    /// Overrides the inferred kind; [`validate_butcher`] then checks the
    /// declared structure.
    pub fn with_kind(mut self, kind: TableKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }
    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }
    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn is_explicit(&self) -> bool {
        self.kind == TableKind::Explicit
    }

    /// Last row of `A` equals `b`.
    pub fn is_stiffly_accurate(&self) -> bool {
        let s = self.stages();
        (0..s).all(|j| (self.a[(s - 1, j)] - self.b[j]).abs() <= 1e-15)
    }

    /// Stability function `1 + z b^T (I - z A)^{-1} 1` evaluated by forward
    /// substitution (valid for lower-triangular `A`).
    pub fn stability_value(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        use num_complex::Complex64;
        let s = self.stages();
        let mut k = vec![Complex64::new(0.0, 0.0); s];
        for i in 0..s {
            let mut acc = Complex64::new(1.0, 0.0);
            for j in 0..i {
                acc += z * self.a[(i, j)] * k[j];
            }
            k[i] = acc / (Complex64::new(1.0, 0.0) - z * self.a[(i, i)]);
        }
        let mut r = Complex64::new(1.0, 0.0);
        for j in 0..s {
            r += z * self.b[j] * k[j];
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    NotStrictlyLowerTriangular,
    NotLowerTriangular,
    RowSumMismatch,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

/// Checks the declared structure, finiteness and `A 1 = c` to [`STRUCTURE_TOL`].
pub fn validate_butcher(table: &ButcherTable) -> Vec<Violation> {
    let mut out = Vec::new();
    let s = table.stages();
    let a = table.a();
    let finite = a.iter().chain(table.b.iter()).chain(table.c.iter()).all(|v| v.is_finite());
    if !finite {
        out.push(Violation {
            kind: ViolationKind::NonFinite,
            detail: "table contains non-finite entries".into(),
        });
        return out;
    }
    let (strict, name) = match table.kind {
        TableKind::Explicit => (true, Some(ViolationKind::NotStrictlyLowerTriangular)),
        TableKind::DiagonallyImplicit => (false, Some(ViolationKind::NotLowerTriangular)),
        TableKind::General => (false, None),
    };
    if let Some(kind) = name {
        for i in 0..s {
            let first = if strict { i } else { i + 1 };
            for j in first..s {
                if a[(i, j)].abs() > STRUCTURE_TOL {
                    out.push(Violation {
                        kind,
                        detail: format!(
                            "{}: A[{}][{}] = {}",
                            if strict { "not strictly lower triangular" } else { "not lower triangular" },
                            i + 1,
                            j + 1,
                            a[(i, j)]
                        ),
                    });
                }
            }
        }
    }
    for i in 0..s {
        let sum: f64 = a.row(i).iter().sum();
        if (sum - table.c[i]).abs() > STRUCTURE_TOL {
            out.push(Violation {
                kind: ViolationKind::RowSumMismatch,
                detail: format!("row {} sums to {} but c = {}", i + 1, sum, table.c[i]),
            });
        }
    }
    out
}

/// An IMEX additive Runge-Kutta pair sharing its abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct ImexArkPair {
    explicit: ButcherTable,
    implicit: ButcherTable,
}

impl ImexArkPair {
    pub fn new(explicit: ButcherTable, implicit: ButcherTable) -> Result<Self> {
        if explicit.stages() != implicit.stages() {
            return Err(Error::DimensionMismatch(format!(
                "explicit table has {} stages, implicit {}",
                explicit.stages(),
                implicit.stages()
            )));
        }
        Ok(Self { explicit, implicit })
    }

    pub fn explicit(&self) -> &ButcherTable {
        &self.explicit
    }
    pub fn implicit(&self) -> &ButcherTable {
        &self.implicit
    }
    pub fn stages(&self) -> usize {
        self.explicit.stages()
    }

    /// Shared abscissae (the explicit table's `c`).
    pub fn c(&self) -> &DVector<f64> {
        self.explicit.c()
    }

    fn check_abscissae(&self) -> Result<()> {
        for i in 0..self.stages() {
            if (self.explicit.c[i] - self.implicit.c[i]).abs() > 1e-14 {
                return Err(Error::InconsistentAbscissae(i + 1));
            }
        }
        Ok(())
    }

    pub fn is_stiffly_accurate(&self) -> bool {
        self.explicit.is_stiffly_accurate() && self.implicit.is_stiffly_accurate()
    }
}

/// Appends a stage at `c = 1` whose row is `b` (and `b` gains a trailing zero).
fn pad_table(t: &ButcherTable) -> ButcherTable {
    let s = t.stages();
    let mut a = DMatrix::zeros(s + 1, s + 1);
    a.view_mut((0, 0), (s, s)).copy_from(&t.a);
    for j in 0..s {
        a[(s, j)] = t.b[j];
    }
    let mut b = DVector::zeros(s + 1);
    b.rows_mut(0, s).copy_from(&t.b);
    let mut c = DVector::zeros(s + 1);
    c.rows_mut(0, s).copy_from(&t.c);
    c[s] = 1.0;
    let kind = t.kind;
    let mut padded = ButcherTable::new(a, b, c).expect("padding preserves dimensions");
    if kind == TableKind::General {
        padded.kind = kind;
    }
    padded
}

/// Converts a pair to stiffly accurate form by padding both tables with an
/// extra stage at `c = 1` that reproduces `b`. Pairs that are already
/// stiffly accurate are returned unchanged.
pub fn pad_stiffly_accurate(pair: &ImexArkPair) -> Result<ImexArkPair> {
    pair.check_abscissae()?;
    if pair.is_stiffly_accurate() {
        return Ok(pair.clone());
    }
    ImexArkPair::new(pad_table(&pair.explicit), pad_table(&pair.implicit))
}

/// Increments `c[i] - c[i-1]` with `Δc[0] = 0`.
pub fn delta_c(c: &DVector<f64>) -> Result<DVector<f64>> {
    let mut dc = DVector::zeros(c.len());
    if c.is_empty() {
        return Ok(dc);
    }
    if c[0] != 0.0 {
        return Err(Error::InvalidScheme(format!("c[1] must be 0, got {}", c[0])));
    }
    for i in 1..c.len() {
        let d = c[i] - c[i - 1];
        if d < 0.0 {
            return Err(Error::UnsortedAbscissae { index: i + 1, prev: i });
        }
        dc[i] = d;
    }
    Ok(dc)
}

/// One IMEX-MRI-GARK method: abscissae plus the coefficient families
/// `Γ^{k}` (implicit slow coupling) and `Ω^{k}` (explicit slow coupling).
///
/// A scheme built without `Ω` is a plain MRI-GARK method; its explicit slow
/// partition is coupled through `Γ`, i.e. `omega()` returns the `Γ` family.
#[derive(Debug, Clone, PartialEq)]
pub struct MriCouplingScheme {
    name: String,
    c: DVector<f64>,
    delta_c: DVector<f64>,
    gamma: Vec<DMatrix<f64>>,
    omega: Option<Vec<DMatrix<f64>>>,
}

impl MriCouplingScheme {
    pub fn new(
        name: impl Into<String>,
        c: DVector<f64>,
        gamma: Vec<DMatrix<f64>>,
        omega: Option<Vec<DMatrix<f64>>>,
    ) -> Result<Self> {
        let name = name.into();
        let s = c.len();
        if s == 0 {
            return Err(Error::InvalidScheme("scheme needs at least one stage".into()));
        }
        if gamma.is_empty() {
            return Err(Error::InvalidScheme("at least one Γ matrix is required".into()));
        }
        let delta_c = delta_c(&c)?;
        let check = |m: &DMatrix<f64>, label: &str, k: usize, strict: bool| -> Result<()> {
            if m.nrows() != s || m.ncols() != s {
                return Err(Error::DimensionMismatch(format!(
                    "{label}^{k} is {}x{}, expected {s}x{s}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            for i in 0..s {
                for j in 0..s {
                    let above = if strict { j >= i } else { j > i };
                    if (above || i == 0) && m[(i, j)] != 0.0 {
                        return Err(Error::InvalidScheme(format!(
                            "{label}^{k}[{}][{}] = {} violates the triangular structure",
                            i + 1,
                            j + 1,
                            m[(i, j)]
                        )));
                    }
                }
            }
            Ok(())
        };
        let omega_strict_label = if omega.is_some() { "Ω" } else { "Γ" };
        for (k, g) in gamma.iter().enumerate() {
            check(g, "Γ", k, omega.is_none())?;
        }
        if let Some(om) = &omega {
            if om.len() != gamma.len() {
                return Err(Error::InvalidScheme(format!(
                    "{} Γ matrices but {} Ω matrices",
                    gamma.len(),
                    om.len()
                )));
            }
            for (k, w) in om.iter().enumerate() {
                check(w, omega_strict_label, k, true)?;
            }
        }
        Ok(Self {
            name,
            c,
            delta_c,
            gamma,
            omega,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn stages(&self) -> usize {
        self.c.len()
    }
    pub fn k_max(&self) -> usize {
        self.gamma.len() - 1
    }
    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }
    pub fn delta_c(&self) -> &DVector<f64> {
        &self.delta_c
    }
    pub fn gamma(&self) -> &[DMatrix<f64>] {
        &self.gamma
    }
    /// Explicit coupling family; `Γ` for schemes without a separate `Ω`.
    pub fn omega(&self) -> &[DMatrix<f64>] {
        self.omega.as_deref().unwrap_or(&self.gamma)
    }
    pub fn has_explicit_coupling(&self) -> bool {
        self.omega.is_some()
    }

    /// Same abscissae, new coefficient families. Used to build perturbed or
    /// combined schemes.
    pub fn with_coefficients(
        &self,
        gamma: Vec<DMatrix<f64>>,
        omega: Option<Vec<DMatrix<f64>>>,
    ) -> Result<Self> {
        Self::new(self.name.clone(), self.c.clone(), gamma, omega)
    }

    /// All-zero scheme with `s` stages (all abscissae zero).
    pub fn zero(s: usize, k_max: usize) -> Self {
        let z = vec![DMatrix::zeros(s, s); k_max + 1];
        Self::new("zero", DVector::zeros(s), z.clone(), Some(z)).expect("zero scheme is valid")
    }
}

/// `Γ̄ = Σ_k Γ^{k}/(k+1)` and the matching `Ω̄`.
pub fn averaged_couplings(scheme: &MriCouplingScheme) -> (DMatrix<f64>, DMatrix<f64>) {
    let avg = |family: &[DMatrix<f64>]| {
        family
            .iter()
            .enumerate()
            .fold(DMatrix::zeros(scheme.stages(), scheme.stages()), |acc, (k, m)| {
                acc + m / (k as f64 + 1.0)
            })
    };
    (avg(scheme.gamma()), avg(scheme.omega()))
}

/// Lower-triangular all-ones matrix.
pub fn lower_ones(s: usize) -> DMatrix<f64> {
    DMatrix::from_fn(s, s, |i, j| if i >= j { 1.0 } else { 0.0 })
}

/// The IMEX-ARK pair `(E Ω̄, E Γ̄)` a scheme reduces to when `f^{F} = 0`.
pub fn induced_ark(scheme: &MriCouplingScheme) -> ImexArkPair {
    let s = scheme.stages();
    let (gbar, obar) = averaged_couplings(scheme);
    let e = lower_ones(s);
    let ai = &e * gbar;
    let ae = &e * obar;
    let bi = ai.row(s - 1).transpose();
    let be = ae.row(s - 1).transpose();
    let c = scheme.c().clone();
    let explicit = ButcherTable::new(ae, be, c.clone()).expect("square by construction");
    let implicit = ButcherTable::new(ai, bi, c).expect("square by construction");
    ImexArkPair::new(explicit, implicit).expect("matching stage counts")
}

/// Evaluates `γ_{i,·}(τ)` and `ω_{i,·}(τ)` by Horner's rule; `stage` is 1-based.
pub fn evaluate_coupling_polynomials(
    scheme: &MriCouplingScheme,
    stage: usize,
    tau: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = scheme.stages();
    if !(2..=s).contains(&stage) {
        return Err(Error::StageOutOfRange { index: stage, stages: s });
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::TauOutOfRange(tau));
    }
    let i = stage - 1;
    let horner = |family: &[DMatrix<f64>]| -> Vec<f64> {
        (0..s)
            .map(|j| family.iter().rev().fold(0.0, |acc, m| acc * tau + m[(i, j)]))
            .collect()
    };
    Ok((horner(scheme.gamma()), horner(scheme.omega())))
}

/// How a slow stage is advanced, from `(Δc_i, γ̄_{ii})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageClass {
    /// `Δc_i > 0`, `γ̄_{ii} = 0`: modified fast IVP.
    ErkLike,
    /// `Δc_i = 0`, `γ̄_{ii} ≠ 0`: standard implicit solve.
    Implicit,
    /// `Δc_i = 0`, `γ̄_{ii} = 0`: explicit algebraic update.
    ExplicitAlgebraic,
    /// `Δc_i > 0`, `γ̄_{ii} ≠ 0`: implicit solve coupled to the fast evolution.
    SolveCoupled,
}

pub fn classify_stage(delta_c: f64, gamma_bar_ii: f64) -> StageClass {
    let implicit = gamma_bar_ii.abs() > DIAGONAL_ZERO_TOL;
    match (delta_c != 0.0, implicit) {
        (true, false) => StageClass::ErkLike,
        (false, true) => StageClass::Implicit,
        (false, false) => StageClass::ExplicitAlgebraic,
        (true, true) => StageClass::SolveCoupled,
    }
}

pub fn stage_classes(scheme: &MriCouplingScheme) -> Vec<StageClass> {
    let (gbar, _) = averaged_couplings(scheme);
    (0..scheme.stages())
        .map(|i| {
            let class = classify_stage(scheme.delta_c()[i], gbar[(i, i)]);
            // a fast stage must not depend on its own slow value through any Γ^{k}
            if class == StageClass::ErkLike
                && scheme.gamma().iter().any(|g| g[(i, i)].abs() > DIAGONAL_ZERO_TOL)
            {
                StageClass::SolveCoupled
            } else {
                class
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// JSON documents

/// A coefficient as it appears in a JSON document: a decimal string, a
/// fraction `"p/q"`, or a plain JSON number.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Text(String),
    Number(f64),
}

impl Coefficient {
    pub fn value(&self) -> Result<f64> {
        match self {
            Coefficient::Number(v) => Ok(*v),
            Coefficient::Text(s) => parse_coefficient(s),
        }
    }
}

/// Parses a decimal string or a fraction `p/q` to the nearest double.
pub fn parse_coefficient(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in `{s}`")))?;
        let d: f64 = den.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in `{s}`")))?;
        if d == 0.0 {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(n / d);
    }
    s.parse().map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}

/// On-disk form of a coupling scheme:
/// `{name, c, k_max, gamma: [Γ^0, Γ^1, ...], omega: [Ω^0, ...]}` with each
/// matrix given as a list of rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeDocument {
    pub name: String,
    pub c: Vec<Coefficient>,
    pub k_max: usize,
    pub gamma: Vec<Vec<Vec<Coefficient>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<Vec<Vec<Coefficient>>>>,
}

fn matrix_from_doc(rows: &[Vec<Coefficient>], s: usize) -> Result<DMatrix<f64>> {
    if rows.len() != s {
        return Err(Error::DimensionMismatch(format!("matrix has {} rows, expected {s}", rows.len())));
    }
    let mut m = DMatrix::zeros(s, s);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != s {
            return Err(Error::DimensionMismatch(format!(
                "row {} has {} entries, expected {s}",
                i + 1,
                row.len()
            )));
        }
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = v.value()?;
        }
    }
    Ok(m)
}

fn matrix_to_doc(m: &DMatrix<f64>) -> Vec<Vec<Coefficient>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Coefficient::Text(format!("{}", m[(i, j)]))).collect())
        .collect()
}

impl SchemeDocument {
    pub fn into_scheme(self) -> Result<MriCouplingScheme> {
        let c: Vec<f64> = self.c.iter().map(Coefficient::value).collect::<Result<_>>()?;
        let s = c.len();
        if self.gamma.len() != self.k_max + 1 {
            return Err(Error::InvalidScheme(format!(
                "k_max = {} but {} Γ matrices given",
                self.k_max,
                self.gamma.len()
            )));
        }
        let gamma = self.gamma.iter().map(|m| matrix_from_doc(m, s)).collect::<Result<Vec<_>>>()?;
        let omega = match &self.omega {
            Some(om) => Some(om.iter().map(|m| matrix_from_doc(m, s)).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        MriCouplingScheme::new(self.name, DVector::from_vec(c), gamma, omega)
    }

    pub fn from_scheme(scheme: &MriCouplingScheme) -> Self {
        Self {
            name: scheme.name().to_string(),
            c: scheme.c().iter().map(|v| Coefficient::Text(format!("{v}"))).collect(),
            k_max: scheme.k_max(),
            gamma: scheme.gamma().iter().map(matrix_to_doc).collect(),
            omega: scheme
                .has_explicit_coupling()
                .then(|| scheme.omega().iter().map(matrix_to_doc).collect()),
        }
    }
}

pub fn scheme_from_json(text: &str) -> Result<MriCouplingScheme> {
    let doc: SchemeDocument = serde_json::from_str(text)?;
    doc.into_scheme()
}

pub fn scheme_to_json(scheme: &MriCouplingScheme) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SchemeDocument::from_scheme(scheme))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn rk4() -> ButcherTable {
        ButcherTable::from_rows(
            &[&[], &[0.5], &[0.0, 0.5], &[0.0, 0.0, 1.0]],
            &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            &[0.0, 0.5, 0.5, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn rk4_validates() {
        let t = rk4();
        assert_eq!(t.kind(), TableKind::Explicit);
        assert!(validate_butcher(&t).is_empty());
    }

    #[test]
    fn declared_explicit_with_diagonal_is_flagged() {
        let t = ButcherTable::from_rows(&[&[0.0], &[0.5, 0.5]], &[0.5, 0.5], &[0.0, 1.0])
            .unwrap()
            .with_kind(TableKind::Explicit);
        let v = validate_butcher(&t);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::NotStrictlyLowerTriangular);
        assert!(v[0].detail.contains("not strictly lower triangular"));
    }

    #[test]
    fn row_sum_mismatch_is_flagged() {
        let t = ButcherTable::from_rows(&[&[], &[0.4]], &[0.5, 0.5], &[0.0, 0.5]).unwrap();
        let v = validate_butcher(&t);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::RowSumMismatch);
    }

    #[test]
    fn ark343_tables_validate() {
        let pair = catalog::ark343();
        assert!(validate_butcher(pair.implicit()).is_empty());
        assert!(validate_butcher(pair.explicit()).is_empty());
    }

    #[test]
    fn padding_ark343() {
        let pair = catalog::ark343();
        assert!(!pair.explicit().is_stiffly_accurate());
        assert!(pair.implicit().is_stiffly_accurate());
        let padded = pad_stiffly_accurate(&pair).unwrap();
        assert_eq!(padded.stages(), 5);
        let eta = catalog::ARK343_ETA;
        let expect = [0.0, eta, (1.0 + eta) / 2.0, 1.0, 1.0];
        for (i, e) in expect.iter().enumerate() {
            assert!((padded.c()[i] - e).abs() < 1e-15);
            assert!((padded.implicit().c()[i] - e).abs() < 1e-15);
        }
        assert!(padded.is_stiffly_accurate());
        // padding again is a no-op
        assert_eq!(pad_stiffly_accurate(&padded).unwrap(), padded);
    }

    #[test]
    fn padding_when_only_one_side_is_stiffly_accurate() {
        // implicit side: last row equals b; explicit side: not
        let ex = ButcherTable::from_rows(&[&[], &[1.0]], &[0.5, 0.5], &[0.0, 1.0]).unwrap();
        let im = ButcherTable::from_rows(&[&[], &[0.5, 0.5]], &[0.5, 0.5], &[0.0, 1.0]).unwrap();
        let padded = pad_stiffly_accurate(&ImexArkPair::new(ex, im).unwrap()).unwrap();
        assert_eq!(padded.stages(), 3);
        for t in [padded.explicit(), padded.implicit()] {
            assert_eq!(t.a()[(2, 0)], 0.5);
            assert_eq!(t.a()[(2, 1)], 0.5);
            assert_eq!(t.a()[(2, 2)], 0.0);
            assert_eq!(t.b().as_slice(), &[0.5, 0.5, 0.0]);
            assert_eq!(t.c()[2], 1.0);
        }
    }

    #[test]
    fn padding_rejects_mismatched_abscissae() {
        let ex = ButcherTable::from_rows(&[&[], &[1.0]], &[0.5, 0.5], &[0.0, 1.0]).unwrap();
        let im = ButcherTable::from_rows(&[&[], &[0.5, 0.0]], &[0.5, 0.5], &[0.0, 0.5]).unwrap();
        let err = pad_stiffly_accurate(&ImexArkPair::new(ex, im).unwrap()).unwrap_err();
        assert!(matches!(err, Error::InconsistentAbscissae(2)));
    }

    #[test]
    fn delta_c_examples() {
        let dc = delta_c(&DVector::from_vec(vec![0.0, 1.0])).unwrap();
        assert_eq!(dc.as_slice(), &[0.0, 1.0]);

        let s4 = catalog::imex_mri_gark4();
        let expect = [0.0, 0.5, 0.0, 0.125, 0.0, 0.125, 0.0, 0.125, 0.0, 0.125, 0.0, 0.0];
        assert_eq!(s4.delta_c().as_slice(), &expect);

        let s3 = catalog::imex_mri_gark3a();
        let dc = s3.delta_c();
        assert_eq!(dc[0], 0.0);
        assert!((dc[1] - 0.4358665215084589994).abs() < 1e-16);
        assert_eq!(dc[2], 0.0);
        assert!((dc[3] - 0.2820667392457705).abs() < 1e-15);
        assert_eq!(dc[4], 0.0);
        assert!((dc[5] - 0.2820667392457705).abs() < 1e-15);
        assert_eq!(dc[6], 0.0);
        assert_eq!(dc[7], 0.0);
    }

    #[test]
    fn delta_c_rejects_unsorted() {
        let err = delta_c(&DVector::from_vec(vec![0.0, 0.5, 0.25])).unwrap_err();
        assert!(err.to_string().contains("abscissae not sorted"));
    }

    #[test]
    fn averaged_couplings_single_term() {
        let s = catalog::imex_mri_gark3a();
        let (g, o) = averaged_couplings(&s);
        assert_eq!(g, s.gamma()[0]);
        assert_eq!(o, s.omega()[0]);
        let z = MriCouplingScheme::zero(4, 1);
        let (g, o) = averaged_couplings(&z);
        assert!(g.iter().chain(o.iter()).all(|v| *v == 0.0));
    }

    #[test]
    fn averaged_couplings_imex4_entry() {
        // −3.97728… + 8.70456…/2
        let (g, _) = averaged_couplings(&catalog::imex_mri_gark4());
        assert!((g[(3, 0)] - 0.375).abs() < 1e-14);
    }

    #[test]
    fn induced_ark_recovers_solve_decoupled_ark343() {
        for s in [catalog::imex_mri_gark3a(), catalog::imex_mri_gark3b()] {
            let ind = induced_ark(&s);
            let sd = catalog::ark343_solve_decoupled(&s);
            let eta = catalog::ARK343_ETA;
            for k in [2usize, 4, 6] {
                assert!((ind.implicit().a()[(k, k)] - eta).abs() < 1e-15);
            }
            let di = (ind.implicit().a() - sd.implicit().a()).amax();
            let de = (ind.explicit().a() - sd.explicit().a()).amax();
            assert!(di < 1e-14, "{} implicit {di}", s.name());
            assert!(de < 1e-14, "{} explicit {de}", s.name());
            // free entries are only constrained by row sums
            assert!(validate_butcher(sd.implicit()).is_empty());
            assert!(validate_butcher(sd.explicit()).is_empty());
        }
    }

    #[test]
    fn induced_ark_zero_scheme() {
        let ind = induced_ark(&MriCouplingScheme::zero(3, 0));
        assert!(ind.implicit().a().iter().all(|v| *v == 0.0));
        assert!(ind.explicit().a().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn induced_ark_of_erk33a_gives_base_weights() {
        let s = catalog::mri_gark_erk33a();
        let ind = induced_ark(&s);
        let b = ind.implicit().b();
        // Γ̄ = Γ^0 + Γ^1/2, row 4 = [1/4, −2/3, 3/4, 0]
        let (g, _) = averaged_couplings(&s);
        let row4 = [0.25, -2.0 / 3.0, 0.75, 0.0];
        for j in 0..4 {
            assert!((g[(3, j)] - row4[j]).abs() < 1e-15);
        }
        assert!((b.sum() - 1.0).abs() < 1e-15);
        // the base method is Heun's third-order method b = [1/4, 0, 3/4]
        assert!((b[0] - 0.25).abs() < 1e-15);
        assert!(b[1].abs() < 1e-15);
        assert!((b[2] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn coupling_polynomials() {
        let s = catalog::imex_mri_gark4();
        let (g0, o0) = evaluate_coupling_polynomials(&s, 4, 0.0).unwrap();
        for j in 0..12 {
            assert_eq!(g0[j], s.gamma()[0][(3, j)]);
            assert_eq!(o0[j], s.omega()[0][(3, j)]);
        }
        let (g1, _) = evaluate_coupling_polynomials(&s, 4, 1.0).unwrap();
        for j in 0..12 {
            assert_eq!(g1[j], s.gamma()[0][(3, j)] + s.gamma()[1][(3, j)]);
        }
        let (gh, _) = evaluate_coupling_polynomials(&s, 4, 0.5).unwrap();
        assert!((gh[0] - 0.375).abs() < 1e-14);
        assert!(gh[4..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn coupling_polynomials_reject_bad_arguments() {
        let s = catalog::imex_mri_gark4();
        assert!(matches!(
            evaluate_coupling_polynomials(&s, 4, 1.5),
            Err(Error::TauOutOfRange(_))
        ));
        assert!(matches!(
            evaluate_coupling_polynomials(&s, 1, 0.5),
            Err(Error::StageOutOfRange { .. })
        ));
    }

    #[test]
    fn stage_classification() {
        let s = catalog::imex_mri_gark3a();
        use StageClass::*;
        assert_eq!(
            stage_classes(&s),
            vec![ExplicitAlgebraic, ErkLike, Implicit, ErkLike, Implicit, ErkLike, Implicit, ExplicitAlgebraic]
        );
        assert_eq!(classify_stage(0.1, 0.2), SolveCoupled);
        assert_eq!(classify_stage(0.0, 1e-15), ExplicitAlgebraic);
    }

    #[test]
    fn scheme_rejects_diagonal_omega() {
        let mut om = DMatrix::zeros(2, 2);
        om[(1, 1)] = 1.0;
        let err = MriCouplingScheme::new(
            "bad",
            DVector::from_vec(vec![0.0, 1.0]),
            vec![DMatrix::zeros(2, 2)],
            Some(vec![om]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidScheme(_)));
    }

    #[test]
    fn json_round_trip_and_fractions() {
        let text = r#"{
            "name": "tiny", "c": ["0", "1/2", "1"], "k_max": 0,
            "gamma": [[["0","0","0"],["1/2","0","0"],["-1/2","1","0"]]],
            "omega": [[[0,0,0],[0.5,0,0],["-0.5","1","0"]]]
        }"#;
        let s = scheme_from_json(text).unwrap();
        assert_eq!(s.c().as_slice(), &[0.0, 0.5, 1.0]);
        assert_eq!(s.gamma()[0][(2, 0)], -0.5);
        let back = scheme_from_json(&scheme_to_json(&s).unwrap()).unwrap();
        assert_eq!(back, s);

        let s4 = catalog::imex_mri_gark4();
        assert_eq!(scheme_from_json(&scheme_to_json(&s4).unwrap()).unwrap(), s4);
    }

    #[test]
    fn json_rejects_wrong_k_max() {
        let text = r#"{"name":"x","c":["0","1"],"k_max":1,"gamma":[[["0","0"],["1","0"]]]}"#;
        assert!(scheme_from_json(text).is_err());
    }
}
