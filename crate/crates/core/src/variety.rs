//! Fermat-type hypersurfaces and triangular complete intersections in
//! weighted projective space.

use crate::coeff::{kernel, rank, Coef, GaussQ};
use crate::euler::{self, echelon, Eqn, EulerError};
use crate::wps::{indices, mask_of, singular_strata, submasks, Stratum, WeightSystem};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VarietyError {
    #[error("tower has no equations")]
    NoEquations,
    #[error("{0} equations cut out nothing in a space of dimension {1}")]
    TooManyEquations(usize, usize),
    #[error("equation {equation}: variable z{var} out of range")]
    IndexOutOfRange { equation: usize, var: usize },
    #[error("equation {equation}: exponent {exponent} of z{var} must be at least 1")]
    BadExponent { equation: usize, var: usize, exponent: i64 },
    #[error("equation {equation}: z{var} appears in more than one term")]
    VariableReuse { equation: usize, var: usize },
    #[error("equation {equation}: term degrees {first} vs {other} differ")]
    MixedDegree { equation: usize, first: i64, other: i64 },
    #[error("equation {0} has no terms")]
    EmptyEquation(usize),
    #[error("equation {0} has a zero coefficient")]
    ZeroCoefficient(usize),
    #[error("projection step {step}: {reason}")]
    NotTriangular { step: usize, reason: String },
    #[error("z{0} appears in no equation, so the variety is singular along its axis")]
    VariableMissing(usize),
    #[error("variety is not transverse: {0}")]
    NotTransverse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Euler(#[from] Box<EulerError>),
}

impl From<EulerError> for VarietyError {
    fn from(e: EulerError) -> Self {
        VarietyError::Euler(Box::new(e))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub var: usize,
    pub exponent: i64,
    pub coef: Coef,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FermatEquation {
    pub terms: Vec<Term>,
}

impl FermatEquation {
    /// `z_0^{k_0} + ... + z_m^{k_m}` with unit coefficients.
    pub fn fermat(exponents: &[i64]) -> Self {
        let terms = exponents
            .iter()
            .enumerate()
            .map(|(var, &exponent)| Term { var, exponent, coef: Coef::one() })
            .collect();
        FermatEquation { terms }
    }

    pub fn mask(&self) -> u32 {
        self.terms.iter().fold(0, |m, t| m | (1 << t.var))
    }

    pub fn term(&self, var: usize) -> Option<&Term> {
        self.terms.iter().find(|t| t.var == var)
    }
}

impl fmt::Display for FermatEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| match &t.coef {
                Coef::Generic => format!("~z{}^{}", t.var, t.exponent),
                c if *c == Coef::one() => format!("z{}^{}", t.var, t.exponent),
                c => format!("{}*z{}^{}", c, t.var, t.exponent),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// One step of the projection plan. Equation indices refer to the tower's
/// equation list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanStep {
    /// Project away `var`, which must occur only in `equation`.
    Retire { equation: usize, var: usize },
    /// Replace `target` by the combination of `target` and `using` that
    /// cancels the `var` term.
    Combine { target: usize, using: usize, var: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FermatTower {
    pub ambient: WeightSystem,
    pub equations: Vec<FermatEquation>,
    pub plan: Vec<PlanStep>,
}

impl FermatTower {
    pub fn new(ambient: WeightSystem, equations: Vec<FermatEquation>, plan: Vec<PlanStep>) -> Self {
        FermatTower { ambient, equations, plan }
    }

    pub fn hypersurface(ambient: WeightSystem, exponents: &[i64]) -> Self {
        FermatTower { ambient, equations: vec![FermatEquation::fermat(exponents)], plan: vec![] }
    }

    pub fn variables(&self) -> u32 {
        self.equations.iter().fold(0, |m, e| m | e.mask())
    }

    pub fn has_generic_coefficients(&self) -> bool {
        self.equations.iter().flat_map(|e| &e.terms).any(|t| t.coef == Coef::Generic)
    }

    /// Complex dimension `m - #equations`.
    pub fn dimension(&self) -> i64 {
        self.ambient.dim() as i64 - self.equations.len() as i64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerReport {
    pub degrees: Vec<i64>,
    pub dimension: i64,
    pub plan_steps_checked: usize,
}

pub fn validate_tower(t: &FermatTower) -> Result<TowerReport, VarietyError> {
    let n = t.ambient.len();
    if t.equations.is_empty() {
        return Err(VarietyError::NoEquations);
    }
    if t.equations.len() > t.ambient.dim() {
        return Err(VarietyError::TooManyEquations(t.equations.len(), t.ambient.dim()));
    }
    let mut degrees = Vec::new();
    for (e, eq) in t.equations.iter().enumerate() {
        if eq.terms.is_empty() {
            return Err(VarietyError::EmptyEquation(e));
        }
        let mut seen = 0u32;
        let mut degree = None;
        for term in &eq.terms {
            if term.var >= n {
                return Err(VarietyError::IndexOutOfRange { equation: e, var: term.var });
            }
            if term.exponent < 1 {
                return Err(VarietyError::BadExponent {
                    equation: e,
                    var: term.var,
                    exponent: term.exponent,
                });
            }
            if seen & (1 << term.var) != 0 {
                return Err(VarietyError::VariableReuse { equation: e, var: term.var });
            }
            if term.coef.is_zero() {
                return Err(VarietyError::ZeroCoefficient(e));
            }
            seen |= 1 << term.var;
            let d = t.ambient.weight(term.var) * term.exponent;
            match degree {
                None => degree = Some(d),
                Some(first) if first != d => {
                    return Err(VarietyError::MixedDegree { equation: e, first, other: d })
                }
                _ => {}
            }
        }
        degrees.push(degree.unwrap_or(0));
    }
    check_plan(t, &degrees)?;
    Ok(TowerReport { degrees, dimension: t.dimension(), plan_steps_checked: t.plan.len() })
}

/// Walk the plan along the branch that keeps every equation, which is the
/// most constrained one.
fn check_plan(t: &FermatTower, degrees: &[i64]) -> Result<(), VarietyError> {
    let mut eqs: Vec<Option<Eqn>> = t
        .equations
        .iter()
        .zip(degrees)
        .map(|(e, &d)| Some(Eqn::from_equation(e, d)))
        .collect();
    let bad = |step: usize, reason: String| VarietyError::NotTriangular { step, reason };
    for (i, step) in t.plan.iter().enumerate() {
        match *step {
            PlanStep::Retire { equation, var } => {
                let Some(Some(eq)) = eqs.get(equation) else {
                    return Err(bad(i, format!("no equation {equation}")));
                };
                if eq.coef(var).is_none() {
                    return Err(bad(i, format!("z{var} does not occur in equation {equation}")));
                }
                for (j, other) in eqs.iter().enumerate() {
                    if let Some(o) = other {
                        if j != equation && o.coef(var).is_some() {
                            return Err(bad(i, format!("z{var} also occurs in equation {j}")));
                        }
                    }
                }
                for e in eqs.iter_mut().flatten() {
                    *e = e.without(var);
                }
            }
            PlanStep::Combine { target, using, var } => {
                let (Some(Some(a)), Some(Some(b))) = (eqs.get(target), eqs.get(using)) else {
                    return Err(bad(i, format!("no equations {target} and {using}")));
                };
                if target == using {
                    return Err(bad(i, "an equation cannot be combined with itself".into()));
                }
                let combined = euler::combine(a, b, var).map_err(|e| bad(i, e.to_string()))?;
                eqs[target] = Some(combined);
            }
        }
    }
    Ok(())
}

/// `c_1 = 0` exactly when the degrees add up to the weights.
pub fn chern_class_zero(t: &FermatTower) -> Result<bool, VarietyError> {
    let r = validate_tower(t)?;
    Ok(r.degrees.iter().sum::<i64>() == t.ambient.sum())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransversalityReport {
    pub transverse: bool,
    /// Set when the verdict rests on declared genericity.
    pub assumption: Option<String>,
}

/// Quasi-smoothness of the affine cone away from the origin.
///
/// For exact coefficients this is decided on every coordinate stratum: the
/// monomial values `u_j = z_j^{k_j}` of a point with support `J` lie in the
/// kernel of the coefficient matrix restricted to `J`, and the Jacobian there
/// has the rank of that restricted matrix (plus any linear terms).
pub fn transversality_check(t: &FermatTower) -> Result<TransversalityReport, VarietyError> {
    let report = validate_tower(t)?;
    let vars = t.variables();
    if let Some(j) = (0..t.ambient.len()).find(|j| vars & (1 << j) == 0) {
        return Err(VarietyError::VariableMissing(j));
    }
    if t.has_generic_coefficients() {
        return Ok(TransversalityReport {
            transverse: true,
            assumption: Some("generic coefficients are assumed to be transverse".into()),
        });
    }
    let r = t.equations.len();
    if r == 1 {
        return Ok(TransversalityReport { transverse: true, assumption: None });
    }
    let n = t.ambient.len();
    let coef = |e: &FermatEquation, j: usize| -> GaussQ {
        e.term(j).and_then(|tm| tm.coef.exact()).unwrap_or_default()
    };
    for s in submasks(t.ambient.full_mask()) {
        let cols: Vec<usize> = indices(s).collect();
        let m: Vec<Vec<GaussQ>> =
            t.equations.iter().map(|e| cols.iter().map(|&j| coef(e, j)).collect()).collect();
        let ker = kernel(&m, cols.len());
        let meets_torus = !ker.is_empty()
            && (0..cols.len()).all(|c| ker.iter().any(|v| v[c] != GaussQ::default()));
        if !meets_torus {
            continue;
        }
        // linear terms keep their derivative off the support too
        let jac_cols: Vec<usize> = (0..n)
            .filter(|&j| {
                s & (1 << j) != 0
                    || t.equations.iter().any(|e| e.term(j).is_some_and(|tm| tm.exponent == 1))
            })
            .collect();
        let jm: Vec<Vec<GaussQ>> =
            t.equations.iter().map(|e| jac_cols.iter().map(|&j| coef(e, j)).collect()).collect();
        if rank(&jm, jac_cols.len()) < r {
            let sup: Vec<String> = cols.iter().map(|j| j.to_string()).collect();
            return Ok(TransversalityReport {
                transverse: false,
                assumption: Some(format!(
                    "Jacobian drops rank on the stratum {{{}}} (degrees {:?})",
                    sup.join(","),
                    report.degrees
                )),
            });
        }
    }
    Ok(TransversalityReport { transverse: true, assumption: None })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SingularClass {
    Z4Scalar,
    Z2Neg,
    NonIsolated,
    Other,
}

impl fmt::Display for SingularClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SingularClass::Z4Scalar => "Z4_SCALAR",
            SingularClass::Z2Neg => "Z2_NEG",
            SingularClass::NonIsolated => "NONISOLATED",
            SingularClass::Other => "OTHER",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointCount {
    Finite(i64),
    NotFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularityRecord {
    pub stratum: Stratum,
    pub intersection_dimension: i64,
    pub point_count: PointCount,
    /// `a_i mod k` for the coordinates off the support, in index order.
    pub transverse_residues: Vec<i64>,
    pub class: SingularClass,
    /// The variety also meets a smaller coordinate stratum inside this one
    /// whose orbifold group is strictly larger.
    pub meets_deeper_stratum: bool,
    /// The variety restricted to the support, reindexed, for positive
    /// dimensional loci.
    pub restricted: Option<FermatTower>,
}

pub fn classify(k: i64, intersection_dimension: i64, residues: &[i64]) -> SingularClass {
    if intersection_dimension >= 1 {
        SingularClass::NonIsolated
    } else if k == 4
        && intersection_dimension == 0
        && (residues.iter().all(|&r| r == 1) || residues.iter().all(|&r| r == 3))
    {
        SingularClass::Z4Scalar
    } else if k == 2 && intersection_dimension == 0 {
        SingularClass::Z2Neg
    } else {
        SingularClass::Other
    }
}

/// Complex dimension of the variety inside the closed stratum `CP(mask)`,
/// or `None` when they do not meet.
pub fn intersection_dimension(t: &FermatTower, mask: u32) -> Result<Option<i64>, VarietyError> {
    let report = validate_tower(t)?;
    let eqs = euler::eqns_with_degrees(t, &report.degrees);
    let (m, reduced) = echelon(&t.ambient, mask, eqs)?;
    if m == 0 {
        return Ok(None);
    }
    let dim = m.count_ones() as i64 - 1 - reduced.len() as i64;
    Ok(if dim < 0 { None } else { Some(dim) })
}

/// Singular strata of the ambient space that the variety meets, one record
/// per maximal stratum.
pub fn singular_locus(t: &FermatTower) -> Result<Vec<SingularityRecord>, VarietyError> {
    let tr = transversality_check(t)?;
    if !tr.transverse {
        return Err(VarietyError::NotTransverse(tr.assumption.unwrap_or_default()));
    }
    let w = &t.ambient;
    let mut out = Vec::new();
    for stratum in singular_strata(w) {
        let mask = stratum.mask();
        let Some(dim) = intersection_dimension(t, mask)? else {
            continue;
        };
        let k = stratum.stabilizer_order;
        let residues: Vec<i64> = (0..w.len())
            .filter(|j| mask & (1 << j) == 0)
            .map(|j| w.weight(j).rem_euclid(k))
            .collect();
        let point_count = if dim == 0 {
            PointCount::Finite(euler::chi_on_closed_stratum(t, &stratum.support)?)
        } else {
            PointCount::NotFinite
        };
        let mut deeper = false;
        for sub in submasks(mask).filter(|&s| s != mask && w.hcf_of(s) > k) {
            if intersection_dimension(t, sub)?.is_some() {
                deeper = true;
            }
        }
        let restricted = if dim >= 1 { Some(restrict_tower(t, &stratum.support)?) } else { None };
        out.push(SingularityRecord {
            class: classify(k, dim, &residues),
            stratum,
            intersection_dimension: dim,
            point_count,
            transverse_residues: residues,
            meets_deeper_stratum: deeper,
            restricted,
        });
    }
    Ok(out)
}

/// The tower cut down to the coordinates in `support`, renumbered from 0.
/// Equations that vanish identically there are dropped.
pub fn restrict_tower(t: &FermatTower, support: &[usize]) -> Result<FermatTower, VarietyError> {
    let mask = mask_of(support);
    let order: Vec<usize> = indices(mask).collect();
    let weights: Vec<i64> = order.iter().map(|&j| t.ambient.weight(j)).collect();
    let ambient = WeightSystem::new(weights)
        .map_err(|e| VarietyError::Unsupported(format!("restricted ambient: {e}")))?;
    let equations: Vec<FermatEquation> = t
        .equations
        .iter()
        .map(|e| FermatEquation {
            terms: e
                .terms
                .iter()
                .filter(|tm| mask & (1 << tm.var) != 0)
                .map(|tm| Term {
                    var: order.iter().position(|&j| j == tm.var).unwrap(),
                    exponent: tm.exponent,
                    coef: tm.coef.clone(),
                })
                .collect(),
        })
        .filter(|e| !e.terms.is_empty())
        .collect();
    Ok(FermatTower { ambient, equations, plan: vec![] })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassicalKind {
    Points,
    Curve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassicalInvariants {
    pub genus: Option<i64>,
    pub point_count: Option<i64>,
}

/// Genus or point count of a smooth complete intersection in ordinary `CP^n`,
/// from adjunction and Bezout.
pub fn classical_curve_invariants(
    kind: ClassicalKind,
    degrees: &[i64],
    ambient_dim: usize,
) -> Result<ClassicalInvariants, VarietyError> {
    let prod: i64 = degrees.iter().product();
    let sum: i64 = degrees.iter().sum();
    if degrees.iter().any(|&d| d < 1) {
        return Err(VarietyError::Unsupported("degrees must be positive".into()));
    }
    match kind {
        ClassicalKind::Points if degrees.len() == ambient_dim => {
            Ok(ClassicalInvariants { genus: None, point_count: Some(prod) })
        }
        ClassicalKind::Curve if degrees.len() + 1 == ambient_dim => {
            let two_g_minus_two = prod * (sum - ambient_dim as i64 - 1);
            Ok(ClassicalInvariants { genus: Some(two_g_minus_two / 2 + 1), point_count: None })
        }
        _ => Err(VarietyError::Unsupported(format!(
            "{} equations in CP^{} do not cut out a {}",
            degrees.len(),
            ambient_dim,
            if kind == ClassicalKind::Curve { "curve" } else { "finite set" }
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::gauss_int;

    fn ws(v: &[i64]) -> WeightSystem {
        WeightSystem::normalized(v.to_vec()).unwrap()
    }

    #[test]
    fn inhomogeneous_terms_rejected() {
        let t = FermatTower::hypersurface(ws(&[1, 1, 1, 1, 4, 4]), &[12, 12, 12, 12, 3, 4]);
        assert_eq!(
            validate_tower(&t),
            Err(VarietyError::MixedDegree { equation: 0, first: 12, other: 16 })
        );
    }

    #[test]
    fn degree_thirteen_is_not_calabi_yau() {
        // no Fermat term of degree 13 exists for the weight-4 variables
        let t = FermatTower::new(
            ws(&[1, 1, 1, 1, 4, 4]),
            vec![FermatEquation::fermat(&[13, 13, 13, 13])],
            vec![],
        );
        assert!(!chern_class_zero(&t).unwrap());
    }

    #[test]
    fn missing_variable_is_flagged() {
        let mut eq = FermatEquation::fermat(&[12, 12, 12, 12, 3]);
        eq.terms.truncate(5);
        let t = FermatTower::new(ws(&[1, 1, 1, 1, 4, 4]), vec![eq], vec![]);
        assert_eq!(transversality_check(&t), Err(VarietyError::VariableMissing(5)));
    }

    #[test]
    fn proportional_rows_are_not_transverse() {
        let w = ws(&[1, 1, 1, 1]);
        let e1 = FermatEquation::fermat(&[2, 2, 2, 2]);
        let mut e2 = FermatEquation::fermat(&[2, 2, 2, 2]);
        e2.terms[3].coef = Coef::Exact(gauss_int(2, 0));
        let t = FermatTower::new(w, vec![e1, e2], vec![]);
        assert!(!transversality_check(&t).unwrap().transverse);
    }

    #[test]
    fn classical_counts() {
        let pts = classical_curve_invariants(ClassicalKind::Points, &[3, 3], 2).unwrap();
        assert_eq!(pts.point_count, Some(9));
        let c = classical_curve_invariants(ClassicalKind::Curve, &[4, 4], 3).unwrap();
        assert_eq!(c.genus, Some(33));
        let e = classical_curve_invariants(ClassicalKind::Curve, &[2, 2], 3).unwrap();
        assert_eq!(e.genus, Some(1));
        assert!(classical_curve_invariants(ClassicalKind::Curve, &[2], 3).is_err());
    }

    #[test]
    fn classification_rules() {
        assert_eq!(classify(4, 0, &[1, 1, 1, 1]), SingularClass::Z4Scalar);
        assert_eq!(classify(4, 0, &[3, 3, 3, 3]), SingularClass::Z4Scalar);
        assert_eq!(classify(4, 0, &[1, 3, 1, 1]), SingularClass::Other);
        assert_eq!(classify(2, 0, &[1, 1, 1, 1]), SingularClass::Z2Neg);
        assert_eq!(classify(5, 1, &[1, 1, 3]), SingularClass::NonIsolated);
    }
}
