//! Betti-number bookkeeping through the construction: seed a Calabi-Yau
//! orbifold, take quotients, blow up, divide by the antiholomorphic
//! involution and glue in ALE pieces.
//!
//! All spaces are closed of real dimension 8, so only `b0..b4` are stored
//! and `b5..b8` follow by duality.

use crate::involution::SingularEntry;
use crate::variety::SingularClass;
use crate::wps::{aut_dimension, count_monomials, WeightSystem};
use num::ToPrimitive;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("codimension {0} is not supported (use 1 or 2)")]
    Codimension(usize),
    #[error("ambient of dimension {ambient} cut by {codim} equations is not a 4-fold")]
    NotFourfold { ambient: usize, codim: usize },
    #[error("{what} = {value} is odd, cannot halve")]
    Parity { what: &'static str, value: i64 },
    #[error("expected a {expected} state, found {found}")]
    WrongStage { expected: Stage, found: Stage },
    #[error("point {0} has no crepant point resolution ({1})")]
    NotCrepant(String, SingularClass),
    #[error("no singular point labelled {0}")]
    UnknownPoint(String),
    #[error("point {0} is already resolved")]
    AlreadyResolved(String),
    #[error("class index {0} out of range")]
    BadClass(usize),
    #[error("locus Betti numbers must have odd length 1, 3 or 5, got {0}")]
    BadLocus(usize),
    #[error("negative Betti number b{0} = {1}")]
    Negative(usize, i64),
    #[error("b1 = {0}: odd-degree invariants of the quotient are not tracked")]
    NonzeroB1(i64),
    #[error("{given} ALE choices for {points} orbifold points")]
    ChoiceCount { given: usize, points: usize },
    #[error("ALE choice {0} is not 1 or 2")]
    BadChoice(u8),
    #[error("b4_plus = {numerator}/3 is not integral")]
    NonIntegralSplit { numerator: i64 },
    #[error("unsupported pipeline for the h31 estimate: {0}")]
    Unsupported(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Calabi-Yau orbifold, before dividing by the involution.
    Y,
    /// Quotient by the antiholomorphic involution.
    Z,
    /// Resolved 8-manifold.
    M,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Y => "Y",
            Stage::Z => "Z",
            Stage::M => "M",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BettiVector {
    pub b: [i64; 5],
    /// Tracked separately from `b` so the two bookkeepings can be compared.
    pub chi: i64,
    /// `(b4_plus, b4_minus)` when known.
    pub split: Option<(i64, i64)>,
}

impl BettiVector {
    pub fn from_betti(b: [i64; 5]) -> Self {
        BettiVector { b, chi: euler_from_betti(&b), split: None }
    }

    pub fn chi_from_betti(&self) -> i64 {
        euler_from_betti(&self.b)
    }

    pub fn consistent(&self) -> bool {
        self.chi == self.chi_from_betti()
            && self.b.iter().all(|&x| x >= 0)
            && self.split.is_none_or(|(p, m)| p + m == self.b[4] && p >= 0 && m >= 0)
    }

    pub fn triple(&self) -> (i64, i64, i64) {
        (self.b[2], self.b[3], self.b[4])
    }
}

pub fn euler_from_betti(b: &[i64; 5]) -> i64 {
    2 * b[0] - 2 * b[1] + 2 * b[2] - 2 * b[3] + b[4]
}

/// `b4` of a closed 8-dimensional space with `b0 = 1`, from its Euler
/// characteristic and lower Betti numbers.
pub fn b4_from_chi(chi: i64, b1: i64, b2: i64, b3: i64) -> i64 {
    chi - 2 + 2 * b1 - 2 * b2 + 2 * b3
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassKind {
    Kahler,
    ExcPoint(usize),
    ExcLocus(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassAction {
    Minus,
    Plus,
    /// Index of the partner entry.
    Swapped(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassEntry {
    pub kind: ClassKind,
    pub action: ClassAction,
}

impl fmt::Display for ClassEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ClassKind::Kahler => write!(f, "KAHLER")?,
            ClassKind::ExcPoint(i) => write!(f, "EXC_POINT({i})")?,
            ClassKind::ExcLocus(i) => write!(f, "EXC_LOCUS({i})")?,
        }
        match self.action {
            ClassAction::Minus => write!(f, ":MINUS"),
            ClassAction::Plus => write!(f, ":PLUS"),
            ClassAction::Swapped(p) => write!(f, ":SWAPPED({p})"),
        }
    }
}

/// Tagged basis of `H^2` with the action of the involution on it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassLedger {
    entries: Vec<ClassEntry>,
}

impl ClassLedger {
    pub fn entries(&self) -> &[ClassEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, kind: ClassKind, action: ClassAction) -> usize {
        self.entries.push(ClassEntry { kind, action });
        self.entries.len() - 1
    }

    pub fn push_swapped_pair(&mut self, a: ClassKind, b: ClassKind) {
        let i = self.entries.len();
        self.entries.push(ClassEntry { kind: a, action: ClassAction::Swapped(i + 1) });
        self.entries.push(ClassEntry { kind: b, action: ClassAction::Swapped(i) });
    }

    pub fn set_action(&mut self, index: usize, action: ClassAction) -> Result<(), LedgerError> {
        let e = self.entries.get_mut(index).ok_or(LedgerError::BadClass(index))?;
        e.action = action;
        Ok(())
    }

    /// Dimension of the invariant subspace: one per swapped pair and one per
    /// `Plus` entry.
    pub fn invariant_count(&self) -> usize {
        self.entries
            .iter()
            .enumerate()
            .filter(|(i, e)| match e.action {
                ClassAction::Minus => false,
                ClassAction::Plus => true,
                ClassAction::Swapped(p) => *i < p,
            })
            .count()
    }

    /// Swapped entries pair off symmetrically with distinct partners.
    pub fn well_formed(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, e)| match e.action {
            ClassAction::Swapped(p) => {
                p != i && matches!(self.entries.get(p), Some(ClassEntry { action: ClassAction::Swapped(q), .. }) if *q == i)
            }
            _ => true,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pi1 {
    Trivial,
    Z2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Holonomy {
    Spin7,
    /// `Z2` acting on `SU(4)`.
    Z2SU4,
}

impl fmt::Display for Holonomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Holonomy::Spin7 => "Spin(7)",
            Holonomy::Z2SU4 => "Z2 x| SU(4)",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceState {
    pub betti: BettiVector,
    pub classes: ClassLedger,
    pub singular: Vec<SingularEntry>,
    pub stage: Stage,
    /// Set once the Y-stage has been altered by a quotient or blow-up.
    pub modified: bool,
    /// Orbifold points left on a Z-stage space.
    pub orbifold_points: usize,
    pub pi1: Option<Pi1>,
    pub holonomy: Option<Holonomy>,
    next_point: usize,
    next_locus: usize,
}

impl SpaceState {
    pub fn b(&self, k: usize) -> i64 {
        self.betti.b[k]
    }

    pub fn chi(&self) -> i64 {
        self.betti.chi
    }

    /// Dimension of the moduli space of holonomy metrics on an M-stage space.
    pub fn moduli_dimension(&self) -> Option<i64> {
        self.betti.split.map(|(_, m)| 1 + m)
    }

    pub fn with_singular(mut self, inventory: Vec<SingularEntry>) -> Self {
        self.singular = inventory;
        self
    }

    fn expect(&self, stage: Stage) -> Result<(), LedgerError> {
        if self.stage == stage {
            Ok(())
        } else {
            Err(LedgerError::WrongStage { expected: stage, found: self.stage })
        }
    }

    fn resolve(&mut self, label: &str) -> Result<(), LedgerError> {
        if self.singular.is_empty() {
            return Ok(());
        }
        let e = self
            .singular
            .iter_mut()
            .find(|e| e.label == label)
            .ok_or_else(|| LedgerError::UnknownPoint(label.to_string()))?;
        if e.resolved {
            return Err(LedgerError::AlreadyResolved(label.to_string()));
        }
        if e.class != SingularClass::Z4Scalar {
            return Err(LedgerError::NotCrepant(label.to_string(), e.class));
        }
        e.resolved = true;
        Ok(())
    }
}

/// Betti numbers of a Calabi-Yau 4-fold cut out of weighted projective space
/// by one or two equations: `b0 = b2 = 1`, `b1 = b3 = 0`, `b4` from `chi`.
pub fn lefschetz_seed(ambient: &WeightSystem, codimension: usize, chi: i64) -> Result<SpaceState, LedgerError> {
    if !(1..=2).contains(&codimension) {
        return Err(LedgerError::Codimension(codimension));
    }
    if ambient.dim() != 4 + codimension {
        return Err(LedgerError::NotFourfold { ambient: ambient.dim(), codim: codimension });
    }
    let b = [1, 0, 1, 0, b4_from_chi(chi, 0, 1, 0)];
    if b[4] < 0 {
        return Err(LedgerError::Negative(4, b[4]));
    }
    let mut classes = ClassLedger::default();
    classes.push(ClassKind::Kahler, ClassAction::Minus);
    Ok(SpaceState {
        betti: BettiVector { b, chi, split: None },
        classes,
        singular: Vec::new(),
        stage: Stage::Y,
        modified: false,
        orbifold_points: 0,
        pi1: None,
        holonomy: None,
        next_point: 0,
        next_locus: 0,
    })
}

/// What a holomorphic group action leaves invariant in low degrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HolomorphicAction {
    /// Indices into the class ledger of the invariant `H^2` classes.
    pub invariant_classes: Vec<usize>,
    pub b1: i64,
    pub b3: i64,
}

impl HolomorphicAction {
    /// Only the Kahler class survives, and there is no odd cohomology.
    pub fn kahler_only() -> Self {
        HolomorphicAction { invariant_classes: vec![0], b1: 0, b3: 0 }
    }

    pub fn identity(s: &SpaceState) -> Self {
        HolomorphicAction { invariant_classes: (0..s.classes.len()).collect(), b1: s.b(1), b3: s.b(3) }
    }
}

/// Quotient by a holomorphic involution whose fixed locus has Euler
/// characteristic `fix_chi`.
pub fn quotient_holomorphic(s: &SpaceState, fix_chi: i64, action: &HolomorphicAction) -> Result<SpaceState, LedgerError> {
    s.expect(Stage::Y)?;
    let total = s.chi() + fix_chi;
    if total % 2 != 0 {
        return Err(LedgerError::Parity { what: "chi + chi(fixed locus)", value: total });
    }
    let chi = total / 2;
    let mut classes = ClassLedger::default();
    for &i in &action.invariant_classes {
        let e = s.classes.entries.get(i).ok_or(LedgerError::BadClass(i))?;
        // a partner that is not kept cannot stay swapped
        let act = match e.action {
            ClassAction::Swapped(_) => ClassAction::Minus,
            a => a,
        };
        classes.push(e.kind, act);
    }
    let b2 = classes.len() as i64;
    let b4 = b4_from_chi(chi, action.b1, b2, action.b3);
    if b4 < 0 {
        return Err(LedgerError::Negative(4, b4));
    }
    let mut out = s.clone();
    out.betti = BettiVector { b: [1, action.b1, b2, action.b3, b4], chi, split: None };
    out.classes = classes;
    out.modified |= fix_chi != s.chi();
    Ok(out)
}

/// Orbit of the involution on blown-up points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointOrbit {
    Fixed(String),
    Swapped(String, String),
}

impl PointOrbit {
    pub fn size(&self) -> usize {
        match self {
            PointOrbit::Fixed(_) => 1,
            PointOrbit::Swapped(..) => 2,
        }
    }
}

/// Blow up isolated `C^4/Z4` points; each contributes a `CP^3` with one new
/// class in `H^2` and `H^4`.
pub fn blowup_points(s: &SpaceState, orbits: &[PointOrbit]) -> Result<SpaceState, LedgerError> {
    s.expect(Stage::Y)?;
    let mut out = s.clone();
    for o in orbits {
        match o {
            PointOrbit::Fixed(a) => {
                out.resolve(a)?;
                out.classes.push(ClassKind::ExcPoint(out.next_point), ClassAction::Minus);
                out.next_point += 1;
            }
            PointOrbit::Swapped(a, b) => {
                out.resolve(a)?;
                out.resolve(b)?;
                out.classes.push_swapped_pair(ClassKind::ExcPoint(out.next_point), ClassKind::ExcPoint(out.next_point + 1));
                out.next_point += 2;
            }
        }
    }
    let count: i64 = orbits.iter().map(|o| o.size() as i64).sum();
    out.betti.b[2] += count;
    out.betti.b[4] += count;
    out.betti.chi += 3 * count;
    out.modified |= count > 0;
    Ok(out)
}

/// Betti numbers and Euler characteristic of the fibre of a crepant
/// resolution of a transverse quotient singularity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiberData {
    pub b2: i64,
    pub b4: i64,
    pub chi: i64,
}

/// Resolution of `C^3/Z5` with weights `(1,1,3)`.
pub const FIBER_C3_Z5: FiberData = FiberData { b2: 2, b4: 2, chi: 5 };
/// Resolution of `C^3/Z3` acting by scalars.
pub const FIBER_C3_Z3: FiberData = FiberData { b2: 1, b4: 1, chi: 3 };
/// Resolution of `C^2/{1,-1}`.
pub const FIBER_C2_Z2: FiberData = FiberData { b2: 1, b4: 0, chi: 2 };

/// Blow up a smooth singular locus with Betti numbers `locus` (length 1, 3
/// or 5) along a transverse singularity resolved with fibre `fiber`.
pub fn blowup_locus(s: &SpaceState, locus: &[i64], fiber: FiberData) -> Result<SpaceState, LedgerError> {
    s.expect(Stage::Y)?;
    if locus.len().is_multiple_of(2) || locus.len() > 5 {
        return Err(LedgerError::BadLocus(locus.len()));
    }
    let lb = |k: i64| -> i64 {
        if k < 0 {
            0
        } else {
            locus.get(k as usize).copied().unwrap_or(0)
        }
    };
    let mut out = s.clone();
    for k in 0..5 {
        out.betti.b[k] += fiber.b2 * lb(k as i64 - 2) + fiber.b4 * lb(k as i64 - 4);
    }
    let locus_chi: i64 = locus.iter().enumerate().map(|(k, &b)| if k % 2 == 0 { b } else { -b }).sum();
    out.betti.chi += locus_chi * (fiber.chi - 1);
    for _ in 0..fiber.b2 * lb(0) {
        out.classes.push(ClassKind::ExcLocus(out.next_locus), ClassAction::Minus);
    }
    out.next_locus += 1;
    out.modified = true;
    Ok(out)
}

/// Quotient by an antiholomorphic involution with `k_fixed` isolated fixed
/// points.
pub fn quotient_antiholomorphic(s: &SpaceState, k_fixed: usize) -> Result<SpaceState, LedgerError> {
    s.expect(Stage::Y)?;
    if s.b(1) != 0 {
        return Err(LedgerError::NonzeroB1(s.b(1)));
    }
    if s.b(3) % 2 != 0 {
        return Err(LedgerError::Parity { what: "b3", value: s.b(3) });
    }
    let total = s.chi() + k_fixed as i64;
    if total % 2 != 0 {
        return Err(LedgerError::Parity { what: "chi + k", value: total });
    }
    let chi = total / 2;
    let b2 = s.classes.invariant_count() as i64;
    let b3 = s.b(3) / 2;
    let b4 = b4_from_chi(chi, 0, b2, b3);
    if b4 < 0 {
        return Err(LedgerError::Negative(4, b4));
    }
    let mut classes = ClassLedger::default();
    for (i, e) in s.classes.entries.iter().enumerate() {
        match e.action {
            ClassAction::Plus => {
                classes.push(e.kind, ClassAction::Plus);
            }
            ClassAction::Swapped(p) if i < p => {
                classes.push(e.kind, ClassAction::Plus);
            }
            _ => {}
        }
    }
    let mut out = s.clone();
    out.betti = BettiVector { b: [1, 0, b2, b3, b4], chi, split: None };
    out.classes = classes;
    out.stage = Stage::Z;
    out.orbifold_points = k_fixed;
    Ok(out)
}

/// `b4_plus` forced by the index identity, given the other Betti numbers.
pub fn b4_plus_from_index(b: &[i64; 5]) -> Result<i64, LedgerError> {
    let numerator = 25 - b[1] + b[2] - b[3] + 2 * b[4];
    if numerator % 3 != 0 {
        return Err(LedgerError::NonIntegralSplit { numerator });
    }
    Ok(numerator / 3)
}

/// Resolve each orbifold point with one of the two ALE pieces (`1` or `2`).
pub fn glue_ale(s: &SpaceState, n_choices: &[u8]) -> Result<SpaceState, LedgerError> {
    s.expect(Stage::Z)?;
    if n_choices.len() != s.orbifold_points {
        return Err(LedgerError::ChoiceCount { given: n_choices.len(), points: s.orbifold_points });
    }
    if let Some(&c) = n_choices.iter().find(|&&c| c != 1 && c != 2) {
        return Err(LedgerError::BadChoice(c));
    }
    let mut out = s.clone();
    let k = n_choices.len() as i64;
    out.betti.b[4] += k;
    out.betti.chi += k;
    let plus = b4_plus_from_index(&out.betti.b)?;
    let minus = out.betti.b[4] - plus;
    if plus < 0 || minus < 0 {
        return Err(LedgerError::Negative(4, plus.min(minus)));
    }
    out.betti.split = Some((plus, minus));
    let pi1 = if n_choices.iter().all(|&c| c == 1) { Pi1::Z2 } else { Pi1::Trivial };
    out.pi1 = Some(pi1);
    out.holonomy = Some(match pi1 {
        Pi1::Trivial => Holonomy::Spin7,
        Pi1::Z2 => Holonomy::Z2SU4,
    });
    out.stage = Stage::M;
    out.orbifold_points = 0;
    for e in &mut out.singular {
        e.resolved = true;
    }
    Ok(out)
}

/// `24 = -1 + b1 - b2 + b3 + b4_plus - 2 b4_minus`. False when the split is
/// unknown.
pub fn ahat_check(m: &SpaceState) -> bool {
    let b = &m.betti.b;
    match m.betti.split {
        Some((p, n)) => -1 + b[1] - b[2] + b[3] + p - 2 * n == 24,
        None => false,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct H31Report {
    pub monomials: i64,
    pub automorphisms: i64,
    pub h31: i64,
    pub predicted_b4_minus: i64,
    pub ledger_b4_minus: i64,
}

impl H31Report {
    pub fn matches(&self) -> bool {
        self.predicted_b4_minus == self.ledger_b4_minus
    }
}

impl fmt::Display for H31Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "h31 = {} - 1 - {} = {}; predicted b4_minus = {}, ledger {} [{}] (advisory)",
            self.monomials,
            self.automorphisms,
            self.h31,
            self.predicted_b4_minus,
            self.ledger_b4_minus,
            if self.matches() { "MATCH" } else { "MISMATCH" }
        )
    }
}

/// Estimate `b4_minus(M)` from polynomial deformations of a hypersurface.
/// Only meaningful when `y` is the unmodified Lefschetz seed.
pub fn h31_crosscheck(
    ambient: &WeightSystem,
    degree: i64,
    y: &SpaceState,
    z: &SpaceState,
    m: &SpaceState,
) -> Result<H31Report, LedgerError> {
    if ambient.len() != 6 {
        return Err(LedgerError::Unsupported(format!("{} weights, need a hypersurface in 5 dimensions", ambient.len())));
    }
    if y.stage != Stage::Y || y.modified {
        return Err(LedgerError::Unsupported("Y has been modified before the involution".into()));
    }
    z.expect(Stage::Z)?;
    m.expect(Stage::M)?;
    let (_, ledger_b4_minus) = m.betti.split.ok_or(LedgerError::WrongStage { expected: Stage::M, found: m.stage })?;
    let too_big = || LedgerError::Unsupported("monomial count overflows i64".into());
    let monomials = count_monomials(ambient, degree).to_i64().ok_or_else(too_big)?;
    let automorphisms = aut_dimension(ambient).to_i64().ok_or_else(too_big)?;
    let h31 = monomials - 1 - automorphisms;
    let k = m.b(4) - z.b(4);
    let predicted = h31 + y.b(2) - z.b(2) - 1 + k;
    Ok(H31Report { monomials, automorphisms, h31, predicted_b4_minus: predicted, ledger_b4_minus })
}

/// Outcome of comparing a derived number with a printed one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PublishedCheck {
    Agrees,
    Flagged { printed: i64, derived: i64 },
}

pub fn compare_published(derived: i64, printed: i64) -> PublishedCheck {
    if derived == printed {
        PublishedCheck::Agrees
    } else {
        PublishedCheck::Flagged { printed, derived }
    }
}

impl fmt::Display for SpaceState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = &self.betti.b;
        write!(f, "{}: chi={} b=({},{},{},{},{})", self.stage, self.betti.chi, b[0], b[1], b[2], b[3], b[4])?;
        if let Some((p, m)) = self.betti.split {
            write!(f, " b4+={p} b4-={m}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariant_count_of_pairs() {
        let mut c = ClassLedger::default();
        c.push(ClassKind::Kahler, ClassAction::Minus);
        c.push_swapped_pair(ClassKind::ExcPoint(0), ClassKind::ExcPoint(1));
        c.push(ClassKind::ExcPoint(2), ClassAction::Plus);
        assert!(c.well_formed());
        assert_eq!(c.invariant_count(), 2);
        c.set_action(1, ClassAction::Minus).unwrap();
        assert!(!c.well_formed());
    }
}
