//! Antiholomorphic involutions of weighted projective spaces built from
//! coordinate blocks, their fixed points on Fermat towers, and the checks
//! that decide whether a pair (variety, involution) is fit for gluing.
//!
//! Points are stored exactly: on a support `S` where the tower cuts out
//! finitely many points, `z_j^{k_j}` is proportional to a fixed kernel
//! vector `v`, so a point is determined by the arguments of its coordinates
//! (rational turns) once the proportionality constant is scaled to 1. The
//! remaining gauge freedom is `lambda^d = 1`, and each point is stored as
//! the lexicographically least representative of its gauge orbit.

use crate::cayley::{self, CoordinatePairing, PhaseMatrix};
use crate::coeff::{gauss_arg, kernel, norm_sq, rank, turn, Coef, GaussQ, Q};
use crate::euler::{self, EulerError};
use crate::variety::{FermatTower, PointCount, SingularClass, SingularityRecord, VarietyError};
use crate::wps::{indices, mask_of, submasks, WeightSystem};
use num::{Integer, One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InvolutionError {
    #[error("bad block list: {0}")]
    BadBlocks(String),
    #[error("pair ({0}, {1}) joins coordinates of different weight")]
    WeightMismatch(usize, usize),
    #[error("sigma^2 multiplies coordinates by turns {0:?}, which no rescaling undoes")]
    NotInvolution(Vec<Q>),
    #[error("unsupported stratum {support:?}: {reason}")]
    UnsupportedStratum { support: Vec<usize>, reason: String },
    #[error("the involution does not preserve the variety")]
    NotPreserved,
    #[error("not a free Z4 action: it fixes a nonzero vector")]
    NotFree,
    #[error("unrecognized normal form: {0}")]
    UnrecognizedNormalForm(String),
    #[error(transparent)]
    Variety(#[from] VarietyError),
    #[error(transparent)]
    Euler(#[from] EulerError),
}

fn zero() -> Q {
    Q::zero()
}

// --------------------------------------------------------------------- specs

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Block {
    /// `z_j -> e(eps) conj(z_l)`, `z_l -> e(eps2) conj(z_j)`.
    Pair { j: usize, l: usize, eps: Q, eps2: Q },
    /// `z_j -> e(phi) conj(z_j)`.
    Conj { j: usize, phi: Q },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvolutionSpec {
    pub blocks: Vec<Block>,
}

impl InvolutionSpec {
    pub fn new(blocks: Vec<Block>) -> Self {
        InvolutionSpec { blocks }
    }

    /// `(source index, phase)` per coordinate: `sigma(z)_j = e(phase) conj(z_source)`.
    pub fn action(&self, n: usize) -> Result<Vec<(usize, Q)>, InvolutionError> {
        let mut out: Vec<Option<(usize, Q)>> = vec![None; n];
        let mut put = |j: usize, v: (usize, Q)| -> Result<(), InvolutionError> {
            match out.get_mut(j) {
                None => Err(InvolutionError::BadBlocks(format!("index {j} out of range"))),
                Some(Some(_)) => Err(InvolutionError::BadBlocks(format!("index {j} appears twice"))),
                Some(slot) => {
                    *slot = Some(v);
                    Ok(())
                }
            }
        };
        for b in &self.blocks {
            match *b {
                Block::Pair { j, l, eps, eps2 } => {
                    if j == l {
                        return Err(InvolutionError::BadBlocks(format!("pair ({j}, {j})")));
                    }
                    put(j, (l, turn(eps)))?;
                    put(l, (j, turn(eps2)))?;
                }
                Block::Conj { j, phi } => put(j, (j, turn(phi)))?,
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(j, v)| v.ok_or_else(|| InvolutionError::BadBlocks(format!("index {j} not covered"))))
            .collect()
    }

    /// `self` after the diagonal map `z_j -> e(psi_j) z_j`.
    pub fn after_diagonal(&self, psi: &[Q]) -> InvolutionSpec {
        let blocks = self
            .blocks
            .iter()
            .map(|b| match *b {
                Block::Pair { j, l, eps, eps2 } => {
                    Block::Pair { j, l, eps: turn(eps - psi[l]), eps2: turn(eps2 - psi[j]) }
                }
                Block::Conj { j, phi } => Block::Conj { j, phi: turn(phi - psi[j]) },
            })
            .collect();
        InvolutionSpec { blocks }
    }

    /// Indices forced to vanish at fixed points: both members of every pair
    /// whose two phases differ.
    pub fn forced_zero(&self) -> u32 {
        self.blocks.iter().fold(0, |m, b| match *b {
            Block::Pair { j, l, eps, eps2 } if turn(eps - eps2) != zero() => m | (1 << j) | (1 << l),
            _ => m,
        })
    }
}

fn fmt_turn(t: Q) -> String {
    if t.is_integer() {
        t.to_integer().to_string()
    } else {
        format!("{}/{}", t.numer(), t.denom())
    }
}

impl fmt::Display for InvolutionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| match *b {
                Block::Pair { j, l, eps, eps2 } => {
                    let (e1, e2) = (turn(eps), turn(eps2));
                    if e1.is_zero() && e2.is_zero() {
                        format!("pair({j},{l})")
                    } else if e1.is_zero() && e2 == Q::new(1, 2) {
                        format!("pair({j},{l}; -)")
                    } else {
                        format!("pair({j},{l}; {}, {})", fmt_turn(e1), fmt_turn(e2))
                    }
                }
                Block::Conj { j, phi } if turn(phi).is_zero() => format!("conj({j})"),
                Block::Conj { j, phi } => format!("conj({j}; {})", fmt_turn(turn(phi))),
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

pub fn parse_turn(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let (n, d) = (n.trim().parse::<i64>().ok()?, d.trim().parse::<i64>().ok()?);
            (d != 0).then(|| Q::new(n, d))
        }
        None => s.parse::<i64>().ok().map(Q::from_integer),
    }
}

/// Block grammar: `pair(j,l)`, `pair(j,l; -)` (second map negated),
/// `pair(j,l; a, b)` with turns, `conj(j)`, `conj(j; t)`.
impl FromStr for InvolutionSpec {
    type Err = InvolutionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| InvolutionError::BadBlocks(m.to_string());
        let mut blocks = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let open = rest.find('(').ok_or_else(|| bad(rest))?;
            let close = rest.find(')').ok_or_else(|| bad(rest))?;
            if close < open {
                return Err(bad(rest));
            }
            let name = rest[..open].trim();
            let inner = &rest[open + 1..close];
            rest = rest[close + 1..].trim_start();
            let (idx, phases) = match inner.split_once(';') {
                Some((a, b)) => (a, Some(b.trim())),
                None => (inner, None),
            };
            let idx: Vec<usize> = idx
                .split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| bad(inner)))
                .collect::<Result<_, _>>()?;
            match (name, idx.as_slice()) {
                ("pair", &[j, l]) => {
                    let (eps, eps2) = match phases {
                        None => (zero(), zero()),
                        Some("-") => (zero(), Q::new(1, 2)),
                        Some(p) => {
                            let v: Vec<&str> = p.split(',').collect();
                            if v.len() != 2 {
                                return Err(bad(inner));
                            }
                            (parse_turn(v[0]).ok_or_else(|| bad(inner))?, parse_turn(v[1]).ok_or_else(|| bad(inner))?)
                        }
                    };
                    blocks.push(Block::Pair { j, l, eps, eps2 });
                }
                ("conj", &[j]) => {
                    let phi = match phases {
                        None => zero(),
                        Some(p) => parse_turn(p).ok_or_else(|| bad(inner))?,
                    };
                    blocks.push(Block::Conj { j, phi });
                }
                _ => return Err(bad(name)),
            }
        }
        Ok(InvolutionSpec { blocks })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvolutionReport {
    /// `sigma^2` multiplies `z_j` by `e(square_phases[j])`.
    pub square_phases: Vec<Q>,
    /// A turn `t` with `a_j t = square_phases[j]` for all `j`.
    pub rescaling: Q,
}

pub fn validate_involution(s: &InvolutionSpec, w: &WeightSystem) -> Result<InvolutionReport, InvolutionError> {
    let act = s.action(w.len())?;
    for b in &s.blocks {
        if let Block::Pair { j, l, .. } = *b {
            if w.weight(j) != w.weight(l) {
                return Err(InvolutionError::WeightMismatch(j, l));
            }
        }
    }
    // sigma(sigma(z))_j = e(phi_j) conj(e(phi_p) conj(z_j)) with p = source(j)
    let psi: Vec<Q> = (0..w.len()).map(|j| turn(act[j].1 - act[act[j].0].1)).collect();
    match solve_rescaling(w.weights(), &psi) {
        Some(t) => Ok(InvolutionReport { square_phases: psi, rescaling: t }),
        None => Err(InvolutionError::NotInvolution(psi)),
    }
}

/// Candidate turns `tau` with `a_j tau = psi_j` for some `j`.
fn candidate_turns(weights: &[i64], psi: &[Q]) -> BTreeSet<Q> {
    let mut out = BTreeSet::new();
    for (j, &a) in weights.iter().enumerate() {
        for m in 0..a {
            out.insert(turn((psi[j] + Q::from_integer(m)) / Q::from_integer(a)));
        }
    }
    out
}

fn solve_rescaling(weights: &[i64], psi: &[Q]) -> Option<Q> {
    candidate_turns(weights, psi)
        .into_iter()
        .find(|&t| weights.iter().zip(psi).all(|(&a, &p)| turn(Q::from_integer(a) * t - p).is_zero()))
}

/// Does the involution carry the variety to itself? Each equation, pulled
/// back and conjugated, must lie in the span of the equations. Generic
/// coefficients are matched by marker against a single equation.
pub fn preserves_variety(s: &InvolutionSpec, t: &FermatTower) -> Result<bool, InvolutionError> {
    let act = s.action(t.ambient.len())?;
    let generic = t.has_generic_coefficients();
    let mut columns: BTreeMap<(usize, i64), usize> = BTreeMap::new();
    for e in &t.equations {
        for term in &e.terms {
            let n = columns.len();
            columns.entry((term.var, term.exponent)).or_insert(n);
        }
    }
    // image of c z_j^e: conj(c e(e phi_j)) z_{p(j)}^e, in the source variable
    let image = |e: &crate::variety::FermatEquation| -> Vec<(usize, i64, Coef)> {
        e.terms
            .iter()
            .map(|term| {
                let (src, phi) = act[term.var];
                let c = match &term.coef {
                    Coef::Generic => Coef::Generic,
                    Coef::Exact(g) => {
                        let rot = turn(phi * Q::from_integer(term.exponent));
                        Coef::Exact(exact_unit(rot).map(|u| (g * u).conj()).unwrap_or_default())
                    }
                };
                (src, term.exponent, c)
            })
            .collect()
    };
    for e in &t.equations {
        let img = image(e);
        if img.iter().any(|(_, _, c)| matches!(c, Coef::Exact(g) if g.is_zero())) {
            // TODO: phases outside Q(i) need cyclotomic coefficients; reported as not preserved
            return Ok(false);
        }
        if img.iter().any(|(v, x, _)| !columns.contains_key(&(*v, *x))) {
            return Ok(false);
        }
        if generic {
            let ok = t.equations.iter().any(|f| markers_match(&img, f));
            if !ok {
                return Ok(false);
            }
            continue;
        }
        let ncols = columns.len();
        let row_of = |terms: &[(usize, i64, Coef)]| -> Vec<GaussQ> {
            let mut r = vec![GaussQ::zero(); ncols];
            for (v, x, c) in terms {
                r[columns[&(*v, *x)]] = c.exact().expect("exact");
            }
            r
        };
        let mut mat: Vec<Vec<GaussQ>> = t
            .equations
            .iter()
            .map(|f| row_of(&f.terms.iter().map(|x| (x.var, x.exponent, x.coef.clone())).collect::<Vec<_>>()))
            .collect();
        let r0 = rank(&mat, ncols);
        mat.push(row_of(&img));
        if rank(&mat, ncols) != r0 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn markers_match(img: &[(usize, i64, Coef)], f: &crate::variety::FermatEquation) -> bool {
    if img.len() != f.terms.len() {
        return false;
    }
    let mut ratio: Option<GaussQ> = None;
    for (v, x, c) in img {
        let Some(term) = f.terms.iter().find(|t| t.var == *v && t.exponent == *x) else {
            return false;
        };
        match (c, &term.coef) {
            (Coef::Generic, Coef::Generic) => {}
            (Coef::Exact(a), Coef::Exact(b)) => {
                let r = a / b;
                if *ratio.get_or_insert(r) != r {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

/// `e(t)` as a Gaussian rational when `t` is a multiple of a quarter turn.
fn exact_unit(t: Q) -> Option<GaussQ> {
    crate::coeff::quarter_unit(t)
}

// -------------------------------------------------------------------- points

/// A point of the variety with nonzero coordinates exactly `support`.
/// `args[i]` is the argument of `z_{support[i]}` as a turn; the moduli are
/// fixed by the support and satisfy `|z_j|^{2 k_j} = norms[i]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjPoint {
    pub n: usize,
    pub support: Vec<usize>,
    pub args: Vec<Q>,
    pub norms: Vec<Q>,
}

impl ProjPoint {
    pub fn arg(&self, j: usize) -> Option<Q> {
        self.support.iter().position(|&s| s == j).map(|i| self.args[i])
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::with_capacity(self.n);
        for j in 0..self.n {
            match self.support.iter().position(|&s| s == j) {
                None => parts.push("0".to_string()),
                Some(i) => {
                    let a = self.args[i];
                    let modulus = if self.norms[i].is_one() { String::new() } else { format!("|{}|", self.norms[i]) };
                    let phase = if a.is_zero() {
                        "1".to_string()
                    } else if a == Q::new(1, 2) {
                        "-1".to_string()
                    } else if a == Q::new(1, 4) {
                        "i".to_string()
                    } else if a == Q::new(3, 4) {
                        "-i".to_string()
                    } else {
                        format!("e({})", fmt_turn(a))
                    };
                    parts.push(format!("{modulus}{phase}"));
                }
            }
        }
        write!(f, "[{}]", parts.join(","))
    }
}

/// Exact description of the finitely many points on one support.
#[derive(Clone, Debug)]
struct SupportData {
    support: Vec<usize>,
    weights: Vec<i64>,
    degree: i64,
    k: Vec<i64>,
    v_args: Vec<Q>,
    v_norms: Vec<Q>,
}

fn unsupported(support: &[usize], reason: &str) -> InvolutionError {
    InvolutionError::UnsupportedStratum { support: support.to_vec(), reason: reason.to_string() }
}

/// `Ok(None)` when no point of the variety has exactly this support.
fn support_data(t: &FermatTower, support: &[usize]) -> Result<Option<SupportData>, InvolutionError> {
    let w = &t.ambient;
    let mut rows: Vec<Vec<GaussQ>> = Vec::new();
    let mut degree: Option<i64> = None;
    let mut k = vec![0i64; support.len()];
    for e in &t.equations {
        let mut row = vec![GaussQ::zero(); support.len()];
        let mut any = false;
        for (i, &j) in support.iter().enumerate() {
            if let Some(term) = e.term(j) {
                let d = w.weight(j) * term.exponent;
                if *degree.get_or_insert(d) != d {
                    return Err(unsupported(support, "residual equations of different degree"));
                }
                if k[i] != 0 && k[i] != term.exponent {
                    return Err(unsupported(support, "variable with two exponents"));
                }
                k[i] = term.exponent;
                row[i] = term.coef.exact().ok_or_else(|| unsupported(support, "generic coefficient"))?;
                any = true;
            }
        }
        if any {
            rows.push(row);
        }
    }
    let weights: Vec<i64> = support.iter().map(|&j| w.weight(j)).collect();
    if rows.is_empty() {
        if support.len() == 1 {
            // a coordinate vertex lying on every equation
            return Ok(Some(SupportData {
                support: support.to_vec(),
                degree: weights[0],
                k: vec![1],
                v_args: vec![zero()],
                v_norms: vec![Q::one()],
                weights,
            }));
        }
        return Err(unsupported(support, "positive-dimensional fixed candidate"));
    }
    if rows.len() > 2 {
        return Err(unsupported(support, "more than two residual equations"));
    }
    let r = rank(&rows, support.len());
    if r == support.len() {
        return Ok(None);
    }
    if r + 1 < support.len() {
        return Err(unsupported(support, "positive-dimensional fixed candidate"));
    }
    let ker = kernel(&rows, support.len());
    let v = &ker[0];
    if v.iter().any(|c| c.is_zero()) || k.contains(&0) {
        return Ok(None);
    }
    let scale = v[0].inv();
    let v: Vec<GaussQ> = v.iter().map(|c| c * scale).collect();
    let v_args = v
        .iter()
        .map(|c| gauss_arg(c).ok_or_else(|| unsupported(support, "kernel entry with irrational argument")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(SupportData {
        support: support.to_vec(),
        weights,
        degree: degree.expect("nonempty rows"),
        k,
        v_norms: v.iter().map(norm_sq).collect(),
        v_args,
    }))
}

impl SupportData {
    /// Rescale arbitrary arguments of a point on this support so that
    /// `z^{k} = v`, then pick the least gauge representative.
    fn canonical(&self, args: &[Q], n: usize) -> ProjPoint {
        let d = Q::from_integer(self.degree);
        let c = turn(Q::from_integer(self.k[0]) * args[0] - self.v_args[0]);
        let shifted: Vec<Q> =
            args.iter().zip(&self.weights).map(|(&a, &wt)| turn(a - Q::from_integer(wt) * c / d)).collect();
        let best = (0..self.degree)
            .map(|m| {
                let t = Q::new(m, self.degree);
                shifted.iter().zip(&self.weights).map(|(&a, &wt)| turn(a + Q::from_integer(wt) * t)).collect::<Vec<_>>()
            })
            .min()
            .expect("degree positive");
        ProjPoint { n, support: self.support.clone(), args: best, norms: self.v_norms.clone() }
    }

    fn on_variety(&self, args: &[Q]) -> bool {
        args.iter()
            .zip(&self.k)
            .zip(&self.v_args)
            .all(|((&a, &k), &va)| turn(Q::from_integer(k) * a - va).is_zero())
    }

    fn points(&self, n: usize) -> Vec<ProjPoint> {
        let mut out = BTreeSet::new();
        let mut idx = vec![0i64; self.k.len()];
        loop {
            let args: Vec<Q> = idx
                .iter()
                .zip(&self.k)
                .zip(&self.v_args)
                .map(|((&m, &k), &va)| turn((va + Q::from_integer(m)) / Q::from_integer(k)))
                .collect();
            out.insert(self.canonical(&args, n));
            let mut i = 0;
            loop {
                if i == idx.len() {
                    return out.into_iter().collect();
                }
                idx[i] += 1;
                if idx[i] < self.k[i] {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }
}

/// All points of the variety whose nonzero coordinates are exactly `support`.
pub fn points_on_support(t: &FermatTower, support: &[usize]) -> Result<Vec<ProjPoint>, InvolutionError> {
    Ok(match support_data(t, support)? {
        Some(sd) => sd.points(t.ambient.len()),
        None => Vec::new(),
    })
}

/// Image of a point under a block map (not necessarily an involution),
/// brought to canonical form on the image support.
pub fn apply_to_point(s: &InvolutionSpec, t: &FermatTower, p: &ProjPoint) -> Result<ProjPoint, InvolutionError> {
    let act = s.action(t.ambient.len())?;
    let mut image: Vec<(usize, Q)> = Vec::new();
    for (j, &(src, phi)) in act.iter().enumerate() {
        if let Some(a) = p.arg(src) {
            image.push((j, turn(phi - a)));
        }
    }
    image.sort();
    let support: Vec<usize> = image.iter().map(|x| x.0).collect();
    let args: Vec<Q> = image.iter().map(|x| x.1).collect();
    let sd = support_data(t, &support)?.ok_or(InvolutionError::NotPreserved)?;
    let q = sd.canonical(&args, p.n);
    if !sd.on_variety(&q.args) {
        return Err(InvolutionError::NotPreserved);
    }
    Ok(q)
}

/// Image of a point under `z_j -> e(psi_j) z_j`.
pub fn apply_diagonal(psi: &[Q], t: &FermatTower, p: &ProjPoint) -> Result<ProjPoint, InvolutionError> {
    let args: Vec<Q> = p.support.iter().zip(&p.args).map(|(&j, &a)| turn(a + psi[j])).collect();
    let sd = support_data(t, &p.support)?.ok_or(InvolutionError::NotPreserved)?;
    let q = sd.canonical(&args, p.n);
    if !sd.on_variety(&q.args) {
        return Err(InvolutionError::NotPreserved);
    }
    Ok(q)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPointSet {
    pub points: Vec<ProjPoint>,
    /// Points on the searched supports exchanged by the involution.
    pub swapped: Vec<(ProjPoint, ProjPoint)>,
}

impl FixedPointSet {
    pub fn count(&self) -> usize {
        self.points.len()
    }
}

fn invariant_supports(s: &InvolutionSpec, n: usize) -> Result<Vec<Vec<usize>>, InvolutionError> {
    let act = s.action(n)?;
    let allowed = ((1u32 << n) - 1) & !s.forced_zero();
    let mut out = Vec::new();
    for m in submasks(allowed).filter(|&m| m != 0) {
        let image = indices(m).fold(0u32, |acc, j| acc | (1 << act[j].0));
        if image == m {
            out.push(indices(m).collect());
        }
    }
    Ok(out)
}

/// Fixed points of the block map on the variety.
pub fn fixed_points(s: &InvolutionSpec, t: &FermatTower) -> Result<FixedPointSet, InvolutionError> {
    fixed_points_modulo(s, t, None)
}

/// Fixed points on the quotient by a diagonal holomorphic map `beta`
/// (`z_j -> e(psi_j) z_j`): the beta-orbits that the involution preserves.
/// Each orbit is reported by its least point.
pub fn fixed_points_modulo(
    s: &InvolutionSpec,
    t: &FermatTower,
    beta: Option<&[Q]>,
) -> Result<FixedPointSet, InvolutionError> {
    let n = t.ambient.len();
    let psi: Vec<Q> = beta.map(|b| b.to_vec()).unwrap_or_else(|| vec![zero(); n]);
    let order = psi.iter().fold(1i64, |acc, p| acc.lcm(p.denom()));
    // sigma . beta^m has the same permutation as sigma; collect the supports
    // any of them could fix
    let mut supports = BTreeSet::new();
    for m in 0..order {
        let shift: Vec<Q> = psi.iter().map(|p| turn(*p * Q::from_integer(m))).collect();
        for sup in invariant_supports(&s.after_diagonal(&shift), n)? {
            supports.insert(sup);
        }
    }
    let orbit_rep = |p: &ProjPoint| -> Result<ProjPoint, InvolutionError> {
        let mut best = p.clone();
        let mut cur = p.clone();
        for _ in 1..order {
            cur = apply_diagonal(&psi, t, &cur)?;
            best = best.min(cur.clone());
        }
        Ok(best)
    };
    let mut fixed = BTreeSet::new();
    let mut swapped = BTreeSet::new();
    for sup in supports {
        for p in points_on_support(t, &sup)? {
            let a = orbit_rep(&p)?;
            let b = orbit_rep(&apply_to_point(s, t, &p)?)?;
            if a == b {
                fixed.insert(a);
            } else {
                swapped.insert(if a < b { (a, b) } else { (b, a) });
            }
        }
    }
    Ok(FixedPointSet { points: fixed.into_iter().collect(), swapped: swapped.into_iter().collect() })
}

// ----------------------------------------------------------- singular points

/// The isolated singular points of the variety, each with the class of its
/// stratum. Positive-dimensional strata are skipped.
pub fn singular_points(
    t: &FermatTower,
    locus: &[SingularityRecord],
) -> Result<Vec<(ProjPoint, SingularClass)>, InvolutionError> {
    let mut out = Vec::new();
    for r in locus {
        let PointCount::Finite(count) = r.point_count else { continue };
        let mut found = Vec::new();
        for sub in submasks(r.stratum.mask()).filter(|&m| m != 0) {
            let sup: Vec<usize> = indices(sub).collect();
            for p in points_on_support(t, &sup)? {
                found.push((p, r.class));
            }
        }
        if found.len() as i64 != count {
            return Err(unsupported(
                &r.stratum.support,
                &format!("enumerated {} points where the Euler count is {count}", found.len()),
            ));
        }
        out.extend(found);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularAction {
    pub fixed: Vec<ProjPoint>,
    pub swapped: Vec<(ProjPoint, ProjPoint)>,
}

/// How the involution permutes the isolated singular points.
pub fn singular_point_action(
    s: &InvolutionSpec,
    t: &FermatTower,
    points: &[ProjPoint],
) -> Result<SingularAction, InvolutionError> {
    let mut fixed = Vec::new();
    let mut swapped = BTreeSet::new();
    for p in points {
        let q = apply_to_point(s, t, p)?;
        if &q == p {
            fixed.push(p.clone());
        } else {
            swapped.insert(if *p < q { (p.clone(), q) } else { (q, p.clone()) });
        }
    }
    Ok(SingularAction { fixed, swapped: swapped.into_iter().collect() })
}

// ------------------------------------------------------------- Condition 5.1

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Grant {
    /// Follows from the Lefschetz hyperplane theorem for complete intersections.
    Lefschetz,
    /// Taken on trust from the scenario.
    Assumed(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(String),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularEntry {
    pub label: String,
    pub class: SingularClass,
    /// `Some` for isolated points identified exactly.
    pub point: Option<ProjPoint>,
    pub resolved: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    pub singularities_scalar: Verdict,
    pub fixed_equals_singular: Verdict,
    pub simply_connected: Grant,
    pub h20_vanishes: Grant,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.singularities_scalar.passed() && self.fixed_equals_singular.passed()
    }
}

/// Gluing hypotheses: every unresolved singularity is an isolated `C^4/Z4`
/// point with scalar action, and these are exactly the fixed points.
pub fn check_condition(inventory: &[SingularEntry], fixed: &FixedPointSet, lefschetz: bool) -> ConditionReport {
    let open: Vec<&SingularEntry> = inventory.iter().filter(|e| !e.resolved).collect();
    let bad: Vec<String> =
        open.iter().filter(|e| e.class != SingularClass::Z4Scalar).map(|e| format!("{} ({})", e.label, e.class)).collect();
    let singularities_scalar =
        if bad.is_empty() { Verdict::Pass } else { Verdict::Fail(format!("unresolved: {}", bad.join(", "))) };
    let sing: BTreeSet<&ProjPoint> = open.iter().filter_map(|e| e.point.as_ref()).collect();
    let fix: BTreeSet<&ProjPoint> = fixed.points.iter().collect();
    let fixed_equals_singular = if sing.len() != open.len() {
        Verdict::Fail("unresolved singularities without exact points".into())
    } else if sing == fix {
        Verdict::Pass
    } else {
        let extra: Vec<String> = fix.difference(&sing).map(|p| p.to_string()).collect();
        let missing: Vec<String> = sing.difference(&fix).map(|p| p.to_string()).collect();
        Verdict::Fail(format!("fixed but smooth: [{}]; singular but not fixed: [{}]", extra.join(" "), missing.join(" ")))
    };
    let grant = |what: &str| {
        if lefschetz {
            Grant::Lefschetz
        } else {
            Grant::Assumed(what.to_string())
        }
    };
    ConditionReport {
        singularities_scalar,
        fixed_equals_singular,
        simply_connected: grant("smooth locus simply connected"),
        h20_vanishes: grant("h^{2,0} = 0"),
    }
}

// ------------------------------------------------- holomorphic quotient data

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedComponent {
    pub support: Vec<usize>,
    pub dimension: i64,
    pub chi: i64,
    /// The rescaling turn under which this coordinate subspace is fixed.
    pub rescaling: Q,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HolomorphicFixedLocus {
    pub components: Vec<FixedComponent>,
    pub chi: i64,
}

/// Fixed locus on the variety of the diagonal map `z_j -> e(psi_j) z_j`:
/// the union over rescalings `tau` of the coordinate subspaces
/// `{j : a_j tau = psi_j}`, with Euler characteristic by inclusion-exclusion.
pub fn holomorphic_fixed_locus(t: &FermatTower, psi: &[Q]) -> Result<HolomorphicFixedLocus, InvolutionError> {
    let w = t.ambient.weights();
    let mut subspaces: BTreeMap<u32, Q> = BTreeMap::new();
    for tau in candidate_turns(w, psi) {
        let m = (0..w.len())
            .filter(|&j| turn(Q::from_integer(w[j]) * tau - psi[j]).is_zero())
            .fold(0u32, |m, j| m | (1 << j));
        if m != 0 {
            subspaces.entry(m).or_insert(tau);
        }
    }
    let chi_of = |m: u32| -> Result<i64, InvolutionError> {
        if m == 0 {
            return Ok(0);
        }
        let sup: Vec<usize> = indices(m).collect();
        if crate::variety::intersection_dimension(t, m)?.is_none() {
            return Ok(0);
        }
        Ok(euler::chi_on_closed_stratum(t, &sup)?)
    };
    let masks: Vec<u32> = subspaces.keys().copied().collect();
    let mut components = Vec::new();
    for (&m, &tau) in &subspaces {
        if let Some(dim) = crate::variety::intersection_dimension(t, m)? {
            components.push(FixedComponent { support: indices(m).collect(), dimension: dim, chi: chi_of(m)?, rescaling: tau });
        }
    }
    let mut chi = 0i64;
    for sel in 1u32..(1 << masks.len()) {
        let inter = indices(sel).fold(u32::MAX, |acc, i| acc & masks[i]);
        let sign = if sel.count_ones() % 2 == 1 { 1 } else { -1 };
        chi += sign * chi_of(inter)?;
    }
    Ok(HolomorphicFixedLocus { components, chi })
}

/// Class of the local group at a point of stratum `support` after dividing
/// by the diagonal map `psi`, when the map fixes that stratum pointwise.
pub fn quotient_point_class(t: &FermatTower, support: &[usize], psi: &[Q]) -> Option<SingularClass> {
    let w = t.ambient.weights();
    let mask = mask_of(support);
    let k = t.ambient.hcf_of(mask);
    let tau = candidate_turns(w, psi)
        .into_iter()
        .find(|&tau| support.iter().all(|&j| turn(Q::from_integer(w[j]) * tau - psi[j]).is_zero()))?;
    let transverse: Vec<usize> = (0..w.len()).filter(|j| mask & (1 << j) == 0).collect();
    let stab: Vec<Q> = transverse.iter().map(|&j| turn(Q::new(w[j], k))).collect();
    let extra: Vec<Q> = transverse.iter().map(|&j| turn(psi[j] - Q::from_integer(w[j]) * tau)).collect();
    Some(classify_group(&[stab, extra]))
}

/// Classify the diagonal group generated by turn vectors.
pub fn classify_group(gens: &[Vec<Q>]) -> SingularClass {
    let n = gens.first().map(|g| g.len()).unwrap_or(0);
    let mut elems: BTreeSet<Vec<Q>> = BTreeSet::new();
    elems.insert(vec![zero(); n]);
    let mut frontier: Vec<Vec<Q>> = vec![vec![zero(); n]];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y: Vec<Q> = x.iter().zip(g).map(|(a, b)| turn(a + b)).collect();
            if elems.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    let scalar = |t: Q| vec![t; n];
    if elems.iter().any(|e| e.iter().any(|x| x.is_zero()) && e.iter().any(|x| !x.is_zero())) {
        return SingularClass::NonIsolated;
    }
    match elems.len() {
        1 => SingularClass::Other,
        2 if elems.contains(&scalar(Q::new(1, 2))) => SingularClass::Z2Neg,
        4 if elems.contains(&scalar(Q::new(1, 4))) => SingularClass::Z4Scalar,
        _ => SingularClass::Other,
    }
}

// ------------------------------------------------------- C^4/{+-1} dichotomy

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Z2Resolution {
    /// Scalar multiplication by `i` in some compatible complex structure:
    /// the quotient has a crepant resolution.
    Resolvable { w_phases: [Q; 4] },
    /// Diagonal with phases `(i, i, -i, -i)`: no crepant resolution.
    Obstructed { w_phases: [Q; 4] },
}

/// Decide whether an antilinear map of order 4 with square `-1`, given in
/// z-coordinates, becomes a scalar in the w-coordinates or the mixed
/// diagonal form there.
pub fn classify_z2_point(g: &PhaseMatrix) -> Result<Z2Resolution, InvolutionError> {
    if cayley::fixed_vector(g).is_some() {
        return Err(InvolutionError::NotFree);
    }
    let m = g
        .real_matrix(&CoordinatePairing::z())
        .ok_or_else(|| InvolutionError::UnrecognizedNormalForm("phases beyond fourth roots".into()))?;
    let w = CoordinatePairing::w();
    // x-vector of the unit w_a (or i w_a) and back
    let x_of = |a: usize, imag: bool| -> [Q; 8] {
        let p = w.pairs()[a];
        let mut x = [zero(); 8];
        if imag {
            x[p.im - 1] = Q::from_integer(p.im_sign as i64);
        } else {
            x[p.re - 1] = Q::from_integer(p.re_sign as i64);
        }
        x
    };
    let w_of = |x: &[Q; 8]| -> Vec<GaussQ> {
        w.pairs()
            .iter()
            .map(|p| {
                GaussQ::new(x[p.re - 1] * Q::from_integer(p.re_sign as i64), x[p.im - 1] * Q::from_integer(p.im_sign as i64))
            })
            .collect()
    };
    let apply = |x: [Q; 8]| -> [Q; 8] {
        let mut y = [zero(); 8];
        for (r, row) in m.iter().enumerate() {
            y[r] = row.iter().zip(&x).map(|(a, b)| a * b).sum();
        }
        y
    };
    let mut phases = [zero(); 4];
    for a in 0..4 {
        let img = w_of(&apply(x_of(a, false)));
        let img_i = w_of(&apply(x_of(a, true)));
        let c = img[a];
        let diagonal = img.iter().enumerate().all(|(b, z)| b == a || z.is_zero());
        let linear = img_i.iter().enumerate().all(|(b, z)| if b == a { *z == c * GaussQ::i() } else { z.is_zero() });
        let arg = gauss_arg(&c).filter(|_| norm_sq(&c).is_one());
        match (diagonal && linear, arg) {
            (true, Some(t)) => phases[a] = t,
            _ => {
                return Err(InvolutionError::UnrecognizedNormalForm(format!(
                    "not diagonal and complex linear in w-coordinates: {g}"
                )))
            }
        }
    }
    let quarter = Q::new(1, 4);
    let three = Q::new(3, 4);
    if phases.iter().all(|&p| p == phases[0]) && (phases[0] == quarter || phases[0] == three) {
        return Ok(Z2Resolution::Resolvable { w_phases: phases });
    }
    let ups = phases.iter().filter(|&&p| p == quarter).count();
    let downs = phases.iter().filter(|&&p| p == three).count();
    if ups == 2 && downs == 2 {
        return Ok(Z2Resolution::Obstructed { w_phases: phases });
    }
    Err(InvolutionError::UnrecognizedNormalForm(format!("w-phases {phases:?}")))
}
