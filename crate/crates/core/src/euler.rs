//! Euler characteristics of Fermat towers.
//!
//! A variable that occurs in exactly one equation is projected away. Over a
//! base point where the rest of that equation vanishes the fibre is a single
//! point; elsewhere it is `k * hcf(l, a) / l` points, where `k` is the
//! exponent of the retired variable, `a` its weight and `l` the orbifold
//! order of the base stratum. Summing over open strata of the base, with open
//! values recovered from closed ones by Moebius inversion, gives the closed
//! value upstairs. Closed intersections with coordinate subspaces are again
//! Fermat systems, so the recursion never leaves the class.

use crate::coeff::{Coef, GaussQ, Q};
use crate::variety::{validate_tower, FermatEquation, FermatTower, PlanStep, VarietyError};
use crate::wps::{indices, mask_of, submasks, WeightSystem};
use num::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EulerError {
    #[error(transparent)]
    Variety(#[from] VarietyError),
    #[error("support must be nonempty")]
    EmptySupport,
    #[error("equation {equation} vanishes identically on the stratum {support:?}")]
    ContainsStratum { equation: usize, support: Vec<usize> },
    #[error("cannot eliminate z{var}: its equations have different degrees")]
    NonLinearElimination { var: usize },
    #[error("z{var} does not occur in both equations being combined")]
    NothingToCancel { var: usize },
    #[error("fibre count over stratum {support:?} is not an integer")]
    NonIntegralFiber { support: Vec<usize> },
    #[error("exponent vector has length {got}, expected {expected}")]
    ExponentLength { got: usize, expected: usize },
}

/// An equation in engine form: common degree and the coefficient of each
/// occurring variable. The exponent of `z_j` is `deg / a_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Eqn {
    pub deg: i64,
    pub terms: Vec<(usize, Coef)>,
}

impl Eqn {
    pub fn from_equation(e: &FermatEquation, deg: i64) -> Eqn {
        let mut terms: Vec<(usize, Coef)> =
            e.terms.iter().map(|t| (t.var, t.coef.clone())).collect();
        terms.sort_by_key(|t| t.0);
        Eqn { deg, terms }
    }

    pub fn mask(&self) -> u32 {
        self.terms.iter().fold(0, |m, t| m | (1 << t.0))
    }

    pub fn coef(&self, var: usize) -> Option<&Coef> {
        self.terms.iter().find(|t| t.0 == var).map(|t| &t.1)
    }

    pub fn without(&self, var: usize) -> Eqn {
        Eqn { deg: self.deg, terms: self.terms.iter().filter(|t| t.0 != var).cloned().collect() }
    }

    fn restrict(&self, mask: u32) -> Eqn {
        Eqn {
            deg: self.deg,
            terms: self.terms.iter().filter(|t| mask & (1 << t.0) != 0).cloned().collect(),
        }
    }

    /// Scale exact equations so the first coefficient is 1.
    fn scaled(mut self) -> Eqn {
        self.terms.retain(|t| !t.1.is_zero());
        if let Some(first) = self.terms.first().and_then(|t| t.1.exact()) {
            if self.terms.iter().all(|t| t.1.exact().is_some()) {
                let inv = GaussQ::one() / first;
                for t in self.terms.iter_mut() {
                    t.1 = Coef::Exact(t.1.exact().unwrap() * inv);
                }
            }
        }
        self
    }

    fn sort_key(&self) -> (i64, Vec<usize>, String) {
        let vars = self.terms.iter().map(|t| t.0).collect();
        let coefs = self.terms.iter().map(|t| format!("{:?}", t.1)).collect::<Vec<_>>().join(";");
        (self.deg, vars, coefs)
    }
}

pub fn eqns_with_degrees(t: &FermatTower, degrees: &[i64]) -> Vec<Eqn> {
    t.equations.iter().zip(degrees).map(|(e, &d)| Eqn::from_equation(e, d)).collect()
}

/// The combination of `target` and `using` with no `var` term.
pub fn combine(target: &Eqn, using: &Eqn, var: usize) -> Result<Eqn, EulerError> {
    if target.deg != using.deg {
        return Err(EulerError::NonLinearElimination { var });
    }
    let (Some(ct), Some(cu)) = (target.coef(var), using.coef(var)) else {
        return Err(EulerError::NothingToCancel { var });
    };
    let vars = target.mask() | using.mask();
    let zero = Coef::Exact(GaussQ::zero());
    let terms = indices(vars)
        .filter(|&j| j != var)
        .map(|j| {
            let a = target.coef(j).unwrap_or(&zero);
            let b = using.coef(j).unwrap_or(&zero);
            (j, a.sub_scaled(ct, cu, b))
        })
        .filter(|t| !t.1.is_zero())
        .collect();
    Ok(Eqn { deg: target.deg, terms })
}

/// Restrict to `mask`, drop equations that vanish identically and clear the
/// variables that a one-term equation forces to zero, until nothing changes.
pub fn normalize(mut mask: u32, eqs: Vec<Eqn>) -> (u32, Vec<Eqn>) {
    let mut eqs: Vec<Eqn> = eqs;
    loop {
        eqs = eqs.into_iter().map(|e| e.restrict(mask).scaled()).filter(|e| !e.terms.is_empty()).collect();
        let forced = eqs.iter().filter(|e| e.terms.len() == 1).fold(0u32, |m, e| m | e.mask());
        if forced == 0 {
            break;
        }
        mask &= !forced;
    }
    eqs.sort_by_key(|e| e.sort_key());
    // independent generic markers are never proportional
    eqs.dedup_by(|a, b| a == b && a.terms.iter().all(|t| t.1 != Coef::Generic));
    (mask, eqs)
}

/// Largest variable occurring in exactly one equation, with that equation.
fn private_choice(mask: u32, eqs: &[Eqn]) -> Option<(usize, usize)> {
    indices(mask).collect::<Vec<_>>().into_iter().rev().find_map(|v| {
        let holders: Vec<usize> =
            (0..eqs.len()).filter(|&e| eqs[e].coef(v).is_some()).collect();
        (holders.len() == 1).then(|| (holders[0], v))
    })
}

/// Cancel the largest shared variable from all but one of its equations.
fn eliminate_once(mask: u32, eqs: &[Eqn]) -> Result<Option<Vec<Eqn>>, EulerError> {
    for v in indices(mask).collect::<Vec<_>>().into_iter().rev() {
        let holders: Vec<usize> =
            (0..eqs.len()).filter(|&e| eqs[e].coef(v).is_some()).collect();
        if holders.len() < 2 {
            continue;
        }
        let pivot = &eqs[holders[0]];
        let mut out = Vec::with_capacity(eqs.len());
        for (i, e) in eqs.iter().enumerate() {
            if i != holders[0] && holders.contains(&i) {
                out.push(combine(e, pivot, v)?);
            } else {
                out.push(e.clone());
            }
        }
        return Ok(Some(out));
    }
    Ok(None)
}

/// Normalize, then eliminate until every equation owns a private variable.
/// The number of surviving equations is then the codimension.
pub fn echelon(
    _w: &WeightSystem,
    mask: u32,
    eqs: Vec<Eqn>,
) -> Result<(u32, Vec<Eqn>), EulerError> {
    let (mut mask, mut eqs) = normalize(mask, eqs);
    loop {
        let all_private = (0..eqs.len()).all(|e| {
            indices(eqs[e].mask()).any(|v| eqs.iter().filter(|o| o.coef(v).is_some()).count() == 1)
        });
        if all_private || mask == 0 {
            return Ok((mask, eqs));
        }
        match eliminate_once(mask, &eqs)? {
            Some(next) => (mask, eqs) = normalize(mask, next),
            None => return Ok((mask, eqs)),
        }
    }
}

/// Whether the fibre count over special strata is corrected by the orbifold
/// order of the base point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiberRule {
    Corrected,
    /// Every nonzero fibre has `k` points regardless of the base stratum.
    Uncorrected,
}

type Key = (u32, Vec<Eqn>);

pub struct EulerEngine<'w> {
    w: &'w WeightSystem,
    rule: FiberRule,
    memo: Option<HashMap<Key, i64>>,
}

impl<'w> EulerEngine<'w> {
    pub fn new(w: &'w WeightSystem) -> Self {
        EulerEngine { w, rule: FiberRule::Corrected, memo: Some(HashMap::new()) }
    }

    pub fn with_rule(mut self, rule: FiberRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn without_memo(mut self) -> Self {
        self.memo = None;
        self
    }

    /// Euler characteristic of the system inside the closed stratum `CP(mask)`.
    pub fn closed(&mut self, mask: u32, eqs: &[Eqn]) -> Result<i64, EulerError> {
        let (mask, eqs) = normalize(mask, eqs.to_vec());
        if mask == 0 {
            return Ok(0);
        }
        if eqs.is_empty() {
            return Ok(mask.count_ones() as i64);
        }
        if let Some(v) = self.memo.as_ref().and_then(|m| m.get(&(mask, eqs.clone()))) {
            return Ok(*v);
        }
        let value = match private_choice(mask, &eqs) {
            Some((e, v)) => {
                let base = mask & !(1 << v);
                let others: Vec<Eqn> =
                    eqs.iter().enumerate().filter(|&(i, _)| i != e).map(|(_, q)| q.clone()).collect();
                let mut zero = others.clone();
                zero.push(eqs[e].without(v));
                let mut all_vals = BTreeMap::new();
                let mut zero_vals = BTreeMap::new();
                for s in submasks(base) {
                    all_vals.insert(s, self.closed(s, &others)?);
                    zero_vals.insert(s, self.closed(s, &zero)?);
                }
                self.assemble(base, v, eqs[e].deg, &all_vals, &zero_vals)?
            }
            None => match eliminate_once(mask, &eqs)? {
                Some(next) => self.closed(mask, &next)?,
                None => unreachable!("a normalized nonempty system has a private or shared variable"),
            },
        };
        if let Some(m) = self.memo.as_mut() {
            m.insert((mask, eqs), value);
        }
        Ok(value)
    }

    /// Follow declared plan steps while they apply, then fall back to
    /// [`EulerEngine::closed`]. Labels track the tower's equation numbers.
    fn planned(
        &mut self,
        mask: u32,
        eqs: Vec<(usize, Eqn)>,
        plan: &[PlanStep],
    ) -> Result<i64, EulerError> {
        let strip = |v: &[(usize, Eqn)]| v.iter().map(|p| p.1.clone()).collect::<Vec<_>>();
        let find = |id: usize| eqs.iter().position(|p| p.0 == id);
        let usable = !plan.is_empty() && eqs.iter().all(|p| p.1.terms.len() >= 2);
        if !usable {
            return self.closed(mask, &strip(&eqs));
        }
        match plan[0] {
            PlanStep::Combine { target, using, var } => {
                let (Some(t), Some(u)) = (find(target), find(using)) else {
                    return self.closed(mask, &strip(&eqs));
                };
                let mut next = eqs.clone();
                next[t].1 = combine(&eqs[t].1, &eqs[u].1, var)?;
                self.planned(mask, next, &plan[1..])
            }
            PlanStep::Retire { equation, var } => {
                let Some(e) = find(equation) else {
                    return self.closed(mask, &strip(&eqs));
                };
                let shared = eqs.iter().enumerate().any(|(i, p)| i != e && p.1.coef(var).is_some());
                if eqs[e].1.coef(var).is_none() || shared {
                    return Err(VarietyError::NotTriangular {
                        step: 0,
                        reason: format!("z{var} is not private to equation {equation}"),
                    }
                    .into());
                }
                let base = mask & !(1 << var);
                let others: Vec<(usize, Eqn)> =
                    eqs.iter().enumerate().filter(|&(i, _)| i != e).map(|(_, p)| p.clone()).collect();
                let mut zero = others.clone();
                zero.push((equation, eqs[e].1.without(var)));
                let mut all_vals = BTreeMap::new();
                let mut zero_vals = BTreeMap::new();
                for s in submasks(base) {
                    if s == base {
                        all_vals.insert(s, self.planned(s, others.clone(), &plan[1..])?);
                        zero_vals.insert(s, self.planned(s, zero.clone(), &plan[1..])?);
                    } else {
                        all_vals.insert(s, self.closed(s, &strip(&others))?);
                        zero_vals.insert(s, self.closed(s, &strip(&zero))?);
                    }
                }
                self.assemble(base, var, eqs[e].1.deg, &all_vals, &zero_vals)
            }
        }
    }

    fn assemble(
        &self,
        base: u32,
        v: usize,
        deg: i64,
        all_vals: &BTreeMap<u32, i64>,
        zero_vals: &BTreeMap<u32, i64>,
    ) -> Result<i64, EulerError> {
        let a = self.w.weight(v);
        let k = deg / a;
        let open_all = mobius(all_vals);
        let open_zero = mobius(zero_vals);
        let mut total = Q::zero();
        for s in submasks(base) {
            let l = self.w.hcf_of(s);
            let fiber = match self.rule {
                FiberRule::Corrected => Q::new(k * num::integer::gcd(l, a), l),
                FiberRule::Uncorrected => Q::from_integer(k),
            };
            let z = open_zero[&s];
            let moving = Q::from_integer(open_all[&s] - z) * fiber;
            if !moving.is_integer() {
                return Err(EulerError::NonIntegralFiber { support: indices(s).collect() });
            }
            total += Q::from_integer(z) + moving;
        }
        Ok(total.to_integer())
    }
}

/// Open-stratum values from closed ones over the subsets of each key.
pub fn mobius(closed: &BTreeMap<u32, i64>) -> BTreeMap<u32, i64> {
    closed
        .keys()
        .map(|&s| {
            let v = submasks(s)
                .map(|t| {
                    let sign = if (s.count_ones() - t.count_ones()) % 2 == 0 { 1 } else { -1 };
                    sign * closed[&t]
                })
                .sum();
            (s, v)
        })
        .collect()
}

fn single_equation(w: &WeightSystem, exponents: &[i64]) -> Result<FermatTower, EulerError> {
    if exponents.len() != w.len() {
        return Err(EulerError::ExponentLength { got: exponents.len(), expected: w.len() });
    }
    let t = FermatTower::hypersurface(w.clone(), exponents);
    validate_tower(&t)?;
    Ok(t)
}

/// Euler characteristic of `z_0^{k_0} + ... + z_m^{k_m} = 0`.
pub fn chi_fermat(w: &WeightSystem, exponents: &[i64]) -> Result<i64, EulerError> {
    chi_fermat_with(w, exponents, FiberRule::Corrected, true)
}

pub fn chi_fermat_with(
    w: &WeightSystem,
    exponents: &[i64],
    rule: FiberRule,
    memo: bool,
) -> Result<i64, EulerError> {
    let t = single_equation(w, exponents)?;
    let mut engine = EulerEngine::new(w).with_rule(rule);
    if !memo {
        engine = engine.without_memo();
    }
    let d = w.weight(0) * exponents[0];
    engine.closed(w.full_mask(), &[Eqn::from_equation(&t.equations[0], d)])
}

/// `chi(Y_j)` for `j = 1..=m`, where `Y_j` is the hypersurface cut down to the
/// coordinates `z_0..z_j`. The last entry is the full answer.
pub fn chi_fermat_chain(w: &WeightSystem, exponents: &[i64]) -> Result<Vec<i64>, EulerError> {
    let t = single_equation(w, exponents)?;
    let d = w.weight(0) * exponents[0];
    let eq = [Eqn::from_equation(&t.equations[0], d)];
    let mut engine = EulerEngine::new(w);
    (1..w.len()).map(|j| engine.closed((1 << (j + 1)) - 1, &eq)).collect()
}

/// Euler characteristic of a triangular tower, following its projection plan.
pub fn chi_tower(t: &FermatTower) -> Result<i64, EulerError> {
    let report = validate_tower(t)?;
    let eqs: Vec<(usize, Eqn)> =
        eqns_with_degrees(t, &report.degrees).into_iter().enumerate().collect();
    let mut engine = EulerEngine::new(&t.ambient);
    engine.planned(t.ambient.full_mask(), eqs, &t.plan)
}

/// Euler characteristic of the variety inside the closed coordinate subspace
/// spanned by `support`.
pub fn chi_on_closed_stratum(t: &FermatTower, support: &[usize]) -> Result<i64, EulerError> {
    if support.is_empty() {
        return Err(EulerError::EmptySupport);
    }
    let report = validate_tower(t)?;
    let mask = mask_of(support);
    if let Some(e) = t.equations.iter().position(|e| e.mask() & mask == 0) {
        return Err(EulerError::ContainsStratum { equation: e, support: indices(mask).collect() });
    }
    let eqs = eqns_with_degrees(t, &report.degrees);
    EulerEngine::new(&t.ambient).closed(mask, &eqs)
}

/// Closed and open Euler characteristics of the variety on every coordinate
/// stratum of the ambient space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratumChiTable {
    pub closed: BTreeMap<u32, i64>,
    pub open: BTreeMap<u32, i64>,
}

impl StratumChiTable {
    /// Every closed value is the sum of the open values beneath it.
    pub fn mobius_consistent(&self) -> bool {
        self.closed
            .iter()
            .all(|(&s, &c)| submasks(s).map(|t| self.open[&t]).sum::<i64>() == c)
    }
}

pub fn stratum_table(t: &FermatTower) -> Result<StratumChiTable, EulerError> {
    let report = validate_tower(t)?;
    let eqs = eqns_with_degrees(t, &report.degrees);
    let mut engine = EulerEngine::new(&t.ambient);
    let mut closed = BTreeMap::new();
    for s in submasks(t.ambient.full_mask()) {
        closed.insert(s, engine.closed(s, &eqs)?);
    }
    let open = mobius(&closed);
    Ok(StratumChiTable { closed, open })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws(v: &[i64]) -> WeightSystem {
        WeightSystem::normalized(v.to_vec()).unwrap()
    }

    #[test]
    fn one_variable_is_empty() {
        let w = ws(&[1, 1]);
        let t = FermatTower::hypersurface(w, &[3, 3]);
        assert_eq!(chi_on_closed_stratum(&t, &[1]).unwrap(), 0);
    }

    #[test]
    fn points_on_the_line() {
        assert_eq!(chi_fermat(&ws(&[1, 1]), &[5, 5]).unwrap(), 5);
    }

    #[test]
    fn stratum_inside_variety_is_reported() {
        let w = ws(&[1, 1, 1]);
        let t = FermatTower::new(w, vec![FermatEquation::fermat(&[2, 2])], vec![]);
        assert!(matches!(
            chi_on_closed_stratum(&t, &[2]),
            Err(EulerError::ContainsStratum { .. })
        ));
    }

    #[test]
    fn wrong_exponent_count() {
        assert!(chi_fermat(&ws(&[1, 1, 1]), &[3, 3]).is_err());
    }
}
