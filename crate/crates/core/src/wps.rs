//! Weighted projective spaces `CP(a_0, ..., a_m)`: strata, orbifold groups,
//! Euler characteristics and weighted monomial counts.

use crate::coeff::hcf_all;
use num::{BigUint, One, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WpsError {
    #[error("a weighted projective space needs at least two weights, got {0}")]
    TooFewWeights(usize),
    #[error("weights must be positive, got {0}")]
    NonPositiveWeight(i64),
    #[error("weights {0:?} have common factor {1}")]
    NotNormalized(Vec<i64>, i64),
    #[error("support must be nonempty")]
    EmptySupport,
    #[error("coordinate index {0} out of range for {1} weights")]
    IndexOutOfRange(usize, usize),
    #[error("at most 32 coordinates are supported")]
    TooManyWeights,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightSystem {
    weights: Vec<i64>,
    normalized: bool,
}

impl WeightSystem {
    pub fn new(weights: Vec<i64>) -> Result<Self, WpsError> {
        if weights.len() < 2 {
            return Err(WpsError::TooFewWeights(weights.len()));
        }
        if weights.len() > 32 {
            return Err(WpsError::TooManyWeights);
        }
        if let Some(&a) = weights.iter().find(|&&a| a <= 0) {
            return Err(WpsError::NonPositiveWeight(a));
        }
        let normalized = hcf_all(weights.iter().copied()) == 1;
        Ok(WeightSystem { weights, normalized })
    }

    /// Like [`WeightSystem::new`] but rejects weights with a common factor.
    pub fn normalized(weights: Vec<i64>) -> Result<Self, WpsError> {
        let w = Self::new(weights)?;
        if !w.normalized {
            let h = hcf_all(w.weights.iter().copied());
            return Err(WpsError::NotNormalized(w.weights, h));
        }
        Ok(w)
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn weight(&self, j: usize) -> i64 {
        self.weights[j]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Complex dimension `m`.
    pub fn dim(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn sum(&self) -> i64 {
        self.weights.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Bitmask with every coordinate set.
    pub fn full_mask(&self) -> u32 {
        if self.len() == 32 { u32::MAX } else { (1u32 << self.len()) - 1 }
    }

    /// hcf of the weights indexed by `mask`.
    pub fn hcf_of(&self, mask: u32) -> i64 {
        hcf_all(indices(mask).map(|j| self.weights[j]))
    }
}

impl fmt::Display for WeightSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ws: Vec<String> = self.weights.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", ws.join(","))
    }
}

/// Iterate the set bits of a mask in increasing order.
pub fn indices(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |j| mask & (1 << j) != 0)
}

pub fn mask_of(support: &[usize]) -> u32 {
    support.iter().fold(0, |m, &j| m | (1 << j))
}

/// Nonempty subsets of `mask`, in increasing numeric order.
pub fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut out = Vec::new();
    let mut s = mask;
    while s != 0 {
        out.push(s);
        s = (s - 1) & mask;
    }
    out.reverse();
    out.into_iter()
}

/// The locus where exactly the coordinates in `support` are nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Stratum {
    pub support: Vec<usize>,
    pub stabilizer_order: i64,
}

impl Stratum {
    pub fn mask(&self) -> u32 {
        mask_of(&self.support)
    }

    /// Complex dimension of the open stratum.
    pub fn dimension(&self) -> usize {
        self.support.len() - 1
    }

    pub fn is_singular(&self) -> bool {
        self.stabilizer_order > 1
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.support.iter().map(|j| j.to_string()).collect();
        write!(f, "{{{}}} k={}", s.join(","), self.stabilizer_order)
    }
}

pub fn stratum_of(w: &WeightSystem, support: &[usize]) -> Result<Stratum, WpsError> {
    if support.is_empty() {
        return Err(WpsError::EmptySupport);
    }
    if let Some(&j) = support.iter().find(|&&j| j >= w.len()) {
        return Err(WpsError::IndexOutOfRange(j, w.len()));
    }
    let mask = mask_of(support);
    Ok(Stratum { support: indices(mask).collect(), stabilizer_order: w.hcf_of(mask) })
}

/// Maximal supports with a nontrivial stabilizer, sorted by support.
pub fn singular_strata(w: &WeightSystem) -> Vec<Stratum> {
    let full = w.full_mask();
    let singular: Vec<u32> = submasks(full).filter(|&s| w.hcf_of(s) > 1).collect();
    let mut out: Vec<Stratum> = singular
        .iter()
        .filter(|&&s| !singular.iter().any(|&t| t != s && t & s == s))
        .map(|&s| Stratum { support: indices(s).collect(), stabilizer_order: w.hcf_of(s) })
        .collect();
    out.sort_by(|a, b| a.support.cmp(&b.support));
    out
}

/// Euler characteristic of the whole weighted projective space.
pub fn chi_wps(w: &WeightSystem) -> i64 {
    w.len() as i64
}

/// Number of exponent vectors `e >= 0` with `sum a_j e_j = degree`.
pub fn count_monomials(w: &WeightSystem, degree: i64) -> BigUint {
    if degree < 0 {
        return BigUint::zero();
    }
    let d = degree as usize;
    let mut ways = vec![BigUint::zero(); d + 1];
    ways[0] = BigUint::one();
    for &a in w.weights() {
        let a = a as usize;
        for r in a..=d {
            let prev = ways[r - a].clone();
            ways[r] += prev;
        }
    }
    ways.swap_remove(d)
}

/// Dimension of the automorphism group of the weighted projective space.
pub fn aut_dimension(w: &WeightSystem) -> BigUint {
    let total: BigUint = w.weights().iter().map(|&a| count_monomials(w, a)).sum();
    total - BigUint::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws(v: &[i64]) -> WeightSystem {
        WeightSystem::normalized(v.to_vec()).unwrap()
    }

    #[test]
    fn stratum_hcf() {
        assert_eq!(stratum_of(&ws(&[1, 1, 1, 1, 4, 4]), &[4, 5]).unwrap().stabilizer_order, 4);
        assert_eq!(stratum_of(&ws(&[1, 1, 1, 1, 2, 2]), &[5, 4]).unwrap().stabilizer_order, 2);
        assert_eq!(stratum_of(&ws(&[1, 1, 1, 1, 4, 4]), &[0, 5]).unwrap().stabilizer_order, 1);
        assert_eq!(stratum_of(&ws(&[1, 1]), &[]), Err(WpsError::EmptySupport));
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(WeightSystem::new(vec![1]).is_err());
        assert!(WeightSystem::new(vec![1, 0]).is_err());
        assert!(WeightSystem::normalized(vec![2, 4]).is_err());
        assert!(!WeightSystem::new(vec![2, 4]).unwrap().is_normalized());
    }

    #[test]
    fn smooth_space_has_no_singular_strata() {
        assert!(singular_strata(&ws(&[1, 1, 1, 1, 1, 1])).is_empty());
    }

    #[test]
    fn chi_counts_coordinates() {
        assert_eq!(chi_wps(&ws(&[1, 1, 1, 1, 4, 4])), 6);
        assert_eq!(chi_wps(&ws(&[1, 1])), 2);
        assert_eq!(chi_wps(&ws(&[1, 1, 1, 1, 8])), 5);
    }

    #[test]
    fn linear_monomials() {
        assert_eq!(count_monomials(&ws(&[1, 1, 1, 1, 4, 4]), 1), BigUint::from(4u32));
        assert_eq!(count_monomials(&ws(&[1, 1, 1, 1, 4, 4]), -1), BigUint::zero());
    }

    #[test]
    fn pgl_dimension() {
        assert_eq!(aut_dimension(&ws(&[1, 1, 1, 1, 1, 1])), BigUint::from(35u32));
    }

    #[test]
    fn submask_enumeration() {
        let v: Vec<u32> = submasks(0b101).collect();
        assert_eq!(v, vec![0b001, 0b100, 0b101]);
    }
}
