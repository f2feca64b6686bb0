//! Brute-force oracles shared by the integration tests. None of these call
//! the code paths they are used to check.
#![allow(dead_code)]

use num::integer::gcd;
use num::rational::Ratio;
use spin7::coeff::{rank, GaussQ};
use std::collections::BTreeMap;

/// Euler characteristic of a smooth complete intersection of the given
/// degrees in ordinary `CP^n`: `prod(d) * [h^(n-r)] (1+h)^(n+1) / prod(1+d h)`.
pub fn smooth_ci_chi(n: usize, degrees: &[i64]) -> i128 {
    let r = degrees.len();
    if r > n {
        return 0;
    }
    let top = n - r;
    let mut series = vec![0i128; top + 1];
    // (1+h)^(n+1)
    for (i, s) in series.iter_mut().enumerate() {
        *s = binom(n as i128 + 1, i as i128);
    }
    for &d in degrees {
        // multiply by 1/(1+dh) = sum (-d)^i h^i
        let mut next = vec![0i128; top + 1];
        for i in 0..=top {
            let mut p = 1i128;
            for j in 0..=i {
                next[i] += series[i - j] * p;
                p *= -(d as i128);
            }
        }
        series = next;
    }
    degrees.iter().map(|&d| d as i128).product::<i128>() * series[top]
}

fn binom(n: i128, k: i128) -> i128 {
    if k < 0 || k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Euler characteristic of `{ C u = 0 }` in `P(E)` where `u_j = x_j^d`,
/// for a coefficient matrix in general position. Panics otherwise.
fn ordinary_fermat_ci_chi(rows: &[Vec<GaussQ>], cols: &[usize], d: i64) -> i128 {
    let m: Vec<Vec<GaussQ>> = rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect();
    let rho = rank(&m, cols.len());
    if rho >= cols.len() {
        return 0;
    }
    // every rho-column minor must be nonzero for the oracle to apply
    let n = cols.len();
    let mut ok = true;
    for sub in 0u32..(1 << n) {
        if sub.count_ones() as usize != rho {
            continue;
        }
        let pick: Vec<usize> = (0..n).filter(|i| sub & (1 << i) != 0).collect();
        let mm: Vec<Vec<GaussQ>> = m.iter().map(|r| pick.iter().map(|&i| r[i]).collect()).collect();
        if rank(&mm, rho) < rho {
            ok = false;
        }
    }
    assert!(ok, "oracle needs coefficients in general position on {cols:?}");
    smooth_ci_chi(n - 1, &vec![d; rho])
}

/// Euler characteristic of the weighted Fermat system with coefficient rows
/// `rows` (one entry per coordinate, zero when absent) and common degree `d`,
/// as the quotient of an ordinary Fermat complete intersection by
/// `prod mu_{a_j}`, averaging Euler characteristics of fixed loci.
pub fn burnside_chi(weights: &[i64], rows: &[Vec<GaussQ>], d: i64) -> i128 {
    let n = weights.len();
    let order: i64 = weights.iter().product();
    let mut cache: BTreeMap<Vec<usize>, i128> = BTreeMap::new();
    let mut total: i128 = 0;
    let mut g = vec![0i64; n];
    loop {
        let mut classes: BTreeMap<Ratio<i64>, Vec<usize>> = BTreeMap::new();
        for j in 0..n {
            classes.entry(Ratio::new(g[j], weights[j])).or_default().push(j);
        }
        for cols in classes.values() {
            let v = *cache
                .entry(cols.clone())
                .or_insert_with(|| ordinary_fermat_ci_chi(rows, cols, d));
            total += v;
        }
        // next group element
        let mut j = 0;
        loop {
            if j == n {
                assert_eq!(total % order as i128, 0);
                return total / order as i128;
            }
            g[j] += 1;
            if g[j] < weights[j] {
                break;
            }
            g[j] = 0;
            j += 1;
        }
    }
}

pub fn unit_rows(n: usize) -> Vec<Vec<GaussQ>> {
    vec![vec![GaussQ::new(1.into(), 0.into()); n]]
}

/// Exponent vectors of weighted degree at most `max_degree`, by exhaustive
/// enumeration, histogrammed by degree.
pub fn monomial_histogram(weights: &[i64], max_degree: i64) -> Vec<u64> {
    let mut hist = vec![0u64; max_degree as usize + 1];
    fn rec(weights: &[i64], i: usize, used: i64, max: i64, hist: &mut [u64]) {
        if i == weights.len() {
            hist[used as usize] += 1;
            return;
        }
        let mut e = 0;
        while used + e * weights[i] <= max {
            rec(weights, i + 1, used + e * weights[i], max, hist);
            e += 1;
        }
    }
    rec(weights, 0, 0, max_degree, &mut hist);
    hist
}

/// All maximal coordinate subsets whose weights share a factor above 1.
pub fn brute_singular_strata(weights: &[i64]) -> Vec<(Vec<usize>, i64)> {
    let n = weights.len();
    let mut sing = Vec::new();
    for s in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|j| s & (1 << j) != 0).collect();
        let h = idx.iter().fold(0, |acc, &j| gcd(acc, weights[j]));
        if h > 1 {
            sing.push((s, idx, h));
        }
    }
    let mut out: Vec<(Vec<usize>, i64)> = sing
        .iter()
        .filter(|(s, _, _)| !sing.iter().any(|(t, _, _)| t != s && t & s == *s))
        .map(|(_, idx, h)| (idx.clone(), *h))
        .collect();
    out.sort();
    out
}
