mod common;

use common::{brute_singular_strata, monomial_histogram};
use num::BigUint;
use proptest::prelude::*;
use spin7::wps::*;

fn ws(v: &[i64]) -> WeightSystem {
    WeightSystem::normalized(v.to_vec()).unwrap()
}

const SYSTEMS: &[&[i64]] = &[
    &[1, 1, 1, 1, 4, 4],
    &[1, 1, 1, 1, 4, 8],
    &[1, 1, 1, 1, 8, 12],
    &[1, 1, 5, 5, 8, 20],
    &[1, 1, 1, 1, 2, 2],
    &[1, 1, 1, 1, 4, 4, 4],
    &[3, 3, 3, 3, 4, 4, 4],
];

#[test]
fn monomials_of_the_degree_twelve_family() {
    // frozen from the exhaustive enumeration oracle
    let w = ws(&[1, 1, 1, 1, 4, 4]);
    assert_eq!(monomial_histogram(w.weights(), 12)[12], 894);
    assert_eq!(monomial_histogram(w.weights(), 4)[4], 37);
    assert_eq!(count_monomials(&w, 12), BigUint::from(894u32));
    assert_eq!(count_monomials(&w, 4), BigUint::from(37u32));
}

#[test]
fn automorphism_dimensions() {
    let h = monomial_histogram(&[1, 1, 1, 1, 4, 8], 8);
    let expected = 4 * 4 + h[4] + h[8] - 1;
    assert_eq!(expected, 253);
    assert_eq!(aut_dimension(&ws(&[1, 1, 1, 1, 4, 8])), BigUint::from(expected));
    assert_eq!(aut_dimension(&ws(&[1, 1, 1, 1, 4, 4])), BigUint::from(89u32));
}

#[test]
fn monomial_counts_match_enumeration_up_to_forty() {
    for w in SYSTEMS {
        let hist = monomial_histogram(w, 40);
        let sys = ws(w);
        for (d, &n) in hist.iter().enumerate() {
            assert_eq!(count_monomials(&sys, d as i64), BigUint::from(n), "{w:?} degree {d}");
        }
    }
}

#[test]
fn singular_strata_match_subset_scan() {
    let got = |w: &[i64]| -> Vec<(Vec<usize>, i64)> {
        singular_strata(&ws(w)).into_iter().map(|s| (s.support, s.stabilizer_order)).collect()
    };
    assert_eq!(got(&[1, 1, 1, 1, 4, 4]), vec![(vec![4, 5], 4)]);
    assert_eq!(got(&[1, 1, 5, 5, 8, 20]), vec![(vec![2, 3, 5], 5), (vec![4, 5], 4)]);
    for w in SYSTEMS {
        assert_eq!(got(w), brute_singular_strata(w), "{w:?}");
    }
}

fn weight_vec() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(1i64..13, 2..7)
}

proptest! {
    #[test]
    fn singular_strata_are_closed_under_larger_stabilizers(w in weight_vec()) {
        let sys = WeightSystem::new(w).unwrap();
        let strata = singular_strata(&sys);
        for s in submasks(sys.full_mask()) {
            if sys.hcf_of(s) > 1 {
                prop_assert!(strata.iter().any(|t| t.mask() & s == s));
            }
        }
        for t in &strata {
            for s in submasks(t.mask()) {
                prop_assert!(sys.hcf_of(s) % t.stabilizer_order == 0);
            }
        }
    }

    #[test]
    fn euler_characteristic_counts_coordinates(w in weight_vec()) {
        let sys = WeightSystem::new(w.clone()).unwrap();
        prop_assert_eq!(chi_wps(&sys), w.len() as i64);
    }
}
