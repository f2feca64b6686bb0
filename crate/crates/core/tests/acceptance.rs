//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

#[path = "common/mod.rs"]
mod common;

use num::BigUint;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use spin7::cayley::*;
use spin7::coeff::Q;
use spin7::euler::*;
use spin7::involution::{fixed_points, preserves_variety, validate_involution, InvolutionSpec};
use spin7::shell::*;
use spin7::variety::FermatTower;
use spin7::wps::{count_monomials, WeightSystem};
use std::path::PathBuf;
use std::time::Instant;

type Outcome = Result<(), String>;

/// name, triple, b4+, b4-, moduli
type Expected = (&'static str, (i64, i64, i64), i64, i64, Option<i64>);
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ws(v: &[i64]) -> WeightSystem {
    WeightSystem::normalized(v.to_vec()).unwrap()
}

fn fixtures() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

fn scenario(name: &str) -> Result<Scenario, String> {
    load_scenario(&fixtures().join(format!("{name}.scn"))).map_err(|e| format!("{name}: {e}"))
}

fn reports(name: &str) -> Result<Vec<Report>, String> {
    run(&scenario(name)?).map_err(|e| format!("{name}: {e}"))
}

fn involution_of(sc: &Scenario) -> Result<InvolutionSpec, String> {
    sc.steps
        .iter()
        .find_map(|(_, s)| match s {
            Step::Involution(i) => Some(i.clone()),
            _ => None,
        })
        .ok_or_else(|| format!("{} has no involution", sc.name))
}

fn euler_values() -> Outcome {
    let chain = chi_fermat_chain(&ws(&[1, 1, 1, 1, 4, 4]), &[12, 12, 12, 12, 3, 3]).map_err(|e| e.to_string())?;
    ensure!(chain == vec![12, -108, 1224, -2436, 4887], "chain {chain:?}");
    let x = chi_fermat(&ws(&[1, 1, 1, 1, 4, 8]), &[16, 16, 16, 16, 4, 2]).unwrap();
    ensure!(x == 9498, "degree 16 gave {x}");
    let w24 = ws(&[1, 1, 1, 1, 8, 12]);
    let e24 = [24, 24, 24, 24, 3, 2];
    let good = chi_fermat_with(&w24, &e24, FiberRule::Corrected, true).unwrap();
    let bad = chi_fermat_with(&w24, &e24, FiberRule::Uncorrected, true).unwrap();
    ensure!(good == 23325 && bad == 23326, "degree 24 gave {good} / uncorrected {bad}");
    let oct = FermatTower::hypersurface(ws(&[1, 1, 1, 1, 2, 2]), &[8, 8, 8, 8, 4, 4]);
    let w = chi_tower(&oct).unwrap();
    let s = chi_on_closed_stratum(&oct, &[0, 1, 2, 3]).unwrap();
    ensure!(w == 2708 && s == 304, "octic {w}, surface {s}");
    for name in ["s10_1", "s10_2"] {
        let t = scenario(name)?.tower().map_err(|e| e.to_string())?;
        let c = chi_tower(&t).unwrap();
        ensure!(c == 2580, "{name} tower gave {c}");
    }
    Ok(())
}

fn ledger_end_to_end() -> Outcome {
    let expect: &[Expected] = &[
        ("s7", (0, 0, 2446), 1639, 807, Some(808)),
        ("s7_1", (1, 0, 2444), 1638, 806, Some(807)),
        ("s8_1", (0, 0, 4750), 3175, 1575, None),
        ("s8_2", (0, 0, 11662), 7783, 3879, None),
        ("s8_3", (0, 6, 3730), 2493, 1237, None),
        ("s9", (0, 0, 910), 615, 295, None),
        ("s9_1", (1, 0, 908), 614, 294, None),
        ("s10_1", (0, 0, 1294), 871, 423, None),
        ("s10_2", (1, 0, 1292), 870, 422, None),
    ];
    for &(name, triple, plus, minus, moduli) in expect {
        let r = reports(name)?;
        ensure!(r.len() == 1 && r[0].passed(), "{name} did not pass");
        let s = r[0].summary.as_ref().ok_or(format!("{name}: no summary"))?;
        ensure!(s.triple() == triple && s.b4_plus == plus && s.b4_minus == minus, "{name}: got {:?} {}/{}", s.triple(), s.b4_plus, s.b4_minus);
        if let Some(m) = moduli {
            ensure!(s.moduli == m, "{name}: moduli {}", s.moduli);
        }
    }
    let fam = reports("s10_3")?;
    ensure!(fam.len() == 5, "family has {} members", fam.len());
    for (k, r) in (0i64..).zip(&fam) {
        let s = r.summary.as_ref().ok_or("family: no summary")?;
        ensure!(r.passed(), "family k={k} did not pass");
        ensure!(
            s.triple() == (4 - k, 33, 200 + 2 * k) && s.b4_plus == 132 + k && s.b4_minus == 68 + k,
            "family k={k}: {:?} {}/{}",
            s.triple(),
            s.b4_plus,
            s.b4_minus
        );
    }
    Ok(())
}

fn table() -> Outcome {
    let rows = betti_table(&fixtures());
    ensure!(rows.len() == 14, "{} rows", rows.len());
    let bad: Vec<String> = rows.iter().filter(|r| !r.matches()).map(|r| r.to_string()).collect();
    ensure!(bad.is_empty(), "diffs: {}", bad.join("; "));
    Ok(())
}

fn fixed_point_counts() -> Outcome {
    for (name, fixed, swapped) in [("s7", 3, 0), ("s7_1", 1, 1), ("s8_1", 2, 0), ("s8_2", 1, 0), ("s10_1", 4, 0), ("s10_2", 2, 1)] {
        let sc = scenario(name)?;
        let t = sc.tower().map_err(|e| e.to_string())?;
        let f = fixed_points(&involution_of(&sc)?, &t).map_err(|e| e.to_string())?;
        ensure!(f.count() == fixed && f.swapped.len() == swapped, "{name}: {} fixed, {} swapped", f.count(), f.swapped.len());
    }
    // pair family (p,p,q,q,r,r) with every weight dividing d = 2(p+q+r)
    let sigma: InvolutionSpec = "pair(0,1; -) pair(2,3; -) pair(4,5)".parse().map_err(|e| format!("{e:?}"))?;
    let mut seen = 0;
    for p in (1..=9i64).step_by(2) {
        for q in (p..=9).step_by(2) {
            for r in (2..=24i64).step_by(2) {
                let d = 2 * (p + q + r);
                if d % p != 0 || d % q != 0 || d % r != 0 || num::integer::gcd(num::integer::gcd(p, q), r) != 1 {
                    continue;
                }
                let w = [p, p, q, q, r, r];
                let e: Vec<i64> = w.iter().map(|a| d / a).collect();
                let t = FermatTower::hypersurface(WeightSystem::new(w.to_vec()).unwrap(), &e);
                ensure!(validate_involution(&sigma, &t.ambient).is_ok(), "{w:?}: invalid");
                ensure!(preserves_variety(&sigma, &t).unwrap_or(false), "{w:?}: not preserved");
                let f = fixed_points(&sigma, &t).map_err(|e| e.to_string())?;
                ensure!(f.count() as i64 == d / r, "{w:?}: {} fixed, expected {}", f.count(), d / r);
                seen += 1;
            }
        }
    }
    ensure!(seen >= 3, "only {seen} family members");
    Ok(())
}

fn cayley_algebra() -> Outcome {
    for p in [CoordinatePairing::z(), CoordinatePairing::w()] {
        ensure!(su4_induced_form(&p) == cayley_form(), "induced form differs");
    }
    let [a, b] = group_g_generators();
    let g = generate_group(&[a, b]).map_err(|e| e.to_string())?;
    ensure!(g.order() == 8, "G has order {}", g.order());
    let (ia, ib) = (g.generators[0], g.generators[1]);
    ensure!(
        g.power(ia, 4) == g.identity && g.power(ia, 2) == g.power(ib, 2) && g.mul(ia, ib) == g.mul(ib, g.power(ia, 3)),
        "relations fail"
    );
    ensure!(acts_freely(&g).free, "G is not free");
    let omega = cayley_form();
    for e in &g.elements {
        ensure!(pullback(e, &omega).map_err(|e| e.to_string())? == omega, "G moves the form");
    }
    for n in [1, 3, 5] {
        let h = generate_group(&group_gn_generators(n).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure!(h.order() as i64 == 8 * n, "G{n} has order {}", h.order());
        ensure!(acts_freely(&h).free, "G{n} is not free");
    }
    Ok(())
}

fn cross_checks() -> Outcome {
    let mut seen = 0;
    for name in ["s7", "s7_1", "s8_1", "s8_2", "s8_3", "s9", "s9_1", "s10_1", "s10_2", "s10_3"] {
        for r in reports(name)? {
            let c = r.check("ahat identity").ok_or(format!("{name}: no index check"))?;
            ensure!(c.status == Status::Pass, "{name}: {}", c.detail);
            seen += 1;
        }
    }
    ensure!(seen == 14, "{seen} index checks");
    let s7 = &reports("s7")?[0];
    let h = s7.check("h31").ok_or("s7: no h31 line")?;
    ensure!(h.detail.contains("= 804") && h.detail.contains("807") && h.detail.contains("MATCH"), "h31: {}", h.detail);
    ensure!(s7.summary.as_ref().map(|s| s.b4_minus) == Some(807), "s7 ledger b4-");
    let r = &reports("s8_2")?[0];
    let f = r.check("published").ok_or("s8_2: nothing flagged")?;
    ensure!(f.status == Status::Flag && f.detail.contains("23231") && f.detail.contains("23321"), "flag: {}", f.detail);
    ensure!(r.passed(), "the flag must not fail the report");
    Ok(())
}

fn property_suites() -> Outcome {
    for d in 2..=16i64 {
        let g = (d - 1) * (d - 2) / 2;
        ensure!(chi_fermat(&ws(&[1, 1, 1]), &[d, d, d]).unwrap() == 2 - 2 * g, "plane curve {d}");
        ensure!(chi_fermat(&ws(&[1, 1, 1, 1]), &[d; 4]).unwrap() == d * d * d - 4 * d * d + 6 * d, "surface {d}");
    }
    let systems: &[(&[i64], &[i64])] = &[
        (&[1, 1, 1, 1, 4, 4], &[12, 12, 12, 12, 3, 3]),
        (&[1, 1, 1, 1, 4, 8], &[16, 16, 16, 16, 4, 2]),
        (&[1, 1, 1, 1, 8, 12], &[24, 24, 24, 24, 3, 2]),
        (&[1, 1, 5, 5, 8, 20], &[40, 40, 8, 8, 5, 2]),
        (&[1, 1, 1, 1, 2, 2], &[8, 8, 8, 8, 4, 4]),
    ];
    for (w, e) in systems {
        let t = FermatTower::hypersurface(ws(w), e);
        ensure!(stratum_table(&t).unwrap().mobius_consistent(), "{w:?} not Mobius consistent");
        let hist = common::monomial_histogram(w, 40);
        for (d, &n) in hist.iter().enumerate() {
            ensure!(count_monomials(&ws(w), d as i64) == BigUint::from(n), "{w:?} degree {d}");
        }
    }
    for w in [[1i64, 1, 1, 1, 4, 4, 4], [3, 3, 3, 3, 4, 4, 4]] {
        for d in 0..=24 {
            ensure!(
                count_monomials(&ws(&w), d) == BigUint::from(common::monomial_histogram(&w, 24)[d as usize]),
                "{w:?} degree {d}"
            );
        }
    }
    for name in ["s10_1", "s10_3_fermat_k0"] {
        let t = scenario(name)?.tower().map_err(|e| e.to_string())?;
        ensure!(stratum_table(&t).unwrap().mobius_consistent(), "{name} not Mobius consistent");
    }

    let mut runner = TestRunner::new(Config { cases: 64, failure_persistence: None, ..Config::default() });
    let data = prop::collection::vec(prop::sample::select(vec![1i64, 2, 3, 4, 6]), 3..6)
        .prop_flat_map(|w| (Just(w), 1i64..3, any::<u64>()));
    runner
        .run(&data, |(w, m, seed)| {
            let l = w.iter().fold(1, |acc, &a| num::integer::lcm(acc, a));
            let e: Vec<i64> = w.iter().map(|&a| l * m / a).collect();
            let base = chi_fermat(&WeightSystem::new(w.clone()).unwrap(), &e).unwrap();
            let mut idx: Vec<usize> = (0..w.len()).collect();
            let mut s = seed;
            for i in (1..idx.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                idx.swap(i, (s >> 33) as usize % (i + 1));
            }
            let pw: Vec<i64> = idx.iter().map(|&i| w[i]).collect();
            let pe: Vec<i64> = idx.iter().map(|&i| e[i]).collect();
            prop_assert_eq!(chi_fermat(&WeightSystem::new(pw).unwrap(), &pe).unwrap(), base);
            Ok(())
        })
        .map_err(|e| format!("permutation invariance: {e}"))?;

    let [x, y] = group_g_generators();
    let g = generate_group(&[x, y]).unwrap();
    let form = |deg: usize| {
        prop::collection::vec((prop::sample::subsequence((1..=8).collect::<Vec<usize>>(), deg), -3i64..4), 0..5).prop_map(
            move |ts| {
                let mut f = MultiForm::zero(deg);
                for (idx, c) in ts {
                    f.add_term(&idx, Q::from_integer(c)).unwrap();
                }
                f
            },
        )
    };
    runner
        .run(&(form(2), form(2), 0usize..8), |(a, b, which)| {
            let e = &g.elements[which];
            let lhs = pullback(e, &wedge(&a, &b).unwrap()).unwrap();
            let rhs = wedge(&pullback(e, &a).unwrap(), &pullback(e, &b).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            Ok(())
        })
        .map_err(|e| format!("pullback/wedge: {e}"))?;
    Ok(())
}

fn enumerator() -> Outcome {
    let found = enumerate_candidates(24, &[Filter::Z4ScalarOnly], DEFAULT_DEGREE_CAP).map_err(|e| e.to_string())?;
    let got: Vec<(Vec<i64>, i64)> = found.iter().map(|c| (c.weights.clone(), c.points)).collect();
    let want = vec![(vec![1, 1, 1, 1, 4, 4], 3), (vec![1, 1, 1, 1, 4, 8], 2), (vec![1, 1, 1, 1, 8, 12], 1)];
    for w in &want {
        ensure!(got.contains(w), "missing {w:?}, got {got:?}");
    }
    ensure!(got.len() == want.len(), "extra candidates: {got:?}");
    Ok(())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("euler values", euler_values),
        ("ledger end to end", ledger_end_to_end),
        ("betti table", table),
        ("fixed point counts", fixed_point_counts),
        ("cayley algebra", cayley_algebra),
        ("cross checks", cross_checks),
        ("property suites", property_suites),
        ("enumerator", enumerator),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(()) => println!("PASS {} {name}", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {} {name}: {e}", i + 1);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    println!("{}/8 criteria passed in {secs:.1}s", 8 - failed);
    if secs >= 60.0 {
        println!("FAIL runtime over 60s");
        failed += 1;
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
