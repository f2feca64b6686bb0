use spin7::shell::*;
use spin7::variety::{singular_locus, PointCount};
use std::path::PathBuf;

fn fixtures() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

fn load(name: &str) -> Scenario {
    load_scenario(&fixtures().join(format!("{name}.scn"))).unwrap()
}

fn one(name: &str) -> Report {
    let r = run(&load(name)).unwrap();
    assert_eq!(r.len(), 1);
    r.into_iter().next().unwrap()
}

fn diagnostics(text: &str) -> Vec<Diagnostic> {
    match parse_scenario(text) {
        Err(ShellError::Parse(d)) => d,
        other => panic!("expected diagnostics, got {other:?}"),
    }
}

const HEAD: &str = "format: 1\nname: t\nweights: 1 1 1 1 4 4\nequation: z0^12 + z1^12 + z2^12 + z3^12 + z4^3 + z5^3\n";

#[test]
fn degree_twelve_fixture_parses() {
    let sc = load("s7");
    assert_eq!(sc.equations.len(), 1);
    assert_eq!(sc.count_steps("involution"), 1);
    assert_eq!(sc.count_steps("resolve"), 1);
    assert_eq!(sc.weights, vec![1, 1, 1, 1, 4, 4]);
}

#[test]
fn resolve_before_the_sigma_quotient_is_rejected() {
    let d = diagnostics(&format!("{HEAD}seed\nresolve: 2\n"));
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].line, 6);
    assert!(d[0].message.contains("quotient sigma"));
    let d = diagnostics(&format!("{HEAD}seed\ninvolution: conj(0)\nquotient sigma\nresolve: 2\n"));
    assert!(d.iter().any(|x| x.line == 7 && x.message.contains("check")));
    let d = diagnostics(&format!("{HEAD}involution: conj(0)\nseed\n"));
    assert_eq!(d.len(), 2);
}

#[test]
fn external_data_needs_provenance() {
    let d = diagnostics(&format!("{HEAD}external chi = 4887\nseed\n"));
    assert!(d[0].message.contains("provenance"));
    assert_eq!(d[0].line, 5);
    let sc = load("s10_3");
    let e = sc.external("chi").unwrap();
    assert_eq!(e.values, vec![Linear::constant(389)]);
    assert!(e.provenance.starts_with("derived:"));
    assert_eq!(sc.external("fixed").unwrap().values[0], Linear { coef: 2, constant: 1 });
    assert_eq!(sc.param, Some(("k".to_string(), vec![0, 1, 2, 3, 4])));
}

#[test]
fn syntax_errors_carry_positions() {
    let d = diagnostics("format: 1\nweights: 1 1 x\nequation: z0^2 + + z1\nfrobnicate\n");
    let lines: Vec<usize> = d.iter().map(|x| x.line).collect();
    assert!(lines.contains(&2) && lines.contains(&3) && lines.contains(&4));
    let w = d.iter().find(|x| x.line == 2).unwrap();
    assert_eq!(w.column, 10);
    assert!(diagnostics("format: 2\n")[0].message.contains("format"));
    assert!(diagnostics(&format!("{HEAD}seed\nblowup locus 4 5: fiber C9\n"))[0].message.contains("fiber"));
}

#[test]
fn equation_syntax() {
    let e = parse_equation("z0^8 + 2i*z2^8 - 2i*z3^8 + z4^2 - z5^2").unwrap();
    assert_eq!(e.to_string(), "z0^8 + 2i*z2^8 + -2i*z3^8 + z4^2 + -1*z5^2");
    let g = parse_equation("i*z0^4 - ~z4^3 + (1/2+i)*z5^3 + z6").unwrap();
    assert_eq!(g.terms.len(), 4);
    assert_eq!(g.terms[3].exponent, 1);
    assert!(parse_equation("z0^2 + z0^3").is_err());
    assert!(parse_equation("3 + z1^2").is_err());
    assert!(parse_equation("z1^0").is_err());
}

#[test]
fn degree_twelve_report() {
    let r = one("s7");
    assert!(r.passed(), "{}", r.render());
    let s = r.summary.as_ref().unwrap();
    assert_eq!((s.triple(), s.b4_plus, s.b4_minus, s.moduli), ((0, 0, 2446), 1639, 807, 808));
    assert_eq!(s.holonomy, "Spin(7)");
    assert!(s.simply_connected);
    let h = r.check("h31").unwrap();
    assert_eq!(h.status, Status::Advisory);
    assert!(h.detail.contains("= 804") && h.detail.contains("MATCH"));
}

#[test]
fn octic_quotient_reports() {
    let r = one("s9");
    assert!(r.passed());
    let s = r.summary.clone().unwrap();
    assert_eq!((s.triple(), s.moduli), ((0, 0, 910), 296));
    assert!(r.stages.iter().any(|(_, st)| st.chi() == 1508 && st.b(4) == 1504));
    assert!(r.stages.iter().any(|(_, st)| st.chi() == 1812 && st.b(4) == 1806));
    assert!(r.check("h31").is_none());
}

#[test]
fn twelvetic_family_at_k4() {
    let sc = load("s10_3");
    let r = run_with(&sc, Some(4)).unwrap();
    assert!(r.passed());
    assert_eq!(r.summary.unwrap().triple(), (0, 33, 208));
    assert!(matches!(run_with(&sc, Some(7)), Err(ShellError::BadParam { .. })));
    assert_eq!(run(&sc).unwrap().len(), 5);
}

#[test]
fn fermat_member_reproduces_k0_without_declarations() {
    let r = one("s10_3_fermat_k0");
    assert!(r.passed());
    assert_eq!(r.summary.as_ref().unwrap().triple(), (4, 33, 200));
    assert!(r.check("external chi").is_none());
}

#[test]
fn printed_b4_is_flagged_not_failed() {
    let r = one("s8_2");
    assert!(r.passed());
    let f = r.check("published").unwrap();
    assert_eq!(f.status, Status::Flag);
    assert!(f.detail.contains("23231") && f.detail.contains("23321"));
}

#[test]
fn failing_condition_fails_the_report() {
    // the alternative involution without blowing up the swapped pair
    let text = format!("{HEAD}seed\ninvolution: pair(0,1; -) pair(2,3; -) conj(4) conj(5)\ncheck\nquotient sigma\nresolve: 2\n");
    let r = run(&parse_scenario(&text).unwrap()).unwrap().remove(0);
    assert!(!r.passed());
    assert_eq!(r.check("condition fixed=sing").unwrap().status, Status::Fail);
    assert!(r.render().contains("result: FAIL"));
}

#[test]
fn step_errors_name_the_line() {
    let text = format!("{HEAD}seed\nblowup points: p9\n");
    match run(&parse_scenario(&text).unwrap()) {
        Err(ShellError::Step { line, step, message }) => {
            assert_eq!((line, step.as_str()), (6, "blowup points"));
            assert!(message.contains("p9"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn reports_are_deterministic() {
    let a: Vec<String> = run(&load("s10_2")).unwrap().iter().map(|r| r.render() + &r.key_values()).collect();
    let b: Vec<String> = run(&load("s10_2")).unwrap().iter().map(|r| r.render() + &r.key_values()).collect();
    assert_eq!(a, b);
    assert!(a[0].contains("s10_2.b4=1292"));
}

#[test]
fn every_report_satisfies_the_index_identity() {
    for name in ["s7", "s7_1", "s8_1", "s8_2", "s8_3", "s9", "s9_1", "s10_1", "s10_2", "s10_3", "s10_3_fermat_k0"] {
        for r in run(&load(name)).unwrap() {
            assert!(r.passed(), "{}", r.render());
            assert_eq!(r.check("ahat identity").unwrap().status, Status::Pass);
            for (_, st) in &r.stages {
                assert!(st.betti.consistent());
            }
        }
    }
}

#[test]
fn table_matches() {
    let rows = betti_table(&fixtures());
    assert_eq!(rows.len(), 14);
    for r in &rows {
        assert!(r.matches(), "{r}");
    }
    assert_eq!(rows[11].got, Ok((0, 6, 3730)));
    assert_eq!(rows[9].got, Ok((1, 0, 2444)));
    assert_eq!(rows[13].got, Ok((0, 0, 11662)));
    let missing = betti_table(&fixtures().join("nowhere"));
    assert!(missing.iter().all(|r| !r.matches()));
}

#[test]
fn enumerator() {
    let z4 = enumerate_candidates(24, &[Filter::Z4ScalarOnly], DEFAULT_DEGREE_CAP).unwrap();
    let found: Vec<(Vec<i64>, i64)> = z4.iter().map(|c| (c.weights.clone(), c.points)).collect();
    assert_eq!(found, vec![(vec![1, 1, 1, 1, 4, 4], 3), (vec![1, 1, 1, 1, 4, 8], 2), (vec![1, 1, 1, 1, 8, 12], 1)]);
    let z2 = enumerate_candidates(8, &[Filter::Z2NegOnly], DEFAULT_DEGREE_CAP).unwrap();
    assert!(z2.iter().any(|c| c.weights == vec![1, 1, 1, 1, 2, 2]));
    let smooth = enumerate_candidates(12, &[Filter::Smooth], DEFAULT_DEGREE_CAP).unwrap();
    assert!(smooth.iter().any(|c| c.weights == vec![1; 6]));
    let paired = enumerate_candidates(24, &[Filter::Z4ScalarOnly, Filter::PairStructure], DEFAULT_DEGREE_CAP).unwrap();
    assert_eq!(paired.len(), 3);
    assert!(paired.iter().all(|c| c.involution.is_some()));
    assert!(matches!(enumerate_candidates(100, &[], 60), Err(ShellError::BoundTooLarge(100, 60))));
}

#[test]
fn enumerator_matches_brute_force_divisibility() {
    // every nondecreasing 6-tuple with hcf 1 whose entries divide their sum
    let all = enumerate_candidates(18, &[], DEFAULT_DEGREE_CAP).unwrap();
    let mut brute = Vec::new();
    for d in 6..=18i64 {
        let divs: Vec<i64> = (1..=d).filter(|a| d % a == 0).collect();
        let mut stack = vec![(Vec::<i64>::new(), 0i64)];
        while let Some((w, s)) = stack.pop() {
            if w.len() == 6 {
                if s == d && w.iter().fold(0, |g, &a| num::integer::gcd(g, a)) == 1 {
                    brute.push(w);
                }
                continue;
            }
            for &a in &divs {
                if w.last().is_none_or(|&l| a >= l) && s + a <= d {
                    let mut n = w.clone();
                    n.push(a);
                    stack.push((n, s + a));
                }
            }
        }
    }
    brute.sort();
    let mut got: Vec<Vec<i64>> = all.into_iter().map(|c| c.weights).collect();
    got.sort();
    assert_eq!(got, brute);
}

#[test]
fn algebra_all_pass() {
    let lines = algebra_checks(AlgebraCheck::All);
    assert_eq!(lines.len(), 9);
    assert!(lines.iter().all(|l| l.status == Status::Pass));
    assert_eq!(algebra_checks(AlgebraCheck::Forms).len(), 2);
}

#[test]
fn independent_generic_rows_are_not_merged() {
    let sc = load("s10_3");
    let t = sc.tower().unwrap();
    let loc = singular_locus(&t).unwrap();
    let pts: Vec<_> = loc.iter().filter(|r| r.stratum.support == vec![4, 5, 6]).collect();
    assert_eq!(pts.len(), 1);
    assert_eq!(pts[0].point_count, PointCount::Finite(9));
}
