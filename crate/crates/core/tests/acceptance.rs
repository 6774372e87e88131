//! One test per acceptance criterion; each prints a `PASS` or `FAIL` line.

mod common;

use std::collections::BTreeSet;
use std::io::Write;
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::time::Duration;

use c2sat::approximation::{k_l_bound, sparsity_bound};
use c2sat::counting_solver::lp::IlpOutcome;
use c2sat::counting_solver::*;
use c2sat::frames::{describes, frame_of, Frame};
use c2sat::model_builder::build;
use c2sat::normal_form::{max_count, scottify};
use c2sat::solver::*;
use c2sat::structures::search::{brute_force_search, brute_force_search_nf, SearchMode};
use c2sat::structures::{
    check_normal_form, check_property, check_sentence, expand_chromatic, expand_differentiated, is_chromatic,
    star_census, ceil_log2, Property,
};
use c2sat::syntax::{parse, Formula};
use c2sat::types::{CountingSignature, TwoType, TwoTypeClass, TypeSpace};
use num_bigint::BigUint;
use rand::Rng;

const PHI_INF: &str = "Ax E=1 y (f(x,y) & ~(x=y)) & Ay E<=1 x (f(x,y) & ~(x=y)) & Ey Ax ~f(x,y)";

/// Run `body`, print its verdict line past the output capture, re-raise failures.
fn criterion(n: u32, name: &str, body: impl FnOnce() + UnwindSafe) {
    let r = catch_unwind(body);
    let verdict = if r.is_ok() { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {n:>2} {verdict}: {name}").unwrap();
    out.flush().unwrap();
    if let Err(e) = r {
        resume_unwind(e);
    }
}

fn counting_names(space: &TypeSpace) -> Vec<String> {
    space.sig.counting.iter().map(|&k| space.sig.base.binary[k].clone()).collect()
}

fn parsed_corpus() -> Vec<(String, Formula)> {
    common::corpus().into_iter().map(|s| (s.clone(), parse(&s).unwrap())).collect()
}

fn budget(secs: u64) -> SearchBudget {
    SearchBudget { time_limit: Some(Duration::from_secs(secs)), ..SearchBudget::default() }
}

#[test]
fn c01_constant_formulas() {
    criterion(1, "constant formulas", || {
        // (m, C, s, Z, X, K_0, extension)
        let table: [(u64, u64, u64, u64, &str, &str, u64); 10] = [
            (1, 1, 2, 4, "16448", "17", 3),
            (1, 2, 3, 9, "7079616", "65", 7),
            (2, 1, 4, 9, "4295032832", "2305", 7),
            (2, 2, 5, 25, "63403441431552", "9217", 10),
            (1, 3, 4, 16, "4295032832", "257", 8),
            (3, 1, 6, 16, "18014399583223808", "200705", 8),
            (2, 3, 6, 49, "1152921573326323712", "36865", 12),
            (1, 0, 1, 1, "68", "5", 0),
            (3, 2, 8, 49, "79496847221900146236260352", "3211265", 12),
            (4, 2, 10, 81, "14016833953575355530134581836908593152", "235929601", 14),
        ];
        for (m, c, s, z, x, k0, ext) in table {
            assert_eq!(z_constant(m, c), Some(z), "Z for {m},{c}");
            assert_eq!(sparsity_bound(s, m, c), x.parse::<BigUint>().unwrap(), "X for {m},{c},{s}");
            let (_, _, m_star) = message_counts(s, m, m);
            // K_0 does not depend on Y.
            assert_eq!(k_l_bound(0, u64::try_from(&m_star).unwrap(), 5, m), k0.parse::<BigUint>().unwrap());
            assert_eq!(extension_count(m, c, z), Some(ext), "extension for {m},{c}");
        }
        let k = constants(&scottify(&parse("Ax E=1 y (f(x,y) & ~(x=y))").unwrap())).unwrap();
        assert_eq!((k.m, k.c, k.z, k.extension, k.s), (1, 1, 4, 3, 4));
        assert_eq!(k.x, sparsity_bound(4, 1, 1));
    });
}

#[test]
fn c02_type_combinatorics() {
    criterion(2, "type combinatorics over {p; f}", || {
        let sig = c2sat::syntax::Signature::new(vec!["p".into()], vec!["f".into()]);
        let space = TypeSpace::new(CountingSignature::new(sig, &["f".into()]).unwrap()).unwrap();
        assert_eq!(space.l, 4);
        let mut counts = [0; 4];
        let mut total = 0;
        for tp1 in space.one_types() {
            for tp2 in space.one_types() {
                for fwd in 0..2 {
                    for bwd in 0..2 {
                        total += 1;
                        let k = match space.classify(TwoType { tp1, tp2, fwd, bwd }) {
                            TwoTypeClass::MessageInvertible => 0,
                            TwoTypeClass::MessageNonInvertible => 1,
                            TwoTypeClass::ReverseOnly => 2,
                            TwoTypeClass::Silent => 3,
                        };
                        counts[k] += 1;
                    }
                }
            }
        }
        assert_eq!(total, 64);
        assert_eq!(counts, [16, 16, 16, 16]);
        assert_eq!((space.m_total, space.m_star), (32, 16));
        let (l, m, ms) = message_counts(2, 1, 1);
        assert_eq!((l, m, ms), (4u8.into(), 32u8.into(), 16u8.into()));
    });
}

#[test]
fn c03_oracle_equivalence() {
    criterion(3, "oracle equivalence on the corpus (finite)", || {
        let corpus = parsed_corpus();
        assert!(corpus.len() >= 50);
        for (text, phi) in &corpus {
            let small = brute_force_search(phi, 5, SearchMode::UpTo).unwrap();
            match fin_sat(phi, &budget(5)) {
                Verdict::Unsat => assert!(small.is_none(), "fin_sat says unsat but a model exists: {text}"),
                Verdict::Sat(cert) => {
                    let a = cert.model.expect("finite verdicts carry a model");
                    assert!(check_sentence(&a, phi).unwrap(), "bad model for {text}");
                }
                Verdict::Unknown(_) => {}
            }
        }
    });
}

#[test]
fn c04_infinity_axiom() {
    criterion(4, "infinity axiom", || {
        let phi = parse(PHI_INF).unwrap();
        assert!(brute_force_search(&phi, 8, SearchMode::UpTo).unwrap().is_none());
        match sat(&phi, &budget(120)) {
            Verdict::Sat(cert) => {
                let (f, w, space) = (cert.frame.unwrap(), cert.solution.unwrap(), cert.space.unwrap());
                let k = constants(&scottify(&phi)).unwrap();
                assert!(check_solution(&f, &space, k.z, &w).unwrap());
                assert!(w.iter().any(|x| x.is_inf()));
            }
            other => panic!("general mode: {other:?}"),
        }
        for max_frames in [10, 500, 5_000] {
            let b = SearchBudget { max_frames, ..budget(60) };
            let v = fin_sat(&phi, &b);
            assert!(matches!(v, Verdict::Unsat | Verdict::Unknown(_)), "finite mode: {v:?}");
        }
    });
}

#[test]
fn c05_model_builder_round_trip() {
    criterion(5, "model-builder round trip on searched frames", || {
        let mut built = 0;
        for (text, phi) in parsed_corpus() {
            let nf = scottify(&phi);
            let k = constants(&nf).unwrap();
            let FrameSearch::Found(f, w) = frame_search(&nf, &k, Mode::Finite, &budget(3)) else { continue };
            let space = k.space().unwrap();
            let w: Vec<u64> = w.iter().map(|x| x.finite().unwrap() as u64).collect();
            let a = build(&f, &nf, &space, k.z, &w).unwrap_or_else(|e| panic!("{text}: {e}"));
            let census: Vec<u64> = star_census(&a, &space).into_values().collect();
            assert_eq!(census, w, "{text}");
            assert!(check_normal_form(&a, &nf).unwrap(), "{text}");
            // I is searched maximal, so a pair in I may have no silent pair in A
            // (a singleton class against itself, or every pair carrying a
            // message). Compare with the frame of A up to that and the choice of
            // witness.
            let own = frame_of(&a, &space);
            let keys = |g: &Frame| g.theta.keys().copied().collect::<BTreeSet<_>>();
            assert!(keys(&own).is_subset(&keys(&f)), "{text}");
            let relabelled = Frame { star_types: f.star_types.clone(), theta: own.theta.clone() };
            assert!(describes(&relabelled, &a, &space), "{text}");
            built += 1;
        }
        assert!(built >= 10, "only {built} frames found");
    });
}

#[test]
fn c06_model_census_solves_frame() {
    criterion(6, "census of a differentiated chromatic model solves its frame", || {
        let mut rng = common::rng(6);
        for round in 0..200 {
            let m = 1 + round % 2;
            let y = 1 + (round / 2) as u64 % 2;
            let space = common::pfg_space_m(m);
            let a = common::random_branching(&mut rng, &space, y, 10);
            let z = (m as u64 * y + 1).pow(2);
            let a = expand_chromatic(&a, &space, y).unwrap();
            let a = expand_differentiated(&a, z).unwrap();
            let space = TypeSpace::new(CountingSignature::new(a.sig.clone(), &counting_names(&space)).unwrap()).unwrap();
            assert!(check_property(&a, &space, Property::Branching(y)));
            assert!(check_property(&a, &space, Property::Differentiated(z)));
            let f = frame_of(&a, &space);
            let w: Vec<ExtNat> = star_census(&a, &space).into_values().map(ExtNat::from).collect();
            assert!(check_solution(&f, &space, z, &w).unwrap(), "round {round}\n{}", a.to_text());
        }
    });
}

#[test]
fn c07_approximation_toolkit() {
    criterion(7, "approximation toolkit", || common::toolkit::toolkit_harness(17));
}

#[test]
fn c08_expansions() {
    criterion(8, "chromatic and differentiated expansions", || {
        let mut rng = common::rng(8);
        for round in 0..100 {
            let m = 1 + round % 2;
            let y = rng.gen_range(1..=2u64);
            let space = common::pfg_space_m(m);
            let a = common::random_branching(&mut rng, &space, y, 12);
            let c = expand_chromatic(&a, &space, y).unwrap();
            let added = c.sig.unary.len() - a.sig.unary.len();
            let my = m as u64 * y;
            assert_eq!(added as u32, ceil_log2(my * my + 1));
            let cs = TypeSpace::new(CountingSignature::new(c.sig.clone(), &counting_names(&space)).unwrap()).unwrap();
            assert!(is_chromatic(&c, &cs));
            let z = (my + 1).pow(2);
            let d = expand_differentiated(&c, z).unwrap();
            let ds = TypeSpace::new(CountingSignature::new(d.sig.clone(), &counting_names(&space)).unwrap()).unwrap();
            assert!(check_property(&d, &ds, Property::Differentiated(z)));
            assert!(is_chromatic(&d, &ds));
            let plain = expand_differentiated(&a, z).unwrap();
            assert!(plain.type_census().values().all(|&u| u <= 1 || u as u64 > z));
        }
    });
}

#[test]
fn c09_extended_naturals() {
    criterion(9, "arithmetic and solving over the extended naturals", || {
        // x₁ ≥ x₁ + 1
        let sys = LinearSystem {
            nvars: 1,
            constraints: vec![Constraint::le(Side { constant: 1, terms: vec![(0, 1)] }, Side::terms(vec![(0, 1)]))],
        };
        let bound = papadimitriou_bound(&sys);
        assert!(matches!(ilp_feasible(&sys, &[0], &bound, &mut SolveBudget::nodes(1_000)), IlpOutcome::Infeasible));
        match solve_system_extended(&sys, 0, &mut SolveBudget::nodes(1_000)) {
            SolveOutcome::Solution(x) => assert_eq!(x, vec![ExtNat::Inf]),
            other => panic!("{other:?}"),
        }
        let grid: Vec<ExtNat> =
            [0u64, 1, 2, 3, 7, 1 << 20, u32::MAX as u64].into_iter().map(ExtNat::from).chain([ExtNat::Inf]).collect();
        for &a in &grid {
            assert_eq!(ext_mul(ExtNat::ZERO, ExtNat::Inf), ExtNat::ZERO);
            assert_eq!(ext_add(a, ExtNat::ZERO), a);
            assert_eq!(ext_mul(a, ExtNat::from(1)), a);
            for &b in &grid {
                assert_eq!(ext_add(a, b), ext_add(b, a));
                assert_eq!(ext_mul(a, b), ext_mul(b, a));
                for &c in &grid {
                    assert_eq!(ext_add(ext_add(a, b), c), ext_add(a, ext_add(b, c)));
                    assert_eq!(ext_mul(ext_mul(a, b), c), ext_mul(a, ext_mul(b, c)));
                    assert_eq!(ext_mul(a, ext_add(b, c)), ext_add(ext_mul(a, b), ext_mul(a, c)));
                }
            }
        }
    });
}

#[test]
fn c10_normal_form_equisatisfiable() {
    criterion(10, "normal form is equisatisfiable size by size", || {
        let mut checked = 0;
        for (text, phi) in parsed_corpus() {
            let nf = scottify(&phi);
            let c = max_count(&nf);
            if c > BigUint::from(2u8) {
                continue;
            }
            let c: usize = c.try_into().unwrap();
            for n in c + 1..=c + 3 {
                let direct = brute_force_search(&phi, n, SearchMode::Exactly).unwrap().is_some();
                let normal = brute_force_search_nf(&nf, n, SearchMode::Exactly).unwrap().is_some();
                assert_eq!(direct, normal, "{text} at size {n}");
            }
            checked += 1;
        }
        assert!(checked >= 20, "only {checked} sentences with C at most 2");
    });
}
