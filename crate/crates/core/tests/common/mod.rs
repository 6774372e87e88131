#![allow(dead_code)]

pub mod toolkit;

use c2sat::normal_form::NormalForm;
use c2sat::structures::{is_chromatic, FiniteStructure};
use c2sat::syntax::{Formula, Signature};
use c2sat::types::{CountingSignature, TypeSpace};
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// `{p; f, g}` with `f` counting.
pub fn pfg_space() -> TypeSpace {
    let sig = Signature::new(vec!["p".into()], vec!["f".into(), "g".into()]);
    TypeSpace::new(CountingSignature::new(sig, &["f".into()]).unwrap()).unwrap()
}

/// `∀x ∃=1 y (f(x,y) ∧ x≠y)` over `{p; f, g}`.
pub fn psi_like_nf() -> NormalForm {
    NormalForm {
        alpha: Formula::True,
        beta: Formula::True,
        counting_conjuncts: vec![("f".into(), BigUint::from(1u8))],
        sigma: pfg_space().sig.base,
    }
}

/// A chromatic model of `psi_like_nf` on at most `n_max` elements whose
/// classes have size 1 or more than `z`. Every element has one `f`-successor;
/// `g` is random.
pub fn random_psi_model(rng: &mut ChaCha8Rng, n_max: usize, z: usize) -> FiniteStructure {
    let space = pfg_space();
    loop {
        let n = rng.gen_range(z + 1..=n_max);
        let singleton = n > z + 1 && rng.gen_bool(0.6);
        let mut a = FiniteStructure::new(space.sig.base.clone(), n);
        let special = rng.gen_range(0..n);
        for x in 0..n {
            a.set_unary(0, x, !singleton || x == special);
        }
        for x in 0..n {
            let mut others: Vec<usize> = (0..n).filter(|&y| y != x).collect();
            others.shuffle(rng);
            a.set_binary(0, x, others[0], true);
            for y in 0..n {
                if y != x && rng.gen_bool(0.3) {
                    a.set_binary(1, x, y, true);
                }
            }
        }
        if is_chromatic(&a, &space) {
            return a;
        }
    }
}

/// `{p; f, g}` with the first `m` binaries counting.
pub fn pfg_space_m(m: usize) -> TypeSpace {
    let sig = Signature::new(vec!["p".into()], vec!["f".into(), "g".into()]);
    let counting: Vec<String> = ["f", "g"][..m].iter().map(|s| s.to_string()).collect();
    TypeSpace::new(CountingSignature::new(sig, &counting).unwrap()).unwrap()
}

/// A random `Y`-branching structure over `space` with `2..=n_max` elements.
pub fn random_branching(rng: &mut ChaCha8Rng, space: &TypeSpace, y: u64, n_max: usize) -> FiniteStructure {
    let n = rng.gen_range(2..=n_max);
    let mut a = FiniteStructure::new(space.sig.base.clone(), n);
    for x in 0..n {
        for u in 0..a.sig.unary.len() {
            a.set_unary(u, x, rng.gen_bool(0.5));
        }
        for b in 0..a.sig.binary.len() {
            a.set_binary(b, x, x, rng.gen_bool(0.3));
        }
    }
    for b in 0..a.sig.binary.len() {
        let counted = space.sig.counting.contains(&b);
        for x in 0..n {
            let mut others: Vec<usize> = (0..n).filter(|&z| z != x).collect();
            others.shuffle(rng);
            let k = if counted { rng.gen_range(0..=y as usize).min(others.len()) } else { others.len() / 2 };
            for &z in &others[..k] {
                a.set_binary(b, x, z, true);
            }
        }
    }
    a
}

/// The corpus sentences, one per non-comment line.
pub fn corpus() -> Vec<String> {
    include_str!("../data/corpus.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}
