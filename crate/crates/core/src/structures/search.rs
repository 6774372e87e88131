//! Exhaustive model search over small domains.
//!
//! A sentence is grounded over `0..n` into CNF (Tseitin encoding, with a
//! sequential counter for counting quantifiers) and handed to a SAT solver, so
//! "none" means no structure of that size exists at all.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use varisat::{ExtendFormula, Lit, Solver};

use super::{FiniteStructure, StructureError};
use crate::normal_form::{denormalize, NormalForm};
use crate::syntax::{signature_of, Formula, QuantKind, Signature};

pub const DEFAULT_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Sizes `1..=n_max`, smallest first.
    UpTo,
    Exactly,
}

/// Search for a model of `phi` with at most (or exactly) `n_max` elements.
pub fn brute_force_search(
    phi: &Formula,
    n_max: usize,
    mode: SearchMode,
) -> Result<Option<FiniteStructure>, StructureError> {
    brute_force_search_capped(phi, n_max, mode, DEFAULT_CAP)
}

pub fn brute_force_search_capped(
    phi: &Formula,
    n_max: usize,
    mode: SearchMode,
    cap: usize,
) -> Result<Option<FiniteStructure>, StructureError> {
    let sig = signature_of(phi).map_err(|_| StructureError::SignatureMismatch)?;
    search_over(phi, &sig, n_max, mode, cap)
}

/// Search for a model of the normal form, over its full signature.
pub fn brute_force_search_nf(
    nf: &NormalForm,
    n_max: usize,
    mode: SearchMode,
) -> Result<Option<FiniteStructure>, StructureError> {
    search_over(&denormalize(nf), &nf.sigma, n_max, mode, DEFAULT_CAP)
}

fn search_over(
    phi: &Formula,
    sig: &Signature,
    n_max: usize,
    mode: SearchMode,
    cap: usize,
) -> Result<Option<FiniteStructure>, StructureError> {
    if n_max > cap {
        return Err(StructureError::CapExceeded { n: n_max, cap });
    }
    let sizes = match mode {
        SearchMode::UpTo => 1..=n_max,
        SearchMode::Exactly => n_max.max(1)..=n_max,
    };
    for n in sizes {
        if let Some(a) = solve_at(phi, sig, n) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

struct Grounder<'a> {
    solver: Solver<'a>,
    sig: &'a Signature,
    n: usize,
    truth: Lit,
    unary: Vec<Lit>,
    binary: Vec<Lit>,
    memo: HashMap<(usize, [usize; 2]), Lit>,
}

fn solve_at(phi: &Formula, sig: &Signature, n: usize) -> Option<FiniteStructure> {
    let mut solver = Solver::new();
    let truth = solver.new_lit();
    solver.add_clause(&[truth]);
    let unary = (0..sig.unary.len() * n).map(|_| solver.new_lit()).collect();
    let binary = (0..sig.binary.len() * n * n).map(|_| solver.new_lit()).collect();
    let mut g = Grounder { solver, sig, n, truth, unary, binary, memo: HashMap::new() };
    let root = g.encode(phi, [0, 0]);
    g.solver.add_clause(&[root]);
    g.order_one_types();
    if !g.solver.solve().expect("in-memory solving does not fail") {
        return None;
    }
    let model: std::collections::HashSet<Lit> = g.solver.model()?.into_iter().collect();
    let mut a = FiniteStructure::new(sig.clone(), n);
    for x in 0..n {
        for p in 0..sig.unary.len() {
            a.set_unary(p, x, model.contains(&g.unary[p * n + x]));
        }
        for y in 0..n {
            for k in 0..sig.binary.len() {
                if model.contains(&g.binary[(k * n + x) * n + y]) {
                    a.set_binary(k, x, y, true);
                }
            }
        }
    }
    Some(a)
}

impl Grounder<'_> {
    fn fresh(&mut self) -> Lit {
        self.solver.new_lit()
    }

    fn and(&mut self, ins: &[Lit]) -> Lit {
        match ins {
            [] => self.truth,
            [l] => *l,
            _ => {
                let out = self.fresh();
                let mut big = vec![out];
                for &l in ins {
                    self.solver.add_clause(&[!out, l]);
                    big.push(!l);
                }
                self.solver.add_clause(&big);
                out
            }
        }
    }

    fn or(&mut self, ins: &[Lit]) -> Lit {
        let neg: Vec<Lit> = ins.iter().map(|&l| !l).collect();
        !self.and(&neg)
    }

    fn iff(&mut self, a: Lit, b: Lit) -> Lit {
        let out = self.fresh();
        self.solver.add_clause(&[!out, !a, b]);
        self.solver.add_clause(&[!out, a, !b]);
        self.solver.add_clause(&[out, a, b]);
        self.solver.add_clause(&[out, !a, !b]);
        out
    }

    /// Literals `ge[k]` meaning "at least k of `ins` hold", for `k = 0..=top`.
    fn counter(&mut self, ins: &[Lit], top: usize) -> Vec<Lit> {
        let fls = !self.truth;
        let mut ge = vec![fls; top + 1];
        ge[0] = self.truth;
        for &x in ins {
            let mut next = ge.clone();
            for k in 1..=top {
                let carry = self.and(&[x, ge[k - 1]]);
                next[k] = self.or(&[ge[k], carry]);
            }
            ge = next;
        }
        ge
    }

    fn encode(&mut self, phi: &Formula, env: [usize; 2]) -> Lit {
        let key = (phi as *const Formula as usize, env);
        if let Some(&l) = self.memo.get(&key) {
            return l;
        }
        let n = self.n;
        let lit = match phi {
            Formula::True => self.truth,
            Formula::False => !self.truth,
            Formula::Unary(p, v) => self.unary[self.sig.unary_index(p).expect("in signature") * n + env[*v as usize]],
            Formula::Binary(f, a, b) => {
                let k = self.sig.binary_index(f).expect("in signature");
                self.binary[(k * n + env[*a as usize]) * n + env[*b as usize]]
            }
            Formula::Eq(a, b) => {
                if env[*a as usize] == env[*b as usize] {
                    self.truth
                } else {
                    !self.truth
                }
            }
            Formula::Not(f) => !self.encode(f, env),
            Formula::And(f, g) => {
                let (a, b) = (self.encode(f, env), self.encode(g, env));
                self.and(&[a, b])
            }
            Formula::Or(f, g) => {
                let (a, b) = (self.encode(f, env), self.encode(g, env));
                self.or(&[a, b])
            }
            Formula::Implies(f, g) => {
                let (a, b) = (self.encode(f, env), self.encode(g, env));
                self.or(&[!a, b])
            }
            Formula::Iff(f, g) => {
                let (a, b) = (self.encode(f, env), self.encode(g, env));
                self.iff(a, b)
            }
            Formula::Quant { kind, count, var, body } => {
                let ins: Vec<Lit> = (0..n)
                    .map(|d| {
                        let mut e = env;
                        e[*var as usize] = d;
                        self.encode(body, e)
                    })
                    .collect();
                let c = count.as_ref().map(|c| c.to_usize().unwrap_or(usize::MAX));
                match kind {
                    QuantKind::Forall => self.and(&ins),
                    QuantKind::Exists => self.or(&ins),
                    QuantKind::AtLeast => self.at_least(&ins, c.unwrap()),
                    QuantKind::AtMost => !self.at_least(&ins, c.unwrap().saturating_add(1)),
                    QuantKind::Exactly => {
                        let c = c.unwrap();
                        let lo = self.at_least(&ins, c);
                        let hi = self.at_least(&ins, c.saturating_add(1));
                        self.and(&[lo, !hi])
                    }
                }
            }
        };
        self.memo.insert(key, lit);
        lit
    }

    fn at_least(&mut self, ins: &[Lit], c: usize) -> Lit {
        if c == 0 {
            self.truth
        } else if c > ins.len() {
            !self.truth
        } else {
            self.counter(ins, c)[c]
        }
    }

    /// Symmetry pruning: 1-type bit vectors are lexicographically
    /// nondecreasing along the domain.
    fn order_one_types(&mut self) {
        let n = self.n;
        let bits = |g: &Self, x: usize| -> Vec<Lit> {
            let mut v: Vec<Lit> = (0..g.sig.unary.len()).map(|p| g.unary[p * n + x]).collect();
            v.extend((0..g.sig.binary.len()).map(|k| g.binary[(k * n + x) * n + x]));
            v
        };
        for x in 1..n {
            let (a, b) = (bits(self, x - 1), bits(self, x));
            let mut eq = self.truth;
            for (&ai, &bi) in a.iter().zip(&b) {
                self.solver.add_clause(&[!eq, !ai, bi]);
                let next = self.fresh();
                self.solver.add_clause(&[!eq, ai, bi, next]);
                self.solver.add_clause(&[!eq, !ai, !bi, next]);
                eq = next;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::check_sentence;
    use crate::syntax::parse;

    fn find(src: &str, n: usize, mode: SearchMode) -> Option<FiniteStructure> {
        let phi = parse(src).unwrap();
        let found = brute_force_search(&phi, n, mode).unwrap();
        if let Some(a) = &found {
            assert!(check_sentence(a, &phi).unwrap());
        }
        found
    }

    #[test]
    fn successor_has_a_two_element_model() {
        let a = find("Ax E=1 y (f(x,y) & ~(x=y))", 3, SearchMode::UpTo).unwrap();
        assert_eq!(a.n, 2);
    }

    #[test]
    fn contradiction_has_none() {
        assert!(find("Ax (p(x) & ~p(x))", 4, SearchMode::UpTo).is_none());
    }

    #[test]
    fn infinity_axiom_has_no_model_up_to_8() {
        let src = "Ax E=1 y (f(x,y) & ~(x=y)) & Ay E<=1 x (f(x,y) & ~(x=y)) & Ey Ax ~f(x,y)";
        assert!(find(src, 8, SearchMode::UpTo).is_none());
    }

    #[test]
    fn exact_sizes() {
        assert!(find("E=3 x p(x)", 2, SearchMode::Exactly).is_none());
        assert_eq!(find("E=3 x p(x)", 5, SearchMode::Exactly).unwrap().n, 5);
        assert!(find("Ax Ay x=y", 2, SearchMode::Exactly).is_none());
    }

    #[test]
    fn cap_is_enforced() {
        let phi = parse("Ax p(x)").unwrap();
        assert!(matches!(
            brute_force_search(&phi, 9, SearchMode::UpTo),
            Err(StructureError::CapExceeded { .. })
        ));
    }
}
