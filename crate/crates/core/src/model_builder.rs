//! Construction of a finite model of `φ*` from a chromatic frame and a finite
//! solution of its constraint system.
//!
//! Every choice is made by ascending element index, and every 2-type cell is
//! written at most once; a second write is reported as an internal error.

use std::collections::BTreeMap;
use std::ops::Range;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::counting_solver::{check_solution, ExtNat};
use crate::frames::{coefficients, frame_models, is_chromatic_frame, validate_frame, Frame};
use crate::normal_form::{max_count, NormalForm};
use crate::structures::FiniteStructure;
use crate::types::{OneType, TwoType, TypeSpace};

/// Largest domain `build` will allocate.
pub const MAX_BUILD_ELEMENTS: u64 = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal invariant failure: {0}")]
    Internal(String),
}

/// Element ranges `A_k` and the classes `U_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildPlan {
    pub blocks: Vec<Range<usize>>,
    pub classes: BTreeMap<OneType, Vec<usize>>,
}

impl BuildPlan {
    pub fn new(f: &Frame, w: &[u64]) -> BuildPlan {
        let mut blocks = Vec::with_capacity(w.len());
        let mut classes: BTreeMap<OneType, Vec<usize>> = BTreeMap::new();
        let mut next = 0;
        for (st, &wk) in f.star_types.iter().zip(w) {
            let r = next..next + wk as usize;
            classes.entry(st.pi).or_default().extend(r.clone());
            next = r.end;
            blocks.push(r);
        }
        BuildPlan { blocks, classes }
    }

    pub fn size(&self) -> usize {
        self.blocks.last().map_or(0, |r| r.end)
    }

    pub fn block_of(&self, a: usize) -> usize {
        self.blocks.partition_point(|r| r.end <= a)
    }
}

struct Builder<'a> {
    f: &'a Frame,
    space: &'a TypeSpace,
    plan: BuildPlan,
    a: FiniteStructure,
    written: Vec<bool>,
}

impl Builder<'_> {
    fn cell(&self, a: usize, b: usize) -> usize {
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        x * self.a.n + y
    }

    fn is_set(&self, a: usize, b: usize) -> bool {
        self.written[self.cell(a, b)]
    }

    fn put(&mut self, a: usize, b: usize, tau: TwoType) -> Result<(), BuildError> {
        if a == b {
            return Err(BuildError::Internal(format!("2-type assigned to the pair ({a},{a})")));
        }
        if self.a.tp(a) != tau.tp1 || self.a.tp(b) != tau.tp2 {
            return Err(BuildError::Internal(format!("2-type for ({a},{b}) clashes with the 1-types")));
        }
        let c = self.cell(a, b);
        if self.written[c] {
            return Err(BuildError::Internal(format!("2-type for ({a},{b}) written twice")));
        }
        self.written[c] = true;
        self.a.set_tp2(a, b, tau);
        Ok(())
    }

    fn star(&self, a: usize) -> &crate::types::StarType {
        &self.f.star_types[self.plan.block_of(a)]
    }

    fn class(&self, pi: OneType) -> Vec<usize> {
        self.plan.classes.get(&pi).cloned().unwrap_or_default()
    }

    /// Non-invertible messages of `a`'s star-type towards `target`, with multiplicities.
    fn outgoing(&self, a: usize, target: OneType) -> Vec<(TwoType, u64)> {
        self.star(a)
            .v
            .iter()
            .filter(|&&(j, _)| !self.space.is_invertible_index(j))
            .map(|&(j, c)| (self.space.message(j), c))
            .filter(|(mu, _)| mu.tp2 == target)
            .collect()
    }

    /// Whether `a`'s star-type sends nothing to `target`.
    fn silent_towards(&self, a: usize, target: OneType) -> bool {
        self.star(a).v.iter().all(|&(j, _)| self.space.message(j).tp2 != target)
    }

    fn step2(&mut self) -> Result<(), BuildError> {
        let n = self.a.n;
        let mut senders: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for a in 0..n {
            for &(j, c) in &self.star(a).v {
                if self.space.is_invertible_index(j) {
                    if c != 1 {
                        return Err(BuildError::Internal(format!("invertible multiplicity {c} at element {a}")));
                    }
                    senders.entry(j).or_default().push(a);
                }
            }
        }
        for (&j, vj) in &senders {
            let j2 = self.space.inverse_index(j);
            if j2 == j {
                return Err(BuildError::Internal("self-inverse message in a chromatic frame".into()));
            }
            if j2 < j {
                continue;
            }
            let vj2 = senders.get(&j2).cloned().unwrap_or_default();
            if vj.len() != vj2.len() {
                return Err(BuildError::Internal(format!("|V_{j}| != |V_{j2}|")));
            }
            let mu = self.space.message(j);
            for (&a, &b) in vj.iter().zip(&vj2) {
                self.put(a, b, mu)?;
            }
        }
        Ok(())
    }

    fn step3(&mut self) -> Result<(), BuildError> {
        let types: Vec<OneType> = self.plan.classes.keys().copied().collect();
        let big = |u: usize| u > 1;
        for (x, &pi) in types.iter().enumerate() {
            for &pi2 in &types[x..] {
                let (ui, ui2) = (self.class(pi).len(), self.class(pi2).len());
                if ui == 1 {
                    self.singleton(pi, pi2)?;
                } else if ui2 == 1 {
                    self.singleton(pi2, pi)?;
                } else if big(ui) && big(ui2) {
                    self.wire_blocks(pi, pi2)?;
                    if pi != pi2 {
                        self.wire_blocks(pi2, pi)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// `U_i = {a}`: messages from `U_i'` into `a`, then from `a` into `R ⊆ X_i'i`.
    fn singleton(&mut self, pi: OneType, pi2: OneType) -> Result<(), BuildError> {
        let a = self.class(pi)[0];
        for b in self.class(pi2) {
            if b == a {
                continue;
            }
            for (mu, c) in self.outgoing(b, pi) {
                if c != 1 {
                    return Err(BuildError::Internal(format!("element {b} sends {c} messages to a singleton")));
                }
                self.put(b, a, mu)?;
            }
        }
        let mut receivers = self
            .class(pi2)
            .into_iter()
            .filter(|&b| b != a && self.silent_towards(b, pi))
            .collect::<Vec<_>>()
            .into_iter();
        for (mu, c) in self.outgoing(a, pi2) {
            for _ in 0..c {
                let b = receivers
                    .next()
                    .ok_or_else(|| BuildError::Internal(format!("element {a} ran out of receivers")))?;
                self.put(a, b, mu)?;
            }
        }
        Ok(())
    }

    /// Both classes exceed `Z`: the member at position `p` of `U_i` sends to
    /// the block `p + 1 (mod 3)` of `U_i'`.
    fn wire_blocks(&mut self, pi: OneType, pi2: OneType) -> Result<(), BuildError> {
        let src = self.class(pi);
        let dst = self.class(pi2);
        for (pos, &a) in src.iter().enumerate() {
            let h = (pos + 1) % 3;
            let mut pool = dst.iter().enumerate().filter(|&(p, _)| p % 3 == h).map(|(_, &b)| b);
            for (mu, c) in self.outgoing(a, pi2) {
                for _ in 0..c {
                    let b = loop {
                        let b = pool
                            .next()
                            .ok_or_else(|| BuildError::Internal(format!("block exhausted for element {a}")))?;
                        if b != a && !self.is_set(a, b) {
                            break b;
                        }
                    };
                    self.put(a, b, mu)?;
                }
            }
        }
        Ok(())
    }

    fn step4(&mut self) -> Result<(), BuildError> {
        let n = self.a.n;
        for a in 0..n {
            for b in a + 1..n {
                if self.is_set(a, b) {
                    continue;
                }
                let (p, q) = (self.a.tp(a), self.a.tp(b));
                let key = if p <= q { (p, q) } else { (q, p) };
                let theta = *self.f.theta.get(&key).ok_or_else(|| {
                    BuildError::Internal(format!("pair ({a},{b}) left unassigned outside I"))
                })?;
                if p <= q {
                    self.put(a, b, theta)?;
                } else {
                    self.put(a, b, theta.invert())?;
                }
            }
        }
        Ok(())
    }
}

/// A finite model of `φ*` with exactly `w_k` elements of star-type `σ_k`.
pub fn build(f: &Frame, nf: &NormalForm, space: &TypeSpace, z: u64, w: &[u64]) -> Result<FiniteStructure, BuildError> {
    let pre = |m: &str| Err(BuildError::Precondition(m.to_string()));
    if !validate_frame(f, space) {
        return pre("invalid frame");
    }
    if !is_chromatic_frame(f, space) {
        return pre("frame is not chromatic");
    }
    if !frame_models(f, nf, space).map_err(|e| BuildError::Precondition(e.to_string()))? {
        return pre("frame does not model the normal form");
    }
    let wx: Vec<ExtNat> = w.iter().map(|&x| ExtNat::from(x)).collect();
    if !check_solution(f, space, z, &wx).map_err(|e| BuildError::Precondition(e.to_string()))? {
        return pre("vector is not a solution");
    }
    let mc = nf.m() as u64 * max_count(nf).to_u64().unwrap_or(u64::MAX);
    if z.saturating_add(1) < 3u64.saturating_mul(mc) {
        return pre("Z < 3mC - 1");
    }
    let total: u64 = w.iter().sum();
    if total > MAX_BUILD_ELEMENTS {
        return pre("domain too large to materialise");
    }
    debug_assert_eq!(coefficients(f, space).n, w.len());
    let plan = BuildPlan::new(f, w);
    let n = plan.size();
    let mut a = FiniteStructure::new(space.sig.base.clone(), n);
    for (k, r) in plan.blocks.iter().enumerate() {
        for x in r.clone() {
            a.set_tp(x, f.star_types[k].pi);
        }
    }
    let mut b = Builder { f, space, plan, a, written: vec![false; n * n] };
    b.step2()?;
    b.step3()?;
    b.step4()?;
    Ok(b.a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::describes;
    use crate::frames::fixtures::f_psi;
    use crate::normal_form::{denormalize, scottify};
    use crate::structures::{check_normal_form, check_sentence, star_census};
    use crate::syntax::parse;
    use crate::types::StarType;

    fn psi_nf() -> NormalForm {
        scottify(&parse("Ax E=1 y (f(x,y) & ~(x=y))").unwrap())
    }

    #[test]
    fn psi_five_elements() {
        let (f, sp) = f_psi();
        let nf = psi_nf();
        let a = build(&f, &nf, &sp, 4, &[5]).unwrap();
        assert_eq!(a.n, 5);
        assert!(check_normal_form(&a, &nf).unwrap());
        assert!(check_sentence(&a, &parse("Ax E=1 y (f(x,y) & ~(x=y))").unwrap()).unwrap());
        assert!(check_sentence(&a, &denormalize(&nf)).unwrap());
        assert!(describes(&f, &a, &sp));
        assert_eq!(star_census(&a, &sp).values().copied().collect::<Vec<_>>(), vec![5]);
    }

    #[test]
    fn rejects_non_solutions() {
        let (f, sp) = f_psi();
        assert!(matches!(build(&f, &psi_nf(), &sp, 4, &[3]), Err(BuildError::Precondition(_))));
    }

    #[test]
    fn singleton_sender_to_large_class() {
        // p-element sending one f-message into a large class of ~p elements,
        // which send their own f-message around their class.
        let sig = crate::syntax::Signature::new(vec!["p".into()], vec!["f".into()]);
        let sp = TypeSpace::new(crate::types::CountingSignature::new(sig, &["f".into()]).unwrap()).unwrap();
        let (p, np) = (OneType(1), OneType(0));
        let to_np = sp.message_index(TwoType { tp1: p, tp2: np, fwd: 1, bwd: 0 }).unwrap();
        let within = sp.message_index(TwoType { tp1: np, tp2: np, fwd: 1, bwd: 0 }).unwrap();
        let silent = |a, b| TwoType { tp1: a, tp2: b, fwd: 0, bwd: 0 };
        let f = Frame::new(
            vec![StarType::new(p, vec![(to_np, 1)]), StarType::new(np, vec![(within, 1)])],
            BTreeMap::from([((np, np), silent(np, np)), ((np, p), silent(np, p))]),
        );
        let nf = psi_nf();
        let phi = parse("E=1 x p(x) & Ax E=1 y (f(x,y) & ~(x=y))").unwrap();
        let a = build(&f, &nf, &sp, 4, &[5, 1]).unwrap();
        assert!(check_normal_form(&a, &nf).unwrap());
        assert!(check_sentence(&a, &phi).unwrap());
        assert!(describes(&f, &a, &sp));
    }

    #[test]
    fn single_zero_star_type() {
        let (_, sp) = f_psi();
        let nf = NormalForm {
            alpha: crate::syntax::Formula::True,
            beta: crate::syntax::Formula::True,
            counting_conjuncts: vec![],
            sigma: crate::structures::fixtures::f_sig(),
        };
        let f = Frame::new(vec![StarType::zero(OneType(0))], BTreeMap::new());
        let a = build(&f, &nf, &sp, 0, &[1]).unwrap();
        assert_eq!(a.n, 1);
    }
}
