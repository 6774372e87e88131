//! 1-types, 2-types, message-types and star-types over a counting signature.
//!
//! A 1-type is a bitmask: bit `i` (for `i < u`) is the unary predicate
//! `p_i(x)`, bit `u + k` is the diagonal `f_k(x,x)`. A 2-type adds two cross
//! masks over the binary predicates: `fwd` holds `f_k(x,y)`, `bwd` holds
//! `f_k(y,x)`.
//!
//! Message-types are numbered `0..M`: invertible ones first (`0..M*`), then
//! the non-invertible ones. Within each block the order is by
//! `(tp1, tp2, cross code)` with cross code `fwd | bwd << b`.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::syntax::{Formula, Signature, Var};

pub const DEFAULT_MAX_SYMBOLS: usize = 16;
/// The cross-code tables hold `4^b` entries.
pub const MAX_BINARY: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypesError {
    #[error("signature has {s} symbols, above the cap of {cap}")]
    TooManySymbols { s: usize, cap: usize },
    #[error("signature has {b} binary predicates, above the cap of {cap}")]
    TooManyBinary { b: usize, cap: usize },
    #[error("predicate `{0}` is not in the signature")]
    UnknownPredicate(String),
    #[error("formula is not quantifier-free")]
    Quantified,
    #[error("counting predicate `{0}` is not a binary predicate of the signature")]
    NotBinary(String),
}

/// A signature with a distinguished list of counting predicates `f_1..f_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CountingSignature {
    pub base: Signature,
    /// Indices into `base.binary`, in the order `f_1..f_m`.
    pub counting: Vec<usize>,
}

impl CountingSignature {
    pub fn new(base: Signature, counting_names: &[String]) -> Result<Self, TypesError> {
        let counting = counting_names
            .iter()
            .map(|n| base.binary_index(n).ok_or_else(|| TypesError::NotBinary(n.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CountingSignature { base, counting })
    }

    pub fn m(&self) -> usize {
        self.counting.len()
    }

    pub fn s(&self) -> usize {
        self.base.len()
    }

    pub fn counting_mask(&self) -> u32 {
        self.counting.iter().fold(0, |acc, &k| acc | (1 << k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct OneType(pub u32);

impl OneType {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn bit(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoType {
    pub tp1: OneType,
    pub tp2: OneType,
    pub fwd: u32,
    pub bwd: u32,
}

impl TwoType {
    pub fn invert(self) -> TwoType {
        TwoType { tp1: self.tp2, tp2: self.tp1, fwd: self.bwd, bwd: self.fwd }
    }
}

pub fn invert(tau: TwoType) -> TwoType {
    tau.invert()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TwoTypeClass {
    MessageInvertible,
    MessageNonInvertible,
    ReverseOnly,
    Silent,
}

/// Precomputed numbering of 1-types and message-types for one counting signature.
#[derive(Debug, Clone)]
pub struct TypeSpace {
    pub sig: CountingSignature,
    pub u: usize,
    pub b: usize,
    pub s: usize,
    /// Number of 1-types, `2^s`.
    pub l: u64,
    pub counting_mask: u32,
    /// rank of each cross code within its block (invertible / non-invertible)
    code_rank: Vec<u32>,
    inv_codes: Vec<u32>,
    noninv_codes: Vec<u32>,
    silent_codes: Vec<u32>,
    /// Number of invertible message-types.
    pub m_star: u64,
    /// Number of message-types.
    pub m_total: u64,
}

impl TypeSpace {
    pub fn new(sig: CountingSignature) -> Result<TypeSpace, TypesError> {
        Self::with_cap(sig, DEFAULT_MAX_SYMBOLS)
    }

    pub fn with_cap(sig: CountingSignature, cap: usize) -> Result<TypeSpace, TypesError> {
        let u = sig.base.unary.len();
        let b = sig.base.binary.len();
        let s = u + b;
        if s > cap || s > 31 {
            return Err(TypesError::TooManySymbols { s, cap });
        }
        if b > MAX_BINARY {
            return Err(TypesError::TooManyBinary { b, cap: MAX_BINARY });
        }
        let cm = sig.counting_mask();
        let n_codes = 1usize << (2 * b);
        let mut code_rank = vec![0; n_codes];
        let (mut inv_codes, mut noninv_codes, mut silent_codes) = (vec![], vec![], vec![]);
        let low = (1u32 << b) - 1;
        for c in 0..n_codes as u32 {
            let (fwd, bwd) = (c & low, c >> b);
            let (out, back) = (fwd & cm != 0, bwd & cm != 0);
            if out && back {
                code_rank[c as usize] = inv_codes.len() as u32;
                inv_codes.push(c);
            } else if out {
                code_rank[c as usize] = noninv_codes.len() as u32;
                noninv_codes.push(c);
            } else if !back {
                silent_codes.push(c);
            }
        }
        let l = 1u64 << s;
        let m_star = l * l * inv_codes.len() as u64;
        let m_total = m_star + l * l * noninv_codes.len() as u64;
        Ok(TypeSpace {
            sig,
            u,
            b,
            s,
            l,
            counting_mask: cm,
            code_rank,
            inv_codes,
            noninv_codes,
            silent_codes,
            m_star,
            m_total,
        })
    }

    pub fn m(&self) -> usize {
        self.sig.m()
    }

    pub fn one_types(&self) -> impl Iterator<Item = OneType> {
        (0..self.l as u32).map(OneType)
    }

    /// Bit of the 1-type holding the diagonal of binary predicate `k`.
    pub fn diag_bit(&self, k: usize) -> usize {
        self.u + k
    }

    fn code(&self, fwd: u32, bwd: u32) -> u32 {
        fwd | bwd << self.b
    }

    pub fn classify(&self, tau: TwoType) -> TwoTypeClass {
        let out = tau.fwd & self.counting_mask != 0;
        let back = tau.bwd & self.counting_mask != 0;
        match (out, back) {
            (true, true) => TwoTypeClass::MessageInvertible,
            (true, false) => TwoTypeClass::MessageNonInvertible,
            (false, true) => TwoTypeClass::ReverseOnly,
            (false, false) => TwoTypeClass::Silent,
        }
    }

    pub fn is_message(&self, tau: TwoType) -> bool {
        tau.fwd & self.counting_mask != 0
    }

    pub fn is_silent(&self, tau: TwoType) -> bool {
        self.classify(tau) == TwoTypeClass::Silent
    }

    /// Index `j` of a message-type, `None` for non-messages.
    pub fn message_index(&self, tau: TwoType) -> Option<u64> {
        let code = self.code(tau.fwd, tau.bwd);
        let pair = tau.tp1.0 as u64 * self.l + tau.tp2.0 as u64;
        let rank = self.code_rank[code as usize] as u64;
        match self.classify(tau) {
            TwoTypeClass::MessageInvertible => Some(pair * self.inv_codes.len() as u64 + rank),
            TwoTypeClass::MessageNonInvertible => {
                Some(self.m_star + pair * self.noninv_codes.len() as u64 + rank)
            }
            _ => None,
        }
    }

    /// The message-type `μ_j`.
    pub fn message(&self, j: u64) -> TwoType {
        assert!(j < self.m_total, "message index out of range");
        let (block, codes) = if j < self.m_star {
            (j, &self.inv_codes)
        } else {
            (j - self.m_star, &self.noninv_codes)
        };
        let k = codes.len() as u64;
        let pair = block / k;
        let code = codes[(block % k) as usize];
        let low = (1u32 << self.b) - 1;
        TwoType {
            tp1: OneType((pair / self.l) as u32),
            tp2: OneType((pair % self.l) as u32),
            fwd: code & low,
            bwd: code >> self.b,
        }
    }

    pub fn is_invertible_index(&self, j: u64) -> bool {
        j < self.m_star
    }

    /// Index of `μ_j⁻¹` for invertible `j`.
    pub fn inverse_index(&self, j: u64) -> u64 {
        debug_assert!(self.is_invertible_index(j));
        self.message_index(self.message(j).invert()).expect("inverse of invertible message")
    }

    /// Every 2-type with the given 1-types, by cross code.
    pub fn two_types_between(&self, tp1: OneType, tp2: OneType) -> impl Iterator<Item = TwoType> + '_ {
        let low = (1u32 << self.b) - 1;
        (0..1u32 << (2 * self.b)).map(move |c| TwoType { tp1, tp2, fwd: c & low, bwd: c >> self.b })
    }

    /// Silent 2-types with the given 1-types, in increasing cross code.
    pub fn silent_between(&self, tp1: OneType, tp2: OneType) -> impl Iterator<Item = TwoType> + '_ {
        let low = (1u32 << self.b) - 1;
        self.silent_codes
            .iter()
            .map(move |&c| TwoType { tp1, tp2, fwd: c & low, bwd: c >> self.b })
    }

    /// Message cross codes `(fwd, bwd)`: invertible ones, then non-invertible ones.
    pub fn message_codes(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let low = (1u32 << self.b) - 1;
        self.inv_codes
            .iter()
            .chain(self.noninv_codes.iter())
            .map(move |&c| (c & low, c >> self.b))
    }

    pub fn all_two_types(&self) -> impl Iterator<Item = TwoType> + '_ {
        self.one_types().flat_map(move |a| {
            self.one_types().flat_map(move |b| self.two_types_between(a, b).collect::<Vec<_>>())
        })
    }

    /// `h`-th counting predicate occurs as `f_h(x,y)` in `tau`.
    pub fn sends(&self, tau: TwoType, h: usize) -> bool {
        tau.fwd >> self.sig.counting[h] & 1 == 1
    }

    pub fn chromatic_star(&self, sigma: &StarType) -> bool {
        star_is_chromatic(sigma, self)
    }

    /// Human-readable literal list of a 1-type, e.g. `p ~q f`.
    pub fn one_type_literals(&self, pi: OneType) -> String {
        let mut out = Vec::new();
        for (i, p) in self.sig.base.unary.iter().enumerate() {
            out.push(if pi.bit(i) { p.clone() } else { format!("~{p}") });
        }
        for (k, f) in self.sig.base.binary.iter().enumerate() {
            let name = format!("{f}(x,x)");
            out.push(if pi.bit(self.u + k) { name } else { format!("~{name}") });
        }
        out.join(" ")
    }

    /// Cross literals of a 2-type, e.g. `f(x,y) ~f(y,x)`.
    pub fn cross_literals(&self, fwd: u32, bwd: u32) -> String {
        let mut out = Vec::new();
        for (k, f) in self.sig.base.binary.iter().enumerate() {
            let a = format!("{f}(x,y)");
            let b = format!("{f}(y,x)");
            out.push(if fwd >> k & 1 == 1 { a } else { format!("~{a}") });
            out.push(if bwd >> k & 1 == 1 { b } else { format!("~{b}") });
        }
        out.join(" ")
    }
}

/// `⟨π, v̄⟩` with `v̄` stored sparsely: sorted `(j, v_j)` with `v_j > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StarType {
    pub pi: OneType,
    pub v: Vec<(u64, u64)>,
}

impl StarType {
    pub fn new(pi: OneType, mut v: Vec<(u64, u64)>) -> StarType {
        v.retain(|&(_, c)| c > 0);
        v.sort_unstable();
        StarType { pi, v }
    }

    pub fn zero(pi: OneType) -> StarType {
        StarType { pi, v: Vec::new() }
    }

    pub fn get(&self, j: u64) -> u64 {
        self.v.binary_search_by_key(&j, |&(i, _)| i).map_or(0, |p| self.v[p].1)
    }

    pub fn total(&self) -> u64 {
        self.v.iter().map(|&(_, c)| c).sum()
    }

    /// Every nonzero entry is a message leaving `pi`.
    pub fn is_valid(&self, space: &TypeSpace) -> bool {
        self.v.windows(2).all(|w| w[0].0 < w[1].0)
            && self.v.iter().all(|&(j, c)| c > 0 && j < space.m_total && space.message(j).tp1 == self.pi)
    }
}

/// Lexicographic on the dense vector.
fn cmp_sparse(a: &[(u64, u64)], b: &[(u64, u64)]) -> Ordering {
    let (mut i, mut k) = (0, 0);
    loop {
        match (a.get(i), b.get(k)) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some(&(ja, va)), Some(&(jb, vb))) => {
                if ja == jb {
                    if va != vb {
                        return va.cmp(&vb);
                    }
                    i += 1;
                    k += 1;
                } else if ja < jb {
                    // a has a nonzero where b has 0
                    return Ordering::Greater;
                } else {
                    return Ordering::Less;
                }
            }
        }
    }
}

impl Ord for StarType {
    fn cmp(&self, other: &Self) -> Ordering {
        self.pi.cmp(&other.pi).then_with(|| cmp_sparse(&self.v, &other.v))
    }
}

impl PartialOrd for StarType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for StarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pi={} v=[", self.pi.0)?;
        for (n, (j, c)) in self.v.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}:{c}")?;
        }
        write!(f, "]")
    }
}

/// Invertible multiplicities towards each 1-type sum to at most 1, and to 0
/// towards the star-type's own 1-type.
pub fn star_is_chromatic(sigma: &StarType, space: &TypeSpace) -> bool {
    let mut seen: Vec<u32> = Vec::new();
    for &(j, c) in &sigma.v {
        if !space.is_invertible_index(j) {
            break;
        }
        let tp2 = space.message(j).tp2;
        if c > 1 || tp2 == sigma.pi || seen.contains(&tp2.0) {
            return false;
        }
        seen.push(tp2.0);
    }
    true
}

/// Which component of a 2-type a literal reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Tp1,
    Tp2,
    Fwd,
    Bwd,
}

/// A quantifier-free formula with atoms resolved to bit positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Qf {
    Const(bool),
    Lit(SlotBit),
    Not(Box<Qf>),
    And(Vec<Qf>),
    Or(Vec<Qf>),
    Iff(Box<Qf>, Box<Qf>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotBit {
    slot: Slot,
    bit: u8,
}

impl Qf {
    /// Resolve the atoms of `phi` against `sig`. Equality `x=y` reads as false
    /// (2-types describe distinct elements); `v=v` reads as true.
    pub fn compile(phi: &Formula, sig: &Signature) -> Result<Qf, TypesError> {
        let u = sig.unary.len();
        let c = |f: &Formula| Qf::compile(f, sig);
        Ok(match phi {
            Formula::True => Qf::Const(true),
            Formula::False => Qf::Const(false),
            Formula::Unary(p, v) => {
                let i = sig.unary_index(p).ok_or_else(|| TypesError::UnknownPredicate(p.clone()))?;
                let slot = if *v == Var::X { Slot::Tp1 } else { Slot::Tp2 };
                Qf::Lit(SlotBit { slot, bit: i as u8 })
            }
            Formula::Binary(f, a, b) => {
                let k = sig.binary_index(f).ok_or_else(|| TypesError::UnknownPredicate(f.clone()))?;
                let (slot, bit) = match (a, b) {
                    (Var::X, Var::X) => (Slot::Tp1, u + k),
                    (Var::Y, Var::Y) => (Slot::Tp2, u + k),
                    (Var::X, Var::Y) => (Slot::Fwd, k),
                    (Var::Y, Var::X) => (Slot::Bwd, k),
                };
                Qf::Lit(SlotBit { slot, bit: bit as u8 })
            }
            Formula::Eq(a, b) => Qf::Const(a == b),
            Formula::Not(a) => Qf::Not(Box::new(c(a)?)),
            Formula::And(a, b) => Qf::And(vec![c(a)?, c(b)?]),
            Formula::Or(a, b) => Qf::Or(vec![c(a)?, c(b)?]),
            Formula::Implies(a, b) => Qf::Or(vec![Qf::Not(Box::new(c(a)?)), c(b)?]),
            Formula::Iff(a, b) => Qf::Iff(Box::new(c(a)?), Box::new(c(b)?)),
            Formula::Quant { .. } => return Err(TypesError::Quantified),
        })
    }

    pub fn eval(&self, tau: &TwoType) -> bool {
        match self {
            Qf::Const(b) => *b,
            Qf::Lit(SlotBit { slot, bit }) => {
                let word = match slot {
                    Slot::Tp1 => tau.tp1.0,
                    Slot::Tp2 => tau.tp2.0,
                    Slot::Fwd => tau.fwd,
                    Slot::Bwd => tau.bwd,
                };
                word >> bit & 1 == 1
            }
            Qf::Not(a) => !a.eval(tau),
            Qf::And(xs) => xs.iter().all(|x| x.eval(tau)),
            Qf::Or(xs) => xs.iter().any(|x| x.eval(tau)),
            Qf::Iff(a, b) => a.eval(tau) == b.eval(tau),
        }
    }

    /// Evaluate a formula in `x` only on a 1-type.
    pub fn eval_one(&self, pi: OneType) -> bool {
        self.eval(&TwoType { tp1: pi, tp2: pi, fwd: 0, bwd: 0 })
    }

    /// `tau ⊨ φ(x,y) ∧ φ(y,x)`.
    pub fn eval_both_ways(&self, tau: &TwoType) -> bool {
        self.eval(tau) && self.eval(&tau.invert())
    }

    /// Bits of 1-types read by this formula (via either variable).
    pub fn one_type_bits(&self) -> u32 {
        match self {
            Qf::Const(_) => 0,
            Qf::Lit(SlotBit { slot: Slot::Tp1 | Slot::Tp2, bit }) => 1 << bit,
            Qf::Lit(_) => 0,
            Qf::Not(a) => a.one_type_bits(),
            Qf::And(xs) | Qf::Or(xs) => xs.iter().fold(0, |m, x| m | x.one_type_bits()),
            Qf::Iff(a, b) => a.one_type_bits() | b.one_type_bits(),
        }
    }

    /// Binary predicates read between `x` and `y` (either direction).
    pub fn cross_bits(&self) -> u32 {
        match self {
            Qf::Const(_) => 0,
            Qf::Lit(SlotBit { slot: Slot::Fwd | Slot::Bwd, bit }) => 1 << bit,
            Qf::Lit(_) => 0,
            Qf::Not(a) => a.cross_bits(),
            Qf::And(xs) | Qf::Or(xs) => xs.iter().fold(0, |m, x| m | x.cross_bits()),
            Qf::Iff(a, b) => a.cross_bits() | b.cross_bits(),
        }
    }
}

/// Truth of a quantifier-free formula under a 2-type.
pub fn eval_qf(phi: &Formula, tau: &TwoType, sig: &Signature) -> Result<bool, TypesError> {
    Ok(Qf::compile(phi, sig)?.eval(tau))
}

/// Truth of a quantifier-free formula in `x` under a 1-type.
pub fn eval_qf_one(phi: &Formula, pi: OneType, sig: &Signature) -> Result<bool, TypesError> {
    Ok(Qf::compile(phi, sig)?.eval_one(pi))
}

pub fn enumerate_one_types(sig: &CountingSignature) -> Result<Vec<OneType>, TypesError> {
    Ok(TypeSpace::new(sig.clone())?.one_types().collect())
}
