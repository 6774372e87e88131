//! Finite structures over counting signatures, model checking, structural
//! properties and the chromatic / differentiated expansions.

pub mod search;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::normal_form::NormalForm;
use crate::syntax::{signature_of, Formula, QuantKind, Signature, Var};
use crate::types::{OneType, Qf, StarType, TwoType, TypeSpace, TypesError};

pub use search::{brute_force_search, SearchMode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("formula uses predicates outside the structure's signature")]
    SignatureMismatch,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("malformed structure text at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("domain size {n} exceeds the search cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error(transparent)]
    Types(#[from] TypesError),
}

/// A finite structure on `0..n`: a 1-type per element and a cross assignment
/// per unordered pair, stored once for `a < b` as seen from `a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteStructure {
    pub sig: Signature,
    pub n: usize,
    one_type: Vec<u32>,
    cross: Vec<(u32, u32)>,
}

fn pair_slot(n: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < n);
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

impl FiniteStructure {
    /// All atoms false.
    pub fn new(sig: Signature, n: usize) -> FiniteStructure {
        let pairs = n * n.saturating_sub(1) / 2;
        FiniteStructure { sig, n, one_type: vec![0; n], cross: vec![(0, 0); pairs] }
    }

    pub fn u(&self) -> usize {
        self.sig.unary.len()
    }

    pub fn tp(&self, a: usize) -> OneType {
        OneType(self.one_type[a])
    }

    pub fn set_tp(&mut self, a: usize, pi: OneType) {
        self.one_type[a] = pi.0;
    }

    /// `tp[a,b]` for `a != b`.
    pub fn tp2(&self, a: usize, b: usize) -> TwoType {
        assert_ne!(a, b, "2-types are defined only for distinct elements");
        let (fwd, bwd) = self.cross_of(a, b);
        TwoType { tp1: self.tp(a), tp2: self.tp(b), fwd, bwd }
    }

    /// Cross literals `(f(a,b) mask, f(b,a) mask)`.
    pub fn cross_of(&self, a: usize, b: usize) -> (u32, u32) {
        if a < b {
            self.cross[pair_slot(self.n, a, b)]
        } else {
            let (f, g) = self.cross[pair_slot(self.n, b, a)];
            (g, f)
        }
    }

    pub fn set_cross(&mut self, a: usize, b: usize, fwd: u32, bwd: u32) {
        assert_ne!(a, b);
        if a < b {
            self.cross[pair_slot(self.n, a, b)] = (fwd, bwd);
        } else {
            self.cross[pair_slot(self.n, b, a)] = (bwd, fwd);
        }
    }

    /// Set `tp[a,b] = tau`; the 1-types must already agree.
    pub fn set_tp2(&mut self, a: usize, b: usize, tau: TwoType) {
        debug_assert_eq!(self.tp(a), tau.tp1);
        debug_assert_eq!(self.tp(b), tau.tp2);
        self.set_cross(a, b, tau.fwd, tau.bwd);
    }

    pub fn unary_holds(&self, p: usize, a: usize) -> bool {
        self.one_type[a] >> p & 1 == 1
    }

    pub fn binary_holds(&self, k: usize, a: usize, b: usize) -> bool {
        if a == b {
            self.one_type[a] >> (self.u() + k) & 1 == 1
        } else {
            self.cross_of(a, b).0 >> k & 1 == 1
        }
    }

    pub fn set_unary(&mut self, p: usize, a: usize, val: bool) {
        set_bit(&mut self.one_type[a], p, val);
    }

    pub fn set_binary(&mut self, k: usize, a: usize, b: usize, val: bool) {
        if a == b {
            let bit = self.u() + k;
            set_bit(&mut self.one_type[a], bit, val);
        } else {
            let (mut f, g) = self.cross_of(a, b);
            set_bit(&mut f, k, val);
            self.set_cross(a, b, f, g);
        }
    }

    /// Reinterpret over `target`, which must contain every symbol whose
    /// interpretation is to be kept; symbols of `target` missing here are false.
    pub fn reinterpret(&self, target: &Signature) -> FiniteStructure {
        let mut out = FiniteStructure::new(target.clone(), self.n);
        let umap: Vec<(usize, usize)> = target
            .unary
            .iter()
            .enumerate()
            .filter_map(|(i, p)| self.sig.unary_index(p).map(|j| (i, j)))
            .collect();
        let bmap: Vec<(usize, usize)> = target
            .binary
            .iter()
            .enumerate()
            .filter_map(|(i, p)| self.sig.binary_index(p).map(|j| (i, j)))
            .collect();
        for a in 0..self.n {
            for &(i, j) in &umap {
                out.set_unary(i, a, self.unary_holds(j, a));
            }
            for b in 0..self.n {
                for &(i, j) in &bmap {
                    if self.binary_holds(j, a, b) {
                        out.set_binary(i, a, b, true);
                    }
                }
            }
        }
        out
    }

    /// Restriction to a sub-signature.
    pub fn restrict(&self, sub: &Signature) -> FiniteStructure {
        debug_assert!(self.sig.contains(sub));
        self.reinterpret(sub)
    }

    /// Elements of 1-type `pi`.
    pub fn elements_of(&self, pi: OneType) -> Vec<usize> {
        (0..self.n).filter(|&a| self.tp(a) == pi).collect()
    }

    /// `|A_π|` for every realized 1-type.
    pub fn type_census(&self) -> BTreeMap<OneType, usize> {
        let mut out = BTreeMap::new();
        for a in 0..self.n {
            *out.entry(self.tp(a)).or_insert(0) += 1;
        }
        out
    }

    /// Every realized 2-type.
    pub fn realized_two_types(&self) -> BTreeSet<TwoType> {
        let mut out = BTreeSet::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if a != b {
                    out.insert(self.tp2(a, b));
                }
            }
        }
        out
    }
}

fn set_bit(word: &mut u32, bit: usize, val: bool) {
    if val {
        *word |= 1 << bit;
    } else {
        *word &= !(1 << bit);
    }
}

/// Truth of a sentence (or of a formula under `env`) in `a`.
pub fn check_sentence(a: &FiniteStructure, phi: &Formula) -> Result<bool, StructureError> {
    let sig = signature_of(phi).map_err(|_| StructureError::SignatureMismatch)?;
    if !a.sig.contains(&sig) {
        return Err(StructureError::SignatureMismatch);
    }
    if a.n == 0 {
        return Err(StructureError::Precondition("empty domain".into()));
    }
    let resolved = Resolved::new(phi, &a.sig);
    Ok(eval(a, &resolved, [0, 0]))
}

/// Formula with predicate names resolved to indices.
enum Resolved {
    Const(bool),
    Unary(usize, Var),
    Binary(usize, Var, Var),
    Eq(Var, Var),
    Not(Box<Resolved>),
    And(Box<Resolved>, Box<Resolved>),
    Or(Box<Resolved>, Box<Resolved>),
    Implies(Box<Resolved>, Box<Resolved>),
    Iff(Box<Resolved>, Box<Resolved>),
    Forall(Var, Box<Resolved>),
    Exists(Var, Box<Resolved>),
    /// `lo <= #{d : body} <= hi`
    Count { var: Var, lo: u64, hi: u64, body: Box<Resolved> },
}

impl Resolved {
    fn new(phi: &Formula, sig: &Signature) -> Resolved {
        let r = |f: &Formula| Box::new(Resolved::new(f, sig));
        match phi {
            Formula::True => Resolved::Const(true),
            Formula::False => Resolved::Const(false),
            Formula::Unary(p, v) => Resolved::Unary(sig.unary_index(p).expect("checked"), *v),
            Formula::Binary(f, a, b) => Resolved::Binary(sig.binary_index(f).expect("checked"), *a, *b),
            Formula::Eq(a, b) => Resolved::Eq(*a, *b),
            Formula::Not(a) => Resolved::Not(r(a)),
            Formula::And(a, b) => Resolved::And(r(a), r(b)),
            Formula::Or(a, b) => Resolved::Or(r(a), r(b)),
            Formula::Implies(a, b) => Resolved::Implies(r(a), r(b)),
            Formula::Iff(a, b) => Resolved::Iff(r(a), r(b)),
            Formula::Quant { kind, count, var, body } => {
                let c = count.as_ref().map(|c| c.to_u64().unwrap_or(u64::MAX));
                match kind {
                    QuantKind::Forall => Resolved::Forall(*var, r(body)),
                    QuantKind::Exists => Resolved::Exists(*var, r(body)),
                    QuantKind::AtLeast => {
                        Resolved::Count { var: *var, lo: c.unwrap(), hi: u64::MAX, body: r(body) }
                    }
                    QuantKind::AtMost => Resolved::Count { var: *var, lo: 0, hi: c.unwrap(), body: r(body) },
                    QuantKind::Exactly => {
                        Resolved::Count { var: *var, lo: c.unwrap(), hi: c.unwrap(), body: r(body) }
                    }
                }
            }
        }
    }
}

fn eval(a: &FiniteStructure, phi: &Resolved, env: [usize; 2]) -> bool {
    let val = |v: &Var| env[*v as usize];
    match phi {
        Resolved::Const(b) => *b,
        Resolved::Unary(p, v) => a.unary_holds(*p, val(v)),
        Resolved::Binary(k, x, y) => a.binary_holds(*k, val(x), val(y)),
        Resolved::Eq(x, y) => val(x) == val(y),
        Resolved::Not(f) => !eval(a, f, env),
        Resolved::And(f, g) => eval(a, f, env) && eval(a, g, env),
        Resolved::Or(f, g) => eval(a, f, env) || eval(a, g, env),
        Resolved::Implies(f, g) => !eval(a, f, env) || eval(a, g, env),
        Resolved::Iff(f, g) => eval(a, f, env) == eval(a, g, env),
        Resolved::Forall(v, f) => (0..a.n).all(|d| eval(a, f, with(env, *v, d))),
        Resolved::Exists(v, f) => (0..a.n).any(|d| eval(a, f, with(env, *v, d))),
        Resolved::Count { var, lo, hi, body } => {
            let mut count = 0u64;
            for d in 0..a.n {
                if eval(a, body, with(env, *var, d)) {
                    count += 1;
                    if count > *hi {
                        return false;
                    }
                }
            }
            count >= *lo
        }
    }
}

fn with(mut env: [usize; 2], v: Var, d: usize) -> [usize; 2] {
    env[v as usize] = d;
    env
}

/// Direct check of `∀x α ∧ ∀x∀y(β ∨ x=y) ∧ ⋀ ∀x ∃=C_h y (f_h(x,y) ∧ x≠y)`.
pub fn check_normal_form(a: &FiniteStructure, nf: &NormalForm) -> Result<bool, StructureError> {
    if !a.sig.contains(&nf.sigma) {
        return Err(StructureError::SignatureMismatch);
    }
    let alpha = Qf::compile(&nf.alpha, &a.sig)?;
    let beta = Qf::compile(&nf.beta, &a.sig)?;
    let counting: Vec<(usize, u64)> = nf
        .counting_conjuncts
        .iter()
        .map(|(f, c)| (a.sig.binary_index(f).expect("contained"), c.to_u64().unwrap_or(u64::MAX)))
        .collect();
    for x in 0..a.n {
        if !alpha.eval_one(a.tp(x)) {
            return Ok(false);
        }
        for &(k, c) in &counting {
            let out = (0..a.n).filter(|&y| y != x && a.binary_holds(k, x, y)).count() as u64;
            if out != c {
                return Ok(false);
            }
        }
        for y in x + 1..a.n {
            if !beta.eval_both_ways(&a.tp2(x, y)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn assert_space(a: &FiniteStructure, space: &TypeSpace) {
    assert_eq!(a.sig, space.sig.base, "structure and type space disagree on the signature");
}

/// `pr[a]`: per message-type, how many `b != a` with `tp[a,b] = μ_j`.
pub fn profile_of(a: &FiniteStructure, x: usize, space: &TypeSpace) -> Vec<(u64, u64)> {
    pi_profile(a, x, space, |_| true)
}

/// Profile restricted to targets whose 1-type satisfies `in_pi`.
pub fn pi_profile(
    a: &FiniteStructure,
    x: usize,
    space: &TypeSpace,
    in_pi: impl Fn(OneType) -> bool,
) -> Vec<(u64, u64)> {
    assert_space(a, space);
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for y in 0..a.n {
        if y != x && in_pi(a.tp(y)) {
            if let Some(j) = space.message_index(a.tp2(x, y)) {
                *counts.entry(j).or_insert(0) += 1;
            }
        }
    }
    counts.into_iter().collect()
}

/// `ct[a]`: per counting predicate, how many `b != a` with `f_h(a,b)`.
pub fn count_of(a: &FiniteStructure, x: usize, space: &TypeSpace) -> Vec<u64> {
    pi_count(a, x, space, |_| true)
}

pub fn pi_count(a: &FiniteStructure, x: usize, space: &TypeSpace, in_pi: impl Fn(OneType) -> bool) -> Vec<u64> {
    assert_space(a, space);
    let mut out = vec![0; space.m()];
    for y in 0..a.n {
        if y != x && in_pi(a.tp(y)) {
            let (fwd, _) = a.cross_of(x, y);
            for (h, &k) in space.sig.counting.iter().enumerate() {
                if fwd >> k & 1 == 1 {
                    out[h] += 1;
                }
            }
        }
    }
    out
}

pub fn star_type_of(a: &FiniteStructure, x: usize, space: &TypeSpace) -> StarType {
    StarType { pi: a.tp(x), v: profile_of(a, x, space) }
}

/// Star-type of every element.
pub fn star_types(a: &FiniteStructure, space: &TypeSpace) -> Vec<StarType> {
    (0..a.n).map(|x| star_type_of(a, x, space)).collect()
}

/// Distinct realized star-types with their multiplicities, in star-type order.
pub fn star_census(a: &FiniteStructure, space: &TypeSpace) -> BTreeMap<StarType, u64> {
    let mut out = BTreeMap::new();
    for st in star_types(a, space) {
        *out.entry(st).or_insert(0) += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Chromatic,
    Differentiated(u64),
    Branching(u64),
    Sparse(u64),
}

pub fn check_property(a: &FiniteStructure, space: &TypeSpace, prop: Property) -> bool {
    match prop {
        Property::Chromatic => is_chromatic(a, space),
        Property::Differentiated(z) => a.type_census().values().all(|&u| u <= 1 || u as u64 > z),
        Property::Branching(y) => (0..a.n).all(|x| count_of(a, x, space).iter().all(|&c| c <= y)),
        Property::Sparse(x) => star_census(a, space).len() as u64 <= x,
    }
}

/// Invertible-message neighbours of each element.
fn invertible_neighbours(a: &FiniteStructure, space: &TypeSpace) -> Vec<Vec<usize>> {
    let mut nb = vec![Vec::new(); a.n];
    for x in 0..a.n {
        for y in x + 1..a.n {
            if space.classify(a.tp2(x, y)) == crate::types::TwoTypeClass::MessageInvertible {
                nb[x].push(y);
                nb[y].push(x);
            }
        }
    }
    nb
}

pub fn is_chromatic(a: &FiniteStructure, space: &TypeSpace) -> bool {
    assert_space(a, space);
    let nb = invertible_neighbours(a, space);
    for (mid, list) in nb.iter().enumerate() {
        for (i, &x) in list.iter().enumerate() {
            if a.tp(x) == a.tp(mid) {
                return false;
            }
            for &y in &list[i + 1..] {
                if a.tp(x) == a.tp(y) {
                    return false;
                }
            }
        }
    }
    true
}

/// Pairs of 1-types that are *not* noisy, i.e. realized with a silent 2-type
/// between two distinct elements. Every other pair is noisy.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NoisyPairs {
    quiet: BTreeSet<(OneType, OneType)>,
}

impl NoisyPairs {
    pub fn is_noisy(&self, p: OneType, q: OneType) -> bool {
        !self.quiet.contains(&ordered(p, q))
    }

    /// The non-noisy pairs, each as `(min, max)`.
    pub fn quiet_pairs(&self) -> impl Iterator<Item = &(OneType, OneType)> {
        self.quiet.iter()
    }
}

fn ordered(p: OneType, q: OneType) -> (OneType, OneType) {
    if p <= q {
        (p, q)
    } else {
        (q, p)
    }
}

pub fn noisy_pairs(a: &FiniteStructure, space: &TypeSpace) -> NoisyPairs {
    assert_space(a, space);
    let mut quiet = BTreeSet::new();
    for x in 0..a.n {
        for y in x + 1..a.n {
            if space.is_silent(a.tp2(x, y)) {
                quiet.insert(ordered(a.tp(x), a.tp(y)));
            }
        }
    }
    NoisyPairs { quiet }
}

/// Smallest `k` with `2^k >= n` (0 for `n <= 1`).
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Names `prefix0, prefix1, ...` not clashing with `sig`.
pub fn fresh_unary_names(sig: &Signature, prefix: &str, count: usize) -> Vec<String> {
    let mut p = prefix.to_string();
    while sig.unary.iter().chain(&sig.binary).any(|n| n.starts_with(&p)) {
        p.insert(0, '_');
    }
    (0..count).map(|i| format!("{p}{i}")).collect()
}

/// Add unary predicates encoding `colour[x]` in binary.
fn add_colour_bits(a: &FiniteStructure, names: &[String], colour: &[u64]) -> FiniteStructure {
    let mut sig = a.sig.clone();
    sig.unary.extend(names.iter().cloned());
    let mut out = a.reinterpret(&sig);
    let first = a.sig.unary.len();
    for (x, &c) in colour.iter().enumerate() {
        for (i, _) in names.iter().enumerate() {
            out.set_unary(first + i, x, c >> i & 1 == 1);
        }
    }
    out
}

/// Expand a `Y`-branching structure to a chromatic one by greedily colouring
/// the graph of 1- and 2-step invertible-message chains with `(mY)^2 + 1`
/// colours, in ascending element order.
pub fn expand_chromatic(a: &FiniteStructure, space: &TypeSpace, y: u64) -> Result<FiniteStructure, StructureError> {
    if !check_property(a, space, Property::Branching(y)) {
        return Err(StructureError::Precondition(format!("structure is not {y}-branching")));
    }
    let my = space.m() as u64 * y;
    let colours = my * my + 1;
    let names = fresh_unary_names(&a.sig, "_c", ceil_log2(colours) as usize);
    let nb = invertible_neighbours(a, space);
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); a.n];
    for (mid, list) in nb.iter().enumerate() {
        for &x in list {
            adj[mid].insert(x);
            for &z in list {
                if z != x {
                    adj[x].insert(z);
                }
            }
        }
    }
    let mut colour = vec![u64::MAX; a.n];
    for x in 0..a.n {
        let used: BTreeSet<u64> = adj[x].iter().map(|&z| colour[z]).collect();
        colour[x] = (0..).find(|c| !used.contains(c)).expect("some colour is free");
        debug_assert!(colour[x] < colours, "degree bound violated");
    }
    Ok(add_colour_bits(a, &names, &colour))
}

/// Expand to a `Z`-differentiated structure: each 1-type realized between 2
/// and `Z` times has its elements given distinct colours.
pub fn expand_differentiated(a: &FiniteStructure, z: u64) -> Result<FiniteStructure, StructureError> {
    if z == 0 {
        return Err(StructureError::Precondition("Z must be positive".into()));
    }
    let names = fresh_unary_names(&a.sig, "_d", ceil_log2(z) as usize);
    let census = a.type_census();
    let mut next: BTreeMap<OneType, u64> = BTreeMap::new();
    let mut colour = vec![0; a.n];
    for x in 0..a.n {
        let u = census[&a.tp(x)] as u64;
        if u > 1 && u <= z {
            let c = next.entry(a.tp(x)).or_insert(0);
            colour[x] = *c;
            *c += 1;
        }
    }
    Ok(add_colour_bits(a, &names, &colour))
}

impl FiniteStructure {
    /// Line-based text form:
    ///
    /// ```text
    /// n 2
    /// unary: p
    /// binary: f
    /// elem 0: p ~f(0,0)
    /// elem 1: ~p ~f(1,1)
    /// pair 0 1: f(0,1) ~f(1,0)
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "n {}", self.n).unwrap();
        writeln!(out, "unary:{}", self.sig.unary.iter().map(|p| format!(" {p}")).collect::<String>()).unwrap();
        writeln!(out, "binary:{}", self.sig.binary.iter().map(|p| format!(" {p}")).collect::<String>()).unwrap();
        let lit = |b: bool, s: String| if b { s } else { format!("~{s}") };
        for a in 0..self.n {
            let mut parts = Vec::new();
            for (i, p) in self.sig.unary.iter().enumerate() {
                parts.push(lit(self.unary_holds(i, a), p.clone()));
            }
            for (k, f) in self.sig.binary.iter().enumerate() {
                parts.push(lit(self.binary_holds(k, a, a), format!("{f}({a},{a})")));
            }
            writeln!(out, "elem {a}:{}", parts.iter().map(|p| format!(" {p}")).collect::<String>()).unwrap();
        }
        for a in 0..self.n {
            for b in a + 1..self.n {
                let mut parts = Vec::new();
                for (k, f) in self.sig.binary.iter().enumerate() {
                    parts.push(lit(self.binary_holds(k, a, b), format!("{f}({a},{b})")));
                    parts.push(lit(self.binary_holds(k, b, a), format!("{f}({b},{a})")));
                }
                writeln!(out, "pair {a} {b}:{}", parts.iter().map(|p| format!(" {p}")).collect::<String>())
                    .unwrap();
            }
        }
        out
    }

    /// Inverse of [`FiniteStructure::to_text`]; omitted literals are false.
    pub fn from_text(text: &str) -> Result<FiniteStructure, StructureError> {
        let err = |line: usize, msg: &str| StructureError::Parse { line: line + 1, msg: msg.to_string() };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (i, first) = lines.next().ok_or_else(|| err(0, "empty input"))?;
        let n: usize = first
            .strip_prefix("n ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err(i, "expected `n <size>`"))?;
        let (i, un) = lines.next().ok_or_else(|| err(i, "missing unary line"))?;
        let unary = un.strip_prefix("unary:").ok_or_else(|| err(i, "expected `unary:`"))?;
        let (i, bin) = lines.next().ok_or_else(|| err(i, "missing binary line"))?;
        let binary = bin.strip_prefix("binary:").ok_or_else(|| err(i, "expected `binary:`"))?;
        let sig = Signature::new(
            unary.split_whitespace().map(String::from).collect(),
            binary.split_whitespace().map(String::from).collect(),
        );
        let mut a = FiniteStructure::new(sig, n);
        for (i, line) in lines {
            let (head, body) = line.split_once(':').ok_or_else(|| err(i, "expected `:`"))?;
            let elem = match head.split_whitespace().collect::<Vec<_>>().as_slice() {
                ["elem", x] => Some(x.parse::<usize>().ok().filter(|&x| x < n).ok_or_else(|| err(i, "bad element"))?),
                ["pair", _, _] => None,
                _ => return Err(err(i, "expected `elem` or `pair`")),
            };
            for tok in body.split_whitespace() {
                if tok.starts_with('~') {
                    continue;
                }
                a.apply_atom(tok, elem).map_err(|m| err(i, &m))?;
            }
        }
        Ok(a)
    }

    fn apply_atom(&mut self, atom: &str, elem: Option<usize>) -> Result<(), String> {
        if let Some((name, args)) = atom.strip_suffix(')').and_then(|s| s.split_once('(')) {
            let nums: Vec<usize> = args
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad element in `{atom}`")))
                .collect::<Result<_, _>>()?;
            let k = self.sig.binary_index(name).ok_or_else(|| format!("unknown binary `{name}`"))?;
            match nums.as_slice() {
                [x, y] if *x < self.n && *y < self.n => {
                    self.set_binary(k, *x, *y, true);
                    Ok(())
                }
                _ => Err(format!("bad arguments in `{atom}`")),
            }
        } else {
            let x = elem.ok_or_else(|| format!("unary literal `{atom}` outside an elem line"))?;
            let p = self.sig.unary_index(atom).ok_or_else(|| format!("unknown unary `{atom}`"))?;
            self.set_unary(p, x, true);
            Ok(())
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::types::CountingSignature;

    pub fn f_sig() -> Signature {
        Signature::new(vec![], vec!["f".into()])
    }

    pub fn f_space() -> TypeSpace {
        TypeSpace::new(CountingSignature::new(f_sig(), &["f".into()]).unwrap()).unwrap()
    }

    /// Directed cycle on `n` elements.
    pub fn cycle(n: usize) -> FiniteStructure {
        let mut a = FiniteStructure::new(f_sig(), n);
        for x in 0..n {
            a.set_binary(0, x, (x + 1) % n, true);
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::syntax::parse;

    const PHI_INF: &str = "Ax E=1 y (f(x,y) & ~(x=y)) & Ay E<=1 x (f(x,y) & ~(x=y)) & Ey Ax ~f(x,y)";

    #[test]
    fn check_sentence_examples() {
        let psi = parse("Ax E=1 y (f(x,y) & ~(x=y))").unwrap();
        assert!(check_sentence(&cycle(3), &psi).unwrap());
        let mut single = FiniteStructure::new(f_sig(), 1);
        single.set_binary(0, 0, 0, true);
        assert!(!check_sentence(&single, &psi).unwrap());
        assert!(!check_sentence(&cycle(3), &parse(PHI_INF).unwrap()).unwrap());
        assert!(matches!(
            check_sentence(&cycle(3), &parse("Ax p(x)").unwrap()),
            Err(StructureError::SignatureMismatch)
        ));
    }

    #[test]
    fn profiles_of_cycle() {
        let sp = f_space();
        let a = cycle(3);
        let pr = profile_of(&a, 0, &sp);
        assert_eq!(pr.len(), 1);
        assert_eq!(pr[0].1, 1);
        let mu = sp.message(pr[0].0);
        assert_eq!((mu.tp1, mu.tp2, mu.fwd, mu.bwd), (OneType(0), OneType(0), 1, 0));
        assert_eq!(count_of(&a, 0, &sp), vec![1]);
        let one = FiniteStructure::new(f_sig(), 1);
        assert!(profile_of(&one, 0, &sp).is_empty());
        assert_eq!(count_of(&one, 0, &sp), vec![0]);
    }

    #[test]
    fn properties() {
        let sp = f_space();
        let mut two = FiniteStructure::new(f_sig(), 2);
        two.set_binary(0, 0, 1, true);
        two.set_binary(0, 1, 0, true);
        assert!(!check_property(&two, &sp, Property::Chromatic));
        let c3 = cycle(3);
        assert!(check_property(&c3, &sp, Property::Branching(1)));
        assert!(!check_property(&c3, &sp, Property::Branching(0)));
        let pair = FiniteStructure::new(f_sig(), 2);
        assert!(!check_property(&pair, &sp, Property::Differentiated(4)));
        assert!(check_property(&pair, &sp, Property::Sparse(1)));
    }

    #[test]
    fn noisy_examples() {
        let sp = f_space();
        let pair = FiniteStructure::new(f_sig(), 2);
        assert!(!noisy_pairs(&pair, &sp).is_noisy(OneType(0), OneType(0)));
        assert!(noisy_pairs(&cycle(3), &sp).is_noisy(OneType(0), OneType(0)));
        let one = FiniteStructure::new(f_sig(), 1);
        let np = noisy_pairs(&one, &sp);
        assert!(np.is_noisy(OneType(0), OneType(0)));
        assert!(np.is_noisy(OneType(0), OneType(1)));
    }

    #[test]
    fn expansions() {
        let sp = f_space();
        let mut two = FiniteStructure::new(f_sig(), 2);
        two.set_binary(0, 0, 1, true);
        two.set_binary(0, 1, 0, true);
        let ch = expand_chromatic(&two, &sp, 1).unwrap();
        assert_eq!(ch.sig.unary.len(), 1);
        let sp2 = TypeSpace::new(crate::types::CountingSignature::new(ch.sig.clone(), &["f".into()]).unwrap()).unwrap();
        assert!(is_chromatic(&ch, &sp2));
        assert_eq!(ch.restrict(&f_sig()), two);
        assert!(expand_chromatic(&cycle(3), &sp, 0).is_err());

        let three = FiniteStructure::new(f_sig(), 3);
        let d = expand_differentiated(&three, 4).unwrap();
        assert_eq!(d.sig.unary.len(), 2);
        let spd = TypeSpace::new(crate::types::CountingSignature::new(d.sig.clone(), &["f".into()]).unwrap()).unwrap();
        assert!(check_property(&d, &spd, Property::Differentiated(4)));
        let same = expand_differentiated(&three, 1).unwrap();
        assert_eq!(same, three);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(10), 4);
    }

    #[test]
    fn text_format_golden() {
        let mut a = FiniteStructure::new(Signature::new(vec!["p".into()], vec!["f".into()]), 2);
        a.set_unary(0, 0, true);
        a.set_binary(0, 0, 1, true);
        let text = a.to_text();
        let golden = "n 2\nunary: p\nbinary: f\nelem 0: p ~f(0,0)\nelem 1: ~p ~f(1,1)\npair 0 1: f(0,1) ~f(1,0)\n";
        assert_eq!(text, golden);
        assert_eq!(FiniteStructure::from_text(&text).unwrap(), a);
    }
}
