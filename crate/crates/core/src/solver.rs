//! Decision procedures for finite and general satisfiability.
//!
//! Both run a small-domain phase (exhaustive model search up to a cap) and a
//! frame phase: a search for a chromatic frame over the extended signature
//! whose constraint system has a solution. A frame over the extended
//! signature with a finite solution is turned into a model and re-checked;
//! in general mode the frame and its solution are the certificate.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::approximation::sparsity_bound;
use crate::counting_solver::{check_solution, solve_extended, solve_finite, ExtNat, SolveBudget, SolveOutcome};
use crate::frames::Frame;
use crate::model_builder::build;
use crate::normal_form::{max_count, scottify, NormalForm};
use crate::structures::search::{brute_force_search_capped, SearchMode};
use crate::structures::{ceil_log2, check_sentence, fresh_unary_names, FiniteStructure};
use crate::syntax::{signature_of, Formula};
use crate::types::{CountingSignature, OneType, Qf, StarType, TwoType, TypeSpace};

/// Node budget handed to the counting solver for each candidate frame.
const SOLVER_NODES: u64 = 20_000;
/// Most candidate star-types held for one extension level.
const POOL_CAP: usize = 200_000;
/// Most search nodes spent listing the star-types of one 1-type.
const GENERATION_NODES: u64 = 5_000_000;
/// Most `β` evaluations spent enumerating the messages of one level.
const LEVEL_WORK_CAP: u64 = 50_000_000;
/// Most free 1-type bits the frame search will enumerate.
const MAX_FREE_BITS: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("constant overflow: {0}")]
    Overflow(&'static str),
    #[error("signature too large for the frame search: {0}")]
    Signature(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConstants {
    pub m: u64,
    pub c: u64,
    pub z: u64,
    /// Symbols of the extended signature.
    pub s: u64,
    pub l: BigUint,
    pub m_total: BigUint,
    pub m_star: BigUint,
    pub x: BigUint,
    /// Number of unary predicates added by the extension.
    pub extension: u64,
    pub extended_signature: CountingSignature,
}

impl SolverConstants {
    pub fn space(&self) -> Result<TypeSpace, SolverError> {
        let sig = &self.extended_signature;
        // Message indices are `L² · codes`, kept within u64.
        if 2 * sig.s() + 2 * sig.base.binary.len() > 62 {
            return Err(SolverError::Signature(format!("{} symbols", sig.s())));
        }
        TypeSpace::with_cap(sig.clone(), 31).map_err(|e| SolverError::Signature(e.to_string()))
    }
}

/// `Z = max(3mC−1, (mC+1)²)`.
pub fn z_constant(m: u64, c: u64) -> Option<u64> {
    let mc = m.checked_mul(c)?;
    let a = mc.checked_mul(3)?.saturating_sub(1);
    let b = mc.checked_add(1)?.checked_pow(2)?;
    Some(a.max(b))
}

/// `⌈log₂((mC)²+1)⌉ + ⌈log₂ Z⌉`.
pub fn extension_count(m: u64, c: u64, z: u64) -> Option<u64> {
    let sq = m.checked_mul(c)?.checked_pow(2)?.checked_add(1)?;
    Some(u64::from(ceil_log2(sq)) + u64::from(ceil_log2(z)))
}

/// `(L, M, M*)` for `s` symbols, `b` of them binary, `m` of those counting.
pub fn message_counts(s: u64, b: u64, m: u64) -> (BigUint, BigUint, BigUint) {
    let l = BigUint::from(1u8) << s;
    let all = BigUint::from(1u8) << b;
    let quiet = BigUint::from(1u8) << (b - m);
    let loud = &all - &quiet;
    let l2 = &l * &l;
    let m_star = &l2 * &loud * &loud;
    let m_total = &m_star + &l2 * &loud * &quiet;
    (l, m_total, m_star)
}

pub fn constants(nf: &NormalForm) -> Result<SolverConstants, SolverError> {
    let m = nf.m() as u64;
    let c = max_count(nf).to_u64().ok_or(SolverError::Overflow("C"))?;
    let z = z_constant(m, c).ok_or(SolverError::Overflow("Z"))?;
    let extension = extension_count(m, c, z).ok_or(SolverError::Overflow("extension"))?;
    let names = fresh_unary_names(&nf.sigma, "_e", extension as usize);
    let mut base = nf.sigma.clone();
    base.unary.extend(names);
    let extended_signature = CountingSignature::new(base, &nf.counting_names())
        .map_err(|e| SolverError::Signature(e.to_string()))?;
    let s = extended_signature.s() as u64;
    let b = extended_signature.base.binary.len() as u64;
    let (l, m_total, m_star) = message_counts(s, b, m);
    Ok(SolverConstants { m, c, z, s, l, m_total, m_star, x: sparsity_bound(s, m, c), extension, extended_signature })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Finite,
    General,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBudget {
    /// Largest frame dimension tried.
    pub max_star_types: usize,
    /// Most candidate frames handed to the counting solver.
    pub max_frames: u64,
    /// Largest domain of the small-domain phase.
    pub max_small_domain: usize,
    pub time_limit: Option<Duration>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_star_types: 8, max_frames: 5_000, max_small_domain: 6, time_limit: Some(Duration::from_secs(60)) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameSearch {
    Found(Frame, Vec<ExtNat>),
    /// No frame has a solution: the whole space was covered.
    None,
    /// A cap was hit first.
    Exhausted(String),
}

/// Search for a chromatic, `C`-bounded frame modelling `nf` whose system has a
/// solution (finite, or over `ℕ ∪ {ℵ₀}` in general mode).
///
/// Extension levels run from no extra predicates up to the full extension;
/// only the last level can prove that no frame exists.
pub fn frame_search(nf: &NormalForm, consts: &SolverConstants, mode: Mode, budget: &SearchBudget) -> FrameSearch {
    let deadline = budget.time_limit.map(|t| Instant::now() + t);
    frame_search_until(nf, consts, mode, budget, deadline)
}

fn frame_search_until(
    nf: &NormalForm,
    consts: &SolverConstants,
    mode: Mode,
    budget: &SearchBudget,
    deadline: Option<Instant>,
) -> FrameSearch {
    // Erasing the extension bits maps any frame onto a closed set of
    // star-types over the read bits alone, once colour constraints are
    // dropped. If even that relaxed pool is empty, no level has a frame.
    if let Ok(base) = CountingSignature::new(nf.sigma.clone(), &nf.counting_names()) {
        let base = SolverConstants { extension: 0, extended_signature: base, ..consts.clone() };
        if let Ok(space) = base.space() {
            if let Ok(mut relaxed) = Searcher::new(nf, &base, &space, mode, budget, deadline) {
                relaxed.relaxed = true;
                match relaxed.set_level(0) {
                    Ok(()) if relaxed.complete && relaxed.pool.stars.is_empty() => return FrameSearch::None,
                    Ok(()) => {}
                    Err(Stop(reason)) => return FrameSearch::Exhausted(reason),
                }
            }
        }
    }
    let space = match consts.space() {
        Ok(s) => s,
        Err(e) => return FrameSearch::Exhausted(e.to_string()),
    };
    let mut searcher = match Searcher::new(nf, consts, &space, mode, budget, deadline) {
        Ok(s) => s,
        Err(e) => return FrameSearch::Exhausted(e.to_string()),
    };
    let ext = consts.extension as u32;
    let mut last = Ok(None);
    for level in 0..=ext {
        if let Err(Stop(reason)) = searcher.set_level(level) {
            return FrameSearch::Exhausted(reason);
        }
        last = searcher.run();
        match &last {
            Ok(Some(_)) | Err(_) => break,
            Ok(None) => {}
        }
    }
    match last {
        Ok(Some((f, w))) => FrameSearch::Found(f, w),
        Err(Stop(reason)) => FrameSearch::Exhausted(reason),
        // Every frame of a lower level is also a frame of the top level, so
        // only the top level decides.
        Ok(None) if !searcher.complete => FrameSearch::Exhausted(searcher.gap.clone()),
        Ok(None) => {
            let n = searcher.pool.stars.len();
            if budget.max_star_types >= n || BigUint::from(budget.max_star_types) >= consts.x {
                FrameSearch::None
            } else {
                FrameSearch::Exhausted(format!("frames of dimension above {} were not explored", budget.max_star_types))
            }
        }
    }
}

struct Stop(String);

#[derive(Debug, Clone)]
struct Msg {
    j: u64,
    target: OneType,
    invertible: bool,
    /// Counting predicates sent, as indices `h`.
    slots: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Need {
    /// Some star-type of this 1-type.
    Type(OneType),
    /// Some star-type of this 1-type sending this (invertible) message.
    Partner(OneType, u64),
}

/// The star-types of one level that can occur in a frame.
#[derive(Default)]
struct Pool {
    stars: Vec<StarType>,
    needs: Vec<Vec<Need>>,
    /// Star-types meeting each need.
    meets: HashMap<Need, Vec<usize>>,
}

impl Pool {
    fn new(stars: Vec<StarType>, space: &TypeSpace) -> Pool {
        let mut needs = Vec::with_capacity(stars.len());
        let mut meets: HashMap<Need, Vec<usize>> = HashMap::new();
        for (k, st) in stars.iter().enumerate() {
            meets.entry(Need::Type(st.pi)).or_default().push(k);
            let mut own = BTreeSet::new();
            for &(j, _) in &st.v {
                let t = space.message(j).tp2;
                if space.is_invertible_index(j) {
                    meets.entry(Need::Partner(st.pi, j)).or_default().push(k);
                    own.insert(Need::Partner(t, space.inverse_index(j)));
                } else {
                    own.insert(Need::Type(t));
                }
            }
            needs.push(own.into_iter().collect());
        }
        Pool { stars, needs, meets }
    }

    /// Drop star-types with a need no surviving star-type meets, until none is left.
    fn prune(self, space: &TypeSpace) -> Pool {
        let mut alive = vec![true; self.stars.len()];
        let mut live: HashMap<Need, usize> = self.meets.iter().map(|(k, v)| (*k, v.len())).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for (k, needs) in self.needs.iter().enumerate() {
                if alive[k] && needs.iter().any(|n| live.get(n).copied().unwrap_or(0) == 0) {
                    alive[k] = false;
                    changed = true;
                    let st = &self.stars[k];
                    *live.get_mut(&Need::Type(st.pi)).unwrap() -= 1;
                    for &(j, _) in &st.v {
                        if space.is_invertible_index(j) {
                            *live.get_mut(&Need::Partner(st.pi, j)).unwrap() -= 1;
                        }
                    }
                }
            }
        }
        let kept = self.stars.into_iter().zip(alive).filter(|(_, a)| *a).map(|(s, _)| s).collect();
        Pool::new(kept, space)
    }
}

struct Searcher<'a> {
    space: &'a TypeSpace,
    alpha: Qf,
    beta: Qf,
    caps: Vec<u64>,
    z: u64,
    mode: Mode,
    deadline: Option<Instant>,
    frames_left: u64,
    max_dim: usize,
    read_bits: u32,
    ext_bits: Vec<u32>,
    cross_free: u32,
    types: Vec<OneType>,
    pool: Pool,
    in_set: Vec<bool>,
    banned: Vec<bool>,
    /// Cleared when the current level was not searched exhaustively.
    complete: bool,
    /// Drop the colour constraints on star-types.
    relaxed: bool,
    gap: String,
}

impl<'a> Searcher<'a> {
    fn new(
        nf: &NormalForm,
        consts: &SolverConstants,
        space: &'a TypeSpace,
        mode: Mode,
        budget: &SearchBudget,
        deadline: Option<Instant>,
    ) -> Result<Searcher<'a>, SolverError> {
        let sig = &space.sig.base;
        let compile = |f: &Formula| Qf::compile(f, sig).map_err(|e| SolverError::Signature(e.to_string()));
        let (alpha, beta) = (compile(&nf.alpha)?, compile(&nf.beta)?);
        let mut caps = vec![0; space.m()];
        for (name, c) in &nf.counting_conjuncts {
            let h = space.sig.counting.iter().position(|&k| sig.binary[k] == *name).expect("counting predicate");
            caps[h] = c.to_u64().ok_or(SolverError::Overflow("C"))?;
        }
        let ext_start = nf.sigma.unary.len() as u32;
        let ext_bits = (0..consts.extension as u32).map(|i| 1 << (ext_start + i)).collect();
        Ok(Searcher {
            space,
            read_bits: alpha.one_type_bits() | beta.one_type_bits(),
            cross_free: beta.cross_bits() | space.counting_mask,
            alpha,
            beta,
            caps,
            z: consts.z,
            mode,
            deadline,
            frames_left: budget.max_frames,
            max_dim: budget.max_star_types,
            ext_bits,
            types: Vec::new(),
            pool: Pool::default(),
            in_set: Vec::new(),
            banned: Vec::new(),
            complete: true,
            relaxed: false,
            gap: String::new(),
        })
    }

    fn incomplete(&mut self, why: &str) {
        if self.complete {
            self.complete = false;
            self.gap = why.to_string();
        }
    }

    /// 1-types with the read bits and the first `level` extension bits free,
    /// every other bit off, and the star-types over them that survive pruning.
    fn set_level(&mut self, level: u32) -> Result<(), Stop> {
        let free = self.read_bits | self.ext_bits.iter().take(level as usize).fold(0, |m, b| m | b);
        if free.count_ones() > MAX_FREE_BITS {
            return Err(Stop(format!("{} free 1-type bits", free.count_ones())));
        }
        let bits: Vec<u32> = (0..32).filter(|i| free >> i & 1 == 1).collect();
        self.types = (0..1u32 << bits.len())
            .map(|sub| OneType(bits.iter().enumerate().filter(|(k, _)| sub >> k & 1 == 1).fold(0, |m, (_, b)| m | 1 << b)))
            .filter(|&t| self.alpha.eval_one(t))
            .collect();
        self.types.sort();
        let work = (self.types.len() as u64).pow(2) * self.codes().len() as u64;
        if work > LEVEL_WORK_CAP {
            return Err(Stop(format!("extension level {level} is too large to enumerate")));
        }
        self.complete = true;
        self.gap.clear();
        let mut stars = Vec::new();
        for pi in self.types.clone() {
            let room = POOL_CAP.saturating_sub(stars.len());
            if !self.star_types(pi, room, &mut stars)? {
                self.incomplete("too many candidate star-types");
                break;
            }
        }
        self.pool = Pool::new(stars, self.space).prune(self.space);
        self.in_set = vec![false; self.pool.stars.len()];
        self.banned = vec![false; self.pool.stars.len()];
        Ok(())
    }

    fn check_time(&self) -> Result<(), Stop> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Stop("time limit reached".into())),
            _ => Ok(()),
        }
    }

    fn codes(&self) -> Vec<(u32, u32)> {
        self.space.message_codes().filter(|&(f, b)| (f | b) & !self.cross_free == 0).collect()
    }

    /// Messages from `pi` to the current 1-types that satisfy `β` both ways.
    fn messages(&self, pi: OneType) -> Result<Vec<Msg>, Stop> {
        let codes = self.codes();
        let mut out = Vec::new();
        for &t in &self.types {
            self.check_time()?;
            for &(fwd, bwd) in &codes {
                let tau = TwoType { tp1: pi, tp2: t, fwd, bwd };
                let invertible = bwd & self.space.counting_mask != 0;
                if (invertible && t == pi && !self.relaxed) || !self.beta.eval_both_ways(&tau) {
                    continue;
                }
                let slots = (0..self.space.m()).filter(|&h| self.space.sends(tau, h)).collect();
                let j = self.space.message_index(tau).expect("message");
                out.push(Msg { j, target: t, invertible: invertible && !self.relaxed, slots });
            }
        }
        Ok(out)
    }

    /// Append the chromatic star-types of `pi` meeting every counting
    /// conjunct; false when more than `limit` exist.
    fn star_types(&self, pi: OneType, limit: usize, out: &mut Vec<StarType>) -> Result<bool, Stop> {
        let msgs = self.messages(pi)?;
        let mut groups = vec![Vec::new(); self.caps.len()];
        for m in &msgs {
            if let Some(&h) = m.slots.first() {
                groups[h].push(m);
            }
        }
        let mut left = limit;
        let mut emit = |v: &[(u64, u64)]| {
            if left == 0 {
                return false;
            }
            left -= 1;
            out.push(StarType::new(pi, v.to_vec()));
            true
        };
        let mut gen = StarGen {
            groups,
            rem: self.caps.clone(),
            chosen: Vec::new(),
            inv_targets: BTreeSet::new(),
            nodes: GENERATION_NODES,
            emit: &mut emit,
        };
        Ok(gen.next_slot())
    }

    fn met(&self, set: &[usize], need: Need) -> bool {
        let meets = &self.pool.meets[&need];
        set.iter().any(|k| meets.binary_search(k).is_ok())
    }

    fn unmet(&self, set: &[usize]) -> BTreeSet<Need> {
        let mut out = BTreeSet::new();
        for &k in set {
            for &n in &self.pool.needs[k] {
                if !self.met(set, n) {
                    out.insert(n);
                }
            }
        }
        out
    }

    /// Iterative deepening on the frame dimension.
    fn run(&mut self) -> Result<Option<(Frame, Vec<ExtNat>)>, Stop> {
        let top = self.max_dim.min(self.pool.stars.len());
        for dim in 1..=top {
            if let Some(found) = self.dfs(&mut Vec::new(), dim)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }

    /// Every closed set of size at most `dim` that extends `set` and avoids
    /// the banned star-types. A candidate is banned for its later siblings
    /// once its own subtree is done.
    fn dfs(&mut self, set: &mut Vec<usize>, dim: usize) -> Result<Option<(Frame, Vec<ExtNat>)>, Stop> {
        self.check_time()?;
        let unmet = self.unmet(set);
        let cands: Vec<usize> = if unmet.is_empty() {
            if !set.is_empty() {
                if let Some(found) = self.test(set)? {
                    return Ok(Some(found));
                }
            }
            if set.len() == dim {
                return Ok(None);
            }
            (0..self.pool.stars.len()).filter(|&k| !self.in_set[k] && !self.banned[k]).collect()
        } else {
            // Each new star-type has one 1-type, so it meets the needs of one 1-type only.
            let spread: BTreeSet<OneType> =
                unmet.iter().map(|n| match *n { Need::Type(t) | Need::Partner(t, _) => t }).collect();
            if set.len() + spread.len() > dim {
                return Ok(None);
            }
            let open = |n: &Need| self.pool.meets[n].iter().copied().filter(|&k| !self.banned[k] && !self.in_set[k]);
            let need = unmet.iter().min_by_key(|n| open(n).count()).copied().expect("nonempty");
            let mut c: Vec<usize> = open(&need).collect();
            set.push(usize::MAX);
            let last = set.len() - 1;
            c.sort_by_cached_key(|&k| {
                set[last] = k;
                self.pool.needs[k].iter().filter(|&&n| !self.met(set, n)).count()
            });
            set.pop();
            c
        };
        let mut banned_here = Vec::new();
        let mut result = Ok(None);
        for k in cands {
            set.push(k);
            self.in_set[k] = true;
            let r = self.dfs(set, dim);
            self.in_set[k] = false;
            set.pop();
            match r {
                Ok(None) => {
                    self.banned[k] = true;
                    banned_here.push(k);
                }
                other => {
                    result = other;
                    break;
                }
            }
        }
        for k in banned_here {
            self.banned[k] = false;
        }
        result
    }

    /// Lex-least silent 2-type satisfying `β` both ways, for every pair of
    /// realized 1-types that has one.
    fn theta(&self, realized: &BTreeSet<OneType>) -> BTreeMap<(OneType, OneType), TwoType> {
        let mut theta = BTreeMap::new();
        for &p in realized {
            for &q in realized.range(p..) {
                let tau = self
                    .space
                    .silent_between(p, q)
                    .find(|t| (t.fwd | t.bwd) & !self.cross_free == 0 && self.beta.eval_both_ways(t));
                if let Some(tau) = tau {
                    theta.insert((p, q), tau);
                }
            }
        }
        theta
    }

    fn test(&mut self, set: &[usize]) -> Result<Option<(Frame, Vec<ExtNat>)>, Stop> {
        if self.frames_left == 0 {
            return Err(Stop("frame budget spent".into()));
        }
        self.frames_left -= 1;
        let stars: Vec<StarType> = set.iter().map(|&k| self.pool.stars[k].clone()).collect();
        let realized: BTreeSet<OneType> = stars.iter().map(|s| s.pi).collect();
        let f = Frame::new(stars, self.theta(&realized));
        let mut budget = SolveBudget { nodes: SOLVER_NODES, deadline: self.deadline };
        let out = match self.mode {
            Mode::Finite => solve_finite(&f, self.space, self.z, &mut budget),
            Mode::General => solve_extended(&f, self.space, self.z, &mut budget),
        };
        match out {
            SolveOutcome::Solution(w) if check_solution(&f, self.space, self.z, &w).unwrap_or(false) => Ok(Some((f, w))),
            SolveOutcome::Solution(_) => {
                self.incomplete("the counting solver returned an invalid solution");
                Ok(None)
            }
            SolveOutcome::Infeasible => Ok(None),
            SolveOutcome::Exhausted => {
                self.check_time()?;
                self.incomplete("the counting solver ran out of nodes");
                Ok(None)
            }
        }
    }
}

type Emit<'e> = &'e mut dyn FnMut(&[(u64, u64)]) -> bool;

/// Enumerates star-types as multisets of messages meeting every counting cap
/// exactly. Slots are filled lowest first; once slot `h` is the lowest open
/// one, every remaining message must have `h` as its lowest slot, so each
/// multiset is produced once and no branch revisits a closed slot.
struct StarGen<'m, 'e> {
    /// Messages grouped by their lowest counting slot.
    groups: Vec<Vec<&'m Msg>>,
    rem: Vec<u64>,
    chosen: Vec<(u64, u64)>,
    inv_targets: BTreeSet<OneType>,
    nodes: u64,
    emit: Emit<'e>,
}

impl StarGen<'_, '_> {
    /// False when `emit` asked to stop or the node budget ran out.
    fn next_slot(&mut self) -> bool {
        match self.rem.iter().position(|&r| r > 0) {
            None => (self.emit)(&self.chosen),
            Some(h) => self.fill(h, 0),
        }
    }

    fn fill(&mut self, h: usize, i: usize) -> bool {
        if self.nodes == 0 {
            return false;
        }
        self.nodes -= 1;
        if self.rem[h] == 0 {
            return self.next_slot();
        }
        for k in i..self.groups[h].len() {
            let m = self.groups[h][k];
            let max = m.slots.iter().map(|&g| self.rem[g]).min().unwrap_or(0);
            if max == 0 || (m.invertible && self.inv_targets.contains(&m.target)) {
                continue;
            }
            let top = if m.invertible { 1 } else { max };
            for c in 1..=top {
                for &g in &m.slots {
                    self.rem[g] -= c;
                }
                self.chosen.push((m.j, c));
                if m.invertible {
                    self.inv_targets.insert(m.target);
                }
                let go = self.fill(h, k + 1);
                if m.invertible {
                    self.inv_targets.remove(&m.target);
                }
                self.chosen.pop();
                for &g in &m.slots {
                    self.rem[g] += c;
                }
                if !go {
                    return false;
                }
            }
        }
        true
    }
}

/// What a `Sat` verdict carries.
#[derive(Debug, Clone)]
pub struct Certificate {
    /// A verified finite model of the input, over its own signature.
    pub model: Option<FiniteStructure>,
    pub frame: Option<Frame>,
    pub solution: Option<Vec<ExtNat>>,
    /// The space the frame lives in.
    pub space: Option<TypeSpace>,
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Sat(Box<Certificate>),
    Unsat,
    Unknown(String),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "sat",
            Verdict::Unsat => "unsat",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

/// Finite satisfiability.
pub fn fin_sat(phi: &Formula, budget: &SearchBudget) -> Verdict {
    decide(phi, budget, Mode::Finite)
}

/// Satisfiability over arbitrary (countable) domains.
pub fn sat(phi: &Formula, budget: &SearchBudget) -> Verdict {
    decide(phi, budget, Mode::General)
}

fn decide(phi: &Formula, budget: &SearchBudget, mode: Mode) -> Verdict {
    let deadline = budget.time_limit.map(|t| Instant::now() + t);
    let sig = match signature_of(phi) {
        Ok(s) => s,
        Err(e) => return Verdict::Unknown(format!("ill-formed input: {e}")),
    };
    let nf = scottify(phi);
    let c = max_count(&nf);
    match brute_force_search_capped(phi, budget.max_small_domain, SearchMode::UpTo, budget.max_small_domain) {
        Ok(Some(model)) => {
            return Verdict::Sat(Box::new(Certificate { model: Some(model), frame: None, solution: None, space: None }))
        }
        Ok(None) => {}
        Err(e) => return Verdict::Unknown(format!("small-domain phase failed: {e}")),
    }
    let small_covered = c <= BigUint::from(budget.max_small_domain);
    let consts = match constants(&nf) {
        Ok(k) => k,
        Err(e) => return Verdict::Unknown(e.to_string()),
    };
    let (frame, w) = match frame_search_until(&nf, &consts, mode, budget, deadline) {
        FrameSearch::Found(f, w) => (f, w),
        FrameSearch::None if small_covered => return Verdict::Unsat,
        FrameSearch::None => return Verdict::Unknown("domains up to C were not searched".into()),
        FrameSearch::Exhausted(reason) => return Verdict::Unknown(reason),
    };
    let space = consts.space().expect("space was built by the search");
    let model = if w.iter().all(|x| !x.is_inf()) {
        let wf: Vec<u64> = w.iter().map(|x| x.finite().and_then(|v| u64::try_from(v).ok()).unwrap_or(u64::MAX)).collect();
        match build(&frame, &nf, &space, consts.z, &wf) {
            Ok(a) => {
                let a = a.restrict(&sig);
                match check_sentence(&a, phi) {
                    Ok(true) => Some(a),
                    _ => return Verdict::Unknown("built model failed verification".into()),
                }
            }
            // The frame and its solution are the certificate on their own.
            Err(_) if mode == Mode::General => None,
            Err(e) => return Verdict::Unknown(format!("model construction failed: {e}")),
        }
    } else {
        None
    };
    Verdict::Sat(Box::new(Certificate { model, frame: Some(frame), solution: Some(w), space: Some(space) }))
}
