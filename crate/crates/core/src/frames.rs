//! Frames `(σ̄, I, θ)`: finite summaries of a structure's star-types and of
//! which pairs of 1-types admit a silent 2-type.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::normal_form::NormalForm;
use crate::structures::{noisy_pairs, star_census, FiniteStructure};
use crate::types::{star_is_chromatic, OneType, Qf, StarType, TwoType, TypeSpace, TypesError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("malformed frame text at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Types(#[from] TypesError),
}

/// Star-types are kept sorted; `theta` is keyed by `(π_i, π_i')` with
/// `π_i <= π_i'`, and its key set is `I`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    pub star_types: Vec<StarType>,
    pub theta: BTreeMap<(OneType, OneType), TwoType>,
}

impl Frame {
    pub fn new(mut star_types: Vec<StarType>, theta: BTreeMap<(OneType, OneType), TwoType>) -> Frame {
        star_types.sort();
        star_types.dedup();
        Frame { star_types, theta }
    }

    /// `N`.
    pub fn dim(&self) -> usize {
        self.star_types.len()
    }

    pub fn in_i(&self, p: OneType, q: OneType) -> bool {
        self.theta.contains_key(&ordered(p, q))
    }

    /// Distinct 1-types of the star-types.
    pub fn realized_types(&self) -> BTreeSet<OneType> {
        self.star_types.iter().map(|s| s.pi).collect()
    }

    pub fn to_text(&self, space: &TypeSpace) -> String {
        let mut out = String::new();
        for (k, st) in self.star_types.iter().enumerate() {
            writeln!(out, "st {}: {st}", k + 1).unwrap();
        }
        for ((i, i2), tau) in &self.theta {
            writeln!(out, "I: {{{},{}}} -> {}", i.0, i2.0, space.cross_literals(tau.fwd, tau.bwd)).unwrap();
        }
        out
    }

    pub fn from_text(text: &str, space: &TypeSpace) -> Result<Frame, FrameError> {
        let err = |line: usize, msg: &str| FrameError::Parse { line: line + 1, msg: msg.to_string() };
        let mut star_types = Vec::new();
        let mut theta = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("st ") {
                let (_, body) = rest.split_once(':').ok_or_else(|| err(n, "expected `:`"))?;
                star_types.push(parse_star_type(body.trim()).ok_or_else(|| err(n, "bad star-type"))?);
            } else if let Some(rest) = line.strip_prefix("I:") {
                let (pair, lits) = rest.split_once("->").ok_or_else(|| err(n, "expected `->`"))?;
                let pair = pair.trim().strip_prefix('{').and_then(|p| p.strip_suffix('}'));
                let (i, i2) = pair
                    .and_then(|p| p.split_once(','))
                    .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                    .ok_or_else(|| err(n, "bad index pair"))?;
                let (fwd, bwd) = parse_cross(lits, space).ok_or_else(|| err(n, "bad cross literals"))?;
                let (p, q) = (OneType(i), OneType(i2));
                theta.insert((p, q), TwoType { tp1: p, tp2: q, fwd, bwd });
            } else {
                return Err(err(n, "expected `st` or `I:`"));
            }
        }
        Ok(Frame::new(star_types, theta))
    }
}

fn parse_star_type(s: &str) -> Option<StarType> {
    let rest = s.strip_prefix("pi=")?;
    let (pi, v) = rest.split_once(" v=")?;
    let inner = v.strip_prefix('[')?.strip_suffix(']')?;
    let mut entries = Vec::new();
    for e in inner.split(',').filter(|e| !e.is_empty()) {
        let (j, c) = e.split_once(':')?;
        entries.push((j.trim().parse().ok()?, c.trim().parse().ok()?));
    }
    Some(StarType::new(OneType(pi.parse().ok()?), entries))
}

fn parse_cross(lits: &str, space: &TypeSpace) -> Option<(u32, u32)> {
    let (mut fwd, mut bwd) = (0, 0);
    for tok in lits.split_whitespace() {
        if tok.starts_with('~') {
            continue;
        }
        let (name, args) = tok.strip_suffix(')')?.split_once('(')?;
        let k = space.sig.base.binary_index(name)?;
        match args {
            "x,y" => fwd |= 1 << k,
            "y,x" => bwd |= 1 << k,
            _ => return None,
        }
    }
    Some((fwd, bwd))
}

fn ordered(p: OneType, q: OneType) -> (OneType, OneType) {
    if p <= q {
        (p, q)
    } else {
        (q, p)
    }
}

/// The literal conditions on a frame over `space`.
pub fn validate_frame(f: &Frame, space: &TypeSpace) -> bool {
    !f.star_types.is_empty()
        && f.star_types.windows(2).all(|w| w[0] < w[1])
        && f.star_types.iter().all(|s| (s.pi.0 as u64) < space.l && s.is_valid(space))
        && f.theta.iter().all(|(&(i, i2), tau)| {
            i <= i2 && (i2.0 as u64) < space.l && tau.tp1 == i && tau.tp2 == i2 && space.is_silent(*tau)
        })
}

/// Every multiplicity is at most `y`.
pub fn is_bounded(f: &Frame, y: u64) -> bool {
    f.star_types.iter().all(|s| s.v.iter().all(|&(_, c)| c <= y))
}

pub fn is_chromatic_frame(f: &Frame, space: &TypeSpace) -> bool {
    f.star_types.iter().all(|s| star_is_chromatic(s, space))
}

/// `F` lists exactly the realized star-types, `I` is exactly the set of
/// non-noisy pairs, and every `θ` value is realized between its classes.
pub fn describes(f: &Frame, a: &FiniteStructure, space: &TypeSpace) -> bool {
    let census = star_census(a, space);
    if census.len() != f.star_types.len() || !census.keys().zip(&f.star_types).all(|(x, y)| x == y) {
        return false;
    }
    let noisy = noisy_pairs(a, space);
    let quiet: BTreeSet<_> = noisy.quiet_pairs().copied().collect();
    let keys: BTreeSet<_> = f.theta.keys().copied().collect();
    if quiet != keys {
        return false;
    }
    let realized = a.realized_two_types();
    f.theta.values().all(|tau| realized.contains(tau))
}

/// The canonical frame of a finite structure: least realized silent witness
/// per non-noisy pair.
pub fn frame_of(a: &FiniteStructure, space: &TypeSpace) -> Frame {
    let star_types: Vec<StarType> = star_census(a, space).into_keys().collect();
    let mut theta: BTreeMap<(OneType, OneType), TwoType> = BTreeMap::new();
    for x in 0..a.n {
        for y in 0..a.n {
            if x == y || a.tp(x) > a.tp(y) {
                continue;
            }
            let tau = a.tp2(x, y);
            if space.is_silent(tau) {
                let slot = theta.entry((tau.tp1, tau.tp2)).or_insert(tau);
                if tau < *slot {
                    *slot = tau;
                }
            }
        }
    }
    Frame { star_types, theta }
}

/// `F ⊨ φ*`: 1-types satisfy `α`, sent messages and `θ` values satisfy `β`
/// both ways, and each star-type sends exactly `C_h` `f_h`-messages.
pub fn frame_models(f: &Frame, nf: &NormalForm, space: &TypeSpace) -> Result<bool, FrameError> {
    let sig = &space.sig.base;
    let alpha = Qf::compile(&nf.alpha, sig)?;
    let beta = Qf::compile(&nf.beta, sig)?;
    let targets: Vec<(usize, u64)> = nf
        .counting_conjuncts
        .iter()
        .map(|(name, c)| {
            let h = space
                .sig
                .counting
                .iter()
                .position(|&k| sig.binary[k] == *name)
                .expect("counting predicate of the normal form is counting in the space");
            (h, c.to_u64().unwrap_or(u64::MAX))
        })
        .collect();
    for st in &f.star_types {
        if !alpha.eval_one(st.pi) {
            return Ok(false);
        }
        let mut sums = vec![0u64; space.m()];
        for &(j, c) in &st.v {
            let mu = space.message(j);
            if !beta.eval_both_ways(&mu) {
                return Ok(false);
            }
            for (h, sum) in sums.iter_mut().enumerate() {
                if space.sends(mu, h) {
                    *sum += c;
                }
            }
        }
        if targets.iter().any(|&(h, c)| sums[h] != c) {
            return Ok(false);
        }
    }
    Ok(f.theta.values().all(|tau| beta.eval_both_ways(tau)))
}

/// Frame coefficients, dense over the relevant 1-types (those carried by a
/// star-type or targeted by a message). Every other 1-type has `o = r = s = 0`
/// and `p = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coefficients {
    pub n: usize,
    pub types: Vec<OneType>,
    pub o: Vec<Vec<u8>>,
    pub p: Vec<Vec<u8>>,
    pub r: Vec<Vec<u64>>,
    pub s: Vec<Vec<u64>>,
    /// Column `k` of `q`: invertible `j` with `σ_k[j] > 0`.
    pub q: Vec<BTreeMap<u64, u64>>,
    /// Invertible message indices with a nonzero entry somewhere.
    pub invertible: BTreeSet<u64>,
}

impl Coefficients {
    pub fn type_index(&self, pi: OneType) -> Option<usize> {
        self.types.binary_search(&pi).ok()
    }

    pub fn q(&self, j: u64, k: usize) -> u64 {
        self.q[k].get(&j).copied().unwrap_or(0)
    }
}

pub fn coefficients(f: &Frame, space: &TypeSpace) -> Coefficients {
    let n = f.dim();
    let mut types: BTreeSet<OneType> = f.realized_types();
    for st in &f.star_types {
        types.extend(st.v.iter().map(|&(j, _)| space.message(j).tp2));
    }
    let types: Vec<OneType> = types.into_iter().collect();
    let l = types.len();
    let mut c = Coefficients {
        n,
        o: vec![vec![0; n]; l],
        p: vec![vec![1; n]; l],
        r: vec![vec![0; n]; l],
        s: vec![vec![0; n]; l],
        q: vec![BTreeMap::new(); n],
        invertible: BTreeSet::new(),
        types,
    };
    for (k, st) in f.star_types.iter().enumerate() {
        let i = c.type_index(st.pi).expect("collected above");
        c.o[i][k] = 1;
        for &(j, cnt) in &st.v {
            let i = c.type_index(space.message(j).tp2).expect("collected above");
            c.p[i][k] = 0;
            c.s[i][k] += cnt;
            if space.is_invertible_index(j) {
                c.q[k].insert(j, cnt);
                c.invertible.insert(j);
            } else {
                c.r[i][k] += cnt;
            }
        }
    }
    c
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::structures::fixtures::f_space;

    /// One star-type: the all-negative 1-type sending one non-invertible
    /// `f(x,y) ∧ ¬f(y,x)` message to its own type; `I = {{π₀,π₀}}`.
    pub fn f_psi() -> (Frame, TypeSpace) {
        let space = f_space();
        let pi0 = OneType(0);
        let mu = TwoType { tp1: pi0, tp2: pi0, fwd: 1, bwd: 0 };
        let j = space.message_index(mu).unwrap();
        let theta = TwoType { tp1: pi0, tp2: pi0, fwd: 0, bwd: 0 };
        let frame = Frame::new(vec![StarType::new(pi0, vec![(j, 1)])], BTreeMap::from([((pi0, pi0), theta)]));
        (frame, space)
    }
}
