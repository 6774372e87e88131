//! Profiles restricted to sets of 1-types, `(Π,B)`-approximations, and the
//! transformations that reduce the number of profiles a group realizes.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::normal_form::{max_count, NormalForm};
use crate::structures::{check_normal_form, count_of, is_chromatic, pi_count, pi_profile, FiniteStructure};
use crate::types::{OneType, TwoType, TwoTypeClass, TypeSpace};

pub type TypeSet = BTreeSet<OneType>;
pub type Profile = Vec<(u64, u64)>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApproxError {
    #[error("structures differ in domain or signature")]
    DomainMismatch,
    #[error("precondition violated: {0}")]
    Precondition(String),
}

fn pre<T>(msg: impl Into<String>) -> Result<T, ApproxError> {
    Err(ApproxError::Precondition(msg.into()))
}

/// `Π^c` relative to the 1-types of `space`.
pub fn complement(space: &TypeSpace, pi: &TypeSet) -> TypeSet {
    space.one_types().filter(|t| !pi.contains(t)).collect()
}

pub fn profile_in(a: &FiniteStructure, x: usize, space: &TypeSpace, pi: &TypeSet) -> Profile {
    pi_profile(a, x, space, |t| pi.contains(&t))
}

pub fn count_in(a: &FiniteStructure, x: usize, space: &TypeSpace, pi: &TypeSet) -> Vec<u64> {
    pi_count(a, x, space, |t| pi.contains(&t))
}

/// Number of distinct `Π`-profiles realized on `b`.
pub fn profile_count(a: &FiniteStructure, space: &TypeSpace, pi: &TypeSet, b: &[usize]) -> usize {
    b.iter().map(|&x| profile_in(a, x, space, pi)).collect::<BTreeSet<_>>().len()
}

/// Largest count over all elements and counting predicates.
pub fn branching_degree(a: &FiniteStructure, space: &TypeSpace) -> u64 {
    (0..a.n).flat_map(|x| count_of(a, x, space)).max().unwrap_or(0)
}

pub fn is_group(a: &FiniteStructure, space: &TypeSpace, pi: &TypeSet, b: &[usize]) -> bool {
    match b.first() {
        None => true,
        Some(&x) => {
            let (t, c) = (a.tp(x), count_in(a, x, space, pi));
            b.iter().all(|&y| a.tp(y) == t && count_in(a, y, space, pi) == c)
        }
    }
}

fn invertible_part(space: &TypeSpace, p: &Profile) -> Profile {
    p.iter().copied().filter(|&(j, _)| space.is_invertible_index(j)).collect()
}

pub fn is_patch(a: &FiniteStructure, space: &TypeSpace, pi: OneType, b: &[usize]) -> bool {
    let set = TypeSet::from([pi]);
    is_group(a, space, &set, b)
        && b.iter()
            .map(|&x| invertible_part(space, &profile_in(a, x, space, &set)))
            .collect::<BTreeSet<_>>()
            .len()
            <= 1
}

pub fn is_approximation(
    a2: &FiniteStructure,
    a: &FiniteStructure,
    space: &TypeSpace,
    pi: &TypeSet,
    b: &[usize],
) -> Result<bool, ApproxError> {
    if a2.n != a.n || a2.sig != a.sig {
        return Err(ApproxError::DomainMismatch);
    }
    if !is_chromatic(a2, space) || !a2.realized_two_types().is_subset(&a.realized_two_types()) {
        return Ok(false);
    }
    let pic = complement(space, pi);
    let in_b: BTreeSet<usize> = b.iter().copied().collect();
    for x in 0..a.n {
        if a2.tp(x) != a.tp(x) || profile_in(a2, x, space, &pic) != profile_in(a, x, space, &pic) {
            return Ok(false);
        }
        let ok = if in_b.contains(&x) {
            count_in(a2, x, space, pi) == count_in(a, x, space, pi)
        } else {
            pi_profile(a2, x, space, |_| true) == pi_profile(a, x, space, |_| true)
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks the standing hypotheses: chromatic, and `(mY+1)²`-differentiated
/// for the branching degree `Y` of `a`.
fn check_regular(a: &FiniteStructure, space: &TypeSpace) -> Result<(), ApproxError> {
    if !is_chromatic(a, space) {
        return pre("structure is not chromatic");
    }
    let z = (space.m() as u64 * branching_degree(a, space) + 1).pow(2);
    if !a.type_census().values().all(|&u| u <= 1 || u as u64 > z) {
        return pre(format!("structure is not {z}-differentiated"));
    }
    Ok(())
}

fn sorted_set(b: &[usize], n: usize) -> Result<Vec<usize>, ApproxError> {
    let s: BTreeSet<usize> = b.iter().copied().collect();
    if s.len() != b.len() || s.iter().any(|&x| x >= n) {
        return pre("B must list distinct elements of the domain");
    }
    Ok(s.into_iter().collect())
}

/// Gives every element of the `π`-patch `b` the same `{π}`-profile.
pub fn unify_patch(a: &FiniteStructure, space: &TypeSpace, pi: OneType, b: &[usize]) -> Result<FiniteStructure, ApproxError> {
    let b = sorted_set(b, a.n)?;
    check_regular(a, space)?;
    if !is_patch(a, space, pi, &b) {
        return pre("B is not a patch");
    }
    let a_pi = a.elements_of(pi);
    if b.len() <= 1 || a_pi.is_empty() {
        return Ok(a.clone());
    }
    // The silent witness is looked up lazily: with a single element of type
    // `π` every member of the patch sends the same number of messages to it,
    // so no surplus target ever needs one.
    let star = a.tp(b[0]);
    let silent = || {
        a.elements_of(star)
            .into_iter()
            .flat_map(|x| a_pi.iter().filter(move |&&y| y != x).map(move |&y| (x, y)))
            .map(|(x, y)| a.tp2(x, y))
            .filter(|&t| space.is_silent(t))
            .min()
            .ok_or_else(|| ApproxError::Precondition("no silent 2-type between the two classes".into()))
    };
    let targets = |x: usize| -> Vec<usize> {
        a_pi.iter()
            .copied()
            .filter(|&y| y != x && space.classify(a.tp2(x, y)) == TwoTypeClass::MessageNonInvertible)
            .collect()
    };
    let sets: Vec<Vec<usize>> = b.iter().map(|&x| targets(x)).collect();
    let best = (0..b.len()).min_by_key(|&k| (sets[k].len(), b[k])).unwrap();
    let (bb, ab) = (b[best], &sets[best]);
    let mut out = a.clone();
    for (k, &x) in b.iter().enumerate() {
        if x == bb {
            continue;
        }
        for (i, &y) in sets[k].iter().enumerate() {
            let t = match ab.get(i) {
                Some(&bi) => a.tp2(bb, bi),
                None => silent()?,
            };
            out.set_tp2(x, y, t);
        }
    }
    Ok(out)
}

/// Moves `Π`-profiles around the `Π`-group `b` along `omega`:
/// afterwards `ω(x)` carries the old `Π`-profile of `x`.
pub fn permute_group(
    a: &FiniteStructure,
    space: &TypeSpace,
    pi: &TypeSet,
    b: &[usize],
    omega: &BTreeMap<usize, usize>,
) -> Result<FiniteStructure, ApproxError> {
    let b = sorted_set(b, a.n)?;
    let keys: Vec<usize> = omega.keys().copied().collect();
    let vals: BTreeSet<usize> = omega.values().copied().collect();
    if keys != b || vals.into_iter().collect::<Vec<_>>() != b {
        return pre("omega is not a permutation of B");
    }
    if !is_group(a, space, pi, &b) {
        return pre("B is not a group");
    }
    let mut inv: Vec<usize> = (0..a.n).collect();
    for (&x, &y) in omega {
        inv[y] = x;
    }
    let w = |wrt: usize, x: usize| if pi.contains(&a.tp(wrt)) { inv[x] } else { x };
    let mut out = a.clone();
    for x in 0..a.n {
        for y in x + 1..a.n {
            let src: TwoType = a.tp2(w(y, x), w(x, y));
            out.set_tp2(x, y, src);
        }
    }
    Ok(out)
}

/// Permutation sending the elements of `b`, sorted by `key`, onto `b` in
/// ascending order, so equal keys end up in consecutive blocks.
fn block_sort<K: Ord>(b: &[usize], key: impl Fn(usize) -> K) -> BTreeMap<usize, usize> {
    let mut by_key: Vec<(K, usize)> = b.iter().map(|&x| (key(x), x)).collect();
    by_key.sort();
    by_key.into_iter().zip(b).map(|((_, x), &y)| (x, y)).collect()
}

/// Realizes at most `J' + J''` distinct `(Π'∪Π'')`-profiles on `b`.
pub fn merge_profiles(
    a: &FiniteStructure,
    space: &TypeSpace,
    pi1: &TypeSet,
    pi2: &TypeSet,
    b: &[usize],
) -> Result<FiniteStructure, ApproxError> {
    let b = sorted_set(b, a.n)?;
    if pi1.is_empty() || pi2.is_empty() || !pi1.is_disjoint(pi2) {
        return pre("the two sets of 1-types must be disjoint and nonempty");
    }
    if !is_group(a, space, pi1, &b) || !is_group(a, space, pi2, &b) {
        return pre("B is not a group for both sets");
    }
    let first = permute_group(a, space, pi1, &b, &block_sort(&b, |x| profile_in(a, x, space, pi1)))?;
    let omega = block_sort(&b, |x| profile_in(&first, x, space, pi2));
    permute_group(&first, space, pi2, &b, &omega)
}

/// `K_l = 2^l (M*+1) (Y+1)^{lm}`.
pub fn k_l_bound(l: u32, m_star: u64, y: u64, m: u64) -> BigUint {
    let lm = u32::try_from(u64::from(l) * m).expect("exponent fits in u32");
    (BigUint::one() << l) * BigUint::from(m_star + 1) * BigUint::from(y + 1).pow(lm)
}

/// Realizes at most `K_l` distinct `Π`-profiles on the `Π`-group `b`.
pub fn reduce_profiles(
    a: &FiniteStructure,
    space: &TypeSpace,
    pi: &TypeSet,
    b: &[usize],
    l: u32,
) -> Result<FiniteStructure, ApproxError> {
    let b = sorted_set(b, a.n)?;
    if pi.is_empty() || (pi.len() as u128) > 1u128 << l.min(127) {
        return pre("need 0 < |Π| <= 2^l");
    }
    check_regular(a, space)?;
    if !is_group(a, space, pi, &b) {
        return pre("B is not a group");
    }
    reduce_rec(a.clone(), space, pi, &b, l)
}

fn reduce_rec(
    mut a: FiniteStructure,
    space: &TypeSpace,
    pi: &TypeSet,
    b: &[usize],
    l: u32,
) -> Result<FiniteStructure, ApproxError> {
    debug_assert!(pi.len() as u64 <= 1u64 << l);
    if pi.len() == 1 {
        let p = *pi.first().unwrap();
        let mut patches: BTreeMap<Profile, Vec<usize>> = BTreeMap::new();
        for &x in b {
            patches.entry(invertible_part(space, &profile_in(&a, x, space, pi))).or_default().push(x);
        }
        for patch in patches.values() {
            a = unify_patch(&a, space, p, patch)?;
        }
        return Ok(a);
    }
    let types: Vec<OneType> = pi.iter().copied().collect();
    let (lo, hi) = types.split_at(types.len().div_ceil(2));
    let (pi1, pi2): (TypeSet, TypeSet) = (lo.iter().copied().collect(), hi.iter().copied().collect());
    let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for &x in b {
        groups.entry(count_in(&a, x, space, &pi1)).or_default().push(x);
    }
    for group in groups.values() {
        a = reduce_rec(a, space, &pi1, group, l - 1)?;
        a = reduce_rec(a, space, &pi2, group, l - 1)?;
        a = merge_profiles(&a, space, &pi1, &pi2, group)?;
    }
    Ok(a)
}

/// `X = 4^s (16^s + 1) (C+1)^{sm}`.
pub fn sparsity_bound(s: u64, m: u64, c: u64) -> BigUint {
    let s32 = u32::try_from(s).expect("s fits in u32");
    let sm = u32::try_from(s * m).expect("sm fits in u32");
    BigUint::from(4u8).pow(s32) * (BigUint::from(16u8).pow(s32) + 1u8) * BigUint::from(c + 1).pow(sm)
}

/// A model of `φ*` on the same domain realizing at most `X` star-types.
pub fn sparsify(a: &FiniteStructure, nf: &NormalForm, space: &TypeSpace) -> Result<FiniteStructure, ApproxError> {
    if !is_chromatic(a, space) {
        return pre("structure is not chromatic");
    }
    if !check_normal_form(a, nf).map_err(|e| ApproxError::Precondition(e.to_string()))? {
        return pre("structure is not a model of the normal form");
    }
    let c = max_count(nf).to_u64().unwrap_or(u64::MAX);
    let z = (space.m() as u64 * c + 1).pow(2);
    if !a.type_census().values().all(|&u| u <= 1 || u as u64 > z) {
        return pre(format!("structure is not {z}-differentiated"));
    }
    // Unrealized 1-types contribute nothing to any profile, so working over
    // the realized ones yields an approximation over all 1-types as well.
    let census = a.type_census();
    let realized: TypeSet = census.keys().copied().collect();
    let l = space.sig.s() as u32;
    let mut out = a.clone();
    for &t in census.keys() {
        out = reduce_profiles(&out, space, &realized, &a.elements_of(t), l)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::fixtures::{cycle, f_space};
    use crate::structures::star_census;

    fn all(space: &TypeSpace) -> TypeSet {
        space.one_types().collect()
    }

    /// Two 6-cycles sharing a 1-type, with the second one running backwards
    /// through its elements.
    fn two_cycles() -> FiniteStructure {
        let mut a = FiniteStructure::new(crate::structures::fixtures::f_sig(), 12);
        for k in 0..6 {
            a.set_binary(0, k, (k + 1) % 6, true);
            a.set_binary(0, 6 + (k + 1) % 6, 6 + k, true);
        }
        a
    }

    #[test]
    fn restricted_profiles() {
        let a = cycle(3);
        let sp = f_space();
        for x in 0..3 {
            assert_eq!(profile_in(&a, x, &sp, &all(&sp)), pi_profile(&a, x, &sp, |_| true));
            assert!(profile_in(&a, x, &sp, &TypeSet::new()).is_empty());
            assert_eq!(count_in(&a, x, &sp, &TypeSet::new()), vec![0]);
            assert_eq!(profile_in(&a, x, &sp, &TypeSet::from([a.tp(0)])), pi_profile(&a, x, &sp, |_| true));
        }
    }

    #[test]
    fn identity_and_one_type_change() {
        let a = two_cycles();
        let sp = f_space();
        let pi = all(&sp);
        assert!(is_approximation(&a, &a, &sp, &pi, &[]).unwrap());
        let mut b = a.clone();
        b.set_binary(0, 0, 0, true);
        assert!(!is_approximation(&b, &a, &sp, &pi, &[0]).unwrap());
        assert_eq!(is_approximation(&cycle(3), &a, &sp, &pi, &[]), Err(ApproxError::DomainMismatch));
    }

    #[test]
    fn permute_identity_and_swap() {
        let a = two_cycles();
        let sp = f_space();
        let pi = all(&sp);
        let b = [0, 7];
        let id = BTreeMap::from([(0, 0), (7, 7)]);
        assert_eq!(permute_group(&a, &sp, &pi, &b, &id).unwrap(), a);
        let swap = BTreeMap::from([(0, 7), (7, 0)]);
        let out = permute_group(&a, &sp, &pi, &b, &swap).unwrap();
        assert!(is_approximation(&out, &a, &sp, &pi, &b).unwrap());
        assert_eq!(profile_in(&out, 7, &sp, &pi), profile_in(&a, 0, &sp, &pi));
        assert_eq!(profile_in(&out, 0, &sp, &pi), profile_in(&a, 7, &sp, &pi));
        assert!(permute_group(&a, &sp, &pi, &b, &BTreeMap::from([(0, 7), (7, 7)])).is_err());
    }

    #[test]
    fn unify_trivial_cases() {
        let a = two_cycles();
        let sp = f_space();
        assert_eq!(unify_patch(&a, &sp, a.tp(0), &[3]).unwrap(), a);
        let b: Vec<usize> = (0..12).collect();
        let out = unify_patch(&a, &sp, a.tp(0), &b).unwrap();
        assert!(is_approximation(&out, &a, &sp, &TypeSet::from([a.tp(0)]), &b).unwrap());
        assert_eq!(profile_count(&out, &sp, &TypeSet::from([a.tp(0)]), &b), 1);
    }

    #[test]
    fn bounds() {
        assert_eq!(k_l_bound(0, 16, 5, 3), BigUint::from(17u8));
        assert_eq!(k_l_bound(1, 16, 1, 1), BigUint::from(68u8));
        assert_eq!(sparsity_bound(2, 1, 1), BigUint::from(16448u32));
    }

    #[test]
    fn sparsify_two_cycles() {
        let a = two_cycles();
        let sp = f_space();
        let nf = crate::normal_form::scottify(&crate::syntax::parse("Ax E=1 y (f(x,y) & ~(x=y))").unwrap());
        let out = sparsify(&a, &nf, &sp).unwrap();
        assert!(check_normal_form(&out, &nf).unwrap());
        assert!(is_approximation(&out, &a, &sp, &all(&sp), &(0..12).collect::<Vec<_>>()).unwrap());
        assert!(star_census(&out, &sp).len() <= 1 + sp.m_star as usize);
    }
}
