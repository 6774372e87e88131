use std::collections::BTreeMap;

use c2sat::approximation::*;
use c2sat::structures::{check_normal_form, star_census, FiniteStructure};
use c2sat::types::{OneType, TypeSpace};
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;

/// Largest group for `pi` inside one class, keyed additionally by `extra`.
pub fn largest_group<K: Ord>(
    a: &FiniteStructure,
    space: &TypeSpace,
    pi: &TypeSet,
    extra: impl Fn(usize) -> K,
) -> Vec<usize> {
    let mut groups: BTreeMap<(OneType, Vec<u64>, K), Vec<usize>> = BTreeMap::new();
    for x in 0..a.n {
        groups.entry((a.tp(x), count_in(a, x, space, pi), extra(x))).or_default().push(x);
    }
    groups.into_values().max_by_key(|g| g.len()).unwrap()
}

pub fn realized(a: &FiniteStructure) -> Vec<OneType> {
    a.type_census().into_keys().collect()
}

/// Every approximation operation on 100 random models: output is a
/// `(Π, B)`-approximation, still models the normal form, and meets its
/// profile-count bound.
pub fn toolkit_harness(seed: u64) {
    let space = crate::common::pfg_space();
    let nf = crate::common::psi_like_nf();
    let all: TypeSet = space.one_types().collect();
    let mut rng = crate::common::rng(seed);
    let mut nontrivial_unify = 0;
    for _ in 0..100 {
        let a = crate::common::random_psi_model(&mut rng, 12, 4);
        assert!(check_normal_form(&a, &nf).unwrap());
        let types = realized(&a);

        let pi = *types.choose(&mut rng).unwrap();
        let single = TypeSet::from([pi]);
        let patch = largest_group(&a, &space, &single, |x| {
            profile_in(&a, x, &space, &single)
                .into_iter()
                .filter(|&(j, _)| space.is_invertible_index(j))
                .collect::<Vec<_>>()
        });
        let out = unify_patch(&a, &space, pi, &patch).unwrap();
        assert!(is_approximation(&out, &a, &space, &single, &patch).unwrap());
        assert!(check_normal_form(&out, &nf).unwrap());
        assert_eq!(
            profile_count(&out, &space, &single, &patch),
            1,
            "pi={pi:?} |A_pi|={} patch={patch:?}\n{}",
            a.elements_of(pi).len(),
            a.to_text()
        );
        if profile_count(&a, &space, &single, &patch) > 1 {
            nontrivial_unify += 1;
        }

        let sub: TypeSet = types.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let sub = if sub.is_empty() { single.clone() } else { sub };
        let group = largest_group(&a, &space, &sub, |_| ());
        let mut shuffled = group.clone();
        shuffled.shuffle(&mut rng);
        let omega: BTreeMap<usize, usize> = group.iter().copied().zip(shuffled).collect();
        let out = permute_group(&a, &space, &sub, &group, &omega).unwrap();
        assert!(is_approximation(&out, &a, &space, &sub, &group).unwrap());
        assert!(check_normal_form(&out, &nf).unwrap());
        for (&x, &y) in &omega {
            assert_eq!(profile_in(&out, y, &space, &sub), profile_in(&a, x, &space, &sub));
        }

        let rest: TypeSet = all.difference(&single).copied().collect();
        let both = largest_group(&a, &space, &single, |x| count_in(&a, x, &space, &rest));
        let j = profile_count(&a, &space, &single, &both) + profile_count(&a, &space, &rest, &both);
        let out = merge_profiles(&a, &space, &single, &rest, &both).unwrap();
        assert!(is_approximation(&out, &a, &space, &all, &both).unwrap());
        assert!(check_normal_form(&out, &nf).unwrap());
        assert!(profile_count(&out, &space, &all, &both) <= j);

        let l = 3;
        let group = largest_group(&a, &space, &all, |_| ());
        let out = reduce_profiles(&a, &space, &all, &group, l).unwrap();
        assert!(is_approximation(&out, &a, &space, &all, &group).unwrap());
        assert!(check_normal_form(&out, &nf).unwrap());
        let k = k_l_bound(l, space.m_star, branching_degree(&a, &space), space.m() as u64);
        assert!(BigUint::from(profile_count(&out, &space, &all, &group)) <= k);

        let out = sparsify(&a, &nf, &space).unwrap();
        let every: Vec<usize> = (0..a.n).collect();
        assert!(is_approximation(&out, &a, &space, &all, &every).unwrap());
        assert!(check_normal_form(&out, &nf).unwrap());
        assert!(BigUint::from(star_census(&out, &space).len()) <= sparsity_bound(3, 1, 1));
        assert_eq!(out.type_census(), a.type_census());
    }
    assert!(nontrivial_unify > 10, "only {nontrivial_unify} non-trivial patches");
}
