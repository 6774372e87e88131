mod common;

use std::collections::BTreeSet;

use c2sat::approximation::*;
use rand::seq::SliceRandom;

#[test]
fn random_models_satisfy_every_property() {
    common::toolkit::toolkit_harness(7);
}

#[test]
fn approximation_is_transitive_and_monotone() {
    let space = common::pfg_space();
    let all: TypeSet = space.one_types().collect();
    let mut rng = common::rng(11);
    for _ in 0..30 {
        let a = common::random_psi_model(&mut rng, 10, 4);
        let pi: TypeSet = common::toolkit::realized(&a).into_iter().take(1).collect();
        let group = common::toolkit::largest_group(&a, &space, &pi, |_| ());
        let mut perm = group.clone();
        perm.shuffle(&mut rng);
        let a1 = permute_group(&a, &space, &pi, &group, &group.iter().copied().zip(perm.clone()).collect()).unwrap();
        perm.shuffle(&mut rng);
        let a2 = permute_group(&a1, &space, &pi, &group, &group.iter().copied().zip(perm).collect()).unwrap();
        assert!(is_approximation(&a2, &a1, &space, &pi, &group).unwrap());
        assert!(is_approximation(&a2, &a, &space, &pi, &group).unwrap());
        let wider: BTreeSet<usize> = (0..a.n).collect();
        assert!(is_approximation(&a2, &a, &space, &all, &wider.into_iter().collect::<Vec<_>>()).unwrap());
    }
}
