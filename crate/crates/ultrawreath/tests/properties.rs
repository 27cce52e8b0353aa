//! Invariants as properties. Strategies draw seeds; the seeded generators in
//! `corpus` and `wreath::fixtures` turn them into spaces, trees and systems.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;

use ultrawreath::corpus::{instance_rng, random_pruned_tree, random_space};
use ultrawreath::functors::{
    canonical_levels, functor_f, functor_f_mor, g_fullness_diagnostic, LevelEmbedding,
};
use ultrawreath::io::{document_from_value, Document};
use ultrawreath::permgroup::{verify_conjugation, Perm, PermGroup};
use ultrawreath::pipelines::{
    general_system, rebuild_space, verify_general, verify_homogeneous, GeneralInput,
    PipelineConfig, TreeData,
};
use ultrawreath::ultrametric::UltraSpace;
use ultrawreath::wreath::{
    brute_wreath_oracle, coordinate_actions_are_permutations, fixtures, pad_bottom, pad_top, rho,
    wreath_group, CoordinateGroups, Skeleton,
};

const M: usize = 1_000_000;

fn space(seed: u64) -> UltraSpace {
    random_space(&mut instance_rng(seed, 0), 6)
}

fn cfg() -> PipelineConfig {
    PipelineConfig {
        max_order: M,
        ..Default::default()
    }
}

fn group_axioms(g: &PermGroup) {
    let n = g.degree();
    assert!(g.contains(&Perm::identity(n)));
    for a in g.elements() {
        assert!(g.contains(&a.inverse()));
        for b in g.elements() {
            assert!(g.contains(&a.compose(b)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn isometry_groups_are_groups(seed in any::<u64>()) {
        let u = space(seed);
        let g = u.iso_group(M).unwrap();
        group_axioms(&g);
        prop_assert!(g.elements().iter().all(|p| u.is_isometry(p)));
        let orbits = g.orbits();
        let mut seen: Vec<usize> = orbits.iter().flatten().copied().collect();
        seen.sort();
        prop_assert_eq!(seen, (0..u.len()).collect::<Vec<_>>());
        for o in &orbits {
            let block: BTreeSet<usize> = o.iter().copied().collect();
            prop_assert!(g.elements().iter().all(|p| o.iter().all(|&x| block.contains(&p.apply(x)))));
        }
        if u.len() >= 2 {
            prop_assert!(g.order() >= 2);
        }
    }

    #[test]
    fn conjugation_is_reflexive_and_symmetric(seed in any::<u64>()) {
        let u = space(seed);
        let g = u.iso_group(M).unwrap();
        let n = g.degree();
        let id: Vec<usize> = (0..n).collect();
        prop_assert!(verify_conjugation("id", &g, &g, &id).unwrap().verified);
        let mut beta = id.clone();
        beta.shuffle(&mut instance_rng(seed, 1));
        let h = PermGroup::from_elements(g.ground().to_vec(), g.elements().iter().map(|p| p.transport(&beta)).collect()).unwrap();
        let inv = Perm::from_images(beta.clone()).unwrap().inverse();
        prop_assert!(verify_conjugation("β", &g, &h, &beta).unwrap().verified);
        prop_assert!(verify_conjugation("β⁻¹", &h, &g, inv.images()).unwrap().verified);
    }

    #[test]
    fn balls_nest_and_every_point_is_a_center(seed in any::<u64>()) {
        let u = space(seed);
        let radii: Vec<_> = u.distance_set().into_iter().collect();
        let mut balls = vec![];
        for x in 0..u.len() {
            for &r in &radii {
                let b: BTreeSet<usize> = u.ball(x, r).into_iter().collect();
                for &y in &b {
                    prop_assert_eq!(&u.ball(y, r).into_iter().collect::<BTreeSet<_>>(), &b);
                }
                balls.push(b);
            }
        }
        for a in &balls {
            for b in &balls {
                prop_assert!(a.is_disjoint(b) || a.is_subset(b) || b.is_subset(a));
            }
        }
    }

    #[test]
    fn ball_tree_is_faithful_and_full(seed in any::<u64>()) {
        let u = space(seed);
        let levels = canonical_levels(&u, M).unwrap();
        let f = functor_f(&u, &levels).unwrap();
        prop_assert!(f.tree.validate().is_ok());
        let covered: BTreeSet<usize> = f.node_map.iter().flatten().copied().collect();
        prop_assert_eq!(covered.len(), f.tree.len());
        let iso = u.iso_group(M).unwrap();
        let images: BTreeSet<Vec<usize>> =
            iso.elements().iter().map(|g| functor_f_mor(&u, &f, &u, &f, g.images()).unwrap()).collect();
        prop_assert_eq!(images.len(), iso.order());
        prop_assert_eq!(f.tree.aut_group(M).unwrap().order(), iso.order());
    }

    #[test]
    fn condensation_is_well_defined(seed in any::<u64>()) {
        let t = random_pruned_tree(&mut instance_rng(seed, 0), 8, 3);
        let td = TreeData::new(t, M).unwrap();
        let tree = &td.tree;
        for class in &td.cond.classes {
            let sizes: BTreeSet<usize> = class.iter().map(|&x| tree.c_set(&td.cond, x).len()).collect();
            prop_assert_eq!(sizes.len(), 1);
            let lv: BTreeSet<usize> = class.iter().map(|&x| tree.level(x)).collect();
            prop_assert_eq!(lv.len(), 1);
            for l in tree.level(class[0])..tree.order().len() {
                let ups: BTreeSet<usize> = class.iter().map(|&x| td.class_of(tree.up(x, l))).collect();
                prop_assert_eq!(ups.len(), 1);
            }
        }
        let d = g_fullness_diagnostic(tree, &LevelEmbedding::standard(tree.order()), M).unwrap();
        prop_assert!(d.forward);
    }

    #[test]
    fn wreath_groups_match_the_oracle(seed in any::<u64>()) {
        let ps = fixtures::random_system(&mut instance_rng(seed, 0), 4, 3, 8);
        let g = wreath_group(&ps, &CoordinateGroups::Full, M).unwrap();
        let oracle = brute_wreath_oracle(&ps, &CoordinateGroups::Full).unwrap();
        prop_assert_eq!(g.elements().iter().collect::<BTreeSet<_>>(), oracle.elements().iter().collect::<BTreeSet<_>>());
        group_axioms(&g);
        prop_assert!(coordinate_actions_are_permutations(&ps, &g));
        let r = rho(&ps).unwrap();
        for d in 0..ps.skeleton().len() {
            let imgs: BTreeSet<usize> = r.map[d].iter().copied().collect();
            prop_assert_eq!(imgs.len(), ps.part(d).len());
            for (i, z) in ps.part(d).iter().enumerate() {
                prop_assert_eq!(r.family.part(d)[r.map[d][i]].get(d), z.get(d));
            }
        }
        for padded in [pad_top(&ps, 1, M).unwrap(), pad_bottom(&ps, 1, M).unwrap()] {
            prop_assert!(padded.witness.verified);
            prop_assert_eq!(padded.witness.target.order(), g.order());
        }
    }

    #[test]
    fn general_pipeline_invariants(seed in any::<u64>()) {
        let u = space(seed);
        let r = verify_general(&GeneralInput::Space(u.clone()), &cfg()).unwrap();
        prop_assert!(r.passed(), "{}", r.to_text());
        let n = r.orders["iso_space"];
        prop_assert!(r.orders.values().all(|&m| m == n));
        // rerunning on the serialized input reproduces the report byte for byte
        let reread = match document_from_value(&Document::Space(u).to_value()).unwrap() {
            Document::Space(v) => v,
            _ => unreachable!(),
        };
        let again = verify_general(&GeneralInput::Space(reread), &cfg()).unwrap();
        prop_assert_eq!(r.to_value(false).to_string(), again.to_value(false).to_string());
    }

    /// Homogeneous spaces built from random chains: the general pipeline's
    /// projections are plain restrictions and its group is the homogeneous one.
    #[test]
    fn homogeneous_inputs_need_no_projections(
        ns in prop::collection::vec(1usize..=3, 1..=3).prop_filter("at most 9 points", |ns| ns.iter().product::<usize>() <= 9)
    ) {
        let levels = (1..=ns.len() as i64).map(ultrawreath::rational::q).collect();
        let sk = Skeleton::chain(&ns).with_levels(Some(levels)).unwrap();
        let u = rebuild_space(&sk, &sk.full_product(M).unwrap()).unwrap();
        let h = verify_homogeneous(&u, &cfg()).unwrap();
        prop_assert!(h.passed(), "{}", h.to_text());
        let g = verify_general(&GeneralInput::Space(u.clone()), &cfg()).unwrap();
        prop_assert!(g.passed());
        let levels = canonical_levels(&u, M).unwrap();
        let td = TreeData::new(functor_f(&u, &levels).unwrap().tree, M).unwrap();
        prop_assert!(general_system(&td).unwrap().system.is_trivial());
        let (wh, wg) = (&h.full_witnesses[1], g.full_witnesses.last().unwrap());
        prop_assert_eq!(wh.target.elements(), wg.target.elements());
    }
}
