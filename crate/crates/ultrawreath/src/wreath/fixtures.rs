//! Small projection systems shared by tests, examples and the acceptance suite.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::rational::Q;

use super::{LocalFamily, ProjectionSystem, Seq, Skeleton};

fn lf(sk: Skeleton) -> ProjectionSystem {
    ProjectionSystem::trivial(&LocalFamily::locally_finite(&sk)).expect("locally finite system")
}

pub fn chain_lf(n: &[usize]) -> ProjectionSystem {
    lf(Skeleton::chain(n))
}

pub fn antichain_lf(n: &[usize]) -> ProjectionSystem {
    lf(Skeleton::antichain(n))
}

/// `names[i] < names[j]` for each pair, with levels and `N` given per element.
fn poset(names: &[&str], pairs: &[(usize, usize)], n: &[usize], levels: &[i64]) -> Skeleton {
    Skeleton::from_relations(
        names.iter().map(|s| s.to_string()).collect(),
        pairs,
        n.to_vec(),
        Some(levels.iter().map(|&v| Q::from_integer(v)).collect()),
    )
    .expect("fixture skeleton")
}

/// Restrictions everywhere, except that the top coordinate is flipped when
/// projecting from any element in `flipped` (top has `N = 2`).
fn flip_top(sk: Skeleton, flipped: &[usize], top: usize) -> ProjectionSystem {
    let fam = LocalFamily::locally_finite(&sk);
    let sk2 = sk.clone();
    ProjectionSystem::from_fn(sk, fam.parts().to_vec(), move |d, g, z| {
        let r = z.restrict(&sk2, g).unwrap();
        if g == top && d != top && flipped.contains(&d) {
            Seq::raw(g, r.values().iter().map(|v| v.map(|x| 1 - x)).collect())
        } else {
            r
        }
    })
    .expect("fixture system")
}

/// `δ₁ < δ₂`, `N = (1, 2)`, projecting `(0, j)` to `1 − j`.
pub fn w3_twist() -> ProjectionSystem {
    flip_top(Skeleton::chain(&[1, 2]), &[0], 1)
}

/// 3-chain with `N = (1, 1, 2)` whose projections from the bottom and the
/// middle both flip the top coordinate. Valid.
pub fn twisted_chain() -> ProjectionSystem {
    flip_top(Skeleton::chain(&[1, 1, 2]), &[0, 1], 2)
}

/// Same shape as [`twisted_chain`] but only the direct bottom-to-top
/// projection flips, so going through the middle disagrees with it.
pub fn broken_composition() -> ProjectionSystem {
    flip_top(Skeleton::chain(&[1, 1, 2]), &[0], 2)
}

/// `a, b < c`, `N = (1, 1, 2)`, with the `a → c` projection flipped.
pub fn twisted_vee() -> ProjectionSystem {
    flip_top(
        poset(&["a", "b", "c"], &[(0, 2), (1, 2)], &[1, 1, 2], &[1, 1, 2]),
        &[0],
        2,
    )
}

pub fn vee_lf(n: [usize; 3]) -> ProjectionSystem {
    lf(poset(&["a", "b", "c"], &[(0, 2), (1, 2)], &n, &[1, 1, 2]))
}

/// `a < b`, `a < c` with `b`, `c` incomparable: not a tree.
pub fn lambda_lf(n: [usize; 3]) -> ProjectionSystem {
    lf(poset(&["a", "b", "c"], &[(0, 1), (0, 2)], &n, &[1, 2, 2]))
}

/// Every bundle the oracle comparison runs on; each has at most 8 local sequences.
pub fn oracle_bundles() -> Vec<(String, ProjectionSystem)> {
    let mut out: Vec<(String, ProjectionSystem)> = vec![];
    for n in [
        &[1][..],
        &[2],
        &[3],
        &[2, 2],
        &[2, 1],
        &[1, 2],
        &[3, 2],
        &[2, 1, 2],
    ] {
        out.push((format!("chain{n:?}"), chain_lf(n)));
    }
    for n in [&[2, 2][..], &[2, 3], &[2, 2, 2], &[3, 3]] {
        out.push((format!("antichain{n:?}"), antichain_lf(n)));
    }
    out.push(("w3_twist".into(), w3_twist()));
    out.push(("twisted_chain".into(), twisted_chain()));
    out.push(("twisted_vee".into(), twisted_vee()));
    out.push(("vee[2, 2, 1]".into(), vee_lf([2, 2, 1])));
    out.push(("vee[2, 1, 2]".into(), vee_lf([2, 1, 2])));
    out.push(("lambda[1, 2, 2]".into(), lambda_lf([1, 2, 2])));
    out
}

/// A random poset with at most `max_elems` elements and `N_δ ≤ max_n`, whose
/// locally finite family has at most `max_total` sequences. Levels are heights.
pub fn random_skeleton<R: Rng>(
    rng: &mut R,
    max_elems: usize,
    max_n: usize,
    max_total: usize,
) -> Skeleton {
    loop {
        let k = rng.gen_range(1..=max_elems);
        let mut pairs = vec![];
        for i in 0..k {
            for j in i + 1..k {
                if rng.gen_bool(0.4) {
                    pairs.push((i, j));
                }
            }
        }
        let n: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=max_n)).collect();
        let names = (1..=k).map(|i| format!("d{i}")).collect();
        let sk = Skeleton::from_relations(names, &pairs, n, None).expect("random poset");
        // height = longest chain below, so strict order implies strictly larger level
        let mut height = vec![1i64; k];
        for j in 0..k {
            for i in 0..j {
                if sk.lt(i, j) {
                    height[j] = height[j].max(height[i] + 1);
                }
            }
        }
        let sk = sk
            .with_levels(Some(height.into_iter().map(Q::from_integer).collect()))
            .expect("heights are monotone");
        if (0..k).map(|d| sk.local_product_size(d)).sum::<usize>() <= max_total {
            return sk;
        }
    }
}

/// Twists the locally finite family over `sk`: each `𝐒_δ` is relabelled by a
/// bijection that permutes coordinate `γ` depending only on the coordinates
/// strictly above `γ`, and projections are conjugated to match.
pub fn random_twist<R: Rng>(rng: &mut R, sk: &Skeleton) -> ProjectionSystem {
    let fam = LocalFamily::locally_finite(sk);
    // (sequence's base, permuted coordinate, values above it) ↦ permutation of that coordinate
    type Key = (usize, usize, Vec<Option<usize>>);
    let mut perms: BTreeMap<Key, Vec<usize>> = BTreeMap::new();
    let mut twist: Vec<BTreeMap<Seq, Seq>> = vec![];
    for d in 0..sk.len() {
        let mut m = BTreeMap::new();
        for z in fam.part(d) {
            let mut vals = z.values().to_vec();
            for g in sk.up_set(d) {
                let ctx: Vec<Option<usize>> = (0..sk.len())
                    .map(|b| if sk.lt(g, b) { z.get(b) } else { None })
                    .collect();
                let p = perms.entry((d, g, ctx)).or_insert_with(|| {
                    let mut p: Vec<usize> = (0..sk.n(g)).collect();
                    p.shuffle(rng);
                    p
                });
                vals[g] = Some(p[z.get(g).unwrap()]);
            }
            m.insert(z.clone(), Seq::raw(d, vals));
        }
        twist.push(m);
    }
    let untwist: Vec<BTreeMap<Seq, Seq>> = twist
        .iter()
        .map(|m| m.iter().map(|(a, b)| (b.clone(), a.clone())).collect())
        .collect();
    let sk2 = sk.clone();
    ProjectionSystem::from_fn(sk.clone(), fam.parts().to_vec(), move |d, g, w| {
        let z = &untwist[d][w];
        twist[g][&z.restrict(&sk2, g).unwrap()].clone()
    })
    .expect("twisted system")
}

/// A random twisted projection system (see [`random_skeleton`] and [`random_twist`]).
pub fn random_system<R: Rng>(
    rng: &mut R,
    max_elems: usize,
    max_n: usize,
    max_total: usize,
) -> ProjectionSystem {
    let sk = random_skeleton(rng, max_elems, max_n, max_total);
    random_twist(rng, &sk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixtures_validate() {
        for (name, ps) in oracle_bundles() {
            assert!(ps.validate().is_empty(), "{name}: {:?}", ps.validate());
            assert!(ps.total() <= 8, "{name}");
        }
        assert!(oracle_bundles().len() >= 15);
        assert!(!broken_composition().validate().is_empty());
    }

    #[test]
    fn random_systems_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut twisted = 0;
        for _ in 0..40 {
            let ps = random_system(&mut rng, 4, 3, 8);
            assert!(ps.validate().is_empty());
            assert!(ps.total() <= 8);
            twisted += usize::from(!ps.is_trivial());
        }
        assert!(twisted > 0);
    }
}
