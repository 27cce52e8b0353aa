use crate::error::{invariant, Error, Result};
use crate::permgroup::{Perm, PermGroup};
use crate::search::{self, Structure};

use super::{ProjectionSystem, Seq, Skeleton};

/// The coordinate groups `H_δ`.
#[derive(Clone, Debug)]
pub enum CoordinateGroups {
    /// `Sym(N_δ)` everywhere; the coordinate condition is then automatic.
    Full,
    Given(Vec<PermGroup>),
}

impl CoordinateGroups {
    fn check(&self, sk: &Skeleton) -> Result<()> {
        if let CoordinateGroups::Given(hs) = self {
            if hs.len() != sk.len() {
                return Err(Error::DomainMismatch(
                    "one coordinate group per element expected".into(),
                ));
            }
            for (d, h) in hs.iter().enumerate() {
                if h.degree() != sk.n(d) {
                    return Err(Error::DomainMismatch(format!(
                        "coordinate group at {} has the wrong degree",
                        sk.name(d)
                    )));
                }
                let all: Vec<usize> = (0..sk.n(d)).collect();
                if !h.is_transitive(&all)? {
                    return Err(Error::NotTransitive(sk.name(d).to_string()));
                }
            }
        }
        Ok(())
    }

    fn admits(&self, d: usize, p: &Perm) -> bool {
        match self {
            CoordinateGroups::Full => true,
            CoordinateGroups::Given(hs) => hs[d].contains(p),
        }
    }
}

/// `i ↦ g(z^δ_i)(δ)` for `z` the `i0`-th element of `𝐒_δ`; `None` if not a permutation.
fn coordinate_action(ps: &ProjectionSystem, g: &Perm, d: usize, i0: usize) -> Option<Perm> {
    let p = ps.canonical_poset();
    coordinate_action_with(ps, &p.offset, g, d, i0)
}

fn coordinate_action_with(
    ps: &ProjectionSystem,
    offset: &[usize],
    g: &Perm,
    d: usize,
    i0: usize,
) -> Option<Perm> {
    let z = &ps.part(d)[i0];
    let img: Vec<usize> = (0..ps.skeleton().n(d))
        .map(|i| {
            let k = ps
                .index_in(d, &z.perturb(i))
                .expect("parts are perturbation closed");
            let gk = g.apply(offset[d] + k);
            ps.part(d)[gk - offset[d]].get(d).unwrap()
        })
        .collect();
    Perm::from_images(img).ok()
}

/// The projective wreath product, acting on the canonical poset's ground set:
/// block-preserving order automorphisms of the canonical poset, filtered by the
/// coordinate condition when `H` is not full.
pub fn wreath_group(
    ps: &ProjectionSystem,
    h: &CoordinateGroups,
    max_order: usize,
) -> Result<PermGroup> {
    let sk = ps.skeleton();
    h.check(sk)?;
    let p = ps.canonical_poset();
    let colour: Vec<u64> = p.block_of.iter().map(|&b| b as u64).collect();
    let label: Vec<Vec<u64>> = (0..p.len())
        .map(|a| {
            (0..p.len())
                .map(|b| u64::from(p.le[a][b]) | (u64::from(p.le[b][a]) << 1))
                .collect()
        })
        .collect();
    // blocks high in Δ first, so lower elements are pinned by their projections
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by_key(|&a| (sk.up_set(p.block_of[a]).len(), a));
    let all = search::automorphisms(
        &Structure {
            colour: &colour,
            label: &label,
        },
        &order,
        max_order,
    )?;
    let mut kept = vec![];
    for g in all {
        let mut ok = true;
        for d in 0..sk.len() {
            for i in 0..ps.part(d).len() {
                let act = coordinate_action_with(ps, &p.offset, &g, d, i);
                invariant(act.is_some(), || {
                    "coordinate action is not a permutation".into()
                })?;
                if !h.admits(d, act.as_ref().unwrap()) {
                    ok = false;
                }
            }
        }
        if ok {
            kept.push(g);
        }
    }
    Ok(PermGroup::from_elements_unchecked(p.names, kept))
}

pub const ORACLE_LIMIT: usize = 8;

/// Filters all of `Sym(𝐒)` by the two defining conditions, read literally.
pub fn brute_wreath_oracle(ps: &ProjectionSystem, h: &CoordinateGroups) -> Result<PermGroup> {
    let sk = ps.skeleton();
    h.check(sk)?;
    let p = ps.canonical_poset();
    if p.len() > ORACLE_LIMIT {
        return Err(Error::TooLarge {
            size: p.len(),
            limit: ORACLE_LIMIT,
        });
    }
    let mut out = vec![];
    crate::permgroup::for_each_permutation(p.len(), |img| {
        let g = Perm::from_images_unchecked(img.to_vec());
        // (P1): blocks preserved and projections commute
        let blocks = (0..p.len()).all(|a| p.block_of[g.apply(a)] == p.block_of[a]);
        if !blocks {
            return;
        }
        let commutes = (0..p.len()).all(|a| {
            let d = p.block_of[a];
            sk.up_set(d).into_iter().all(|gam| {
                let pa = p.global(gam, ps.project(d, gam, p.local[a]));
                let ga = g.apply(a);
                g.apply(pa) == p.global(gam, ps.project(d, gam, p.local[ga]))
            })
        });
        if !commutes {
            return;
        }
        // (P2)
        let coords = (0..sk.len()).all(|d| {
            (0..ps.part(d).len()).all(|i| {
                coordinate_action_with(ps, &p.offset, &g, d, i).is_some_and(|a| h.admits(d, &a))
            })
        });
        if coords {
            out.push(g);
        }
    });
    Ok(PermGroup::from_elements_unchecked(p.names, out))
}

/// The group is transitive on every block of the canonical poset.
pub fn is_locally_homogeneous(ps: &ProjectionSystem, max_order: usize) -> Result<bool> {
    let g = wreath_group(ps, &CoordinateGroups::Full, max_order)?;
    let p = ps.canonical_poset();
    for d in 0..ps.skeleton().len() {
        let block: Vec<usize> = p.block(d).collect();
        if !g.is_transitive(&block)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `i ↦ g(z^δ_i)(δ)` is a permutation for every `g`, `δ`, `z` (re-checked after the fact).
pub fn coordinate_actions_are_permutations(ps: &ProjectionSystem, g: &PermGroup) -> bool {
    g.elements().iter().all(|x| {
        (0..ps.skeleton().len())
            .all(|d| (0..ps.part(d).len()).all(|i| coordinate_action(ps, x, d, i).is_some()))
    })
}

fn restriction_labels(sk: &Skeleton, s: &[Vec<usize>]) -> Vec<Vec<u64>> {
    assert!(sk.len() <= 64, "restriction mask limited to 64 elements");
    s.iter()
        .map(|x| {
            s.iter()
                .map(|y| {
                    (0..sk.len())
                        .filter(|&d| Seq::from_global(sk, x, d) == Seq::from_global(sk, y, d))
                        .fold(0u64, |m, d| m | (1 << d))
                })
                .collect()
        })
        .collect()
}

/// `Wr^S Sym(N_δ)` on a global domain: permutations of `S` with
/// `x|_δ = y|_δ ⟺ g(x)|_δ = g(y)|_δ` for every `δ`.
pub fn global_wreath_group(sk: &Skeleton, s: &[Vec<usize>], max_order: usize) -> Result<PermGroup> {
    let label = restriction_labels(sk, s);
    let colour = vec![0u64; s.len()];
    let order: Vec<usize> = (0..s.len()).collect();
    let el = search::automorphisms(
        &Structure {
            colour: &colour,
            label: &label,
        },
        &order,
        max_order,
    )?;
    let names = s.iter().map(|x| render_global(x)).collect();
    Ok(PermGroup::from_elements_unchecked(names, el))
}

pub fn render_global(x: &[usize]) -> String {
    let v: Vec<String> = x.iter().map(|i| i.to_string()).collect();
    format!("({})", v.join(","))
}

/// For all `x, y ∈ S` and `δ` some `g` has `g(x)|_δ = y|_δ`.
pub fn is_approximately_homogeneous(
    sk: &Skeleton,
    s: &[Vec<usize>],
    max_order: usize,
) -> Result<bool> {
    let g = global_wreath_group(sk, s, max_order)?;
    for a in 0..s.len() {
        for y in s {
            for d in 0..sk.len() {
                let target = Seq::from_global(sk, y, d);
                let hit = g
                    .elements()
                    .iter()
                    .any(|e| Seq::from_global(sk, &s[e.apply(a)], d) == target);
                if !hit {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::super::{fixtures, LocalFamily};
    use super::*;

    const M: usize = 1_000_000;

    fn lf(sk: Skeleton) -> ProjectionSystem {
        ProjectionSystem::trivial(&LocalFamily::locally_finite(&sk)).unwrap()
    }

    #[test]
    fn classic_wreath_and_direct_products() {
        let chain = lf(Skeleton::chain(&[2, 2]));
        let g = wreath_group(&chain, &CoordinateGroups::Full, M).unwrap();
        assert_eq!(g.order(), 8);
        assert_eq!(
            g,
            brute_wreath_oracle(&chain, &CoordinateGroups::Full).unwrap()
        );
        let anti = lf(Skeleton::antichain(&[2, 2]));
        assert_eq!(
            wreath_group(&anti, &CoordinateGroups::Full, M)
                .unwrap()
                .order(),
            4
        );
        assert!(coordinate_actions_are_permutations(&chain, &g));
    }

    #[test]
    fn twisted_system_has_order_two() {
        let ps = fixtures::w3_twist();
        let g = wreath_group(&ps, &CoordinateGroups::Full, M).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(
            g,
            brute_wreath_oracle(&ps, &CoordinateGroups::Full).unwrap()
        );
    }

    #[test]
    fn restricted_coordinate_groups() {
        // H = cyclic group of order 3 on the bottom of a 2-chain with N = (3, 1)
        let ps = lf(Skeleton::chain(&[3, 1]));
        let c3 = PermGroup::closure(
            vec!["0".into(), "1".into(), "2".into()],
            vec![Perm::from_cycles(3, &[&[0, 1, 2]]).unwrap()],
            10,
        )
        .unwrap();
        let h = CoordinateGroups::Given(vec![c3, PermGroup::trivial(vec!["0".into()])]);
        let g = wreath_group(&ps, &h, M).unwrap();
        assert_eq!(g.order(), 3);
        assert_eq!(g, brute_wreath_oracle(&ps, &h).unwrap());
        let bad = CoordinateGroups::Given(vec![
            PermGroup::trivial(vec!["0".into(), "1".into(), "2".into()]),
            PermGroup::trivial(vec!["0".into()]),
        ]);
        assert!(matches!(
            wreath_group(&ps, &bad, M),
            Err(Error::NotTransitive(_))
        ));
    }

    #[test]
    fn oracle_refuses_large_inputs() {
        let ps = lf(Skeleton::chain(&[3, 3]));
        assert!(matches!(
            brute_wreath_oracle(&ps, &CoordinateGroups::Full),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn global_group_on_the_lf_domain() {
        let sk = Skeleton::chain(&[2, 2, 1]);
        let s = sk.full_product(100).unwrap();
        assert_eq!(global_wreath_group(&sk, &s, M).unwrap().order(), 8);
        assert!(is_approximately_homogeneous(&sk, &s, M).unwrap());
        assert!(is_locally_homogeneous(&lf(sk), M).unwrap());
    }
}
