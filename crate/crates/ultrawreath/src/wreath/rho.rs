use std::collections::BTreeSet;

use crate::error::{invariant, Error, Result};
use crate::permgroup::{verify_conjugation, IsoWitness};

use super::{support_kind, wreath_group, CoordinateGroups, LocalFamily, ProjectionSystem, Seq};

/// The rewritten family `𝐒' = ρ(𝐒)` and, per element, where each sequence went.
#[derive(Clone, Debug)]
pub struct RhoResult {
    pub family: LocalFamily,
    /// `map[δ][i]` = index of `ρ(z_i)` in `family.part(δ)`
    pub map: Vec<Vec<usize>>,
}

/// `ρ(z)(γ) = π_{δγ}(z)(γ)`, with the three properties of the rewriting map
/// checked exhaustively.
pub fn rho(ps: &ProjectionSystem) -> Result<RhoResult> {
    if let Some(v) = ps.validate().first() {
        return Err(Error::InvalidSystem(ps.describe(v)));
    }
    let sk = ps.skeleton();
    let image = |d: usize, i: usize| -> Seq {
        let vals = (0..sk.len())
            .map(|g| {
                sk.le(d, g)
                    .then(|| ps.part(g)[ps.project(d, g, i)].get(g).unwrap())
            })
            .collect();
        Seq::raw(d, vals)
    };
    let images: Vec<Vec<Seq>> = (0..sk.len())
        .map(|d| (0..ps.part(d).len()).map(|i| image(d, i)).collect())
        .collect();
    for d in 0..sk.len() {
        let part = ps.part(d);
        for g in sk.up_set(d) {
            for i in 0..part.len() {
                let ri = images[d][i].restrict(sk, g).unwrap();
                // z|_γ = z'|_γ ⟺ ρ(z)|_γ = ρ(z')|_γ
                for j in 0..part.len() {
                    let lhs = part[i].restrict(sk, g) == part[j].restrict(sk, g);
                    let rhs = ri == images[d][j].restrict(sk, g).unwrap();
                    invariant(lhs == rhs, || {
                        format!("rewriting does not respect restriction at {}", sk.name(g))
                    })?;
                }
                // π_{δγ}(z) = z'' ⟺ ρ(z)|_γ = ρ(z'')
                for k in 0..ps.part(g).len() {
                    let lhs = ps.project(d, g, i) == k;
                    let rhs = ri == images[g][k];
                    invariant(lhs == rhs, || {
                        format!(
                            "rewriting does not turn projection into restriction at {}",
                            sk.name(g)
                        )
                    })?;
                }
            }
        }
        for (i, z) in part.iter().enumerate() {
            invariant(images[d][i].get(d) == z.get(d), || {
                "rewriting changed a bottom coordinate".into()
            })?;
            invariant(support_kind(sk, &images[d][i].support()).max, || {
                "rewritten support fails the maximum condition".into()
            })?;
        }
        let distinct: BTreeSet<&Seq> = images[d].iter().collect();
        invariant(distinct.len() == part.len(), || {
            format!("rewriting is not injective at {}", sk.name(d))
        })?;
    }
    let family = LocalFamily::new(sk.clone(), images.clone())?;
    if let Some(v) = family.validate().first() {
        return Err(Error::Invariant(format!(
            "rewritten family is not a family of local domains: {}",
            family.describe(v)
        )));
    }
    let map = (0..sk.len())
        .map(|d| {
            images[d]
                .iter()
                .map(|z| family.part(d).binary_search(z).unwrap())
                .collect()
        })
        .collect();
    Ok(RhoResult { family, map })
}

/// Computes both wreath products independently and checks that conjugation
/// by `ρ` carries one onto the other.
pub fn verify_rho(ps: &ProjectionSystem, max_order: usize) -> Result<IsoWitness> {
    let r = rho(ps)?;
    let source = wreath_group(ps, &CoordinateGroups::Full, max_order)?;
    let plain = ProjectionSystem::trivial(&r.family)?;
    let target = wreath_group(&plain, &CoordinateGroups::Full, max_order)?;
    let p = ps.canonical_poset();
    let q = plain.canonical_poset();
    let beta: Vec<usize> = (0..p.len())
        .map(|a| q.global(p.block_of[a], r.map[p.block_of[a]][p.local[a]]))
        .collect();
    verify_conjugation("rewriting map", &source, &target, &beta)
}

#[cfg(test)]
mod tests {
    use super::super::{fixtures, Skeleton};
    use super::*;

    #[test]
    fn trivial_projections_rewrite_to_themselves() {
        let ps =
            ProjectionSystem::trivial(&LocalFamily::locally_finite(&Skeleton::chain(&[2, 2, 1])))
                .unwrap();
        let r = rho(&ps).unwrap();
        assert_eq!(r.family.parts(), ps.parts());
        assert!(r
            .map
            .iter()
            .all(|m| m.iter().enumerate().all(|(i, &j)| i == j)));
        assert!(verify_rho(&ps, 1000).unwrap().verified);
    }

    #[test]
    fn twist_is_undone() {
        let ps = fixtures::w3_twist();
        let r = rho(&ps).unwrap();
        let sk = ps.skeleton();
        // ρ(0, j) = (0, 1 - j)
        for (i, z) in ps.part(0).iter().enumerate() {
            let img = &r.family.part(0)[r.map[0][i]];
            assert_eq!(
                img.get(1),
                Some(1 - z.get(1).unwrap()),
                "{}",
                img.render(sk)
            );
        }
        let w = verify_rho(&ps, 1000).unwrap();
        assert!(w.verified);
        assert_eq!((w.source.order(), w.target.order()), (2, 2));
    }

    #[test]
    fn invalid_systems_are_rejected() {
        assert!(matches!(
            rho(&fixtures::broken_composition()),
            Err(Error::InvalidSystem(_))
        ));
    }
}
