use std::collections::BTreeMap;

use crate::error::{invariant, Error, Result};
use crate::ltree::{LTree, LinearOrder};
use crate::permgroup::{verify_induced, IsoWitness, Perm};
use crate::rational::Q;

use super::{wreath_group, CoordinateGroups, ProjectionSystem};

/// How far the side chains of the truncated tree reach.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideChains {
    /// Each side chain stops one step above the bottom of its own block, so
    /// side chains are always shorter than the main chains next to them.
    Short,
    /// Side chains run down to the global bottom level. On a finite level set
    /// this leaves every bottom element with a swappable twin chain.
    Full,
}

#[derive(Clone, Debug)]
pub struct TreeFromWreath {
    pub tree: LTree,
    /// The canonical poset as a leveled tree.
    pub poset_tree: LTree,
    /// Per skeleton element, its tag (position among the elements of its level, from 1).
    pub tags: Vec<usize>,
    pub witness: IsoWitness,
}

/// The canonical poset as a leveled tree: `z ∈ 𝐒_δ` sits at `δ`'s level and its
/// parent is its projection to the element right above `δ`.
pub fn poset_as_tree(ps: &ProjectionSystem) -> Result<LTree> {
    let sk = ps.skeleton();
    let dtree = sk.as_ltree()?;
    let p = ps.canonical_poset();
    let level: Vec<usize> = (0..p.len()).map(|a| dtree.level(p.block_of[a])).collect();
    let parent: Vec<Option<usize>> = (0..p.len())
        .map(|a| {
            let d = p.block_of[a];
            dtree
                .parent(d)
                .map(|g| p.global(g, ps.project(d, g, p.local[a])))
        })
        .collect();
    let tree = LTree::from_parents(dtree.order().clone(), p.names.clone(), level, parent).map_err(
        |e| {
            Error::InvalidSystem(format!(
                "canonical poset is not a leveled tree ({e}); pad the top first"
            ))
        },
    )?;
    if let Some(v) = tree.validate().violations.first() {
        return Err(Error::InvalidSystem(format!(
            "canonical poset is not a leveled tree: {}; pad the top first",
            tree.describe(v)
        )));
    }
    for a in 0..p.len() {
        for b in 0..p.len() {
            invariant(tree.leq(a, b) == p.le[a][b], || {
                "tree order differs from the canonical order".into()
            })?;
        }
    }
    Ok(tree)
}

/// Smallest depth accepted by [`tree_from_wreath`] for this skeleton.
pub fn min_depth(ps: &ProjectionSystem, side: SideChains) -> Result<usize> {
    let tags = level_tags(ps)?;
    let width = tags.iter().copied().max().unwrap_or(1);
    Ok(match side {
        SideChains::Short => width + 2,
        SideChains::Full => width + 1,
    })
}

fn level_tags(ps: &ProjectionSystem) -> Result<Vec<usize>> {
    let sk = ps.skeleton();
    let levels = sk.levels().ok_or(Error::MissingLevels)?;
    let mut seen: BTreeMap<Q, usize> = BTreeMap::new();
    Ok(levels
        .iter()
        .map(|v| {
            let c = seen.entry(*v).or_insert(0);
            *c += 1;
            *c
        })
        .collect())
}

/// The `k`-step truncation of the tree whose automorphisms are the localized
/// automorphisms of the canonical poset: `k` stacked copies of every node,
/// plus a side chain under copy `#z − 1` that records which block `z` is in.
pub fn tree_from_wreath(
    ps: &ProjectionSystem,
    k: usize,
    side: SideChains,
    max_order: usize,
) -> Result<TreeFromWreath> {
    let need = min_depth(ps, side)?;
    if k < need {
        return Err(Error::DepthTooSmall { k, need });
    }
    let tags = level_tags(ps)?;
    let poset_tree = poset_as_tree(ps)?;
    let p = ps.canonical_poset();
    let base = poset_tree.order().labels().to_vec();
    let gap = base
        .windows(2)
        .map(|w| w[1] - w[0])
        .min()
        .unwrap_or(Q::from_integer(1));
    let eps = gap / Q::from_integer(k as i64 + 1);
    // level index of copy n in block j
    let idx = |j: usize, n: usize| j * k + (k - 1 - n);
    let mut labels = vec![Q::from_integer(0); base.len() * k];
    for (j, &v) in base.iter().enumerate() {
        for n in 0..k {
            labels[idx(j, n)] = v - eps * Q::from_integer(n as i64);
        }
    }
    let order = LinearOrder::new(labels)?;
    let np = p.len();
    let main = |z: usize, n: usize| z * k + n;
    let mut names = vec![];
    let mut level = vec![];
    let mut parent = vec![];
    for z in 0..np {
        let j = poset_tree.level(z);
        for n in 0..k {
            names.push(format!("{}#{}", p.names[z], n));
            level.push(idx(j, n));
            parent.push(if n > 0 {
                Some(main(z, n - 1))
            } else {
                poset_tree.parent(z).map(|pz| main(pz, k - 1))
            });
        }
    }
    let mut side_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for z in 0..np {
        let j = poset_tree.level(z);
        let tag = tags[p.block_of[z]];
        let start = idx(j, tag);
        let end = match side {
            SideChains::Short => j * k + 1,
            SideChains::Full => 0,
        };
        let mut above = main(z, tag - 1);
        for lv in (end..=start).rev() {
            let id = names.len();
            names.push(format!("{}~{}", p.names[z], lv));
            level.push(lv);
            parent.push(Some(above));
            side_index.insert((z, lv), id);
            above = id;
        }
    }
    let tree = LTree::from_parents(order, names, level, parent)?;
    if let Some(v) = tree.validate().violations.first() {
        return Err(Error::Invariant(format!(
            "truncated tree is malformed: {}",
            tree.describe(v)
        )));
    }
    let source = wreath_group(ps, &CoordinateGroups::Full, max_order)?;
    let target = tree.aut_group(max_order)?;
    let lift = |f: &Perm| -> Result<Perm> {
        let mut img = vec![0; tree.len()];
        for z in 0..np {
            for n in 0..k {
                img[main(z, n)] = main(f.apply(z), n);
            }
        }
        for (&(z, lv), &id) in &side_index {
            img[id] = *side_index.get(&(f.apply(z), lv)).ok_or_else(|| {
                Error::BlockMismatch("lifted map sends a side chain nowhere".into())
            })?;
        }
        Perm::from_images(img)
    };
    let witness = verify_induced(
        "poset automorphisms lifted to the truncated tree",
        &source,
        &target,
        lift,
    )?;
    Ok(TreeFromWreath {
        tree,
        poset_tree,
        tags,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{fixtures, pad_top, LocalFamily, Skeleton};
    use super::*;

    const M: usize = 1_000_000;

    #[test]
    fn single_node_system() {
        let ps = ProjectionSystem::trivial(&LocalFamily::locally_finite(&Skeleton::chain(&[1])))
            .unwrap();
        let t = tree_from_wreath(&ps, 3, SideChains::Short, M).unwrap();
        assert!(t.witness.verified);
        assert_eq!(t.witness.target.order(), 1);
        assert!(matches!(
            tree_from_wreath(&ps, 2, SideChains::Short, M),
            Err(Error::DepthTooSmall { k: 2, need: 3 })
        ));
    }

    #[test]
    fn twist_and_chain_after_top_padding() {
        for (ps, order) in [(fixtures::w3_twist(), 2), (fixtures::chain_lf(&[2, 2]), 8)] {
            let padded = pad_top(&ps, 1, M).unwrap().system;
            let t = tree_from_wreath(&padded, 3, SideChains::Short, M).unwrap();
            assert!(t.witness.verified, "{:?}", t.witness.note);
            assert_eq!(t.witness.target.order(), order);
        }
    }

    #[test]
    fn full_side_chains_leave_bottom_twins() {
        let padded = pad_top(&fixtures::chain_lf(&[2, 2]), 1, M).unwrap().system;
        let t = tree_from_wreath(&padded, 3, SideChains::Full, M).unwrap();
        assert!(!t.witness.verified);
        // one extra swap per bottom element of the poset
        assert_eq!(t.witness.target.order(), 8 * 2usize.pow(4));
    }

    #[test]
    fn unpadded_multi_root_poset_is_refused() {
        assert!(matches!(
            tree_from_wreath(&fixtures::w3_twist(), 4, SideChains::Short, M),
            Err(Error::InvalidSystem(_))
        ));
    }
}
