//! Backtracking search for permutations preserving a coloured, pair-labelled structure.
//!
//! Isometry groups, tree automorphisms and wreath groups are all instances:
//! the colour separates points that may never be exchanged (level, block) and
//! the pair label carries the relation to preserve (distance, order, restriction).

use crate::error::{Error, Result};
use crate::permgroup::Perm;

pub(crate) struct Structure<'a> {
    pub colour: &'a [u64],
    pub label: &'a [Vec<u64>],
}

impl Structure<'_> {
    fn n(&self) -> usize {
        self.colour.len()
    }
}

/// Every permutation `g` with `colour[g x] = colour[x]` and
/// `label[g x][g y] = label[x][y]`, in lexicographic order of images.
///
/// `order` is the sequence in which points get assigned; assigning points
/// with many constraints early prunes best.
pub(crate) fn automorphisms(s: &Structure, order: &[usize], max_order: usize) -> Result<Vec<Perm>> {
    let n = s.n();
    debug_assert_eq!(order.len(), n);
    let mut img = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut out = vec![];
    extend(s, order, 0, &mut img, &mut used, &mut out, max_order)?;
    out.sort();
    Ok(out)
}

fn extend(
    s: &Structure,
    order: &[usize],
    depth: usize,
    img: &mut [usize],
    used: &mut [bool],
    out: &mut Vec<Perm>,
    max_order: usize,
) -> Result<()> {
    if depth == order.len() {
        if out.len() >= max_order {
            return Err(Error::OrderGuardExceeded { limit: max_order });
        }
        out.push(Perm::from_images_unchecked(img.to_vec()));
        return Ok(());
    }
    let v = order[depth];
    for w in 0..s.n() {
        if used[w] || s.colour[w] != s.colour[v] || s.label[w][w] != s.label[v][v] {
            continue;
        }
        let consistent = order[..depth].iter().all(|&u| {
            let iu = img[u];
            s.label[u][v] == s.label[iu][w] && s.label[v][u] == s.label[w][iu]
        });
        if !consistent {
            continue;
        }
        img[v] = w;
        used[w] = true;
        extend(s, order, depth + 1, img, used, out, max_order)?;
        used[w] = false;
        img[v] = usize::MAX;
    }
    Ok(())
}

/// Reference implementation: filter all `n!` permutations.
pub(crate) fn automorphisms_brute(s: &Structure) -> Vec<Perm> {
    let n = s.n();
    let mut out = vec![];
    crate::permgroup::for_each_permutation(n, |p| {
        let ok = (0..n).all(|x| {
            s.colour[p[x]] == s.colour[x] && (0..n).all(|y| s.label[p[x]][p[y]] == s.label[x][y])
        });
        if ok {
            out.push(Perm::from_images_unchecked(p.to_vec()));
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_graph_has_dihedral_group() {
        let n = 5;
        let label: Vec<Vec<u64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| u64::from((i + 1) % n == j || (j + 1) % n == i))
                    .collect()
            })
            .collect();
        let colour = vec![0; n];
        let s = Structure {
            colour: &colour,
            label: &label,
        };
        let order: Vec<usize> = (0..n).collect();
        let fast = automorphisms(&s, &order, 1000).unwrap();
        assert_eq!(fast.len(), 10);
        assert_eq!(fast, automorphisms_brute(&s));
    }

    #[test]
    fn guard_trips() {
        let colour = vec![0; 5];
        let label = vec![vec![0; 5]; 5];
        let s = Structure {
            colour: &colour,
            label: &label,
        };
        let order: Vec<usize> = (0..5).collect();
        assert!(automorphisms(&s, &order, 119).is_err());
        assert_eq!(automorphisms(&s, &order, 120).unwrap().len(), 120);
    }
}
