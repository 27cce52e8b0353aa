use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::ltree::{LTree, LinearOrder};
use crate::permgroup::PermGroup;
use crate::rational::Q;
use crate::search::{self, Structure};

/// A finite poset `Δ` with a size `N_δ ≥ 1` per element and, optionally, a
/// level value per element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skeleton {
    names: Vec<String>,
    le: Vec<Vec<bool>>,
    n: Vec<usize>,
    levels: Option<Vec<Q>>,
}

impl Skeleton {
    /// From a full `≤` matrix, which must be a partial order.
    pub fn from_matrix(
        names: Vec<String>,
        le: Vec<Vec<bool>>,
        n: Vec<usize>,
        levels: Option<Vec<Q>>,
    ) -> Result<Self> {
        let k = names.len();
        let bad = |m: String| Err(Error::InvalidSkeleton(m));
        if k == 0 {
            return bad("empty skeleton".into());
        }
        if names.iter().collect::<BTreeSet<_>>().len() != k {
            return bad("duplicate element names".into());
        }
        if le.len() != k || le.iter().any(|r| r.len() != k) || n.len() != k {
            return bad("table sizes do not match the element list".into());
        }
        if levels.as_ref().is_some_and(|l| l.len() != k) {
            return bad("level table has the wrong size".into());
        }
        if let Some(d) = n.iter().position(|&x| x == 0) {
            return bad(format!("N is zero at {}", names[d]));
        }
        for a in 0..k {
            if !le[a][a] {
                return bad(format!("order is not reflexive at {}", names[a]));
            }
            for b in 0..k {
                if a != b && le[a][b] && le[b][a] {
                    return bad(format!(
                        "order is not antisymmetric at {}, {}",
                        names[a], names[b]
                    ));
                }
                for c in 0..k {
                    if le[a][b] && le[b][c] && !le[a][c] {
                        return bad(format!(
                            "order is not transitive at {}, {}, {}",
                            names[a], names[b], names[c]
                        ));
                    }
                }
            }
        }
        Ok(Skeleton {
            names,
            le,
            n,
            levels,
        })
    }

    /// From covering pairs `(lower, upper)`; the order is their reflexive-transitive closure.
    pub fn from_relations(
        names: Vec<String>,
        pairs: &[(usize, usize)],
        n: Vec<usize>,
        levels: Option<Vec<Q>>,
    ) -> Result<Self> {
        let k = names.len();
        let mut le = vec![vec![false; k]; k];
        for (a, row) in le.iter_mut().enumerate() {
            row[a] = true;
        }
        for &(a, b) in pairs {
            if a >= k || b >= k {
                return Err(Error::InvalidSkeleton(
                    "relation mentions an unknown element".into(),
                ));
            }
            le[a][b] = true;
        }
        for m in 0..k {
            for a in 0..k {
                for b in 0..k {
                    if le[a][m] && le[m][b] {
                        le[a][b] = true;
                    }
                }
            }
        }
        Self::from_matrix(names, le, n, levels)
    }

    /// `d1 < d2 < …` with the given sizes, bottom first, levels `1, 2, …`.
    pub fn chain(n: &[usize]) -> Self {
        let k = n.len();
        let names = (1..=k).map(|i| format!("d{i}")).collect();
        let pairs: Vec<(usize, usize)> = (1..k).map(|i| (i - 1, i)).collect();
        let levels = (1..=k as i64).map(Q::from_integer).collect();
        Self::from_relations(names, &pairs, n.to_vec(), Some(levels)).expect("chain skeleton")
    }

    /// Pairwise incomparable elements, all at level 1.
    pub fn antichain(n: &[usize]) -> Self {
        let k = n.len();
        let names = (1..=k).map(|i| format!("d{i}")).collect();
        Self::from_relations(names, &[], n.to_vec(), Some(vec![Q::from_integer(1); k]))
            .expect("antichain skeleton")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, d: usize) -> &str {
        &self.names[d]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        self.le[a][b]
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.le[a][b]
    }

    pub fn n(&self, d: usize) -> usize {
        self.n[d]
    }

    pub fn n_values(&self) -> Vec<usize> {
        self.n.clone()
    }

    pub fn levels(&self) -> Option<&[Q]> {
        self.levels.as_deref()
    }

    pub fn level(&self, d: usize) -> Option<Q> {
        self.levels.as_ref().map(|l| l[d])
    }

    pub fn with_levels(mut self, levels: Option<Vec<Q>>) -> Result<Self> {
        if levels.as_ref().is_some_and(|l| l.len() != self.len()) {
            return Err(Error::InvalidSkeleton(
                "level table has the wrong size".into(),
            ));
        }
        self.levels = levels;
        Ok(self)
    }

    /// `{γ : γ ≥ δ}`, ascending by index.
    pub fn up_set(&self, d: usize) -> Vec<usize> {
        (0..self.len()).filter(|&g| self.le[d][g]).collect()
    }

    pub fn is_linear(&self) -> bool {
        (0..self.len()).all(|a| (0..self.len()).all(|b| self.le[a][b] || self.le[b][a]))
    }

    pub fn minimal(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&a| !(0..self.len()).any(|b| self.lt(b, a)))
            .collect()
    }

    pub fn maximal(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&a| !(0..self.len()).any(|b| self.lt(a, b)))
            .collect()
    }

    /// Elements in a linear extension, largest first (ties by index).
    pub fn top_down(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.len()).collect();
        v.sort_by_key(|&d| (self.up_set(d).len(), d));
        v
    }

    /// `∏_{γ ≥ δ} N_γ`
    pub fn local_product_size(&self, d: usize) -> usize {
        self.up_set(d).iter().map(|&g| self.n[g]).product()
    }

    pub fn global_product_size(&self) -> usize {
        self.n.iter().product()
    }

    /// `(Δ, ≤, λ)` as a leveled tree, if the level map makes it one: the
    /// elements above each `δ` must form a chain hitting every higher level once.
    pub fn as_ltree(&self) -> Result<LTree> {
        let levels = self.levels.as_ref().ok_or(Error::MissingLevels)?;
        let values: BTreeSet<Q> = levels.iter().copied().collect();
        let order = LinearOrder::new(values.into_iter().collect())?;
        let idx: Vec<usize> = levels.iter().map(|&v| order.index_of(v).unwrap()).collect();
        let mut parent = vec![];
        for d in 0..self.len() {
            let above: Vec<usize> = self.up_set(d);
            let want: Vec<usize> = (idx[d]..order.len()).collect();
            let mut got: Vec<usize> = above.iter().map(|&g| idx[g]).collect();
            got.sort();
            if got != want {
                return Err(Error::InvalidSkeleton(format!(
                    "{} does not sit under exactly one element per higher level",
                    self.names[d]
                )));
            }
            parent.push(above.iter().copied().find(|&g| idx[g] == idx[d] + 1));
        }
        let tree = LTree::from_parents(order, self.names.clone(), idx, parent)?;
        let report = tree.validate();
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidSkeleton(tree.describe(v)));
        }
        for a in 0..self.len() {
            for b in 0..self.len() {
                if tree.leq(a, b) != self.le[a][b] {
                    return Err(Error::InvalidSkeleton(
                        "order is not the one induced by the levels".into(),
                    ));
                }
            }
        }
        Ok(tree)
    }

    pub fn is_treeable(&self) -> bool {
        self.as_ltree().is_ok_and(|t| t.is_pruned())
    }

    /// Order automorphisms that preserve `N` (and the level map, when present).
    pub fn automorphisms(&self, max_order: usize) -> Result<PermGroup> {
        let k = self.len();
        let level_rank: Vec<u64> = match &self.levels {
            Some(l) => {
                let vals: BTreeSet<Q> = l.iter().copied().collect();
                l.iter()
                    .map(|v| vals.iter().position(|w| w == v).unwrap() as u64)
                    .collect()
            }
            None => vec![0; k],
        };
        let colour: Vec<u64> = (0..k)
            .map(|d| (level_rank[d] << 32) | self.n[d] as u64)
            .collect();
        let label: Vec<Vec<u64>> = (0..k)
            .map(|a| (0..k).map(|b| u64::from(self.le[a][b])).collect())
            .collect();
        let order = self.top_down();
        let el = search::automorphisms(
            &Structure {
                colour: &colour,
                label: &label,
            },
            &order,
            max_order,
        )?;
        Ok(PermGroup::from_elements_unchecked(self.names.clone(), el))
    }

    /// No nontrivial `N`- and level-preserving order automorphism.
    pub fn is_rigid(&self) -> bool {
        self.automorphisms(2).is_ok_and(|g| g.order() == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_and_antichain() {
        let c = Skeleton::chain(&[2, 2, 1]);
        assert!(c.is_linear());
        assert_eq!(c.up_set(0), vec![0, 1, 2]);
        assert_eq!(c.local_product_size(0), 4);
        assert_eq!(c.minimal(), vec![0]);
        assert!(c.is_treeable());
        let a = Skeleton::antichain(&[2, 2]);
        assert!(!a.is_linear());
        assert_eq!(a.maximal(), vec![0, 1]);
        assert!(!a.is_treeable());
        assert!(!a.is_rigid());
        assert!(Skeleton::antichain(&[2, 3]).is_rigid());
    }

    #[test]
    fn rejects_cycles() {
        let r = Skeleton::from_relations(
            vec!["a".into(), "b".into()],
            &[(0, 1), (1, 0)],
            vec![1, 1],
            None,
        );
        assert!(matches!(r, Err(Error::InvalidSkeleton(_))));
    }
}
