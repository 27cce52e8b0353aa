//! Finite leveled trees ("L-trees" over a finite linear order of levels).
//!
//! A tree is stored through its ancestor table: `up(t, j)` is the unique node
//! above (or equal to) `t` at level index `j`. The order `≤` is derived from it.

use std::collections::BTreeSet;

use crate::error::{invariant, Error, Result};
use crate::permgroup::PermGroup;
use crate::rational::{fmt_q, Q};
use crate::search::{self, Structure};
use crate::wreath::Skeleton;

/// A finite, strictly increasing list of level values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearOrder {
    labels: Vec<Q>,
}

impl LinearOrder {
    pub fn new(labels: Vec<Q>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidTree("empty level set".into()));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTree(
                "levels must be strictly increasing".into(),
            ));
        }
        Ok(LinearOrder { labels })
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Q::from_integer(v)).collect())
    }

    pub fn labels(&self) -> &[Q] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn value(&self, j: usize) -> Q {
        self.labels[j]
    }

    pub fn index_of(&self, v: Q) -> Option<usize> {
        self.labels.binary_search(&v).ok()
    }

    pub fn top(&self) -> usize {
        self.labels.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LTree {
    order: LinearOrder,
    names: Vec<String>,
    level: Vec<usize>,
    /// `up[t][j - level[t]]`
    up: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeViolation {
    LevelUnused(usize),
    UpNotSelf(usize),
    UpIncoherent { node: usize, from: usize, to: usize },
    LevelNotIncreasing(usize, usize),
    NoCommonUpperBound(usize, usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TreeReport {
    pub violations: Vec<TreeViolation>,
}

impl TreeReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Quotient of a tree by its automorphism orbits.
#[derive(Clone, Debug)]
pub struct CondensedTree {
    pub quotient: LTree,
    pub class_of: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
    pub aut: PermGroup,
}

/// Outcome of the chain-domination property check; `counterexample` is `(c, t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarReport {
    pub holds: bool,
    pub chains_checked: usize,
    pub counterexample: Option<(usize, usize)>,
}

impl LTree {
    /// Builds a tree from a parent pointer per node; the parent must sit exactly
    /// one level higher, and only top-level nodes may lack one.
    pub fn from_parents(
        order: LinearOrder,
        names: Vec<String>,
        level: Vec<usize>,
        parent: Vec<Option<usize>>,
    ) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidTree("no nodes".into()));
        }
        if level.len() != n || parent.len() != n {
            return Err(Error::InvalidTree(
                "level/parent tables have the wrong length".into(),
            ));
        }
        if names.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::InvalidTree("duplicate node ids".into()));
        }
        let top = order.top();
        for t in 0..n {
            if level[t] > top {
                return Err(Error::InvalidTree(format!(
                    "node {} has level index {} out of range",
                    names[t], level[t]
                )));
            }
            match parent[t] {
                Some(p) if p >= n => {
                    return Err(Error::InvalidTree(format!(
                        "node {} has an unknown parent",
                        names[t]
                    )))
                }
                Some(p) if level[p] != level[t] + 1 => {
                    return Err(Error::InvalidTree(format!(
                        "gap: parent {} of {} is not exactly one level up",
                        names[p], names[t]
                    )))
                }
                None if level[t] != top => {
                    return Err(Error::InvalidTree(format!(
                        "node {} below the top level has no parent",
                        names[t]
                    )))
                }
                _ => {}
            }
        }
        let mut up = vec![];
        for t in 0..n {
            let mut row = vec![t];
            let mut cur = t;
            while let Some(p) = parent[cur] {
                row.push(p);
                cur = p;
            }
            up.push(row);
        }
        let mut children = vec![vec![]; n];
        for t in 0..n {
            if let Some(p) = parent[t] {
                children[p].push(t);
            }
        }
        Ok(LTree {
            order,
            names,
            level,
            up,
            children,
        })
    }

    /// A chain with one node per level, named `n0` (bottom) upward.
    pub fn chain(order: LinearOrder) -> Self {
        let k = order.len();
        let names = (0..k).map(|i| format!("n{i}")).collect();
        let parent = (0..k).map(|i| (i + 1 < k).then_some(i + 1)).collect();
        Self::from_parents(order, names, (0..k).collect(), parent).expect("chain is well formed")
    }

    pub fn order(&self) -> &LinearOrder {
        &self.order
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

    pub fn name(&self, t: usize) -> &str {
        &self.names[t]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn level(&self, t: usize) -> usize {
        self.level[t]
    }

    pub fn level_value(&self, t: usize) -> Q {
        self.order.value(self.level[t])
    }

    /// The ancestor of `t` at level index `j`; `None` when `j` is below `t` or above the top of its chain.
    pub fn try_up(&self, t: usize, j: usize) -> Option<usize> {
        j.checked_sub(self.level[t])
            .and_then(|k| self.up[t].get(k).copied())
    }

    /// `t|_j`. Panics when `j < level(t)`.
    pub fn up(&self, t: usize, j: usize) -> usize {
        self.try_up(t, j).expect("up() below the node's own level")
    }

    pub fn parent(&self, t: usize) -> Option<usize> {
        self.try_up(t, self.level[t] + 1)
    }

    pub fn children(&self, t: usize) -> &[usize] {
        &self.children[t]
    }

    pub fn nodes_at(&self, j: usize) -> Vec<usize> {
        (0..self.len()).filter(|&t| self.level[t] == j).collect()
    }

    /// `t ≤ u`: `u` is an ancestor of (or equal to) `t`.
    pub fn leq(&self, t: usize, u: usize) -> bool {
        self.try_up(t, self.level[u]) == Some(u)
    }

    pub fn lt(&self, t: usize, u: usize) -> bool {
        t != u && self.leq(t, u)
    }

    pub fn comparable(&self, t: usize, u: usize) -> bool {
        self.leq(t, u) || self.leq(u, t)
    }

    /// Level index of the splitting level of two incomparable nodes.
    pub fn spl_index(&self, t: usize, u: usize) -> Result<usize> {
        if self.comparable(t, u) {
            return Err(Error::Comparable(
                self.names[t].clone(),
                self.names[u].clone(),
            ));
        }
        let lo = self.level[t].max(self.level[u]);
        Ok((lo..self.order.len())
            .rev()
            .find(|&j| self.try_up(t, j) != self.try_up(u, j))
            .expect("incomparable nodes differ at their common lower level"))
    }

    pub fn spl(&self, t: usize, u: usize) -> Result<Q> {
        Ok(self.order.value(self.spl_index(t, u)?))
    }

    /// Checks every axiom and returns all violations found.
    pub fn validate(&self) -> TreeReport {
        let n = self.len();
        let mut violations = vec![];
        for j in 0..self.order.len() {
            if !self.level.contains(&j) {
                violations.push(TreeViolation::LevelUnused(j));
            }
        }
        for t in 0..n {
            if self.up[t][0] != t {
                violations.push(TreeViolation::UpNotSelf(t));
            }
            for (k, &a) in self.up[t].iter().enumerate() {
                let j = self.level[t] + k;
                if self.level[a] != j {
                    violations.push(TreeViolation::UpIncoherent {
                        node: t,
                        from: j,
                        to: j,
                    });
                    continue;
                }
                for j2 in j..self.order.len() {
                    if self.try_up(a, j2) != self.try_up(t, j2) {
                        violations.push(TreeViolation::UpIncoherent {
                            node: t,
                            from: j,
                            to: j2,
                        });
                    }
                }
            }
        }
        for t in 0..n {
            for u in 0..n {
                if self.lt(t, u) && self.level[t] >= self.level[u] {
                    violations.push(TreeViolation::LevelNotIncreasing(t, u));
                }
                if t < u {
                    let top = self.order.top();
                    if self.try_up(t, top).is_none() || self.try_up(t, top) != self.try_up(u, top) {
                        violations.push(TreeViolation::NoCommonUpperBound(t, u));
                    }
                }
            }
        }
        TreeReport { violations }
    }

    pub fn describe(&self, v: &TreeViolation) -> String {
        let p = |i: usize| self.names[i].as_str();
        let l = |j: usize| fmt_q(&self.order.value(j));
        match *v {
            TreeViolation::LevelUnused(j) => format!("no node at level {}", l(j)),
            TreeViolation::UpNotSelf(t) => format!("{} is not its own restriction", p(t)),
            TreeViolation::UpIncoherent { node, from, to } => {
                format!(
                    "restrictions of {} at levels {} and {} disagree",
                    p(node),
                    l(from),
                    l(to)
                )
            }
            TreeViolation::LevelNotIncreasing(t, u) => {
                format!("{} < {} but levels do not increase", p(t), p(u))
            }
            TreeViolation::NoCommonUpperBound(t, u) => {
                format!("{} and {} have no common upper bound", p(t), p(u))
            }
        }
    }

    /// Branches, one per bottom-level node, as the list of its ancestors by level.
    pub fn branches(&self) -> Vec<Vec<usize>> {
        self.nodes_at(0)
            .into_iter()
            .map(|b| self.up[b].clone())
            .filter(|r| r.len() == self.order.len())
            .collect()
    }

    /// Every node lies on a branch, i.e. has a descendant at the bottom level.
    pub fn is_pruned(&self) -> bool {
        let mut on_branch = vec![false; self.len()];
        for b in self.branches() {
            for t in b {
                on_branch[t] = true;
            }
        }
        on_branch.into_iter().all(|x| x)
    }

    /// Nodes at level index `j` and above, with the index map into `self`.
    pub fn restrict(&self, j: usize) -> Result<(LTree, Vec<usize>)> {
        if j >= self.order.len() {
            return Err(Error::InvalidTree("restriction above the top level".into()));
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&t| self.level[t] >= j).collect();
        let pos = |t: usize| keep.iter().position(|&x| x == t);
        let order = LinearOrder::new(self.order.labels[j..].to_vec())?;
        let names = keep.iter().map(|&t| self.names[t].clone()).collect();
        let level = keep.iter().map(|&t| self.level[t] - j).collect();
        let parent = keep.iter().map(|&t| self.parent(t).and_then(pos)).collect();
        Ok((LTree::from_parents(order, names, level, parent)?, keep))
    }

    fn order_labels(&self) -> Vec<Vec<u64>> {
        let n = self.len();
        (0..n)
            .map(|t| {
                (0..n)
                    .map(|u| match (t == u, self.leq(t, u), self.leq(u, t)) {
                        (true, _, _) => 3,
                        (_, true, _) => 1,
                        (_, _, true) => 2,
                        _ => 0,
                    })
                    .collect()
            })
            .collect()
    }

    /// Level-preserving order automorphisms.
    pub fn aut_group(&self, max_order: usize) -> Result<PermGroup> {
        let label = self.order_labels();
        let colour: Vec<u64> = self.level.iter().map(|&l| l as u64).collect();
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&t| (std::cmp::Reverse(self.level[t]), t));
        let elements = search::automorphisms(
            &Structure {
                colour: &colour,
                label: &label,
            },
            &order,
            max_order,
        )?;
        Ok(PermGroup::from_elements_unchecked(
            self.names.clone(),
            elements,
        ))
    }

    /// Reference: filter all permutations of the nodes.
    pub fn brute_aut_group(&self) -> Result<PermGroup> {
        const LIMIT: usize = 9;
        if self.len() > LIMIT {
            return Err(Error::TooLarge {
                size: self.len(),
                limit: LIMIT,
            });
        }
        let label = self.order_labels();
        let colour: Vec<u64> = self.level.iter().map(|&l| l as u64).collect();
        let elements = search::automorphisms_brute(&Structure {
            colour: &colour,
            label: &label,
        });
        Ok(PermGroup::from_elements_unchecked(
            self.names.clone(),
            elements,
        ))
    }

    /// Quotient by automorphism orbits. The order on classes is read off
    /// representatives; consistency across all members is asserted.
    pub fn condense(&self, max_order: usize) -> Result<CondensedTree> {
        let aut = self.aut_group(max_order)?;
        self.condense_with(aut)
    }

    pub fn condense_with(&self, aut: PermGroup) -> Result<CondensedTree> {
        let classes = aut.orbits();
        let mut class_of = vec![0; self.len()];
        for (c, members) in classes.iter().enumerate() {
            for &t in members {
                class_of[t] = c;
            }
        }
        let mut level = vec![];
        let mut parent = vec![];
        for members in &classes {
            let rep = members[0];
            let pc = self.parent(rep).map(|p| class_of[p]);
            for &t in members {
                invariant(self.level[t] == self.level[rep], || {
                    "orbit mixes levels".into()
                })?;
                invariant(self.parent(t).map(|p| class_of[p]) == pc, || {
                    "orbit members have parents in different classes".into()
                })?;
            }
            level.push(self.level[rep]);
            parent.push(pc);
        }
        let names = classes
            .iter()
            .map(|m| format!("[{}]", self.names[m[0]]))
            .collect();
        let quotient = LTree::from_parents(self.order.clone(), names, level, parent)?;
        Ok(CondensedTree {
            quotient,
            class_of,
            classes,
            aut,
        })
    }

    /// `C_t`: `t` together with its same-class siblings.
    pub fn c_set(&self, cond: &CondensedTree, t: usize) -> Vec<usize> {
        cond.classes[cond.class_of[t]]
            .iter()
            .copied()
            .filter(|&u| u == t || self.spl_index(t, u).ok() == Some(self.level[t]))
            .collect()
    }

    /// The skeleton of the condensed tree, labelled by `N_δ = |C_t|`.
    pub fn label_n(&self, cond: &CondensedTree) -> Result<Skeleton> {
        let mut n = vec![];
        for members in &cond.classes {
            let sizes: BTreeSet<usize> =
                members.iter().map(|&t| self.c_set(cond, t).len()).collect();
            invariant(sizes.len() == 1, || {
                format!("sibling counts differ inside a class: {sizes:?}")
            })?;
            n.push(*sizes.first().unwrap());
        }
        let q = &cond.quotient;
        let le = (0..q.len())
            .map(|a| (0..q.len()).map(|b| q.leq(a, b)).collect())
            .collect();
        let levels = (0..q.len()).map(|a| q.level_value(a)).collect();
        Skeleton::from_matrix(q.names().to_vec(), le, n, Some(levels))
    }

    /// The quotient validates as a tree. Always true for finite level sets; computed anyway.
    pub fn is_special(&self, cond: &CondensedTree) -> bool {
        cond.quotient.validate().is_ok()
    }

    /// The quotient is a chain.
    pub fn is_homogeneous_tree(&self, cond: &CondensedTree) -> bool {
        let q = &cond.quotient;
        (0..q.len()).all(|a| (0..q.len()).all(|b| q.comparable(a, b)))
    }

    /// For every proper upward-closed chain `C` (the up-set of a node `c` with
    /// something strictly below it) and every `t` whose class lies below `[c]`,
    /// some member of `t`'s class lies below `c`.
    pub fn property_star(&self, cond: &CondensedTree) -> StarReport {
        let q = &cond.quotient;
        let mut chains_checked = 0;
        for c in 0..self.len() {
            let proper = (0..self.len()).any(|t| self.lt(t, c));
            if !proper {
                continue;
            }
            chains_checked += 1;
            for t in 0..self.len() {
                if !q.leq(cond.class_of[t], cond.class_of[c]) {
                    continue;
                }
                let pushed = cond.classes[cond.class_of[t]]
                    .iter()
                    .any(|&tb| self.leq(tb, c));
                if !pushed {
                    return StarReport {
                        holds: false,
                        chains_checked,
                        counterexample: Some((c, t)),
                    };
                }
            }
        }
        StarReport {
            holds: true,
            chains_checked,
            counterexample: None,
        }
    }

    /// A branch through `t` whose node at every level lies in the prescribed
    /// class `branch[j]`, following ancestors upward and least-index children in
    /// the right class downward.
    pub fn lift_branch(
        &self,
        cond: &CondensedTree,
        branch: &[usize],
        lbar: usize,
        t: usize,
    ) -> Result<Vec<usize>> {
        let q = &cond.quotient;
        let k = self.order.len();
        if branch.len() != k
            || (0..k).any(|j| q.level(branch[j]) != j || q.up(branch[0], j) != branch[j])
        {
            return Err(Error::InvalidTree(
                "not a branch of the condensed tree".into(),
            ));
        }
        if lbar >= k || cond.class_of[t] != branch[lbar] || self.level[t] != lbar {
            return Err(Error::NotInClass(format!(
                "{} is not in class {}",
                self.names[t],
                q.name(branch[lbar.min(k - 1)])
            )));
        }
        let mut out = vec![usize::MAX; k];
        for (j, slot) in out.iter_mut().enumerate().skip(lbar) {
            let a = self.up(t, j);
            invariant(cond.class_of[a] == branch[j], || {
                "ancestor left the prescribed class".into()
            })?;
            *slot = a;
        }
        for j in (0..lbar).rev() {
            let above = out[j + 1];
            let c = self.children[above]
                .iter()
                .copied()
                .filter(|&c| cond.class_of[c] == branch[j])
                .min()
                .ok_or_else(|| Error::Invariant("no child in the prescribed class".into()))?;
            out[j] = c;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functors::functor_f;
    use crate::rational::q;
    use crate::ultrametric::fixtures::{u1, u2};

    const M: usize = 1_000_000;

    fn f_u1() -> LTree {
        functor_f(&u1(), &LinearOrder::from_ints(&[1, 2, 3]).unwrap())
            .unwrap()
            .tree
    }

    fn f_u2() -> LTree {
        functor_f(&u2(), &LinearOrder::from_ints(&[1, 2, 3]).unwrap())
            .unwrap()
            .tree
    }

    #[test]
    fn chain_basics() {
        let t = LTree::chain(LinearOrder::from_ints(&[1, 2, 3]).unwrap());
        assert!(t.validate().is_ok());
        assert_eq!(t.branches().len(), 1);
        assert!(t.is_pruned());
        assert_eq!(t.aut_group(M).unwrap().order(), 1);
        assert!(matches!(t.spl(0, 2), Err(Error::Comparable(..))));
        let cond = t.condense(M).unwrap();
        assert!(t.is_homogeneous_tree(&cond));
        assert_eq!(t.label_n(&cond).unwrap().n_values(), vec![1, 1, 1]);
        assert!(t.property_star(&cond).holds);
    }

    #[test]
    fn gaps_and_orphans_rejected() {
        let order = LinearOrder::from_ints(&[1, 2, 3]).unwrap();
        let gap = LTree::from_parents(
            order.clone(),
            vec!["a".into(), "r".into()],
            vec![0, 2],
            vec![Some(1), None],
        );
        assert!(matches!(gap, Err(Error::InvalidTree(m)) if m.contains("gap")));
        // an isolated top node: valid shape, not pruned
        let order2 = LinearOrder::from_ints(&[1, 2]).unwrap();
        let t = LTree::from_parents(
            order2,
            vec!["a".into(), "r".into(), "s".into()],
            vec![0, 1, 1],
            vec![Some(1), None, None],
        )
        .unwrap();
        assert!(!t.is_pruned());
        assert!(t
            .validate()
            .violations
            .contains(&TreeViolation::NoCommonUpperBound(1, 2)));
    }

    #[test]
    fn ball_tree_of_u1() {
        let t = f_u1();
        assert_eq!(t.len(), 7);
        assert!(t.validate().is_ok());
        let (a, b, c) = (
            t.index_of("{a}@1").unwrap(),
            t.index_of("{b}@1").unwrap(),
            t.index_of("{c}@1").unwrap(),
        );
        assert_eq!(t.spl(a, b).unwrap(), q(1));
        assert_eq!(t.spl(a, c).unwrap(), q(2));
        assert_eq!(t.branches().len(), 4);
        assert!(t.is_pruned());
        let aut = t.aut_group(M).unwrap();
        assert_eq!(aut.order(), 8);
        assert_eq!(aut, t.brute_aut_group().unwrap());
    }

    #[test]
    fn condensing_u1_gives_a_221_chain() {
        let t = f_u1();
        let cond = t.condense(M).unwrap();
        assert_eq!(cond.quotient.len(), 3);
        assert!(t.is_special(&cond));
        assert!(t.is_homogeneous_tree(&cond));
        let sk = t.label_n(&cond).unwrap();
        assert_eq!(sk.n_values(), vec![2, 2, 1]);
        let a = t.index_of("{a}@1").unwrap();
        assert_eq!(t.c_set(&cond, a).len(), 2);
        assert!(t.property_star(&cond).holds);
    }

    #[test]
    fn condensing_u2() {
        let t = f_u2();
        assert_eq!(t.len(), 6);
        let aut = t.aut_group(M).unwrap();
        assert_eq!(aut.order(), 2);
        assert_eq!(aut, t.brute_aut_group().unwrap());
        let cond = t.condense_with(aut).unwrap();
        assert_eq!(cond.quotient.len(), 5);
        assert!(t.is_special(&cond));
        assert!(!t.is_homogeneous_tree(&cond));
        let sk = t.label_n(&cond).unwrap();
        let twos: Vec<usize> = (0..5).filter(|&d| sk.n(d) == 2).collect();
        assert_eq!(twos.len(), 1);
        assert_eq!(cond.classes[twos[0]].len(), 2);
        assert!(t.property_star(&cond).holds);
    }

    #[test]
    fn restriction_keeps_upper_levels() {
        let t = f_u1();
        let (r, keep) = t.restrict(1).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(keep.len(), 3);
        assert!(r.validate().is_ok());
        assert_eq!(r.order().labels(), &[q(2), q(3)]);
    }

    #[test]
    fn lifting_a_condensed_branch() {
        let t = f_u2();
        let cond = t.condense(M).unwrap();
        let c1 = t.index_of("{c}@1").unwrap();
        let qb: Vec<usize> = (0..3)
            .map(|j| cond.quotient.up(cond.class_of[c1], j))
            .collect();
        // lift through the level-2 node {c}
        let c2 = t.index_of("{c}@2").unwrap();
        let b = t.lift_branch(&cond, &qb, 1, c2).unwrap();
        assert_eq!(b, vec![c1, c2, t.up(c1, 2)]);
        let ab = t.index_of("{a,b}@2").unwrap();
        assert!(matches!(
            t.lift_branch(&cond, &qb, 1, ab),
            Err(Error::NotInClass(_))
        ));
    }
}
