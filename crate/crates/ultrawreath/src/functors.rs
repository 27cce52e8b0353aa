//! Passing between ultrametric spaces and leveled trees: the ball tree of a
//! space, the leveled distance on a tree, and point replacement by a comb.

use std::collections::BTreeMap;

use crate::error::{invariant, Error, Result};
use crate::ltree::{LTree, LinearOrder};
use crate::permgroup::{verify_induced, IsoWitness, Perm, PermGroup};
use crate::rational::{fmt_q, Q};
use crate::ultrametric::UltraSpace;

/// The ball tree of a space over a level set.
#[derive(Clone, Debug)]
pub struct FTree {
    pub tree: LTree,
    /// `node_map[x][j]` is the node of the ball around `x` at level `j`.
    pub node_map: Vec<Vec<usize>>,
    /// Points of each node's ball, ascending.
    pub balls: Vec<Vec<usize>>,
}

fn check_condition_two(u: &UltraSpace, levels: &LinearOrder) -> Result<()> {
    let labels = levels.labels();
    for d in u.distance_set() {
        if levels.index_of(d).is_none() {
            return Err(Error::ConditionTwoViolated(format!(
                "distance {} is not a level",
                fmt_q(&d)
            )));
        }
    }
    let dist = u.distance_set();
    if let Some(min) = dist.first() {
        if labels[0] > *min {
            return Err(Error::ConditionTwoViolated(format!(
                "no level at or below the least distance {}",
                fmt_q(min)
            )));
        }
    }
    let max = dist.last().copied().unwrap_or(Q::from_integer(0));
    if *labels.last().unwrap() <= max {
        return Err(Error::ConditionTwoViolated(format!(
            "no level above the largest distance {}",
            fmt_q(&max)
        )));
    }
    Ok(())
}

/// Nodes are the pairs (open ball of radius `ℓ`, `ℓ`), ordered by inclusion.
pub fn functor_f(u: &UltraSpace, levels: &LinearOrder) -> Result<FTree> {
    check_condition_two(u, levels)?;
    let n = u.len();
    let mut index: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
    let mut balls = vec![];
    let mut level = vec![];
    let mut names = vec![];
    let mut node_map = vec![vec![0; levels.len()]; n];
    for j in 0..levels.len() {
        for x in 0..n {
            let b = u.ball(x, levels.value(j));
            let id = *index.entry((j, b.clone())).or_insert_with(|| {
                let members: Vec<&str> = b.iter().map(|&p| u.points()[p].as_str()).collect();
                names.push(format!(
                    "{{{}}}@{}",
                    members.join(","),
                    fmt_q(&levels.value(j))
                ));
                balls.push(b);
                level.push(j);
                balls.len() - 1
            });
            node_map[x][j] = id;
        }
    }
    let top = levels.top();
    let parent: Vec<Option<usize>> = (0..balls.len())
        .map(|t| (level[t] < top).then(|| node_map[balls[t][0]][level[t] + 1]))
        .collect();
    let tree = LTree::from_parents(levels.clone(), names, level, parent)?;
    invariant(tree.validate().is_ok() && tree.is_pruned(), || {
        "ball tree is not a pruned leveled tree".into()
    })?;
    Ok(FTree {
        tree,
        node_map,
        balls,
    })
}

/// The tree map induced by an isometric embedding `ψ : U → V`.
pub fn functor_f_mor(
    u: &UltraSpace,
    fu: &FTree,
    v: &UltraSpace,
    fv: &FTree,
    psi: &[usize],
) -> Result<Vec<usize>> {
    if fu.tree.order() != fv.tree.order() {
        return Err(Error::DomainMismatch(
            "ball trees over different level sets".into(),
        ));
    }
    if psi.len() != u.len() || psi.iter().any(|&y| y >= v.len()) {
        return Err(Error::DomainMismatch("map has the wrong shape".into()));
    }
    for x in 0..u.len() {
        for y in 0..u.len() {
            if v.dist(psi[x], psi[y]) != u.dist(x, y) {
                return Err(Error::NotIsometric(format!(
                    "distance between {} and {} changes",
                    u.points()[x],
                    u.points()[y]
                )));
            }
        }
    }
    Ok((0..fu.tree.len())
        .map(|t| {
            let x = fu.balls[t][0];
            fv.node_map[psi[x]][fu.tree.level(t)]
        })
        .collect())
}

/// Checks that `ψ ↦ 𝖥(ψ)` is an isomorphism `Iso(U) → Aut(𝖥(U))`.
pub fn verify_f_iso(u: &UltraSpace, levels: &LinearOrder, max_order: usize) -> Result<IsoWitness> {
    let f = functor_f(u, levels)?;
    let iso = u.iso_group(max_order)?;
    let aut = f.tree.aut_group(max_order)?;
    verify_induced("isometries to ball-tree automorphisms", &iso, &aut, |g| {
        Perm::from_images(functor_f_mor(u, &f, u, &f, g.images())?)
    })
}

/// The distance set, its least element again as the bottom level, and twice
/// the largest distance on top; every pair's orbit-distance bound is already in it.
pub fn canonical_levels(u: &UltraSpace, max_order: usize) -> Result<LinearOrder> {
    let dist = u.distance_set();
    let Some(&max) = dist.last() else {
        return LinearOrder::from_ints(&[1, 2]);
    };
    let mut levels = dist.clone();
    levels.insert(max * Q::from_integer(2));
    let iso = u.iso_group(max_order)?;
    for x in 0..u.len() {
        for y in 0..u.len() {
            // levels ℓ with no isometry moving x to within ℓ of y
            let closest = iso
                .elements()
                .iter()
                .map(|g| u.dist(g.apply(x), y))
                .min()
                .unwrap();
            if let Some(&sup) = levels.iter().rfind(|&&l| l <= closest) {
                invariant(levels.contains(&sup), || {
                    "orbit bound outside the level set".into()
                })?;
            }
        }
    }
    LinearOrder::new(levels.into_iter().collect())
}

/// `ℓ ↦ (ℓ⁻, ℓ⁺)`, strictly interleaved and positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelEmbedding {
    order: LinearOrder,
    minus: Vec<Q>,
    plus: Vec<Q>,
}

impl LevelEmbedding {
    pub fn new(order: LinearOrder, minus: Vec<Q>, plus: Vec<Q>) -> Result<Self> {
        let k = order.len();
        if minus.len() != k || plus.len() != k {
            return Err(Error::InvalidEmbedding(format!("need {k} pairs")));
        }
        if minus[0] <= Q::from_integer(0) {
            return Err(Error::InvalidEmbedding("images must be positive".into()));
        }
        for j in 0..k {
            if minus[j] >= plus[j] || (j + 1 < k && plus[j] >= minus[j + 1]) {
                return Err(Error::InvalidEmbedding(format!(
                    "pairs not interleaved at level {}",
                    fmt_q(&order.value(j))
                )));
            }
        }
        Ok(LevelEmbedding { order, minus, plus })
    }

    /// Level `j` goes to `(2j+1, 2j+2)`.
    pub fn standard(order: &LinearOrder) -> Self {
        let k = order.len() as i64;
        let minus = (0..k).map(|j| Q::from_integer(2 * j + 1)).collect();
        let plus = (0..k).map(|j| Q::from_integer(2 * j + 2)).collect();
        Self::new(order.clone(), minus, plus).expect("standard embedding")
    }

    pub fn order(&self) -> &LinearOrder {
        &self.order
    }

    pub fn minus(&self, j: usize) -> Q {
        self.minus[j]
    }

    pub fn plus(&self, j: usize) -> Q {
        self.plus[j]
    }
}

/// Tree nodes as points: comparable nodes are at the lower image of the upper
/// node's level, incomparable ones at the upper image of their split level.
pub fn functor_g(tree: &LTree, emb: &LevelEmbedding) -> Result<UltraSpace> {
    if emb.order() != tree.order() {
        return Err(Error::InvalidEmbedding(
            "embedding is over a different level set".into(),
        ));
    }
    if !tree.is_pruned() {
        return Err(Error::NotPruned(
            "the distance needs every node to reach the bottom".into(),
        ));
    }
    let n = tree.len();
    let mut dist = vec![vec![Q::from_integer(0); n]; n];
    for t in 0..n {
        for u in 0..n {
            if t == u {
                continue;
            }
            dist[t][u] = if tree.comparable(t, u) {
                emb.minus(tree.level(t).max(tree.level(u)))
            } else {
                emb.plus(tree.spl_index(t, u)?)
            };
        }
    }
    let space = UltraSpace::new(tree.names().to_vec(), dist)?;
    if let Some(v) = space.validate().violations.first() {
        return Err(Error::Invariant(format!(
            "leveled distance is not an ultrametric: {}",
            space.describe(v)
        )));
    }
    Ok(space)
}

#[derive(Clone, Debug)]
pub struct GFullness {
    pub aut: PermGroup,
    pub iso: PermGroup,
    /// Every tree automorphism is an isometry (always checked).
    pub forward: bool,
    pub equal: bool,
}

/// Compares `Aut(𝒯)` with `Iso(𝖦(𝒯))` on the same ground set. Only the
/// inclusion is guaranteed; equality can fail for finite level sets.
pub fn g_fullness_diagnostic(
    tree: &LTree,
    emb: &LevelEmbedding,
    max_order: usize,
) -> Result<GFullness> {
    let space = functor_g(tree, emb)?;
    let aut = tree.aut_group(max_order)?;
    let iso = space.iso_group(max_order)?;
    let forward = aut.elements().iter().all(|g| iso.contains(g));
    invariant(forward, || "a tree automorphism is not an isometry".into())?;
    let equal = aut.order() == iso.order();
    Ok(GFullness {
        aut,
        iso,
        forward,
        equal,
    })
}

/// Hangs a descending chain of `k` fresh levels below every bottom-level node.
/// Old nodes keep their indices; the chain under `t` is `t#1, …, t#k`.
pub fn pad_chain(tree: &LTree, k: usize) -> Result<LTree> {
    if k == 0 {
        return Ok(tree.clone());
    }
    let labels = tree.order().labels();
    let min = labels[0];
    let mut new_labels: Vec<Q> = (1..=k as i64)
        .rev()
        .map(|i| min - Q::from_integer(i))
        .collect();
    new_labels.extend_from_slice(labels);
    let order = LinearOrder::new(new_labels)?;
    let mut names = tree.names().to_vec();
    let mut level: Vec<usize> = (0..tree.len()).map(|t| tree.level(t) + k).collect();
    let mut parent: Vec<Option<usize>> = (0..tree.len()).map(|t| tree.parent(t)).collect();
    for t in tree.nodes_at(0) {
        let mut above = t;
        for i in 1..=k {
            names.push(format!("{}#{}", tree.name(t), i));
            level.push(k - i);
            parent.push(Some(above));
            above = names.len() - 1;
        }
    }
    LTree::from_parents(order, names, level, parent)
}

/// Each automorphism extends to the padded tree by moving chains with their tops.
pub fn pad_chain_witness(tree: &LTree, k: usize, max_order: usize) -> Result<IsoWitness> {
    let padded = pad_chain(tree, k)?;
    let before = tree.aut_group(max_order)?;
    let after = padded.aut_group(max_order)?;
    let bottoms = tree.nodes_at(0);
    let pos: BTreeMap<usize, usize> = bottoms.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let n = tree.len();
    verify_induced("bottom chain padding", &before, &after, |g| {
        let mut img = g.images().to_vec();
        if k > 0 {
            for &t in &bottoms {
                for i in 0..k {
                    img.push(n + pos[&g.apply(t)] * k + i);
                }
            }
        }
        Perm::from_images(img)
    })
}

/// All binary strings of length `k` with a rigid-style radius per common prefix.
#[derive(Clone, Debug)]
pub struct RigidComb {
    depth: usize,
    radii: Vec<Q>,
    space: UltraSpace,
}

/// Position of `s` in the listing of binary strings by length, then lexicographically.
fn prefix_index(s: &str) -> usize {
    let len = s.len();
    let value = if len == 0 {
        0
    } else {
        usize::from_str_radix(s, 2).unwrap()
    };
    (1 << len) - 1 + value
}

/// Radii `bound/2, bound/3, …`, one per string shorter than `k`.
pub fn default_radii(k: usize, bound: Q) -> Vec<Q> {
    (0..(1usize << k) - 1)
        .map(|n| bound / Q::from_integer(n as i64 + 2))
        .collect()
}

pub fn rigid_comb(k: usize, radii: &[Q]) -> Result<RigidComb> {
    if k == 0 {
        return Err(Error::InvalidSpace("comb depth must be at least 1".into()));
    }
    let need = (1usize << k) - 1;
    if radii.len() != need {
        return Err(Error::RadiiTooLarge(format!(
            "exactly {need} radii are needed for depth {k}"
        )));
    }
    if radii.windows(2).any(|w| w[0] <= w[1]) || radii[need - 1] <= Q::from_integer(0) {
        return Err(Error::RadiiTooLarge(
            "radii must be positive and strictly decreasing".into(),
        ));
    }
    let points: Vec<String> = (0..1usize << k).map(|i| format!("{i:0k$b}")).collect();
    let space = UltraSpace::from_fn(points.clone(), |i, j| {
        if i == j {
            return Q::from_integer(0);
        }
        let common = points[i]
            .chars()
            .zip(points[j].chars())
            .take_while(|(a, b)| a == b)
            .count();
        radii[prefix_index(&points[i][..common])]
    })?;
    Ok(RigidComb {
        depth: k,
        radii: radii.to_vec(),
        space,
    })
}

impl RigidComb {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn radii(&self) -> &[Q] {
        &self.radii
    }

    pub fn space(&self) -> &UltraSpace {
        &self.space
    }

    /// Swapping the two leaves under each deepest prefix, independently.
    pub fn expected_iso_order(&self) -> usize {
        1 << (1 << (self.depth - 1))
    }
}

/// `U × comb` with the distance of `U` between different copies and the comb's inside one.
pub fn functor_u(u: &UltraSpace, comb: &RigidComb) -> Result<UltraSpace> {
    if let Some(min) = u.distance_set().first() {
        if comb.radii[0] >= *min {
            return Err(Error::RadiiTooLarge(format!(
                "comb radii must stay below {}",
                fmt_q(min)
            )));
        }
    }
    let c = comb.space.len();
    let names = (0..u.len() * c)
        .map(|p| format!("({},{})", u.points()[p / c], comb.space.points()[p % c]))
        .collect();
    UltraSpace::from_fn(names, |p, r| {
        let (x, y, x2, y2) = (p / c, p % c, r / c, r % c);
        if x != x2 {
            u.dist(x, x2)
        } else {
            comb.space.dist(y, y2)
        }
    })
}

/// The finite replacement for point-replacement rigidity: the isometry group
/// of `U × comb` is `Iso(U)` times one copy of `Iso(comb)` per point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UContract {
    pub iso_u: usize,
    pub iso_comb: usize,
    pub iso_product: usize,
    pub expected: usize,
    /// Every isometry of the product maps copies onto copies.
    pub copies_preserved: bool,
}

impl UContract {
    pub fn holds(&self) -> bool {
        self.iso_product == self.expected && self.copies_preserved
    }
}

pub fn u_contract(u: &UltraSpace, comb: &RigidComb, max_order: usize) -> Result<UContract> {
    let product = functor_u(u, comb)?;
    let iso_u = u.iso_group(max_order)?.order();
    let iso_comb = comb.space.iso_group(max_order)?.order();
    let iso = product.iso_group(max_order)?;
    let c = comb.space.len();
    let copies_preserved = iso.elements().iter().all(|g| {
        (0..u.len()).all(|x| (0..c).all(|y| g.apply(x * c + y) / c == g.apply(x * c) / c))
    });
    let expected = (0..u.len())
        .try_fold(iso_u, |acc, _| acc.checked_mul(iso_comb))
        .ok_or(Error::OrderGuardExceeded { limit: max_order })?;
    Ok(UContract {
        iso_u,
        iso_comb,
        iso_product: iso.order(),
        expected,
        copies_preserved,
    })
}
