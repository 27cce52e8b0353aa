//! Finite ultrametric spaces with exact rational distances.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::permgroup::{Perm, PermGroup};
use crate::rational::{fmt_q, Q};
use crate::search::{self, Structure};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UltraSpace {
    points: Vec<String>,
    dist: Vec<Vec<Q>>,
}

/// One failed axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceViolation {
    NonZeroDiagonal(usize),
    NotPositive(usize, usize),
    Asymmetric(usize, usize),
    /// `d(x,z) > max(d(x,y), d(y,z))` for the triple `(x, y, z)`.
    StrongTriangle(usize, usize, usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpaceReport {
    pub violations: Vec<SpaceViolation>,
}

impl SpaceReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Two isometry orbits and the pair of points realizing their distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentPair {
    pub comp_a: Vec<usize>,
    pub comp_b: Vec<usize>,
    pub distance: Q,
    pub witness: (usize, usize),
}

impl UltraSpace {
    /// Shape checks only; the metric axioms are checked by [`UltraSpace::validate`].
    pub fn new(points: Vec<String>, dist: Vec<Vec<Q>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidSpace("no points".into()));
        }
        if dist.len() != n || dist.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidSpace(format!(
                "distance matrix is not {n}x{n}"
            )));
        }
        let distinct: BTreeSet<&String> = points.iter().collect();
        if distinct.len() != n {
            return Err(Error::InvalidSpace("duplicate point names".into()));
        }
        Ok(UltraSpace { points, dist })
    }

    /// Like [`UltraSpace::new`] but also rejects anything that fails validation.
    pub fn new_valid(points: Vec<String>, dist: Vec<Vec<Q>>) -> Result<Self> {
        let u = Self::new(points, dist)?;
        let report = u.validate();
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidSpace(u.describe(v)));
        }
        Ok(u)
    }

    pub fn from_fn(points: Vec<String>, d: impl Fn(usize, usize) -> Q) -> Result<Self> {
        let n = points.len();
        let dist = (0..n).map(|i| (0..n).map(|j| d(i, j)).collect()).collect();
        Self::new_valid(points, dist)
    }

    pub fn single_point() -> Self {
        UltraSpace {
            points: vec!["x".into()],
            dist: vec![vec![Q::from_integer(0)]],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn dist(&self, x: usize, y: usize) -> Q {
        self.dist[x][y]
    }

    pub fn matrix(&self) -> &[Vec<Q>] {
        &self.dist
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.points
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    /// Positive distances, ascending.
    pub fn distance_set(&self) -> BTreeSet<Q> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.dist[i][j])
            .collect()
    }

    pub fn validate(&self) -> SpaceReport {
        let n = self.len();
        let zero = Q::from_integer(0);
        let mut violations = vec![];
        for x in 0..n {
            if self.dist[x][x] != zero {
                violations.push(SpaceViolation::NonZeroDiagonal(x));
            }
            for y in 0..n {
                if x != y && self.dist[x][y] <= zero {
                    violations.push(SpaceViolation::NotPositive(x, y));
                }
                if x < y && self.dist[x][y] != self.dist[y][x] {
                    violations.push(SpaceViolation::Asymmetric(x, y));
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if self.dist[x][z] > self.dist[x][y].max(self.dist[y][z]) {
                        violations.push(SpaceViolation::StrongTriangle(x, y, z));
                    }
                }
            }
        }
        SpaceReport { violations }
    }

    pub fn describe(&self, v: &SpaceViolation) -> String {
        let p = |i: usize| self.points[i].as_str();
        match *v {
            SpaceViolation::NonZeroDiagonal(x) => format!("d({0},{0}) is not 0", p(x)),
            SpaceViolation::NotPositive(x, y) => format!("d({},{}) is not positive", p(x), p(y)),
            SpaceViolation::Asymmetric(x, y) => format!("d({0},{1}) != d({1},{0})", p(x), p(y)),
            SpaceViolation::StrongTriangle(x, y, z) => format!(
                "strong triangle fails at ({},{},{}): {} > max({}, {})",
                p(x),
                p(y),
                p(z),
                fmt_q(&self.dist[x][z]),
                fmt_q(&self.dist[x][y]),
                fmt_q(&self.dist[y][z])
            ),
        }
    }

    /// Open ball `{y : d(x,y) < radius}`.
    pub fn ball(&self, x: usize, radius: Q) -> Vec<usize> {
        (0..self.len())
            .filter(|&y| self.dist[x][y] < radius)
            .collect()
    }

    pub fn ball_of(&self, name: &str, radius: Q) -> Result<Vec<usize>> {
        Ok(self.ball(self.index_of(name)?, radius))
    }

    fn distance_ranks(&self) -> Vec<Vec<u64>> {
        let mut values: Vec<Q> = self.dist.iter().flatten().copied().collect();
        values.sort();
        values.dedup();
        let rank: BTreeMap<Q, u64> = values.into_iter().zip(0..).collect();
        self.dist
            .iter()
            .map(|r| r.iter().map(|q| rank[q]).collect())
            .collect()
    }

    /// Isometry group, by backtracking over points coloured with their
    /// multiset of distances to everything else.
    pub fn iso_group(&self, max_order: usize) -> Result<PermGroup> {
        let label = self.distance_ranks();
        let colour = profile_colours(&label);
        let order = (0..self.len()).collect::<Vec<_>>();
        let elements = search::automorphisms(
            &Structure {
                colour: &colour,
                label: &label,
            },
            &order,
            max_order,
        )?;
        for g in &elements {
            debug_assert!(self.is_isometry(g));
        }
        Ok(PermGroup::from_elements_unchecked(
            self.points.clone(),
            elements,
        ))
    }

    /// Filters every permutation of the points. Reference for [`UltraSpace::iso_group`].
    pub fn brute_iso_group(&self) -> Result<PermGroup> {
        const LIMIT: usize = 9;
        if self.len() > LIMIT {
            return Err(Error::TooLarge {
                size: self.len(),
                limit: LIMIT,
            });
        }
        let label = self.distance_ranks();
        let colour = vec![0; self.len()];
        let elements = search::automorphisms_brute(&Structure {
            colour: &colour,
            label: &label,
        });
        Ok(PermGroup::from_elements_unchecked(
            self.points.clone(),
            elements,
        ))
    }

    pub fn is_isometry(&self, g: &Perm) -> bool {
        let n = self.len();
        g.len() == n
            && (0..n).all(|x| (0..n).all(|y| self.dist[g.apply(x)][g.apply(y)] == self.dist[x][y]))
    }

    /// Iso-orbits ("homogeneous components"), ordered by least point.
    pub fn components(&self, max_order: usize) -> Result<Vec<Vec<usize>>> {
        Ok(self.iso_group(max_order)?.orbits())
    }

    pub fn is_homogeneous(&self, max_order: usize) -> Result<bool> {
        Ok(self.components(max_order)?.len() == 1)
    }

    /// Minimum distance between two distinct components, with a realizing pair.
    pub fn component_distance(
        &self,
        a: &[usize],
        b: &[usize],
        max_order: usize,
    ) -> Result<ComponentPair> {
        let comps = self.components(max_order)?;
        let norm = |s: &[usize]| {
            let mut v = s.to_vec();
            v.sort();
            v.dedup();
            v
        };
        let (a, b) = (norm(a), norm(b));
        for s in [&a, &b] {
            if !comps.contains(s) {
                return Err(Error::NotAComponent(format!("{s:?}")));
            }
        }
        if a == b {
            return Err(Error::NotAComponent("the two components coincide".into()));
        }
        let mut best: Option<(Q, (usize, usize))> = None;
        for &x in &a {
            for &y in &b {
                let d = self.dist[x][y];
                if best.is_none_or(|(m, _)| d < m) {
                    best = Some((d, (x, y)));
                }
            }
        }
        let (distance, witness) = best.expect("components are nonempty");
        Ok(ComponentPair {
            comp_a: a,
            comp_b: b,
            distance,
            witness,
        })
    }

    /// Every pair of distinct components realizes its infimum distance.
    ///
    /// On finite data this is always true; it is still computed: the infimum
    /// is taken over the distance set's lower bounds and compared with the
    /// realized values.
    pub fn is_exact(&self, max_order: usize) -> Result<bool> {
        let comps = self.components(max_order)?;
        for (i, a) in comps.iter().enumerate() {
            for b in &comps[i + 1..] {
                let cross: Vec<Q> = a
                    .iter()
                    .flat_map(|&x| b.iter().map(move |&y| (x, y)))
                    .map(|(x, y)| self.dist[x][y])
                    .collect();
                // greatest lower bound of the cross distances
                let inf = cross
                    .iter()
                    .copied()
                    .fold(None, |m: Option<Q>, d| Some(m.map_or(d, |m| m.min(d))));
                let Some(inf) = inf else { return Ok(false) };
                if !cross.contains(&inf) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// For each distance `r`, whether some subset of at least `m` points is
    /// pairwise at distance exactly `r`.
    pub fn wideness_profile(&self, m: usize) -> BTreeMap<Q, bool> {
        self.distance_set()
            .into_iter()
            .map(|r| (r, self.max_discrete_subset(r).len() >= m))
            .collect()
    }

    /// A largest `r`-discrete subset (exact clique search in the `r`-equidistance graph).
    pub fn max_discrete_subset(&self, r: Q) -> Vec<usize> {
        let n = self.len();
        let adj: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| i != j && self.dist[i][j] == r).collect())
            .collect();
        let mut best = vec![];
        let mut current = vec![];
        grow_clique(&adj, 0, &mut current, &mut best);
        if best.len() < 2 {
            // a single point is not r-discrete in any useful sense
            return best.into_iter().take(1).collect();
        }
        best
    }

    /// All pairwise distances equal `r`.
    pub fn is_r_discrete(&self, r: Q) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| i == j || self.dist[i][j] == r))
    }

    /// The sub-space on `keep` (in the given order).
    pub fn subspace(&self, keep: &[usize]) -> Result<UltraSpace> {
        let points = keep.iter().map(|&i| self.points[i].clone()).collect();
        let dist = keep
            .iter()
            .map(|&i| keep.iter().map(|&j| self.dist[i][j]).collect())
            .collect();
        UltraSpace::new(points, dist)
    }
}

fn profile_colours(label: &[Vec<u64>]) -> Vec<u64> {
    let profiles: Vec<Vec<u64>> = label
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.sort();
            r
        })
        .collect();
    let distinct: BTreeSet<&Vec<u64>> = profiles.iter().collect();
    let index: BTreeMap<&Vec<u64>, u64> = distinct.into_iter().zip(0..).collect();
    profiles.iter().map(|p| index[p]).collect()
}

fn grow_clique(adj: &[Vec<bool>], from: usize, current: &mut Vec<usize>, best: &mut Vec<usize>) {
    if current.len() > best.len() {
        *best = current.clone();
    }
    let n = adj.len();
    if current.len() + (n - from) <= best.len() {
        return;
    }
    for v in from..n {
        if current.iter().all(|&u| adj[u][v]) {
            current.push(v);
            grow_clique(adj, v + 1, current, best);
            current.pop();
        }
    }
}

/// Fixture spaces used throughout docs and tests.
pub mod fixtures {
    use super::*;
    use crate::rational::q;

    fn names(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    /// `{a,b,c,d}` with `d(a,b) = d(c,d) = 1` and every cross distance 2.
    pub fn u1() -> UltraSpace {
        let pair = |i: usize| i / 2;
        UltraSpace::from_fn(names(&["a", "b", "c", "d"]), |i, j| {
            if i == j {
                q(0)
            } else if pair(i) == pair(j) {
                q(1)
            } else {
                q(2)
            }
        })
        .unwrap()
    }

    /// `{a,b,c}` with `d(a,b) = 1` and `c` at distance 2 from both.
    pub fn u2() -> UltraSpace {
        UltraSpace::from_fn(names(&["a", "b", "c"]), |i, j| {
            if i == j {
                q(0)
            } else if i.max(j) == 2 {
                q(2)
            } else {
                q(1)
            }
        })
        .unwrap()
    }

    /// Two points at distance 1.
    pub fn two_points() -> UltraSpace {
        UltraSpace::from_fn(names(&["a", "b"]), |i, j| if i == j { q(0) } else { q(1) }).unwrap()
    }

    /// `n` points pairwise at distance `r`.
    pub fn equilateral(n: usize, r: Q) -> UltraSpace {
        let pts = (0..n).map(|i| format!("p{i}")).collect();
        UltraSpace::from_fn(pts, |i, j| if i == j { q(0) } else { r }).unwrap()
    }
}
