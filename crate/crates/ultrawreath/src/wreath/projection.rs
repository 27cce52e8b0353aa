use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

use super::{LocalFamily, Seq, Skeleton};

/// Local domains with a surjection `π_{δγ} : 𝐒_δ → 𝐒_γ` for every `δ ≤ γ`,
/// stored as index maps between the sorted parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionSystem {
    skeleton: Skeleton,
    parts: Vec<Vec<Seq>>,
    pi: BTreeMap<(usize, usize), Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProjViolation {
    Empty(usize),
    NotPerturbationClosed {
        at: usize,
        seq: usize,
        value: usize,
    },
    NotIdentity {
        at: usize,
        seq: usize,
    },
    NotSurjective {
        from: usize,
        to: usize,
    },
    /// `π_{δγ}(z) = π_{δγ}(z')` disagrees with `z|_γ = z'|_γ`.
    Congruence {
        from: usize,
        to: usize,
        a: usize,
        b: usize,
    },
    /// `π_{γβ}(π_{δγ}(z)) ≠ π_{δβ}(z)`
    Composition {
        from: usize,
        via: usize,
        to: usize,
        seq: usize,
    },
}

impl ProjectionSystem {
    /// Shape checks only; axioms are checked by [`ProjectionSystem::validate`].
    pub fn new(
        skeleton: Skeleton,
        parts: Vec<Vec<Seq>>,
        pi: BTreeMap<(usize, usize), Vec<usize>>,
    ) -> Result<Self> {
        let fam = LocalFamily::new(skeleton.clone(), parts.clone())?;
        if fam.parts() != parts.as_slice() {
            return Err(Error::InvalidSystem(
                "parts must be sorted and free of duplicates".into(),
            ));
        }
        for d in 0..skeleton.len() {
            for g in skeleton.up_set(d) {
                let m = pi.get(&(d, g)).ok_or_else(|| {
                    Error::InvalidSystem(format!(
                        "no projection from {} to {}",
                        skeleton.name(d),
                        skeleton.name(g)
                    ))
                })?;
                if m.len() != parts[d].len() || m.iter().any(|&j| j >= parts[g].len()) {
                    return Err(Error::InvalidSystem(format!(
                        "projection from {} to {} has the wrong shape",
                        skeleton.name(d),
                        skeleton.name(g)
                    )));
                }
            }
        }
        if pi
            .keys()
            .any(|&(d, g)| d >= skeleton.len() || g >= skeleton.len() || !skeleton.le(d, g))
        {
            return Err(Error::InvalidSystem(
                "projection between incomparable elements".into(),
            ));
        }
        Ok(ProjectionSystem {
            skeleton,
            parts,
            pi,
        })
    }

    /// Projections given by a function on sequences.
    pub fn from_fn(
        skeleton: Skeleton,
        parts: Vec<Vec<Seq>>,
        f: impl Fn(usize, usize, &Seq) -> Seq,
    ) -> Result<Self> {
        let parts: Vec<Vec<Seq>> = parts
            .into_iter()
            .map(|p| p.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
            .collect();
        let mut pi = BTreeMap::new();
        for d in 0..skeleton.len() {
            for g in skeleton.up_set(d) {
                let mut m = vec![];
                for z in &parts[d] {
                    let w = f(d, g, z);
                    let j = parts[g].binary_search(&w).map_err(|_| {
                        Error::InvalidSystem(format!(
                            "{} is not in the part at {}",
                            w.render(&skeleton),
                            skeleton.name(g)
                        ))
                    })?;
                    m.push(j);
                }
                pi.insert((d, g), m);
            }
        }
        Self::new(skeleton, parts, pi)
    }

    /// Pairs a family of local domains with plain restrictions.
    pub fn trivial(fam: &LocalFamily) -> Result<Self> {
        let sk = fam.skeleton().clone();
        Self::from_fn(sk.clone(), fam.parts().to_vec(), |_, g, z| {
            z.restrict(&sk, g).unwrap()
        })
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    pub fn part(&self, d: usize) -> &[Seq] {
        &self.parts[d]
    }

    pub fn parts(&self) -> &[Vec<Seq>] {
        &self.parts
    }

    pub fn total(&self) -> usize {
        self.parts.iter().map(Vec::len).sum()
    }

    pub fn pi_map(&self, d: usize, g: usize) -> Option<&[usize]> {
        self.pi.get(&(d, g)).map(Vec::as_slice)
    }

    pub fn pi_table(&self) -> &BTreeMap<(usize, usize), Vec<usize>> {
        &self.pi
    }

    /// `π_{δγ}` applied to the `i`-th element of `𝐒_δ`, as an index into `𝐒_γ`.
    pub fn project(&self, d: usize, g: usize, i: usize) -> usize {
        self.pi[&(d, g)][i]
    }

    pub fn index_in(&self, d: usize, z: &Seq) -> Option<usize> {
        self.parts[d].binary_search(z).ok()
    }

    pub fn as_family(&self) -> LocalFamily {
        LocalFamily::new(self.skeleton.clone(), self.parts.clone())
            .expect("parts were validated on construction")
    }

    /// Every projection is a restriction.
    pub fn is_trivial(&self) -> bool {
        self.pi.iter().all(|(&(d, g), m)| {
            m.iter().enumerate().all(|(i, &j)| {
                self.parts[d][i].restrict(&self.skeleton, g).as_ref() == Some(&self.parts[g][j])
            })
        })
    }

    pub fn is_trivial_between(&self, d: usize, g: usize) -> bool {
        self.pi[&(d, g)].iter().enumerate().all(|(i, &j)| {
            self.parts[d][i].restrict(&self.skeleton, g).as_ref() == Some(&self.parts[g][j])
        })
    }

    pub fn validate(&self) -> Vec<ProjViolation> {
        let sk = &self.skeleton;
        let mut out = vec![];
        for d in 0..sk.len() {
            let part = &self.parts[d];
            if part.is_empty() {
                out.push(ProjViolation::Empty(d));
            }
            for (i, z) in part.iter().enumerate() {
                if let Some(v) = (0..sk.n(d)).find(|&v| self.index_in(d, &z.perturb(v)).is_none()) {
                    out.push(ProjViolation::NotPerturbationClosed {
                        at: d,
                        seq: i,
                        value: v,
                    });
                }
                if self.project(d, d, i) != i {
                    out.push(ProjViolation::NotIdentity { at: d, seq: i });
                }
            }
            for g in sk.up_set(d) {
                let m = &self.pi[&(d, g)];
                if m.iter().collect::<BTreeSet<_>>().len() != self.parts[g].len() {
                    out.push(ProjViolation::NotSurjective { from: d, to: g });
                }
                for a in 0..part.len() {
                    for b in a + 1..part.len() {
                        let same_pi = m[a] == m[b];
                        let same_res = part[a].restrict(sk, g) == part[b].restrict(sk, g);
                        if same_pi != same_res {
                            out.push(ProjViolation::Congruence {
                                from: d,
                                to: g,
                                a,
                                b,
                            });
                        }
                    }
                }
                for b in sk.up_set(g) {
                    for i in 0..part.len() {
                        if self.project(g, b, self.project(d, g, i)) != self.project(d, b, i) {
                            out.push(ProjViolation::Composition {
                                from: d,
                                via: g,
                                to: b,
                                seq: i,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn describe(&self, v: &ProjViolation) -> String {
        let sk = &self.skeleton;
        let n = |d: usize| sk.name(d);
        let z = |d: usize, i: usize| self.parts[d][i].render(sk);
        match *v {
            ProjViolation::Empty(d) => format!("part at {} is empty", n(d)),
            ProjViolation::NotPerturbationClosed { at, seq, value } => {
                format!("{} at {} is not closed under setting the bottom value to {}", z(at, seq), n(at), value)
            }
            ProjViolation::NotIdentity { at, seq } => format!("projection from {0} to itself moves {1}", n(at), z(at, seq)),
            ProjViolation::NotSurjective { from, to } => format!("projection from {} to {} is not onto", n(from), n(to)),
            ProjViolation::Congruence { from, to, a, b } => format!(
                "projection from {} to {} does not match restriction on {} and {}",
                n(from),
                n(to),
                z(from, a),
                z(from, b)
            ),
            ProjViolation::Composition { from, via, to, seq } => format!(
                "composition fails at ({}, {}, {}, {}): projecting through {} differs from projecting directly",
                n(from),
                n(via),
                n(to),
                z(from, seq),
                n(via)
            ),
        }
    }

    /// The union of the parts ordered by `z ⪯ z'` iff `δ ≤ γ` and `π_{δγ}(z) = z'`.
    pub fn canonical_poset(&self) -> CanonicalPoset {
        let sk = &self.skeleton;
        let mut offset = vec![];
        let mut block_of = vec![];
        let mut local = vec![];
        let mut names = vec![];
        for d in 0..sk.len() {
            offset.push(block_of.len());
            for (i, z) in self.parts[d].iter().enumerate() {
                block_of.push(d);
                local.push(i);
                names.push(format!("{}{}", sk.name(d), z.render(sk)));
            }
        }
        let total = block_of.len();
        let le = (0..total)
            .map(|a| {
                (0..total)
                    .map(|b| {
                        let (d, g) = (block_of[a], block_of[b]);
                        sk.le(d, g) && self.project(d, g, local[a]) == local[b]
                    })
                    .collect()
            })
            .collect();
        CanonicalPoset {
            names,
            block_of,
            local,
            offset,
            le,
        }
    }

    /// A coherent family through every `z`: some `(z_δ)` with `π_{δγ}(z_δ) = z_γ`.
    pub fn fullness_failure(&self) -> Option<(usize, usize)> {
        let sk = &self.skeleton;
        let order = sk.top_down();
        for d in 0..sk.len() {
            for i in 0..self.parts[d].len() {
                let mut pick = vec![usize::MAX; sk.len()];
                pick[d] = i;
                if !self.extend_coherent(&order, 0, &mut pick) {
                    return Some((d, i));
                }
            }
        }
        None
    }

    fn extend_coherent(&self, order: &[usize], k: usize, pick: &mut [usize]) -> bool {
        let sk = &self.skeleton;
        if k == order.len() {
            return true;
        }
        let e = order[k];
        let consistent = |pick: &[usize], e: usize, j: usize| {
            (0..sk.len()).all(|o| {
                pick[o] == usize::MAX
                    || o == e
                    || (!sk.le(o, e) || self.project(o, e, pick[o]) == j)
                        && (!sk.le(e, o) || self.project(e, o, j) == pick[o])
            })
        };
        if pick[e] != usize::MAX {
            let j = pick[e];
            return consistent(pick, e, j) && self.extend_coherent(order, k + 1, pick);
        }
        for j in 0..self.parts[e].len() {
            if consistent(pick, e, j) {
                pick[e] = j;
                if self.extend_coherent(order, k + 1, pick) {
                    pick[e] = usize::MAX;
                    return true;
                }
                pick[e] = usize::MAX;
            }
        }
        false
    }

    pub fn is_full(&self) -> bool {
        self.fullness_failure().is_none()
    }
}

/// The canonical poset of a projection system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalPoset {
    pub names: Vec<String>,
    pub block_of: Vec<usize>,
    /// index inside the block
    pub local: Vec<usize>,
    pub offset: Vec<usize>,
    pub le: Vec<Vec<bool>>,
}

impl CanonicalPoset {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn global(&self, d: usize, i: usize) -> usize {
        self.offset[d] + i
    }

    pub fn block(&self, d: usize) -> std::ops::Range<usize> {
        let end = self.offset.get(d + 1).copied().unwrap_or(self.len());
        self.offset[d]..end
    }
}

/// Finite character: per element, a partition of its up-set into convex
/// pieces inside which every projection is a restriction.
pub type CharacterPartition = Vec<Vec<usize>>;

pub const UP_SET_GUARD: usize = 12;

impl ProjectionSystem {
    /// Checks that `pieces` witnesses finite character at `δ`.
    pub fn is_character_partition(&self, d: usize, pieces: &[Vec<usize>]) -> bool {
        let sk = &self.skeleton;
        let mut all: Vec<usize> = pieces.iter().flatten().copied().collect();
        all.sort();
        if all != sk.up_set(d) || all.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        pieces.iter().all(|p| self.piece_ok(sk, p))
    }

    fn piece_ok(&self, sk: &Skeleton, piece: &[usize]) -> bool {
        let convex = piece.iter().all(|&a| {
            piece.iter().all(|&b| {
                (0..sk.len()).all(|m| !(sk.le(a, m) && sk.le(m, b)) || piece.contains(&m))
            })
        });
        convex
            && piece.iter().all(|&a| {
                piece
                    .iter()
                    .all(|&b| !sk.le(a, b) || self.is_trivial_between(a, b))
            })
    }

    /// A partition with the fewest pieces, found by exhaustive search.
    pub fn coarsest_character_partition(&self, d: usize) -> Result<CharacterPartition> {
        let sk = &self.skeleton;
        let up = sk.up_set(d);
        if up.len() > UP_SET_GUARD {
            return Err(Error::UpSetTooLarge {
                size: up.len(),
                limit: UP_SET_GUARD,
            });
        }
        let mut best: CharacterPartition = up.iter().map(|&g| vec![g]).collect();
        let mut cur: Vec<Vec<usize>> = vec![];
        self.search_partition(&up, 0, &mut cur, &mut best);
        Ok(best)
    }

    fn search_partition(
        &self,
        up: &[usize],
        k: usize,
        cur: &mut Vec<Vec<usize>>,
        best: &mut CharacterPartition,
    ) {
        if cur.len() >= best.len() {
            return;
        }
        let sk = &self.skeleton;
        if k == up.len() {
            if cur.iter().all(|p| self.piece_ok(sk, p)) {
                *best = cur.clone();
            }
            return;
        }
        let e = up[k];
        for p in 0..cur.len() {
            let trivial_with_all = cur[p].iter().all(|&a| {
                (!sk.le(a, e) || self.is_trivial_between(a, e))
                    && (!sk.le(e, a) || self.is_trivial_between(e, a))
            });
            if trivial_with_all {
                cur[p].push(e);
                self.search_partition(up, k + 1, cur, best);
                cur[p].pop();
            }
        }
        cur.push(vec![e]);
        self.search_partition(up, k + 1, cur, best);
        cur.pop();
    }

    /// Always true on finite data (singletons work); returns the coarsest partitions found.
    pub fn finite_character(&self) -> Result<Vec<CharacterPartition>> {
        (0..self.skeleton.len())
            .map(|d| self.coarsest_character_partition(d))
            .collect()
    }

    pub fn has_finite_character(&self) -> Result<bool> {
        let parts = self.finite_character()?;
        Ok(parts
            .iter()
            .enumerate()
            .all(|(d, p)| self.is_character_partition(d, p)))
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures;
    use super::*;

    #[test]
    fn trivial_chain_system_is_valid() {
        let ps =
            ProjectionSystem::trivial(&LocalFamily::locally_finite(&Skeleton::chain(&[2, 2, 1])))
                .unwrap();
        assert!(ps.validate().is_empty());
        assert!(ps.is_trivial());
        assert!(ps.is_full());
        let p = ps.canonical_poset();
        assert_eq!(p.len(), 7);
        // reverse-inclusion forest: each bottom element sits under exactly one element per block above
        for a in p.block(0) {
            assert_eq!((0..p.len()).filter(|&b| p.le[a][b]).count(), 3);
        }
        assert_eq!(ps.finite_character().unwrap()[0], vec![vec![0, 1, 2]]);
    }

    #[test]
    fn twisted_system_is_valid_and_needs_two_pieces() {
        let ps = fixtures::w3_twist();
        assert!(ps.validate().is_empty());
        assert!(!ps.is_trivial());
        assert_eq!(
            ps.coarsest_character_partition(0).unwrap(),
            vec![vec![0], vec![1]]
        );
        assert!(ps.has_finite_character().unwrap());
    }

    #[test]
    fn broken_composition_is_named() {
        let ps = fixtures::broken_composition();
        let v = ps.validate();
        let comp = v
            .iter()
            .find(|x| matches!(x, ProjViolation::Composition { .. }))
            .expect("composition violation");
        let msg = ps.describe(comp);
        assert!(
            msg.starts_with("composition fails at (d1, d2, d3,"),
            "{msg}"
        );
    }
}
