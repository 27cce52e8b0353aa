use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

use super::Skeleton;

/// A sequence over the up-set of its base element: `vals[γ]` is `Some` exactly for `γ ≥ base`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Seq {
    base: usize,
    vals: Vec<Option<usize>>,
}

impl Seq {
    pub fn new(sk: &Skeleton, base: usize, vals: Vec<Option<usize>>) -> Result<Self> {
        if base >= sk.len() || vals.len() != sk.len() {
            return Err(Error::DomainMismatch(
                "sequence does not fit the skeleton".into(),
            ));
        }
        for (g, v) in vals.iter().enumerate() {
            match (sk.le(base, g), v) {
                (true, Some(i)) if *i < sk.n(g) => {}
                (false, None) => {}
                _ => {
                    return Err(Error::DomainMismatch(format!(
                        "sequence over {} is malformed at {}",
                        sk.name(base),
                        sk.name(g)
                    )))
                }
            }
        }
        Ok(Seq { base, vals })
    }

    /// Builds the sequence over `base` from `(γ, value)` pairs.
    pub fn from_pairs(sk: &Skeleton, base: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut vals = vec![None; sk.len()];
        for &(g, v) in pairs {
            if g >= sk.len() {
                return Err(Error::DomainMismatch("unknown coordinate".into()));
            }
            vals[g] = Some(v);
        }
        Self::new(sk, base, vals)
    }

    pub(crate) fn raw(base: usize, vals: Vec<Option<usize>>) -> Self {
        Seq { base, vals }
    }

    /// `x|_δ` for a global sequence `x`.
    pub fn from_global(sk: &Skeleton, x: &[usize], base: usize) -> Self {
        let vals = (0..sk.len())
            .map(|g| sk.le(base, g).then(|| x[g]))
            .collect();
        Seq { base, vals }
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn get(&self, g: usize) -> Option<usize> {
        self.vals[g]
    }

    pub fn values(&self) -> &[Option<usize>] {
        &self.vals
    }

    /// `z|_γ`; `None` unless `γ ≥ base`.
    pub fn restrict(&self, sk: &Skeleton, g: usize) -> Option<Seq> {
        sk.le(self.base, g).then(|| Seq {
            base: g,
            vals: (0..sk.len())
                .map(|b| if sk.le(g, b) { self.vals[b] } else { None })
                .collect(),
        })
    }

    /// `self ⊇ other` as partial functions.
    pub fn extends(&self, other: &Seq) -> bool {
        other
            .vals
            .iter()
            .zip(&self.vals)
            .all(|(o, s)| o.is_none() || o == s)
    }

    /// `z^δ_i`: the same sequence with its bottom coordinate set to `i`.
    pub fn perturb(&self, i: usize) -> Seq {
        let mut s = self.clone();
        s.vals[self.base] = Some(i);
        s
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.vals.len())
            .filter(|&g| self.vals[g].is_some_and(|v| v != 0))
            .collect()
    }

    /// `(d1:0, d2:1)`
    pub fn render(&self, sk: &Skeleton) -> String {
        let parts: Vec<String> = (0..sk.len())
            .filter_map(|g| self.vals[g].map(|v| format!("{}:{}", sk.name(g), v)))
            .collect();
        format!("({})", parts.join(", "))
    }

    pub fn to_map(&self, sk: &Skeleton) -> BTreeMap<String, usize> {
        (0..sk.len())
            .filter_map(|g| self.vals[g].map(|v| (sk.name(g).to_string(), v)))
            .collect()
    }
}

impl Skeleton {
    /// Every sequence over the up-set of `δ`, in lexicographic order.
    pub fn all_local(&self, d: usize) -> Vec<Seq> {
        let up = self.up_set(d);
        let mut out = vec![];
        let mut cur = vec![0usize; up.len()];
        loop {
            let mut vals = vec![None; self.len()];
            for (k, &g) in up.iter().enumerate() {
                vals[g] = Some(cur[k]);
            }
            out.push(Seq { base: d, vals });
            let mut k = up.len();
            loop {
                if k == 0 {
                    out.sort();
                    return out;
                }
                k -= 1;
                cur[k] += 1;
                if cur[k] < self.n(up[k]) {
                    break;
                }
                cur[k] = 0;
            }
        }
    }

    /// `∏_δ N_δ`, lexicographic. Refuses products above `guard`.
    pub fn full_product(&self, guard: usize) -> Result<Vec<Vec<usize>>> {
        let size = self.global_product_size();
        if size > guard {
            return Err(Error::TooLarge { size, limit: guard });
        }
        let mut out = Vec::with_capacity(size);
        let mut cur = vec![0usize; self.len()];
        loop {
            out.push(cur.clone());
            let mut k = self.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                cur[k] += 1;
                if cur[k] < self.n(k) {
                    break;
                }
                cur[k] = 0;
            }
        }
    }
}

/// The four admissible-support conditions evaluated on one subset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SupportFlags {
    pub fin: bool,
    pub lf: bool,
    pub wsp: bool,
    pub max: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportKind {
    Fin,
    Lf,
    Wsp,
    Max,
}

impl std::str::FromStr for SupportKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fin" => Ok(SupportKind::Fin),
            "lf" => Ok(SupportKind::Lf),
            "wsp" => Ok(SupportKind::Wsp),
            "max" => Ok(SupportKind::Max),
            _ => Err(Error::Parse(format!("unknown support family `{s}`"))),
        }
    }
}

impl std::fmt::Display for SupportKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SupportKind::Fin => "fin",
            SupportKind::Lf => "lf",
            SupportKind::Wsp => "wsp",
            SupportKind::Max => "max",
        })
    }
}

impl SupportFlags {
    pub fn admits(&self, kind: SupportKind) -> bool {
        match kind {
            SupportKind::Fin => self.fin,
            SupportKind::Lf => self.lf,
            SupportKind::Wsp => self.wsp,
            SupportKind::Max => self.max,
        }
    }
}

/// A poset whose subsets can be classified by the support conditions.
/// Implemented for finite skeletons here; tests add a symbolic infinite chain.
pub trait SupportUniverse {
    type Subset;
    fn support_flags(&self, a: &Self::Subset) -> SupportFlags;
}

impl SupportUniverse for Skeleton {
    type Subset = Vec<usize>;

    fn support_flags(&self, a: &Vec<usize>) -> SupportFlags {
        let set: BTreeSet<usize> = a.iter().copied().collect();
        // A subset handed over as a list is finite by construction.
        let fin = true;
        let lf =
            (0..self.len()).all(|d| set.iter().filter(|&&g| self.le(d, g)).count() <= set.len());
        // Every nonempty subset has a maximal element.
        let elems: Vec<usize> = set.iter().copied().collect();
        let max = if elems.len() <= 16 {
            (1u32..(1 << elems.len())).all(|mask| {
                let sub: Vec<usize> = (0..elems.len())
                    .filter(|&i| mask & (1 << i) != 0)
                    .map(|i| elems[i])
                    .collect();
                sub.iter().any(|&x| !sub.iter().any(|&y| self.lt(x, y)))
            })
        } else {
            !has_strict_cycle(self, &elems)
        };
        // Infinite descending chains would need a cycle in `<`; a finite poset has none.
        let wsp = max && !has_strict_cycle(self, &elems);
        SupportFlags { fin, lf, wsp, max }
    }
}

fn has_strict_cycle(sk: &Skeleton, elems: &[usize]) -> bool {
    // a strictly descending walk longer than the set must revisit an element
    let k = elems.len();
    let mut reach: Vec<Vec<bool>> = elems
        .iter()
        .map(|&a| elems.iter().map(|&b| sk.lt(b, a)).collect())
        .collect();
    for m in 0..k {
        for i in 0..k {
            for j in 0..k {
                if reach[i][m] && reach[m][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    (0..k).any(|i| reach[i][i])
}

pub fn support_kind(sk: &Skeleton, a: &[usize]) -> SupportFlags {
    sk.support_flags(&a.to_vec())
}

/// `S^𝒜 = {x ∈ ∏ N_δ : supp(x) ∈ 𝒜}`.
pub fn domain_from_supports(
    sk: &Skeleton,
    kind: SupportKind,
    guard: usize,
) -> Result<Vec<Vec<usize>>> {
    Ok(sk
        .full_product(guard)?
        .into_iter()
        .filter(|x| {
            let supp: Vec<usize> = (0..x.len()).filter(|&d| x[d] != 0).collect();
            sk.support_flags(&supp).admits(kind)
        })
        .collect())
}

/// Local domains `𝐒_δ`, one set of sequences per element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalFamily {
    skeleton: Skeleton,
    parts: Vec<Vec<Seq>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyViolation {
    Empty(usize),
    RestrictionImage { from: usize, to: usize },
    NotPerturbationClosed { at: usize, seq: Seq, value: usize },
}

impl LocalFamily {
    pub fn new(skeleton: Skeleton, parts: Vec<Vec<Seq>>) -> Result<Self> {
        if parts.len() != skeleton.len() {
            return Err(Error::DomainMismatch(
                "one part per skeleton element expected".into(),
            ));
        }
        let mut sorted = vec![];
        for (d, p) in parts.into_iter().enumerate() {
            for z in &p {
                Seq::new(&skeleton, z.base, z.vals.clone())?;
                if z.base != d {
                    return Err(Error::DomainMismatch(format!(
                        "sequence filed under the wrong element {}",
                        skeleton.name(d)
                    )));
                }
            }
            let set: BTreeSet<Seq> = p.into_iter().collect();
            sorted.push(set.into_iter().collect());
        }
        Ok(LocalFamily {
            skeleton,
            parts: sorted,
        })
    }

    /// `𝐒^LF`: every sequence over every up-set.
    pub fn locally_finite(skeleton: &Skeleton) -> Self {
        let parts = (0..skeleton.len()).map(|d| skeleton.all_local(d)).collect();
        LocalFamily {
            skeleton: skeleton.clone(),
            parts,
        }
    }

    /// `S_δ = {x|_δ : x ∈ S}`.
    pub fn from_global(skeleton: &Skeleton, s: &[Vec<usize>]) -> Result<Self> {
        if s.iter().any(|x| {
            x.len() != skeleton.len() || x.iter().enumerate().any(|(d, &v)| v >= skeleton.n(d))
        }) {
            return Err(Error::DomainMismatch(
                "global sequence does not fit the skeleton".into(),
            ));
        }
        let parts = (0..skeleton.len())
            .map(|d| s.iter().map(|x| Seq::from_global(skeleton, x, d)).collect())
            .collect();
        Self::new(skeleton.clone(), parts)
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

    pub fn validate(&self) -> Vec<FamilyViolation> {
        let sk = &self.skeleton;
        let mut out = vec![];
        for d in 0..sk.len() {
            if self.parts[d].is_empty() {
                out.push(FamilyViolation::Empty(d));
            }
            for g in sk.up_set(d) {
                let image: BTreeSet<Seq> = self.parts[d]
                    .iter()
                    .map(|z| z.restrict(sk, g).unwrap())
                    .collect();
                let target: BTreeSet<Seq> = self.parts[g].iter().cloned().collect();
                if image != target {
                    out.push(FamilyViolation::RestrictionImage { from: d, to: g });
                }
            }
            for z in &self.parts[d] {
                for i in 0..sk.n(d) {
                    if self.parts[d].binary_search(&z.perturb(i)).is_err() {
                        out.push(FamilyViolation::NotPerturbationClosed {
                            at: d,
                            seq: z.clone(),
                            value: i,
                        });
                        break;
                    }
                }
            }
        }
        out
    }

    pub fn describe(&self, v: &FamilyViolation) -> String {
        let sk = &self.skeleton;
        match v {
            FamilyViolation::Empty(d) => format!("part at {} is empty", sk.name(*d)),
            FamilyViolation::RestrictionImage { from, to } => {
                format!(
                    "restrictions of the part at {} do not give the part at {}",
                    sk.name(*from),
                    sk.name(*to)
                )
            }
            FamilyViolation::NotPerturbationClosed { at, seq, value } => {
                format!(
                    "{} at {} is not closed under setting the bottom value to {}",
                    seq.render(sk),
                    sk.name(*at),
                    value
                )
            }
        }
    }

    /// `{x ∈ ∏N : x|_γ ∈ 𝐒_γ for all γ}`.
    pub fn coherent_globals(&self, guard: usize) -> Result<Vec<Vec<usize>>> {
        let sk = &self.skeleton;
        Ok(sk
            .full_product(guard)?
            .into_iter()
            .filter(|x| {
                (0..sk.len()).all(|g| {
                    self.parts[g]
                        .binary_search(&Seq::from_global(sk, x, g))
                        .is_ok()
                })
            })
            .collect())
    }

    /// First `(δ, z)` that no coherent global sequence extends.
    pub fn fullness_failure(&self, guard: usize) -> Result<Option<(usize, Seq)>> {
        let globals = self.coherent_globals(guard)?;
        let sk = &self.skeleton;
        for d in 0..sk.len() {
            let reached: BTreeSet<Seq> =
                globals.iter().map(|x| Seq::from_global(sk, x, d)).collect();
            if let Some(z) = self.parts[d].iter().find(|z| !reached.contains(*z)) {
                return Ok(Some((d, z.clone())));
            }
        }
        Ok(None)
    }

    pub fn is_full(&self, guard: usize) -> Result<bool> {
        Ok(self.fullness_failure(guard)?.is_none())
    }

    /// The global domain of a full family.
    pub fn global_from_full(&self, guard: usize) -> Result<Vec<Vec<usize>>> {
        if let Some((d, z)) = self.fullness_failure(guard)? {
            return Err(Error::NotFull(format!(
                "{} at {} extends to no coherent sequence",
                z.render(&self.skeleton),
                self.skeleton.name(d)
            )));
        }
        self.coherent_globals(guard)
    }
}

/// `d_Δ(x, y) = 2^{-m}` for the least `m` in `enumeration` where the
/// restrictions of `x` and `y` differ; 0 when they never do.
pub fn d_delta(
    sk: &Skeleton,
    x: &[usize],
    y: &[usize],
    enumeration: &[usize],
) -> crate::rational::Q {
    for (m, &d) in enumeration.iter().enumerate() {
        if Seq::from_global(sk, x, d) != Seq::from_global(sk, y, d) {
            return crate::rational::pow2_neg(m as u32);
        }
    }
    crate::rational::Q::from_integer(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;

    #[test]
    fn finite_supports_collapse() {
        let sk = Skeleton::chain(&[2, 2, 1]);
        for a in [vec![], vec![0], vec![0, 2], vec![0, 1, 2]] {
            assert_eq!(
                support_kind(&sk, &a),
                SupportFlags {
                    fin: true,
                    lf: true,
                    wsp: true,
                    max: true
                }
            );
        }
        let lf = domain_from_supports(&sk, SupportKind::Lf, 1000).unwrap();
        assert_eq!(lf.len(), 4);
        for k in [SupportKind::Fin, SupportKind::Wsp, SupportKind::Max] {
            assert_eq!(domain_from_supports(&sk, k, 1000).unwrap(), lf);
        }
    }

    #[test]
    fn locals_and_globals_round_trip() {
        let sk = Skeleton::chain(&[2, 2, 1]);
        let s = domain_from_supports(&sk, SupportKind::Lf, 1000).unwrap();
        let fam = LocalFamily::from_global(&sk, &s).unwrap();
        assert_eq!(
            [fam.part(0).len(), fam.part(1).len(), fam.part(2).len()],
            [4, 2, 1]
        );
        assert!(fam.validate().is_empty());
        assert_eq!(fam.global_from_full(1000).unwrap(), s);
        assert_eq!(fam, LocalFamily::locally_finite(&sk));
    }

    #[test]
    fn non_full_family_is_detected() {
        // c, d below both a and b; 𝐒_c forces a = b, 𝐒_d forces a ≠ b
        let names = ["a", "b", "c", "d"].map(String::from).to_vec();
        let sk =
            Skeleton::from_relations(names, &[(2, 0), (2, 1), (3, 0), (3, 1)], vec![2; 4], None)
                .unwrap();
        let mut parts: Vec<Vec<Seq>> = vec![sk.all_local(0), sk.all_local(1), vec![], vec![]];
        for z in sk.all_local(2) {
            if z.get(0) == z.get(1) {
                parts[2].push(z);
            }
        }
        for z in sk.all_local(3) {
            if z.get(0) != z.get(1) {
                parts[3].push(z);
            }
        }
        let fam = LocalFamily::new(sk, parts).unwrap();
        assert!(fam.validate().is_empty());
        assert!(!fam.is_full(1000).unwrap());
        assert!(matches!(fam.global_from_full(1000), Err(Error::NotFull(_))));
    }

    #[test]
    fn d_delta_on_the_chain() {
        let sk = Skeleton::chain(&[2, 2, 1]);
        assert_eq!(d_delta(&sk, &[0, 0, 0], &[1, 0, 0], &[2, 1, 0]), qr(1, 4));
        assert_eq!(d_delta(&sk, &[0, 0, 0], &[0, 1, 0], &[2, 1, 0]), qr(1, 2));
        assert_eq!(d_delta(&sk, &[1, 1, 0], &[1, 1, 0], &[2, 1, 0]), qr(0, 1));
    }

    /// The descending chain δ0 > δ1 > δ2 > …, with subsets encoded symbolically.
    struct OmegaStar;

    enum Sub {
        Finite(Vec<u64>),
        /// `{δ_n : n ≥ k}`
        Tail(u64),
    }

    impl Sub {
        fn contains(&self, n: u64) -> bool {
            match self {
                Sub::Finite(v) => v.contains(&n),
                Sub::Tail(k) => n >= *k,
            }
        }
    }

    impl SupportUniverse for OmegaStar {
        type Subset = Sub;
        fn support_flags(&self, a: &Sub) -> SupportFlags {
            // up-set of δ_n is {δ_0, …, δ_n}: its intersection with any subset is finite
            let lf = true;
            // the element of least index is maximal in any nonempty subset
            let max = true;
            // descending chains δ_k > δ_{k+1} > … have no lower bound in ω*
            let wsp = max;
            SupportFlags {
                fin: matches!(a, Sub::Finite(_)),
                lf,
                wsp,
                max,
            }
        }
    }

    #[test]
    fn symbolic_infinite_chain_separates_fin_from_lf() {
        let u = OmegaStar;
        assert_eq!(
            u.support_flags(&Sub::Tail(3)),
            SupportFlags {
                fin: false,
                lf: true,
                wsp: true,
                max: true
            }
        );
        assert!(u.support_flags(&Sub::Finite(vec![1, 4])).fin);
        assert!(Sub::Tail(3).contains(1000) && !Sub::Tail(3).contains(2));
        assert!(Sub::Finite(vec![1, 4]).contains(4));
    }
}
