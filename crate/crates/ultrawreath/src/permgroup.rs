//! Permutations and explicitly enumerated permutation groups.
//!
//! Groups are stored as a sorted list of all their elements. That keeps every
//! query exact and simple; the price is the `max_order` guard.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on the number of group elements we are willing to enumerate.
pub const DEFAULT_MAX_ORDER: usize = 1_000_000;

/// The order guard, overridable through `UMW_MAX_ORDER`.
pub fn default_max_order() -> usize {
    std::env::var("UMW_MAX_ORDER")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_ORDER)
}

/// A bijection of `0..n`, stored as its image list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::DomainMismatch(format!(
                    "{images:?} is not a bijection of 0..{n}"
                )));
            }
            seen[i] = true;
        }
        Ok(Perm(images))
    }

    pub(crate) fn from_images_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Perm::from_images(images.clone()).is_ok());
        Perm(images)
    }

    /// Builds a permutation from disjoint cycles.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut img: Vec<usize> = (0..n).collect();
        for c in cycles {
            for (k, &a) in c.iter().enumerate() {
                if a >= n {
                    return Err(Error::DomainMismatch(format!("point {a} outside 0..{n}")));
                }
                img[a] = c[(k + 1) % c.len()];
            }
        }
        Perm::from_images(img)
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut img: Vec<usize> = (0..n).collect();
        img.swap(a, b);
        Perm(img)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `β ∘ self ∘ β⁻¹` where `beta` maps our ground set bijectively onto another.
    pub fn transport(&self, beta: &[usize]) -> Perm {
        let mut img = vec![0; beta.len()];
        for (x, &bx) in beta.iter().enumerate() {
            img[bx] = beta[self.0[x]];
        }
        Perm(img)
    }

    /// One-line notation with names, e.g. `[a->b, b->a, c->c]`.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        struct D<'a>(&'a Perm, &'a [String]);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "[")?;
                for (i, &j) in self.0 .0.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}->{}", self.1[i], self.1[j])?;
                }
                write!(f, "]")
            }
        }
        D(self, names)
    }
}

/// Visits every permutation of `0..n` in lexicographic order.
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        f(&p);
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// A finite permutation group, given by all of its elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermGroup {
    ground: Vec<String>,
    elements: Vec<Perm>,
    generators: Vec<Perm>,
}

impl PermGroup {
    pub fn trivial(ground: Vec<String>) -> Self {
        let n = ground.len();
        PermGroup {
            ground,
            elements: vec![Perm::identity(n)],
            generators: vec![],
        }
    }

    /// The group generated by `generators`, enumerated breadth-first.
    pub fn closure(ground: Vec<String>, generators: Vec<Perm>, max_order: usize) -> Result<Self> {
        let n = ground.len();
        for g in &generators {
            if g.len() != n {
                return Err(Error::DomainMismatch(format!(
                    "generator acts on {} points, ground set has {n}",
                    g.len()
                )));
            }
        }
        let id = Perm::identity(n);
        let mut seen: BTreeSet<Perm> = BTreeSet::from([id.clone()]);
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in &generators {
                let y = g.compose(&x);
                if !seen.contains(&y) {
                    if seen.len() >= max_order {
                        return Err(Error::OrderGuardExceeded { limit: max_order });
                    }
                    seen.insert(y.clone());
                    queue.push_back(y);
                }
            }
        }
        Ok(PermGroup {
            ground,
            elements: seen.into_iter().collect(),
            generators,
        })
    }

    /// Wraps a full element list, checking identity and closure under composition.
    pub fn from_elements(ground: Vec<String>, elements: Vec<Perm>) -> Result<Self> {
        let n = ground.len();
        if elements.iter().any(|g| g.len() != n) {
            return Err(Error::DomainMismatch("element of the wrong degree".into()));
        }
        let g = Self::from_elements_unchecked(ground, elements);
        if !g.contains(&Perm::identity(n)) {
            return Err(Error::NotAGroup("identity missing".into()));
        }
        if let Some((a, b)) = g.closure_failure() {
            return Err(Error::NotAGroup(format!(
                "product of elements {a} and {b} missing"
            )));
        }
        Ok(g)
    }

    pub(crate) fn from_elements_unchecked(ground: Vec<String>, elements: Vec<Perm>) -> Self {
        let set: BTreeSet<Perm> = elements.into_iter().collect();
        let elements: Vec<Perm> = set.into_iter().collect();
        let generators = greedy_generators(&elements);
        PermGroup {
            ground,
            elements,
            generators,
        }
    }

    /// All permutations of the ground set.
    pub fn symmetric(ground: Vec<String>, max_order: usize) -> Result<Self> {
        let n = ground.len();
        if factorial_exceeds(n, max_order) {
            return Err(Error::OrderGuardExceeded { limit: max_order });
        }
        let mut gens = vec![];
        if n >= 2 {
            gens.push(Perm::transposition(n, 0, 1));
            gens.push(Perm::from_images_unchecked(
                (0..n).map(|i| (i + 1) % n).collect(),
            ));
        }
        Self::closure(ground, gens, max_order)
    }

    pub fn ground(&self) -> &[String] {
        &self.ground
    }

    pub fn degree(&self) -> usize {
        self.ground.len()
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    /// A small generating set (either the one supplied, or a greedy one).
    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.ground
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    /// Orbit blocks, each sorted, ordered by least element.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = vec![];
        for x in 0..n {
            if seen[x] {
                continue;
            }
            let orbit = self.orbit_of(x);
            for &y in &orbit {
                seen[y] = true;
            }
            out.push(orbit);
        }
        out
    }

    pub fn orbit_of(&self, x: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self.elements.iter().map(|g| g.apply(x)).collect();
        set.into_iter().collect()
    }

    /// Whether the group acts transitively on an invariant `block`.
    pub fn is_transitive(&self, block: &[usize]) -> Result<bool> {
        let set: BTreeSet<usize> = block.iter().copied().collect();
        if set.iter().any(|&x| x >= self.degree()) {
            return Err(Error::DomainMismatch("block outside the ground set".into()));
        }
        if self
            .elements
            .iter()
            .any(|g| set.iter().any(|&x| !set.contains(&g.apply(x))))
        {
            return Err(Error::NotInvariant);
        }
        Ok(match set.first() {
            None => true,
            Some(&x) => self.orbit_of(x).len() == set.len(),
        })
    }

    pub fn stabilizer(&self, x: usize) -> PermGroup {
        let elements = self
            .elements
            .iter()
            .filter(|g| g.apply(x) == x)
            .cloned()
            .collect();
        Self::from_elements_unchecked(self.ground.clone(), elements)
    }

    pub fn stabilizer_of(&self, name: &str) -> Result<PermGroup> {
        Ok(self.stabilizer(self.index_of(name)?))
    }

    /// First pair (by index) whose product is missing, if any.
    pub fn closure_failure(&self) -> Option<(usize, usize)> {
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                if !self.contains(&a.compose(b)) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Same group acting on a renamed ground set.
    pub fn with_ground(mut self, ground: Vec<String>) -> Result<Self> {
        if ground.len() != self.ground.len() {
            return Err(Error::DomainMismatch("renaming changes the degree".into()));
        }
        self.ground = ground;
        Ok(self)
    }
}

fn factorial_exceeds(n: usize, bound: usize) -> bool {
    let mut acc: usize = 1;
    for k in 2..=n {
        acc = match acc.checked_mul(k) {
            Some(v) => v,
            None => return true,
        };
        if acc > bound {
            return true;
        }
    }
    false
}

fn greedy_generators(elements: &[Perm]) -> Vec<Perm> {
    let Some(first) = elements.first() else {
        return vec![];
    };
    let n = first.len();
    let mut gens: Vec<Perm> = vec![];
    let mut span: BTreeSet<Perm> = BTreeSet::from([Perm::identity(n)]);
    for g in elements {
        if span.contains(g) {
            continue;
        }
        gens.push(g.clone());
        // extend the span by closing under the new generator set
        let mut queue: VecDeque<Perm> = span.iter().cloned().collect();
        while let Some(x) = queue.pop_front() {
            for h in &gens {
                let y = h.compose(&x);
                if span.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
    }
    gens
}

/// Outcome of checking that a map between two groups is an isomorphism.
///
/// A failed check is data, not an error: `verified` is false and `failure`
/// holds the first offending source element.
#[derive(Clone, Debug)]
pub struct IsoWitness {
    pub label: String,
    pub source: PermGroup,
    pub target: PermGroup,
    /// Ground-set bijection source → target, when the isomorphism is a conjugation.
    pub bijection: Option<Vec<usize>>,
    pub verified: bool,
    pub failure: Option<Perm>,
    pub note: Option<String>,
}

impl IsoWitness {
    fn fail(mut self, g: Option<Perm>, note: impl Into<String>) -> Self {
        self.verified = false;
        self.failure = g;
        self.note = Some(note.into());
        self
    }
}

/// Checks that `g ↦ β g β⁻¹` maps `source` onto `target`.
pub fn verify_conjugation(
    label: &str,
    source: &PermGroup,
    target: &PermGroup,
    beta: &[usize],
) -> Result<IsoWitness> {
    if beta.len() != source.degree() || beta.len() != target.degree() {
        return Err(Error::DomainMismatch(format!(
            "bijection of length {} between ground sets of size {} and {}",
            beta.len(),
            source.degree(),
            target.degree()
        )));
    }
    Perm::from_images(beta.to_vec())?;
    let w = IsoWitness {
        label: label.to_string(),
        source: source.clone(),
        target: target.clone(),
        bijection: Some(beta.to_vec()),
        verified: true,
        failure: None,
        note: None,
    };
    for g in source.elements() {
        if !target.contains(&g.transport(beta)) {
            return Ok(w.fail(Some(g.clone()), "conjugate lies outside the target group"));
        }
    }
    if source.order() != target.order() {
        return Ok(w.fail(
            None,
            format!("orders differ: {} vs {}", source.order(), target.order()),
        ));
    }
    Ok(w)
}

/// Checks that `f` is an isomorphism `source → target` when the groups act on
/// different ground sets (an induced action rather than a conjugation).
pub fn verify_induced(
    label: &str,
    source: &PermGroup,
    target: &PermGroup,
    f: impl Fn(&Perm) -> Result<Perm>,
) -> Result<IsoWitness> {
    let w = IsoWitness {
        label: label.to_string(),
        source: source.clone(),
        target: target.clone(),
        bijection: None,
        verified: true,
        failure: None,
        note: None,
    };
    let mut images = Vec::with_capacity(source.order());
    for g in source.elements() {
        let fg = f(g)?;
        if fg.len() != target.degree() {
            return Err(Error::DomainMismatch(
                "induced permutation has the wrong degree".into(),
            ));
        }
        if !target.contains(&fg) {
            return Ok(w.fail(Some(g.clone()), "image lies outside the target group"));
        }
        images.push(fg);
    }
    let distinct: BTreeSet<&Perm> = images.iter().collect();
    if distinct.len() != images.len() {
        let mut seen = BTreeSet::new();
        let k = images.iter().position(|p| !seen.insert(p)).unwrap();
        return Ok(w.fail(
            Some(source.elements()[k].clone()),
            "induced map is not injective",
        ));
    }
    // f(s·h) = f(s)·f(h) for generators s and all h gives a homomorphism
    for s in source.generators() {
        let fs = f(s)?;
        for (h, fh) in source.elements().iter().zip(&images) {
            if f(&s.compose(h))? != fs.compose(fh) {
                return Ok(w.fail(Some(s.clone()), "induced map is not a homomorphism"));
            }
        }
    }
    if source.order() != target.order() {
        return Ok(w.fail(
            None,
            format!("orders differ: {} vs {}", source.order(), target.order()),
        ));
    }
    Ok(w)
}
