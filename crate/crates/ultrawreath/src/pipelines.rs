//! End-to-end verifiers. Every isomorphism a pipeline claims is discharged by
//! an explicit witness; a failed witness shows up as a `FAIL` verdict.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{invariant, Error, Result};
use crate::functors::{
    canonical_levels, functor_f, functor_g, pad_chain, verify_f_iso, LevelEmbedding,
};
use crate::io::{self, Document};
use crate::ltree::{CondensedTree, LTree};
use crate::permgroup::{verify_conjugation, IsoWitness, PermGroup};
use crate::rational::fmt_q;
use crate::ultrametric::UltraSpace;
use crate::wreath::{
    global_wreath_group, is_locally_homogeneous, min_depth, pad_top, poset_as_tree, render_global,
    tree_from_wreath, wreath_group, Bundle, CoordinateGroups, LocalFamily, ProjectionSystem, Seq,
    SideChains, Skeleton,
};

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub max_order: usize,
    /// Truncation depth for the roundtrip; `None` picks the least admissible.
    pub depth: Option<usize>,
    pub wide_bound: usize,
    pub side_chains: SideChains,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_order: crate::permgroup::default_max_order(),
            depth: None,
            wide_bound: 3,
            side_chains: SideChains::Short,
        }
    }
}

// ---- reports

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Diagnostic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessSummary {
    pub label: String,
    pub source_order: usize,
    pub target_order: usize,
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl From<&IsoWitness> for WitnessSummary {
    fn from(w: &IsoWitness) -> Self {
        WitnessSummary {
            label: w.label.clone(),
            source_order: w.source.order(),
            target_order: w.target.order(),
            verified: w.verified,
            failure: w
                .failure
                .as_ref()
                .map(|g| io::perm_to_value(g, w.source.ground())),
            note: w.note.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Verdict is `PASS` iff every check passed and every witness verified;
/// `DIAGNOSTIC` when the input does not meet the pipeline's hypothesis.
#[derive(Clone, Debug, Serialize)]
pub struct TheoremReport {
    pub pipeline: String,
    pub input_digest: String,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub witnesses: Vec<WitnessSummary>,
    pub orders: BTreeMap<String, usize>,
    pub artifacts: BTreeMap<String, Value>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub timings_ms: BTreeMap<String, u64>,
    #[serde(skip)]
    pub full_witnesses: Vec<IsoWitness>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl TheoremReport {
    pub fn new(pipeline: &str, input_digest: String) -> Self {
        TheoremReport {
            pipeline: pipeline.to_string(),
            input_digest,
            verdict: Verdict::Pass,
            checks: vec![],
            witnesses: vec![],
            orders: BTreeMap::new(),
            artifacts: BTreeMap::new(),
            notes: vec![],
            timings_ms: BTreeMap::new(),
            full_witnesses: vec![],
            started: Some(Instant::now()),
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<Option<String>>) -> bool {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
        passed
    }

    pub fn witness(&mut self, w: IsoWitness) -> bool {
        let ok = w.verified;
        self.witnesses.push((&w).into());
        self.full_witnesses.push(w);
        ok
    }

    pub fn order(&mut self, name: &str, n: usize) {
        self.orders.insert(name.to_string(), n);
    }

    pub fn artifact(&mut self, name: &str, v: Value) {
        self.artifacts.insert(name.to_string(), v);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// Records the time since the previous stage.
    pub fn stage(&mut self, name: &str) {
        let now = Instant::now();
        if let Some(t) = self.started {
            self.timings_ms
                .insert(name.to_string(), now.duration_since(t).as_millis() as u64);
        }
        self.started = Some(now);
    }

    fn diagnostic(mut self, why: impl Into<String>) -> Self {
        self.note(why);
        self.verdict = Verdict::Diagnostic;
        self
    }

    fn finish(mut self) -> Self {
        if self.verdict != Verdict::Diagnostic {
            let ok =
                self.checks.iter().all(|c| c.passed) && self.witnesses.iter().all(|w| w.verified);
            self.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Canonical JSON; timings only on request, since they break byte-identical reruns.
    pub fn to_value(&self, with_timings: bool) -> Value {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if !with_timings {
            v.as_object_mut().unwrap().remove("timings_ms");
        }
        v
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} pipeline: {:?}\ninput {}\n",
            self.pipeline, self.verdict, self.input_digest
        );
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            out += &format!(
                "  [{mark}] {}{}\n",
                c.name,
                c.detail
                    .as_ref()
                    .map(|d| format!(" — {d}"))
                    .unwrap_or_default()
            );
        }
        for w in &self.witnesses {
            let mark = if w.verified { "ok  " } else { "FAIL" };
            out += &format!(
                "  [{mark}] {} ({} → {})\n",
                w.label, w.source_order, w.target_order
            );
        }
        for (k, v) in &self.orders {
            out += &format!("  |{k}| = {v}\n");
        }
        for n in &self.notes {
            out += &format!("  note: {n}\n");
        }
        out
    }
}

// ---- trees with their condensation

/// A tree, its automorphism orbits, and the skeleton read off them.
#[derive(Clone, Debug)]
pub struct TreeData {
    pub tree: LTree,
    pub cond: CondensedTree,
    pub skeleton: Skeleton,
}

impl TreeData {
    pub fn new(tree: LTree, max_order: usize) -> Result<Self> {
        let aut = tree.aut_group(max_order)?;
        Self::with_aut(tree, aut)
    }

    pub fn with_aut(tree: LTree, aut: PermGroup) -> Result<Self> {
        let cond = tree.condense_with(aut)?;
        let skeleton = tree.label_n(&cond)?;
        Ok(TreeData {
            tree,
            cond,
            skeleton,
        })
    }

    pub fn aut(&self) -> &PermGroup {
        &self.cond.aut
    }

    pub fn class_of(&self, t: usize) -> usize {
        self.cond.class_of[t]
    }

    /// Classes at the bottom level, ascending.
    pub fn bottom_classes(&self) -> Vec<usize> {
        self.cond.quotient.nodes_at(0)
    }
}

// ---- the labeling

#[derive(Clone, Debug)]
pub struct LabelingResult {
    pub bottom: usize,
    pub chain: Vec<usize>,
    /// Labelled nodes, ascending.
    pub nodes: Vec<usize>,
    /// Bottom-class nodes below the chain, in the canonical (index) order.
    pub enumeration: Vec<usize>,
    /// Position of the first enumerated node below each labelled node.
    pub first_below: BTreeMap<usize, usize>,
    pub lambda: BTreeMap<usize, usize>,
    pub labels: BTreeMap<usize, Seq>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelingViolation {
    /// Two nodes share a label.
    NotInjective(usize, usize),
    /// A sequence of the target union that no node receives.
    Missed(Seq),
    /// A label outside the target union.
    OutsideTarget(usize),
    /// The label lives over a different class than the node.
    WrongClass(usize),
    /// `t ≤ t'` and `z_t ⊇ z_t'` disagree.
    Order(usize, usize),
}

fn chain_classes(td: &TreeData, chain: &[usize]) -> BTreeSet<usize> {
    chain.iter().map(|&c| td.class_of(c)).collect()
}

/// Labels every node whose class is above `bottom` and which lies strictly below
/// `chain` by a sequence over its class, extending `prefix` on the chain's classes.
pub fn labeling(
    td: &TreeData,
    chain: &[usize],
    bottom: usize,
    prefix: &BTreeMap<usize, usize>,
) -> Result<LabelingResult> {
    let (tree, q, sk) = (&td.tree, &td.cond.quotient, &td.skeleton);
    let low = chain.iter().copied().min_by_key(|&c| tree.level(c));
    for &c in chain {
        let up_ok = tree.parent(c).is_none_or(|p| chain.contains(&p));
        if !up_ok || chain.iter().any(|&d| !tree.comparable(c, d)) {
            return Err(Error::NotProper("chain is not upward closed".into()));
        }
    }
    if let Some(c0) = low {
        if !(0..tree.len()).any(|t| tree.lt(t, c0)) {
            return Err(Error::NotProper(format!(
                "nothing lies below {}",
                tree.name(c0)
            )));
        }
    }
    let cc = chain_classes(td, chain);
    if bottom >= q.len() || cc.iter().any(|&g| !q.lt(bottom, g)) {
        return Err(Error::ClassMismatch(
            "the bottom class must lie strictly below the chain".into(),
        ));
    }
    if prefix.keys().copied().collect::<BTreeSet<_>>() != cc
        || prefix.iter().any(|(&g, &v)| v >= sk.n(g))
    {
        return Err(Error::ClassMismatch(
            "the prefix must give a valid value on exactly the chain's classes".into(),
        ));
    }
    let below = |t: usize| low.is_none_or(|c0| tree.lt(t, c0));
    let nodes: Vec<usize> = (0..tree.len())
        .filter(|&t| q.leq(bottom, td.class_of(t)) && below(t))
        .collect();
    let enumeration: Vec<usize> = nodes
        .iter()
        .copied()
        .filter(|&t| td.class_of(t) == bottom)
        .collect();
    let mut first_below = BTreeMap::new();
    for &t in &nodes {
        let i = enumeration
            .iter()
            .position(|&e| tree.leq(e, t))
            .ok_or_else(|| {
                Error::Invariant(format!("no enumerated node below {}", tree.name(t)))
            })?;
        first_below.insert(t, i);
    }
    let mut lambda = BTreeMap::new();
    for &t in &nodes {
        let cset = tree.c_set(&td.cond, t);
        invariant(cset.iter().all(|u| first_below.contains_key(u)), || {
            "sibling set leaves the labelled region".into()
        })?;
        lambda.insert(
            t,
            cset.iter()
                .filter(|u| first_below[u] < first_below[&t])
                .count(),
        );
    }
    let mut labels = BTreeMap::new();
    for &t in &nodes {
        let base = td.class_of(t);
        let vals = (0..sk.len())
            .map(|g| {
                if !sk.le(base, g) {
                    None
                } else if let Some(&v) = prefix.get(&g) {
                    Some(v)
                } else {
                    Some(lambda[&tree.up(t, q.level(g))])
                }
            })
            .collect();
        labels.insert(t, Seq::new(sk, base, vals)?);
    }
    let res = LabelingResult {
        bottom,
        chain: chain.to_vec(),
        nodes,
        enumeration,
        first_below,
        lambda,
        labels,
    };
    if let Some(v) = check_labeling(td, &res, prefix).first() {
        return Err(Error::Invariant(format!(
            "labeling violates its contract: {v:?}"
        )));
    }
    Ok(res)
}

/// The three clauses, checked exhaustively: bijection onto the target union,
/// labels over the node's own class, and order equivalence.
pub fn check_labeling(
    td: &TreeData,
    res: &LabelingResult,
    prefix: &BTreeMap<usize, usize>,
) -> Vec<LabelingViolation> {
    let (q, sk) = (&td.cond.quotient, &td.skeleton);
    let cc = chain_classes(td, &res.chain);
    let mut target: BTreeSet<Seq> = BTreeSet::new();
    for g in 0..sk.len() {
        if q.leq(res.bottom, g) && cc.iter().all(|&c| q.lt(g, c)) {
            target.extend(
                sk.all_local(g)
                    .into_iter()
                    .filter(|z| prefix.iter().all(|(&c, &v)| z.get(c) == Some(v))),
            );
        }
    }
    let mut out = vec![];
    let mut seen: BTreeMap<&Seq, usize> = BTreeMap::new();
    for (&t, z) in &res.labels {
        if z.base() != td.class_of(t) {
            out.push(LabelingViolation::WrongClass(t));
        }
        if !target.contains(z) {
            out.push(LabelingViolation::OutsideTarget(t));
        }
        if let Some(&u) = seen.get(z) {
            out.push(LabelingViolation::NotInjective(u, t));
        }
        seen.insert(z, t);
    }
    for z in &target {
        if !seen.contains_key(z) {
            out.push(LabelingViolation::Missed(z.clone()));
        }
    }
    for (&t, z) in &res.labels {
        for (&u, w) in &res.labels {
            if td.tree.leq(t, u) != z.extends(w) {
                out.push(LabelingViolation::Order(t, u));
            }
        }
    }
    out
}

/// Checks that `g` (node ↦ sequence) is an order isomorphism onto the canonical
/// poset respecting classes, then that conjugating by it carries `Aut(𝒯)` onto the wreath group.
pub fn lemma_g_iso(
    td: &TreeData,
    ps: &ProjectionSystem,
    labels: &[Seq],
    max_order: usize,
) -> Result<IsoWitness> {
    let tree = &td.tree;
    let p = ps.canonical_poset();
    if labels.len() != tree.len() || p.len() != tree.len() {
        return Err(Error::NotOrderIso(format!(
            "{} nodes, {} labels, {} poset elements",
            tree.len(),
            labels.len(),
            p.len()
        )));
    }
    if ps.skeleton().len() != td.skeleton.len() {
        return Err(Error::BlockMismatch(
            "system is over a different skeleton".into(),
        ));
    }
    let mut beta = vec![];
    for (t, z) in labels.iter().enumerate() {
        if z.base() != td.class_of(t) {
            return Err(Error::BlockMismatch(format!(
                "{} is labelled over another class",
                tree.name(t)
            )));
        }
        let i = ps.index_in(z.base(), z).ok_or_else(|| {
            Error::BlockMismatch(format!("label of {} is not in its part", tree.name(t)))
        })?;
        beta.push(p.global(z.base(), i));
    }
    if beta.iter().collect::<BTreeSet<_>>().len() != beta.len() {
        return Err(Error::NotOrderIso("two nodes share a label".into()));
    }
    for t in 0..tree.len() {
        for u in 0..tree.len() {
            if tree.leq(t, u) != p.le[beta[t]][beta[u]] {
                return Err(Error::NotOrderIso(format!(
                    "order differs at ({}, {})",
                    tree.name(t),
                    tree.name(u)
                )));
            }
        }
    }
    let wr = wreath_group(ps, &CoordinateGroups::Full, max_order)?;
    verify_conjugation(
        "tree automorphisms to the wreath product",
        td.aut(),
        &wr,
        &beta,
    )
}

fn labels_value(td: &TreeData, labels: &BTreeMap<usize, Seq>) -> Value {
    let m: serde_json::Map<String, Value> = labels
        .iter()
        .map(|(&t, z)| {
            (
                td.tree.name(t).to_string(),
                io::seq_to_value(&td.skeleton, z),
            )
        })
        .collect();
    Value::Object(m)
}

fn lf_system(sk: &Skeleton) -> Result<ProjectionSystem> {
    ProjectionSystem::trivial(&LocalFamily::locally_finite(sk))
}

fn node_vector(td: &TreeData, labels: &BTreeMap<usize, Seq>) -> Result<Vec<Seq>> {
    (0..td.tree.len())
        .map(|t| {
            labels
                .get(&t)
                .cloned()
                .ok_or_else(|| Error::Invariant(format!("{} has no label", td.tree.name(t))))
        })
        .collect()
}

// ---- homogeneous spaces

/// The max-metric space on the global domain of a linear skeleton: two
/// sequences are at the level of the highest coordinate where they differ.
pub fn rebuild_space(sk: &Skeleton, domain: &[Vec<usize>]) -> Result<UltraSpace> {
    let levels = sk.levels().ok_or(Error::MissingLevels)?;
    if !sk.is_linear() {
        return Err(Error::NotLinear);
    }
    UltraSpace::from_fn(domain.iter().map(|x| render_global(x)).collect(), |i, j| {
        (0..sk.len())
            .filter(|&d| domain[i][d] != domain[j][d])
            .map(|d| levels[d])
            .max()
            .unwrap_or_default()
    })
}

pub fn verify_homogeneous(u: &UltraSpace, cfg: &PipelineConfig) -> Result<TheoremReport> {
    homogeneous_route("homogeneous", u, cfg)
}

/// Finite spaces are uniformly discrete and their level sets have a minimum,
/// so this runs the same single labeling step with the discreteness recorded.
pub fn verify_discrete_homogeneous(u: &UltraSpace, cfg: &PipelineConfig) -> Result<TheoremReport> {
    homogeneous_route("discrete", u, cfg)
}

fn homogeneous_route(name: &str, u: &UltraSpace, cfg: &PipelineConfig) -> Result<TheoremReport> {
    let m = cfg.max_order;
    let mut r = TheoremReport::new(name, Document::Space(u.clone()).digest());
    if let Some(v) = u.validate().violations.first() {
        return Ok(r.diagnostic(format!("not an ultrametric space: {}", u.describe(v))));
    }
    let iso = u.iso_group(m)?;
    let orbits = iso.orbits().len();
    if orbits != 1 {
        return Ok(r
            .diagnostic(format!("not homogeneous: {orbits} isometry orbits"))
            .finish());
    }
    if name == "discrete" {
        let min = u.distance_set().first().copied();
        r.check(
            "uniformly discrete",
            true,
            min.map(|d| format!("least distance {}", fmt_q(&d))),
        );
    }
    r.order("iso_space", iso.order());
    let levels = canonical_levels(u, m)?;
    r.artifact(
        "levels",
        json!(levels.labels().iter().map(fmt_q).collect::<Vec<_>>()),
    );
    let w_f = verify_f_iso(u, &levels, m)?;
    let tree = functor_f(u, &levels)?.tree;
    let td = TreeData::with_aut(tree, w_f.target.clone())?;
    r.order("aut_tree", td.aut().order());
    r.witness(w_f);
    r.stage("ball_tree");
    let linear = td.tree.is_homogeneous_tree(&td.cond);
    r.check("condensed skeleton is linear", linear, None);
    if !linear {
        return Ok(r.finish());
    }
    let sk = td.skeleton.clone();
    r.artifact("skeleton", io::skeleton_to_value(&sk));
    let bottom = td.bottom_classes()[0];
    let lab = labeling(&td, &[], bottom, &BTreeMap::new())?;
    r.artifact("labeling", labels_value(&td, &lab.labels));
    let ps = lf_system(&sk)?;
    let w_g = lemma_g_iso(&td, &ps, &node_vector(&td, &lab.labels)?, m)?;
    r.order("wreath_lf", w_g.target.order());
    r.witness(w_g);
    r.stage("labeling");
    // the reverse direction: the max-metric space on the global domain
    let domain = sk.full_product(m)?;
    let rebuilt = rebuild_space(&sk, &domain)?;
    let wr_global = global_wreath_group(&sk, &domain, m)?;
    let iso_rebuilt = rebuilt.iso_group(m)?;
    r.order("iso_rebuilt", iso_rebuilt.order());
    let identity: Vec<usize> = (0..domain.len()).collect();
    r.witness(verify_conjugation(
        "global wreath product to isometries of the rebuilt space",
        &wr_global,
        &iso_rebuilt,
        &identity,
    )?);
    r.check(
        "rebuilt space has as many isometries",
        iso_rebuilt.order() == iso.order(),
        None,
    );
    r.artifact("wideness", wideness_value(u, cfg.wide_bound));
    r.stage("reverse");
    Ok(r.finish())
}

fn wideness_value(u: &UltraSpace, m: usize) -> Value {
    let w: BTreeMap<String, bool> = u
        .wideness_profile(m)
        .into_iter()
        .map(|(d, b)| (fmt_q(&d), b))
        .collect();
    json!({ "bound": m, "wide": w })
}

// ---- general trees and spaces

#[derive(Clone, Debug)]
pub enum GeneralInput {
    Space(UltraSpace),
    Tree(LTree),
}

impl GeneralInput {
    fn digest(&self) -> String {
        match self {
            GeneralInput::Space(u) => Document::Space(u.clone()).digest(),
            GeneralInput::Tree(t) => Document::Tree(t.clone()).digest(),
        }
    }
}

/// The projection system built from one labeling per bottom class.
#[derive(Clone, Debug)]
pub struct GeneralSystem {
    pub system: ProjectionSystem,
    pub bottoms: Vec<usize>,
    /// Per class, the position in `bottoms` of the first bottom class below it.
    pub j_of: Vec<usize>,
    pub labelings: Vec<LabelingResult>,
    /// Node ↦ its label under its own class's labeling.
    pub labels: Vec<Seq>,
}

impl GeneralSystem {
    /// `{γ ≥ δ : j_γ = j}` for each `j`, in increasing `j`.
    pub fn j_partition(&self, d: usize) -> Vec<Vec<usize>> {
        let sk = self.system.skeleton();
        let mut pieces: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for g in sk.up_set(d) {
            pieces.entry(self.j_of[g]).or_default().push(g);
        }
        pieces.into_values().collect()
    }
}

pub fn general_system(td: &TreeData) -> Result<GeneralSystem> {
    let (tree, q, sk) = (&td.tree, &td.cond.quotient, &td.skeleton);
    let bottoms = td.bottom_classes();
    let labelings = bottoms
        .iter()
        .map(|&b| labeling(td, &[], b, &BTreeMap::new()))
        .collect::<Result<Vec<_>>>()?;
    let j_of = (0..sk.len())
        .map(|g| {
            bottoms.iter().position(|&b| q.leq(b, g)).ok_or_else(|| {
                Error::NotPruned(format!("class {} has nothing below it", q.name(g)))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let inverse: Vec<BTreeMap<&Seq, usize>> = labelings
        .iter()
        .map(|l| l.labels.iter().map(|(&t, z)| (z, t)).collect())
        .collect();
    let fam = LocalFamily::locally_finite(sk);
    let system = ProjectionSystem::from_fn(sk.clone(), fam.parts().to_vec(), |d, g, z| {
        let t = inverse[j_of[d]][z];
        labelings[j_of[g]].labels[&tree.up(t, q.level(g))].clone()
    })?;
    let labels = (0..tree.len())
        .map(|t| labelings[j_of[td.class_of(t)]].labels[&t].clone())
        .collect();
    Ok(GeneralSystem {
        system,
        bottoms,
        j_of,
        labelings,
        labels,
    })
}

pub fn verify_general(input: &GeneralInput, cfg: &PipelineConfig) -> Result<TheoremReport> {
    let m = cfg.max_order;
    let mut r = TheoremReport::new("general", input.digest());
    let td = match input {
        GeneralInput::Space(u) => {
            if let Some(v) = u.validate().violations.first() {
                return Ok(r.diagnostic(format!("not an ultrametric space: {}", u.describe(v))));
            }
            let levels = canonical_levels(u, m)?;
            r.artifact(
                "levels",
                json!(levels.labels().iter().map(fmt_q).collect::<Vec<_>>()),
            );
            let f = functor_f(u, &levels)?;
            let w_f = verify_f_iso(u, &levels, m)?;
            r.order("iso_space", w_f.source.order());
            // stabilizer of x ↦ stabilizer of its bottom ball
            let stab_ok = (0..u.len()).all(|x| {
                let sx = w_f.source.stabilizer(x);
                let node = f.node_map[x][0];
                let st = w_f.target.stabilizer(node);
                sx.order() == st.order()
                    && sx.elements().iter().all(|g| {
                        crate::functors::functor_f_mor(u, &f, u, &f, g.images()).is_ok_and(|img| {
                            st.contains(
                                &crate::permgroup::Perm::from_images(img)
                                    .expect("tree map is a permutation"),
                            )
                        })
                    })
            });
            r.check(
                "point stabilizers match bottom-ball stabilizers",
                stab_ok,
                None,
            );
            let td = TreeData::with_aut(f.tree, w_f.target.clone())?;
            r.witness(w_f);
            td
        }
        GeneralInput::Tree(t) => {
            if let Some(v) = t.validate().violations.first() {
                return Ok(r.diagnostic(format!("not a leveled tree: {}", t.describe(v))));
            }
            if !t.is_pruned() {
                return Ok(r.diagnostic("tree is not pruned"));
            }
            TreeData::new(t.clone(), m)?
        }
    };
    r.order("aut_tree", td.aut().order());
    r.artifact("skeleton", io::skeleton_to_value(&td.skeleton));
    r.stage("condense");
    let gs = general_system(&td)?;
    let ps = &gs.system;
    let sk = ps.skeleton();
    let violations = ps.validate();
    r.check(
        "projection axioms",
        violations.is_empty(),
        violations.first().map(|v| ps.describe(v)),
    );
    for l in &gs.labelings {
        let prefix = BTreeMap::new();
        let bad = check_labeling(&td, l, &prefix);
        r.check(
            &format!("labeling from {}", td.cond.quotient.name(l.bottom)),
            bad.is_empty(),
            bad.first().map(|v| format!("{v:?}")),
        );
    }
    let char_ok = (0..sk.len()).all(|d| ps.is_character_partition(d, &gs.j_partition(d)));
    r.check(
        "finite character via the bottom-class partition",
        char_ok,
        None,
    );
    let restriction_where_j_agrees = (0..sk.len()).all(|d| {
        sk.up_set(d)
            .into_iter()
            .all(|g| gs.j_of[d] != gs.j_of[g] || ps.is_trivial_between(d, g))
    });
    r.check(
        "projections are restrictions where the bottom class agrees",
        restriction_where_j_agrees,
        None,
    );
    r.check("locally homogeneous", is_locally_homogeneous(ps, m)?, None);
    let w = lemma_g_iso(&td, ps, &gs.labels, m)?;
    r.order("wreath_projective", w.target.order());
    r.witness(w);
    let changes = (0..sk.len())
        .flat_map(|d| sk.up_set(d).into_iter().map(move |g| (d, g)))
        .filter(|&(d, g)| gs.j_of[d] != gs.j_of[g])
        .count();
    let twisted = ps
        .pi_table()
        .keys()
        .filter(|&&(d, g)| !ps.is_trivial_between(d, g))
        .count();
    r.artifact(
        "bottom_classes",
        json!(gs
            .bottoms
            .iter()
            .map(|&b| td.cond.quotient.name(b).to_string())
            .collect::<Vec<_>>()),
    );
    r.artifact("projections", json!({ "pairs_across_bottom_classes": changes, "pairs_differing_from_restriction": twisted }));
    if changes > 0 && twisted == 0 {
        r.note("every projection across bottom classes lands in coordinates with N = 1, so it coincides with the restriction");
    }
    r.stage("transfer");
    Ok(r.finish())
}

// ---- exact spaces: labelling across bottom classes without projections

/// One bijection onto the whole locally finite family: the first bottom class
/// is labelled from scratch, each later one below chains cut at its split level.
pub fn exact_labeling(td: &TreeData) -> Result<(Vec<Seq>, Vec<LabelingResult>)> {
    let (tree, q) = (&td.tree, &td.cond.quotient);
    let bottoms = td.bottom_classes();
    let mut z: Vec<Option<Seq>> = vec![None; tree.len()];
    let mut runs = vec![];
    let assign = |res: &LabelingResult, z: &mut Vec<Option<Seq>>| -> Result<()> {
        for (&t, s) in &res.labels {
            invariant(z[t].is_none(), || {
                format!("{} labelled twice", tree.name(t))
            })?;
            z[t] = Some(s.clone());
        }
        Ok(())
    };
    for (j, &dj) in bottoms.iter().enumerate() {
        if j == 0 {
            let res = labeling(td, &[], dj, &BTreeMap::new())?;
            assign(&res, &mut z)?;
            runs.push(res);
            continue;
        }
        let splits = bottoms[..j]
            .iter()
            .map(|&b| q.spl_index(b, dj))
            .collect::<Result<Vec<_>>>()?;
        let lbar = *splits.iter().min().unwrap();
        let jp = splits.iter().position(|&s| s == lbar).unwrap();
        let tops: BTreeSet<usize> = td.cond.classes[bottoms[jp]]
            .iter()
            .map(|&t| tree.up(t, lbar + 1))
            .collect();
        for c0 in tops {
            let chain: Vec<usize> = (lbar + 1..tree.order().len())
                .map(|l| tree.up(c0, l))
                .collect();
            let zc = z[c0].clone().ok_or_else(|| {
                Error::Invariant(format!(
                    "{} unlabelled when cutting below it",
                    tree.name(c0)
                ))
            })?;
            let prefix: BTreeMap<usize, usize> = chain
                .iter()
                .map(|&c| (td.class_of(c), zc.get(td.class_of(c)).unwrap()))
                .collect();
            let res = labeling(td, &chain, dj, &prefix)?;
            assign(&res, &mut z)?;
            runs.push(res);
        }
    }
    let labels = z
        .into_iter()
        .enumerate()
        .map(|(t, s)| {
            s.ok_or_else(|| Error::Invariant(format!("{} was never labelled", tree.name(t))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((labels, runs))
}

pub fn verify_exact(input: &GeneralInput, cfg: &PipelineConfig) -> Result<TheoremReport> {
    let m = cfg.max_order;
    let mut r = TheoremReport::new("exact", input.digest());
    let tree = match input {
        GeneralInput::Space(u) => {
            if let Some(v) = u.validate().violations.first() {
                return Ok(r.diagnostic(format!("not an ultrametric space: {}", u.describe(v))));
            }
            r.check("space is exact", u.is_exact(m)?, None);
            let levels = canonical_levels(u, m)?;
            let f = functor_f(u, &levels)?;
            // the tree side of the round trip back to spaces
            let padded = pad_chain(&f.tree, 1)?;
            let g = functor_g(&padded, &LevelEmbedding::standard(padded.order()))?;
            r.check(
                "space built back from the padded tree is exact",
                g.is_exact(m)?,
                None,
            );
            r.order("iso_space", u.iso_group(m)?.order());
            f.tree
        }
        GeneralInput::Tree(t) => {
            if let Some(v) = t.validate().violations.first() {
                return Ok(r.diagnostic(format!("not a leveled tree: {}", t.describe(v))));
            }
            if !t.is_pruned() {
                return Ok(r.diagnostic("tree is not pruned"));
            }
            t.clone()
        }
    };
    let td = TreeData::new(tree, m)?;
    r.order("aut_tree", td.aut().order());
    let star = td.tree.property_star(&td.cond);
    r.check(
        "chain domination property",
        star.holds,
        Some(format!("{} chains checked", star.chains_checked)),
    );
    r.check(
        "condensation is a leveled tree",
        td.tree.is_special(&td.cond),
        None,
    );
    let (labels, runs) = exact_labeling(&td)?;
    r.artifact("labeling_runs", json!(runs.len()));
    let ps = lf_system(&td.skeleton)?;
    let w = lemma_g_iso(&td, &ps, &labels, m)?;
    r.order("wreath_lf", w.target.order());
    r.witness(w);
    let labelled: BTreeMap<usize, Seq> = labels.into_iter().enumerate().collect();
    r.artifact("labeling", labels_value(&td, &labelled));
    r.stage("labeling");
    Ok(r.finish())
}

// ---- Urysohn-side diagnostics

/// Drops the `N = 1` elements of a linear skeleton, keeping the bottom one if it has `N = 1`.
#[derive(Clone, Debug)]
pub struct Simplified {
    pub skeleton: Skeleton,
    pub kept: Vec<usize>,
    pub witness: IsoWitness,
}

pub fn simplify_skeleton(sk: &Skeleton, max_order: usize) -> Result<Simplified> {
    if !sk.is_linear() {
        return Err(Error::NotLinear);
    }
    let bottom = sk.minimal()[0];
    let kept: Vec<usize> = (0..sk.len())
        .filter(|&d| sk.n(d) > 1 || d == bottom)
        .collect();
    let le = kept
        .iter()
        .map(|&a| kept.iter().map(|&b| sk.le(a, b)).collect())
        .collect();
    let levels = sk.levels().map(|l| kept.iter().map(|&d| l[d]).collect());
    let small = Skeleton::from_matrix(
        kept.iter().map(|&d| sk.name(d).to_string()).collect(),
        le,
        kept.iter().map(|&d| sk.n(d)).collect(),
        levels,
    )?;
    let big_domain = sk.full_product(max_order)?;
    let small_domain = small.full_product(max_order)?;
    let pos: BTreeMap<Vec<usize>, usize> = small_domain
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, x)| (x, i))
        .collect();
    let beta = big_domain
        .iter()
        .map(|x| pos[&kept.iter().map(|&d| x[d]).collect::<Vec<_>>()])
        .collect::<Vec<_>>();
    let witness = verify_conjugation(
        "dropping trivial coordinates",
        &global_wreath_group(sk, &big_domain, max_order)?,
        &global_wreath_group(&small, &small_domain, max_order)?,
        &beta,
    )?;
    Ok(Simplified {
        skeleton: small,
        kept,
        witness,
    })
}

pub fn urysohn_diagnostics(
    u: &UltraSpace,
    m: usize,
    cfg: &PipelineConfig,
) -> Result<TheoremReport> {
    let mut r = TheoremReport::new("urysohn", Document::Space(u.clone()).digest());
    let levels = canonical_levels(u, cfg.max_order)?;
    let td = TreeData::new(functor_f(u, &levels)?.tree, cfg.max_order)?;
    let sk = &td.skeleton;
    if !sk.is_linear() {
        return Err(Error::NotLinear);
    }
    r.artifact("wideness", wideness_value(u, m));
    r.artifact("skeleton", io::skeleton_to_value(sk));
    let quasi = (0..sk.len()).all(|d| sk.n(d) == 1 || sk.n(d) >= m);
    r.check(
        &format!("quasi-maximal with bound {m}"),
        quasi,
        Some(format!("N = {:?}", sk.n_values())),
    );
    let s = simplify_skeleton(sk, cfg.max_order)?;
    r.artifact("simplified", io::skeleton_to_value(&s.skeleton));
    r.order("wreath", s.witness.source.order());
    r.witness(s.witness);
    Ok(r.finish())
}

// ---- from wreath products back to trees

/// `λ(δ)` = length of the longest chain ending at `δ`.
pub fn height_levels(sk: &Skeleton) -> Vec<crate::rational::Q> {
    let mut h = vec![1i64; sk.len()];
    for d in sk.top_down().into_iter().rev() {
        for e in 0..sk.len() {
            if sk.lt(e, d) {
                h[d] = h[d].max(h[e] + 1);
            }
        }
    }
    h.into_iter()
        .map(crate::rational::Q::from_integer)
        .collect()
}

pub fn roundtrip_wreath(bundle: &Bundle, cfg: &PipelineConfig) -> Result<TheoremReport> {
    let m = cfg.max_order;
    let mut r = TheoremReport::new("roundtrip", Document::Bundle(bundle.clone()).digest());
    let ps = bundle.to_projection_system(m)?;
    let violations = ps.validate();
    if let Some(v) = violations.first() {
        return Err(Error::InvalidSystem(ps.describe(v)));
    }
    let ps = if ps.skeleton().levels().is_some() {
        ps
    } else {
        r.note("no level map given; levels are element heights");
        let sk = ps
            .skeleton()
            .clone()
            .with_levels(Some(height_levels(ps.skeleton())))?;
        ProjectionSystem::new(sk, ps.parts().to_vec(), ps.pi_table().clone())?
    };
    if let Err(e) = ps.skeleton().as_ltree() {
        return Err(Error::InvalidSkeleton(format!(
            "skeleton is not treeable: {e}"
        )));
    }
    let wr = wreath_group(&ps, &CoordinateGroups::Full, m)?;
    r.order("wreath", wr.order());
    let system = if poset_as_tree(&ps).is_ok() {
        ps
    } else {
        let padded = pad_top(&ps, 1, m)?;
        r.note("top padded by one level so the canonical poset has a single root");
        r.witness(padded.witness);
        padded.system
    };
    let need = min_depth(&system, cfg.side_chains)?;
    let k = cfg.depth.unwrap_or(need);
    r.artifact("depth", json!(k));
    let levels: BTreeMap<String, String> = (0..system.skeleton().len())
        .map(|d| {
            (
                system.skeleton().name(d).to_string(),
                fmt_q(&system.skeleton().level(d).unwrap()),
            )
        })
        .collect();
    r.artifact("poset_levels", json!(levels));
    let t = tree_from_wreath(&system, k, cfg.side_chains, m)?;
    r.order("tree_nodes", t.tree.len());
    r.order("aut_truncated_tree", t.witness.target.order());
    r.check(
        "orders agree end to end",
        t.witness.target.order() == wr.order(),
        None,
    );
    r.witness(t.witness);
    r.stage("truncation");
    Ok(r.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltree::LinearOrder;
    use crate::ultrametric::fixtures::{two_points, u1, u2};
    use crate::wreath::fixtures;

    const M: usize = 1_000_000;

    fn cfg() -> PipelineConfig {
        PipelineConfig {
            max_order: M,
            ..Default::default()
        }
    }

    fn f_u1() -> TreeData {
        TreeData::new(
            functor_f(&u1(), &LinearOrder::from_ints(&[1, 2, 3]).unwrap())
                .unwrap()
                .tree,
            M,
        )
        .unwrap()
    }

    fn render(td: &TreeData, l: &LabelingResult, node: &str) -> Vec<usize> {
        let z = &l.labels[&td.tree.index_of(node).unwrap()];
        z.values().iter().flatten().copied().collect()
    }

    #[test]
    fn u1_labeling_table() {
        let td = f_u1();
        let l = labeling(&td, &[], td.bottom_classes()[0], &BTreeMap::new()).unwrap();
        assert_eq!(
            td.tree.names()[..4].to_vec(),
            vec!["{a}@1", "{b}@1", "{c}@1", "{d}@1"]
        );
        assert_eq!(l.enumeration, vec![0, 1, 2, 3]);
        // coordinates listed bottom class first
        assert_eq!(render(&td, &l, "{a}@1"), vec![0, 0, 0]);
        assert_eq!(render(&td, &l, "{b}@1"), vec![1, 0, 0]);
        assert_eq!(render(&td, &l, "{c}@1"), vec![0, 1, 0]);
        assert_eq!(render(&td, &l, "{d}@1"), vec![1, 1, 0]);
        assert_eq!(render(&td, &l, "{c,d}@2"), vec![1, 0]);
    }

    #[test]
    fn labeling_below_a_chain_extends_the_prefix() {
        let td = f_u1();
        let bottom = td.bottom_classes()[0];
        let full = labeling(&td, &[], bottom, &BTreeMap::new()).unwrap();
        let cd = td.tree.index_of("{c,d}@2").unwrap();
        let chain = vec![cd, td.tree.parent(cd).unwrap()];
        let zc = &full.labels[&cd];
        let prefix: BTreeMap<usize, usize> = chain
            .iter()
            .map(|&c| (td.class_of(c), zc.get(td.class_of(c)).unwrap()))
            .collect();
        let l = labeling(&td, &chain, bottom, &prefix).unwrap();
        let names: Vec<&str> = l.nodes.iter().map(|&t| td.tree.name(t)).collect();
        assert_eq!(names, vec!["{c}@1", "{d}@1"]);
        assert!(l.labels.values().all(|z| z.extends(zc)));
        let leaf = td.tree.index_of("{a}@1").unwrap();
        assert!(matches!(
            labeling(&td, &[leaf, 4, 6], bottom, &prefix),
            Err(Error::NotProper(_)) | Err(Error::ClassMismatch(_))
        ));
        assert!(matches!(
            labeling(&td, &chain, bottom, &BTreeMap::new()),
            Err(Error::ClassMismatch(_))
        ));
    }

    #[test]
    fn chain_tree_labels_are_zero() {
        let td =
            TreeData::new(LTree::chain(LinearOrder::from_ints(&[1, 2, 3]).unwrap()), M).unwrap();
        let l = labeling(&td, &[], 0, &BTreeMap::new()).unwrap();
        assert!(l.labels.values().all(|z| z.support().is_empty()));
        let ps = lf_system(&td.skeleton).unwrap();
        let w = lemma_g_iso(&td, &ps, &node_vector(&td, &l.labels).unwrap(), M).unwrap();
        assert!(w.verified && w.target.order() == 1);
    }

    #[test]
    fn lemma_g_rejects_block_violations() {
        let td = f_u1();
        let l = labeling(&td, &[], td.bottom_classes()[0], &BTreeMap::new()).unwrap();
        let ps = lf_system(&td.skeleton).unwrap();
        let mut v = node_vector(&td, &l.labels).unwrap();
        let w = lemma_g_iso(&td, &ps, &v, M).unwrap();
        assert!(w.verified);
        assert_eq!((w.source.order(), w.target.order()), (8, 8));
        let (a, ab) = (
            td.tree.index_of("{a}@1").unwrap(),
            td.tree.index_of("{a,b}@2").unwrap(),
        );
        v.swap(a, ab);
        assert!(matches!(
            lemma_g_iso(&td, &ps, &v, M),
            Err(Error::BlockMismatch(_))
        ));
    }

    #[test]
    fn homogeneous_pipeline() {
        let r = verify_homogeneous(&u1(), &cfg()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(r.witnesses.len(), 3);
        for k in ["iso_space", "aut_tree", "wreath_lf", "iso_rebuilt"] {
            assert_eq!(r.orders[k], 8, "{k}");
        }
        let r = verify_discrete_homogeneous(&two_points(), &cfg()).unwrap();
        assert!(r.passed());
        assert_eq!(r.orders["iso_space"], 2);
        assert_eq!(
            verify_homogeneous(&u2(), &cfg()).unwrap().verdict,
            Verdict::Diagnostic
        );
    }

    #[test]
    fn general_pipeline() {
        let r = verify_general(&GeneralInput::Space(u2()), &cfg()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(
            (
                r.orders["iso_space"],
                r.orders["aut_tree"],
                r.orders["wreath_projective"]
            ),
            (2, 2, 2)
        );
        assert_eq!(r.artifacts["bottom_classes"].as_array().unwrap().len(), 2);
        let r = verify_general(&GeneralInput::Space(u1()), &cfg()).unwrap();
        assert!(r.passed());
        assert_eq!(
            r.artifacts["projections"]["pairs_differing_from_restriction"],
            0
        );
        assert!(
            verify_general(&GeneralInput::Space(UltraSpace::single_point()), &cfg())
                .unwrap()
                .passed()
        );
    }

    /// Two bottom classes under a shared N = 2 class, enumerated starting on
    /// opposite sides: the projection between them swaps that coordinate.
    #[test]
    fn general_pipeline_with_a_real_twist() {
        let order = LinearOrder::from_ints(&[1, 2, 3, 4]).unwrap();
        let names: Vec<String> = [
            "b1", "c2", "b1'", "b2", "b2'", "c1", "B1", "C1", "B2", "C2", "A1", "A2", "r",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let parent = [6, 9, 6, 8, 8, 7, 10, 10, 11, 11, 12, 12]
            .iter()
            .map(|&p| Some(p))
            .chain([None])
            .collect();
        let levels = vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 3];
        let td = TreeData::new(
            LTree::from_parents(order, names, levels, parent).unwrap(),
            M,
        )
        .unwrap();
        assert_eq!(td.bottom_classes().len(), 2);
        let gs = general_system(&td).unwrap();
        assert!(!gs.system.is_trivial());
        assert!(gs.system.validate().is_empty());
        let r = verify_general(&GeneralInput::Tree(td.tree.clone()), &cfg()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert!(
            r.artifacts["projections"]["pairs_differing_from_restriction"]
                .as_u64()
                .unwrap()
                > 0
        );
        assert_eq!(r.orders["aut_tree"], r.orders["wreath_projective"]);
    }

    #[test]
    fn homogeneous_and_general_agree() {
        let h = verify_homogeneous(&u1(), &cfg()).unwrap();
        let g = verify_general(&GeneralInput::Space(u1()), &cfg()).unwrap();
        let wh = &h.full_witnesses[1];
        let wg = g.full_witnesses.last().unwrap();
        assert_eq!(wh.source, wg.source);
        assert_eq!(wh.target.elements(), wg.target.elements());
    }

    #[test]
    fn exact_pipeline() {
        for u in [u1(), u2(), UltraSpace::single_point()] {
            let r = verify_exact(&GeneralInput::Space(u), &cfg()).unwrap();
            assert!(r.passed(), "{}", r.to_text());
        }
        let r = verify_exact(&GeneralInput::Space(u2()), &cfg()).unwrap();
        assert_eq!((r.orders["aut_tree"], r.orders["wreath_lf"]), (2, 2));
        let chain = LTree::chain(LinearOrder::from_ints(&[1, 2]).unwrap());
        assert!(verify_exact(&GeneralInput::Tree(chain), &cfg())
            .unwrap()
            .passed());
    }

    #[test]
    fn urysohn_side() {
        let r = urysohn_diagnostics(&u1(), 2, &cfg()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(r.orders["wreath"], 8);
        let s = simplify_skeleton(&Skeleton::chain(&[2, 2, 1]), M).unwrap();
        assert_eq!(s.skeleton.n_values(), vec![2, 2]);
        assert!(s.witness.verified);
        let s = simplify_skeleton(&Skeleton::chain(&[2, 1]), M).unwrap();
        assert_eq!(s.skeleton.n_values(), vec![2]);
        let s = simplify_skeleton(&Skeleton::chain(&[1, 1, 3, 1]), M).unwrap();
        assert_eq!(s.skeleton.n_values(), vec![1, 3]);
        assert!(s.witness.verified);
        assert!(matches!(
            urysohn_diagnostics(&u2(), 2, &cfg()),
            Err(Error::NotLinear)
        ));
    }

    #[test]
    fn roundtrips() {
        let cases = [
            (Bundle::Projections(fixtures::chain_lf(&[1])), 1),
            (Bundle::Projections(fixtures::w3_twist()), 2),
            (Bundle::Projections(fixtures::chain_lf(&[2, 2])), 8),
        ];
        for (b, order) in cases {
            let c = PipelineConfig {
                depth: Some(3),
                ..cfg()
            };
            let r = roundtrip_wreath(&b, &c).unwrap();
            assert!(r.passed(), "{}", r.to_text());
            assert_eq!(r.orders["aut_truncated_tree"], order);
        }
        let full = PipelineConfig {
            depth: Some(3),
            side_chains: SideChains::Full,
            ..cfg()
        };
        let r = roundtrip_wreath(&Bundle::Projections(fixtures::chain_lf(&[2, 2])), &full).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn reports_are_deterministic_without_timings() {
        let a = verify_general(&GeneralInput::Space(u2()), &cfg())
            .unwrap()
            .to_value(false);
        let b = verify_general(&GeneralInput::Space(u2()), &cfg())
            .unwrap()
            .to_value(false);
        assert_eq!(a, b);
        assert!(a.get("timings_ms").is_none());
    }
}
