//! JSON file formats. Every document carries a `"schema"` tag; untagged files
//! are recognised by their keys.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::functors::LevelEmbedding;
use crate::ltree::{LTree, LinearOrder};
use crate::permgroup::{Perm, PermGroup};
use crate::rational::{fmt_q, parse_q, Q};
use crate::ultrametric::UltraSpace;
use crate::wreath::{Bundle, LocalFamily, ProjectionSystem, Seq, Skeleton, SupportKind};

#[derive(Clone, Debug)]
pub enum Document {
    Space(UltraSpace),
    Tree(LTree),
    Skeleton(Skeleton),
    Bundle(Bundle),
    Embedding(LevelEmbedding),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Space(_) => "space",
            Document::Tree(_) => "tree",
            Document::Skeleton(_) => "skeleton",
            Document::Bundle(Bundle::Projections(_)) => "system",
            Document::Bundle(Bundle::Local(_)) => "family",
            Document::Bundle(_) => "global",
            Document::Embedding(_) => "embedding",
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            Document::Space(u) => space_to_value(u),
            Document::Tree(t) => tree_to_value(t),
            Document::Skeleton(s) => tag("skeleton", skeleton_to_value(s)),
            Document::Bundle(b) => bundle_to_value(b),
            Document::Embedding(e) => embedding_to_value(e),
        }
    }

    /// SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        digest_value(&self.to_value())
    }
}

pub fn digest_value(v: &Value) -> String {
    hex::encode(Sha256::digest(
        serde_json::to_vec(v).expect("values serialize"),
    ))
}

fn tag(schema: &str, mut v: Value) -> Value {
    v.as_object_mut()
        .expect("object")
        .insert("schema".into(), Value::String(schema.into()));
    v
}

fn schema_err(what: &str, e: impl std::fmt::Display) -> Error {
    Error::Schema(format!("{what}: {e}"))
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_json(&text)
}

pub fn read_document(path: &Path) -> Result<Document> {
    document_from_value(&read_json(path)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, to_pretty(v)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn document_from_value(v: &Value) -> Result<Document> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Schema("top level must be an object".into()))?;
    let schema = match obj.get("schema") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::Schema("`schema` must be a string".into())),
        None if obj.contains_key("points") => "space".into(),
        None if obj.contains_key("nodes") => "tree".into(),
        None if obj.contains_key("pairs") => "embedding".into(),
        None if obj.contains_key("projections") => "system".into(),
        None if obj.contains_key("parts") => "family".into(),
        None if obj.contains_key("domain") || obj.contains_key("supports") => "global".into(),
        None if obj.contains_key("elements") => "skeleton".into(),
        None => {
            return Err(Error::Schema(
                "cannot tell what kind of document this is; add a `schema` tag".into(),
            ))
        }
    };
    Ok(match schema.as_str() {
        "space" => Document::Space(space_from_value(v)?),
        "tree" => Document::Tree(tree_from_value(v)?),
        "skeleton" => Document::Skeleton(skeleton_from_value(v)?),
        "system" | "family" | "global" => Document::Bundle(bundle_from_value(v)?),
        "embedding" => Document::Embedding(embedding_from_value(v)?),
        other => return Err(Error::Schema(format!("unknown schema `{other}`"))),
    })
}

// ---- spaces

#[derive(Serialize, Deserialize)]
struct SpaceFile {
    points: Vec<String>,
    dist: Vec<Vec<String>>,
}

pub fn space_to_value(u: &UltraSpace) -> Value {
    let f = SpaceFile {
        points: u.points().to_vec(),
        dist: u
            .matrix()
            .iter()
            .map(|r| r.iter().map(fmt_q).collect())
            .collect(),
    };
    tag("space", serde_json::to_value(f).unwrap())
}

/// Shape-checked only: the validator reports axiom failures.
pub fn space_from_value(v: &Value) -> Result<UltraSpace> {
    let f: SpaceFile = serde_json::from_value(v.clone()).map_err(|e| schema_err("space", e))?;
    let dist = f
        .dist
        .iter()
        .map(|r| r.iter().map(|s| parse_q(s)).collect::<Result<Vec<Q>>>())
        .collect::<Result<_>>()?;
    UltraSpace::new(f.points, dist)
}

// ---- trees

#[derive(Serialize, Deserialize)]
struct NodeEntry {
    id: String,
    level: usize,
    parent: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    levels: Vec<String>,
    nodes: Vec<NodeEntry>,
}

pub fn tree_to_value(t: &LTree) -> Value {
    let f = TreeFile {
        levels: t.order().labels().iter().map(fmt_q).collect(),
        nodes: (0..t.len())
            .map(|x| NodeEntry {
                id: t.name(x).to_string(),
                level: t.level(x),
                parent: t.parent(x).map(|p| t.name(p).to_string()),
            })
            .collect(),
    };
    tag("tree", serde_json::to_value(f).unwrap())
}

pub fn tree_from_value(v: &Value) -> Result<LTree> {
    let f: TreeFile = serde_json::from_value(v.clone()).map_err(|e| schema_err("tree", e))?;
    let order = LinearOrder::new(f.levels.iter().map(|s| parse_q(s)).collect::<Result<_>>()?)?;
    let index: BTreeMap<&str, usize> = f
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), i))
        .collect();
    let parent = f
        .nodes
        .iter()
        .map(|n| {
            n.parent
                .as_deref()
                .map(|p| {
                    index
                        .get(p)
                        .copied()
                        .ok_or_else(|| Error::UnknownElement(p.to_string()))
                })
                .transpose()
        })
        .collect::<Result<Vec<_>>>()?;
    LTree::from_parents(
        order,
        f.nodes.iter().map(|n| n.id.clone()).collect(),
        f.nodes.iter().map(|n| n.level).collect(),
        parent,
    )
}

// ---- skeletons

#[derive(Serialize, Deserialize)]
struct SkeletonFile {
    elements: Vec<String>,
    /// Strict relations `[a, b]` meaning `a < b`; the order is their closure.
    #[serde(default)]
    le: Vec<(String, String)>,
    #[serde(rename = "N")]
    n: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<BTreeMap<String, String>>,
}

pub fn skeleton_to_value(s: &Skeleton) -> Value {
    let k = s.len();
    // covering pairs only
    let le = (0..k)
        .flat_map(|a| (0..k).map(move |b| (a, b)))
        .filter(|&(a, b)| s.lt(a, b) && !(0..k).any(|m| s.lt(a, m) && s.lt(m, b)))
        .map(|(a, b)| (s.name(a).to_string(), s.name(b).to_string()))
        .collect();
    let f = SkeletonFile {
        elements: s.names().to_vec(),
        le,
        n: (0..k).map(|d| (s.name(d).to_string(), s.n(d))).collect(),
        levels: s.levels().map(|l| {
            (0..k)
                .map(|d| (s.name(d).to_string(), fmt_q(&l[d])))
                .collect()
        }),
    };
    serde_json::to_value(f).unwrap()
}

pub fn skeleton_from_value(v: &Value) -> Result<Skeleton> {
    let f: SkeletonFile =
        serde_json::from_value(v.clone()).map_err(|e| schema_err("skeleton", e))?;
    let idx = |name: &str| {
        f.elements
            .iter()
            .position(|e| e == name)
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    };
    let pairs =
        f.le.iter()
            .map(|(a, b)| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>>>()?;
    let n = f
        .elements
        .iter()
        .map(|e| {
            f.n.get(e)
                .copied()
                .ok_or_else(|| Error::Schema(format!("no N for {e}")))
        })
        .collect::<Result<_>>()?;
    let levels = match &f.levels {
        None => None,
        Some(m) => Some(
            f.elements
                .iter()
                .map(|e| {
                    m.get(e)
                        .ok_or_else(|| Error::Schema(format!("no level for {e}")))
                        .and_then(|s| parse_q(s))
                })
                .collect::<Result<Vec<Q>>>()?,
        ),
    };
    Skeleton::from_relations(f.elements.clone(), &pairs, n, levels)
}

// ---- sequences and bundles

pub fn seq_to_value(sk: &Skeleton, z: &Seq) -> Value {
    serde_json::to_value(z.to_map(sk)).unwrap()
}

fn seq_from_value(sk: &Skeleton, base: usize, v: &Value) -> Result<Seq> {
    let m: BTreeMap<String, usize> =
        serde_json::from_value(v.clone()).map_err(|e| schema_err("sequence", e))?;
    let pairs = m
        .iter()
        .map(|(k, &x)| Ok((sk.index_of(k)?, x)))
        .collect::<Result<Vec<_>>>()?;
    Seq::from_pairs(sk, base, &pairs)
}

fn global_to_value(sk: &Skeleton, x: &[usize]) -> Value {
    serde_json::to_value(
        (0..sk.len())
            .map(|d| (sk.name(d).to_string(), x[d]))
            .collect::<BTreeMap<_, _>>(),
    )
    .unwrap()
}

fn parts_to_value(sk: &Skeleton, parts: &[Vec<Seq>]) -> Value {
    let m: serde_json::Map<String, Value> = (0..sk.len())
        .map(|d| {
            (
                sk.name(d).to_string(),
                Value::Array(parts[d].iter().map(|z| seq_to_value(sk, z)).collect()),
            )
        })
        .collect();
    Value::Object(m)
}

fn parts_from_value(sk: &Skeleton, v: &Value) -> Result<Vec<Vec<Seq>>> {
    let m = v
        .as_object()
        .ok_or_else(|| Error::Schema("`parts` must map elements to lists".into()))?;
    (0..sk.len())
        .map(|d| {
            let list = m
                .get(sk.name(d))
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Schema(format!("no part for {}", sk.name(d))))?;
            let mut part = list
                .iter()
                .map(|z| seq_from_value(sk, d, z))
                .collect::<Result<Vec<_>>>()?;
            part.sort();
            part.dedup();
            Ok(part)
        })
        .collect()
}

pub fn bundle_to_value(b: &Bundle) -> Value {
    let sk = b.skeleton();
    let mut out = serde_json::Map::new();
    out.insert("skeleton".into(), skeleton_to_value(sk));
    let schema = match b {
        Bundle::Supports { kind, .. } => {
            out.insert("supports".into(), Value::String(kind.to_string()));
            "global"
        }
        Bundle::Global { domain, .. } => {
            out.insert(
                "domain".into(),
                Value::Array(domain.iter().map(|x| global_to_value(sk, x)).collect()),
            );
            "global"
        }
        Bundle::Local(f) => {
            out.insert("parts".into(), parts_to_value(sk, f.parts()));
            "family"
        }
        Bundle::Projections(ps) => {
            out.insert("parts".into(), parts_to_value(sk, ps.parts()));
            let mut proj = serde_json::Map::new();
            for (&(d, g), map) in ps.pi_table() {
                if d == g {
                    continue;
                }
                let rows: Vec<Value> = map
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| {
                        Value::Array(vec![
                            seq_to_value(sk, &ps.part(d)[i]),
                            seq_to_value(sk, &ps.part(g)[j]),
                        ])
                    })
                    .collect();
                proj.entry(sk.name(d).to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
                    .as_object_mut()
                    .unwrap()
                    .insert(sk.name(g).to_string(), Value::Array(rows));
            }
            out.insert("projections".into(), Value::Object(proj));
            "system"
        }
    };
    tag(schema, Value::Object(out))
}

pub fn bundle_from_value(v: &Value) -> Result<Bundle> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Schema("bundle must be an object".into()))?;
    let sk = skeleton_from_value(
        obj.get("skeleton")
            .ok_or_else(|| Error::Schema("bundle needs a `skeleton`".into()))?,
    )?;
    if let Some(kind) = obj.get("supports") {
        let kind: SupportKind = kind
            .as_str()
            .ok_or_else(|| Error::Schema("`supports` must be a string".into()))?
            .parse()?;
        return Ok(Bundle::Supports { skeleton: sk, kind });
    }
    if let Some(dom) = obj.get("domain") {
        let list = dom
            .as_array()
            .ok_or_else(|| Error::Schema("`domain` must be a list".into()))?;
        let domain = list
            .iter()
            .map(|x| {
                let m: BTreeMap<String, usize> = serde_json::from_value(x.clone())
                    .map_err(|e| schema_err("global sequence", e))?;
                (0..sk.len())
                    .map(|d| match m.get(sk.name(d)) {
                        Some(&i) if i < sk.n(d) => Ok(i),
                        _ => Err(Error::DomainMismatch(format!(
                            "global sequence has no valid value at {}",
                            sk.name(d)
                        ))),
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(Bundle::Global {
            skeleton: sk,
            domain,
        });
    }
    let parts = parts_from_value(
        &sk,
        obj.get("parts")
            .ok_or_else(|| Error::Schema("bundle needs `parts`, `domain` or `supports`".into()))?,
    )?;
    let Some(proj) = obj.get("projections") else {
        return Ok(Bundle::Local(LocalFamily::new(sk, parts)?));
    };
    let proj = proj
        .as_object()
        .ok_or_else(|| Error::Schema("`projections` must be an object".into()))?;
    let mut pi = BTreeMap::new();
    for d in 0..sk.len() {
        pi.insert((d, d), (0..parts[d].len()).collect::<Vec<_>>());
    }
    for (dn, inner) in proj {
        let d = sk.index_of(dn)?;
        let inner = inner
            .as_object()
            .ok_or_else(|| Error::Schema(format!("projections from {dn} must be an object")))?;
        for (gn, rows) in inner {
            let g = sk.index_of(gn)?;
            if !sk.le(d, g) {
                return Err(Error::InvalidSystem(format!(
                    "projection between incomparable {dn} and {gn}"
                )));
            }
            let rows = rows
                .as_array()
                .ok_or_else(|| Error::Schema(format!("projection {dn} -> {gn} must be a list")))?;
            let mut map = vec![usize::MAX; parts[d].len()];
            for row in rows {
                let pair = row.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                    Error::Schema("projection rows are [source, image] pairs".into())
                })?;
                let z = seq_from_value(&sk, d, &pair[0])?;
                let w = seq_from_value(&sk, g, &pair[1])?;
                let i = parts[d].binary_search(&z).map_err(|_| {
                    Error::InvalidSystem(format!("{} is not in the part at {dn}", z.render(&sk)))
                })?;
                let j = parts[g].binary_search(&w).map_err(|_| {
                    Error::InvalidSystem(format!("{} is not in the part at {gn}", w.render(&sk)))
                })?;
                map[i] = j;
            }
            if let Some(i) = map.iter().position(|&j| j == usize::MAX) {
                return Err(Error::InvalidSystem(format!(
                    "projection {dn} -> {gn} misses {}",
                    parts[d][i].render(&sk)
                )));
            }
            pi.insert((d, g), map);
        }
    }
    Ok(Bundle::Projections(ProjectionSystem::new(sk, parts, pi)?))
}

// ---- embeddings

#[derive(Serialize, Deserialize)]
struct EmbeddingFile {
    pairs: BTreeMap<String, (String, String)>,
}

pub fn embedding_to_value(e: &LevelEmbedding) -> Value {
    let pairs = (0..e.order().len())
        .map(|j| {
            (
                fmt_q(&e.order().value(j)),
                (fmt_q(&e.minus(j)), fmt_q(&e.plus(j))),
            )
        })
        .collect();
    tag(
        "embedding",
        serde_json::to_value(EmbeddingFile { pairs }).unwrap(),
    )
}

pub fn embedding_from_value(v: &Value) -> Result<LevelEmbedding> {
    let f: EmbeddingFile =
        serde_json::from_value(v.clone()).map_err(|e| schema_err("embedding", e))?;
    let mut rows = f
        .pairs
        .iter()
        .map(|(k, (a, b))| Ok((parse_q(k)?, parse_q(a)?, parse_q(b)?)))
        .collect::<Result<Vec<_>>>()?;
    rows.sort();
    let order = LinearOrder::new(rows.iter().map(|r| r.0).collect())?;
    LevelEmbedding::new(
        order,
        rows.iter().map(|r| r.1).collect(),
        rows.iter().map(|r| r.2).collect(),
    )
}

// ---- groups

/// One-line notation over the ground set: the image of each point, in order.
pub fn perm_to_value(g: &Perm, ground: &[String]) -> Value {
    Value::Array(
        g.images()
            .iter()
            .map(|&i| Value::String(ground[i].clone()))
            .collect(),
    )
}

pub fn group_to_value(g: &PermGroup) -> Value {
    serde_json::json!({
        "ground": g.ground(),
        "order": g.order(),
        "generators": g.generators().iter().map(|p| perm_to_value(p, g.ground())).collect::<Vec<_>>(),
        "elements": g.elements().iter().map(|p| perm_to_value(p, g.ground())).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ultrametric::fixtures::u1;
    use crate::wreath::fixtures;

    fn round_trip(d: Document) -> Document {
        let v = d.to_value();
        let back = document_from_value(&v).unwrap();
        assert_eq!(back.to_value(), v);
        back
    }

    #[test]
    fn documents_round_trip() {
        round_trip(Document::Space(u1()));
        let t = crate::functors::functor_f(&u1(), &LinearOrder::from_ints(&[1, 2, 3]).unwrap())
            .unwrap()
            .tree;
        round_trip(Document::Tree(t));
        round_trip(Document::Skeleton(Skeleton::chain(&[2, 2, 1])));
        round_trip(Document::Bundle(Bundle::Projections(fixtures::w3_twist())));
        round_trip(Document::Bundle(Bundle::Supports {
            skeleton: Skeleton::chain(&[2, 1]),
            kind: SupportKind::Lf,
        }));
        let emb = LevelEmbedding::standard(&LinearOrder::from_ints(&[1, 2]).unwrap());
        round_trip(Document::Embedding(emb));
    }

    #[test]
    fn untagged_space_and_errors() {
        let v = parse_json(r#"{ "points": ["a","b"], "dist": [["0","1"],["1","0"]] }"#).unwrap();
        assert!(matches!(
            document_from_value(&v).unwrap(),
            Document::Space(_)
        ));
        match parse_json("{\n  \"points\": [\"a\",\n") {
            Err(Error::Parse(m)) => assert!(m.starts_with("line "), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            document_from_value(&parse_json(r#"{"foo": 1}"#).unwrap()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn digest_is_stable() {
        let a = Document::Space(u1()).digest();
        assert_eq!(a, Document::Space(u1()).digest());
        assert_eq!(a.len(), 64);
    }
}
