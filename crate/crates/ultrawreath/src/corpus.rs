//! Seeded random instances and the batch runner over them.
//!
//! Instance `i` of seed `s` draws from ChaCha8 seeded with `s` on stream `i`,
//! so any single instance can be reproduced without replaying the others and
//! the parallel run is byte-identical to a sequential one.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::ltree::{LTree, LinearOrder};
use crate::pipelines::{verify_general, GeneralInput, PipelineConfig, Verdict};
use crate::rational::{qr, Q};
use crate::ultrametric::UltraSpace;

pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A random finite ultrametric space on 1..=`max_points` points: clusters are
/// merged in rounds at increasing distances until one remains.
pub fn random_space<R: Rng>(rng: &mut R, max_points: usize) -> UltraSpace {
    let n = rng.gen_range(1..=max_points.max(1));
    let mut dist = vec![vec![Q::from_integer(0); n]; n];
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|x| vec![x]).collect();
    let mut radius = Q::from_integer(0);
    while clusters.len() > 1 {
        radius += qr(rng.gen_range(1..=4), rng.gen_range(1..=2));
        // fewer buckets than clusters forces at least one merge
        let buckets = rng.gen_range(1..clusters.len());
        clusters.shuffle(rng);
        let mut merged: Vec<Vec<usize>> = vec![vec![]; buckets];
        let mut parts: Vec<Vec<Vec<usize>>> = vec![vec![]; buckets];
        for (i, c) in clusters.drain(..).enumerate() {
            let b = if i < buckets {
                i
            } else {
                rng.gen_range(0..buckets)
            };
            parts[b].push(c);
        }
        for (b, ps) in parts.iter().enumerate() {
            for (i, a) in ps.iter().enumerate() {
                for c in &ps[i + 1..] {
                    for &x in a {
                        for &y in c {
                            dist[x][y] = radius;
                            dist[y][x] = radius;
                        }
                    }
                }
                merged[b].extend(a);
            }
        }
        clusters = merged
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        clusters.sort();
    }
    let names = (0..n).map(|x| format!("p{x}")).collect();
    UltraSpace::new_valid(names, dist).expect("merging clusters yields an ultrametric")
}

/// A random pruned leveled tree on at most `max_nodes` nodes with 1..=`max_levels` levels.
pub fn random_pruned_tree<R: Rng>(rng: &mut R, max_nodes: usize, max_levels: usize) -> LTree {
    loop {
        let h = rng.gen_range(1..=max_levels.max(1));
        let order =
            LinearOrder::from_ints(&(1..=h as i64).collect::<Vec<_>>()).expect("increasing");
        let mut level = vec![h - 1];
        let mut parent = vec![None];
        let mut frontier = vec![0];
        for j in (0..h - 1).rev() {
            let mut next = vec![];
            for &p in &frontier {
                for _ in 0..rng.gen_range(1..=3) {
                    next.push(level.len());
                    level.push(j);
                    parent.push(Some(p));
                }
            }
            frontier = next;
        }
        if level.len() > max_nodes {
            continue;
        }
        let names = (0..level.len()).map(|t| format!("t{t}")).collect();
        return LTree::from_parents(order, names, level, parent)
            .expect("generated tree is well formed");
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusEntry {
    pub index: usize,
    pub points: usize,
    pub input_digest: String,
    pub verdict: Verdict,
    pub orders: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusReport {
    pub seed: u64,
    pub count: usize,
    pub max_points: usize,
    pub passed: usize,
    pub failed: usize,
    pub instances: Vec<CorpusEntry>,
}

impl CorpusReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

/// Runs the general pipeline on `count` random spaces.
pub fn run_corpus(
    seed: u64,
    count: usize,
    max_points: usize,
    cfg: &PipelineConfig,
) -> Result<CorpusReport> {
    let instances: Vec<CorpusEntry> = (0..count)
        .into_par_iter()
        .map(|i| {
            let u = random_space(&mut instance_rng(seed, i as u64), max_points);
            let input = GeneralInput::Space(u.clone());
            let digest = crate::io::Document::Space(u.clone()).digest();
            match verify_general(&input, cfg) {
                Ok(r) => CorpusEntry {
                    index: i,
                    points: u.len(),
                    input_digest: digest,
                    verdict: r.verdict,
                    orders: r.orders,
                    error: None,
                },
                Err(e) => CorpusEntry {
                    index: i,
                    points: u.len(),
                    input_digest: digest,
                    verdict: Verdict::Fail,
                    orders: BTreeMap::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let passed = instances
        .iter()
        .filter(|e| e.verdict == Verdict::Pass)
        .count();
    Ok(CorpusReport {
        seed,
        count,
        max_points,
        passed,
        failed: count - passed,
        instances,
    })
}
