//! The `umw` command line. Every command reads UTF-8 JSON and writes one
//! canonical report; identical inputs and flags give identical bytes.
//!
//! Exit status: 0 success / PASS, 1 validation failure or FAIL,
//! 3 DIAGNOSTIC, and [`Error::exit_code`] for errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::corpus::run_corpus;
use crate::error::{Error, Result};
use crate::functors::{
    default_radii, functor_f, functor_g, functor_u, rigid_comb, u_contract, LevelEmbedding,
};
use crate::io::{self, Document};
use crate::ltree::LinearOrder;
use crate::pipelines::{
    roundtrip_wreath, urysohn_diagnostics, verify_discrete_homogeneous, verify_exact,
    verify_general, verify_homogeneous, GeneralInput, PipelineConfig, TheoremReport, Verdict,
    WitnessSummary,
};
use crate::rational::{fmt_q, parse_q_list, q};
use crate::ultrametric::UltraSpace;
use crate::wreath::{
    rho, tree_from_wreath, verify_rho, wreath_group, Bundle, CoordinateGroups, SideChains,
    SupportKind,
};

#[derive(Parser, Debug)]
#[command(
    name = "umw",
    version,
    about = "Ultrametric spaces, leveled trees and wreath products at desk scale"
)]
pub struct Cli {
    /// Refuse to enumerate groups or domains larger than this (default: $UMW_MAX_ORDER or 1000000).
    #[arg(long, global = true)]
    pub max_order: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the validator matching the file's schema; exit 1 on a violation.
    Validate { path: PathBuf },
    /// Isometry group of a space.
    Iso {
        #[arg(long)]
        input: PathBuf,
    },
    /// Automorphism group of a leveled tree.
    Aut {
        #[arg(long)]
        input: PathBuf,
    },
    Functor {
        #[command(subcommand)]
        which: FunctorCmd,
    },
    /// Automorphism orbits of a tree and the skeleton they induce.
    Condense {
        #[arg(long)]
        input: PathBuf,
    },
    /// Order and elements of a wreath product.
    Wreath {
        /// A bundle file (supports, global domain, local family or projection system).
        #[arg(long, conflicts_with = "skeleton")]
        input: Option<PathBuf>,
        #[arg(long, requires = "supports")]
        skeleton: Option<PathBuf>,
        /// fin | lf | wsp | max
        #[arg(long)]
        supports: Option<String>,
    },
    /// Rewrite a projection system into plain restrictions and verify the conjugacy.
    Rho {
        #[arg(long)]
        input: PathBuf,
    },
    /// Truncated tree whose automorphisms realise a wreath product.
    Treeify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_enum, default_value_t = Side::Short)]
        side: Side,
    },
    Pipeline {
        #[arg(value_enum)]
        which: PipelineKind,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 3)]
        wide_bound: usize,
        #[arg(long, value_enum, default_value_t = Side::Short)]
        side: Side,
        /// Include per-stage wall-clock times (makes the report non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Run the general pipeline on seeded random spaces.
    Corpus {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        max_points: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum FunctorCmd {
    /// Ball tree of a space.
    F {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated increasing levels; default: the distances plus one level above.
        #[arg(long)]
        levels: Option<String>,
    },
    /// Space of branches of a tree.
    G {
        #[arg(long)]
        input: PathBuf,
        /// Level embedding file; default: level j spans (2j+1, 2j+2).
        #[arg(long)]
        embedding: Option<PathBuf>,
    },
    /// Product of a space with a rigid comb.
    U {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Short,
    Full,
}

impl From<Side> for SideChains {
    fn from(s: Side) -> Self {
        match s {
            Side::Short => SideChains::Short,
            Side::Full => SideChains::Full,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PipelineKind {
    Homogeneous,
    Discrete,
    Exact,
    General,
    Urysohn,
    Roundtrip,
}

/// A finished command: the report and the exit status it implies.
#[derive(Debug)]
pub struct Outcome {
    pub value: Value,
    pub text: Option<String>,
    pub status: i32,
}

impl Outcome {
    fn ok(value: Value) -> Self {
        Outcome {
            value,
            text: None,
            status: 0,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match (format, &self.text) {
            (Format::Text, Some(t)) => t.clone(),
            (Format::Text, None) => text_of(&self.value, 0),
            (Format::Json, _) => io::to_pretty(&self.value),
        }
    }
}

fn text_of(v: &Value, indent: usize) -> String {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => m
            .iter()
            .map(|(k, v)| match v {
                Value::Object(_) | Value::Array(_) => {
                    format!("{pad}{k}:\n{}", text_of(v, indent + 1))
                }
                _ => format!("{pad}{k}: {}\n", scalar(v)),
            })
            .collect(),
        Value::Array(a) => a
            .iter()
            .map(|v| format!("{pad}- {}\n", scalar(v)))
            .collect(),
        _ => format!("{pad}{}\n", scalar(v)),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Object(_) | Value::Array(_) => v.to_string(),
        _ => v.to_string(),
    }
}

fn read_space(path: &Path) -> Result<UltraSpace> {
    match io::read_document(path)? {
        Document::Space(u) => Ok(u),
        d => Err(Error::Schema(format!(
            "expected a space, found a {}",
            d.kind()
        ))),
    }
}

fn read_tree(path: &Path) -> Result<crate::ltree::LTree> {
    match io::read_document(path)? {
        Document::Tree(t) => Ok(t),
        d => Err(Error::Schema(format!(
            "expected a tree, found a {}",
            d.kind()
        ))),
    }
}

fn read_bundle(path: &Path) -> Result<Bundle> {
    match io::read_document(path)? {
        Document::Bundle(b) => Ok(b),
        Document::Skeleton(sk) => Ok(Bundle::Supports {
            skeleton: sk,
            kind: SupportKind::Lf,
        }),
        d => Err(Error::Schema(format!(
            "expected a wreath bundle, found a {}",
            d.kind()
        ))),
    }
}

fn witness_value(w: &crate::permgroup::IsoWitness) -> Value {
    serde_json::to_value(WitnessSummary::from(w)).expect("summaries serialize")
}

fn validate(path: &Path, max_order: usize) -> Result<Outcome> {
    let doc = io::read_document(path)?;
    let violations: Vec<String> = match &doc {
        Document::Space(u) => u
            .validate()
            .violations
            .iter()
            .map(|v| u.describe(v))
            .collect(),
        Document::Tree(t) => t
            .validate()
            .violations
            .iter()
            .map(|v| t.describe(v))
            .collect(),
        // skeletons and embeddings are checked while parsing
        Document::Skeleton(_) | Document::Embedding(_) => vec![],
        Document::Bundle(Bundle::Local(f)) => f.validate().iter().map(|v| f.describe(v)).collect(),
        Document::Bundle(b) => {
            let ps = b.to_projection_system(max_order)?;
            ps.validate().iter().map(|v| ps.describe(v)).collect()
        }
    };
    let ok = violations.is_empty();
    let value =
        json!({ "kind": doc.kind(), "digest": doc.digest(), "ok": ok, "violations": violations });
    Ok(Outcome {
        value,
        text: None,
        status: if ok { 0 } else { 1 },
    })
}

fn pipeline_outcome(r: TheoremReport, timings: bool) -> Outcome {
    let status = match r.verdict {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Diagnostic => 3,
    };
    let mut text = r.to_text();
    if timings {
        text += &r
            .timings_ms
            .iter()
            .map(|(k, v)| format!("  {k}: {v} ms\n"))
            .collect::<String>();
    }
    Outcome {
        value: r.to_value(timings),
        text: Some(text),
        status,
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let m = cli
        .max_order
        .unwrap_or_else(crate::permgroup::default_max_order);
    if m == 0 {
        return Err(Error::Schema("--max-order must be positive".into()));
    }
    match &cli.command {
        Command::Validate { path } => validate(path, m),
        Command::Iso { input } => {
            let g = read_space(input)?.iso_group(m)?;
            Ok(Outcome::ok(
                json!({ "order": g.order(), "group": io::group_to_value(&g) }),
            ))
        }
        Command::Aut { input } => {
            let g = read_tree(input)?.aut_group(m)?;
            Ok(Outcome::ok(
                json!({ "order": g.order(), "group": io::group_to_value(&g) }),
            ))
        }
        Command::Functor { which } => match which {
            FunctorCmd::F { input, levels } => {
                let u = read_space(input)?;
                let order = match levels {
                    Some(s) => LinearOrder::new(parse_q_list(s)?)?,
                    None => crate::functors::canonical_levels(&u, m)?,
                };
                Ok(Outcome::ok(io::tree_to_value(&functor_f(&u, &order)?.tree)))
            }
            FunctorCmd::G { input, embedding } => {
                let t = read_tree(input)?;
                let emb = match embedding {
                    Some(p) => match io::read_document(p)? {
                        Document::Embedding(e) => e,
                        d => {
                            return Err(Error::Schema(format!(
                                "expected an embedding, found a {}",
                                d.kind()
                            )))
                        }
                    },
                    None => LevelEmbedding::standard(t.order()),
                };
                Ok(Outcome::ok(io::space_to_value(&functor_g(&t, &emb)?)))
            }
            FunctorCmd::U { input, depth } => {
                let u = read_space(input)?;
                let least = u
                    .distance_set()
                    .into_iter()
                    .find(|d| *d > q(0))
                    .unwrap_or(q(1));
                let comb = rigid_comb(*depth, &default_radii(*depth, least))?;
                let c = u_contract(&u, &comb, m)?;
                Ok(Outcome::ok(json!({
                    "space": io::space_to_value(&functor_u(&u, &comb)?),
                    "comb_radii": comb.radii().iter().map(fmt_q).collect::<Vec<_>>(),
                    "iso_space": c.iso_u,
                    "iso_comb": c.iso_comb,
                    "iso_product": c.iso_product,
                    "expected": c.expected,
                    "copies_preserved": c.copies_preserved,
                    "holds": c.holds(),
                })))
            }
        },
        Command::Condense { input } => {
            let t = read_tree(input)?;
            let cond = t.condense(m)?;
            let sk = t.label_n(&cond)?;
            let classes: Vec<Value> = cond
                .classes
                .iter()
                .map(|c| json!(c.iter().map(|&x| t.name(x).to_string()).collect::<Vec<_>>()))
                .collect();
            Ok(Outcome::ok(json!({
                "aut_order": cond.aut.order(),
                "classes": classes,
                "skeleton": io::skeleton_to_value(&sk),
                "special": t.is_special(&cond),
                "homogeneous": t.is_homogeneous_tree(&cond),
            })))
        }
        Command::Wreath {
            input,
            skeleton,
            supports,
        } => {
            let bundle = match (input, skeleton) {
                (Some(p), None) => read_bundle(p)?,
                (None, Some(p)) => {
                    let sk = match io::read_document(p)? {
                        Document::Skeleton(sk) => sk,
                        d => d_bundle_skeleton(d)?,
                    };
                    let kind: SupportKind = supports.as_deref().unwrap_or("lf").parse()?;
                    Bundle::Supports { skeleton: sk, kind }
                }
                _ => {
                    return Err(Error::Schema(
                        "give --input or --skeleton with --supports".into(),
                    ))
                }
            };
            let ps = bundle.to_projection_system(m)?;
            if let Some(v) = ps.validate().first() {
                return Err(Error::InvalidSystem(ps.describe(v)));
            }
            let g = wreath_group(&ps, &CoordinateGroups::Full, m)?;
            Ok(Outcome::ok(
                json!({ "order": g.order(), "domain_size": ps.total(), "group": io::group_to_value(&g) }),
            ))
        }
        Command::Rho { input } => {
            let ps = read_bundle(input)?.to_projection_system(m)?;
            let r = rho(&ps)?;
            let w = verify_rho(&ps, m)?;
            let status = if w.verified { 0 } else { 1 };
            let value = json!({
                "rewritten": io::bundle_to_value(&Bundle::Local(r.family)),
                "witness": witness_value(&w),
            });
            Ok(Outcome {
                value,
                text: None,
                status,
            })
        }
        Command::Treeify { input, depth, side } => {
            let ps = read_bundle(input)?.to_projection_system(m)?;
            let k = match depth {
                Some(k) => *k,
                None => crate::wreath::min_depth(&ps, (*side).into())?,
            };
            let t = tree_from_wreath(&ps, k, (*side).into(), m)?;
            let status = if t.witness.verified { 0 } else { 1 };
            let value = json!({ "depth": k, "tree": io::tree_to_value(&t.tree), "witness": witness_value(&t.witness) });
            Ok(Outcome {
                value,
                text: None,
                status,
            })
        }
        Command::Pipeline {
            which,
            input,
            depth,
            wide_bound,
            side,
            timings,
        } => {
            let cfg = PipelineConfig {
                max_order: m,
                depth: *depth,
                wide_bound: *wide_bound,
                side_chains: (*side).into(),
            };
            let general_input = || -> Result<GeneralInput> {
                Ok(match io::read_document(input)? {
                    Document::Space(u) => GeneralInput::Space(u),
                    Document::Tree(t) => GeneralInput::Tree(t),
                    d => {
                        return Err(Error::Schema(format!(
                            "expected a space or tree, found a {}",
                            d.kind()
                        )))
                    }
                })
            };
            let r = match which {
                PipelineKind::Homogeneous => verify_homogeneous(&read_space(input)?, &cfg)?,
                PipelineKind::Discrete => verify_discrete_homogeneous(&read_space(input)?, &cfg)?,
                PipelineKind::Exact => verify_exact(&general_input()?, &cfg)?,
                PipelineKind::General => verify_general(&general_input()?, &cfg)?,
                PipelineKind::Urysohn => {
                    urysohn_diagnostics(&read_space(input)?, *wide_bound, &cfg)?
                }
                PipelineKind::Roundtrip => roundtrip_wreath(&read_bundle(input)?, &cfg)?,
            };
            Ok(pipeline_outcome(r, *timings))
        }
        Command::Corpus {
            seed,
            count,
            max_points,
        } => {
            if *max_points > 7 {
                return Err(Error::Schema("--max-points is capped at 7".into()));
            }
            let cfg = PipelineConfig {
                max_order: m,
                ..Default::default()
            };
            let r = run_corpus(*seed, *count, *max_points, &cfg)?;
            let status = if r.failed == 0 { 0 } else { 1 };
            let text = format!(
                "corpus seed {} count {} max_points {}: {} PASS, {} FAIL\n",
                r.seed, r.count, r.max_points, r.passed, r.failed
            );
            Ok(Outcome {
                value: serde_json::to_value(&r).expect("reports serialize"),
                text: Some(text),
                status,
            })
        }
    }
}

fn d_bundle_skeleton(d: Document) -> Result<crate::wreath::Skeleton> {
    match d {
        Document::Bundle(b) => Ok(b.skeleton().clone()),
        d => Err(Error::Schema(format!(
            "expected a skeleton, found a {}",
            d.kind()
        ))),
    }
}

/// Parses arguments, runs, writes the report, and returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let out = run(&cli).and_then(|o| {
        let text = o.render(cli.format);
        match &cli.report {
            Some(p) => {
                std::fs::write(p, &text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?
            }
            None => print!("{text}"),
        }
        Ok(o.status)
    });
    match out {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            e.exit_code()
        }
    }
}
