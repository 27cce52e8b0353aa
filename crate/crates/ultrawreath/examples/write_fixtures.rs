//! Writes the JSON fixture files used by the CLI examples and tests.
//!
//!     cargo run --example write_fixtures -- [dir]   (default: data/)

use std::path::PathBuf;

use ultrawreath::io::{write_json, Document};
use ultrawreath::ltree::LinearOrder;
use ultrawreath::rational::q;
use ultrawreath::ultrametric::{fixtures, UltraSpace};
use ultrawreath::wreath::{fixtures as wf, Bundle, Skeleton, SupportKind};

fn main() -> ultrawreath::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir).map_err(|e| ultrawreath::Error::Io(e.to_string()))?;

    let names = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    // d(a,c) = 2 > max(d(a,b), d(b,c)) = 1
    let bad = UltraSpace::new(
        names(&["a", "b", "c"]),
        vec![
            vec![q(0), q(1), q(2)],
            vec![q(1), q(0), q(1)],
            vec![q(2), q(1), q(0)],
        ],
    )?;
    let chain221 = Skeleton::chain(&[2, 2, 1]).with_levels(Some(vec![q(1), q(2), q(3)]))?;
    let f_u1 =
        ultrawreath::functors::functor_f(&fixtures::u1(), &LinearOrder::from_ints(&[1, 2, 3])?)?
            .tree;

    let docs = [
        ("u1.json", Document::Space(fixtures::u1())),
        ("u2.json", Document::Space(fixtures::u2())),
        ("triangle_violation.json", Document::Space(bad)),
        ("f_u1.json", Document::Tree(f_u1)),
        ("chain221.json", Document::Skeleton(chain221.clone())),
        (
            "chain221_lf.json",
            Document::Bundle(Bundle::Supports {
                skeleton: chain221,
                kind: SupportKind::Lf,
            }),
        ),
        (
            "w3_twist.json",
            Document::Bundle(Bundle::Projections(wf::w3_twist())),
        ),
        (
            "twisted_chain.json",
            Document::Bundle(Bundle::Projections(wf::twisted_chain())),
        ),
        (
            "broken_composition.json",
            Document::Bundle(Bundle::Projections(wf::broken_composition())),
        ),
    ];
    for (name, doc) in docs {
        write_json(&dir.join(name), &doc.to_value())?;
        println!("{:<26} {:<9} {}", name, doc.kind(), &doc.digest()[..16]);
    }
    Ok(())
}
