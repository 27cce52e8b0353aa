//! From a wreath product back to a tree: pad the top if needed, build the
//! truncated tree, and check its automorphism group is the wreath product.
//!
//!     cargo run --example roundtrip [depth]

use ultrawreath::pipelines::{roundtrip_wreath, PipelineConfig};
use ultrawreath::wreath::{fixtures, Bundle, SideChains};

fn main() -> ultrawreath::Result<()> {
    let depth = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("depth is a number"));
    let cfg = PipelineConfig {
        depth,
        ..Default::default()
    };
    for (name, ps) in [
        ("single point", fixtures::chain_lf(&[1])),
        ("twist", fixtures::w3_twist()),
        ("2-chain", fixtures::chain_lf(&[2, 2])),
    ] {
        println!("== {name}");
        print!(
            "{}",
            roundtrip_wreath(&Bundle::Projections(ps), &cfg)?.to_text()
        );
    }
    // full-length side chains leave extra symmetry at the bottom
    let full = PipelineConfig {
        depth: Some(3),
        side_chains: SideChains::Full,
        ..Default::default()
    };
    let r = roundtrip_wreath(&Bundle::Projections(fixtures::chain_lf(&[2, 2])), &full)?;
    println!(
        "== 2-chain, full side chains: {:?}, |Aut| = {}",
        r.verdict, r.orders["aut_truncated_tree"]
    );
    Ok(())
}
