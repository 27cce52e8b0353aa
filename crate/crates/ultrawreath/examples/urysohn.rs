//! Wideness of distances and dropping trivial coordinates from a linear skeleton.
//!
//!     cargo run --example urysohn [bound]

use ultrawreath::pipelines::{urysohn_diagnostics, PipelineConfig};
use ultrawreath::rational::q;
use ultrawreath::ultrametric::fixtures::{equilateral, u1};

fn main() -> ultrawreath::Result<()> {
    let m: usize = std::env::args()
        .nth(1)
        .map_or(2, |s| s.parse().expect("bound is a number"));
    let cfg = PipelineConfig::default();
    for u in [u1(), equilateral(4, q(1))] {
        let r = urysohn_diagnostics(&u, m, &cfg)?;
        print!("{}", r.to_text());
        println!("  wideness {}", r.artifacts["wideness"]);
        println!("  simplified N = {}", r.artifacts["simplified"]["N"]);
    }
    Ok(())
}
