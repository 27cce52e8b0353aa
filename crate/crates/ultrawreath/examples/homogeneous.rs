//! A homogeneous space all the way around: isometries, ball tree, skeleton,
//! the locally finite wreath product, and the space rebuilt from it.
//!
//!     cargo run --example homogeneous

use ultrawreath::pipelines::{verify_homogeneous, PipelineConfig};
use ultrawreath::rational::q;
use ultrawreath::ultrametric::fixtures::{equilateral, u1};

fn main() -> ultrawreath::Result<()> {
    let cfg = PipelineConfig::default();
    for (name, u) in [
        ("two pairs", u1()),
        ("equilateral triangle", equilateral(3, q(1))),
    ] {
        let r = verify_homogeneous(&u, &cfg)?;
        println!("== {name}");
        print!("{}", r.to_text());
        println!("labels: {}", r.artifacts["labeling"]);
    }
    Ok(())
}
