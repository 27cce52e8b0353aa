//! The general pipeline over seeded random spaces, in parallel.
//!
//!     cargo run --release --example corpus -- [seed] [count] [max_points]

use ultrawreath::corpus::run_corpus;
use ultrawreath::pipelines::PipelineConfig;

fn main() -> ultrawreath::Result<()> {
    let arg = |i: usize, d: u64| {
        std::env::args()
            .nth(i)
            .map_or(d, |s| s.parse().expect("numeric argument"))
    };
    let (seed, count, max_points) = (arg(1, 1), arg(2, 100) as usize, arg(3, 6) as usize);
    let r = run_corpus(seed, count, max_points, &PipelineConfig::default())?;
    let mut by_size = std::collections::BTreeMap::new();
    for e in &r.instances {
        *by_size.entry(e.points).or_insert(0) += 1;
    }
    println!(
        "{} PASS, {} FAIL; instances by size {:?}",
        r.passed, r.failed, by_size
    );
    let biggest = r
        .instances
        .iter()
        .max_by_key(|e| e.orders.get("iso_space"))
        .unwrap();
    println!(
        "largest group: instance {} with {:?}",
        biggest.index, biggest.orders
    );
    Ok(())
}
