//! Spaces and trees that are not homogeneous: one labeling per bottom class,
//! glued by projections into a projective wreath product.
//!
//!     cargo run --example general

use ultrawreath::ltree::{LTree, LinearOrder};
use ultrawreath::pipelines::{
    general_system, verify_general, GeneralInput, PipelineConfig, TreeData,
};
use ultrawreath::ultrametric::fixtures::u2;

fn main() -> ultrawreath::Result<()> {
    let cfg = PipelineConfig::default();
    let r = verify_general(&GeneralInput::Space(u2()), &cfg)?;
    print!("{}", r.to_text());

    // Two bottom orbits under a shared two-way branching, listed so that their
    // first members sit on opposite sides: the projection between them swaps.
    let names = [
        "b1", "c2", "b1'", "b2", "b2'", "c1", "B1", "C1", "B2", "C2", "A1", "A2", "r",
    ];
    let parent = [6, 9, 6, 8, 8, 7, 10, 10, 11, 11, 12, 12]
        .into_iter()
        .map(Some)
        .chain([None])
        .collect();
    let tree = LTree::from_parents(
        LinearOrder::from_ints(&[1, 2, 3, 4])?,
        names.iter().map(|s| s.to_string()).collect(),
        vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 3],
        parent,
    )?;
    let td = TreeData::new(tree.clone(), cfg.max_order)?;
    let gs = general_system(&td)?;
    let sk = gs.system.skeleton();
    for (&(d, g), map) in gs.system.pi_table() {
        if !gs.system.is_trivial_between(d, g) {
            println!("π({} → {}) = {:?}", sk.name(d), sk.name(g), map);
        }
    }
    let r = verify_general(&GeneralInput::Tree(tree), &cfg)?;
    print!("{}", r.to_text());
    Ok(())
}
