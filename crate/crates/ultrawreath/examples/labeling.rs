//! Labelling tree nodes by sequences over the condensed skeleton, from scratch
//! and below a fixed chain.
//!
//!     cargo run --example labeling

use std::collections::BTreeMap;

use ultrawreath::functors::functor_f;
use ultrawreath::ltree::LinearOrder;
use ultrawreath::pipelines::{check_labeling, exact_labeling, labeling, TreeData};
use ultrawreath::ultrametric::fixtures::{u1, u2};

fn main() -> ultrawreath::Result<()> {
    let m = 1_000_000;
    let td = TreeData::new(
        functor_f(&u1(), &LinearOrder::from_ints(&[1, 2, 3])?)?.tree,
        m,
    )?;
    let sk = &td.skeleton;
    let l = labeling(&td, &[], td.bottom_classes()[0], &BTreeMap::new())?;
    for (&t, z) in &l.labels {
        println!(
            "{:<14} Λ={}  {}",
            td.tree.name(t),
            l.lambda[&t],
            z.render(sk)
        );
    }
    println!(
        "violations: {}",
        check_labeling(&td, &l, &BTreeMap::new()).len()
    );

    // two bottom classes: the second is labelled below chains cut at its split level
    let td = TreeData::new(
        functor_f(&u2(), &LinearOrder::from_ints(&[1, 2, 4])?)?.tree,
        m,
    )?;
    let (labels, runs) = exact_labeling(&td)?;
    println!("{} labeling runs", runs.len());
    for (t, z) in labels.iter().enumerate() {
        println!("{:<12} {}", td.tree.name(t), z.render(&td.skeleton));
    }
    Ok(())
}
