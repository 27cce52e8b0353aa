//! The three functors at finite scale: spaces to ball trees, trees to
//! spaces of branches, and the rigid-comb product.
//!
//!     cargo run --example functors

use ultrawreath::corpus::{instance_rng, random_pruned_tree};
use ultrawreath::functors::{
    default_radii, functor_f, functor_g, g_fullness_diagnostic, pad_chain, rigid_comb, u_contract,
    verify_f_iso, LevelEmbedding,
};
use ultrawreath::ltree::{LTree, LinearOrder};
use ultrawreath::rational::{fmt_q, q};
use ultrawreath::ultrametric::fixtures::u1;

fn main() -> ultrawreath::Result<()> {
    let m = 1_000_000;
    let u = u1();
    let levels = LinearOrder::from_ints(&[1, 2, 3])?;
    let f = functor_f(&u, &levels)?;
    println!("ball tree: {:?}", f.tree.names());
    let w = verify_f_iso(&u, &levels, m)?;
    println!(
        "Iso(U) → Aut(F(U)) verified: {} (order {})",
        w.verified,
        w.target.order()
    );

    let g = functor_g(&f.tree, &LevelEmbedding::standard(f.tree.order()))?;
    println!(
        "G(F(U)) has {} points; d(a-leaf, b-leaf) = {}",
        g.len(),
        fmt_q(&g.dist(0, 1))
    );
    // a bare chain has no automorphisms but its two nodes can still be swapped isometrically
    let chain = LTree::chain(LinearOrder::from_ints(&[1, 2])?);
    let d = g_fullness_diagnostic(&chain, &LevelEmbedding::standard(chain.order()), m)?;
    println!(
        "chain: |Aut| = {}, |Iso(G)| = {}",
        d.aut.order(),
        d.iso.order()
    );

    for k in 1..=3 {
        let comb = rigid_comb(k, &default_radii(k, q(1)))?;
        println!(
            "comb depth {k}: {} points, |Iso| = {}",
            comb.space().len(),
            comb.space().iso_group(m)?.order()
        );
    }
    let comb = rigid_comb(1, &default_radii(1, q(1)))?;
    let c = u_contract(&u, &comb, m)?;
    println!(
        "|Iso(U × comb)| = {} = {} · {}^{}: {}",
        c.iso_product,
        c.iso_u,
        c.iso_comb,
        u.len(),
        c.holds()
    );

    // how much chain padding does it take before G stops gaining isometries?
    let mut first_equal = std::collections::BTreeMap::new();
    let mut rng = instance_rng(11, 0);
    for _ in 0..50 {
        let t = random_pruned_tree(&mut rng, 8, 3);
        let k = (0..=3).find(|&k| {
            let p = pad_chain(&t, k).unwrap();
            g_fullness_diagnostic(&p, &LevelEmbedding::standard(p.order()), m)
                .unwrap()
                .equal
        });
        *first_equal.entry(k).or_insert(0) += 1;
    }
    println!("least padding with Aut = Iso, over 50 random trees: {first_equal:?}");
    Ok(())
}
