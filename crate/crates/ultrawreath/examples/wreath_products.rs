//! Wreath products from skeletons: support families, the brute-force oracle,
//! and rewriting a twisted projection system into plain restrictions.
//!
//!     cargo run --example wreath_products

use ultrawreath::wreath::{
    brute_wreath_oracle, domain_from_supports, fixtures, rho, verify_rho, wreath_group,
    CoordinateGroups, Skeleton, SupportKind,
};

fn main() -> ultrawreath::Result<()> {
    let m = 1_000_000;
    let sk = Skeleton::chain(&[2, 2, 1]);
    for kind in [
        SupportKind::Fin,
        SupportKind::Lf,
        SupportKind::Wsp,
        SupportKind::Max,
    ] {
        println!(
            "{kind:>3}: {} sequences",
            domain_from_supports(&sk, kind, m)?.len()
        );
    }

    for (name, ps) in fixtures::oracle_bundles().iter().take(6) {
        let fast = wreath_group(ps, &CoordinateGroups::Full, m)?;
        let slow = brute_wreath_oracle(ps, &CoordinateGroups::Full)?;
        println!(
            "{name:<24} order {:>4}  oracle agrees: {}",
            fast.order(),
            fast.elements() == slow.elements()
        );
    }

    let w3 = fixtures::w3_twist();
    let r = rho(&w3)?;
    let sk = w3.skeleton();
    for (i, z) in w3.part(0).iter().enumerate() {
        println!(
            "ρ{} = {}",
            z.render(sk),
            r.family.part(0)[r.map[0][i]].render(sk)
        );
    }
    let w = verify_rho(&w3, m)?;
    println!(
        "conjugation verified: {} ({} → {})",
        w.verified,
        w.source.order(),
        w.target.order()
    );
    Ok(())
}
