use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::permgroup::{verify_induced, IsoWitness, Perm};
use crate::rational::Q;

use super::{wreath_group, CoordinateGroups, ProjectionSystem, Seq, Skeleton};

/// A padded system with the witness that the wreath product did not change.
#[derive(Clone, Debug)]
pub struct Padded {
    pub system: ProjectionSystem,
    pub witness: IsoWitness,
}

fn fresh_name(sk: &Skeleton, base: &str) -> String {
    let mut name = base.to_string();
    while sk.index_of(&name).is_ok() {
        name.push('\'');
    }
    name
}

/// Adds `k` levels with `N = 1` above everything. Sequences are extended by
/// zeros and every projection onto a new level is constant.
pub fn pad_top(ps: &ProjectionSystem, k: usize, max_order: usize) -> Result<Padded> {
    let sk = ps.skeleton();
    let levels = sk.levels().ok_or(Error::MissingLevels)?;
    let old = sk.len();
    let top = *levels.iter().max().unwrap();
    let mut names = sk.names().to_vec();
    let mut lv = levels.to_vec();
    for i in 1..=k {
        names.push(fresh_name(sk, &format!("top{i}")));
        lv.push(top + Q::from_integer(i as i64));
    }
    let total = old + k;
    let le: Vec<Vec<bool>> = (0..total)
        .map(|a| {
            (0..total)
                .map(|b| {
                    if a < old && b < old {
                        sk.le(a, b)
                    } else {
                        b >= old && (a < old || a <= b)
                    }
                })
                .collect()
        })
        .collect();
    let mut n = sk.n_values();
    n.extend(std::iter::repeat_n(1, k));
    let nsk = Skeleton::from_matrix(names, le, n, Some(lv))?;
    let extend = |z: &Seq| {
        let mut vals = z.values().to_vec();
        vals.extend(std::iter::repeat_n(Some(0), k));
        Seq::raw(z.base(), vals)
    };
    let mut parts: Vec<Vec<Seq>> = ps
        .parts()
        .iter()
        .map(|p| p.iter().map(extend).collect())
        .collect();
    for t in old..total {
        parts.push(vec![Seq::raw(
            t,
            (0..total).map(|g| (g >= t).then_some(0)).collect(),
        )]);
    }
    let mut pi = BTreeMap::new();
    for (&(d, g), m) in ps.pi_table() {
        pi.insert((d, g), m.clone());
    }
    for d in 0..total {
        for t in old.max(d)..total {
            pi.insert((d, t), vec![0; parts[d].len()]);
        }
    }
    let system = ProjectionSystem::new(nsk, parts, pi)?;
    let before = wreath_group(ps, &CoordinateGroups::Full, max_order)?;
    let after = wreath_group(&system, &CoordinateGroups::Full, max_order)?;
    let extra = system.total() - ps.total();
    let witness = verify_induced("top padding", &before, &after, |g: &Perm| {
        let mut img = g.images().to_vec();
        let base = img.len();
        img.extend(base..base + extra);
        Perm::from_images(img)
    })?;
    Ok(Padded { system, witness })
}

/// Adds a descending chain of `k` elements with `N = 1` below every minimal
/// element. The new part below `δ` copies `𝐒_δ`; projections inside the new
/// chain are restrictions and continue through `π` above `δ`.
pub fn pad_bottom(ps: &ProjectionSystem, k: usize, max_order: usize) -> Result<Padded> {
    let sk = ps.skeleton();
    let levels = sk.levels().ok_or(Error::MissingLevels)?;
    let old = sk.len();
    let minimal = sk.minimal();
    // new element (m, i) = i-th step (1-based) below the minimal element m
    let mut owner = vec![];
    let mut names = sk.names().to_vec();
    let mut lv = levels.to_vec();
    for &m in &minimal {
        for i in 1..=k {
            owner.push((m, i));
            names.push(fresh_name(sk, &format!("{}~{}", sk.name(m), i)));
            lv.push(levels[m] - Q::from_integer(i as i64));
        }
    }
    let total = old + owner.len();
    let le_fn = |a: usize, b: usize| -> bool {
        match (a < old, b < old) {
            (true, true) => sk.le(a, b),
            (true, false) => false,
            (false, true) => sk.le(owner[a - old].0, b),
            (false, false) => {
                owner[a - old].0 == owner[b - old].0 && owner[a - old].1 >= owner[b - old].1
            }
        }
    };
    let le: Vec<Vec<bool>> = (0..total)
        .map(|a| (0..total).map(|b| le_fn(a, b)).collect())
        .collect();
    let mut n = sk.n_values();
    n.extend(std::iter::repeat_n(1, owner.len()));
    let nsk = Skeleton::from_matrix(names, le, n, Some(lv))?;
    let widen = |z: &Seq| {
        let mut vals = z.values().to_vec();
        vals.extend(std::iter::repeat_n(None, owner.len()));
        Seq::raw(z.base(), vals)
    };
    let mut parts: Vec<Vec<Seq>> = ps
        .parts()
        .iter()
        .map(|p| p.iter().map(widen).collect())
        .collect();
    for (e, &(m, _)) in owner.iter().enumerate() {
        let t = old + e;
        let part = ps
            .part(m)
            .iter()
            .map(|z| {
                let mut vals = widen(z).values().to_vec();
                for (f, v) in vals.iter_mut().enumerate().skip(old) {
                    if le_fn(t, f) {
                        *v = Some(0);
                    }
                }
                Seq::raw(t, vals)
            })
            .collect();
        parts.push(part);
    }
    let mut pi = BTreeMap::new();
    for (&(d, g), m) in ps.pi_table() {
        pi.insert((d, g), m.clone());
    }
    for (e, &(m, _)) in owner.iter().enumerate() {
        let t = old + e;
        let size = ps.part(m).len();
        for g in 0..total {
            if !le_fn(t, g) {
                continue;
            }
            let map = if g >= old {
                (0..size).collect()
            } else {
                (0..size).map(|i| ps.project(m, g, i)).collect()
            };
            pi.insert((t, g), map);
        }
    }
    let system = ProjectionSystem::new(nsk, parts, pi)?;
    let before = wreath_group(ps, &CoordinateGroups::Full, max_order)?;
    let after = wreath_group(&system, &CoordinateGroups::Full, max_order)?;
    let p = ps.canonical_poset();
    let q = system.canonical_poset();
    let witness = verify_induced("bottom padding", &before, &after, |g: &Perm| {
        let mut img = g.images().to_vec();
        for (e, &(m, _)) in owner.iter().enumerate() {
            for i in 0..ps.part(m).len() {
                let moved = g.apply(p.global(m, i)) - p.offset[m];
                img.push(q.global(old + e, moved));
            }
        }
        Perm::from_images(img)
    })?;
    Ok(Padded { system, witness })
}

#[cfg(test)]
mod tests {
    use super::super::{fixtures, LocalFamily};
    use super::*;

    fn chain22() -> ProjectionSystem {
        ProjectionSystem::trivial(&LocalFamily::locally_finite(&Skeleton::chain(&[2, 2]))).unwrap()
    }

    #[test]
    fn top_padding_keeps_the_group() {
        let p = pad_top(&chain22(), 1, 1000).unwrap();
        assert!(p.system.validate().is_empty());
        assert_eq!(p.system.skeleton().len(), 3);
        assert!(p.system.skeleton().is_linear());
        assert!(p.witness.verified);
        assert_eq!(p.witness.target.order(), 8);
        let tw = pad_top(&fixtures::w3_twist(), 2, 1000).unwrap();
        assert!(tw.system.validate().is_empty());
        assert!(tw.witness.verified);
    }

    #[test]
    fn bottom_padding_keeps_the_group() {
        for ps in [chain22(), fixtures::w3_twist(), fixtures::twisted_vee()] {
            let p = pad_bottom(&ps, 2, 1000).unwrap();
            assert!(p.system.validate().is_empty(), "{:?}", p.system.validate());
            assert!(p.witness.verified);
        }
    }

    #[test]
    fn pads_need_levels() {
        let sk = Skeleton::chain(&[2]).with_levels(None).unwrap();
        let ps = ProjectionSystem::trivial(&LocalFamily::locally_finite(&sk)).unwrap();
        assert!(matches!(pad_top(&ps, 1, 10), Err(Error::MissingLevels)));
        assert!(matches!(pad_bottom(&ps, 1, 10), Err(Error::MissingLevels)));
    }
}
