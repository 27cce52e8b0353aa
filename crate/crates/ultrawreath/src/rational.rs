//! Exact rationals. Everything metric in this crate is a `Q`; there are no floats.

use crate::error::{Error, Result};

pub type Q = num_rational::Ratio<i64>;

pub fn q(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational: `{s}`"));
    match t.split_once('/') {
        Some((p, d)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Q::new(p, d))
        }
        None => t.parse::<i64>().map(Q::from_integer).map_err(|_| bad()),
    }
}

/// Lowest-terms rendering, integers without a denominator.
pub fn fmt_q(x: &Q) -> String {
    x.to_string()
}

/// Parses a comma separated list such as `"1,2,3"` or `"1/2, 1/4"`.
pub fn parse_q_list(s: &str) -> Result<Vec<Q>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(parse_q)
        .collect()
}

/// 2^{-m}
pub fn pow2_neg(m: u32) -> Q {
    Q::new(1, 1i64 << m)
}
