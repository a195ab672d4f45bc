//! Brute-force reference enumerations shared by the integration tests.
//! Everything here uses machine integers and no library code.

#![allow(dead_code)]

use std::collections::BTreeMap;

/// Box for brute-force instance enumeration.
#[derive(Debug, Clone, Copy)]
pub struct Box5 {
    pub ab_max: u64,
    pub rs_max: u64,
    pub c_max: u64,
    pub exp_max: u32,
}

/// An instance `(a, b, c, r, s)` with every `(x, y)` in the box solving it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Found {
    pub abcrs: (u64, u64, u64, u64, u64),
    pub pairs: Vec<(u32, u32)>,
}

pub fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `(-1)^u r a^x + (-1)^v s b^y = c` for some signs.
pub fn solves(a: u64, b: u64, c: u64, r: u64, s: u64, x: u32, y: u32) -> bool {
    let (Some(p), Some(q)) = (
        (a as u128).checked_pow(x).and_then(|v| v.checked_mul(r as u128)),
        (b as u128).checked_pow(y).and_then(|v| v.checked_mul(s as u128)),
    ) else {
        return false;
    };
    let c = c as u128;
    p + q == c || p.abs_diff(q) == c
}

/// Every instance in the box with at least `min_pairs` solutions with
/// `x, y <= exp_max`. With `coprime`, only instances with `gcd(r a, s b) = 1`.
pub fn instances(bx: Box5, min_pairs: usize, coprime: bool) -> Vec<Found> {
    let mut out = Vec::new();
    let c_max = bx.c_max as u128;
    for a in 2..=bx.ab_max {
        for b in 2..=bx.ab_max {
            if coprime && gcd(a as u128, b as u128) != 1 {
                continue;
            }
            for r in 1..=bx.rs_max {
                let ps: Vec<u128> = (0..=bx.exp_max).map(|x| r as u128 * (a as u128).pow(x)).collect();
                for s in 1..=bx.rs_max {
                    if coprime && gcd(r as u128 * a as u128, s as u128 * b as u128) != 1 {
                        continue;
                    }
                    let qs: Vec<u128> = (0..=bx.exp_max).map(|y| s as u128 * (b as u128).pow(y)).collect();
                    let mut by_c: BTreeMap<u128, Vec<(u32, u32)>> = BTreeMap::new();
                    for (x, &p) in ps.iter().enumerate() {
                        for (y, &q) in qs.iter().enumerate() {
                            let d = p.abs_diff(q);
                            if d >= 1 && d <= c_max {
                                by_c.entry(d).or_default().push((x as u32, y as u32));
                            }
                            if p + q <= c_max {
                                by_c.entry(p + q).or_default().push((x as u32, y as u32));
                            }
                        }
                    }
                    for (c, mut pairs) in by_c {
                        pairs.sort();
                        pairs.dedup();
                        if pairs.len() >= min_pairs {
                            out.push(Found {
                                abcrs: (a, b, c as u64, r, s),
                                pairs,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// The pattern a three-element pair list fits, sorted by `x`:
/// `19b` is `0 = x1 < x2 < x3` and `0 = y1 < y2 < y3`, `21b` has
/// `0 = y2 < y1 < y3`, `20b` has `0 = y1 = y2 < y3`.
pub fn pattern(pairs: &[(u32, u32)]) -> Option<&'static str> {
    let mut p = pairs.to_vec();
    p.sort();
    let [(x1, y1), (x2, y2), (x3, y3)] = p[..] else { return None };
    if !(x1 == 0 && x1 < x2 && x2 < x3) {
        return None;
    }
    if y1 == 0 && y1 < y2 && y2 < y3 {
        Some("19b")
    } else if y2 == 0 && y2 < y1 && y1 < y3 {
        Some("21b")
    } else if y1 == 0 && y2 == 0 && y2 < y3 {
        Some("20b")
    } else {
        None
    }
}

/// Every three-element subset of `found` (and of its associate) fitting
/// `case`, with `gcd(r a, s b) = 1`. Returned in the orientation that fits.
pub fn configurations(found: &[Found], case: &str) -> Vec<Found> {
    let mut out = Vec::new();
    for f in found {
        let (a, b, c, r, s) = f.abcrs;
        if gcd(r as u128 * a as u128, s as u128 * b as u128) != 1 {
            continue;
        }
        let n = f.pairs.len();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let sub = [f.pairs[i], f.pairs[j], f.pairs[k]];
                    if pattern(&sub) == Some(case) {
                        out.push(Found { abcrs: (a, b, c, r, s), pairs: sub.to_vec() });
                    }
                    let flipped: Vec<(u32, u32)> = sub.iter().map(|&(x, y)| (y, x)).collect();
                    if pattern(&flipped) == Some(case) {
                        out.push(Found { abcrs: (b, a, c, s, r), pairs: flipped });
                    }
                }
            }
        }
    }
    out
}
