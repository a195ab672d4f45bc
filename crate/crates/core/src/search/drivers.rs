//! The three enumerations. Each works on one outer value at a time and
//! hands every verified triple to an [`Emitter`].

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{CandidateTriple, Provenance, SearchConfig};
use crate::arith::{factor_with, pow_u64, primitive_power};
use crate::bounds::floor_log;
use crate::model::{Instance, SolutionSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Emitted {
    Triple(CandidateTriple),
    Failure { provenance: Provenance, reason: String },
}

/// Collects a driver's output for one outer value, dropping repeats.
#[derive(Debug, Default)]
pub struct Emitter {
    pub items: Vec<Emitted>,
    pub counters: BTreeMap<String, u64>,
    seen: BTreeSet<String>,
}

impl Emitter {
    pub fn bump(&mut self, name: &str) {
        *self.counters.entry(name.to_string()).or_default() += 1;
    }

    fn emit(&mut self, set: SolutionSet, provenance: Provenance, case: &str) {
        if self.seen.insert(set.sorted().to_string()) {
            self.bump(&format!("{case}.triples"));
            self.items.push(Emitted::Triple(CandidateTriple { set, provenance }));
        } else {
            self.bump(&format!("{case}.repeats"));
        }
    }

    fn fail(&mut self, provenance: Provenance, reason: String, case: &str) {
        self.bump(&format!("{case}.factor_failures"));
        self.items.push(Emitted::Failure { provenance, reason });
    }

    pub fn triples(&self) -> impl Iterator<Item = &CandidateTriple> {
        self.items.iter().filter_map(|e| match e {
            Emitted::Triple(t) => Some(t),
            Emitted::Failure { .. } => None,
        })
    }
}

/// `n + (-1)^e`, or `None` when that is below 2.
fn plus_sign(n: &BigUint, e: u8) -> Option<BigUint> {
    if e % 2 == 0 {
        Some(n + 1u32)
    } else if n > &BigUint::from(2u32) {
        Some(n - 1u32)
    } else {
        None
    }
}

fn sgn(e: u8) -> BigInt {
    if e % 2 == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// Largest `k` with `b^k | n`, for `n > 0`.
fn power_dividing(b: &BigUint, n: &BigUint) -> u64 {
    let mut k = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(b);
        if !r.is_zero() {
            return k;
        }
        m = q;
        k += 1;
    }
}

fn build(a: &BigUint, b: &BigUint, c: BigUint, r: BigUint, s: BigUint, pairs: &[(u64, u64)]) -> Option<SolutionSet> {
    let inst = Instance::new(a.clone(), b.clone(), c, r, s).ok()?;
    SolutionSet::from_pairs(inst, pairs).ok()
}

fn abs_diff(p: &BigUint, q: &BigUint) -> BigUint {
    if p >= q {
        p - q
    } else {
        q - p
    }
}

/// Divisors `d > 1` of `n`, sorted, or the reason factoring failed.
fn divisors_above_one(n: &BigUint, cfg: &SearchConfig) -> Result<Vec<BigUint>, String> {
    let f = factor_with(n, &cfg.effort.factor).map_err(|e| e.to_string())?;
    let mut d: Vec<BigUint> = f.divisors().into_iter().filter(|d| !d.is_one()).collect();
    d.sort();
    Ok(d)
}

/// `0 = x1 < x2 < x3`, `0 = y1 < y2 < y3`, with `a > b`.
///
/// The solution pair (2,3) gives `r a^x2 (a^g + (-1)^γ) = s b^y2 (b^G + (-1)^δ)`
/// with `g = x3 - x2` and `G = y3 - y2`, so `a^x2` divides `b^G ± 1`.
pub fn triples_19b(b: u64, cfg: &SearchConfig, em: &mut Emitter) {
    let bb = BigUint::from(b);
    let z = &cfg.bound;
    for &delta in &cfg.signs {
        let mut y_gap = 1u64;
        loop {
            let bg = pow_u64(&bb, y_gap);
            if &bg > z {
                break;
            }
            let Some(big_b) = plus_sign(&bg, delta) else {
                y_gap += 1;
                continue;
            };
            em.bump("19b.factorizations");
            let divs = match divisors_above_one(&big_b, cfg) {
                Ok(d) => d,
                Err(reason) => {
                    em.fail(Provenance::Factor { base: b, exponent: y_gap, sign: delta }, reason, "19b");
                    y_gap += 1;
                    continue;
                }
            };
            for d in divs {
                let (a, x2) = primitive_power(&d);
                if a <= bb {
                    continue;
                }
                em.bump("19b.divisors");
                let x2 = x2 as u64;
                for gamma in [0u8, 1] {
                    let mut x_gap = 1u64;
                    loop {
                        let ag = pow_u64(&a, x_gap);
                        if &ag > z {
                            break;
                        }
                        let Some(big_a) = plus_sign(&ag, gamma) else {
                            x_gap += 1;
                            continue;
                        };
                        let h = big_a.gcd(&big_b);
                        let y2_max = power_dividing(&bb, &big_a);
                        for y2 in 1..=y2_max {
                            let by2 = pow_u64(&bb, y2);
                            let (r, rr) = big_b.div_rem(&(&d * &h));
                            let (s, sr) = big_a.div_rem(&(&by2 * &h));
                            if !rr.is_zero() || !sr.is_zero() {
                                continue;
                            }
                            em.bump("19b.rs_pairs");
                            let first = [0u8, 1].iter().any(|&al| {
                                [0u8, 1].iter().any(|&be| {
                                    BigInt::from(r.clone()) * (BigInt::from(d.clone()) + sgn(al))
                                        == BigInt::from(s.clone()) * (BigInt::from(by2.clone()) + sgn(be))
                                })
                            });
                            if !first {
                                continue;
                            }
                            let c = abs_diff(&(&r * &d), &(&s * &by2));
                            if c.is_zero() {
                                continue;
                            }
                            let pairs = [(0, 0), (x2, y2), (x2 + x_gap, y2 + y_gap)];
                            if let Some(set) = build(&a, &bb, c, r, s, &pairs) {
                                let provenance = Provenance::Case19b {
                                    b,
                                    delta,
                                    y_gap,
                                    a: a.clone(),
                                    x2,
                                    gamma,
                                    x_gap,
                                    y2,
                                };
                                em.emit(set, provenance, "19b");
                            }
                        }
                        x_gap += 1;
                    }
                }
            }
            y_gap += 1;
        }
    }
}

/// `0 = x1 < x2 < x3`, `0 = y2 < y1 < y3`, with `a > b`.
///
/// Here `r a^x2 (a^g ± 1) = s (b^y3 ± 1)`, so `a^x2` divides `b^y3 ± 1`, and
/// `r (a^x3 ± 1) = s b^y1 (b^(y3 - y1) ± 1)` fixes `y1`. The ceiling on `y3`
/// is `b^y3 <= sigma_cap * bound`.
pub fn triples_21b(b: u64, cfg: &SearchConfig, em: &mut Emitter) {
    let bb = BigUint::from(b);
    let z = &cfg.bound;
    let y3_cap = floor_log(&bb, &(&cfg.sigma_cap * z));
    for &nu in &cfg.signs {
        for y3 in 2..=y3_cap {
            let by3 = pow_u64(&bb, y3);
            let Some(big_b) = plus_sign(&by3, nu) else { continue };
            em.bump("21b.factorizations");
            let divs = match divisors_above_one(&big_b, cfg) {
                Ok(d) => d,
                Err(reason) => {
                    em.fail(Provenance::Factor { base: b, exponent: y3, sign: nu }, reason, "21b");
                    continue;
                }
            };
            for d in divs {
                let (a, x2) = primitive_power(&d);
                if a <= bb {
                    continue;
                }
                em.bump("21b.divisors");
                let x2 = x2 as u64;
                let mut x_gap = 1u64;
                loop {
                    let ag = pow_u64(&a, x_gap);
                    if &ag > z {
                        break;
                    }
                    let x3 = x2 + x_gap;
                    let ax3 = &d * &ag;
                    for mu in [0u8, 1] {
                        let Some(big_a) = plus_sign(&ag, mu) else { continue };
                        let h = big_a.gcd(&big_b);
                        let (r, rr) = big_b.div_rem(&(&d * &h));
                        if !rr.is_zero() {
                            continue;
                        }
                        let s = &big_a / &h;
                        em.bump("21b.rs_pairs");
                        for eta in [0u8, 1] {
                            let Some(e) = plus_sign(&ax3, eta) else { continue };
                            let lhs = BigInt::from(&r * &e);
                            // b^y1 need not divide e exactly once gcd(s, b) > 1
                            let top = power_dividing(&bb, &(&r * &e)).min(y3 - 1);
                            for y1 in 1..=top {
                                let by1 = pow_u64(&bb, y1);
                                for theta in [0u8, 1] {
                                    let rhs =
                                        BigInt::from(&s * &by1) * (BigInt::from(pow_u64(&bb, y3 - y1)) + sgn(theta));
                                    if lhs != rhs {
                                        continue;
                                    }
                                    let c = abs_diff(&(&r * &ax3), &(&s * &by3));
                                    if c.is_zero() {
                                        continue;
                                    }
                                    let pairs = [(0, y1), (x2, 0), (x3, y3)];
                                    if let Some(set) = build(&a, &bb, c, r.clone(), s.clone(), &pairs) {
                                        let provenance = Provenance::Case21b {
                                            b,
                                            nu,
                                            y3,
                                            a: a.clone(),
                                            x2,
                                            mu,
                                            x_gap,
                                            eta,
                                            y1,
                                            theta,
                                        };
                                        em.emit(set, provenance, "21b");
                                    }
                                }
                            }
                        }
                    }
                    x_gap += 1;
                }
            }
        }
    }
}

/// `0 = x1 < x2 < x3`, `0 = y1 = y2 < y3`.
///
/// Then `r` is 1 for odd `a` and 2 for even `a`, `s = r (a^x2 + (-1)^α) / 2`,
/// `c = s - (-1)^α r`, and `b^y3 = 2 (a^x3 + (-1)^(α+β)) / (a^x2 + (-1)^α) - (-1)^β`.
/// The ceilings are `a^(x3 - x2) <= bound` and `a^x2 <= 2 (bound + 1) + 1`,
/// and `x2 | x3` once `a > 3`.
pub fn triples_20b(a: u64, cfg: &SearchConfig, em: &mut Emitter) {
    let aa = BigUint::from(a);
    let z = &cfg.bound;
    let x2_cap = BigUint::from(2u32) * (z + 1u32) + 1u32;
    let r: u8 = if a % 2 == 1 { 1 } else { 2 };
    let rb = BigInt::from(r);
    for &alpha in &cfg.signs {
        let mut x2 = 1u64;
        loop {
            let ax2 = pow_u64(&aa, x2);
            if ax2 > x2_cap {
                break;
            }
            let den = BigInt::from(ax2.clone()) + sgn(alpha);
            let twice_s = &rb * &den;
            if den.is_zero() || twice_s.is_odd() {
                x2 += 1;
                continue;
            }
            let s: BigInt = &twice_s / 2;
            let c: BigInt = &s - sgn(alpha) * &rb;
            if !c.is_positive() {
                x2 += 1;
                continue;
            }
            let mut x_gap = 1u64;
            loop {
                let ag = pow_u64(&aa, x_gap);
                if &ag > z {
                    break;
                }
                let x3 = x2 + x_gap;
                x_gap += 1;
                if a > 3 && x3 % x2 != 0 {
                    continue;
                }
                let ax3 = BigInt::from(&ax2 * &ag);
                for beta in [0u8, 1] {
                    em.bump("20b.quotients");
                    let num = BigInt::from(2) * (&ax3 + sgn(alpha + beta));
                    let (q, rem) = num.div_rem(&den);
                    if !rem.is_zero() {
                        continue;
                    }
                    let by3 = q - sgn(beta);
                    if by3 < BigInt::from(2) {
                        continue;
                    }
                    let (b, y3) = primitive_power(&by3.to_biguint().expect("positive"));
                    let pairs = [(0, 0), (x2, 0), (x3, y3 as u64)];
                    let (cu, su) = (c.to_biguint().expect("positive"), s.to_biguint().expect("positive"));
                    if let Some(set) = build(&aa, &b, cu, BigUint::from(r), su, &pairs) {
                        let provenance = Provenance::Case20b {
                            a,
                            alpha,
                            beta,
                            x2,
                            x3,
                            r,
                        };
                        em.emit(set, provenance, "20b");
                    }
                }
            }
            x2 += 1;
        }
    }
}
