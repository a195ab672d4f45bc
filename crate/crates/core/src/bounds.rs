//! A-priori bounds that cut the search space: exponent ceilings for four
//! solutions, the σ divisibility certificate, and the Hensel scan that
//! bounds `b^σ` from below in terms of `a`.

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    factor, hensel_lift, mult_order, pow_mod_u64, pow_u64, valuation_big, ArithError, Natural,
};
use crate::model::SolutionSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("need at least four solutions with strictly increasing x")]
    Unordered,
    #[error("gcd(r a, s b) = {0}, expected 1")]
    NotCoprime(String),
    #[error("gcd(a, b) = {0}, expected 1")]
    BasesNotCoprime(String),
    #[error("even prime {0} in b is outside the scan")]
    EvenPrime(u64),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Ceilings implied by four solutions `x1 < x2 < x3 < x4`:
/// `a^(x3-x2) <= Z` and `s <= Z + 1` with `Z = max(x4, y1, y2, y3, y4)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZBounds {
    pub z: u64,
    #[serde(with = "crate::serde_big::natural")]
    pub a_gap_power: Natural,
    #[serde(with = "crate::serde_big::natural")]
    pub s: Natural,
    pub a_gap_ok: bool,
    pub s_ok: bool,
}

impl ZBounds {
    /// Both ceilings hold, so the configuration is not ruled out.
    pub fn possible(&self) -> bool {
        self.a_gap_ok && self.s_ok
    }

    pub fn check(a: &Natural, gap: u64, s: &Natural, z: u64) -> Self {
        let a_gap_power = pow_u64(a, gap);
        Self {
            z,
            a_gap_ok: a_gap_power <= Natural::from(z),
            s_ok: *s <= Natural::from(z) + 1u32,
            a_gap_power,
            s: s.clone(),
        }
    }
}

/// Uses the first four solutions, which must be listed with strictly
/// increasing `x`.
pub fn z_bounds(set: &SolutionSet) -> Result<ZBounds, BoundsError> {
    let sol = &set.solutions;
    if sol.len() < 4 || sol[..4].windows(2).any(|w| w[0].x >= w[1].x) {
        return Err(BoundsError::Unordered);
    }
    let i = &set.instance;
    let g = (&i.r * &i.a).gcd(&(&i.s * &i.b));
    if !g.is_one() {
        return Err(BoundsError::NotCoprime(g.to_string()));
    }
    let z = sol[3].x.max(sol[..4].iter().map(|s| s.y).max().unwrap_or(0));
    Ok(ZBounds::check(&i.a, sol[2].x - sol[1].x, &i.s, z))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaEntry {
    #[serde(with = "crate::serde_big::natural")]
    pub p: Natural,
    /// Least `n >= 1` with `b^n ≡ ±1 (mod p)`.
    pub n: u64,
    /// Largest valuation of `b^n - 1` and `b^n + 1` at `p`.
    pub g: u32,
    /// Sign achieving `g`: `+1` for `b^n + 1`, `-1` for `b^n - 1`.
    pub sign: i8,
}

/// For `a, b` coprime: whenever `a^x | b^y ± 1`, also `a^x | a_sigma * y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaCertificate {
    #[serde(with = "crate::serde_big::natural")]
    pub a: Natural,
    #[serde(with = "crate::serde_big::natural")]
    pub b: Natural,
    pub entries: Vec<SigmaEntry>,
    #[serde(with = "crate::serde_big::natural")]
    pub a_sigma: Natural,
}

impl SigmaCertificate {
    /// `σ` as a float, for display only.
    pub fn sigma_f64(&self) -> f64 {
        let num: f64 = self
            .entries
            .iter()
            .map(|e| e.g as f64 * e.p.to_f64().unwrap_or(f64::INFINITY).ln())
            .sum();
        num / self.a.to_f64().unwrap_or(f64::INFINITY).ln()
    }
}

/// `v_p(base^n + sign)` computed modulo growing powers of `p`, so the power
/// itself is never formed.
fn valuation_of_pow_pm(p: &Natural, base: &Natural, n: u64, sign: i8) -> u32 {
    let mut k = 4u32;
    loop {
        let m = num_traits::pow::pow(p.clone(), k as usize);
        let t = base.modpow(&Natural::from(n), &m);
        let v = if sign > 0 { (t + 1u32) % &m } else { (t + &m - 1u32) % &m };
        if !v.is_zero() {
            return valuation_big(p, &v).expect("nonzero");
        }
        k *= 2;
    }
}

pub fn sigma(a: &Natural, b: &Natural) -> Result<SigmaCertificate, BoundsError> {
    let two = Natural::from(2u32);
    if *a < two || *b < two {
        return Err(BoundsError::Invalid("need a, b >= 2".into()));
    }
    let g = a.gcd(b);
    if !g.is_one() {
        return Err(BoundsError::BasesNotCoprime(g.to_string()));
    }
    let mut entries = Vec::new();
    let mut a_sigma = Natural::one();
    for (p, _) in factor(a)?.iter() {
        let n = if *p == two {
            1
        } else {
            let o = mult_order(&b.clone().into(), p)?;
            let o = o.to_u64().ok_or_else(|| BoundsError::Invalid("order too large".into()))?;
            if o % 2 == 0 {
                o / 2
            } else {
                o
            }
        };
        let gp = valuation_of_pow_pm(p, b, n, 1);
        let gm = valuation_of_pow_pm(p, b, n, -1);
        let (g, sign) = if gp >= gm { (gp, 1) } else { (gm, -1) };
        a_sigma *= num_traits::pow::pow(p.clone(), g as usize);
        entries.push(SigmaEntry { p: p.clone(), n, g, sign });
    }
    Ok(SigmaCertificate { a: a.clone(), b: b.clone(), entries, a_sigma })
}

/// Largest `y3` with `b^y3 <= B_σ * gap_bound`, where `B_σ` is the σ
/// certificate of `b` against `a`. Any `y3` with `b^y3 | B_σ (x4 - x3)` and
/// `0 < x4 - x3 <= gap_bound` obeys it.
pub fn sigma_divisibility_cut(a: &Natural, b: &Natural, gap_bound: &Natural) -> Result<u64, BoundsError> {
    let cert = sigma(b, a)?;
    Ok(floor_log(b, &(&cert.a_sigma * gap_bound)))
}

/// Largest `y` with `b^y <= n` (`n >= 1`).
pub fn floor_log(b: &Natural, n: &Natural) -> u64 {
    let mut y = 0;
    let mut p = b.clone();
    while &p <= n {
        y += 1;
        p *= b;
    }
    y
}

/// Least `k` with `p^k >= n`.
fn ceil_log(p: u64, n: &Natural) -> u32 {
    let mut k = 0;
    let mut q = Natural::one();
    while &q < n {
        q *= p;
        k += 1;
    }
    k
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanBranch {
    /// Exponents `k_i` of the split, one per prime of `b` in increasing order.
    pub ks: Vec<u32>,
    pub ns: Vec<u64>,
    pub alphas: Vec<u8>,
    #[serde(with = "crate::serde_big::natural")]
    pub modulus: Natural,
    /// Smallest `a >= 2` in any surviving residue class, absent when the
    /// congruences have no common root.
    pub min_a: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanVerdict {
    Clean,
    NotClean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaScanReport {
    pub b: u64,
    #[serde(with = "crate::serde_big::natural")]
    pub threshold: Natural,
    #[serde(with = "crate::serde_big::natural")]
    pub a_bound: Natural,
    pub primes: Vec<u64>,
    pub branches: Vec<ScanBranch>,
    /// Smallest `a` over all branches.
    pub min_a: Option<String>,
    pub verdict: ScanVerdict,
}

/// Every exponent split `(k_1, ..., k_m)` with `Π p_i^{k_i} >= threshold`
/// reached by fixing `k_m, ..., k_2` first and taking the least admissible
/// `k_1 >= 1`. Each free `k_i` runs from 1 up to the least exponent that
/// alone reaches what is left of the threshold.
fn splits(primes: &[u64], threshold: &Natural) -> Vec<Vec<u32>> {
    fn rec(primes: &[u64], rest: &Natural, tail: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let m = primes.len();
        if m == 1 {
            let k1 = ceil_log(primes[0], rest).max(1);
            let mut ks = vec![k1];
            ks.extend(tail.iter().rev());
            out.push(ks);
            return;
        }
        let p = primes[m - 1];
        let top = ceil_log(p, rest).max(1);
        for k in 1..=top {
            let pk = num_traits::pow::pow(Natural::from(p), k as usize);
            let next = rest.div_ceil(&pk);
            tail.push(k);
            rec(&primes[..m - 1], &next, tail, out);
            tail.pop();
        }
    }
    let mut out = Vec::new();
    rec(primes, threshold, &mut Vec::new(), &mut out);
    out
}

fn divisors_u64(n: u64) -> Vec<u64> {
    let mut d: Vec<u64> = (1..=n).take_while(|i| i * i <= n).filter(|i| n % i == 0).collect();
    let big: Vec<u64> = d.iter().rev().map(|i| n / i).filter(|j| j * j != n).collect();
    d.extend(big);
    d
}

/// Roots of `x^n + (-1)^alpha` modulo `p^k`, found modulo `p` by scanning
/// and then lifted.
fn lifted_roots(p: u64, n: u64, alpha: u8, k: u32) -> Result<Vec<Natural>, BoundsError> {
    let target = if alpha == 0 { p - 1 } else { 1 };
    let pn = Natural::from(p);
    let mut out = Vec::new();
    for x in 1..p {
        if pow_mod_u64(x, n, p) == target {
            out.push(hensel_lift(n, alpha, &pn, &Natural::from(x), k)?);
        }
    }
    Ok(out)
}

fn crt_pair(r1: &Natural, m1: &Natural, r2: &Natural, m2: &Natural) -> Natural {
    // m1, m2 coprime: x = r1 + m1 * ((r2 - r1) * m1^{-1} mod m2)
    let inv = mod_inverse(m1, m2);
    let diff = (r2 + m2 - (r1 % m2)) % m2;
    r1 + m1 * ((diff * inv) % m2)
}

fn mod_inverse(a: &Natural, m: &Natural) -> Natural {
    let a = num_bigint::BigInt::from(a % m);
    let m_i = num_bigint::BigInt::from(m.clone());
    let e = a.extended_gcd(&m_i);
    e.x.mod_floor(&m_i).to_biguint().expect("nonnegative")
}

/// Enumerates the residue classes of `a` for which `b^σ_b(a)` would reach
/// `threshold`, and reports the smallest `a` in each. The verdict is clean
/// when every such `a` exceeds `a_bound`. Only odd `b` is handled.
pub fn sigma_scan(b: u64, threshold: &Natural, a_bound: &Natural) -> Result<SigmaScanReport, BoundsError> {
    if b < 2 {
        return Err(BoundsError::Invalid("need b >= 2".into()));
    }
    let primes: Vec<u64> = factor(&Natural::from(b))?
        .iter()
        .map(|(p, _)| p.to_u64().expect("small"))
        .collect();
    if primes[0] == 2 {
        return Err(BoundsError::EvenPrime(2));
    }
    let two = Natural::from(2u32);
    let mut branches = Vec::new();
    for ks in splits(&primes, threshold) {
        // Per prime: the options (n, alpha, roots mod p^k).
        let mut per_prime = Vec::new();
        for (i, &p) in primes.iter().enumerate() {
            let mut opts = Vec::new();
            for n in divisors_u64((p - 1) / 2) {
                for alpha in [0u8, 1] {
                    opts.push((n, alpha, lifted_roots(p, n, alpha, ks[i])?));
                }
            }
            per_prime.push(opts);
        }
        let moduli: Vec<Natural> = primes
            .iter()
            .zip(&ks)
            .map(|(&p, &k)| num_traits::pow::pow(Natural::from(p), k as usize))
            .collect();
        let modulus: Natural = moduli.iter().product();
        // Walk the product of per-prime options.
        let mut idx = vec![0usize; primes.len()];
        loop {
            let mut classes = vec![(Natural::zero(), Natural::one())];
            for (i, opts) in per_prime.iter().enumerate() {
                let roots = &opts[idx[i]].2;
                let mut next = Vec::with_capacity(classes.len() * roots.len());
                for (r, m) in &classes {
                    for root in roots {
                        next.push((crt_pair(r, m, root, &moduli[i]), m * &moduli[i]));
                    }
                }
                classes = next;
            }
            let min_a = classes
                .iter()
                .map(|(r, m)| if r < &two { r + m } else { r.clone() })
                .min();
            branches.push(ScanBranch {
                ks: ks.clone(),
                ns: idx.iter().enumerate().map(|(i, &j)| per_prime[i][j].0).collect(),
                alphas: idx.iter().enumerate().map(|(i, &j)| per_prime[i][j].1).collect(),
                modulus: modulus.clone(),
                min_a: min_a.map(|v| v.to_string()),
            });
            // Advance the mixed-radix counter.
            let mut i = 0;
            loop {
                if i == idx.len() {
                    break;
                }
                idx[i] += 1;
                if idx[i] < per_prime[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == idx.len() {
                break;
            }
        }
    }
    let min_a = branches
        .iter()
        .filter_map(|br| br.min_a.as_ref().map(|s| s.parse::<Natural>().expect("decimal")))
        .min();
    let verdict = match &min_a {
        Some(m) if m <= a_bound => ScanVerdict::NotClean,
        _ => ScanVerdict::Clean,
    };
    Ok(SigmaScanReport {
        b,
        threshold: threshold.clone(),
        a_bound: a_bound.clone(),
        primes,
        branches,
        min_a: min_a.map(|v| v.to_string()),
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SolutionSet;
    use proptest::prelude::*;

    fn nat(n: u64) -> Natural {
        Natural::from(n)
    }

    #[test]
    fn z_bounds_examples() {
        let set = SolutionSet::parse("(3,2,5,1,2; 0,1,1,0,2,1,3,4)").unwrap();
        let z = z_bounds(&set).unwrap();
        assert_eq!(z.z, 4);
        assert_eq!(z.a_gap_power, nat(3));
        assert!(z.possible());
        assert!(!ZBounds::check(&nat(3), 2, &nat(2), 4).possible());
        assert!(!ZBounds::check(&nat(3), 1, &nat(6), 4).possible());
        let unordered = SolutionSet::parse("(3,2,5,1,2; 1,0,0,1,2,1,3,4)").unwrap();
        assert_eq!(z_bounds(&unordered), Err(BoundsError::Unordered));
    }

    #[test]
    fn z_bounds_accept_theorem_rows() {
        for row in crate::model::theorem1_rows() {
            for s in [row.clone(), row.associate()] {
                let s = s.sorted();
                if s.solutions.len() < 4 {
                    continue;
                }
                for start in 0..=s.solutions.len() - 4 {
                    let sub = s.subset(&(start..start + 4).collect::<Vec<_>>());
                    if let Ok(z) = z_bounds(&sub) {
                        assert!(z.possible(), "{sub}");
                    }
                }
            }
        }
    }

    #[test]
    fn sigma_examples() {
        let c = sigma(&nat(2), &nat(3)).unwrap();
        assert_eq!((c.entries[0].n, c.entries[0].g), (1, 2));
        assert_eq!(c.a_sigma, nat(4));
        let c = sigma(&nat(3), &nat(2)).unwrap();
        assert_eq!((c.entries[0].n, c.entries[0].g), (1, 1));
        assert_eq!(c.a_sigma, nat(3));
        let c = sigma(&nat(6), &nat(5)).unwrap();
        let got: Vec<(u64, u64, u32)> =
            c.entries.iter().map(|e| (e.p.to_u64().unwrap(), e.n, e.g)).collect();
        assert_eq!(got, vec![(2, 1, 2), (3, 1, 1)]);
        assert_eq!(c.a_sigma, nat(12));
        assert!(sigma(&nat(6), &nat(4)).is_err());
    }

    /// a^x | b^y ± 1 implies a^x | A_σ y, checked over y ≤ 10⁴ for small
    /// bases by direct modular arithmetic.
    #[test]
    fn sigma_conclusion_small_oracle() {
        for (a, b) in [(2u64, 3u64), (3, 2), (6, 5)] {
            let a_sigma = sigma(&nat(a), &nat(b)).unwrap().a_sigma.to_u64().unwrap();
            for y in 1..=10_000u64 {
                let mut ax = a as u128;
                for _ in 0..40 {
                    let m = ax as u64;
                    let bm = pow_mod_u64(b % m, y, m);
                    if (bm + 1) % m == 0 || bm == 1 % m {
                        assert_eq!((a_sigma as u128 * y as u128) % ax, 0, "a={a} b={b} y={y}");
                    } else {
                        break;
                    }
                    ax *= a as u128;
                    if ax > u64::MAX as u128 / 4 {
                        break;
                    }
                }
            }
        }
    }

    #[test]
    fn divisibility_cut_examples() {
        // b = 2 against odd a ≡ 3 mod 8 gives B_σ = 4.
        let cut = sigma_divisibility_cut(&nat(3), &nat(2), &nat(1_000_000)).unwrap();
        assert_eq!(sigma(&nat(2), &nat(3)).unwrap().a_sigma, nat(4));
        assert_eq!(cut, 21);
        assert_eq!(sigma_divisibility_cut(&nat(3), &nat(2), &nat(1)).unwrap(), 2);
        // Full-scale ceiling: B_σ < 10^22 and gap < 8·10^14 keep b^y3 below 8·10^36.
        let b = nat(997);
        let a = nat(1_000_003);
        let bs = sigma(&b, &a).unwrap().a_sigma;
        assert!(bs < nat(10).pow(22));
        let cut = sigma_divisibility_cut(&a, &b, &nat(800_000_000_000_000)).unwrap();
        let ceiling = (8e36f64.ln() / 997f64.ln()).floor() as u64;
        assert!(cut <= ceiling);
    }

    #[test]
    fn scan_examples() {
        let r = sigma_scan(3, &nat(243), &nat(1000)).unwrap();
        assert!(r.branches.iter().all(|b| b.ks == vec![5]));
        assert_eq!(r.min_a.as_deref(), Some("242"));
        assert_eq!(r.verdict, ScanVerdict::NotClean);
        let r = sigma_scan(5, &nat(5), &nat(2)).unwrap();
        assert_eq!(r.verdict, ScanVerdict::NotClean);
        let r = sigma_scan(15, &nat(10_000), &nat(1_000_000)).unwrap();
        assert_eq!(r.primes, vec![3, 5]);
        assert!(r.branches.iter().all(|b| b.ks.len() == 2));
        assert!(sigma_scan(12, &nat(100), &nat(100)).is_err());
    }

    #[test]
    fn scan_agrees_with_brute_force() {
        const LIMIT: u64 = 20_000;
        for b in (3..=30u64).step_by(2) {
            // B_σ of b against every a up to the limit, by direct computation.
            let b_sigma: Vec<(u64, Natural)> = (2..=LIMIT)
                .filter(|&a| num_integer::gcd(a, b) == 1)
                .map(|a| (a, sigma(&nat(b), &nat(a)).unwrap().a_sigma))
                .collect();
            for threshold in [10u64, 100, 1000, 30_000, 100_000] {
                let r = sigma_scan(b, &nat(threshold), &nat(0)).unwrap();
                let scan_min: u64 = r.min_a.unwrap().parse().unwrap();
                let brute = b_sigma.iter().find(|(_, s)| *s >= nat(threshold)).map(|(a, _)| *a);
                if scan_min <= LIMIT {
                    assert_eq!(brute, Some(scan_min), "b={b} T={threshold}");
                } else {
                    assert_eq!(brute, None, "b={b} T={threshold}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn scan_verdict_is_monotone(b in (1u64..15).prop_map(|k| 2 * k + 1), t in 2u64..5000, a1 in 2u64..5000, a2 in 2u64..5000) {
            let (lo, hi) = (a1.min(a2), a1.max(a2));
            let low = sigma_scan(b, &nat(t), &nat(lo)).unwrap().verdict;
            let high = sigma_scan(b, &nat(t), &nat(hi)).unwrap().verdict;
            prop_assert!(!(low == ScanVerdict::NotClean && high == ScanVerdict::Clean));
            let bigger_t = sigma_scan(b, &nat(t * 7), &nat(lo)).unwrap().verdict;
            prop_assert!(!(low == ScanVerdict::Clean && bigger_t == ScanVerdict::NotClean));
        }

        #[test]
        fn sigma_conclusion_holds(a in 2u64..=30, b in 2u64..=30, x in 1u32..=12, y in 1u64..=12) {
            prop_assume!(num_integer::gcd(a, b) == 1);
            let ax = nat(a).pow(x);
            let by = nat(b).pow(y as u32);
            let divides = ((&by + 1u32) % &ax).is_zero() || ((&by - 1u32) % &ax).is_zero();
            if divides {
                let a_sigma = sigma(&nat(a), &nat(b)).unwrap().a_sigma;
                prop_assert!(((a_sigma * y) % &ax).is_zero());
            }
        }
    }
}
