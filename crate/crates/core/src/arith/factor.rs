//! Trial division, Brent's variant of Pollard rho, and Miller–Rabin.

use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::modular::is_perfect_power;
use super::ArithError;

/// Prime factorization as strictly increasing `(prime, exponent)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Factorization(#[serde(with = "crate::serde_big::pairs")] Vec<(BigUint, u32)>);

impl Factorization {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a factorization from arbitrary `(prime, exponent)` pairs,
    /// merging repeats and sorting.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (BigUint, u32)>) -> Self {
        let mut f = Self::new();
        for (p, e) in pairs {
            f.insert(p, e);
        }
        f
    }

    pub fn insert(&mut self, p: BigUint, e: u32) {
        if e == 0 {
            return;
        }
        match self.0.binary_search_by(|(q, _)| q.cmp(&p)) {
            Ok(i) => self.0[i].1 += e,
            Err(i) => self.0.insert(i, (p, e)),
        }
    }

    pub fn merge(&mut self, other: &Factorization) {
        for (p, e) in other.iter() {
            self.insert(p.clone(), *e);
        }
    }

    /// Every exponent multiplied by `k`.
    pub fn pow(&self, k: u32) -> Factorization {
        Factorization(self.0.iter().map(|(p, e)| (p.clone(), e * k)).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &(BigUint, u32)> {
        self.0.iter()
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.0.iter().map(|(p, _)| p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn product(&self) -> BigUint {
        self.0.iter().fold(BigUint::one(), |acc, (p, e)| {
            acc * num_traits::pow::pow(p.clone(), *e as usize)
        })
    }

    /// All positive divisors, unsorted.
    pub fn divisors(&self) -> Vec<BigUint> {
        let mut out = vec![BigUint::one()];
        for (p, e) in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (*e as usize + 1));
            for d in &out {
                let mut pk = d.clone();
                next.push(pk.clone());
                for _ in 0..*e {
                    pk *= p;
                    next.push(pk.clone());
                }
            }
            out = next;
        }
        out
    }

    pub fn as_slice(&self) -> &[(BigUint, u32)] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorOptions {
    /// Trial division runs through all primes up to this bound.
    pub trial_bound: u64,
    /// Cap on Pollard-rho iterations spent on a single composite cofactor.
    pub rho_iterations: u64,
}

impl Default for FactorOptions {
    fn default() -> Self {
        Self {
            trial_bound: 1_000_000,
            rho_iterations: 100_000_000,
        }
    }
}

const TRIAL_TABLE_LIMIT: u64 = 1_000_000;

/// Primes below one million, computed once.
pub fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        primes_up_to(TRIAL_TABLE_LIMIT)
            .into_iter()
            .map(|p| p as u32)
            .collect()
    })
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

pub fn factor(n: &BigUint) -> Result<Factorization, ArithError> {
    factor_with(n, &FactorOptions::default())
}

/// Complete factorization of `n >= 2`. When a composite cofactor survives the
/// rho budget, the error carries everything found so far.
pub fn factor_with(n: &BigUint, opts: &FactorOptions) -> Result<Factorization, ArithError> {
    if *n < BigUint::from(2u32) {
        return Err(ArithError::InvalidArgument(format!(
            "cannot factor {n}; need n >= 2"
        )));
    }
    let mut found = Factorization::new();
    let mut rest = n.clone();

    let bound = opts.trial_bound.min(TRIAL_TABLE_LIMIT);
    let table = small_primes();
    if let Some(mut r) = rest.to_u64() {
        for &p in table {
            let p = p as u64;
            if p > bound || p * p > r {
                break;
            }
            if r % p == 0 {
                let mut e = 0;
                while r % p == 0 {
                    r /= p;
                    e += 1;
                }
                found.insert(BigUint::from(p), e);
            }
        }
        rest = BigUint::from(r);
    } else {
        for &p in table {
            let p = p as u64;
            if p > bound {
                break;
            }
            if (&rest % p).is_zero() {
                let mut e = 0;
                while (&rest % p).is_zero() {
                    rest /= p;
                    e += 1;
                }
                found.insert(BigUint::from(p), e);
            }
            if rest.bits() <= 40 && p * p > rest.to_u64().unwrap_or(u64::MAX) {
                break;
            }
        }
    }
    if rest.is_one() {
        return Ok(found);
    }
    let trial_done = bound.saturating_mul(bound);

    let mut stack = vec![(rest, 1u32)];
    while let Some((m, mult)) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if m.to_u64().is_some_and(|v| v < trial_done) || is_prime(&m) {
            found.insert(m, mult);
            continue;
        }
        if let Some((base, k)) = is_perfect_power(&m) {
            stack.push((base, mult * k));
            continue;
        }
        match split(&m, opts.rho_iterations) {
            Some(d) => {
                let other = &m / &d;
                stack.push((d, mult));
                stack.push((other, mult));
            }
            None => {
                return Err(ArithError::FactorTimeout {
                    partial: found,
                    cofactor: m.to_string(),
                });
            }
        }
    }
    Ok(found)
}

fn split(n: &BigUint, budget: u64) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    if let Some(v) = n.to_u64() {
        return rho_u64(v, budget).map(BigUint::from);
    }
    rho_big(n, budget)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Brent's cycle-finding rho over u64 with batched gcds.
fn rho_u64(n: u64, budget: u64) -> Option<u64> {
    let mut spent = 0u64;
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut y = 2u64;
        let mut r = 1u64;
        let mut q = 1u64;
        let mut g = 1u64;
        let mut x = y;
        let mut ys = y;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                let steps = BATCH.min(r - k);
                for _ in 0..steps {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                spent += steps;
                g = num_integer::gcd(q, n);
                k += steps;
            }
            r *= 2;
            if spent > budget {
                return None;
            }
        }
        if g == n {
            loop {
                ys = f(ys);
                g = num_integer::gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return Some(g);
        }
        if spent > budget || c > 64 {
            return None;
        }
    }
    None
}

fn rho_big(n: &BigUint, budget: u64) -> Option<BigUint> {
    let mut spent = 0u64;
    let one = BigUint::one();
    for c in 1u32..=64 {
        let f = |x: &BigUint| (x * x + c) % n;
        let mut y = BigUint::from(2u32);
        let mut r = 1u64;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        const BATCH: u64 = 128;
        while g == one {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                let steps = BATCH.min(r - k);
                for _ in 0..steps {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                spent += steps;
                g = q.gcd(n);
                k += steps;
            }
            r *= 2;
            if spent > budget {
                return None;
            }
        }
        if g == *n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g > one {
                    break;
                }
            }
        }
        if g != *n {
            return Some(g);
        }
    }
    None
}

const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Primality test: deterministic below 3.3·10²⁴ (first 13 prime bases),
/// otherwise 64 Miller–Rabin rounds with bases drawn from a generator seeded
/// by `n` itself, so the answer is reproducible.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    if n.is_even() {
        return false;
    }
    for &p in &small_primes()[..200] {
        if (n % p).is_zero() {
            return false;
        }
    }
    let bound: BigUint = "3317044064679887385961981".parse().expect("constant");
    if *n < bound {
        return MR_BASES
            .iter()
            .all(|&b| miller_rabin_big(n, &BigUint::from(b)));
    }
    let seed = n.iter_u64_digits().fold(0x9e37_79b9_7f4a_7c15u64, |acc, d| {
        acc.rotate_left(7) ^ d
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hi = n - 2u32;
    let lo = BigUint::from(2u32);
    (0..64).all(|_| {
        let b = rng.gen_biguint_range(&lo, &hi);
        miller_rabin_big(n, &b)
    })
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &MR_BASES[..12] {
        let mut x = super::modular::pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn miller_rabin_big(n: &BigUint, a: &BigUint) -> bool {
    let nm1 = n - 1u32;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    let mut x = a.modpow(&d, n);
    if x.is_one() || x == nm1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == nm1 {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn pairs(f: &Factorization) -> Vec<(u64, u32)> {
        f.iter().map(|(p, e)| (p.to_u64().unwrap(), *e)).collect()
    }

    #[test]
    fn small_examples() {
        assert_eq!(pairs(&factor(&nat(84)).unwrap()), vec![(2, 2), (3, 1), (7, 1)]);
        let m61 = (BigUint::one() << 61) - 1u32;
        let f = factor(&m61).unwrap();
        assert_eq!(f.as_slice(), &[(m61.clone(), 1)]);
        assert!(is_prime(&m61));
    }

    #[test]
    fn cube_plus_one_identity() {
        let x = nat(1477);
        let n = &x * &x * &x + 1u32;
        let f = factor(&n).unwrap();
        assert_eq!(f.product(), n);
        // x^3 + 1 = (x + 1)(x^2 - x + 1)
        assert_eq!(nat(1478) * (&x * &x - &x + 1u32), n);
        let quad = &x * &x - &x + 1u32;
        let fq = factor(&quad).unwrap();
        let f1478 = factor(&nat(1478)).unwrap();
        let mut merged = fq.clone();
        merged.merge(&f1478);
        assert_eq!(merged, f);
    }

    #[test]
    fn reconstructs_up_to_a_million() {
        for n in (2u64..1_000_000).step_by(997).chain(999_900..1_000_000) {
            let f = factor(&nat(n)).unwrap();
            assert_eq!(f.product(), nat(n));
            let mut last = 0u64;
            for (p, e) in pairs(&f) {
                assert!(p > last && e > 0);
                assert!((2..p).take_while(|d| d * d <= p).all(|d| p % d != 0));
                last = p;
            }
        }
    }

    #[test]
    fn large_semiprimes_and_powers() {
        let p: BigUint = "1000000007".parse().unwrap();
        let q: BigUint = "998244353".parse().unwrap();
        let r: BigUint = "18446744073709551557".parse().unwrap();
        let n = &p * &q * &r;
        let f = factor(&n).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.product(), n);
        let sq = &r * &r * &p;
        let f = factor(&sq).unwrap();
        assert_eq!(f.product(), sq);
        assert!(f.iter().any(|(x, e)| *x == r && *e == 2));
        let p32: BigUint = "4294967311".parse().unwrap();
        let n = &p32 * &r * &r * &r;
        let f = factor(&n).unwrap();
        assert_eq!(f.as_slice(), &[(p32, 1), (r, 3)]);
    }

    #[test]
    fn timeout_surfaces_partial_result() {
        let p: BigUint = "1000000007".parse().unwrap();
        let q: BigUint = "1000000009".parse().unwrap();
        let n = &p * &q * 12u32;
        let opts = FactorOptions {
            trial_bound: 100,
            rho_iterations: 10,
        };
        match factor_with(&n, &opts) {
            Err(ArithError::FactorTimeout { partial, cofactor }) => {
                assert_eq!(pairs(&partial), vec![(2, 2), (3, 1)]);
                assert_eq!(cofactor, (&p * &q).to_string());
            }
            other => panic!("expected timeout, got {other:?}"),
        }
    }

    #[test]
    fn primality_agrees_with_sieve() {
        let sieve: std::collections::HashSet<u64> = primes_up_to(20_000).into_iter().collect();
        for n in 0..20_000u64 {
            assert_eq!(is_prime(&nat(n)), sieve.contains(&n), "n={n}");
        }
        // Carmichael numbers and strong pseudoprimes to small bases.
        for n in [561u64, 41041, 3215031751, 3825123056546413051] {
            assert!(!is_prime(&nat(n)));
        }
        let big_prime: BigUint = "170141183460469231731687303715884105727".parse().unwrap();
        assert!(is_prime(&big_prime));
        assert!(!is_prime(&(&big_prime * 3u32)));
    }

    #[test]
    fn divisors_of_factorization() {
        let f = factor(&nat(360)).unwrap();
        let mut d: Vec<u64> = f.divisors().iter().map(|x| x.to_u64().unwrap()).collect();
        d.sort();
        let expect: Vec<u64> = (1..=360).filter(|k| 360 % k == 0).collect();
        assert_eq!(d, expect);
    }
}
