//! Growing proven divisors of the exponent gaps `x4 - x3` and `y4 - y3`
//! from multiplicative orders until one exceeds the global bound.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factor_with, is_prime, pow_u64, valuation_big, ArithError, FactorOptions, Factorization};
use crate::model::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    X,
    Y,
}

/// Why a prime is known to divide `base^gap + (-1)^sign` for the gaining side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSource {
    /// The prime divides the fixed factor `s b^y3` (or `r a^x3`).
    Seed,
    /// The prime divides `other_base^exponent ± 1`, which divides the other
    /// side's factor.
    Power {
        #[serde(with = "crate::serde_big::natural")]
        exponent: BigUint,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapStep {
    /// The exponent gap that gains a divisor.
    pub side: Side,
    #[serde(with = "crate::serde_big::natural")]
    pub prime: BigUint,
    pub source: StepSource,
    /// A divisor of the order of the side's base modulo `prime`, with the
    /// exact power of two.
    #[serde(with = "crate::serde_big::natural")]
    pub order: BigUint,
    #[serde(with = "crate::serde_big::natural")]
    pub x0: BigUint,
    #[serde(with = "crate::serde_big::natural")]
    pub y0: BigUint,
}

/// A proven divisor `d` of a gap; `odd` records that the gap over `d` is odd.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapDivisor {
    #[serde(with = "crate::serde_big::natural")]
    pub d: BigUint,
    pub odd: bool,
}

impl GapDivisor {
    fn new() -> Self {
        Self {
            d: BigUint::one(),
            odd: false,
        }
    }

    /// Folds in `e | gap` (and, with `odd_e`, `gap/e` odd). `None` means the
    /// constraints are inconsistent.
    fn absorb(&self, e: &BigUint, odd_e: bool) -> Option<Self> {
        let d = self.d.lcm(e);
        let v = v2(&d);
        if odd_e && v != v2(e) {
            return None;
        }
        if self.odd && v != v2(&self.d) {
            return None;
        }
        Some(Self {
            d,
            odd: self.odd || odd_e,
        })
    }
}

fn v2(n: &BigUint) -> u64 {
    n.trailing_zeros().unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapState {
    pub anchor: (u64, u64),
    /// `γ, δ`: 1 when the gap factor is `base^gap - 1`, 0 for `+ 1`.
    pub gamma: u8,
    pub delta: u8,
    pub x: GapDivisor,
    pub y: GapDivisor,
    pub history: Vec<BootstrapStep>,
    pub exceeded: Option<Side>,
    /// The step whose constraint cannot hold, if any.
    pub contradiction: Option<usize>,
}

impl BootstrapState {
    pub fn x0(&self) -> &BigUint {
        &self.x.d
    }

    pub fn y0(&self) -> &BigUint {
        &self.y.d
    }

    pub fn succeeded(&self) -> bool {
        self.exceeded.is_some() || self.contradiction.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapEffort {
    pub factor: FactorOptions,
    /// Cyclotomic pieces larger than this many bits are not factored.
    pub max_bits: u64,
    pub max_rounds: u32,
}

impl Default for BootstrapEffort {
    fn default() -> Self {
        Self {
            factor: FactorOptions {
                trial_bound: 100_000,
                rho_iterations: 2_000_000,
            },
            max_bits: 1200,
            max_rounds: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopReason {
    Stalled,
    RoundLimit,
}

/// The gaining side's base and coefficient, and the other side's base.
struct View<'a> {
    base: &'a BigUint,
    other_base: &'a BigUint,
    /// `r` when gaining on X; primes of `r a` are excluded.
    own_coeff: &'a BigUint,
}

fn view(inst: &Instance, side: Side) -> View<'_> {
    match side {
        Side::X => View {
            base: &inst.a,
            other_base: &inst.b,
            own_coeff: &inst.r,
        },
        Side::Y => View {
            base: &inst.b,
            other_base: &inst.a,
            own_coeff: &inst.s,
        },
    }
}

fn divides(p: &BigUint, n: &BigUint) -> bool {
    (n % p).is_zero()
}

/// Greatest divisor of the order of `base` mod the odd prime `p` that the
/// available factorization of `p - 1` certifies. The power of two is always
/// exact.
pub fn order_divisor(base: &BigUint, p: &BigUint, opts: &FactorOptions) -> BigUint {
    let pm1 = p - 1u32;
    if pm1.is_one() || pm1.is_zero() {
        return BigUint::one();
    }
    let fac = match factor_with(&pm1, opts) {
        Ok(f) => f,
        Err(ArithError::FactorTimeout { partial, .. }) => partial,
        Err(_) => return BigUint::one(),
    };
    let mut e = BigUint::one();
    for (q, _) in fac.iter() {
        let k = valuation_big(q, &pm1).unwrap_or(0);
        e *= pow_u64(q, prime_part_exponent(base, p, q, k) as u64);
    }
    e
}

/// `j` with `q^j || ord(base mod p)`, given `q^k || p - 1`.
fn prime_part_exponent(base: &BigUint, p: &BigUint, q: &BigUint, k: u32) -> u32 {
    let pm1 = p - 1u32;
    let cof = &pm1 / pow_u64(q, k as u64);
    let mut t = base.modpow(&cof, p);
    let mut j = 0;
    while !t.is_one() {
        t = t.modpow(q, p);
        j += 1;
        if j > k {
            break;
        }
    }
    j
}

/// Checks that `e` divides the order of `base` mod `p` and carries its exact
/// power of two.
pub fn verify_order_divisor(base: &BigUint, p: &BigUint, e: &BigUint) -> bool {
    if !is_prime(p) || divides(p, base) {
        return false;
    }
    if *p == BigUint::from(2u32) {
        return e.is_one();
    }
    let pm1 = p - 1u32;
    if e.is_zero() || !divides(e, &pm1) {
        return false;
    }
    let two = BigUint::from(2u32);
    let k2 = valuation_big(&two, &pm1).unwrap_or(0);
    if prime_part_exponent(base, p, &two, k2) as u64 != v2(e) {
        return false;
    }
    if e.is_one() {
        return true;
    }
    let fe = match crate::arith::factor(e) {
        Ok(f) => f,
        Err(_) => return false,
    };
    let ok = fe.iter().all(|(q, j)| {
        let k = valuation_big(q, &pm1).unwrap_or(0);
        prime_part_exponent(base, p, q, k) >= *j
    });
    ok
}

/// What a prime dividing `base^gap + (-1)^sign` says about the gap: a
/// divisor, whether the quotient is odd, or a contradiction (`None`).
fn constraint(order: &BigUint, sign_is_minus: bool) -> Option<(BigUint, bool)> {
    if sign_is_minus {
        Some((order.clone(), false))
    } else if order.is_even() {
        Some((order / 2u32, true))
    } else {
        None
    }
}

fn divisors_u64(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 1u64;
    while i * i <= n {
        if n % i == 0 {
            out.push(i);
            if i != n / i {
                out.push(n / i);
            }
        }
        i += 1;
    }
    out.sort_unstable();
    out
}

fn distinct_primes_u64(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn totient(n: u64) -> u64 {
    distinct_primes_u64(n)
        .into_iter()
        .fold(n, |acc, p| acc / p * (p - 1))
}

/// `Φ_d(a)` from `∏_{e | d} (a^{d/e} - 1)^{μ(e)}`.
pub fn cyclotomic_value(d: u64, a: &BigUint) -> BigUint {
    let ps = distinct_primes_u64(d);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for mask in 0u32..(1 << ps.len()) {
        let e: u64 = ps
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| *p)
            .product();
        let term = pow_u64(a, d / e) - 1u32;
        if mask.count_ones() % 2 == 0 {
            num *= term;
        } else {
            den *= term;
        }
    }
    num / den
}

/// Indices `d` with `base^n - 1 = ∏ Φ_d(base)` or, for `+ 1` with `n` of the
/// right parity, `base^n + 1 = ∏ Φ_d(base)`.
fn cyclotomic_indices(n: u64, minus: bool) -> Vec<u64> {
    if minus {
        divisors_u64(n)
    } else {
        let two_n = 2 * n;
        divisors_u64(two_n)
            .into_iter()
            .filter(|d| n % d != 0)
            .collect()
    }
}

struct Runner<'a> {
    inst: &'a Instance,
    bound: BigUint,
    effort: BootstrapEffort,
    state: BootstrapState,
    /// Cyclotomic indices already factored, per gaining side.
    done_indices: [BTreeSet<u64>; 2],
    used_primes: [BTreeSet<BigUint>; 2],
}

fn idx(side: Side) -> usize {
    match side {
        Side::X => 0,
        Side::Y => 1,
    }
}

impl Runner<'_> {
    fn sign_minus(&self, side: Side) -> bool {
        match side {
            Side::X => self.state.gamma == 1,
            Side::Y => self.state.delta == 1,
        }
    }

    fn gap(&self, side: Side) -> &GapDivisor {
        match side {
            Side::X => &self.state.x,
            Side::Y => &self.state.y,
        }
    }

    /// Folds one prime into the side; returns true when the run is over.
    fn take(&mut self, side: Side, p: BigUint, source: StepSource) -> bool {
        if p == BigUint::from(2u32) || !self.used_primes[idx(side)].insert(p.clone()) {
            return false;
        }
        let v = view(self.inst, side);
        let order = order_divisor(v.base, &p, &self.effort.factor);
        let constraint = constraint(&order, self.sign_minus(side));
        let next = constraint.and_then(|(e, odd)| self.gap(side).absorb(&e, odd));
        let contradiction = next.is_none();
        if let Some(g) = next {
            match side {
                Side::X => self.state.x = g,
                Side::Y => self.state.y = g,
            }
        }
        self.state.history.push(BootstrapStep {
            side,
            prime: p,
            source,
            order,
            x0: self.state.x.d.clone(),
            y0: self.state.y.d.clone(),
        });
        if contradiction {
            self.state.contradiction = Some(self.state.history.len() - 1);
            return true;
        }
        if self.gap(side).d > self.bound {
            self.state.exceeded = Some(side);
            return true;
        }
        false
    }

    fn seed(&mut self, side: Side, fixed_exp: u64) -> bool {
        // Primes of s b^y3 feed X; primes of r a^x3 feed Y.
        let (coeff, base) = match side {
            Side::X => (&self.inst.s, &self.inst.b),
            Side::Y => (&self.inst.r, &self.inst.a),
        };
        let mut primes: BTreeSet<BigUint> = BTreeSet::new();
        let mut parts = vec![coeff];
        if fixed_exp > 0 {
            parts.push(base);
        }
        for n in parts {
            if n.is_one() {
                continue;
            }
            let f = factor_with(n, &self.effort.factor).unwrap_or_else(|e| match e {
                ArithError::FactorTimeout { partial, .. } => partial,
                _ => Factorization::new(),
            });
            primes.extend(f.primes().cloned());
        }
        for p in primes {
            if self.take(side, p, StepSource::Seed) {
                return true;
            }
        }
        false
    }

    /// Uses the other side's divisor to grow `side`. Returns (finished, grew).
    fn grow(&mut self, side: Side) -> (bool, bool) {
        let other = match side {
            Side::X => Side::Y,
            Side::Y => Side::X,
        };
        let g = self.gap(other).clone();
        let minus = self.sign_minus(other);
        if !minus && !g.odd {
            return (false, false);
        }
        let Some(n) = g.d.to_u64() else {
            return (false, false);
        };
        let v = view(self.inst, side);
        let other_base = v.other_base.clone();
        let excluded = v.own_coeff * v.base;
        let before = self.gap(side).d.clone();
        let log2 = other_base.bits() as f64;
        for d in cyclotomic_indices(n, minus) {
            if (totient(d) as f64) * log2 > self.effort.max_bits as f64 {
                continue;
            }
            if !self.done_indices[idx(side)].insert(d) {
                continue;
            }
            let val = cyclotomic_value(d, &other_base);
            if val < BigUint::from(2u32) {
                continue;
            }
            let f = match factor_with(&val, &self.effort.factor) {
                Ok(f) => f,
                Err(ArithError::FactorTimeout { partial, .. }) => partial,
                Err(_) => continue,
            };
            for p in f.primes() {
                if divides(p, &excluded) {
                    continue;
                }
                let src = StepSource::Power {
                    exponent: g.d.clone(),
                };
                if self.take(side, p.clone(), src) {
                    return (true, true);
                }
            }
        }
        (false, self.gap(side).d != before)
    }
}

/// Runs one sign case from the anchor. The state is a certificate for that
/// case when [`BootstrapState::succeeded`] holds.
pub fn bootstrap_case(
    inst: &Instance,
    anchor: (u64, u64),
    gap_signs: (u8, u8),
    bound: &BigUint,
    effort: &BootstrapEffort,
) -> (BootstrapState, Option<StopReason>) {
    let mut run = Runner {
        inst,
        bound: bound.clone(),
        effort: *effort,
        state: BootstrapState {
            anchor,
            gamma: gap_signs.0,
            delta: gap_signs.1,
            x: GapDivisor::new(),
            y: GapDivisor::new(),
            history: Vec::new(),
            exceeded: None,
            contradiction: None,
        },
        done_indices: [BTreeSet::new(), BTreeSet::new()],
        used_primes: [BTreeSet::new(), BTreeSet::new()],
    };
    if run.seed(Side::X, anchor.1) || run.seed(Side::Y, anchor.0) {
        return (run.state, None);
    }
    for _ in 0..effort.max_rounds {
        let (fin, gy) = run.grow(Side::Y);
        if fin {
            return (run.state, None);
        }
        let (fin, gx) = run.grow(Side::X);
        if fin {
            return (run.state, None);
        }
        if !gx && !gy {
            return (run.state, Some(StopReason::Stalled));
        }
    }
    (run.state, Some(StopReason::RoundLimit))
}

/// The `(γ, δ)` of every sign pattern a later solution could have, given the
/// anchor's signs. A later solution cannot take `+ +` (it would exceed `c`)
/// or `- -` (the sum would be negative).
pub fn feasible_gap_signs(anchor_signs: (u8, u8)) -> Vec<(u8, u8)> {
    let (u3, v3) = anchor_signs;
    [(0u8, 1u8), (1, 0)]
        .into_iter()
        .map(|(u4, v4)| ((u4 == u3) as u8, (v4 == v3) as u8))
        .collect()
}

/// Replays a state, checking every step from scratch.
pub fn replay(inst: &Instance, state: &BootstrapState, bound: &BigUint) -> Result<(), String> {
    let (x3, y3) = state.anchor;
    let mut x = GapDivisor::new();
    let mut y = GapDivisor::new();
    let sb = &inst.s * pow_u64(&inst.b, y3);
    let ra = &inst.r * pow_u64(&inst.a, x3);
    for (i, step) in state.history.iter().enumerate() {
        let v = view(inst, step.side);
        let p = &step.prime;
        if !verify_order_divisor(v.base, p, &step.order) {
            return Err(format!("step {i}: {} is not a certified order divisor", step.order));
        }
        let (minus, other_gap, other_minus) = match step.side {
            Side::X => (state.gamma == 1, &y, state.delta == 1),
            Side::Y => (state.delta == 1, &x, state.gamma == 1),
        };
        match &step.source {
            StepSource::Seed => {
                let fixed = if step.side == Side::X { &sb } else { &ra };
                if !divides(p, fixed) {
                    return Err(format!("step {i}: {p} does not divide the fixed factor"));
                }
            }
            StepSource::Power { exponent } => {
                if !divides(exponent, &other_gap.d) {
                    return Err(format!("step {i}: exponent {exponent} is not a known divisor"));
                }
                if !other_minus && !(other_gap.odd && v2(exponent) == v2(&other_gap.d)) {
                    return Err(format!("step {i}: parity of {exponent} is not established"));
                }
                let r = v.other_base.modpow(exponent, p);
                let ok = if other_minus {
                    r.is_one()
                } else {
                    (r + 1u32) % p == BigUint::zero()
                };
                if !ok {
                    return Err(format!("step {i}: {p} does not divide the power"));
                }
                if divides(p, &(v.own_coeff * v.base)) {
                    return Err(format!("step {i}: {p} divides the excluded coefficient"));
                }
            }
        }
        let gap = if step.side == Side::X { &mut x } else { &mut y };
        match constraint(&step.order, minus).and_then(|(e, odd)| gap.absorb(&e, odd)) {
            Some(g) => *gap = g,
            None => {
                return if state.contradiction == Some(i) && i + 1 == state.history.len() {
                    Ok(())
                } else {
                    Err(format!("step {i}: unexpected contradiction"))
                };
            }
        }
        if step.x0 != x.d || step.y0 != y.d {
            return Err(format!("step {i}: recorded divisors do not match the replay"));
        }
    }
    if state.contradiction.is_some() {
        return Err("recorded contradiction did not replay".into());
    }
    match state.exceeded {
        Some(Side::X) if x.d > *bound => Ok(()),
        Some(Side::Y) if y.d > *bound => Ok(()),
        _ => Err("no divisor exceeds the bound".into()),
    }
}

pub(crate) fn gcd_condition(inst: &Instance) -> bool {
    let ra = &inst.r * &inst.a;
    let sb = &inst.s * &inst.b;
    ra.gcd(&sb).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{theorem1_rows, Instance};
    use num_bigint::BigInt;

    fn inst(a: u64, b: u64, c: u64, r: u64, s: u64) -> Instance {
        Instance::from_u64(a, b, c, r, s).unwrap()
    }

    #[test]
    fn cyclotomic_values() {
        let two = BigUint::from(2u32);
        assert_eq!(cyclotomic_value(1, &two), BigUint::from(1u32));
        assert_eq!(cyclotomic_value(6, &two), BigUint::from(3u32));
        assert_eq!(cyclotomic_value(12, &BigUint::from(3u32)), BigUint::from(73u32));
        let mut prod = BigUint::one();
        for d in cyclotomic_indices(10, false) {
            prod *= cyclotomic_value(d, &two);
        }
        assert_eq!(prod, BigUint::from(1025u32));
    }

    #[test]
    fn order_divisors_are_exact_when_factorable() {
        let opts = FactorOptions::default();
        for (base, p) in [(2u32, 7u32), (3, 7), (10, 101), (5, 1_000_003)] {
            let base = BigUint::from(base);
            let p = BigUint::from(p);
            let e = order_divisor(&base, &p, &opts);
            let exact = crate::arith::mult_order(&BigInt::from(base.clone()), &p).unwrap();
            assert_eq!(e, exact);
            assert!(verify_order_divisor(&base, &p, &e));
            assert!(!verify_order_divisor(&base, &p, &(e * 2u32)));
        }
    }

    #[test]
    fn row_two_anchor_keeps_dividing_the_true_gaps() {
        let i = inst(3, 2, 5, 1, 2);
        let (state, _) = bootstrap_case(&i, (1, 2), (1, 1), &BigUint::from(1000u32), &BootstrapEffort::default());
        assert!(!state.succeeded());
        for step in &state.history {
            assert!(divides(&step.x0, &BigUint::from(2u32)));
            assert!(divides(&step.y0, &BigUint::from(2u32)));
        }
        assert_eq!(state.y0(), &BigUint::from(2u32));
    }

    #[test]
    fn large_order_seed_certifies_immediately() {
        // 1000000007 divides s, and the order of 2 modulo it is huge.
        let p = 1_000_000_007u64;
        let i = inst(2, 3, 1, 1, p);
        let (state, stop) = bootstrap_case(&i, (0, 0), (1, 1), &BigUint::from(1000u32), &BootstrapEffort::default());
        assert!(stop.is_none());
        assert_eq!(state.exceeded, Some(Side::X));
        assert_eq!(state.history.len(), 1);
        let ord = crate::arith::mult_order(&BigInt::from(2), &BigUint::from(p)).unwrap();
        assert_eq!(state.history[0].order, ord);
        assert!(replay(&i, &state, &BigUint::from(1000u32)).is_ok());
    }

    #[test]
    fn tampered_history_is_rejected() {
        let i = inst(2, 3, 1, 1, 1_000_000_007);
        let bound = BigUint::from(1000u32);
        let (mut state, _) = bootstrap_case(&i, (0, 0), (1, 1), &bound, &BootstrapEffort::default());
        state.history[0].order += 2u32;
        assert!(replay(&i, &state, &bound).is_err());
    }

    /// Along every pair of Theorem-1 solutions with both exponents growing,
    /// the bootstrap divisors divide the true gaps.
    #[test]
    fn divisors_divide_true_gaps_on_theorem_rows() {
        let bound = BigUint::from(10u64.pow(9));
        let effort = BootstrapEffort::default();
        let mut runs = 0;
        for row in theorem1_rows() {
            let i = &row.instance;
            if !gcd_condition(i) {
                continue;
            }
            for s3 in &row.solutions {
                for s4 in &row.solutions {
                    if s4.x <= s3.x || s4.y <= s3.y {
                        continue;
                    }
                    let signs = ((s4.u == s3.u) as u8, (s4.v == s3.v) as u8);
                    let (state, _) = bootstrap_case(i, (s3.x, s3.y), signs, &bound, &effort);
                    assert!(!state.succeeded(), "false elimination of {row}");
                    let gx = BigUint::from(s4.x - s3.x);
                    let gy = BigUint::from(s4.y - s3.y);
                    for step in &state.history {
                        assert!(divides(&step.x0, &gx) && divides(&step.y0, &gy), "{row}");
                    }
                    if state.x.odd {
                        assert!((&gx / state.x0()).is_odd());
                    }
                    if state.y.odd {
                        assert!((&gy / state.y0()).is_odd());
                    }
                    runs += 1;
                }
            }
        }
        assert!(runs >= 5);
    }

    #[test]
    fn later_solutions_take_mixed_signs() {
        assert_eq!(feasible_gap_signs((1, 0)), vec![(0, 0), (1, 1)]);
        assert_eq!(feasible_gap_signs((0, 0)), vec![(1, 0), (0, 1)]);
    }
}
