//! Parametrized infinite classes of three-solution sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{primitive_power, Natural};
use crate::model::{to_basic_form, Instance, SolutionSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, FamilyError> {
    Err(FamilyError::InvalidParams(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyId {
    #[serde(rename = "62")]
    F62,
    #[serde(rename = "63")]
    F63,
    #[serde(rename = "64")]
    F64,
    #[serde(rename = "65")]
    F65,
    #[serde(rename = "66")]
    F66,
    #[serde(rename = "67")]
    F67,
    #[serde(rename = "68")]
    F68,
    #[serde(rename = "69")]
    F69,
    #[serde(rename = "10a")]
    F10a,
}

impl FamilyId {
    pub const ALL: [FamilyId; 9] = [
        FamilyId::F62,
        FamilyId::F63,
        FamilyId::F64,
        FamilyId::F65,
        FamilyId::F66,
        FamilyId::F67,
        FamilyId::F68,
        FamilyId::F69,
        FamilyId::F10a,
    ];
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyId::F62 => "62",
            FamilyId::F63 => "63",
            FamilyId::F64 => "64",
            FamilyId::F65 => "65",
            FamilyId::F66 => "66",
            FamilyId::F67 => "67",
            FamilyId::F68 => "68",
            FamilyId::F69 => "69",
            FamilyId::F10a => "10a",
        })
    }
}

impl FromStr for FamilyId {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FamilyId::ALL
            .into_iter()
            .find(|f| f.to_string() == s)
            .ok_or_else(|| FamilyError::InvalidParams(format!("unknown family {s:?}")))
    }
}

/// Parameters of one member of a family. Signs are 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum FamilyParams {
    /// `k` is replaced by `k + 1/2` when `half` is set (only for
    /// `a = d = 2`, `u = v = 1`).
    #[serde(rename = "62")]
    F62 { a: u64, d: u64, k: u64, u: u8, v: u8, half: bool },
    #[serde(rename = "63")]
    F63 { a: u64, d: u64, v: u8 },
    #[serde(rename = "64")]
    F64 { g: u64, v: u8 },
    #[serde(rename = "65")]
    F65 { g: u64, v: u8 },
    /// `upper` picks the upper of the paired signs.
    #[serde(rename = "66")]
    F66 { a: u64, x: u64, upper: bool },
    /// When `w` is absent both values are tried.
    #[serde(rename = "67")]
    F67 { a: u64, x2: u64, x3: u64, t: u8, w: Option<u8> },
    #[serde(rename = "68")]
    F68 { a: u64, m: u64, u: u8, v: u8 },
    #[serde(rename = "69")]
    F69 { m1: i64 },
    #[serde(rename = "10a")]
    F10a { b: u64, d: u64, k: u64, u: u8, v: u8 },
}

impl FamilyParams {
    pub fn id(&self) -> FamilyId {
        match self {
            FamilyParams::F62 { .. } => FamilyId::F62,
            FamilyParams::F63 { .. } => FamilyId::F63,
            FamilyParams::F64 { .. } => FamilyId::F64,
            FamilyParams::F65 { .. } => FamilyId::F65,
            FamilyParams::F66 { .. } => FamilyId::F66,
            FamilyParams::F67 { .. } => FamilyId::F67,
            FamilyParams::F68 { .. } => FamilyId::F68,
            FamilyParams::F69 { .. } => FamilyId::F69,
            FamilyParams::F10a { .. } => FamilyId::F10a,
        }
    }
}

fn int(n: u64) -> BigInt {
    BigInt::from(n)
}

fn pw(base: u64, e: u64) -> BigInt {
    num_traits::pow::pow(int(base), e as usize)
}

fn sg(e: u8) -> BigInt {
    if e % 2 == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

fn exact_div(n: &BigInt, d: &BigInt, what: &str) -> Result<BigInt, FamilyError> {
    if d.is_zero() {
        return invalid(format!("{what}: division by zero"));
    }
    let (q, r) = n.div_rem(d);
    if !r.is_zero() {
        return invalid(format!("{what} = {n}/{d} is not an integer"));
    }
    Ok(q)
}

fn positive(n: BigInt, what: &str, min: u32) -> Result<Natural, FamilyError> {
    if n < BigInt::from(min) {
        return invalid(format!("{what} = {n} must be at least {min}"));
    }
    Ok(n.to_biguint().expect("checked positive"))
}

fn sign_ok(e: u8, name: &str) -> Result<(), FamilyError> {
    if e > 1 {
        return invalid(format!("{name} must be 0 or 1"));
    }
    Ok(())
}

fn build(
    a: BigInt,
    b: BigInt,
    c: BigInt,
    r: BigInt,
    s: BigInt,
    pairs: &[(u64, u64)],
) -> Result<SolutionSet, FamilyError> {
    let inst = Instance {
        a: positive(a, "a", 2)?,
        b: positive(b, "b", 2)?,
        c: positive(c, "c", 1)?,
        r: positive(r, "r", 1)?,
        s: positive(s, "s", 1)?,
    };
    SolutionSet::from_pairs(inst, pairs)
        .or_else(|e| invalid(format!("construction does not verify: {e}")))
}

/// Evaluates the family formula and checks every listed pair.
pub fn generate(params: &FamilyParams) -> Result<SolutionSet, FamilyError> {
    match *params {
        FamilyParams::F62 { a, d, k, u, v, half } => {
            sign_ok(u, "u")?;
            sign_ok(v, "v")?;
            if a < 2 || d == 0 || k == 0 && !half {
                return invalid("need a >= 2, d >= 1, k >= 1");
            }
            if half && !(a == 2 && d == 2 && u == 1 && v == 1) {
                return invalid("half-integer k needs a = d = 2 and u = v = 1");
            }
            if u == 0 && (k + v as u64) % 2 == 0 {
                return invalid("u = 0 needs k - v odd");
            }
            if u == 1 && v == 1 && !half && pw(a, d) > int(3) {
                return invalid("u = v = 1 needs a^d <= 3");
            }
            let kd = if half { (2 * k + 1) * d / 2 } else { k * d };
            let ad = pw(a, d);
            let b = exact_div(&(pw(a, kd) + sg(u + v)), &(&ad + sg(u)), "b")?;
            let h = (&ad + sg(u)).gcd(&(&b + sg(v)));
            let c = exact_div(&(&ad * &b + sg(u + v + 1)), &h, "c")?;
            let r = exact_div(&(&b + sg(v)), &h, "r")?;
            let s = exact_div(&(&ad + sg(u)), &h, "s")?;
            build(int(a), b, c, r, s, &[(0, 1), (d, 0), (kd, 2)])
        }
        FamilyParams::F63 { a, d, v } => {
            sign_ok(v, "v")?;
            if a < 2 || d == 0 {
                return invalid("need a >= 2, d >= 1");
            }
            let ad = pw(a, d);
            let b = &ad + sg(v);
            // gcd(a^d + (-1)^u, b + (-1)^v) with u = 1 - v
            let h = (&ad + sg(v + 1)).gcd(&(&b + sg(v)));
            let c = exact_div(&(int(2) * &ad + sg(v)), &h, "c")?;
            let r = exact_div(&(&ad + sg(v) * 2), &h, "r")?;
            let s = exact_div(&(&ad + sg(v + 1)), &h, "s")?;
            build(int(a), b, c, r, s, &[(0, 0), (d, 1), (3 * d, 3)])
        }
        FamilyParams::F64 { g, v } => {
            sign_ok(v, "v")?;
            if g == 0 {
                return invalid("need g >= 1");
            }
            let alpha: u8 = if (g + v as u64) % 2 == 0 {
                0
            } else if v == 0 {
                1
            } else {
                2
            };
            let b = exact_div(&(pw(3, g) + sg(v)), &int(2), "b")?;
            let den = BigInt::one() << (2 + v - alpha);
            let c = exact_div(&(pw(3, g + 1) + sg(v)), &den, "c")?;
            let r = exact_div(&(int(3) * (pw(3, g - 1) + sg(v))), &den, "r")?;
            let s = BigInt::one() << (1 + alpha - v);
            build(int(3), b, c, r, s, &[(0, 1), (1, 0), (2 * g, 3)])
        }
        FamilyParams::F65 { g, v } => {
            sign_ok(v, "v")?;
            if g == 0 {
                return invalid("need g >= 1");
            }
            let b = pw(2, g) + sg(v);
            let c = pw(2, g) + sg(v + 1);
            build(int(2), b, c, int(2), int(1), &[(0, 1), (g - 1, 0), (g, 1)])
        }
        FamilyParams::F66 { a, x, upper } => {
            if a < 2 || a % 2 != 0 || x == 0 {
                return invalid("need even a >= 2 and x >= 1");
            }
            let ax = pw(a, x);
            let e = if upper { BigInt::one() } else { -BigInt::one() };
            build(
                int(a),
                int(2) * &ax + &e,
                &ax + &e,
                int(2),
                &ax - &e,
                &[(0, 0), (x, 0), (2 * x, 1)],
            )
        }
        FamilyParams::F67 { a, x2, x3, t, w } => {
            sign_ok(t, "t")?;
            if a < 2 || x2 == 0 || x3 == 0 || x3 % x2 != 0 {
                return invalid("need a >= 2, x2, x3 >= 1 and x2 | x3");
            }
            let ws: Vec<u8> = match w {
                Some(w) => {
                    sign_ok(w, "w")?;
                    vec![w]
                }
                None => vec![0, 1],
            };
            let m: u32 = if a % 2 == 1 { 1 } else { 0 };
            let two_m = BigInt::one() << m;
            let ax2 = pw(a, x2);
            let ax3 = pw(a, x3);
            let c = exact_div(&(&ax2 + sg(t)), &two_m, "c")?;
            let r = BigInt::one() << (1 - m);
            let s = exact_div(&(&ax2 + sg(t + 1)), &two_m, "s")?;
            let mut last = None;
            for w in ws {
                if s > BigInt::one() && !(&ax3 - sg(w)).mod_floor(&s).is_zero() {
                    last = Some(format!("a^x3 is not congruent to (-1)^{w} modulo {s}"));
                    continue;
                }
                let num = int(2) * &ax3 + sg(t + w + 1) * &ax2 + sg(w + 1);
                let by3 = match exact_div(&num, &(&ax2 + sg(t + 1)), "b^y3") {
                    Ok(v) => v,
                    Err(FamilyError::InvalidParams(e)) => {
                        last = Some(e);
                        continue;
                    }
                };
                if by3 < int(2) {
                    last = Some(format!("b^y3 = {by3} must exceed 1"));
                    continue;
                }
                let (b, y3) = primitive_power(&by3.to_biguint().expect("positive"));
                return build(
                    int(a),
                    b.into(),
                    c.clone(),
                    r.clone(),
                    s.clone(),
                    &[(0, 0), (x2, 0), (x3, y3 as u64)],
                );
            }
            invalid(last.unwrap_or_else(|| "no admissible w".into()))
        }
        FamilyParams::F68 { a, m, u, v } => {
            sign_ok(u, "u")?;
            sign_ok(v, "v")?;
            if a < 2 {
                return invalid("need a >= 2");
            }
            let t = exact_div(&(pw(a, m) + sg(v)), &(int(a) + sg(u)), "t")?;
            let ta = &t * int(a);
            let h = (&ta + sg(v)).gcd(&(int(a) + sg(u)));
            let c = exact_div(&(int(a) * (&t + sg(u + v + 1))), &h, "c")?;
            let r = exact_div(&(&ta + sg(v)), &h, "r")?;
            let s = exact_div(&(int(a) + sg(u)), &h, "s")?;
            build(int(a), ta, c, r, s, &[(0, 0), (1, 1), (m + 1, 2)])
        }
        FamilyParams::F69 { m1 } => {
            if m1 < -1 || m1 % 2 == 0 {
                return invalid("m1 must be odd and at least -1");
            }
            // 4t = (2^(m1+2) + 4)/3 stays integral at m1 = -1.
            let four_t = exact_div(&(pw(2, (m1 + 2) as u64) + int(4)), &int(3), "4t")?;
            let h1 = if m1.rem_euclid(6) == 5 { int(3) } else { int(1) };
            let c = exact_div(&(&four_t + int(4)), &h1, "c")?;
            let r = exact_div(&(&four_t + int(1)), &h1, "r")?;
            let s = exact_div(&int(3), &h1, "s")?;
            build(int(2), four_t, c, r, s, &[(0, 0), (2, 1), ((m1 + 2) as u64, 2)])
        }
        FamilyParams::F10a { b, d, k, u, v } => generate_10a(b, d, k, u, v).map(|t| t.set),
    }
}

/// A member of the reformulated class together with which of the two
/// linear relations `s b^d - r = c` (A) and `r a - s = c` (B) it satisfies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TenA {
    pub set: SolutionSet,
    pub eq_a: bool,
    pub eq_b: bool,
}

pub fn generate_10a(b: u64, d: u64, k: u64, u: u8, v: u8) -> Result<TenA, FamilyError> {
    sign_ok(u, "u")?;
    sign_ok(v, "v")?;
    if b < 2 || d == 0 || k == 0 {
        return invalid("need b >= 2, d >= 1, k >= 1");
    }
    if u == 0 && (k + v as u64) % 2 == 0 {
        return invalid("u = 0 needs k - v odd");
    }
    if u == 1 && v != 0 {
        return invalid("u = 1 needs v = 0");
    }
    let bd = pw(b, d);
    let a = exact_div(&(pw(b, k * d) + sg(u + v)), &(&bd + sg(u)), "a")?;
    if a < int(2) {
        return invalid(format!("a = {a} must exceed 1"));
    }
    let h = (&a + sg(v)).gcd(&(&bd + sg(u)));
    let c = exact_div(&(&a * &bd - sg(u + v)), &h, "c")?;
    let r = exact_div(&(&bd + sg(u)), &h, "r")?;
    let s = exact_div(&(&a + sg(v)), &h, "s")?;
    let eq_a = &s * &bd - &r == c;
    let eq_b = &r * &a - &s == c;
    let set = build(a, int(b), c, r, s, &[(0, d), (1, 0), (2, k * d)])?;
    Ok(TenA { set, eq_a, eq_b })
}

/// Parameter ranges for [`sweep`]. `base_max` bounds the family's base
/// parameter (`a`, or `b` for 10a), `exp_max` bounds every exponent-like
/// parameter, and `value_max`, when set, drops members with any of
/// `a, b, c, r, s` above it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepBox {
    pub base_max: u64,
    pub exp_max: u64,
    pub value_max: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepResult {
    pub sets: Vec<(FamilyParams, SolutionSet)>,
    /// Rejected tuples counted by reason.
    pub skipped: BTreeMap<String, usize>,
}

fn params_in_box(family: FamilyId, bx: &SweepBox) -> Vec<FamilyParams> {
    let signs = [0u8, 1];
    let mut out = Vec::new();
    let em = bx.exp_max;
    // The base is itself one of the values.
    let bm = bx.value_max.map_or(bx.base_max, |m| bx.base_max.min(m));
    // `over(lo)` when some value of the member is at least `lo` and that
    // exceeds `value_max`; `None` stands for a bound past `u128`.
    let over = |lo: Option<u128>| bx.value_max.is_some_and(|m| lo.is_none_or(|l| l > m as u128));
    let quotient_lo = |base: u64, kd: u64, d: u64| -> Option<u128> {
        let top = pow128(base, kd)?;
        Some((top - 1) / (pow128(base, d)? + 1))
    };
    match family {
        FamilyId::F62 => {
            for a in 2..=bm {
                for d in 1..=em {
                    for k in 1..=em {
                        // b >= (a^kd - 1)/(a^d + 1)
                        if k > 1 && over(quotient_lo(a, k * d, d)) {
                            break;
                        }
                        for u in signs {
                            for v in signs {
                                out.push(FamilyParams::F62 { a, d, k, u, v, half: false });
                                if a == 2 && d == 2 && u == 1 && v == 1 {
                                    out.push(FamilyParams::F62 { a, d, k, u, v, half: true });
                                }
                            }
                        }
                    }
                }
            }
        }
        FamilyId::F63 => {
            for a in 2..=bm {
                for d in 1..=em {
                    // b >= a^d - 1
                    if over(pow128(a, d).map(|p| p - 1)) {
                        break;
                    }
                    for v in signs {
                        out.push(FamilyParams::F63 { a, d, v });
                    }
                }
            }
        }
        FamilyId::F64 => {
            for g in 1..=em {
                for v in signs {
                    out.push(FamilyParams::F64 { g, v });
                }
            }
        }
        FamilyId::F65 => {
            for g in 1..=em {
                for v in signs {
                    out.push(FamilyParams::F65 { g, v });
                }
            }
        }
        FamilyId::F66 => {
            for a in (2..=bm).step_by(2) {
                for x in 1..=em {
                    // b >= 2 a^x - 1
                    if over(pow128(a, x).and_then(|p| (2 * p).checked_sub(1))) {
                        break;
                    }
                    for upper in [true, false] {
                        out.push(FamilyParams::F66 { a, x, upper });
                    }
                }
            }
        }
        FamilyId::F67 => {
            for a in 2..=bm {
                for x2 in 1..=em {
                    // c >= (a^x2 - 1)/2
                    if over(pow128(a, x2).map(|p| (p - 1) / 2)) {
                        break;
                    }
                    for x3 in (x2..=em).step_by(x2 as usize) {
                        for t in signs {
                            for w in signs {
                                out.push(FamilyParams::F67 { a, x2, x3, t, w: Some(w) });
                            }
                        }
                    }
                }
            }
        }
        FamilyId::F68 => {
            for a in 2..=bm {
                for m in 0..=em {
                    // b = a (a^m ± 1)/(a ± 1) >= a (a^m - 1)/(a + 1)
                    let lo = pow128(a, m).and_then(|p| (p - 1).checked_mul(a as u128));
                    if over(lo.map(|p| p / (a as u128 + 1))) {
                        break;
                    }
                    for u in signs {
                        for v in signs {
                            out.push(FamilyParams::F68 { a, m, u, v });
                        }
                    }
                }
            }
        }
        FamilyId::F69 => {
            let mut m1 = -1i64;
            while m1 <= em as i64 {
                out.push(FamilyParams::F69 { m1 });
                m1 += 2;
            }
        }
        FamilyId::F10a => {
            for b in 2..=bm {
                for d in 1..=em {
                    for k in 1..=em {
                        // a >= (b^kd - 1)/(b^d + 1)
                        if k > 1 && over(quotient_lo(b, k * d, d)) {
                            break;
                        }
                        for u in signs {
                            for v in signs {
                                out.push(FamilyParams::F10a { b, d, k, u, v });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn pow128(base: u64, e: u64) -> Option<u128> {
    (base as u128).checked_pow(u32::try_from(e).ok()?)
}

fn reason_key(e: &FamilyError) -> String {
    let FamilyError::InvalidParams(msg) = e;
    // Collapse numbers so counts group by kind of failure.
    let mut out = String::new();
    let mut in_number = false;
    for c in msg.chars() {
        let digit = c.is_ascii_digit();
        if !digit {
            out.push(c);
        } else if !in_number {
            out.push('n');
        }
        in_number = digit;
    }
    out
}

/// Generates every valid member in the box. Invalid tuples are skipped and
/// counted by reason.
pub fn sweep(family: FamilyId, bx: &SweepBox) -> SweepResult {
    let mut res = SweepResult::default();
    for p in params_in_box(family, bx) {
        match generate(&p) {
            Ok(set) => {
                let i = &set.instance;
                let too_big = bx.value_max.is_some_and(|m| {
                    [&i.a, &i.b, &i.c, &i.r, &i.s]
                        .iter()
                        .any(|v| v.to_u64().is_none_or(|v| v > m))
                });
                if too_big {
                    *res.skipped.entry("value above box".into()).or_default() += 1;
                } else {
                    res.sets.push((p, set));
                }
            }
            Err(e) => *res.skipped.entry(reason_key(&e)).or_default() += 1,
        }
    }
    res
}

fn divisors_of(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

fn gcd_nonzero(vals: impl Iterator<Item = u64>) -> u64 {
    vals.filter(|&v| v > 0).fold(0, |g, v| g.gcd(&v))
}

/// Base `root^e` for each `e` dividing `g`, as long as it fits in a `u64`.
fn rebased(root: &Natural, g: u64) -> Vec<(u64, u64)> {
    let Some(root) = root.to_u64() else { return vec![] };
    divisors_of(g)
        .into_iter()
        .filter_map(|e| root.checked_pow(u32::try_from(e).ok()?).map(|base| (e, base)))
        .collect()
}

/// Parameter tuples worth trying for a basic form whose first base is
/// `o.instance.a`.
fn candidate_params(o: &SolutionSet) -> Vec<FamilyParams> {
    let signs = [0u8, 1];
    let xs: Vec<u64> = o.solutions.iter().map(|s| s.x).collect();
    let ys: Vec<u64> = o.solutions.iter().map(|s| s.y).collect();
    let mut out = Vec::new();
    let gx = gcd_nonzero(xs.iter().copied());
    if gx > 0 {
        for (e, a) in rebased(&o.instance.a, gx) {
            let vals: Vec<u64> = xs.iter().filter(|&&x| x > 0).map(|x| x / e).collect();
            for &d in &vals {
                for &kd in &vals {
                    if kd % d == 0 {
                        for u in signs {
                            for v in signs {
                                out.push(FamilyParams::F62 { a, d, k: kd / d, u, v, half: false });
                            }
                        }
                    }
                    if a == 2 && d == 2 && kd % 2 == 1 {
                        out.push(FamilyParams::F62 { a, d, k: kd / 2, u: 1, v: 1, half: true });
                    }
                    if d <= kd {
                        for t in signs {
                            for w in signs {
                                out.push(FamilyParams::F67 { a, x2: d, x3: kd, t, w: Some(w) });
                            }
                        }
                    }
                }
                for v in signs {
                    out.push(FamilyParams::F63 { a, d, v });
                    if a == 2 {
                        out.push(FamilyParams::F65 { g: d, v });
                    }
                    if a == 3 && d % 2 == 0 {
                        out.push(FamilyParams::F64 { g: d / 2, v });
                    }
                }
                if a % 2 == 0 {
                    for upper in [true, false] {
                        out.push(FamilyParams::F66 { a, x: d, upper });
                    }
                }
                for u in signs {
                    for v in signs {
                        out.push(FamilyParams::F68 { a, m: d - 1, u, v });
                    }
                }
                if a == 2 {
                    out.push(FamilyParams::F69 { m1: d as i64 - 2 });
                }
            }
        }
    }
    let gy = gcd_nonzero(ys.iter().copied());
    if gy > 0 {
        for (f, b) in rebased(&o.instance.b, gy) {
            let vals: Vec<u64> = ys.iter().filter(|&&y| y > 0).map(|y| y / f).collect();
            for &d in &vals {
                for &kd in &vals {
                    if kd % d != 0 {
                        continue;
                    }
                    for u in signs {
                        for v in signs {
                            out.push(FamilyParams::F10a { b, d, k: kd / d, u, v });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Finds a family member in the same family as the three-solution set
/// `set`, trying both orientations.
pub fn recognize(set: &SolutionSet) -> Option<FamilyParams> {
    if set.solutions.len() != 3 {
        return None;
    }
    let target = to_basic_form(set).ok()?;
    let flipped = target.associate().sorted();
    let mut seen = BTreeSet::new();
    for o in [&target, &flipped] {
        for p in candidate_params(o) {
            if !seen.insert(format!("{p:?}")) {
                continue;
            }
            let Ok(g) = generate(&p) else { continue };
            let hit = [g.clone(), g.associate()]
                .iter()
                .any(|h| to_basic_form(h).is_ok_and(|bh| bh == target));
            if hit {
                return Some(p);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_gap_divisibility, same_family, GapVerdict};

    fn text(p: FamilyParams) -> String {
        generate(&p).unwrap().to_string()
    }

    #[test]
    fn examples() {
        assert_eq!(
            text(FamilyParams::F62 { a: 3, d: 1, k: 2, u: 0, v: 1, half: false }),
            "(3,2,7,1,4; 0,1,1,0,2,2)"
        );
        assert_eq!(text(FamilyParams::F65 { g: 3, v: 0 }), "(2,9,7,2,1; 0,1,2,0,3,1)");
        assert_eq!(
            text(FamilyParams::F66 { a: 4, x: 1, upper: true }),
            "(4,9,5,2,3; 0,0,1,0,2,1)"
        );
        assert_eq!(text(FamilyParams::F63 { a: 2, d: 1, v: 0 }), "(2,3,5,4,1; 0,0,1,1,3,3)");
        assert_eq!(text(FamilyParams::F64 { g: 1, v: 0 }), "(3,2,5,3,4; 0,1,1,0,2,3)");
        assert_eq!(text(FamilyParams::F68 { a: 2, m: 2, u: 1, v: 1 }), "(2,6,4,5,1; 0,0,1,1,3,2)");
        assert_eq!(text(FamilyParams::F69 { m1: 1 }), "(2,4,8,5,3; 0,0,2,1,3,2)");
        assert_eq!(text(FamilyParams::F69 { m1: -1 }), "(2,2,2,1,1; 0,0,2,1,1,2)");
    }

    #[test]
    fn ten_a_examples() {
        let t = generate_10a(1477, 1, 3, 1, 0).unwrap();
        assert_eq!(t.set.instance.a, Natural::from(1477u64 * 1477 + 1477 + 1));
        let t = generate_10a(1477, 1, 3, 0, 0).unwrap();
        assert_eq!(t.set.instance.a, Natural::from(1477u64 * 1477 - 1477 + 1));
        assert!(t.eq_a || t.eq_b);
        assert!(generate_10a(2, 1, 1, 1, 0).is_err());
        let t = generate_10a(2, 1, 2, 1, 0).unwrap();
        assert_eq!(t.set.to_string(), "(3,2,7,1,4; 0,1,1,0,2,2)");
        let t = generate_10a(5, 1, 2, 0, 1).unwrap();
        assert_eq!(t.set.to_string(), "(4,5,7,2,1; 0,1,1,0,2,2)");
    }

    #[test]
    fn side_conditions() {
        assert!(generate(&FamilyParams::F62 { a: 3, d: 1, k: 2, u: 0, v: 0, half: false }).is_err());
        assert!(generate(&FamilyParams::F62 { a: 5, d: 1, k: 2, u: 1, v: 1, half: false }).is_err());
        assert!(generate(&FamilyParams::F69 { m1: 2 }).is_err());
        assert!(generate(&FamilyParams::F65 { g: 1, v: 1 }).is_err());
        assert!(generate(&FamilyParams::F66 { a: 3, x: 1, upper: true }).is_err());
        assert!(generate_10a(5, 1, 2, 1, 1).is_err());
    }

    #[test]
    fn sweeps_verify() {
        let bx = SweepBox { base_max: 12, exp_max: 6, value_max: Some(10_000) };
        let mut total = 0;
        for f in FamilyId::ALL {
            let res = sweep(f, &bx);
            for (_, s) in &res.sets {
                assert!(s.is_valid() && s.n() == 3, "{f}: {s}");
            }
            total += res.sets.len();
        }
        assert!(total >= 100);
        let empty = SweepBox { base_max: 1, exp_max: 0, value_max: None };
        assert!(sweep(FamilyId::F62, &empty).sets.is_empty());
        let r65 = sweep(FamilyId::F65, &SweepBox { base_max: 0, exp_max: 10, value_max: None });
        assert_eq!(r65.sets.len(), 19);
    }

    #[test]
    fn family_68_has_common_factor() {
        let res = sweep(FamilyId::F68, &SweepBox { base_max: 20, exp_max: 6, value_max: None });
        assert!(!res.sets.is_empty());
        for (p, s) in &res.sets {
            let FamilyParams::F68 { a, m, u, v } = *p else { unreachable!() };
            let t = (pw(a, m) + sg(v)) / (int(a) + sg(u));
            assert!(((pw(a, m) + sg(v)) % (int(a) + sg(u))).is_zero());
            assert_eq!(s.instance.b, (t * int(a)).to_biguint().unwrap());
            assert!(!s.instance.a.gcd(&s.instance.b).is_one());
        }
    }

    #[test]
    fn ten_a_and_62_agree() {
        for b in 2..8u64 {
            for k in 1..5 {
                for (u, v) in [(0u8, 0u8), (0, 1), (1, 0)] {
                    let Ok(t) = generate_10a(b, 1, k, u, v) else { continue };
                    let a = t.set.instance.a.to_u64().unwrap();
                    let Ok(s62) = generate(&FamilyParams::F62 { a: b, d: 1, k, u, v, half: false }) else {
                        continue;
                    };
                    assert!(
                        same_family(&t.set, &s62.associate()).is_some(),
                        "b={b} k={k} u={u} v={v} a={a}"
                    );
                }
            }
        }
    }

    #[test]
    fn gap_divisibility_never_violated() {
        let bx = SweepBox { base_max: 10, exp_max: 5, value_max: Some(100_000) };
        let mut verdicts = BTreeMap::new();
        for f in FamilyId::ALL {
            for (_, s) in sweep(f, &bx).sets {
                for cand in [s.sorted(), s.associate().sorted()] {
                    let check = check_gap_divisibility(&cand, (12, 12));
                    assert_ne!(check.verdict, GapVerdict::Violated, "{cand}");
                    let key = match check.verdict {
                        GapVerdict::NotApplicable { condition, .. } => condition,
                        _ => 0,
                    };
                    *verdicts.entry(key).or_insert(0) += 1;
                }
            }
        }
        eprintln!("{verdicts:?}");
        assert!(verdicts.get(&0).copied().unwrap_or(0) > 0);
    }

    #[test]
    fn recognize_finds_swept_members_in_either_orientation() {
        let bx = SweepBox { base_max: 12, exp_max: 4, value_max: Some(1_000_000) };
        let mut n = 0;
        for f in FamilyId::ALL {
            for (p, set) in sweep(f, &bx).sets {
                assert!(recognize(&set).is_some(), "{p:?} {set}");
                assert!(recognize(&set.associate()).is_some(), "{p:?} associate");
                n += 1;
            }
        }
        assert!(n > 100);
    }

    #[test]
    fn recognize_sees_through_rebasing() {
        // family 66 at a = 4 written over a = 2
        let s = SolutionSet::parse("(2,9,5,2,3; 0,0,2,0,4,1)").unwrap();
        assert!(recognize(&s).is_some());
        let t = generate_10a(1477, 1, 3, 1, 0).unwrap().set;
        assert_eq!(recognize(&t).map(|p| p.id()).is_some(), true);
    }

    #[test]
    fn recognize_rejects_unrelated_triple() {
        let s = SolutionSet::parse("(56744,1477,83810889,1478,56743; 0,1,1,0,3,4)").unwrap();
        assert_eq!(recognize(&s), None);
    }
}
