//! Equations, solutions, solution sets, and the relations between them.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{primitive_power, pow_u64, Natural};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("({x},{y}) does not solve the equation for any signs")]
    NotASolution { x: u64, y: u64 },
    #[error("pair ({x},{y}) listed twice")]
    DuplicatePair { x: u64, y: u64 },
    #[error("empty solution set")]
    Empty,
    #[error("no basic form: {0}")]
    NoBasicForm(String),
    #[error("cannot parse solution set: {0}")]
    Parse(String),
}

/// The equation `(-1)^u r a^x + (-1)^v s b^y = c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Instance {
    #[serde(with = "crate::serde_big::natural")]
    pub a: Natural,
    #[serde(with = "crate::serde_big::natural")]
    pub b: Natural,
    #[serde(with = "crate::serde_big::natural")]
    pub c: Natural,
    #[serde(with = "crate::serde_big::natural")]
    pub r: Natural,
    #[serde(with = "crate::serde_big::natural")]
    pub s: Natural,
}

impl Instance {
    pub fn new(a: Natural, b: Natural, c: Natural, r: Natural, s: Natural) -> Result<Self, ModelError> {
        let two = Natural::from(2u32);
        if a < two || b < two {
            return Err(ModelError::InvalidInstance(format!("need a, b > 1, got a={a}, b={b}")));
        }
        if c.is_zero() || r.is_zero() || s.is_zero() {
            return Err(ModelError::InvalidInstance("need c, r, s > 0".into()));
        }
        Ok(Self { a, b, c, r, s })
    }

    pub fn from_u64(a: u64, b: u64, c: u64, r: u64, s: u64) -> Result<Self, ModelError> {
        Self::new(a.into(), b.into(), c.into(), r.into(), s.into())
    }

    /// Swaps `(a, r)` with `(b, s)`.
    pub fn associate(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
            c: self.c.clone(),
            r: self.s.clone(),
            s: self.r.clone(),
        }
    }

    /// Signs `(u, v)` making `(x, y)` a solution. At most one choice can
    /// work because `r a^x` and `s b^y` are positive and `c > 0`.
    pub fn signs_for(&self, x: u64, y: u64) -> Option<(u8, u8)> {
        let left = &self.r * pow_u64(&self.a, x);
        let right = &self.s * pow_u64(&self.b, y);
        signs_of_terms(&left, &right, &self.c)
    }
}

fn signs_of_terms(left: &Natural, right: &Natural, c: &Natural) -> Option<(u8, u8)> {
    if &(left + right) == c {
        Some((0, 0))
    } else if left > right && &(left - right) == c {
        Some((0, 1))
    } else if right > left && &(right - left) == c {
        Some((1, 0))
    } else {
        None
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{},{})", self.a, self.b, self.c, self.r, self.s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Solution {
    pub x: u64,
    pub y: u64,
    pub u: u8,
    pub v: u8,
}

pub fn evaluate(inst: &Instance, x: u64, y: u64, u: u8, v: u8) -> bool {
    inst.signs_for(x, y) == Some((u & 1, v & 1))
}

/// An instance with some of its solutions, in the order given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionSet {
    #[serde(flatten)]
    pub instance: Instance,
    pub solutions: Vec<Solution>,
}

impl SolutionSet {
    /// Builds a set from exponent pairs, recovering the signs and rejecting
    /// pairs that are not solutions.
    pub fn from_pairs(instance: Instance, pairs: &[(u64, u64)]) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        let mut solutions = Vec::with_capacity(pairs.len());
        for &(x, y) in pairs {
            if !seen.insert((x, y)) {
                return Err(ModelError::DuplicatePair { x, y });
            }
            let (u, v) = instance.signs_for(x, y).ok_or(ModelError::NotASolution { x, y })?;
            solutions.push(Solution { x, y, u, v });
        }
        Ok(Self { instance, solutions })
    }

    /// Parses `(a,b,c,r,s; x1,y1,x2,y2,...)`.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let t = text.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| ModelError::Parse("expected parentheses".into()))?;
        let (head, tail) = inner.split_once(';').unwrap_or((inner, ""));
        let nums = |s: &str| -> Result<Vec<Natural>, ModelError> {
            s.split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(|p| Natural::from_str(p).map_err(|e| ModelError::Parse(format!("{p:?}: {e}"))))
                .collect()
        };
        let h = nums(head)?;
        if h.len() != 5 {
            return Err(ModelError::Parse(format!("expected 5 parameters, found {}", h.len())));
        }
        let inst = Instance::new(h[0].clone(), h[1].clone(), h[2].clone(), h[3].clone(), h[4].clone())?;
        let exps: Vec<u64> = tail
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<u64>().map_err(|e| ModelError::Parse(format!("{p:?}: {e}"))))
            .collect::<Result<_, _>>()?;
        if exps.len() % 2 != 0 {
            return Err(ModelError::Parse("odd number of exponents".into()));
        }
        let pairs: Vec<(u64, u64)> = exps.chunks(2).map(|w| (w[0], w[1])).collect();
        Self::from_pairs(inst, &pairs)
    }

    pub fn pairs(&self) -> Vec<(u64, u64)> {
        self.solutions.iter().map(|s| (s.x, s.y)).collect()
    }

    pub fn pair_set(&self) -> BTreeSet<(u64, u64)> {
        self.solutions.iter().map(|s| (s.x, s.y)).collect()
    }

    /// Number of distinct `(x, y)` pairs.
    pub fn n(&self) -> usize {
        self.pair_set().len()
    }

    /// Number of distinct `(x, y, u, v)` tuples.
    pub fn tuple_count(&self) -> usize {
        self.solutions.iter().collect::<BTreeSet<_>>().len()
    }

    pub fn is_valid(&self) -> bool {
        self.solutions
            .iter()
            .all(|s| evaluate(&self.instance, s.x, s.y, s.u, s.v))
    }

    pub fn associate(&self) -> Self {
        Self {
            instance: self.instance.associate(),
            solutions: self
                .solutions
                .iter()
                .map(|s| Solution { x: s.y, y: s.x, u: s.v, v: s.u })
                .collect(),
        }
    }

    /// Same set with solutions ordered by `(x, y)`.
    pub fn sorted(&self) -> Self {
        let mut out = self.clone();
        out.solutions.sort();
        out.solutions.dedup_by_key(|s| (s.x, s.y));
        out
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            instance: self.instance.clone(),
            solutions: indices.iter().map(|&i| self.solutions[i]).collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("solution sets serialize")
    }
}

impl fmt::Display for SolutionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = &self.instance;
        write!(f, "({},{},{},{},{};", i.a, i.b, i.c, i.r, i.s)?;
        for (k, s) in self.solutions.iter().enumerate() {
            let sep = if k == 0 { " " } else { "," };
            write!(f, "{sep}{},{}", s.x, s.y)?;
        }
        write!(f, ")")
    }
}

impl FromStr for SolutionSet {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Every solution with `x <= x_max` and `y <= y_max`, ordered by
/// `(x, y, u, v)`.
pub fn enumerate_solutions(inst: &Instance, x_max: u64, y_max: u64) -> SolutionSet {
    let mut lefts = Vec::with_capacity(x_max as usize + 1);
    let mut p = inst.r.clone();
    for _ in 0..=x_max {
        lefts.push(p.clone());
        p *= &inst.a;
    }
    let mut rights = Vec::with_capacity(y_max as usize + 1);
    let mut q = inst.s.clone();
    for _ in 0..=y_max {
        rights.push(q.clone());
        q *= &inst.b;
    }
    let mut solutions = Vec::new();
    for (x, l) in lefts.iter().enumerate() {
        // Once r a^x exceeds c + s b^{y_max}, no larger x can work.
        if l > &(&inst.c + &rights[y_max as usize]) {
            break;
        }
        for (y, rr) in rights.iter().enumerate() {
            if let Some((u, v)) = signs_of_terms(l, rr, &inst.c) {
                solutions.push(Solution { x: x as u64, y: y as u64, u, v });
            }
        }
    }
    SolutionSet {
        instance: inst.clone(),
        solutions,
    }
}

/// Scale factor and solution pairing between two members of one family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyWitness {
    #[serde(with = "crate::serde_big::rational")]
    pub k: BigRational,
    #[serde(with = "crate::serde_big::natural")]
    pub base_a: Natural,
    #[serde(with = "crate::serde_big::natural")]
    pub base_b: Natural,
    /// `pairing[i] = j` maps solution `i` of the first set to `j` of the second.
    pub pairing: Vec<usize>,
}

fn gcd(a: &Natural, b: &Natural) -> Natural {
    a.gcd(b)
}

/// The unique family member with `gcd(r, s b) = gcd(s, r a) = 1`, both
/// minimal exponents zero and neither base a perfect power. Solutions come
/// back sorted by `(x, y)`.
pub fn to_basic_form(set: &SolutionSet) -> Result<SolutionSet, ModelError> {
    if set.solutions.is_empty() {
        return Err(ModelError::Empty);
    }
    let inst = &set.instance;
    let (a, ka) = primitive_power(&inst.a);
    let (b, kb) = primitive_power(&inst.b);
    let ka = ka as u64;
    let kb = kb as u64;
    let mut sols: Vec<Solution> = set
        .solutions
        .iter()
        .map(|s| Solution { x: s.x * ka, y: s.y * kb, ..*s })
        .collect();
    let mx = sols.iter().map(|s| s.x).min().unwrap_or(0);
    let my = sols.iter().map(|s| s.y).min().unwrap_or(0);
    for s in &mut sols {
        s.x -= mx;
        s.y -= my;
    }
    let mut r = &inst.r * pow_u64(&a, mx);
    let mut s = &inst.s * pow_u64(&b, my);
    let mut c = inst.c.clone();
    loop {
        let g = gcd(&r, &s);
        if g.is_one() {
            break;
        }
        if !(&c % &g).is_zero() {
            return Err(ModelError::NoBasicForm(format!(
                "gcd(r, s) = {g} does not divide c = {c}"
            )));
        }
        r /= &g;
        s /= &g;
        c /= &g;
    }
    let g1 = gcd(&r, &(&s * &b));
    if !g1.is_one() {
        return Err(ModelError::NoBasicForm(format!("gcd(r, s*b) = {g1}")));
    }
    let g2 = gcd(&s, &(&r * &a));
    if !g2.is_one() {
        return Err(ModelError::NoBasicForm(format!("gcd(s, r*a) = {g2}")));
    }
    sols.sort();
    sols.dedup_by_key(|s| (s.x, s.y));
    let out = SolutionSet {
        instance: Instance { a, b, c, r, s },
        solutions: sols,
    };
    if !out.is_valid() {
        return Err(ModelError::NoBasicForm("normalized set fails the equation".into()));
    }
    Ok(out)
}

pub fn associate(set: &SolutionSet) -> SolutionSet {
    set.associate()
}

/// Decides family membership by comparing basic forms, then recovers the
/// scale `k = C / c` and the solution pairing.
pub fn same_family(s1: &SolutionSet, s2: &SolutionSet) -> Option<FamilyWitness> {
    let b1 = to_basic_form(s1).ok()?;
    let b2 = to_basic_form(s2).ok()?;
    if b1 != b2 {
        return None;
    }
    family_witness(s1, s2, &b1.instance.a, &b1.instance.b)
}

fn family_witness(s1: &SolutionSet, s2: &SolutionSet, base_a: &Natural, base_b: &Natural) -> Option<FamilyWitness> {
    let (i1, i2) = (&s1.instance, &s2.instance);
    // k r a^x = R A^X  <=>  C r a^x = c R A^X
    let mut pairing = Vec::with_capacity(s1.solutions.len());
    let lhs2: Vec<(Natural, Natural)> = s2
        .solutions
        .iter()
        .map(|t| {
            (
                &i1.c * &i2.r * pow_u64(&i2.a, t.x),
                &i1.c * &i2.s * pow_u64(&i2.b, t.y),
            )
        })
        .collect();
    for t in &s1.solutions {
        let l = &i2.c * &i1.r * pow_u64(&i1.a, t.x);
        let r = &i2.c * &i1.s * pow_u64(&i1.b, t.y);
        let j = lhs2.iter().position(|(p, q)| *p == l && *q == r)?;
        pairing.push(j);
    }
    Some(FamilyWitness {
        k: BigRational::new(i2.c.clone().into(), i1.c.clone().into()),
        base_a: base_a.clone(),
        base_b: base_b.clone(),
        pairing,
    })
}

pub fn is_subset_of(s1: &SolutionSet, s2: &SolutionSet) -> bool {
    s1.instance == s2.instance && s1.pair_set().is_subset(&s2.pair_set())
}

/// The nine sets every solution set with more than three solutions must
/// reduce to.
pub const THEOREM1_ROWS: [&str; 9] = [
    "(3,2,1,1,2; 0,0,1,0,1,1,2,2)",
    "(3,2,5,1,2; 0,1,1,0,1,2,2,1,3,4)",
    "(3,2,7,1,2; 0,2,2,0,1,1,2,3)",
    "(5,2,3,1,2; 0,0,0,1,1,0,1,2,3,6)",
    "(5,3,2,1,1; 0,0,0,1,1,1,2,3)",
    "(7,2,5,3,2; 0,0,0,2,1,3,3,9)",
    "(6,2,8,1,7; 0,0,1,1,2,2,3,5)",
    "(2,2,3,1,1; 0,1,0,2,1,0,2,0)",
    "(2,2,4,3,1; 0,0,1,1,2,3,2,4)",
];

pub fn theorem1_rows() -> Vec<SolutionSet> {
    THEOREM1_ROWS
        .iter()
        .map(|t| SolutionSet::parse(t).expect("theorem rows are valid"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Via {
    Direct,
    Associate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem1Match {
    /// 1-based row number.
    pub row: usize,
    pub via: Via,
    pub witness: FamilyWitness,
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Looks for a row of the list whose subset (or the associate of one) is in
/// the same family as `set`.
pub fn matches_theorem1(set: &SolutionSet) -> Option<Theorem1Match> {
    let basic = to_basic_form(set).ok()?;
    let n = basic.solutions.len();
    for (idx, row) in theorem1_rows().iter().enumerate() {
        for sub in subsets_of_size(row.solutions.len(), n) {
            let cand = row.subset(&sub);
            for (via, c) in [(Via::Direct, cand.clone()), (Via::Associate, cand.associate())] {
                let Ok(bc) = to_basic_form(&c) else { continue };
                if bc == basic {
                    if let Some(witness) = family_witness(set, &c, &basic.instance.a, &basic.instance.b) {
                        return Some(Theorem1Match { row: idx + 1, via, witness });
                    }
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum GapVerdict {
    NotApplicable { condition: u8, reason: String },
    Holds,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapCheck {
    /// Enumeration box `(x_max, y_max)` used for the minimality condition.
    pub search_box: (u64, u64),
    #[serde(flatten)]
    pub verdict: GapVerdict,
}

/// Tests `x2 - x1 | x3 - x1` and `y2 - y1 | y3 - y1` on the first three
/// solutions, after confirming the four hypotheses under which it must hold.
/// The minimality hypothesis is checked by enumeration inside `search_box`.
pub fn check_gap_divisibility(set: &SolutionSet, search_box: (u64, u64)) -> GapCheck {
    let na = |condition: u8, reason: &str| GapCheck {
        search_box,
        verdict: GapVerdict::NotApplicable { condition, reason: reason.into() },
    };
    if set.solutions.len() < 3 {
        return na(1, "fewer than three solutions");
    }
    let (s1, s2, s3) = (set.solutions[0], set.solutions[1], set.solutions[2]);
    if !(s1.x < s2.x && s2.x < s3.x && s1.y < s2.y && s2.y < s3.y) {
        return na(1, "exponents are not strictly increasing");
    }
    if s1.u == s1.v {
        return na(2, "u1 = v1");
    }
    let all = enumerate_solutions(&set.instance, search_box.0, search_box.1);
    if all
        .solutions
        .iter()
        .any(|t| t.x > s1.x && t.y > s1.y && (t.x < s2.x || t.y < s2.y))
    {
        return na(3, "a solution lies strictly between the first two");
    }
    let inst = &set.instance;
    let ra = &inst.r * pow_u64(&inst.a, s1.x);
    let sb = &inst.s * pow_u64(&inst.b, s1.y);
    let g = gcd(&ra, &sb);
    let two = BigUint::from(2u32);
    if ra / &g <= two || sb / &g <= two {
        return na(4, "R <= 2 or S <= 2");
    }
    let holds = (s3.x - s1.x) % (s2.x - s1.x) == 0 && (s3.y - s1.y) % (s2.y - s1.y) == 0;
    GapCheck {
        search_box,
        verdict: if holds { GapVerdict::Holds } else { GapVerdict::Violated },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "19b")]
    C19b,
    #[serde(rename = "21b")]
    C21b,
    #[serde(rename = "20b")]
    C20b,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::C19b => "19b",
            CaseTag::C21b => "21b",
            CaseTag::C20b => "20b",
        })
    }
}

impl FromStr for CaseTag {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "19b" => Ok(CaseTag::C19b),
            "21b" => Ok(CaseTag::C21b),
            "20b" => Ok(CaseTag::C20b),
            _ => Err(ModelError::Parse(format!("unknown case {s:?}"))),
        }
    }
}

/// Ordering pattern of a set's solutions together with their signs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCase {
    pub tag: CaseTag,
    /// `(u, v)` per solution, in the pattern's order.
    pub signs: Vec<(u8, u8)>,
}

/// Sorts by `x` and reports which of the three patterns the exponents fit:
/// `19b` is `0 = x1 < x2 < ...` with `0 = y1 < y2 < ...`; `21b` has
/// `0 = y2 < y1 < y3 < ...`; `20b` has `0 = y1 = y2 < y3 < ...`.
pub fn classify(set: &SolutionSet) -> Option<SignCase> {
    let mut sols = set.solutions.clone();
    sols.sort_by_key(|s| (s.x, s.y));
    if sols.len() < 3 || sols[0].x != 0 || sols.windows(2).any(|w| w[0].x >= w[1].x) {
        return None;
    }
    let ys: Vec<u64> = sols.iter().map(|s| s.y).collect();
    let increasing_from = |k: usize| ys[k..].windows(2).all(|w| w[0] < w[1]);
    let tag = if ys[0] == 0 && increasing_from(0) {
        CaseTag::C19b
    } else if ys[1] == 0 && ys[0] > 0 && ys[0] < ys[2] && increasing_from(2) {
        CaseTag::C21b
    } else if ys[0] == 0 && ys[1] == 0 && increasing_from(1) {
        CaseTag::C20b
    } else {
        return None;
    };
    Some(SignCase {
        tag,
        signs: sols.iter().map(|s| (s.u, s.v)).collect(),
    })
}
