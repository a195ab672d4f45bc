//! Showing that a set of solutions has no further solution, with a
//! certificate that can be re-checked independently.
//!
//! Three engines are available: a lattice bound on `y` followed by an exact
//! scan below it, bootstrapping of gap divisors from multiplicative orders,
//! and the logarithmic integrality test.

mod bootstrap;
mod lattice;
mod logtest;

pub use bootstrap::{
    bootstrap_case, cyclotomic_value, feasible_gap_signs, order_divisor, replay, verify_order_divisor,
    BootstrapEffort, BootstrapState, BootstrapStep, GapDivisor, Side, StepSource, StopReason,
};
pub use lattice::{
    dist_to_integer, gauss_lagrange_reduce, hypothesis_floor, is_reduced, lattice_bound, lattice_bound_auto,
    LatticeBoundInput, LatticeBoundResult, LatticeVerdict, PrimitiveForm, RatioHypothesis, Vec2,
};
pub use logtest::{log_test_x, log_test_y, log_test_y_auto, solve_for_y, LogHypothesis, LogTestOutcome};

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::ArithError;
use crate::model::{Instance, Solution, SolutionSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EliminateError {
    #[error("lattice rows are linearly dependent")]
    DependentRows,
    #[error("precision of {0} digits cannot settle a rounding")]
    PrecisionInsufficient(u32),
    #[error("the anchor ({0},{1}) is not a solution")]
    BadAnchor(u64, u64),
    #[error("gcd(r a, s b) must be 1")]
    NotCoprime,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Every solution `(x, y)` with `y <= y_max`, any `x`, any signs.
///
/// For each `y` only `r a^x` in `{s b^y - c, s b^y + c, c - s b^y}` can
/// work, so a pointer on `x` that never moves back suffices.
pub fn solutions_up_to_y(inst: &Instance, y_max: u64) -> Vec<Solution> {
    let mut out = Vec::new();
    let mut x = 0u64;
    let mut p = inst.r.clone();
    let mut q = inst.s.clone();
    let c = &inst.c;
    for y in 0..=y_max {
        if y > 0 {
            q *= &inst.b;
        }
        // Smallest x with r a^x >= q - c.
        if &q > c {
            let low = &q - c;
            while p < low {
                p *= &inst.a;
                x += 1;
            }
        }
        let high = &q + c;
        let mut xx = x;
        let mut pp = p.clone();
        while pp <= high {
            if pp == high {
                out.push(Solution { x: xx, y, u: 0, v: 1 });
            } else if &pp + c == q {
                out.push(Solution { x: xx, y, u: 1, v: 0 });
            } else if &pp + &q == *c {
                out.push(Solution { x: xx, y, u: 0, v: 0 });
            }
            pp *= &inst.a;
            xx += 1;
        }
    }
    out.sort();
    out
}

fn pairs_of(sols: &[Solution]) -> Vec<(u64, u64)> {
    let set: BTreeSet<(u64, u64)> = sols.iter().map(|s| (s.x, s.y)).collect();
    set.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bootstrap,
    Lattice,
    Logtest,
    Exhaust,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Bootstrap => "bootstrap",
            Method::Lattice => "lattice",
            Method::Logtest => "logtest",
            Method::Exhaust => "exhaust",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogTestEntry {
    pub x: u64,
    pub precision: u32,
    pub outcome: LogTestOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Payload {
    /// One run per sign pattern a later solution could take.
    Bootstrap { cases: Vec<BootstrapState>, effort: BootstrapEffort },
    /// The lattice bound, then an exact scan of every `y` up to `y_max`.
    Lattice { result: Box<LatticeBoundResult>, y_max: u64 },
    /// Integrality tests for each `x` in a range; candidates are checked
    /// exactly.
    Logtest { x_lo: u64, x_hi: u64, entries: Vec<LogTestEntry> },
    Exhaust { y_max: u64 },
}

/// A replayable proof that `instance` has no solution beyond `solutions`
/// within the region described by the method:
///
/// * bootstrap: no `(x, y)` with `x3 < x <= x3 + bound` and
///   `y3 < y <= y3 + bound`, where `(x3, y3)` is `anchor`;
/// * lattice: none with `x, y <= bound`;
/// * logtest: none with `x_lo <= x <= x_hi` and `c/(s b^y) < 1/2`;
/// * exhaust: none with `y <= bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: u32,
    pub instance: Instance,
    pub solutions: Vec<(u64, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<(u64, u64)>,
    #[serde(with = "crate::serde_big::natural")]
    pub bound: BigUint,
    pub payload: Payload,
}

impl Certificate {
    pub fn method(&self) -> Method {
        match self.payload {
            Payload::Bootstrap { .. } => Method::Bootstrap,
            Payload::Lattice { .. } => Method::Lattice,
            Payload::Logtest { .. } => Method::Logtest,
            Payload::Exhaust { .. } => Method::Exhaust,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificates serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub ok: bool,
    pub reasons: Vec<String>,
}

/// Re-derives every step of the certificate from its payload.
pub fn verify_certificate(cert: &Certificate) -> Verification {
    let mut reasons = Vec::new();
    let inst = &cert.instance;
    for &(x, y) in &cert.solutions {
        if inst.signs_for(x, y).is_none() {
            reasons.push(format!("({x},{y}) is not a solution"));
        }
    }
    match &cert.payload {
        Payload::Bootstrap { cases, .. } => verify_bootstrap(cert, cases, &mut reasons),
        Payload::Lattice { result, y_max } => verify_lattice(cert, result, *y_max, &mut reasons),
        Payload::Logtest { x_lo, x_hi, entries } => verify_logtest(cert, *x_lo, *x_hi, entries, &mut reasons),
        Payload::Exhaust { y_max } => {
            if cert.bound != BigUint::from(*y_max) {
                reasons.push("bound must equal the scanned height".into());
            }
            check_scan(inst, *y_max, &cert.solutions, &mut reasons);
        }
    }
    Verification {
        ok: reasons.is_empty(),
        reasons,
    }
}

fn check_scan(inst: &Instance, y_max: u64, claimed: &[(u64, u64)], reasons: &mut Vec<String>) {
    let found = pairs_of(&solutions_up_to_y(inst, y_max));
    let claimed: BTreeSet<_> = claimed.iter().copied().collect();
    let missing: Vec<_> = found.iter().filter(|p| !claimed.contains(p)).collect();
    if !missing.is_empty() {
        reasons.push(format!("scan to y = {y_max} finds unlisted solutions {missing:?}"));
    }
}

fn verify_bootstrap(cert: &Certificate, cases: &[BootstrapState], reasons: &mut Vec<String>) {
    let inst = &cert.instance;
    if !bootstrap::gcd_condition(inst) {
        reasons.push("gcd(r a, s b) != 1".into());
        return;
    }
    let Some((x3, y3)) = cert.anchor else {
        reasons.push("bootstrap certificate without an anchor".into());
        return;
    };
    let Some(signs) = inst.signs_for(x3, y3) else {
        reasons.push(format!("anchor ({x3},{y3}) is not a solution"));
        return;
    };
    for gs in feasible_gap_signs(signs) {
        match cases.iter().find(|c| (c.gamma, c.delta) == gs) {
            None => reasons.push(format!("sign case {gs:?} not covered")),
            Some(state) => {
                if state.anchor != (x3, y3) {
                    reasons.push(format!("sign case {gs:?} uses another anchor"));
                } else if let Err(e) = replay(inst, state, &cert.bound) {
                    reasons.push(format!("sign case {gs:?}: {e}"));
                }
            }
        }
    }
}

fn verify_lattice(cert: &Certificate, result: &LatticeBoundResult, y_max: u64, reasons: &mut Vec<String>) {
    let input = &result.input;
    if input.instance != cert.instance {
        reasons.push("lattice input is for another instance".into());
        return;
    }
    let b1 = (result.b1[0].clone(), result.b1[1].clone());
    let b2 = (result.b2[0].clone(), result.b2[1].clone());
    if !is_reduced(&b1, &b2) {
        reasons.push("basis is not reduced".into());
    }
    match lattice_bound(input) {
        Ok(fresh) if fresh == *result => {}
        Ok(_) => reasons.push("recomputed lattice data differ".into()),
        Err(e) => reasons.push(format!("recomputation failed: {e}")),
    }
    match result.y_ceiling() {
        Some(ceil) if ceil <= y_max => {}
        _ => reasons.push("scan does not reach the lattice ceiling".into()),
    }
    if cert.bound > input.exp_bound {
        reasons.push(format!("bound exceeds the region covered by S and T ({})", input.exp_bound));
    }
    check_scan(&cert.instance, y_max, &cert.solutions, reasons);
}

fn verify_logtest(cert: &Certificate, x_lo: u64, x_hi: u64, entries: &[LogTestEntry], reasons: &mut Vec<String>) {
    let inst = &cert.instance;
    let listed: BTreeSet<_> = cert.solutions.iter().copied().collect();
    let xs: Vec<u64> = entries.iter().map(|e| e.x).collect();
    if xs != (x_lo..=x_hi).collect::<Vec<_>>() {
        reasons.push("entries do not cover the range".into());
    }
    for e in entries {
        match log_test_y(inst, e.x, e.precision, LogHypothesis::FromInstance) {
            Ok(out) if out == e.outcome => {}
            Ok(_) => reasons.push(format!("x = {}: outcome differs on recomputation", e.x)),
            Err(err) => reasons.push(format!("x = {}: {err}", e.x)),
        }
        match &e.outcome {
            LogTestOutcome::NonInteger { .. } => {}
            LogTestOutcome::IntegerCandidate { y, alternatives } => {
                for &yy in std::iter::once(y).chain(alternatives) {
                    if inst.signs_for(e.x, yy).is_some() && !listed.contains(&(e.x, yy)) {
                        reasons.push(format!("({}, {yy}) solves the equation", e.x));
                    }
                }
            }
            LogTestOutcome::PrecisionInsufficient { .. } => {
                reasons.push(format!("x = {}: undecided", e.x))
            }
        }
    }
}

/// How hard to try, and what counts as the global exponent bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationConfig {
    #[serde(with = "crate::serde_big::natural")]
    pub exp_bound: BigUint,
    pub effort: BootstrapEffort,
    pub use_lattice: bool,
    pub use_bootstrap: bool,
    /// Least working precision, in digits, for the lattice entries.
    pub precision: u32,
}

impl EliminationConfig {
    pub fn new(exp_bound: BigUint) -> Self {
        Self {
            exp_bound,
            effort: BootstrapEffort::default(),
            use_lattice: true,
            use_bootstrap: true,
            precision: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CannotEliminate {
    pub reason: String,
    /// Solutions beyond the given ones turned up by a scan.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub further: Vec<(u64, u64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub partial: Vec<BootstrapState>,
}

/// Lattice bound plus scan; `Err` carries the reason when it does not close.
pub fn eliminate_lattice(set: &SolutionSet, exp_bound: &BigUint) -> Result<Certificate, CannotEliminate> {
    eliminate_lattice_at(set, exp_bound, 0)
}

/// [`eliminate_lattice`] with the working precision raised to at least
/// `precision` digits.
pub fn eliminate_lattice_at(set: &SolutionSet, exp_bound: &BigUint, precision: u32) -> Result<Certificate, CannotEliminate> {
    let inst = &set.instance;
    let mut input = LatticeBoundInput::for_exponent_bound(inst.clone(), exp_bound);
    input.precision = input.precision.max(precision);
    let fail = |reason: String| CannotEliminate {
        reason,
        further: vec![],
        partial: vec![],
    };
    let result = lattice_bound_auto(&input).map_err(|e| fail(e.to_string()))?;
    let Some(ceil) = result.y_ceiling() else {
        let reason = match &result.verdict {
            LatticeVerdict::Inconclusive { reason } => reason.clone(),
            _ => unreachable!(),
        };
        return Err(fail(format!("lattice inconclusive: {reason}")));
    };
    let found = pairs_of(&solutions_up_to_y(inst, ceil));
    let known = set.pair_set();
    let further: Vec<_> = found.iter().filter(|p| !known.contains(p)).copied().collect();
    if !further.is_empty() {
        return Err(CannotEliminate {
            reason: "further solutions exist".into(),
            further,
            partial: vec![],
        });
    }
    Ok(Certificate {
        schema: 1,
        instance: inst.clone(),
        solutions: known.into_iter().collect(),
        anchor: None,
        bound: exp_bound.clone(),
        payload: Payload::Lattice {
            result: Box::new(result),
            y_max: ceil,
        },
    })
}

/// Bootstraps from `anchor` through every feasible sign case.
pub fn bootstrap(
    inst: &Instance,
    anchor: (u64, u64),
    bound: &BigUint,
    effort: &BootstrapEffort,
) -> Result<Certificate, CannotEliminate> {
    let fail = |reason: String, partial: Vec<BootstrapState>| CannotEliminate {
        reason,
        further: vec![],
        partial,
    };
    if !bootstrap::gcd_condition(inst) {
        return Err(fail(EliminateError::NotCoprime.to_string(), vec![]));
    }
    let Some(signs) = inst.signs_for(anchor.0, anchor.1) else {
        return Err(fail(EliminateError::BadAnchor(anchor.0, anchor.1).to_string(), vec![]));
    };
    let mut cases = Vec::new();
    let mut failed = None;
    for gs in feasible_gap_signs(signs) {
        let (state, stop) = bootstrap_case(inst, anchor, gs, bound, effort);
        if !state.succeeded() && failed.is_none() {
            failed = Some(format!("sign case {gs:?} {:?} at x0 = {}, y0 = {}", stop, state.x0(), state.y0()));
        }
        cases.push(state);
    }
    if let Some(reason) = failed {
        return Err(fail(reason, cases));
    }
    Ok(Certificate {
        schema: 1,
        instance: inst.clone(),
        solutions: vec![anchor],
        anchor: Some(anchor),
        bound: bound.clone(),
        payload: Payload::Bootstrap { cases, effort: *effort },
    })
}

/// Log tests for `x_lo..=x_hi`, each at the least sufficient precision from
/// `precision` upward.
pub fn eliminate_logtest(
    set: &SolutionSet,
    x_lo: u64,
    x_hi: u64,
    precision: u32,
) -> Result<Certificate, CannotEliminate> {
    let inst = &set.instance;
    let known = set.pair_set();
    let mut entries = Vec::new();
    for x in x_lo..=x_hi {
        let (outcome, p) = log_test_y_auto(inst, x, precision, LogHypothesis::FromInstance).map_err(|e| CannotEliminate {
            reason: format!("x = {x}: {e}"),
            further: vec![],
            partial: vec![],
        })?;
        if let LogTestOutcome::IntegerCandidate { y, alternatives } = &outcome {
            let further: Vec<_> = std::iter::once(y)
                .chain(alternatives)
                .filter(|&&yy| inst.signs_for(x, yy).is_some() && !known.contains(&(x, yy)))
                .map(|&yy| (x, yy))
                .collect();
            if !further.is_empty() {
                return Err(CannotEliminate {
                    reason: "further solutions exist".into(),
                    further,
                    partial: vec![],
                });
            }
        }
        entries.push(LogTestEntry { x, precision: p, outcome });
    }
    Ok(Certificate {
        schema: 1,
        instance: inst.clone(),
        solutions: known.into_iter().collect(),
        anchor: None,
        bound: BigUint::from(x_hi),
        payload: Payload::Logtest { x_lo, x_hi, entries },
    })
}

/// Exact scan of every `y <= y_max`.
pub fn eliminate_exhaust(set: &SolutionSet, y_max: u64) -> Result<Certificate, CannotEliminate> {
    let inst = &set.instance;
    let known = set.pair_set();
    let found = pairs_of(&solutions_up_to_y(inst, y_max));
    let further: Vec<_> = found.iter().filter(|p| !known.contains(p)).copied().collect();
    if !further.is_empty() {
        return Err(CannotEliminate {
            reason: "further solutions exist".into(),
            further,
            partial: vec![],
        });
    }
    Ok(Certificate {
        schema: 1,
        instance: inst.clone(),
        solutions: known.into_iter().collect(),
        anchor: None,
        bound: BigUint::from(y_max),
        payload: Payload::Exhaust { y_max },
    })
}

/// Lattice first, then bootstrapping from the solution with the largest `x`.
pub fn eliminate(set: &SolutionSet, cfg: &EliminationConfig) -> Result<Certificate, CannotEliminate> {
    let mut reasons = Vec::new();
    if cfg.use_lattice {
        match eliminate_lattice_at(set, &cfg.exp_bound, cfg.precision) {
            Ok(c) => return Ok(c),
            Err(e) if !e.further.is_empty() => return Err(e),
            Err(e) => reasons.push(e.reason),
        }
    }
    let mut partial = Vec::new();
    if cfg.use_bootstrap {
        let anchor = set
            .solutions
            .iter()
            .max_by_key(|s| (s.x, s.y))
            .map(|s| (s.x, s.y));
        if let Some(anchor) = anchor {
            match bootstrap(&set.instance, anchor, &cfg.exp_bound, &cfg.effort) {
                Ok(c) => return Ok(c),
                Err(e) => {
                    reasons.push(format!("bootstrap: {}", e.reason));
                    partial = e.partial;
                }
            }
        }
    }
    Err(CannotEliminate {
        reason: reasons.join("; "),
        further: vec![],
        partial,
    })
}
