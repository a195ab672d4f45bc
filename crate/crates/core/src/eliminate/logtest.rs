//! Solving for the other exponent with high-precision logarithms and asking
//! whether the answer can be an integer.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::EliminateError;
use crate::arith::{big_log, big_log_ratio, pow_u64};
use crate::model::Instance;

/// What the caller vouches for about `c/(s b^y)` at the unknown `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogHypothesis {
    /// Only integers `y` with `c/(s b^y) < 1/2` are considered, and the
    /// deviation is bounded from the instance itself.
    FromInstance,
    /// `c/(s b^y) < 10^-digits`.
    Ratio { digits: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogTestOutcome {
    /// No admissible integer is within reach; `residual` is the distance
    /// from the computed value to the nearest integer.
    NonInteger {
        #[serde(with = "crate::serde_big::rational")]
        residual: BigRational,
    },
    /// `y` is the nearest admissible integer consistent with the equation;
    /// `alternatives` lists any others.
    IntegerCandidate { y: u64, alternatives: Vec<u64> },
    PrecisionInsufficient { precision: u32 },
}

impl LogTestOutcome {
    pub fn is_non_integer(&self) -> bool {
        matches!(self, LogTestOutcome::NonInteger { .. })
    }
}

fn pow10(k: u32) -> BigInt {
    BigInt::from(pow_u64(&BigUint::from(10u32), k as u64))
}

fn nat(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

/// `(x log a + log(r/s)) / log b` as an exact rational near the true value,
/// with a radius covering every rounding.
pub fn solve_for_y(inst: &Instance, x: u64, precision: u32) -> Result<(BigRational, BigRational, BigRational), EliminateError> {
    let w = precision + 2;
    let la = big_log(&inst.a, precision)?.scaled_mantissa(w);
    let lb = big_log(&inst.b, precision)?.scaled_mantissa(w);
    let lrs = big_log_ratio(&inst.r, &inst.s, precision)?.scaled_mantissa(w);
    let num = la * BigInt::from(x) + lrs;
    let v = BigRational::new(num, lb.clone());
    let eps = BigRational::new(BigInt::one(), pow10(precision));
    let radius = (BigRational::from_integer(BigInt::from(x + 4)) + v.abs()) * BigRational::from_integer(2.into()) * &eps;
    let lb_low = BigRational::new(lb, pow10(w)) - eps;
    Ok((v, radius, lb_low))
}

fn floor_rat(q: &BigRational) -> BigInt {
    q.numer().div_floor(q.denom())
}

pub fn log_test_y(
    inst: &Instance,
    x: u64,
    precision: u32,
    hyp: LogHypothesis,
) -> Result<LogTestOutcome, EliminateError> {
    let (v, radius, lb_low) = solve_for_y(inst, x, precision)?;
    let two = BigRational::from_integer(2.into());
    let c = nat(&inst.c);
    let s = nat(&inst.s);
    let b = nat(&inst.b);
    let half = BigRational::new(1.into(), 2.into());
    let deviation = |m: u64| -> Option<BigRational> {
        match hyp {
            LogHypothesis::FromInstance => {
                let ratio = &c / (&s * pow_rat(&b, m));
                (ratio < half).then(|| &two * ratio / &lb_low)
            }
            LogHypothesis::Ratio { digits } => {
                Some(&two * BigRational::new(BigInt::one(), pow10(digits)) / &lb_low)
            }
        }
    };
    let base = floor_rat(&v);
    let nearest = {
        let f = BigRational::from_integer(base.clone());
        if &v - &f <= &f + BigRational::one() - &v {
            f
        } else {
            f + BigRational::one()
        }
    };
    let residual = (&v - &nearest).abs();
    let margin = &radius * BigRational::from_integer(pow10(10));
    let mut hits: Vec<(BigRational, u64)> = Vec::new();
    let mut tight = false;
    let mut m: BigInt = &base - 3;
    while m <= &base + 4 {
        let Some(mu) = m.to_u64() else {
            m += 1;
            continue;
        };
        if let Some(e) = deviation(mu) {
            let dist = (&v - BigRational::from_integer(m.clone())).abs();
            let slack = &dist - &e - &radius;
            if slack <= BigRational::zero() {
                hits.push((dist, mu));
            } else if slack < margin {
                tight = true;
            }
        }
        m += 1;
    }
    if !hits.is_empty() {
        hits.sort();
        let y = hits[0].1;
        let alternatives = hits[1..].iter().map(|h| h.1).collect();
        return Ok(LogTestOutcome::IntegerCandidate { y, alternatives });
    }
    if tight {
        return Ok(LogTestOutcome::PrecisionInsufficient { precision });
    }
    Ok(LogTestOutcome::NonInteger { residual })
}

fn pow_rat(b: &BigRational, m: u64) -> BigRational {
    num_traits::pow::pow(b.clone(), m as usize)
}

/// The mirror of [`log_test_y`]: solves for `x` given `y`.
pub fn log_test_x(
    inst: &Instance,
    y: u64,
    precision: u32,
    hyp: LogHypothesis,
) -> Result<LogTestOutcome, EliminateError> {
    log_test_y(&inst.associate(), y, precision, hyp)
}

/// Doubles the precision, up to eight times the starting value, until the
/// test decides.
pub fn log_test_y_auto(
    inst: &Instance,
    x: u64,
    precision: u32,
    hyp: LogHypothesis,
) -> Result<(LogTestOutcome, u32), EliminateError> {
    let mut p = precision;
    loop {
        let out = log_test_y(inst, x, p, hyp)?;
        match out {
            LogTestOutcome::PrecisionInsufficient { .. } if p < precision * 8 => p *= 2,
            LogTestOutcome::PrecisionInsufficient { .. } => {
                return Err(EliminateError::PrecisionInsufficient(p))
            }
            _ => return Ok((out, p)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::theorem1_rows;

    fn inst(a: u64, b: u64, c: u64, r: u64, s: u64) -> Instance {
        Instance::from_u64(a, b, c, r, s).unwrap()
    }

    #[test]
    fn row_six_third_solution_is_a_candidate() {
        let out = log_test_y(&inst(7, 2, 5, 3, 2), 3, 60, LogHypothesis::FromInstance).unwrap();
        assert_eq!(
            out,
            LogTestOutcome::IntegerCandidate {
                y: 9,
                alternatives: vec![]
            }
        );
        let (v, _, _) = solve_for_y(&inst(7, 2, 5, 3, 2), 3, 60).unwrap();
        let f = v.to_f64().unwrap();
        assert!((f - 9.00703).abs() < 1e-5, "{f}");
    }

    #[test]
    fn small_ratio_rules_out_non_integer() {
        // 2 log 3 / log 2 - 1 = 2.1699...
        let out = log_test_y(&inst(3, 2, 1, 1, 2), 2, 60, LogHypothesis::Ratio { digits: 30 }).unwrap();
        match out {
            LogTestOutcome::NonInteger { residual } => {
                assert!((residual.to_f64().unwrap() - 0.169925).abs() < 1e-5)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equal_bases_and_coefficients_are_exact() {
        for x in [1, 7, 40] {
            let out = log_test_y(&inst(5, 5, 1, 2, 2), x, 60, LogHypothesis::Ratio { digits: 30 }).unwrap();
            assert_eq!(out, LogTestOutcome::IntegerCandidate { y: x, alternatives: vec![] });
            let out = log_test_x(&inst(5, 5, 1, 2, 2), x, 60, LogHypothesis::Ratio { digits: 30 }).unwrap();
            assert_eq!(out, LogTestOutcome::IntegerCandidate { y: x, alternatives: vec![] });
        }
    }

    #[test]
    fn mirror_matches_associate() {
        let i = inst(7, 2, 5, 3, 2);
        for y in 0..12 {
            let a = log_test_x(&i, y, 60, LogHypothesis::Ratio { digits: 5 }).unwrap();
            let b = log_test_y(&i.associate(), y, 60, LogHypothesis::Ratio { digits: 5 }).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn theorem_solutions_under_hypothesis_are_candidates() {
        let half = BigRational::new(1.into(), 2.into());
        let mut checked = 0;
        for row in theorem1_rows() {
            let i = &row.instance;
            for sol in &row.solutions {
                let ratio = nat(&i.c) / (nat(&i.s) * pow_rat(&nat(&i.b), sol.y));
                if ratio >= half {
                    continue;
                }
                let (out, _) = log_test_y_auto(i, sol.x, 120, LogHypothesis::FromInstance).unwrap();
                match out {
                    LogTestOutcome::IntegerCandidate { y, .. } => assert_eq!(y, sol.y, "{row}"),
                    other => panic!("{row} {sol:?}: {other:?}"),
                }
                checked += 1;
            }
        }
        assert!(checked >= 8);
    }
}
