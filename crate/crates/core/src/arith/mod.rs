//! Exact integer arithmetic and fixed-point logarithms used by every other
//! module.
//!
//! Everything here is a pure function of its arguments. The only cached state
//! is the read-only table of small primes used for trial division.

mod decimal;
mod factor;
mod modular;

pub use decimal::{big_log, big_log_ratio, BigDecimal};
pub use factor::{
    factor, factor_with, is_prime, primes_up_to, small_primes, FactorOptions, Factorization,
};
pub use modular::{
    hensel_lift, is_perfect_power, mult_order, mult_order_factored, mult_order_of_prime_power,
    pow_mod_u64, primitive_power, valuation, valuation_big,
};

use num_bigint::{BigInt, BigUint};
use thiserror::Error;

/// Arbitrary-precision natural number.
pub type Natural = BigUint;
/// Arbitrary-precision signed integer.
pub type Integer = BigInt;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("arguments are not coprime: gcd({n}, {m}) = {gcd}")]
    NotCoprime { n: String, m: String, gcd: String },
    #[error("argument must be nonzero")]
    Zero,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{a0} is not a root of x^{n} {sign} 1 modulo {p}")]
    NotARoot {
        a0: String,
        n: u64,
        sign: char,
        p: String,
    },
    #[error("derivative vanishes modulo {p} at {a0}; Hensel lifting is not unique")]
    SingularDerivative { a0: String, p: String },
    #[error("factoring effort exhausted on cofactor {cofactor}")]
    FactorTimeout {
        partial: Factorization,
        cofactor: String,
    },
    #[error("precision {0} is below the minimum of 50 digits")]
    PrecisionTooLow(u32),
}

/// `(-1)^e` as a signed integer.
pub fn sign_pow(e: u8) -> i64 {
    if e % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `base^e + sign` for `sign` in {+1, -1}; `None` when the result is not a
/// natural number.
pub fn pow_plus_sign(base: &BigUint, e: u64, sign: i64) -> Option<BigUint> {
    let p = pow_u64(base, e);
    if sign >= 0 {
        Some(p + 1u32)
    } else if p.bits() == 0 {
        None
    } else {
        Some(p - 1u32)
    }
}

pub fn pow_u64(base: &BigUint, e: u64) -> BigUint {
    num_traits::pow::pow(base.clone(), e as usize)
}
