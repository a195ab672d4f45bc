//! Base-10 fixed-point numbers and natural logarithms.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ArithError;

/// `mantissa · 10^exponent`, carrying the number of fractional digits that
/// are known to be correct.
#[derive(Debug, Clone)]
pub struct BigDecimal {
    mantissa: BigInt,
    exponent: i64,
    precision: u32,
}

fn pow10(k: u32) -> BigInt {
    num_traits::pow::pow(BigInt::from(10u32), k as usize)
}

impl BigDecimal {
    pub fn from_integer(n: BigInt) -> Self {
        Self {
            mantissa: n,
            exponent: 0,
            precision: u32::MAX,
        }
    }

    pub fn zero() -> Self {
        Self::from_integer(BigInt::zero())
    }

    /// `mantissa / 10^scale`, exact.
    pub fn from_scaled(mantissa: BigInt, scale: u32) -> Self {
        Self {
            mantissa,
            exponent: -(scale as i64),
            precision: u32::MAX,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// Fractional digits guaranteed correct (`u32::MAX` for exact values).
    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn with_precision(mut self, precision: u32) -> Self {
        self.precision = precision;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn sign(&self) -> Sign {
        self.mantissa.sign()
    }

    fn scale(&self) -> u32 {
        (-self.exponent).max(0) as u32
    }

    /// Mantissa rescaled to exactly `scale` fractional digits (truncating
    /// toward negative infinity when digits are dropped).
    pub fn scaled_mantissa(&self, scale: u32) -> BigInt {
        let shift = scale as i64 + self.exponent;
        match shift.cmp(&0) {
            Ordering::Equal => self.mantissa.clone(),
            Ordering::Greater => &self.mantissa * pow10(shift as u32),
            Ordering::Less => self.mantissa.div_floor(&pow10((-shift) as u32)),
        }
    }

    fn align(&self, other: &Self) -> (BigInt, BigInt, u32) {
        let s = self.scale().max(other.scale());
        (self.scaled_mantissa(s), other.scaled_mantissa(s), s)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b, s) = self.align(other);
        Self::from_scaled(a + b, s).with_precision(self.precision.min(other.precision))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (a, b, s) = self.align(other);
        Self::from_scaled(a - b, s).with_precision(self.precision.min(other.precision))
    }

    pub fn neg(&self) -> Self {
        Self {
            mantissa: -&self.mantissa,
            ..self.clone()
        }
    }

    /// Exact product. The stated precision is not adjusted; callers that
    /// scale an approximate value by a large factor must track the error.
    pub fn mul(&self, other: &Self) -> Self {
        Self {
            mantissa: &self.mantissa * &other.mantissa,
            exponent: self.exponent + other.exponent,
            precision: self.precision.min(other.precision),
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        Self {
            mantissa: &self.mantissa * k,
            ..self.clone()
        }
    }

    /// Quotient truncated toward negative infinity to `scale` fractional
    /// digits.
    pub fn div(&self, other: &Self, scale: u32) -> Result<Self, ArithError> {
        if other.is_zero() {
            return Err(ArithError::Zero);
        }
        // self/other = (ms·10^es)/(mo·10^eo); target mantissa q with
        // q·10^-scale ≈ that.
        let shift = scale as i64 + self.exponent - other.exponent;
        let (num, den) = if shift >= 0 {
            (&self.mantissa * pow10(shift as u32), other.mantissa.clone())
        } else {
            (self.mantissa.clone(), &other.mantissa * pow10((-shift) as u32))
        };
        Ok(Self::from_scaled(num.div_floor(&den), scale)
            .with_precision(self.precision.min(other.precision).min(scale)))
    }

    pub fn floor(&self) -> BigInt {
        self.scaled_mantissa(0)
    }

    /// Nearest integer, halves rounded toward positive infinity.
    pub fn round_half_up(&self) -> BigInt {
        let s = self.scale();
        if s == 0 {
            return self.scaled_mantissa(0);
        }
        let m = self.scaled_mantissa(s);
        let half: BigInt = pow10(s) / 2;
        (m + half).div_floor(&pow10(s))
    }

    /// Distance to the nearest integer, as an exact decimal.
    pub fn distance_to_integer(&self) -> Self {
        let r = Self::from_integer(self.round_half_up());
        let d = self.sub(&r);
        Self {
            mantissa: d.mantissa.abs(),
            ..d
        }
    }

    /// Fractional part in `[0, 1)`.
    pub fn fract(&self) -> Self {
        self.sub(&Self::from_integer(self.floor()))
    }

    pub fn to_f64(&self) -> f64 {
        // Keep about 30 significant digits before converting.
        let digits = self.mantissa.abs().to_string().len() as i64;
        let drop = (digits - 30).max(0);
        let m = if drop > 0 {
            &self.mantissa / pow10(drop as u32)
        } else {
            self.mantissa.clone()
        };
        let mf = m.to_f64().unwrap_or(f64::NAN);
        mf * 10f64.powi((self.exponent + drop) as i32)
    }

    /// Rounds (toward negative infinity) to `scale` fractional digits.
    pub fn truncate(&self, scale: u32) -> Self {
        Self::from_scaled(self.scaled_mantissa(scale), scale)
            .with_precision(self.precision.min(scale))
    }

    /// `10^-k` as an exact decimal.
    pub fn ulp(k: u32) -> Self {
        Self::from_scaled(BigInt::one(), k)
    }

    pub fn abs(&self) -> Self {
        Self {
            mantissa: self.mantissa.abs(),
            ..self.clone()
        }
    }
}

impl PartialEq for BigDecimal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BigDecimal {}

impl PartialOrd for BigDecimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigDecimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.align(other);
        a.cmp(&b)
    }
}

impl fmt::Display for BigDecimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent >= 0 {
            return write!(f, "{}", self.scaled_mantissa(0));
        }
        let s = self.scale() as usize;
        let digits = self.mantissa.abs().to_string();
        let padded = if digits.len() <= s {
            format!("{}{}", "0".repeat(s + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int, frac) = padded.split_at(padded.len() - s);
        let sign = if self.mantissa.is_negative() { "-" } else { "" };
        write!(f, "{sign}{int}.{frac}")
    }
}

/// `atanh(p/q)` scaled by `unit`, with |p/q| ≤ 1/3. Each truncated step
/// loses less than one unit.
fn atanh_scaled(p: &BigInt, q: &BigInt, unit: &BigInt) -> BigInt {
    let q2 = q * q;
    let p2 = p * p;
    let mut power = unit * p / q;
    let mut sum = power.clone();
    let mut k = 1u64;
    loop {
        power = &power * &p2 / &q2;
        if power.is_zero() {
            break;
        }
        k += 2;
        sum += &power / BigInt::from(k);
    }
    sum
}

fn min_precision(precision: u32) -> Result<(), ArithError> {
    if precision < 50 {
        Err(ArithError::PrecisionTooLow(precision))
    } else {
        Ok(())
    }
}

/// `ln n` scaled by `10^(precision + guard)`, with the guard chosen from the
/// size of `n` so that the total error stays below one unit at `precision`.
fn ln_scaled(n: &BigUint, unit: &BigInt) -> BigInt {
    let bits = n.bits();
    // 2^k nearest to n in ratio: pick k from bits and the next bit.
    let mut k = bits - 1;
    if bits >= 2 && n.bit(bits - 2) {
        k += 1;
    }
    let two_k = BigInt::one() << k;
    let n = BigInt::from(n.clone());
    let ln2 = atanh_scaled(&BigInt::one(), &BigInt::from(3u32), unit) * 2;
    let mut out = ln2 * BigInt::from(k);
    if n != two_k {
        out += atanh_scaled(&(&n - &two_k), &(&n + &two_k), unit) * 2;
    }
    out
}

/// Each series loses under one unit per term and there are about
/// `2.2·work` terms; `ln 2` is further multiplied by up to `bits(n)`.
fn guard_digits(n: &BigUint, precision: u32) -> u32 {
    let budget = 5 * (precision as u64 + 200) * (n.bits() + 2);
    4 + budget.to_string().len() as u32
}

/// Natural logarithm of `n ≥ 2`, with absolute error below `10^-precision`.
pub fn big_log(n: &BigUint, precision: u32) -> Result<BigDecimal, ArithError> {
    min_precision(precision)?;
    if *n < BigUint::from(2u32) {
        return Err(ArithError::InvalidArgument(format!(
            "logarithm needs n >= 2, got {n}"
        )));
    }
    let guard = guard_digits(n, precision);
    let work = precision + guard;
    let unit = pow10(work);
    let v = ln_scaled(n, &unit);
    Ok(BigDecimal::from_scaled(v, work)
        .truncate(precision + 2)
        .with_precision(precision))
}

/// `ln(p/q)` for `p, q ≥ 1`, with absolute error below `10^-precision`.
pub fn big_log_ratio(p: &BigUint, q: &BigUint, precision: u32) -> Result<BigDecimal, ArithError> {
    min_precision(precision)?;
    if p.is_zero() || q.is_zero() {
        return Err(ArithError::Zero);
    }
    if p == q {
        return Ok(BigDecimal::zero());
    }
    let guard = guard_digits(p, precision).max(guard_digits(q, precision)) + 1;
    let work = precision + guard;
    let unit = pow10(work);
    let lp = if p.is_one() {
        BigInt::zero()
    } else {
        ln_scaled(p, &unit)
    };
    let lq = if q.is_one() {
        BigInt::zero()
    } else {
        ln_scaled(q, &unit)
    };
    Ok(BigDecimal::from_scaled(lp - lq, work)
        .truncate(precision + 2)
        .with_precision(precision))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LN2_100: &str = "0.6931471805599453094172321214581765680755001343602552541206800094933936219696947156058633269964186875";

    /// Independent oracle: Newton iteration y ← y + 2(n − e^y)/(n + e^y)
    /// with e^y from a Taylor series after halving the argument.
    fn oracle_ln(n: u64, digits: u32) -> BigInt {
        let work = digits + 30;
        let unit = pow10(work);
        let exp = |y: &BigInt| -> BigInt {
            let halvings = 40u32;
            let z = y >> halvings;
            let mut term = unit.clone();
            let mut sum = unit.clone();
            let mut i = 1u32;
            loop {
                term = &term * &z / &unit / BigInt::from(i);
                if term.is_zero() {
                    break;
                }
                sum += &term;
                i += 1;
            }
            for _ in 0..halvings {
                sum = &sum * &sum / &unit;
            }
            sum
        };
        let target = BigInt::from(n) * &unit;
        let mut y = BigInt::from(((n as f64).ln() * 1e15) as i64) * &unit / BigInt::from(10u64.pow(15));
        for _ in 0..12 {
            let e = exp(&y);
            y += BigInt::from(2) * (&target - &e) * &unit / (&target + &e);
        }
        y / pow10(30)
    }

    fn digits_of(d: &BigDecimal, k: u32) -> BigInt {
        d.scaled_mantissa(k)
    }

    #[test]
    fn ln2_matches_reference_digits() {
        let v = big_log(&BigUint::from(2u32), 100).unwrap();
        let s = v.to_string();
        assert_eq!(&s[..100], &LN2_100[..100]);
    }

    #[test]
    fn ln2_to_sixty_digits() {
        let v = big_log(&BigUint::from(2u32), 60).unwrap();
        assert!(v.to_string().starts_with("0.693147180559945309417232121458"));
    }

    #[test]
    fn log_ratio_of_equal_arguments_is_zero() {
        let z = big_log_ratio(&BigUint::from(5u32), &BigUint::from(5u32), 60).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn log3_over_log2() {
        let l3 = big_log(&BigUint::from(3u32), 60).unwrap();
        let l2 = big_log(&BigUint::from(2u32), 60).unwrap();
        let q = l3.div(&l2, 55).unwrap();
        assert!(q.to_string().starts_with("1.58496250072115618145373894394"));
    }

    #[test]
    fn agrees_with_newton_oracle() {
        for n in [2u64, 3, 5, 7, 10, 1477, 56744, 1_000_003, u32::MAX as u64] {
            let d = 80;
            let ours = digits_of(&big_log(&BigUint::from(n), d).unwrap(), d);
            let theirs = oracle_ln(n, d);
            assert!((ours - theirs).abs() <= BigInt::from(2), "n={n}");
        }
    }

    #[test]
    fn rejects_small_arguments() {
        assert!(big_log(&BigUint::one(), 60).is_err());
        assert!(big_log(&BigUint::zero(), 60).is_err());
        assert!(matches!(
            big_log(&BigUint::from(3u32), 10),
            Err(ArithError::PrecisionTooLow(10))
        ));
    }

    #[test]
    fn ratio_matches_difference() {
        let p = BigUint::from(3u32);
        let q = BigUint::from(2u32);
        let r = big_log_ratio(&p, &q, 70).unwrap();
        let d = big_log(&p, 70).unwrap().sub(&big_log(&q, 70).unwrap());
        assert!((r.scaled_mantissa(68) - d.scaled_mantissa(68)).abs() <= BigInt::from(1));
        let inv = big_log_ratio(&q, &p, 70).unwrap();
        assert!((r.scaled_mantissa(68) + inv.scaled_mantissa(68)).abs() <= BigInt::from(1));
    }

    #[test]
    fn rounding_and_display() {
        let x = BigDecimal::from_scaled(BigInt::from(-25), 1);
        assert_eq!(x.to_string(), "-2.5");
        assert_eq!(x.round_half_up(), BigInt::from(-2));
        assert_eq!(x.floor(), BigInt::from(-3));
        let y = BigDecimal::from_scaled(BigInt::from(35), 1);
        assert_eq!(y.round_half_up(), BigInt::from(4));
        assert_eq!(y.distance_to_integer().to_string(), "0.5");
        assert_eq!(BigDecimal::from_scaled(BigInt::from(7), 3).to_string(), "0.007");
        assert!((y.to_f64() - 3.5).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn precision_increase_is_consistent(n in 2u64..u64::MAX, d in 50u32..140) {
            let a = big_log(&BigUint::from(n), d).unwrap();
            let b = big_log(&BigUint::from(n), d + 20).unwrap();
            let k = d - 2;
            let diff = (a.scaled_mantissa(k) - b.scaled_mantissa(k)).abs();
            prop_assert!(diff <= BigInt::one());
        }
    }
}
