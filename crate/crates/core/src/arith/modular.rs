use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::factor::{factor, is_prime, Factorization};
use super::ArithError;

/// Least `k >= 1` with `n^k ≡ 1 (mod m)`.
///
/// The modulus is factored and the order is assembled as the lcm of the
/// orders modulo each prime power, each obtained by stripping prime factors
/// from the group order.
pub fn mult_order(n: &BigInt, m: &BigUint) -> Result<BigUint, ArithError> {
    if *m < BigUint::from(2u32) {
        return Err(ArithError::InvalidArgument(format!(
            "modulus must be at least 2, got {m}"
        )));
    }
    let residue = reduce(n, m);
    let g = residue.gcd(m);
    if !g.is_one() {
        return Err(ArithError::NotCoprime {
            n: n.to_string(),
            m: m.to_string(),
            gcd: g.to_string(),
        });
    }
    let fac = factor(m)?;
    mult_order_factored(&residue, &fac)
}

/// Multiplicative order of `n` modulo the number whose factorization is
/// given. `n` must already be coprime to it.
pub fn mult_order_factored(n: &BigUint, modulus: &Factorization) -> Result<BigUint, ArithError> {
    let mut order = BigUint::one();
    for (p, e) in modulus.iter() {
        let o = mult_order_of_prime_power(n, p, *e)?;
        order = order.lcm(&o);
    }
    Ok(order)
}

/// Order of `n` modulo `p^e` for a prime `p`.
pub fn mult_order_of_prime_power(n: &BigUint, p: &BigUint, e: u32) -> Result<BigUint, ArithError> {
    let pe = num_traits::pow::pow(p.clone(), e as usize);
    let n = n % &pe;
    if n.is_zero() {
        return Err(ArithError::NotCoprime {
            n: n.to_string(),
            m: pe.to_string(),
            gcd: p.to_string(),
        });
    }
    if pe == BigUint::from(2u32) || n.is_one() {
        return Ok(BigUint::one());
    }
    // Order modulo p from the factorization of p - 1.
    let pm1 = p - 1u32;
    let mut o = pm1.clone();
    if pm1 > BigUint::one() {
        let fac = factor(&pm1)?;
        for (q, _) in fac.iter() {
            while (&o % q).is_zero() {
                let cand = &o / q;
                if n.modpow(&cand, p).is_one() {
                    o = cand;
                } else {
                    break;
                }
            }
        }
    } else {
        o = BigUint::one();
    }
    // The kernel of reduction mod p is a p-group, so the order modulo p^e
    // is o·p^j for the least suitable j < e.
    let mut lifted = o;
    for _ in 1..e.max(1) + 1 {
        if n.modpow(&lifted, &pe).is_one() {
            return Ok(lifted);
        }
        lifted *= p;
    }
    Err(ArithError::InvalidArgument(format!(
        "no order found for {n} modulo {pe}"
    )))
}

fn reduce(n: &BigInt, m: &BigUint) -> BigUint {
    let mi = BigInt::from_biguint(Sign::Plus, m.clone());
    let r = n.mod_floor(&mi);
    r.to_biguint().expect("mod_floor is non-negative")
}

/// Largest `e` with `p^e | n`.
pub fn valuation(p: u64, n: &BigUint) -> Result<u32, ArithError> {
    valuation_big(&BigUint::from(p), n)
}

pub fn valuation_big(p: &BigUint, n: &BigUint) -> Result<u32, ArithError> {
    if n.is_zero() {
        return Err(ArithError::Zero);
    }
    if *p < BigUint::from(2u32) {
        return Err(ArithError::InvalidArgument(format!(
            "valuation base must be at least 2, got {p}"
        )));
    }
    let mut e = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(p);
        if !r.is_zero() {
            return Ok(e);
        }
        m = q;
        e += 1;
    }
}

/// Lift a simple root `a0` of `x^n + (-1)^alpha` modulo the odd prime `p` to
/// the unique root modulo `p^k` congruent to `a0`. Newton iteration doubles
/// the precision at every step.
pub fn hensel_lift(
    n: u64,
    alpha: u8,
    p: &BigUint,
    a0: &BigUint,
    k: u32,
) -> Result<BigUint, ArithError> {
    if k == 0 {
        return Err(ArithError::InvalidArgument("k must be at least 1".into()));
    }
    if n == 0 {
        return Err(ArithError::InvalidArgument("n must be at least 1".into()));
    }
    if p.is_even() || !is_prime(p) {
        return Err(ArithError::InvalidArgument(format!(
            "{p} is not an odd prime"
        )));
    }
    let sign = if alpha % 2 == 0 { 1i32 } else { -1 };
    let pi = BigInt::from(p.clone());
    let eval = |x: &BigInt, m: &BigInt| -> BigInt {
        (x.modpow(&BigInt::from(n), m) + sign).mod_floor(m)
    };
    let deriv = |x: &BigInt, m: &BigInt| -> BigInt {
        (BigInt::from(n) * x.modpow(&BigInt::from(n - 1), m)).mod_floor(m)
    };
    let x0 = BigInt::from(a0.clone()).mod_floor(&pi);
    if !eval(&x0, &pi).is_zero() {
        return Err(ArithError::NotARoot {
            a0: a0.to_string(),
            n,
            sign: if sign > 0 { '+' } else { '-' },
            p: p.to_string(),
        });
    }
    if deriv(&x0, &pi).is_zero() {
        return Err(ArithError::SingularDerivative {
            a0: a0.to_string(),
            p: p.to_string(),
        });
    }
    let target = num_traits::pow::pow(pi.clone(), k as usize);
    let mut x = x0;
    let mut prec = 1u32;
    while prec < k {
        prec = (prec * 2).min(k);
        let m = num_traits::pow::pow(pi.clone(), prec as usize);
        let fx = eval(&x, &m);
        let dfx = deriv(&x, &m);
        let inv = mod_inverse(&dfx, &m).expect("derivative is a unit modulo p");
        x = (&x - fx * inv).mod_floor(&m);
    }
    Ok(x.mod_floor(&target).to_biguint().expect("non-negative"))
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let eg = a.extended_gcd(m);
    if eg.gcd.abs().is_one() {
        Some((eg.x * eg.gcd.signum()).mod_floor(m))
    } else {
        None
    }
}

/// Representation `n = base^exp` with `exp >= 2` and the smallest possible
/// base, or `None` when `n` is not a perfect power.
pub fn is_perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    if *n < BigUint::from(4u32) {
        return None;
    }
    // Peel off prime roots one at a time; what is left is not a power.
    let mut base = n.clone();
    let mut exp = 1u32;
    let mut p = 2u32;
    while u64::from(p) <= base.bits() {
        let r = base.nth_root(p);
        if num_traits::pow::pow(r.clone(), p as usize) == base {
            base = r;
            exp *= p;
        } else {
            p += 1;
            while (2..p).take_while(|d| d * d <= p).any(|d| p % d == 0) {
                p += 1;
            }
        }
    }
    (exp > 1).then_some((base, exp))
}

/// `(base, exp)` with `n = base^exp` and `base` not a perfect power; `exp`
/// is 1 when `n` itself is not a perfect power.
pub fn primitive_power(n: &BigUint) -> (BigUint, u32) {
    is_perfect_power(n).unwrap_or_else(|| (n.clone(), 1))
}

pub fn pow_mod_u64(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc: u128 = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

#[allow(dead_code)]
pub(crate) fn to_u64(n: &BigUint) -> Option<u64> {
    n.to_u64()
}
