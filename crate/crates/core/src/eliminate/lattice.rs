//! Lower bounds on a linear form in two logarithms from a reduced
//! two-dimensional lattice, turned into a ceiling on `y`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::EliminateError;
use crate::arith::{big_log, big_log_ratio, pow_u64, primitive_power, BigDecimal};
use crate::model::Instance;

pub type Vec2 = (BigInt, BigInt);

fn dot(u: &Vec2, v: &Vec2) -> BigInt {
    &u.0 * &v.0 + &u.1 * &v.1
}

fn det(u: &Vec2, v: &Vec2) -> BigInt {
    &u.0 * &v.1 - &u.1 * &v.0
}

/// Nearest integer to `n/d` for `d > 0`, ties toward `+∞`.
fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    let t: BigInt = n * 2 + d;
    t.div_floor(&(d * 2))
}

fn round_rat(q: &BigRational) -> BigInt {
    round_div(q.numer(), q.denom())
}

/// Distance from `q` to the nearest integer.
pub fn dist_to_integer(q: &BigRational) -> BigRational {
    (q - BigRational::from_integer(round_rat(q))).abs()
}

/// Lagrange–Gauss reduction of the lattice spanned by two integer rows.
///
/// The output satisfies `|b1| <= |b2|` and `2|b1·b2| <= |b1|^2`.
pub fn gauss_lagrange_reduce(row1: Vec2, row2: Vec2) -> Result<(Vec2, Vec2), EliminateError> {
    if det(&row1, &row2).is_zero() {
        return Err(EliminateError::DependentRows);
    }
    let (mut u, mut v) = (row1, row2);
    if dot(&u, &u) > dot(&v, &v) {
        std::mem::swap(&mut u, &mut v);
    }
    loop {
        let m = round_div(&dot(&u, &v), &dot(&u, &u));
        v = (&v.0 - &m * &u.0, &v.1 - &m * &u.1);
        if dot(&v, &v) >= dot(&u, &u) {
            return Ok((u, v));
        }
        std::mem::swap(&mut u, &mut v);
    }
}

/// True when `(b1, b2)` is Lagrange-reduced.
pub fn is_reduced(b1: &Vec2, b2: &Vec2) -> bool {
    let n1 = dot(b1, b1);
    !det(b1, b2).is_zero() && n1 <= dot(b2, b2) && dot(b1, b2).abs() * 2 <= n1
}

/// Which bound on `c/(s b^y)` the caller vouches for above `y_floor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioHypothesis {
    /// `c/(s b^y) < 1/2`.
    Half,
    /// `c/(s b^y) < 0.79`.
    Below079,
}

impl RatioHypothesis {
    pub fn value(self) -> BigRational {
        match self {
            RatioHypothesis::Half => BigRational::new(1.into(), 2.into()),
            RatioHypothesis::Below079 => BigRational::new(79.into(), 100.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBoundInput {
    pub instance: Instance,
    /// The scaling constant `C`.
    #[serde(with = "crate::serde_big::natural")]
    pub scale: BigUint,
    /// Solutions with `x, y <= exp_bound` are covered.
    #[serde(with = "crate::serde_big::natural")]
    pub exp_bound: BigUint,
    pub precision: u32,
    pub hypothesis: RatioHypothesis,
    /// When `σ2` is an integer, bound the distance through `σ1` or the
    /// shortest vector instead of giving up.
    pub integral_fallback: bool,
}

impl LatticeBoundInput {
    /// `C = 10^(2·digits(X) + 6)` for the exponent bound `X`.
    pub fn for_exponent_bound(instance: Instance, exp_bound: &BigUint) -> Self {
        let digits = exp_bound.to_string().len() as u32;
        let scale_digits = 2 * digits + 6;
        Self {
            instance,
            scale: pow_u64(&BigUint::from(10u32), scale_digits as u64),
            exp_bound: exp_bound.clone(),
            precision: (scale_digits + 30).max(50),
            hypothesis: RatioHypothesis::Half,
            integral_fallback: true,
        }
    }
}

/// `a = a0^k`, `b = b0^l`, `r = a0^i r'`, `s = b0^j s'` with `a0, b0` not
/// perfect powers and `a0 ∤ r'`, `b0 ∤ s'`. The linear form becomes
/// `log(r'/s') + X log a0 - Y log b0` with `X = kx + i`, `Y = ly + j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitiveForm {
    #[serde(with = "crate::serde_big::natural")]
    pub a0: BigUint,
    #[serde(with = "crate::serde_big::natural")]
    pub b0: BigUint,
    pub k: u64,
    pub l: u64,
    pub i: u64,
    pub j: u64,
    #[serde(with = "crate::serde_big::natural")]
    pub r1: BigUint,
    #[serde(with = "crate::serde_big::natural")]
    pub s1: BigUint,
}

impl PrimitiveForm {
    pub fn of(inst: &Instance) -> Self {
        let (a0, k) = primitive_power(&inst.a);
        let (b0, l) = primitive_power(&inst.b);
        let (i, r1) = strip(&inst.r, &a0);
        let (j, s1) = strip(&inst.s, &b0);
        Self {
            a0,
            b0,
            k: k as u64,
            l: l as u64,
            i,
            j,
            r1,
            s1,
        }
    }
}

fn strip(n: &BigUint, p: &BigUint) -> (u64, BigUint) {
    let mut e = 0;
    let mut m = n.clone();
    while (&m % p).is_zero() {
        m /= p;
        e += 1;
    }
    (e, m)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatticeVerdict {
    /// No solution with `y > y_max` inside the covered box.
    Bound { y_max: u64 },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeBoundResult {
    pub input: LatticeBoundInput,
    pub form: PrimitiveForm,
    /// `S`, bounding `X^2`.
    #[serde(with = "crate::serde_big::natural")]
    pub s_const: BigUint,
    /// `T`, bounding `(X + Y + 1)/2`.
    #[serde(with = "crate::serde_big::rational")]
    pub t_const: BigRational,
    /// `[C log a0]`, `[-C log b0]` and `[-C log(r'/s')]`.
    #[serde(with = "crate::serde_big::integers")]
    pub entries: Vec<BigInt>,
    #[serde(with = "crate::serde_big::integers")]
    pub b1: Vec<BigInt>,
    #[serde(with = "crate::serde_big::integers")]
    pub b2: Vec<BigInt>,
    #[serde(with = "crate::serde_big::rationals")]
    pub b2_star: Vec<BigRational>,
    #[serde(with = "crate::serde_big::rationals")]
    pub sigma: Vec<BigRational>,
    /// `{σ2}`, the distance from `σ2` to the nearest integer.
    #[serde(with = "crate::serde_big::rational")]
    pub sigma2_dist: BigRational,
    #[serde(with = "crate::serde_big::rational")]
    pub c1: BigRational,
    #[serde(with = "crate::serde_big::rational")]
    pub c2: BigRational,
    pub c3: f64,
    #[serde(with = "crate::serde_big::rational")]
    pub c4_sq: BigRational,
    /// Set when `σ2` is an integer and `c4` comes from another direction.
    pub degenerate: bool,
    /// Least `y` from which the ratio hypothesis holds and `x = 0` is
    /// impossible.
    pub y_floor: u64,
    pub verdict: LatticeVerdict,
}

impl LatticeBoundResult {
    /// The ceiling on `y` for any solution in the covered box, once the
    /// hypothesis floor is taken into account.
    pub fn y_ceiling(&self) -> Option<u64> {
        match self.verdict {
            LatticeVerdict::Bound { y_max } => Some(y_max.max(self.y_floor)),
            LatticeVerdict::Inconclusive { .. } => None,
        }
    }
}

/// `[scale · value]` with the rounding checked against the error of `value`.
fn nearest_scaled(value: &BigDecimal, scale: &BigUint, precision: u32) -> Result<BigInt, EliminateError> {
    let m = value.scaled_mantissa(precision) * BigInt::from(scale.clone());
    let unit = BigInt::from(pow_u64(&BigUint::from(10u32), precision as u64));
    let half = &unit / 2;
    let shifted: BigInt = &m + &half;
    let n = shifted.div_floor(&unit);
    // |value - true| < 2·10^-precision after truncation, so m is off by less
    // than 2·scale.
    let rem = shifted.mod_floor(&unit);
    let tol = BigInt::from(scale.clone()) * 4;
    if rem < tol || &unit - &rem <= tol {
        return Err(EliminateError::PrecisionInsufficient(precision));
    }
    Ok(n)
}

pub(crate) fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_string().parse::<f64>().map(f64::ln).unwrap_or(f64::NAN);
    }
    let shift = bits - 900;
    ln_big(&(n >> shift)) + shift as f64 * std::f64::consts::LN_2
}

fn ln_rat(q: &BigRational) -> f64 {
    ln_big(q.numer().magnitude()) - ln_big(q.denom().magnitude())
}

/// Least `y` with `s b^y · h > c` and `s b^y > r + c`.
pub fn hypothesis_floor(inst: &Instance, h: &BigRational) -> u64 {
    let c = nat_rat(&inst.c);
    let rc = nat_rat(&(&inst.r + &inst.c));
    let b = nat_rat(&inst.b);
    let mut sb = nat_rat(&inst.s);
    let mut y = 0;
    while &sb * h <= c || sb <= rc {
        sb *= &b;
        y += 1;
    }
    y
}

pub fn lattice_bound(input: &LatticeBoundInput) -> Result<LatticeBoundResult, EliminateError> {
    let form = PrimitiveForm::of(&input.instance);
    let p = input.precision;
    let ln_a = big_log(&form.a0, p)?;
    let ln_b = big_log(&form.b0, p)?;
    let ln_rs = big_log_ratio(&form.r1, &form.s1, p)?;
    let la = nearest_scaled(&ln_a, &input.scale, p)?;
    let lb = nearest_scaled(&ln_b.neg(), &input.scale, p)?;
    let ly = nearest_scaled(&ln_rs.neg(), &input.scale, p)?;
    Ok(lattice_from_entries(input, form, [la, lb, ly], ln_b.to_f64()))
}

/// Like [`lattice_bound`], doubling the precision up to eight times over
/// when a rounding is too close to call.
pub fn lattice_bound_auto(input: &LatticeBoundInput) -> Result<LatticeBoundResult, EliminateError> {
    let mut cur = input.clone();
    loop {
        match lattice_bound(&cur) {
            Err(EliminateError::PrecisionInsufficient(p)) if p < input.precision * 8 => {
                cur.precision = p * 2;
            }
            other => return other,
        }
    }
}

fn rat(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

fn nat_rat(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()))
}

fn min_rat(a: BigRational, b: BigRational) -> BigRational {
    if a < b {
        a
    } else {
        b
    }
}

/// The exact part of the computation, from the three rounded entries.
pub(crate) fn lattice_from_entries(
    input: &LatticeBoundInput,
    form: PrimitiveForm,
    entries: [BigInt; 3],
    c3: f64,
) -> LatticeBoundResult {
    let inst = &input.instance;
    let [la, lb, ly] = entries;
    let xb = &input.exp_bound;
    let x_cap = xb * form.k + form.i;
    let y_cap = xb * form.l + form.j;
    let s_const = &x_cap * &x_cap;
    let t_const = BigRational::new(BigInt::from(&x_cap + &y_cap + 1u32), 2.into());

    let row1 = (BigInt::one(), la.clone());
    let row2 = (BigInt::zero(), lb.clone());
    let (b1, b2) = gauss_lagrange_reduce(row1, row2).expect("la, lb rows are independent");
    let d = det(&b1, &b2);
    let n1 = dot(&b1, &b1);
    let mu = BigRational::new(dot(&b1, &b2), n1.clone());
    let b2s = (rat(&b2.0) - &mu * rat(&b1.0), rat(&b2.1) - &mu * rat(&b1.1));
    let n2s = BigRational::new(&d * &d, n1.clone());
    // σ1 b1 + σ2 b2 = (0, ly)
    let y = (BigInt::zero(), ly.clone());
    let sigma1 = BigRational::new(det(&y, &b2), d.clone());
    let sigma2 = BigRational::new(det(&b1, &y), d.clone());
    let dist2 = dist_to_integer(&sigma2);
    let dist1 = dist_to_integer(&sigma1);
    let n1r = rat(&n1);
    let c1 = {
        let q = &n1r / &n2s;
        if q > BigRational::one() {
            q
        } else {
            BigRational::one()
        }
    };
    let mut degenerate = false;
    let c4_sq = if !dist2.is_zero() || !input.integral_fallback {
        &dist2 * &dist2 * &n1r / &c1
    } else if !dist1.is_zero() {
        // Points with the same b2 coordinate as the target sit on a line
        // parallel to b1; all others are at least |b2*| away.
        degenerate = true;
        min_rat(&dist1 * &dist1 * &n1r, n2s.clone())
    } else {
        // The target is a lattice point; every other point is at least the
        // shortest vector away. The target itself has X = 0, so x = 0,
        // which y_floor excludes.
        degenerate = true;
        n1r.clone()
    };
    let c2 = nat_rat(&inst.c) * BigRational::from_integer(2.into()) / nat_rat(&form.s1);
    let y_floor = hypothesis_floor(inst, &input.hypothesis.value());

    let gate = c4_sq > nat_rat(&s_const) + &t_const * &t_const;
    let verdict = if !gate {
        LatticeVerdict::Inconclusive {
            reason: "c4^2 <= S + T^2".into(),
        }
    } else {
        match eq25(input, &s_const, &t_const, &c4_sq, &c2, c3) {
            Some(big_y) if big_y < form.j => LatticeVerdict::Bound { y_max: 0 },
            Some(big_y) => LatticeVerdict::Bound {
                y_max: (big_y - form.j) / form.l,
            },
            None => LatticeVerdict::Inconclusive {
                reason: "gate holds too narrowly for a floating evaluation".into(),
            },
        }
    };
    LatticeBoundResult {
        input: input.clone(),
        form,
        s_const,
        t_const,
        entries: vec![la, lb, ly],
        b1: vec![b1.0, b1.1],
        b2: vec![b2.0, b2.1],
        b2_star: vec![b2s.0, b2s.1],
        sigma: vec![sigma1, sigma2],
        sigma2_dist: dist2,
        c1,
        c2,
        c3,
        c4_sq,
        degenerate,
        y_floor,
        verdict,
    }
}

/// `Y <= (log(C c2) - log(sqrt(c4^2 - S) - T)) / c3`, evaluated in floating
/// point with slack in the safe direction.
fn eq25(
    input: &LatticeBoundInput,
    s_const: &BigUint,
    t_const: &BigRational,
    c4_sq: &BigRational,
    c2: &BigRational,
    c3: f64,
) -> Option<u64> {
    let diff_sq = c4_sq - nat_rat(s_const);
    let root = (0.5 * ln_rat(&diff_sq)).exp() * (1.0 - 1e-12);
    let t = ln_rat(t_const).exp() * (1.0 + 1e-12);
    let gap = root - t;
    if !(gap > 0.0 && gap.is_finite()) || gap < root * 1e-9 {
        return None;
    }
    let num = ln_big(&input.scale) + ln_rat(c2) - gap.ln();
    let val = num / c3;
    let upper = val + val.abs() * 1e-10 + 1e-9;
    Some(if upper < 0.0 { 0 } else { upper.floor() as u64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(a: i64, b: i64) -> Vec2 {
        (a.into(), b.into())
    }

    #[test]
    fn identity_basis_is_unchanged() {
        let (b1, b2) = gauss_lagrange_reduce(v(1, 0), v(0, 1)).unwrap();
        assert_eq!((b1, b2), (v(1, 0), v(0, 1)));
    }

    #[test]
    fn reduction_keeps_determinant() {
        let (b1, b2) = gauss_lagrange_reduce(v(1, 5), v(0, 3)).unwrap();
        assert_eq!(det(&b1, &b2).abs(), BigInt::from(3));
        assert!(is_reduced(&b1, &b2));
        assert!(dot(&b1, &b1) <= BigInt::from(9));
        assert!(gauss_lagrange_reduce(v(2, 4), v(1, 2)).is_err());
    }

    #[test]
    fn equal_coefficients_are_inconclusive() {
        let inst = Instance::from_u64(3, 2, 1, 5, 5).unwrap();
        let mut input = LatticeBoundInput::for_exponent_bound(inst, &BigUint::from(10_000u32));
        input.integral_fallback = false;
        let res = lattice_bound_auto(&input).unwrap();
        assert!(res.sigma[1].is_zero());
        assert!(matches!(res.verdict, LatticeVerdict::Inconclusive { .. }));
        // The shortest vector still separates the target from every other
        // lattice point.
        input.integral_fallback = true;
        let res = lattice_bound_auto(&input).unwrap();
        assert!(res.degenerate);
        assert!(matches!(res.verdict, LatticeVerdict::Bound { .. }));
    }
}
