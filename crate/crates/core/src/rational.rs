//! Exact rational scalars and the handful of extra operations the kernel
//! needs on top of `num-rational`: exact powers with rational exponents,
//! integer n-th roots, and float conversion.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number; the base coefficient field of the kernel.
pub type Rational = BigRational;

/// Shorthand constructor from small integers. Panics on q = 0.
pub fn rat(p: i64, q: i64) -> Rational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i64) -> Rational {
    BigRational::from_integer(BigInt::from(p))
}

pub fn to_f64(r: &Rational) -> f64 {
    // BigRational::to_f64 handles magnitudes beyond f64 by saturating;
    // our values stay far inside the representable range.
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact n-th root of a nonnegative integer, if it exists.
fn exact_nth_root_int(v: &BigInt, n: u32) -> Option<BigInt> {
    if v.is_negative() {
        return None;
    }
    let r = v.nth_root(n);
    if num_traits::pow::pow(r.clone(), n as usize) == *v {
        Some(r)
    } else {
        None
    }
}

/// Exact base^exp for rational base and exponent.
///
/// Requires base > 0 when the exponent is non-integral and base != 0 for
/// negative exponents; fails with `Exactness` when the root is irrational.
pub fn pow_rational(base: &Rational, exp: &Rational) -> Result<Rational> {
    if exp.is_zero() {
        return Ok(Rational::one());
    }
    if base.is_zero() {
        if exp.is_negative() {
            return Err(Error::Domain("0 raised to a negative power".into()));
        }
        return Ok(Rational::zero());
    }
    let p = exp.numer().clone();
    let q = exp.denom().to_u32().ok_or_else(|| {
        Error::Exactness(format!("exponent denominator too large: {}", exp.denom()))
    })?;

    // Integer power first (exact in all cases), then the q-th root.
    let abs_p = p
        .abs()
        .to_usize()
        .ok_or_else(|| Error::Exactness(format!("exponent numerator too large: {p}")))?;
    let mut powered = num_traits::pow::pow(base.clone(), abs_p);
    if p.is_negative() {
        powered = powered.recip();
    }
    if q == 1 {
        return Ok(powered);
    }
    if powered.is_negative() {
        return Err(Error::Domain(format!(
            "fractional power of a negative rational: ({base})^({exp})"
        )));
    }
    let num = exact_nth_root_int(powered.numer(), q)
        .ok_or_else(|| Error::Exactness(format!("({base})^({exp}) is irrational")))?;
    let den = exact_nth_root_int(powered.denom(), q)
        .ok_or_else(|| Error::Exactness(format!("({base})^({exp}) is irrational")))?;
    Ok(Rational::new(num, den))
}

/// Parses "p", "-p" or "p/q" into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let err = || Error::Invalid(format!("not a rational literal: {text:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(Error::Invalid("zero denominator".into()));
        }
        Ok(Rational::new(p, q))
    } else {
        let p: BigInt = s.parse().map_err(|_| err())?;
        Ok(Rational::from_integer(p))
    }
}

/// Rescales a rational vector to the primitive integer representative:
/// entries share no common factor and the first nonzero entry is positive.
pub fn primitive_integer_vector(v: &[Rational]) -> Vec<Rational> {
    if v.iter().all(|c| c.is_zero()) {
        return v.to_vec();
    }
    let mut denom_lcm = BigInt::one();
    for c in v {
        denom_lcm = denom_lcm.lcm(c.denom());
    }
    let ints: Vec<BigInt> = v
        .iter()
        .map(|c| c.numer() * (&denom_lcm / c.denom()))
        .collect();
    let mut g = BigInt::zero();
    for n in &ints {
        g = g.gcd(n);
    }
    let sign = ints
        .iter()
        .find(|n| !n.is_zero())
        .map(|n| if n.is_negative() { -1 } else { 1 })
        .unwrap_or(1);
    let g = g * BigInt::from(sign);
    ints.into_iter()
        .map(|n| Rational::from_integer(n / &g))
        .collect()
}
