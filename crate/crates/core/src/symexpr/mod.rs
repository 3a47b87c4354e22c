//! Exact canonical-form expressions over the monomial ring generated by
//! x, y (rational exponents) and alpha, hbar (nonnegative integer
//! exponents), with Gaussian-rational coefficients.
//!
//! An [`Expression`] is a finite map from [`MonomialKey`] to nonzero
//! coefficient; two expressions are equal iff the maps are equal, so every
//! "is zero" verdict downstream is an exact theorem, not an approximation.

mod parser;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::gaussian::GaussianRational;
use crate::rational::{pow_rational, rat, to_f64, Rational};

pub use parser::parse_phase_polynomial_str;

/// The two continuous variables of the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

/// One monomial x^r · y^s · alpha^a · hbar^h. Ordering is lexicographic on
/// the 4-tuple, which fixes the canonical printing order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MonomialKey {
    pub x_exp: Rational,
    pub y_exp: Rational,
    pub alpha_pow: u32,
    pub hbar_pow: u32,
}

impl MonomialKey {
    pub fn unit() -> Self {
        Self {
            x_exp: Rational::zero(),
            y_exp: Rational::zero(),
            alpha_pow: 0,
            hbar_pow: 0,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.x_exp.is_zero() && self.y_exp.is_zero() && self.alpha_pow == 0 && self.hbar_pow == 0
    }

    fn combine(&self, other: &Self) -> Self {
        Self {
            x_exp: &self.x_exp + &other.x_exp,
            y_exp: &self.y_exp + &other.y_exp,
            alpha_pow: self.alpha_pow + other.alpha_pow,
            hbar_pow: self.hbar_pow + other.hbar_pow,
        }
    }
}

/// Exact expression: finite sum of monomials with Gaussian-rational
/// coefficients, kept in canonical form (no zero coefficients stored).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Expression {
    terms: BTreeMap<MonomialKey, GaussianRational>,
}

impl Expression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::monomial(MonomialKey::unit(), c)
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(GaussianRational::from_int(n))
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        Self::constant(GaussianRational::from_ratio(p, q))
    }

    pub fn from_rational(r: Rational) -> Self {
        Self::constant(GaussianRational::from_rational(r))
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self::constant(GaussianRational::i())
    }

    pub fn monomial(key: MonomialKey, coeff: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(key, coeff);
        }
        Self { terms }
    }

    pub fn var(v: Var) -> Self {
        match v {
            Var::X => Self::x_pow(Rational::one()),
            Var::Y => Self::y_pow(Rational::one()),
        }
    }

    pub fn x_pow(r: Rational) -> Self {
        Self::monomial(
            MonomialKey {
                x_exp: r,
                ..MonomialKey::unit()
            },
            GaussianRational::one(),
        )
    }

    pub fn y_pow(r: Rational) -> Self {
        Self::monomial(
            MonomialKey {
                y_exp: r,
                ..MonomialKey::unit()
            },
            GaussianRational::one(),
        )
    }

    pub fn alpha() -> Self {
        Self::monomial(
            MonomialKey {
                alpha_pow: 1,
                ..MonomialKey::unit()
            },
            GaussianRational::one(),
        )
    }

    pub fn hbar() -> Self {
        Self::monomial(
            MonomialKey {
                hbar_pow: 1,
                ..MonomialKey::unit()
            },
            GaussianRational::one(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MonomialKey, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, key: &MonomialKey) -> GaussianRational {
        self.terms
            .get(key)
            .cloned()
            .unwrap_or_else(GaussianRational::zero)
    }

    /// True when every coefficient is real and no hbar power appears:
    /// the predicate classical observables must satisfy.
    pub fn is_classical_real(&self) -> bool {
        self.terms
            .iter()
            .all(|(k, c)| k.hbar_pow == 0 && c.is_real())
    }

    /// True when the expression is a polynomial in x and y alone
    /// (nonnegative integer exponents, no alpha, no hbar).
    pub fn is_xy_polynomial(&self) -> bool {
        self.terms.iter().all(|(k, _)| {
            k.alpha_pow == 0
                && k.hbar_pow == 0
                && k.x_exp.is_integer()
                && !k.x_exp.is_negative()
                && k.y_exp.is_integer()
                && !k.y_exp.is_negative()
        })
    }

    /// True when no y dependence appears.
    pub fn is_x_only(&self) -> bool {
        self.terms.iter().all(|(k, _)| k.y_exp.is_zero())
    }

    fn insert_term(&mut self, key: MonomialKey, coeff: GaussianRational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.scale(&GaussianRational::from_rational(r.clone()))
    }

    pub fn conj(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.conj()))
                .collect(),
        }
    }

    /// Real and imaginary parts (both real expressions).
    pub fn split_re_im(&self) -> (Self, Self) {
        let mut re = Self::zero();
        let mut im = Self::zero();
        for (k, c) in &self.terms {
            if !c.re.is_zero() {
                re.insert_term(k.clone(), GaussianRational::from_rational(c.re.clone()));
            }
            if !c.im.is_zero() {
                im.insert_term(k.clone(), GaussianRational::from_rational(c.im.clone()));
            }
        }
        (re, im)
    }

    /// Partial derivative with respect to x or y (power rule, term-wise).
    pub fn diff(&self, var: Var) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let exp = match var {
                Var::X => &k.x_exp,
                Var::Y => &k.y_exp,
            };
            if exp.is_zero() {
                continue;
            }
            let mut nk = k.clone();
            match var {
                Var::X => nk.x_exp = exp - Rational::one(),
                Var::Y => nk.y_exp = exp - Rational::one(),
            }
            out.insert_term(nk, c.scale(exp));
        }
        out
    }

    /// Term-wise antiderivative in x or y. Fails when a term has exponent
    /// -1 in the integration variable (a logarithm would be needed).
    pub fn antiderivative(&self, var: Var) -> Result<Self> {
        let minus_one = -Rational::one();
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let exp = match var {
                Var::X => &k.x_exp,
                Var::Y => &k.y_exp,
            };
            if *exp == minus_one {
                return Err(Error::Exactness(
                    "antiderivative of exponent -1 leaves the monomial ring".into(),
                ));
            }
            let nexp = exp + Rational::one();
            let mut nk = k.clone();
            match var {
                Var::X => nk.x_exp = nexp.clone(),
                Var::Y => nk.y_exp = nexp.clone(),
            }
            out.insert_term(nk, c.scale(&nexp.recip()));
        }
        Ok(out)
    }

    /// Drops every term carrying a positive power of hbar.
    pub fn substitute_hbar_zero(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.hbar_pow == 0)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Substitutes an exact rational value for alpha.
    pub fn substitute_alpha(&self, value: &Rational) -> Self {
        self.substitute_symbol(value, true)
    }

    /// Substitutes an exact rational value for hbar.
    pub fn substitute_hbar(&self, value: &Rational) -> Self {
        self.substitute_symbol(value, false)
    }

    fn substitute_symbol(&self, value: &Rational, alpha: bool) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let pow = if alpha { k.alpha_pow } else { k.hbar_pow };
            let mut nk = k.clone();
            if alpha {
                nk.alpha_pow = 0;
            } else {
                nk.hbar_pow = 0;
            }
            let factor = pow_rational(value, &rat(pow as i64, 1))
                .expect("integer powers of rationals are exact");
            out.insert_term(nk, c.scale(&factor));
        }
        out
    }

    /// The single (key, coeff) pair of a one-term expression.
    pub fn as_monomial(&self) -> Option<(&MonomialKey, &GaussianRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Exact division by a one-term expression. Powers of alpha and hbar in
    /// the divisor must not exceed those of any dividend term.
    pub fn div_monomial(&self, divisor: &Self) -> Result<Self> {
        if divisor.is_zero() {
            return Err(Error::Invalid("division by zero".into()));
        }
        let (dk, dc) = divisor.as_monomial().ok_or_else(|| {
            Error::Invalid("division is only defined by single-term expressions".into())
        })?;
        let inv = dc.inverse()?;
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            if k.alpha_pow < dk.alpha_pow || k.hbar_pow < dk.hbar_pow {
                return Err(Error::Exactness(
                    "division would need a negative power of alpha or hbar".into(),
                ));
            }
            let nk = MonomialKey {
                x_exp: &k.x_exp - &dk.x_exp,
                y_exp: &k.y_exp - &dk.y_exp,
                alpha_pow: k.alpha_pow - dk.alpha_pow,
                hbar_pow: k.hbar_pow - dk.hbar_pow,
            };
            out.insert_term(nk, c * &inv);
        }
        Ok(out)
    }

    /// Integer power. Negative exponents require a monomial base.
    pub fn pow_int(&self, n: i64) -> Result<Self> {
        if n >= 0 {
            let mut acc = Self::one();
            for _ in 0..n {
                acc = &acc * self;
            }
            return Ok(acc);
        }
        let inv = Self::one().div_monomial(self)?;
        inv.pow_int(-n)
    }

    /// Rational power. Non-integer exponents require a single-term base
    /// with coefficient 1 whose alpha/hbar powers stay integral.
    pub fn pow_rational(&self, e: &Rational) -> Result<Self> {
        if e.is_integer() {
            let n = e
                .to_integer()
                .to_i64()
                .ok_or_else(|| Error::Exactness("integer exponent too large".into()))?;
            return self.pow_int(n);
        }
        let (k, c) = self.as_monomial().ok_or_else(|| {
            Error::Invalid("fractional power of a non-monomial expression".into())
        })?;
        if !c.is_real() || !c.re.is_one() {
            return Err(Error::Invalid(
                "fractional power requires a monomial with coefficient 1".into(),
            ));
        }
        let scale_pow = |p: u32| -> Result<u32> {
            let v = Rational::from_integer(p.into()) * e;
            if v.is_integer() && !v.is_negative() {
                Ok(v.to_integer().to_u32().unwrap())
            } else {
                Err(Error::Exactness(
                    "fractional power of alpha or hbar is outside the ring".into(),
                ))
            }
        };
        Ok(Self::monomial(
            MonomialKey {
                x_exp: &k.x_exp * e,
                y_exp: &k.y_exp * e,
                alpha_pow: scale_pow(k.alpha_pow)?,
                hbar_pow: scale_pow(k.hbar_pow)?,
            },
            GaussianRational::one(),
        ))
    }

    /// Floating evaluation, returning the complex value. Fractional powers
    /// require a positive base and negative powers a nonzero base.
    pub fn eval_numeric(&self, x: f64, y: f64, alpha: f64, hbar: f64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in &self.terms {
            let vx = real_pow(x, &k.x_exp, "x")?;
            let vy = real_pow(y, &k.y_exp, "y")?;
            let va = alpha.powi(k.alpha_pow as i32);
            let vh = hbar.powi(k.hbar_pow as i32);
            acc += c.to_complex64() * (vx * vy * va * vh);
        }
        Ok(acc)
    }

    /// Exact evaluation at rational points. Fails when a fractional power
    /// of the given point has no rational value (keep x a perfect cube for
    /// cube roots, etc.).
    pub fn eval_exact(
        &self,
        x: &Rational,
        y: &Rational,
        alpha: &Rational,
        hbar: &Rational,
    ) -> Result<GaussianRational> {
        let mut acc = GaussianRational::zero();
        for (k, c) in &self.terms {
            let mut v = pow_rational(x, &k.x_exp)?;
            v *= pow_rational(y, &k.y_exp)?;
            v *= pow_rational(alpha, &rat(k.alpha_pow as i64, 1))?;
            v *= pow_rational(hbar, &rat(k.hbar_pow as i64, 1))?;
            acc += c.scale(&v);
        }
        Ok(acc)
    }

    /// Largest coefficient magnitude at a fixed probe point; the residual
    /// summary used by verification reports. Zero for the zero expression.
    pub fn probe_magnitude(&self, x: f64, y: f64, alpha: f64, hbar: f64) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| {
                let vx = real_pow(x, &k.x_exp, "x").unwrap_or(f64::NAN);
                let vy = real_pow(y, &k.y_exp, "y").unwrap_or(f64::NAN);
                let va = alpha.powi(k.alpha_pow as i32);
                let vh = hbar.powi(k.hbar_pow as i32);
                (c.to_complex64() * (vx * vy * va * vh)).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn parse(text: &str) -> Result<Self> {
        parser::parse_expression_str(text)
    }

    /// Rendering as a single multiplicative factor: (negative, body).
    /// Multi-term expressions are parenthesized; a bare unit coefficient
    /// yields body "1" so callers can elide it.
    pub fn factor_form(&self) -> (bool, String) {
        if self.terms.is_empty() {
            return (false, "0".to_string());
        }
        if let Some((k, c)) = self.as_monomial() {
            return fmt_term(k, c);
        }
        (false, format!("({self})"))
    }
}

fn real_pow(base: f64, exp: &Rational, name: &str) -> Result<f64> {
    if exp.is_zero() {
        return Ok(1.0);
    }
    if exp.is_integer() {
        if base == 0.0 && exp.is_negative() {
            return Err(Error::Domain(format!(
                "{name} = 0 with a negative exponent"
            )));
        }
        let n = exp.to_integer().to_i32().ok_or_else(|| {
            Error::Exactness("exponent out of range for numeric evaluation".into())
        })?;
        return Ok(base.powi(n));
    }
    if base <= 0.0 {
        return Err(Error::Domain(format!(
            "{name} = {base} with fractional exponent {exp} (need {name} > 0)"
        )));
    }
    Ok(base.powf(to_f64(exp)))
}

impl Add for &Expression {
    type Output = Expression;
    fn add(self, rhs: &Expression) -> Expression {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.insert_term(k.clone(), c.clone());
        }
        out
    }
}

impl Add for Expression {
    type Output = Expression;
    fn add(self, rhs: Expression) -> Expression {
        &self + &rhs
    }
}

impl Sub for &Expression {
    type Output = Expression;
    fn sub(self, rhs: &Expression) -> Expression {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.insert_term(k.clone(), -c.clone());
        }
        out
    }
}

impl Sub for Expression {
    type Output = Expression;
    fn sub(self, rhs: Expression) -> Expression {
        &self - &rhs
    }
}

impl Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), -v.clone()))
                .collect(),
        }
    }
}

impl Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        -&self
    }
}

impl Mul for &Expression {
    type Output = Expression;
    fn mul(self, rhs: &Expression) -> Expression {
        let mut out = Expression::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                out.insert_term(ka.combine(kb), ca * cb);
            }
        }
        out
    }
}

impl Mul for Expression {
    type Output = Expression;
    fn mul(self, rhs: Expression) -> Expression {
        &self * &rhs
    }
}

impl FromStr for Expression {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

fn fmt_exponent(e: &Rational) -> String {
    if e.is_integer() {
        let n = e.to_integer();
        if n >= 0.into() {
            format!("^{n}")
        } else {
            format!("^({n})")
        }
    } else {
        format!("^({}/{})", e.numer(), e.denom())
    }
}

/// Variable factors of one monomial, in x, y, alpha, hbar order.
fn fmt_monomial_factors(key: &MonomialKey) -> Vec<String> {
    let mut parts = Vec::new();
    for (name, exp) in [("x", &key.x_exp), ("y", &key.y_exp)] {
        if exp.is_zero() {
            continue;
        }
        if exp.is_one() {
            parts.push(name.to_string());
        } else {
            parts.push(format!("{name}{}", fmt_exponent(exp)));
        }
    }
    for (name, pow) in [("alpha", key.alpha_pow), ("hbar", key.hbar_pow)] {
        match pow {
            0 => {}
            1 => parts.push(name.to_string()),
            p => parts.push(format!("{name}^{p}")),
        }
    }
    parts
}

/// One term as (sign, body) with the sign pulled out for joining; complex
/// coefficients with both parts keep their sign inside parentheses.
fn fmt_term(key: &MonomialKey, coeff: &GaussianRational) -> (bool, String) {
    let factors = fmt_monomial_factors(key);
    let (negative, coeff_str) = if coeff.im.is_zero() {
        (
            coeff.re.is_negative(),
            if coeff.re.abs().is_one() && !factors.is_empty() {
                String::new()
            } else {
                coeff.re.abs().to_string()
            },
        )
    } else if coeff.re.is_zero() {
        let body = if coeff.im.abs().is_one() {
            "i".to_string()
        } else {
            format!("{}*i", coeff.im.abs())
        };
        (coeff.im.is_negative(), body)
    } else {
        (false, coeff.to_string())
    };
    let mut pieces = Vec::new();
    if !coeff_str.is_empty() {
        pieces.push(coeff_str);
    }
    pieces.extend(factors);
    if pieces.is_empty() {
        pieces.push("1".to_string());
    }
    (negative, pieces.join("*"))
}

impl fmt::Display for Expression {
    /// Canonical printing: terms sorted by monomial key; `parse` reads the
    /// output back to an equal expression.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (key, coeff)) in self.terms.iter().enumerate() {
            let (negative, body) = fmt_term(key, coeff);
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            write!(f, "{body}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    fn key(x: Rational, y: Rational, a: u32, h: u32) -> MonomialKey {
        MonomialKey {
            x_exp: x,
            y_exp: y,
            alpha_pow: a,
            hbar_pow: h,
        }
    }

    /// The shipped quantum potential as an input string.
    const V_NEW: &str = "alpha*y*x^(-2/3) - 5/72*hbar^2*x^(-2)";

    #[test]
    fn parse_quantum_potential() {
        let v = Expression::parse(V_NEW).unwrap();
        assert_eq!(v.num_terms(), 2);
        assert_eq!(
            v.coefficient(&key(rat(-2, 3), rat_int(1), 1, 0)),
            GaussianRational::one()
        );
        assert_eq!(
            v.coefficient(&key(rat_int(-2), rat_int(0), 0, 2)),
            GaussianRational::from_ratio(-5, 72)
        );
    }

    #[test]
    fn cancellation_gives_empty_map() {
        let z = Expression::parse("x - x").unwrap();
        assert!(z.is_zero());
        assert_eq!(z.num_terms(), 0);
    }

    #[test]
    fn fractional_exponents_add() {
        let e = Expression::parse("x^(1/3)*x^(1/3)*x^(1/3)").unwrap();
        assert_eq!(e, Expression::parse("x").unwrap());
        let m = Expression::parse("x^(1/3)*x^(-2/3)").unwrap();
        assert_eq!(m, Expression::x_pow(rat(-1, 3)));
    }

    #[test]
    fn additive_inverse_and_gaussian_unit() {
        let v = Expression::parse(V_NEW).unwrap();
        assert!((&v + &(-&v)).is_zero());
        let ii = Expression::i() * Expression::i();
        assert_eq!(ii, Expression::from_int(-1));
    }

    #[test]
    fn diff_power_rule() {
        // d/dx 9*alpha*x^(1/3) = 3*alpha*x^(-2/3)
        let e = Expression::parse("9*alpha*x^(1/3)").unwrap();
        assert_eq!(
            e.diff(Var::X),
            Expression::parse("3*alpha*x^(-2/3)").unwrap()
        );
        // d/dy alpha*y*x^(-2/3) = alpha*x^(-2/3)
        let v = Expression::parse("alpha*y*x^(-2/3)").unwrap();
        assert_eq!(v.diff(Var::Y), Expression::parse("alpha*x^(-2/3)").unwrap());
        assert!(Expression::from_int(7).diff(Var::X).is_zero());
    }

    #[test]
    fn product_rule_on_monomials() {
        let a = Expression::parse("x^(1/3)*y^2").unwrap();
        let b = Expression::parse("x^(-2)*y").unwrap();
        let lhs = (&a * &b).diff(Var::X);
        let rhs = &(a.diff(Var::X) * b.clone()) + &(a * b.diff(Var::X));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn eval_numeric_basics() {
        let e = Expression::parse("x^(1/3)").unwrap();
        let v = e.eval_numeric(8.0, 0.0, 0.0, 0.0).unwrap();
        assert!((v.re - 2.0).abs() < 1e-14 && v.im == 0.0);

        let vq = Expression::parse(V_NEW).unwrap();
        let v = vq.eval_numeric(1.0, 1.0, 1.0, 0.0).unwrap();
        assert!((v.re - 1.0).abs() < 1e-14);

        assert!(e.eval_numeric(-1.0, 0.0, 0.0, 0.0).is_err());
        let neg = Expression::parse("x^(-2)").unwrap();
        assert!(neg.eval_numeric(0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn hbar_zero_substitution() {
        let vq = Expression::parse(V_NEW).unwrap();
        assert_eq!(
            vq.substitute_hbar_zero(),
            Expression::parse("alpha*y*x^(-2/3)").unwrap()
        );
        let classical = Expression::parse("x^2 + y").unwrap();
        assert_eq!(classical.substitute_hbar_zero(), classical);
        let quartic = Expression::parse("25/1296*hbar^4*x^(-4)").unwrap();
        assert!(quartic.substitute_hbar_zero().is_zero());
    }

    #[test]
    fn symbol_substitution() {
        let vq = Expression::parse(V_NEW).unwrap();
        assert_eq!(
            vq.substitute_alpha(&rat_int(2)),
            Expression::parse("2*y*x^(-2/3) - 5/72*hbar^2*x^(-2)").unwrap()
        );
        assert_eq!(
            vq.substitute_hbar(&Rational::zero()),
            vq.substitute_hbar_zero()
        );
        assert_eq!(
            vq.substitute_hbar(&rat(1, 2)),
            Expression::parse("alpha*y*x^(-2/3) - 5/288*x^(-2)").unwrap()
        );
    }

    #[test]
    fn division_by_monomial_only() {
        let a = Expression::parse("x^2 + y").unwrap();
        let m = Expression::parse("x^(1/3)").unwrap();
        let q = a.div_monomial(&m).unwrap();
        assert_eq!(q, Expression::parse("x^(5/3) + y*x^(-1/3)").unwrap());
        assert!(a
            .div_monomial(&Expression::parse("x + y").unwrap())
            .is_err());
        assert!(Expression::one()
            .div_monomial(&Expression::alpha())
            .is_err());
    }

    #[test]
    fn eval_exact_cube_points() {
        let e = Expression::parse("x^(1/3)").unwrap();
        let v = e
            .eval_exact(&rat_int(8), &rat_int(0), &rat_int(1), &rat_int(0))
            .unwrap();
        assert_eq!(v, GaussianRational::from_int(2));
        assert!(e
            .eval_exact(&rat_int(2), &rat_int(0), &rat_int(1), &rat_int(0))
            .is_err());
    }

    #[test]
    fn display_round_trips() {
        for text in [
            V_NEW,
            "1",
            "-x",
            "i",
            "(1/2+3/2*i)*x*y^2",
            "x^(-1/3) - i*y + 2*alpha^2*hbar",
        ] {
            let e = Expression::parse(text).unwrap();
            let printed = e.to_string();
            let reparsed = Expression::parse(&printed).unwrap();
            assert_eq!(e, reparsed, "round trip failed for {text:?} -> {printed:?}");
        }
        assert_eq!(Expression::zero().to_string(), "0");
    }
}
