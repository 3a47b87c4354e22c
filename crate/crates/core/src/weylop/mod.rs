//! Quantum observables as normal-ordered differential operators
//! sum c_ab(x, y; alpha, hbar, i) d_x^a d_y^b with all derivatives to the
//! right. Momenta enter only through constructors (p_j = -i*hbar*d_j) and
//! printers, so the internal form is unambiguous.
//!
//! Composition uses the generalized Leibniz expansion, commutators and
//! formal adjoints are exact, and the classical limit rewrites derivatives
//! back to momenta before setting hbar to zero.

pub mod grid;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::gaussian::GaussianRational;
use crate::phasepoly::PhasePolynomial;
use crate::rational::Rational;
use crate::symexpr::{Expression, Var};

/// Normal-ordered differential operator. Keys are derivative orders
/// (a, b) for d_x^a d_y^b; values are the coefficient expressions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeylOperator {
    terms: BTreeMap<(u32, u32), Expression>,
}

fn binomial(n: u32, k: u32) -> Rational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..k {
        num *= BigInt::from(n - j);
        den *= BigInt::from(j + 1);
    }
    Rational::new(num, den)
}

impl WeylOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::mult(Expression::one())
    }

    /// Multiplication operator by a scalar expression.
    pub fn mult(e: Expression) -> Self {
        let mut out = Self::zero();
        out.insert((0, 0), e);
        out
    }

    /// Raw derivative monomial d_x^a d_y^b with coefficient 1.
    pub fn partial(a: u32, b: u32) -> Self {
        let mut out = Self::zero();
        out.insert((a, b), Expression::one());
        out
    }

    pub fn term(coeff: Expression, a: u32, b: u32) -> Self {
        let mut out = Self::zero();
        out.insert((a, b), coeff);
        out
    }

    /// Momentum monomial p1^k p2^l = (-i*hbar)^(k+l) d_x^k d_y^l.
    pub fn momentum(k: u32, l: u32) -> Self {
        let n = k + l;
        // (-i)^n
        let phase = GaussianRational::i_pow(3 * n % 4);
        let coeff = Expression::monomial(
            crate::symexpr::MonomialKey {
                hbar_pow: n,
                ..crate::symexpr::MonomialKey::unit()
            },
            phase,
        );
        Self::term(coeff, k, l)
    }

    pub fn p1() -> Self {
        Self::momentum(1, 0)
    }

    pub fn p2() -> Self {
        Self::momentum(0, 1)
    }

    fn insert(&mut self, key: (u32, u32), e: Expression) {
        if e.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Expression::zero);
        *entry = &*entry + &e;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Expression)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, a: u32, b: u32) -> Expression {
        self.terms.get(&(a, b)).cloned().unwrap_or_default()
    }

    /// Highest total derivative order (None for the zero operator).
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| a + b).max()
    }

    pub fn scale(&self, e: &Expression) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out.insert(*k, c * e);
        }
        out
    }

    /// Normal-ordered product via the generalized Leibniz rule:
    /// d^n o f = sum_k C(n,k) f^(k) d^(n-k), applied in x and y.
    pub fn compose(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &other.terms {
                // Precompute x-derivatives of c2 up to a1 and, for each,
                // its y-derivatives up to b1.
                let mut dx = c2.clone();
                for k in 0..=a1 {
                    if k > 0 {
                        dx = dx.diff(Var::X);
                    }
                    if dx.is_zero() {
                        break;
                    }
                    let mut dxy = dx.clone();
                    for m in 0..=b1 {
                        if m > 0 {
                            dxy = dxy.diff(Var::Y);
                        }
                        if dxy.is_zero() {
                            break;
                        }
                        let w = binomial(a1, k) * binomial(b1, m);
                        let contrib = (c1 * &dxy).scale_rational(&w);
                        out.insert((a1 - k + a2, b1 - m + b2), contrib);
                    }
                }
            }
        }
        out
    }

    /// Commutator [A, B] = AB - BA.
    pub fn commutator(&self, other: &Self) -> Self {
        &self.compose(other) - &other.compose(self)
    }

    /// Anti-commutator {A, B} = AB + BA.
    pub fn anticommutator(&self, other: &Self) -> Self {
        &self.compose(other) + &other.compose(self)
    }

    /// Symmetrized (Weyl-ordered) term (1/2){f, p1^k p2^l} in normal
    /// order; self-adjoint whenever f is real.
    pub fn symmetrize(f: &Expression, k: u32, l: u32) -> Self {
        let m = Self::momentum(k, l);
        let fop = Self::mult(f.clone());
        fop.anticommutator(&m).scale(&Expression::from_ratio(1, 2))
    }

    /// Weyl quantization of a phase-space polynomial: each c(x,y) p1^k p2^l
    /// becomes (1/2){c, p1^k p2^l}.
    pub fn quantize(p: &PhasePolynomial) -> Self {
        let mut out = Self::zero();
        for (&(k, l), c) in p.terms() {
            out = &out + &Self::symmetrize(c, k, l);
        }
        out
    }

    /// Formal adjoint on real scalar functions (flat measure, no boundary
    /// terms): (c d^a d^b)^dagger = (-1)^(a+b) d^a d^b o conj(c).
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            let sign = if (a + b) % 2 == 0 { 1 } else { -1 };
            let piece = Self::partial(a, b)
                .compose(&Self::mult(c.conj()))
                .scale(&Expression::from_int(sign));
            out = &out + &piece;
        }
        out
    }

    /// (A + adjoint(A)) / 2.
    pub fn self_adjoint_part(&self) -> Self {
        (self + &self.adjoint()).scale(&Expression::from_ratio(1, 2))
    }

    /// (A - adjoint(A)) / 2.
    pub fn skew_adjoint_part(&self) -> Self {
        (self - &self.adjoint()).scale(&Expression::from_ratio(1, 2))
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.adjoint() == *self
    }

    /// Splits the operator into even- and odd-parity parts; the two parts
    /// sum back to the original operator.
    ///
    /// Parity is graded by the momentum degree of the symmetrized form
    /// (1/2){f, p1^k p2^l}: the ordering corrections of a block stay with
    /// the block, so a third-order integral is purely odd even though its
    /// normal-ordered form contains a derivative-free term. Operators that
    /// admit no symmetrized form (bare derivatives without the matching
    /// hbar powers) fall back to grading by raw derivative order.
    pub fn parity_components(&self) -> (Self, Self) {
        let mut even = Self::zero();
        let mut odd = Self::zero();
        match self.symmetrized_form() {
            Ok(parts) => {
                for (f, a, b) in parts {
                    let piece = Self::symmetrize(&f, a, b);
                    if (a + b) % 2 == 0 {
                        even = &even + &piece;
                    } else {
                        odd = &odd + &piece;
                    }
                }
            }
            Err(_) => {
                for (&(a, b), c) in &self.terms {
                    if (a + b) % 2 == 0 {
                        even.insert((a, b), c.clone());
                    } else {
                        odd.insert((a, b), c.clone());
                    }
                }
            }
        }
        (even, odd)
    }

    /// Core of the classical limit: rewrites d_x^a d_y^b as
    /// p1^a p2^b / (-i hbar)^(a+b), multiplies by (i hbar)^(-hbar_shift),
    /// then sets hbar = 0. Fails if a negative hbar power survives.
    fn classical_limit_shifted(&self, hbar_shift: u32) -> Result<PhasePolynomial> {
        let mut out = PhasePolynomial::zero();
        for (&(a, b), c) in &self.terms {
            let n = a + b + hbar_shift;
            // 1/(-i)^(a+b) * 1/i^shift = i^(a+b) * (-i)^shift
            let phase =
                GaussianRational::i_pow(a + b) * GaussianRational::i_pow(3 * hbar_shift % 4);
            let mut kept = Expression::zero();
            for (key, coeff) in c.terms() {
                if key.hbar_pow < n {
                    return Err(Error::Exactness(format!(
                        "negative power of hbar in classical limit of d_x^{a} d_y^{b} term"
                    )));
                }
                if key.hbar_pow == n {
                    let mut nk = key.clone();
                    nk.hbar_pow = 0;
                    kept = kept + Expression::monomial(nk, coeff * &phase);
                }
                // hbar_pow > n vanishes at hbar -> 0.
            }
            if !kept.is_zero() {
                out = out + PhasePolynomial::term(kept, a, b);
            }
        }
        Ok(out)
    }

    /// Classical limit: principal and lower symbols evaluated at hbar = 0.
    pub fn classical_limit(&self) -> Result<PhasePolynomial> {
        self.classical_limit_shifted(0)
    }

    /// Classical limit of (1/(i hbar)) * self; applied to a commutator
    /// [A, B] it reproduces the Poisson bracket of the classical limits.
    pub fn semiclassical_bracket_limit(&self) -> Result<PhasePolynomial> {
        self.classical_limit_shifted(1)
    }

    /// Max coefficient term magnitude at a probe point (residual summary).
    pub fn probe_magnitude(&self, x: f64, y: f64, alpha: f64, hbar: f64) -> f64 {
        self.terms
            .values()
            .map(|e| e.probe_magnitude(x, y, alpha, hbar))
            .fold(0.0, f64::max)
    }

    /// Rewrites the operator as symmetrized momentum terms
    /// sum (1/2){f_ab, p1^a p2^b} + ell, top order down. Fails when a
    /// coefficient is not divisible by the hbar power its order demands.
    pub fn symmetrized_form(&self) -> Result<Vec<(Expression, u32, u32)>> {
        let mut rest = self.clone();
        let mut parts = Vec::new();
        while let Some(order) = rest.order() {
            if order == 0 {
                break;
            }
            let tops: Vec<(u32, u32)> = rest
                .terms
                .keys()
                .filter(|(a, b)| a + b == order)
                .cloned()
                .collect();
            for (a, b) in tops {
                let c = rest.coefficient(a, b);
                // f = c / (-i hbar)^(a+b)
                let n = a + b;
                let divisor = Expression::monomial(
                    crate::symexpr::MonomialKey {
                        hbar_pow: n,
                        ..crate::symexpr::MonomialKey::unit()
                    },
                    GaussianRational::i_pow(3 * n % 4),
                );
                let f = c.div_monomial(&divisor)?;
                rest = &rest - &Self::symmetrize(&f, a, b);
                parts.push((f, a, b));
            }
        }
        if !rest.is_zero() {
            parts.push((rest.coefficient(0, 0), 0, 0));
        }
        Ok(parts)
    }

    /// Human-oriented printer in symmetrized momentum notation, mirroring
    /// the raw form when the rewrite is impossible.
    pub fn to_symmetrized_string(&self) -> String {
        match self.symmetrized_form() {
            Ok(parts) => {
                if parts.is_empty() {
                    return "0".to_string();
                }
                let mut pieces = Vec::new();
                for (f, a, b) in parts {
                    let momenta: Vec<String> = [("p1", a), ("p2", b)]
                        .iter()
                        .filter_map(|&(n, p)| match p {
                            0 => None,
                            1 => Some(n.to_string()),
                            p => Some(format!("{n}^{p}")),
                        })
                        .collect();
                    if momenta.is_empty() {
                        pieces.push(format!("{f}"));
                    } else if f.as_monomial().is_some_and(|(k, _)| k.is_unit()) {
                        // Constant leading function: plain momentum term.
                        let (neg, body) = f.factor_form();
                        let sign = if neg { "-" } else { "" };
                        if body == "1" {
                            pieces.push(format!("{sign}{}", momenta.join("*")));
                        } else {
                            pieces.push(format!("{sign}{body}*{}", momenta.join("*")));
                        }
                    } else {
                        pieces.push(format!("{{{f}, {}}}", momenta.join("*")));
                    }
                }
                pieces.join(" + ")
            }
            Err(_) => format!("{self}"),
        }
    }
}

impl Add for &WeylOperator {
    type Output = WeylOperator;
    fn add(self, rhs: &WeylOperator) -> WeylOperator {
        let mut out = self.clone();
        for (k, e) in &rhs.terms {
            out.insert(*k, e.clone());
        }
        out
    }
}

impl Sub for &WeylOperator {
    type Output = WeylOperator;
    fn sub(self, rhs: &WeylOperator) -> WeylOperator {
        let mut out = self.clone();
        for (k, e) in &rhs.terms {
            out.insert(*k, -e.clone());
        }
        out
    }
}

impl Neg for &WeylOperator {
    type Output = WeylOperator;
    fn neg(self) -> WeylOperator {
        WeylOperator {
            terms: self.terms.iter().map(|(k, e)| (*k, -e.clone())).collect(),
        }
    }
}

impl Mul for &WeylOperator {
    type Output = WeylOperator;
    fn mul(self, rhs: &WeylOperator) -> WeylOperator {
        self.compose(rhs)
    }
}

impl Add for WeylOperator {
    type Output = WeylOperator;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl Sub for WeylOperator {
    type Output = WeylOperator;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl Neg for WeylOperator {
    type Output = WeylOperator;
    fn neg(self) -> Self {
        -&self
    }
}

impl fmt::Display for WeylOperator {
    /// Raw normal-ordered form: coefficient then dx^a*dy^b factors.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(a, b), e) in &self.terms {
            let mut factors: Vec<String> = Vec::new();
            for (name, pow) in [("dx", a), ("dy", b)] {
                match pow {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    p => factors.push(format!("{name}^{p}")),
                }
            }
            if factors.is_empty() {
                let body = e.to_string();
                if first {
                    write!(f, "{body}")?;
                } else if let Some(stripped) = body.strip_prefix('-') {
                    write!(f, " - {stripped}")?;
                } else {
                    write!(f, " + {body}")?;
                }
            } else {
                let (negative, factor) = e.factor_form();
                let mut pieces = Vec::new();
                if factor != "1" {
                    pieces.push(factor);
                }
                pieces.extend(factors);
                let body = pieces.join("*");
                if first {
                    if negative {
                        write!(f, "-")?;
                    }
                    write!(f, "{body}")?;
                } else if negative {
                    write!(f, " - {body}")?;
                } else {
                    write!(f, " + {body}")?;
                }
            }
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn x_expr() -> Expression {
        Expression::parse("x").unwrap()
    }

    #[test]
    fn leibniz_on_multiplication() {
        // d_x o x = x d_x + 1
        let dx = WeylOperator::partial(1, 0);
        let mx = WeylOperator::mult(x_expr());
        let composed = dx.compose(&mx);
        let expected = &WeylOperator::term(x_expr(), 1, 0) + &WeylOperator::identity();
        assert_eq!(composed, expected);
    }

    #[test]
    fn canonical_commutation() {
        // [p1, x] = -i hbar
        let p1 = WeylOperator::p1();
        let mx = WeylOperator::mult(x_expr());
        let c = p1.commutator(&mx);
        let expected = WeylOperator::mult(-(Expression::i() * Expression::hbar()));
        assert_eq!(c, expected);
    }

    #[test]
    fn symmetrize_examples() {
        // (1/2){1, p2} = p2
        assert_eq!(
            WeylOperator::symmetrize(&Expression::one(), 0, 1),
            WeylOperator::p2()
        );
        // (1/2){x^(1/3), p1} = x^(1/3) p1 - (i hbar / 6) x^(-2/3)
        let f = Expression::x_pow(rat(1, 3));
        let s = WeylOperator::symmetrize(&f, 1, 0);
        let fp = WeylOperator::mult(f).compose(&WeylOperator::p1());
        let corr = WeylOperator::mult(Expression::parse("1/6*i*hbar*x^(-2/3)").unwrap());
        assert_eq!(s, &fp - &corr);
    }

    #[test]
    fn symmetrize_is_self_adjoint_for_real_f() {
        let g = Expression::parse("x^(-2/3)*y + 3*x^2").unwrap();
        let s = WeylOperator::symmetrize(&g, 2, 0);
        assert!(s.is_self_adjoint());
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(WeylOperator::p1().adjoint(), WeylOperator::p1());
        // adjoint(x^(1/3) d_x) = -x^(1/3) d_x - (1/3) x^(-2/3)
        let a = WeylOperator::term(Expression::x_pow(rat(1, 3)), 1, 0);
        let adj = a.adjoint();
        let expected = &(-&a) - &WeylOperator::mult(Expression::parse("1/3*x^(-2/3)").unwrap());
        assert_eq!(adj, expected);
        // Involution.
        assert_eq!(adj.adjoint(), a);
    }

    #[test]
    fn self_adjoint_and_skew_parts() {
        // A purely imaginary constant is skew: its self-adjoint part is 0.
        let skew = WeylOperator::mult(Expression::parse("3*i").unwrap());
        assert!(skew.self_adjoint_part().is_zero());
        assert_eq!(skew.skew_adjoint_part(), skew);
        // Parts always reconstruct the operator.
        let a = WeylOperator::term(Expression::parse("x^(1/3) + i*y").unwrap(), 1, 0);
        assert_eq!(&a.self_adjoint_part() + &a.skew_adjoint_part(), a);
        assert!(a.self_adjoint_part().is_self_adjoint());
    }

    #[test]
    fn parity_split_reconstructs() {
        let a = &WeylOperator::term(Expression::parse("x*y").unwrap(), 2, 1)
            + &WeylOperator::mult(Expression::parse("y^2").unwrap());
        let (even, odd) = a.parity_components();
        assert_eq!(&even + &odd, a);
        assert_eq!(odd.coefficient(2, 1), Expression::parse("x*y").unwrap());
        assert_eq!(even.coefficient(0, 0), Expression::parse("y^2").unwrap());
    }

    #[test]
    fn classical_limit_of_symmetrized_term() {
        let f = Expression::parse("alpha*x^(-2/3)*y").unwrap();
        let s = WeylOperator::symmetrize(&f, 1, 0);
        let limit = s.classical_limit().unwrap();
        assert_eq!(limit, PhasePolynomial::term(f, 1, 0));
    }

    #[test]
    fn classical_limit_rejects_bare_derivative() {
        assert!(WeylOperator::partial(1, 0).classical_limit().is_err());
    }

    #[test]
    fn semiclassical_bracket_matches_poisson() {
        let a = PhasePolynomial::parse("x^2*p1 + y*p2^2").unwrap();
        let b = PhasePolynomial::parse("x*y^3 + p1*p2").unwrap();
        let aq = WeylOperator::quantize(&a);
        let bq = WeylOperator::quantize(&b);
        let lhs = aq.commutator(&bq).semiclassical_bracket_limit().unwrap();
        assert_eq!(lhs, a.poisson_bracket(&b));
    }

    #[test]
    fn symmetrized_printer() {
        let lead = WeylOperator::quantize(&PhasePolynomial::parse("3*p1^2*p2 + 2*p2^3").unwrap());
        let block =
            WeylOperator::symmetrize(&Expression::parse("9/2*alpha*x^(1/3)").unwrap(), 1, 0);
        let x = &lead + &block;
        let s = x.to_symmetrized_string();
        assert!(s.contains("3*p1^2*p2"), "{s}");
        assert!(s.contains("{9/2*x^(1/3)*alpha, p1}"), "{s}");
    }
}
