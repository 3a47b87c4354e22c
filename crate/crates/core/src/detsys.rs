//! Leading-term machinery and linear determining systems for integrals of
//! motion of orders 2, 3 and 4.
//!
//! The leading term of an order-n integral lives in the enveloping algebra
//! of e(2): sum A_jkl L3^j p1^k p2^l with L3 = x p2 - y p1. Expanding the
//! commutation condition with H = (p1^2 + p2^2)/2 + V order by order in
//! momenta yields, per order, a set of linear PDEs on the lower-order
//! coefficient functions plus one cross-derivative compatibility condition
//! on V alone. Everything here is generated from the expansion itself -
//! never transcribed - and the ultimate ground truth for any candidate is
//! the exact bracket or commutator with H.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{in_span, RatMatrix};
use crate::phasepoly::PhasePolynomial;
use crate::rational::{rat, Rational};
use crate::symexpr::{Expression, MonomialKey, Var};
use crate::weylop::WeylOperator;

/// Real constants A_jkl (j + k + l = n) of an order-n leading term.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ACoeffs {
    pub order: u8,
    entries: BTreeMap<(u8, u8, u8), Rational>,
}

/// All index triples (j, k, l) with j + k + l = n, in lexicographic order;
/// the column ordering of every linear system over A.
pub fn entry_triples(order: u8) -> Vec<(u8, u8, u8)> {
    let mut v = Vec::new();
    for j in 0..=order {
        for k in 0..=(order - j) {
            v.push((j, k, order - j - k));
        }
    }
    v.sort();
    v
}

impl ACoeffs {
    pub fn new(order: u8) -> Self {
        assert!((2..=4).contains(&order), "orders 2..4 are supported");
        Self {
            order,
            entries: BTreeMap::new(),
        }
    }

    pub fn unit(order: u8, j: u8, k: u8, l: u8) -> Self {
        let mut a = Self::new(order);
        a.set(j, k, l, Rational::from_integer(1.into()));
        a
    }

    pub fn set(&mut self, j: u8, k: u8, l: u8, value: Rational) {
        assert_eq!(
            j + k + l,
            self.order,
            "A_{{{j}{k}{l}}} does not have degree {}",
            self.order
        );
        if value.is_zero() {
            self.entries.remove(&(j, k, l));
        } else {
            self.entries.insert((j, k, l), value);
        }
    }

    pub fn with(mut self, j: u8, k: u8, l: u8, value: Rational) -> Self {
        self.set(j, k, l, value);
        self
    }

    pub fn get(&self, j: u8, k: u8, l: u8) -> Rational {
        self.entries.get(&(j, k, l)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u8, u8, u8), &Rational)> {
        self.entries.iter()
    }

    pub fn to_vector(&self) -> Vec<Rational> {
        entry_triples(self.order)
            .iter()
            .map(|&(j, k, l)| self.get(j, k, l))
            .collect()
    }

    pub fn from_vector(order: u8, v: &[Rational]) -> Self {
        let triples = entry_triples(order);
        assert_eq!(v.len(), triples.len());
        let mut a = Self::new(order);
        for ((j, k, l), value) in triples.into_iter().zip(v.iter().cloned()) {
            a.set(j, k, l, value);
        }
        a
    }

    /// Leading term of H^(n/2) for even n: the always-admissible direction.
    pub fn hamiltonian_power_leading(order: u8) -> Self {
        assert!(order.is_multiple_of(2));
        let mut a = Self::new(order);
        let half = order / 2;
        // (p1^2 + p2^2)^half expands with binomial coefficients.
        for m in 0..=half {
            let mut c = Rational::from_integer(1.into());
            for t in 0..m {
                c *= rat((half - t) as i64, (t + 1) as i64);
            }
            a.set(0, 2 * (half - m), 2 * m, c);
        }
        a
    }
}

impl fmt::Display for ACoeffs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(&(j, k, l), v)| format!("A{j}{k}{l}={v}"))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// L3 = x p2 - y p1 as a classical observable.
pub fn angular_momentum() -> PhasePolynomial {
    PhasePolynomial::term(Expression::var(Var::X), 0, 1)
        - PhasePolynomial::term(Expression::var(Var::Y), 1, 0)
}

/// Classical leading term sum A_jkl L3^j p1^k p2^l.
pub fn expand_leading_classical(a: &ACoeffs) -> PhasePolynomial {
    let l3 = angular_momentum();
    let mut out = PhasePolynomial::zero();
    for (&(j, k, l), c) in a.iter() {
        let term = l3.pow(j as u32) * PhasePolynomial::momentum(k as u32, l as u32);
        out = out + term.scale(&Expression::from_rational(c.clone()));
    }
    out
}

/// Quantum leading term sum A_jkl (1/2){L3^j, p1^k p2^l}, normal-ordered.
pub fn expand_leading_quantum(a: &ACoeffs) -> WeylOperator {
    let l3 = WeylOperator::quantize(&angular_momentum());
    let mut out = WeylOperator::zero();
    for (&(j, k, l), c) in a.iter() {
        let mut l3j = WeylOperator::identity();
        for _ in 0..j {
            l3j = l3j.compose(&l3);
        }
        let m = WeylOperator::momentum(k as u32, l as u32);
        let sym = l3j.anticommutator(&m).scale(&Expression::from_ratio(1, 2));
        out = &out + &sym.scale(&Expression::from_rational(c.clone()));
    }
    out
}

/// The f-polynomials of an order-n leading term: f_i is the coefficient of
/// p1^(n+1-i) p2^(i-1) in the classical expansion, kept per unit A entry
/// so the dependence on A stays symbolic.
#[derive(Debug, Clone)]
pub struct FPolys {
    pub order: u8,
    per_entry: BTreeMap<(u8, u8, u8), Vec<Expression>>,
}

impl FPolys {
    pub fn build(order: u8) -> Self {
        let n = order as u32;
        let mut per_entry = BTreeMap::new();
        for (j, k, l) in entry_triples(order) {
            let expansion = expand_leading_classical(&ACoeffs::unit(order, j, k, l));
            let polys: Vec<Expression> = (0..=n).map(|i| expansion.coefficient(n - i, i)).collect();
            per_entry.insert((j, k, l), polys);
        }
        Self { order, per_entry }
    }

    /// f_1 .. f_(n+1) for a unit A entry.
    pub fn for_entry(&self, entry: (u8, u8, u8)) -> &[Expression] {
        &self.per_entry[&entry]
    }

    /// f_1 .. f_(n+1) for a concrete A vector.
    pub fn concrete(&self, a: &ACoeffs) -> Vec<Expression> {
        assert_eq!(a.order, self.order);
        let n = self.order as usize;
        let mut out = vec![Expression::zero(); n + 1];
        for (entry, c) in a.iter() {
            let fs = &self.per_entry[entry];
            for (i, f) in fs.iter().enumerate() {
                out[i] = &out[i] + &f.scale_rational(c);
            }
        }
        out
    }
}

/// Candidate integral: leading A plus the lower-order coefficient
/// functions appropriate to the order.
#[derive(Debug, Clone, PartialEq)]
pub enum IntegralCandidate {
    /// Order 2: leading term plus scalar ell(x, y).
    Order2 { a: ACoeffs, ell: Expression },
    /// Order 3: (1/2){g1, p1} + (1/2){g2, p2} below the leading term.
    Order3 {
        a: ACoeffs,
        g1: Expression,
        g2: Expression,
    },
    /// Order 4: (1/2){g1, p1^2} + (1/2){g2, p1 p2} + (1/2){g3, p2^2} + ell.
    Order4 {
        a: ACoeffs,
        g1: Expression,
        g2: Expression,
        g3: Expression,
        ell: Expression,
    },
}

impl IntegralCandidate {
    pub fn order(&self) -> u8 {
        match self {
            Self::Order2 { .. } => 2,
            Self::Order3 { .. } => 3,
            Self::Order4 { .. } => 4,
        }
    }

    pub fn a(&self) -> &ACoeffs {
        match self {
            Self::Order2 { a, .. } | Self::Order3 { a, .. } | Self::Order4 { a, .. } => a,
        }
    }

    /// The candidate as a classical observable.
    pub fn to_classical(&self) -> PhasePolynomial {
        let lead = expand_leading_classical(self.a());
        match self {
            Self::Order2 { ell, .. } => lead + PhasePolynomial::scalar(ell.clone()),
            Self::Order3 { g1, g2, .. } => {
                lead + PhasePolynomial::term(g1.clone(), 1, 0)
                    + PhasePolynomial::term(g2.clone(), 0, 1)
            }
            Self::Order4 {
                g1, g2, g3, ell, ..
            } => {
                lead + PhasePolynomial::term(g1.clone(), 2, 0)
                    + PhasePolynomial::term(g2.clone(), 1, 1)
                    + PhasePolynomial::term(g3.clone(), 0, 2)
                    + PhasePolynomial::scalar(ell.clone())
            }
        }
    }

    /// The candidate as a quantum observable (Weyl-symmetrized blocks).
    pub fn to_quantum(&self) -> WeylOperator {
        let lead = expand_leading_quantum(self.a());
        match self {
            Self::Order2 { ell, .. } => &lead + &WeylOperator::mult(ell.clone()),
            Self::Order3 { g1, g2, .. } => {
                let s1 = WeylOperator::symmetrize(g1, 1, 0);
                let s2 = WeylOperator::symmetrize(g2, 0, 1);
                &(&lead + &s1) + &s2
            }
            Self::Order4 {
                g1, g2, g3, ell, ..
            } => {
                let s1 = WeylOperator::symmetrize(g1, 2, 0);
                let s2 = WeylOperator::symmetrize(g2, 1, 1);
                let s3 = WeylOperator::symmetrize(g3, 0, 2);
                &(&(&(&lead + &s1) + &s2) + &s3) + &WeylOperator::mult(ell.clone())
            }
        }
    }
}

/// Right-hand sides of the linear determining equations, order by order,
/// generated from the bracket expansion (see the per-order residual
/// functions for the pairing with left-hand sides).
fn linear_rhs(order: u8, v: &Expression, f: &[Expression]) -> Vec<Expression> {
    let vx = v.diff(Var::X);
    let vy = v.diff(Var::Y);
    let c = |n: i64| Expression::from_int(n);
    match order {
        2 => vec![
            &(c(2) * (&f[0] * &vx)) + &(&f[1] * &vy),
            &(&f[1] * &vx) + &(c(2) * (&f[2] * &vy)),
        ],
        3 => vec![
            &(c(3) * (&f[0] * &vx)) + &(&f[1] * &vy),
            &(&f[2] * &vx) + &(c(3) * (&f[3] * &vy)),
            c(2) * (&(&f[1] * &vx) + &(&f[2] * &vy)),
        ],
        4 => vec![
            &(c(4) * (&f[0] * &vx)) + &(&f[1] * &vy),
            &(c(3) * (&f[1] * &vx)) + &(c(2) * (&f[2] * &vy)),
            &(c(2) * (&f[2] * &vx)) + &(c(3) * (&f[3] * &vy)),
            &(&f[3] * &vx) + &(c(4) * (&f[4] * &vy)),
        ],
        _ => unreachable!("orders 2..4 only"),
    }
}

/// Residuals (left minus right) of the linear determining equations for a
/// candidate; an exact integral gives all-zero residuals.
pub fn linear_determining_residuals(
    order: u8,
    v: &Expression,
    cand: &IntegralCandidate,
) -> Result<Vec<Expression>> {
    if cand.order() != order {
        return Err(Error::Invalid(format!(
            "candidate of order {} given to the order-{order} system",
            cand.order()
        )));
    }
    let f = FPolys::build(order).concrete(cand.a());
    let rhs = linear_rhs(order, v, &f);
    let res = match cand {
        IntegralCandidate::Order2 { ell, .. } => {
            vec![&ell.diff(Var::X) - &rhs[0], &ell.diff(Var::Y) - &rhs[1]]
        }
        IntegralCandidate::Order3 { g1, g2, .. } => vec![
            &g1.diff(Var::X) - &rhs[0],
            &g2.diff(Var::Y) - &rhs[1],
            &(&g1.diff(Var::Y) + &g2.diff(Var::X)) - &rhs[2],
        ],
        IntegralCandidate::Order4 { g1, g2, g3, .. } => vec![
            &g1.diff(Var::X) - &rhs[0],
            &(&g2.diff(Var::X) + &g1.diff(Var::Y)) - &rhs[1],
            &(&g3.diff(Var::X) + &g2.diff(Var::Y)) - &rhs[2],
            &g3.diff(Var::Y) - &rhs[3],
        ],
    };
    Ok(res)
}

/// Cross-derivative compatibility of the linear system: the condition on V
/// alone that eliminates the unknown functions.
fn compatibility_from_rhs(order: u8, rhs: &[Expression]) -> Expression {
    let dx = |e: &Expression| e.diff(Var::X);
    let dy = |e: &Expression| e.diff(Var::Y);
    match order {
        2 => &dy(&rhs[0]) - &dx(&rhs[1]),
        3 => &(&dy(&dy(&rhs[0])) + &dx(&dx(&rhs[1]))) - &dx(&dy(&rhs[2])),
        4 => {
            let t1 = dy(&dy(&dy(&rhs[0])));
            let t2 = dx(&dy(&dy(&rhs[1])));
            let t3 = dx(&dx(&dy(&rhs[2])));
            let t4 = dx(&dx(&dx(&rhs[3])));
            &(&t1 - &t2) + &(&t3 - &t4)
        }
        _ => unreachable!(),
    }
}

/// Compatibility expression per unit A entry; the full condition for a
/// concrete A is the A-weighted sum (linearity).
pub fn compatibility_per_entry(order: u8, v: &Expression) -> BTreeMap<(u8, u8, u8), Expression> {
    let fp = FPolys::build(order);
    entry_triples(order)
        .into_iter()
        .map(|entry| {
            let rhs = linear_rhs(order, v, fp.for_entry(entry));
            (entry, compatibility_from_rhs(order, &rhs))
        })
        .collect()
}

/// Compatibility expression for a concrete A vector.
pub fn compatibility_for(order: u8, v: &Expression, a: &ACoeffs) -> Expression {
    let per = compatibility_per_entry(order, v);
    let mut out = Expression::zero();
    for (entry, c) in a.iter() {
        out = &out + &per[entry].scale_rational(c);
    }
    out
}

/// Outcome of the admissibility solve: exact null-space basis of the
/// compatibility system, plus the dimensions of the collected system.
#[derive(Debug, Clone)]
pub struct AdmissibleSolution {
    pub order: u8,
    pub basis: Vec<ACoeffs>,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
}

impl AdmissibleSolution {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, a: &ACoeffs) -> bool {
        let basis: Vec<Vec<Rational>> = self.basis.iter().map(|b| b.to_vector()).collect();
        in_span(&basis, &a.to_vector())
    }
}

/// Rows of the linear system "coefficient of every monomial in the
/// compatibility expression vanishes", one pair of rows (real, imaginary)
/// per monomial key, columns indexed by A entries.
pub fn solve_admissible(order: u8, v: &Expression) -> AdmissibleSolution {
    let per = compatibility_per_entry(order, v);
    let triples = entry_triples(order);
    let mut keys: BTreeSet<MonomialKey> = BTreeSet::new();
    for c in per.values() {
        for (k, _) in c.terms() {
            keys.insert(k.clone());
        }
    }
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for key in &keys {
        let mut re_row = Vec::with_capacity(triples.len());
        let mut im_row = Vec::with_capacity(triples.len());
        for entry in &triples {
            let c = per[entry].coefficient(key);
            re_row.push(c.re);
            im_row.push(c.im);
        }
        if re_row.iter().any(|r| !r.is_zero()) {
            rows.push(re_row);
        }
        if im_row.iter().any(|r| !r.is_zero()) {
            rows.push(im_row);
        }
    }
    let nrows = rows.len();
    let m = if rows.is_empty() {
        RatMatrix::zero(1, triples.len())
    } else {
        RatMatrix::from_rows(rows)
    };
    let rank = m.rank();
    let basis = m
        .null_space()
        .into_iter()
        .map(|vc| ACoeffs::from_vector(order, &vc))
        .collect();
    AdmissibleSolution {
        order,
        basis,
        rows: nrows,
        cols: triples.len(),
        rank,
    }
}

/// H = (p1^2 + p2^2)/2 + V as a classical observable.
pub fn hamiltonian_classical(v: &Expression) -> PhasePolynomial {
    PhasePolynomial::term(Expression::from_ratio(1, 2), 2, 0)
        + PhasePolynomial::term(Expression::from_ratio(1, 2), 0, 2)
        + PhasePolynomial::scalar(v.clone())
}

/// H = (p1^2 + p2^2)/2 + V as a quantum operator.
pub fn hamiltonian_quantum(v: &Expression) -> WeylOperator {
    &WeylOperator::quantize(&hamiltonian_classical(&Expression::zero()))
        + &WeylOperator::mult(v.clone())
}

/// Exact bracket {H, X} for a classical candidate: the full residual whose
/// zeroth-order component is the de-facto nonlinear determining equation.
pub fn full_bracket_classical(v: &Expression, cand: &IntegralCandidate) -> PhasePolynomial {
    hamiltonian_classical(v).poisson_bracket(&cand.to_classical())
}

/// Exact commutator [H, X] for a quantum candidate.
pub fn full_commutator_quantum(v: &Expression, cand: &IntegralCandidate) -> WeylOperator {
    hamiltonian_quantum(v).commutator(&cand.to_quantum())
}

/// Zeroth-order (in momenta / derivatives) component of the full residual:
/// the diagnostic replacing the printed nonlinear determining equations.
pub fn zeroth_order_residual(
    v: &Expression,
    cand: &IntegralCandidate,
    quantum: bool,
) -> Expression {
    if quantum {
        full_commutator_quantum(v, cand).coefficient(0, 0)
    } else {
        full_bracket_classical(v, cand).coefficient(0, 0)
    }
}

/// One stored coefficient of an observable: (derivative or momentum key,
/// monomial key, Gaussian-rational value).
type CoeffEntry = ((u32, u32), MonomialKey, crate::gaussian::GaussianRational);

/// Result of attempting to extend a third-order leading term to a genuine
/// integral by solving for g1, g2 over a derived candidate basis.
#[derive(Debug, Clone)]
pub struct ClosureResult {
    /// The completed candidate, when the system is consistent.
    pub candidate: Option<IntegralCandidate>,
    /// Dimension of the homogeneous solution space (gauge freedom).
    pub freedom: usize,
    /// Number of candidate monomials offered for each of g1, g2.
    pub basis_size: usize,
}

fn antiderivative_candidates(sources: &[Expression]) -> BTreeSet<MonomialKey> {
    let mut set = BTreeSet::new();
    // Affine homogeneous solutions are always available.
    for e in [
        Expression::one(),
        Expression::var(Var::X),
        Expression::var(Var::Y),
    ] {
        for (k, _) in e.terms() {
            set.insert(k.clone());
        }
    }
    let ops: [fn(&Expression) -> Result<Expression>; 5] = [
        |m| m.antiderivative(Var::X),
        |m| m.antiderivative(Var::Y),
        |m| m.antiderivative(Var::X)?.antiderivative(Var::Y),
        |m| m.antiderivative(Var::Y)?.antiderivative(Var::Y),
        |m| m.antiderivative(Var::X)?.antiderivative(Var::X),
    ];
    for src in sources {
        for (key, _) in src.terms() {
            let m = Expression::monomial(key.clone(), crate::gaussian::GaussianRational::one());
            for op in &ops {
                if let Ok(res) = op(&m) {
                    for (k, _) in res.terms() {
                        set.insert(k.clone());
                    }
                }
            }
        }
    }
    set
}

/// Tries to complete a third-order leading term A into an exact integral
/// X = leading + (1/2){g1, p1} + (1/2){g2, p2} for the given potential, by
/// exact linear solve over a candidate monomial basis derived from the
/// determining equations. A returned candidate is verified: its full
/// bracket (classical) or commutator (quantum) with H is exactly zero.
///
/// Soundness is unconditional; completeness holds when the true g's live
/// in the derived basis, which covers potentials in the monomial ring
/// whose determining data integrates without logarithms.
pub fn third_order_closure(v: &Expression, a: &ACoeffs, quantum: bool) -> Result<ClosureResult> {
    if a.order != 3 {
        return Err(Error::Invalid(
            "closure solve expects an order-3 leading term".into(),
        ));
    }
    let f = FPolys::build(3).concrete(a);
    let rhs = linear_rhs(3, v, &f);
    let mons: Vec<MonomialKey> = antiderivative_candidates(&rhs).into_iter().collect();
    let basis_size = mons.len();

    // Residual of the candidate is affine in the unknown coefficients:
    // collect base residual and per-monomial contributions.
    let h_c = hamiltonian_classical(v);
    let h_q = hamiltonian_quantum(v);
    let lead_res: Vec<CoeffEntry> = if quantum {
        coeff_list_weyl(&h_q.commutator(&expand_leading_quantum(a)))
    } else {
        coeff_list_phase(&h_c.poisson_bracket(&expand_leading_classical(a)))
    };

    let mut columns: Vec<Vec<CoeffEntry>> = Vec::with_capacity(2 * basis_size);
    for &(k, l) in &[(1u32, 0u32), (0u32, 1u32)] {
        for m in &mons {
            let mexpr = Expression::monomial(m.clone(), crate::gaussian::GaussianRational::one());
            let contrib = if quantum {
                coeff_list_weyl(&h_q.commutator(&WeylOperator::symmetrize(&mexpr, k, l)))
            } else {
                coeff_list_phase(&h_c.poisson_bracket(&PhasePolynomial::term(mexpr, k, l)))
            };
            columns.push(contrib);
        }
    }

    // Assemble rows over (derivative/momentum key, monomial, re|im).
    type RowKey = ((u32, u32), MonomialKey, bool);
    let mut row_index: BTreeMap<RowKey, usize> = BTreeMap::new();
    let mut collect_keys = |list: &[CoeffEntry]| {
        for (dk, mk, c) in list {
            if !c.re.is_zero() {
                let key = (*dk, mk.clone(), false);
                let next = row_index.len();
                row_index.entry(key).or_insert(next);
            }
            if !c.im.is_zero() {
                let key = (*dk, mk.clone(), true);
                let next = row_index.len();
                row_index.entry(key).or_insert(next);
            }
        }
    };
    collect_keys(&lead_res);
    for col in &columns {
        collect_keys(col);
    }

    let nrows = row_index.len().max(1);
    let ncols = columns.len();
    let mut matrix = RatMatrix::zero(nrows, ncols);
    let mut rhs_vec = vec![Rational::zero(); nrows];
    for (dk, mk, c) in &lead_res {
        if !c.re.is_zero() {
            let r = row_index[&(*dk, mk.clone(), false)];
            rhs_vec[r] = -c.re.clone();
        }
        if !c.im.is_zero() {
            let r = row_index[&(*dk, mk.clone(), true)];
            rhs_vec[r] = -c.im.clone();
        }
    }
    for (j, col) in columns.iter().enumerate() {
        for (dk, mk, c) in col {
            if !c.re.is_zero() {
                let r = row_index[&(*dk, mk.clone(), false)];
                matrix.set(r, j, c.re.clone());
            }
            if !c.im.is_zero() {
                let r = row_index[&(*dk, mk.clone(), true)];
                matrix.set(r, j, c.im.clone());
            }
        }
    }

    let Some((solution, null_basis)) = matrix.solve(&rhs_vec) else {
        return Ok(ClosureResult {
            candidate: None,
            freedom: 0,
            basis_size,
        });
    };

    let build_g = |offset: usize| {
        let mut g = Expression::zero();
        for (i, m) in mons.iter().enumerate() {
            let c = &solution[offset + i];
            if !c.is_zero() {
                g = &g
                    + &Expression::monomial(
                        m.clone(),
                        crate::gaussian::GaussianRational::from_rational(c.clone()),
                    );
            }
        }
        g
    };
    let cand = IntegralCandidate::Order3 {
        a: a.clone(),
        g1: build_g(0),
        g2: build_g(basis_size),
    };
    // Verify exactly before reporting success.
    let residual_zero = if quantum {
        full_commutator_quantum(v, &cand).is_zero()
    } else {
        full_bracket_classical(v, &cand).is_zero()
    };
    if !residual_zero {
        return Err(Error::Invalid(
            "internal: closure solution failed exact verification".into(),
        ));
    }
    Ok(ClosureResult {
        candidate: Some(cand),
        freedom: null_basis.len(),
        basis_size,
    })
}

fn coeff_list_phase(p: &PhasePolynomial) -> Vec<CoeffEntry> {
    let mut out = Vec::new();
    for (&key, e) in p.terms() {
        for (mk, c) in e.terms() {
            out.push((key, mk.clone(), c.clone()));
        }
    }
    out
}

fn coeff_list_weyl(w: &WeylOperator) -> Vec<CoeffEntry> {
    let mut out = Vec::new();
    for (&key, e) in w.terms() {
        for (mk, c) in e.terms() {
            out.push((key, mk.clone(), c.clone()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    fn v_classical() -> Expression {
        Expression::parse("alpha*y*x^(-2/3)").unwrap()
    }

    fn v_quantum() -> Expression {
        Expression::parse("alpha*y*x^(-2/3) - 5/72*hbar^2*x^(-2)").unwrap()
    }

    #[test]
    fn expand_leading_examples() {
        // A021 = 3, A003 = 2 -> 3 p1^2 p2 + 2 p2^3.
        let a = ACoeffs::new(3)
            .with(0, 2, 1, rat_int(3))
            .with(0, 0, 3, rat_int(2));
        assert_eq!(
            expand_leading_classical(&a),
            PhasePolynomial::parse("3*p1^2*p2 + 2*p2^3").unwrap()
        );
        // A040 = 1 -> p1^4.
        let a4 = ACoeffs::new(4).with(0, 4, 0, rat_int(1));
        assert_eq!(
            expand_leading_classical(&a4),
            PhasePolynomial::parse("p1^4").unwrap()
        );
        // A300 = 1 -> L3^3.
        let a3 = ACoeffs::new(3).with(3, 0, 0, rat_int(1));
        assert_eq!(expand_leading_classical(&a3), angular_momentum().pow(3));
        // Quantum expansion agrees with the classical one in the limit.
        let q = expand_leading_quantum(&a3);
        assert_eq!(q.classical_limit().unwrap(), angular_momentum().pow(3));
        assert!(q.is_self_adjoint());
    }

    #[test]
    fn f_polys_read_off_expansion() {
        let fp = FPolys::build(3);
        // A021=3, A003=2: f = (0, 3, 0, 2).
        let a = ACoeffs::new(3)
            .with(0, 2, 1, rat_int(3))
            .with(0, 0, 3, rat_int(2));
        let f = fp.concrete(&a);
        assert_eq!(f[0], Expression::zero());
        assert_eq!(f[1], Expression::from_int(3));
        assert_eq!(f[2], Expression::zero());
        assert_eq!(f[3], Expression::from_int(2));

        // Leading term of (p1^2+p2^2)^2: f = (1, 0, 2, 0, 1).
        let fp4 = FPolys::build(4);
        let h2 = ACoeffs::new(4)
            .with(0, 4, 0, rat_int(1))
            .with(0, 2, 2, rat_int(2))
            .with(0, 0, 4, rat_int(1));
        let f4 = fp4.concrete(&h2);
        let expect: Vec<Expression> = [1, 0, 2, 0, 1]
            .iter()
            .map(|&n| Expression::from_int(n))
            .collect();
        assert_eq!(f4, expect);

        // A300 = 1: f1 = -y^3, f2 = 3xy^2, f3 = -3x^2y, f4 = x^3.
        let f3 = fp.concrete(&ACoeffs::new(3).with(3, 0, 0, rat_int(1)));
        assert_eq!(f3[0], Expression::parse("-y^3").unwrap());
        assert_eq!(f3[1], Expression::parse("3*x*y^2").unwrap());
        assert_eq!(f3[2], Expression::parse("-3*x^2*y").unwrap());
        assert_eq!(f3[3], Expression::parse("x^3").unwrap());
    }

    #[test]
    fn f_polys_match_expansion_for_all_unit_vectors() {
        for order in [2u8, 3, 4] {
            let fp = FPolys::build(order);
            let n = order as u32;
            for entry in entry_triples(order) {
                let a = ACoeffs::unit(order, entry.0, entry.1, entry.2);
                let expansion = expand_leading_classical(&a);
                let f = fp.concrete(&a);
                for i in 0..=n {
                    assert_eq!(f[i as usize], expansion.coefficient(n - i, i));
                }
            }
        }
    }

    #[test]
    fn reference_candidate_solves_linear_system() {
        // Classical: g1 = 9 alpha x^(1/3), g2 = 6 alpha y x^(-2/3).
        let cand = IntegralCandidate::Order3 {
            a: ACoeffs::new(3)
                .with(0, 2, 1, rat_int(3))
                .with(0, 0, 3, rat_int(2)),
            g1: Expression::parse("9*alpha*x^(1/3)").unwrap(),
            g2: Expression::parse("6*alpha*y*x^(-2/3)").unwrap(),
        };
        for r in linear_determining_residuals(3, &v_classical(), &cand).unwrap() {
            assert!(r.is_zero(), "nonzero residual {r}");
        }
        // Quantum: same equations, with the hbar^2 blocks in V and g2.
        let cand_q = IntegralCandidate::Order3 {
            a: cand.a().clone(),
            g1: Expression::parse("9*alpha*x^(1/3)").unwrap(),
            g2: Expression::parse("6*alpha*y*x^(-2/3) - 5/12*hbar^2*x^(-2)").unwrap(),
        };
        for r in linear_determining_residuals(3, &v_quantum(), &cand_q).unwrap() {
            assert!(r.is_zero(), "nonzero quantum residual {r}");
        }
    }

    #[test]
    fn zero_potential_zero_candidate() {
        let cand = IntegralCandidate::Order3 {
            a: ACoeffs::new(3)
                .with(1, 1, 1, rat_int(5))
                .with(0, 3, 0, rat_int(-2)),
            g1: Expression::zero(),
            g2: Expression::zero(),
        };
        for r in linear_determining_residuals(3, &Expression::zero(), &cand).unwrap() {
            assert!(r.is_zero());
        }
        assert!(full_bracket_classical(&Expression::zero(), &cand).is_zero());
    }

    #[test]
    fn order_mismatch_is_rejected() {
        let cand = IntegralCandidate::Order2 {
            a: ACoeffs::new(2).with(0, 2, 0, rat_int(1)),
            ell: Expression::zero(),
        };
        assert!(linear_determining_residuals(3, &v_classical(), &cand).is_err());
    }

    #[test]
    fn compatibility_vanishes_for_hamiltonian_powers() {
        // Order 2, A = leading of H: identically zero for any V.
        let h_lead = ACoeffs::hamiltonian_power_leading(2);
        assert_eq!(h_lead.get(0, 2, 0), rat_int(1));
        assert_eq!(h_lead.get(0, 0, 2), rat_int(1));
        for v in [
            v_classical(),
            v_quantum(),
            Expression::parse("x^3*y - 2*y^4 + x*y").unwrap(),
        ] {
            assert!(compatibility_for(2, &v, &h_lead).is_zero());
        }
        // Order 4, A = leading of H^2.
        let h2 = ACoeffs::hamiltonian_power_leading(4);
        assert_eq!(h2.get(0, 2, 2), rat_int(2));
        for v in [v_classical(), Expression::parse("x^2 + 5*x*y^3").unwrap()] {
            assert!(compatibility_for(4, &v, &h2).is_zero());
        }
    }

    #[test]
    fn compatibility_for_reference_direction() {
        let a = ACoeffs::new(3)
            .with(0, 2, 1, rat_int(3))
            .with(0, 0, 3, rat_int(2));
        assert!(compatibility_for(3, &v_classical(), &a).is_zero());
        assert!(compatibility_for(3, &v_quantum(), &a).is_zero());
    }

    #[test]
    fn order2_admissible_space_is_h_direction_only() {
        let sol = solve_admissible(2, &v_classical());
        assert_eq!(sol.dimension(), 1);
        assert!(sol.contains(&ACoeffs::hamiltonian_power_leading(2)));
        // Quantum potential: same verdict.
        let sol_q = solve_admissible(2, &v_quantum());
        assert_eq!(sol_q.dimension(), 1);
        assert!(sol_q.contains(&ACoeffs::hamiltonian_power_leading(2)));
    }

    #[test]
    fn order3_admissible_space_for_reference_potential() {
        let sol = solve_admissible(3, &v_classical());
        let dir = ACoeffs::new(3)
            .with(0, 2, 1, rat_int(3))
            .with(0, 0, 3, rat_int(2));
        assert!(sol.contains(&dir));
        // The linear necessary condition also admits the p1^3 direction
        // for any potential linear in y; the space is exactly 2D.
        assert_eq!(sol.dimension(), 2);
        assert!(sol.contains(&ACoeffs::unit(3, 0, 3, 0)));
    }

    #[test]
    fn order4_admissible_space_contains_y_and_h_squared() {
        let sol = solve_admissible(4, &v_classical());
        assert!(sol.contains(&ACoeffs::unit(4, 0, 4, 0)));
        assert!(sol.contains(&ACoeffs::hamiltonian_power_leading(4)));
    }

    #[test]
    fn admissible_basis_round_trip() {
        for order in [2u8, 3, 4] {
            let sol = solve_admissible(order, &v_classical());
            for b in &sol.basis {
                assert!(
                    compatibility_for(order, &v_classical(), b).is_zero(),
                    "basis vector {b} fails re-substitution at order {order}"
                );
            }
        }
    }

    #[test]
    fn closure_finds_reference_integral() {
        let a = ACoeffs::new(3)
            .with(0, 2, 1, rat_int(3))
            .with(0, 0, 3, rat_int(2));
        // Classical flavor.
        let res = third_order_closure(&v_classical(), &a, false).unwrap();
        let cand = res.candidate.expect("classical closure should succeed");
        if let IntegralCandidate::Order3 { g1, g2, .. } = &cand {
            assert_eq!(g1, &Expression::parse("9*alpha*x^(1/3)").unwrap());
            assert_eq!(g2, &Expression::parse("6*alpha*y*x^(-2/3)").unwrap());
        } else {
            unreachable!()
        }
        // Quantum flavor reconstructs the hbar^2 correction in g2.
        let res_q = third_order_closure(&v_quantum(), &a, true).unwrap();
        let cand_q = res_q.candidate.expect("quantum closure should succeed");
        if let IntegralCandidate::Order3 { g2, .. } = &cand_q {
            assert_eq!(
                g2,
                &Expression::parse("6*alpha*y*x^(-2/3) - 5/12*hbar^2*x^(-2)").unwrap()
            );
        } else {
            unreachable!()
        }
    }

    #[test]
    fn closure_rejects_perturbed_exponent() {
        // V = alpha y x^(-1/2): linear compatibility admits the (3,2)
        // direction but no genuine integral exists.
        let v = Expression::parse("alpha*y*x^(-1/2)").unwrap();
        let a = ACoeffs::new(3)
            .with(0, 2, 1, rat_int(3))
            .with(0, 0, 3, rat_int(2));
        let sol = solve_admissible(3, &v);
        assert!(
            sol.contains(&a),
            "linear condition alone cannot exclude (3,2)"
        );
        let res = third_order_closure(&v, &a, false).unwrap();
        assert!(res.candidate.is_none());
        let res_q = third_order_closure(&v, &a, true).unwrap();
        assert!(res_q.candidate.is_none());
    }

    #[test]
    fn quantum_closure_needs_hbar_correction_in_v() {
        // With the bare classical potential, the quantum closure fails:
        // the hbar^2 correction to V is necessary.
        let a = ACoeffs::new(3)
            .with(0, 2, 1, rat_int(3))
            .with(0, 0, 3, rat_int(2));
        let res = third_order_closure(&v_classical(), &a, true).unwrap();
        assert!(res.candidate.is_none());
    }

    #[test]
    fn zero_linear_residuals_imply_zero_compatibility() {
        // Candidates that solve the linear system force the compatibility
        // expression to vanish at their A vector. Order 2: twice the
        // Hamiltonian itself, for assorted potentials.
        for v in [
            v_classical(),
            v_quantum(),
            Expression::parse("x^3 - 2*x*y^2 + y^4").unwrap(),
        ] {
            let cand = IntegralCandidate::Order2 {
                a: ACoeffs::hamiltonian_power_leading(2),
                ell: &Expression::from_int(2) * &v,
            };
            for r in linear_determining_residuals(2, &v, &cand).unwrap() {
                assert!(r.is_zero());
            }
            assert!(compatibility_for(2, &v, cand.a()).is_zero());
        }
        // Order 3: the shipped candidate.
        let cand = IntegralCandidate::Order3 {
            a: ACoeffs::new(3)
                .with(0, 2, 1, rat_int(3))
                .with(0, 0, 3, rat_int(2)),
            g1: Expression::parse("9*alpha*x^(1/3)").unwrap(),
            g2: Expression::parse("6*alpha*y*x^(-2/3)").unwrap(),
        };
        assert!(compatibility_for(3, &v_classical(), cand.a()).is_zero());
    }

    #[test]
    fn zeroth_order_diagnostic_matches_full_residual() {
        // For a candidate satisfying the linear equations, the only
        // surviving component of {H, X} is the zeroth-order one.
        let cand = IntegralCandidate::Order3 {
            a: ACoeffs::new(3)
                .with(0, 2, 1, rat_int(3))
                .with(0, 0, 3, rat_int(2)),
            g1: Expression::parse("9*alpha*x^(1/3)").unwrap(),
            g2: Expression::parse("6*alpha*y*x^(-2/3)").unwrap(),
        };
        // Wrong-exponent potential with the matching linear solution:
        // residual concentrates in momentum degree zero.
        let v = v_classical();
        let bracket = full_bracket_classical(&v, &cand);
        assert!(bracket.is_zero());
        assert_eq!(zeroth_order_residual(&v, &cand, false), Expression::zero());
    }
}
