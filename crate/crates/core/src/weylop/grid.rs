//! Pointwise application of a normal-ordered operator to a sampled wave
//! function on a rectangular grid, with central finite-difference stencils
//! of at least 4th-order accuracy. This is the numeric cross-check of the
//! exact commutation results, a convergence study rather than a proof.
//!
//! Stencil weights are generated exactly (rational Vandermonde solve), so
//! no transcribed coefficient tables appear here.

use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::RatMatrix;
use crate::rational::Rational;
use crate::weylop::WeylOperator;

/// Uniform rectangular grid; node (i, j) sits at (x0 + i hx, y0 + j hy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    /// Grid covering [x0, x1] x [y0, y1] with nx x ny nodes (inclusive).
    pub fn covering(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Self {
        assert!(nx >= 2 && ny >= 2);
        Self {
            x0,
            y0,
            hx: (x1 - x0) / (nx - 1) as f64,
            hy: (y1 - y0) / (ny - 1) as f64,
            nx,
            ny,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy
    }
}

/// Sampled complex function with a validity margin: nodes closer than
/// (margin_x, margin_y) to the boundary hold no meaningful data.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: Grid,
    pub margin_x: usize,
    pub margin_y: usize,
    data: Vec<Complex64>,
}

impl GridFunction {
    pub fn sample(grid: Grid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut data = vec![Complex64::zero(); grid.nx * grid.ny];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                data[j * grid.nx + i] = f(grid.x(i), grid.y(j));
            }
        }
        Self {
            grid,
            margin_x: 0,
            margin_y: 0,
            data,
        }
    }

    /// Centered Gaussian exp(-((x-cx)^2 + (y-cy)^2) / (2 sigma^2)).
    pub fn gaussian(grid: Grid, cx: f64, cy: f64, sigma: f64) -> Self {
        Self::sample(grid, |x, y| {
            let r2 = (x - cx).powi(2) + (y - cy).powi(2);
            Complex64::new((-r2 / (2.0 * sigma * sigma)).exp(), 0.0)
        })
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.grid.nx + i]
    }

    fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[j * self.grid.nx + i] = v;
    }

    /// Discrete L2 norm over the valid interior, excluding an extra band
    /// so that two functions can be compared on a common region.
    pub fn norm_inside(&self, margin_x: usize, margin_y: usize) -> f64 {
        let mx = self.margin_x.max(margin_x);
        let my = self.margin_y.max(margin_y);
        let mut acc = 0.0;
        for j in my..self.grid.ny.saturating_sub(my) {
            for i in mx..self.grid.nx.saturating_sub(mx) {
                acc += self.get(i, j).norm_sqr();
            }
        }
        (acc * self.grid.hx * self.grid.hy).sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid);
        let mut out = self.clone();
        out.margin_x = self.margin_x.max(other.margin_x);
        out.margin_y = self.margin_y.max(other.margin_y);
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }
}

/// Stencil radius giving at least 4th-order accuracy for a symmetric
/// central difference of the given derivative order.
fn stencil_radius(order: u32) -> usize {
    match order {
        0 => 0,
        1 | 2 => 2,
        3 | 4 => 3,
        _ => (order as usize + 3) / 2 + 1,
    }
}

/// Exact central finite-difference weights for d^m/ds^m on offsets
/// -radius..=radius: solve sum_j c_j j^k = m! delta_{k,m}, k = 0..2R.
fn stencil_weights(order: u32, radius: usize) -> Vec<f64> {
    let n = 2 * radius + 1;
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let offset = j as i64 - radius as i64;
            let mut p = Rational::one();
            for _ in 0..k {
                p *= Rational::from_integer(offset.into());
            }
            row.push(p);
        }
        rows.push(row);
    }
    let mut rhs = vec![Rational::zero(); n];
    let mut factorial = Rational::one();
    for v in 1..=order as i64 {
        factorial *= Rational::from_integer(v.into());
    }
    rhs[order as usize] = factorial;
    let (weights, _) = RatMatrix::from_rows(rows)
        .solve(&rhs)
        .expect("stencil system is invertible");
    weights.iter().map(|w| w.to_f64().unwrap()).collect()
}

/// Pure derivative D_x^a or D_y^b of a grid function, widening the
/// validity margin by the stencil radius in that direction.
fn apply_derivative(psi: &GridFunction, order: u32, along_x: bool) -> Result<GridFunction> {
    if order == 0 {
        return Ok(psi.clone());
    }
    let radius = stencil_radius(order);
    let grid = psi.grid;
    let h = if along_x { grid.hx } else { grid.hy };
    let scale = 1.0 / h.powi(order as i32);
    let weights = stencil_weights(order, radius);

    let mut out = psi.clone();
    let (mx, my) = if along_x {
        (psi.margin_x + radius, psi.margin_y)
    } else {
        (psi.margin_x, psi.margin_y + radius)
    };
    if 2 * mx >= grid.nx || 2 * my >= grid.ny {
        return Err(Error::Invalid(format!(
            "grid {}x{} too small for an order-{order} stencil (needs margin {mx}x{my})",
            grid.nx, grid.ny
        )));
    }
    out.margin_x = mx;
    out.margin_y = my;
    for j in my..grid.ny - my {
        for i in mx..grid.nx - mx {
            let mut acc = Complex64::zero();
            for (s, w) in weights.iter().enumerate() {
                let off = s as i64 - radius as i64;
                let v = if along_x {
                    psi.get((i as i64 + off) as usize, j)
                } else {
                    psi.get(i, (j as i64 + off) as usize)
                };
                acc += v * *w;
            }
            out.set(i, j, acc * scale);
        }
    }
    Ok(out)
}

/// Applies a normal-ordered operator to a sampled function: for each term
/// c_ab d_x^a d_y^b, central differences for the derivatives and pointwise
/// multiplication by c_ab(x, y; alpha, hbar).
pub fn apply_on_grid(
    op: &WeylOperator,
    psi: &GridFunction,
    alpha: f64,
    hbar: f64,
) -> Result<GridFunction> {
    let grid = psi.grid;
    let mut out_margin_x = psi.margin_x;
    let mut out_margin_y = psi.margin_y;
    for (&(a, b), _) in op.terms() {
        out_margin_x = out_margin_x.max(psi.margin_x + stencil_radius(a));
        out_margin_y = out_margin_y.max(psi.margin_y + stencil_radius(b));
    }
    if 2 * out_margin_x >= grid.nx || 2 * out_margin_y >= grid.ny {
        return Err(Error::Invalid(format!(
            "grid {}x{} too small for operator stencils",
            grid.nx, grid.ny
        )));
    }

    let mut out = GridFunction {
        grid,
        margin_x: out_margin_x,
        margin_y: out_margin_y,
        data: vec![Complex64::zero(); grid.nx * grid.ny],
    };
    for (&(a, b), coeff) in op.terms() {
        let dx = apply_derivative(psi, a, true)?;
        let dxy = apply_derivative(&dx, b, false)?;
        for j in out_margin_y..grid.ny - out_margin_y {
            let y = grid.y(j);
            for i in out_margin_x..grid.nx - out_margin_x {
                let c = coeff.eval_numeric(grid.x(i), y, alpha, hbar)?;
                let v = out.get(i, j) + c * dxy.get(i, j);
                out.set(i, j, v);
            }
        }
    }
    Ok(out)
}

/// ||(AB - BA) psi|| / ||psi|| on the common valid interior; the grid
/// witness that two operators commute.
pub fn commutator_residual_on_grid(
    a: &WeylOperator,
    b: &WeylOperator,
    psi: &GridFunction,
    alpha: f64,
    hbar: f64,
) -> Result<f64> {
    let ab = apply_on_grid(a, &apply_on_grid(b, psi, alpha, hbar)?, alpha, hbar)?;
    let ba = apply_on_grid(b, &apply_on_grid(a, psi, alpha, hbar)?, alpha, hbar)?;
    let diff = ab.sub(&ba);
    let denom = psi.norm_inside(diff.margin_x, diff.margin_y);
    if denom == 0.0 {
        return Err(Error::Invalid("zero wave function on the grid".into()));
    }
    Ok(diff.norm_inside(0, 0) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::Expression;

    #[test]
    fn identity_leaves_samples_unchanged() {
        let grid = Grid::covering(1.0, 3.0, -1.0, 1.0, 21, 21);
        let psi = GridFunction::gaussian(grid, 2.0, 0.0, 0.4);
        let out = apply_on_grid(&WeylOperator::identity(), &psi, 1.0, 1.0).unwrap();
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                assert_eq!(out.get(i, j), psi.get(i, j));
            }
        }
    }

    #[test]
    fn derivative_is_fourth_order() {
        // d/dx of exp(kx) sampled on two grids: error ratio ~ 16.
        let k = 0.9;
        let exact = move |x: f64, y: f64| Complex64::new((k * x + 0.3 * y).exp(), 0.0);
        let dop = WeylOperator::partial(1, 0);
        let mut errs = Vec::new();
        for n in [41usize, 81] {
            let grid = Grid::covering(1.0, 2.0, -0.5, 0.5, n, n);
            let psi = GridFunction::sample(grid, exact);
            let d = apply_on_grid(&dop, &psi, 0.0, 0.0).unwrap();
            let reference = GridFunction::sample(grid, |x, y| exact(x, y) * k);
            let diff = d.sub(&reference);
            errs.push(
                diff.norm_inside(d.margin_x, d.margin_y)
                    / reference.norm_inside(d.margin_x, d.margin_y),
            );
        }
        let ratio = errs[0] / errs[1];
        assert!(
            (10.0..24.0).contains(&ratio),
            "expected ~16x improvement, got {ratio} from {errs:?}"
        );
    }

    #[test]
    fn grid_too_small_for_stencil() {
        let grid = Grid::covering(1.0, 3.0, -1.0, 1.0, 5, 5);
        let psi = GridFunction::gaussian(grid, 2.0, 0.0, 0.4);
        let op = WeylOperator::partial(4, 0);
        assert!(apply_on_grid(&op, &psi, 1.0, 1.0).is_err());
    }

    #[test]
    fn third_and_fourth_derivatives_converge_at_fourth_order() {
        let k = 1.1;
        let exact = move |x: f64, _y: f64| Complex64::new((k * x).exp(), 0.0);
        // Coarser grids than the first-derivative test: at fine spacing
        // the truncation error of high-order stencils drops below the
        // roundoff amplification eps/h^m and the ratio saturates.
        for order in [3u32, 4] {
            let dop = WeylOperator::partial(order, 0);
            let mut errs = Vec::new();
            for n in [21usize, 41] {
                let grid = Grid::covering(1.0, 2.0, -0.5, 0.5, n, 9);
                let psi = GridFunction::sample(grid, exact);
                let d = apply_on_grid(&dop, &psi, 0.0, 0.0).unwrap();
                let reference =
                    GridFunction::sample(grid, |x, y| exact(x, y) * k.powi(order as i32));
                let diff = d.sub(&reference);
                errs.push(
                    diff.norm_inside(d.margin_x, d.margin_y)
                        / reference.norm_inside(d.margin_x, d.margin_y),
                );
            }
            let ratio = errs[0] / errs[1];
            assert!(
                (8.0..32.0).contains(&ratio),
                "order {order}: ratio {ratio} from {errs:?}"
            );
        }
    }

    #[test]
    fn multiplication_operator_is_pointwise() {
        let grid = Grid::covering(1.0, 3.0, -1.0, 1.0, 11, 11);
        let psi = GridFunction::gaussian(grid, 2.0, 0.0, 0.5);
        let op = WeylOperator::mult(Expression::parse("x^2").unwrap());
        let out = apply_on_grid(&op, &psi, 0.0, 0.0).unwrap();
        let x = grid.x(5);
        assert!((out.get(5, 5) - psi.get(5, 5) * x * x).norm() < 1e-14);
    }
}
