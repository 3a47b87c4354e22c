//! Exact linear algebra over the rationals: reduced row echelon form,
//! rank, null spaces, and inhomogeneous solves. Every pivot decision is an
//! exact zero test, so ranks and admissibility verdicts never depend on a
//! floating tolerance.

use num_traits::{One, Signed, Zero};

use crate::rational::{primitive_integer_vector, Rational};

/// Dense rational matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        Self {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// In-place reduced row echelon form. Returns the pivot columns.
    ///
    /// Partial pivoting picks the entry of smallest "size" (digit count of
    /// numerator times denominator) to keep intermediate rationals small.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            // Find the best nonzero pivot in this column.
            let mut best: Option<(usize, usize)> = None;
            for r in pivot_row..self.rows {
                let v = self.get(r, col);
                if !v.is_zero() {
                    let size = v.numer().bits() as usize + v.denom().bits() as usize;
                    if best.is_none_or(|(_, s)| size < s) {
                        best = Some((r, size));
                    }
                }
            }
            let Some((r, _)) = best else { continue };
            self.swap_rows(pivot_row, r);

            // Normalize the pivot row.
            let inv = self.get(pivot_row, col).recip();
            for c in col..self.cols {
                let v = self.get(pivot_row, c) * &inv;
                self.set(pivot_row, c, v);
            }
            // Eliminate above and below.
            for r in 0..self.rows {
                if r == pivot_row || self.get(r, col).is_zero() {
                    continue;
                }
                let factor = self.get(r, col).clone();
                for c in col..self.cols {
                    let v = self.get(r, c) - &factor * self.get(pivot_row, c);
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right null space, one primitive integer vector per free
    /// column, in ascending free-column order.
    pub fn null_space(&self) -> Vec<Vec<Rational>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = Some(i);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut vec = vec![Rational::zero(); self.cols];
            vec[free] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                vec[pc] = -m.get(row, free).clone();
            }
            basis.push(primitive_integer_vector(&vec));
        }
        basis
    }

    /// Solves `self * x = rhs` exactly. Returns `None` when inconsistent,
    /// otherwise one particular solution (free variables set to zero)
    /// together with the null-space basis of `self`.
    pub fn solve(&self, rhs: &[Rational]) -> Option<(Vec<Rational>, Vec<Vec<Rational>>)> {
        assert_eq!(rhs.len(), self.rows);
        let mut aug = RatMatrix::zero(self.rows, self.cols + 1);
        for (r, rhs_entry) in rhs.iter().enumerate() {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, self.cols, rhs_entry.clone());
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // pivot in the augmented column
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(row, self.cols).clone();
        }
        Some((x, self.null_space()))
    }
}

/// Whether `v` lies in the span of `basis` (all over the rationals).
pub fn in_span(basis: &[Vec<Rational>], v: &[Rational]) -> bool {
    if v.iter().all(|c| c.is_zero()) {
        return true;
    }
    if basis.is_empty() {
        return false;
    }
    let cols = v.len();
    assert!(basis.iter().all(|b| b.len() == cols));
    // Solve basis^T * c = v.
    let mut m = RatMatrix::zero(cols, basis.len());
    for (j, b) in basis.iter().enumerate() {
        for (i, entry) in b.iter().enumerate() {
            m.set(i, j, entry.clone());
        }
    }
    m.solve(v).is_some()
}

/// Relative size guard used by drift monitors: |a| treated as 1 when tiny.
pub fn abs_or_one(r: &Rational) -> Rational {
    if r.is_zero() {
        Rational::one()
    } else {
        r.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn m(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| rat_int(v)).collect())
                .collect(),
        )
    }

    #[test]
    fn rank_and_rref() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let id = m(&[&[1, 0], &[0, 1]]);
        assert_eq!(id.rank(), 2);
        assert_eq!(RatMatrix::zero(3, 4).rank(), 0);
    }

    #[test]
    fn null_space_basis() {
        // x + y + z = 0 has a 2-dimensional null space.
        let a = m(&[&[1, 1, 1]]);
        let ns = a.null_space();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let s: Rational = v.iter().cloned().sum();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = m(&[&[2, 0], &[0, 4]]);
        let (x, ns) = a.solve(&[rat_int(1), rat_int(1)]).unwrap();
        assert_eq!(x, vec![rat(1, 2), rat(1, 4)]);
        assert!(ns.is_empty());

        let b = m(&[&[1, 1], &[1, 1]]);
        assert!(b.solve(&[rat_int(0), rat_int(1)]).is_none());
    }

    #[test]
    fn span_membership() {
        let basis = vec![
            vec![rat_int(1), rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(0), rat_int(1)],
        ];
        assert!(in_span(&basis, &[rat_int(2), rat_int(2), rat_int(-1)]));
        assert!(!in_span(&basis, &[rat_int(1), rat_int(0), rat_int(0)]));
        assert!(in_span(&[], &[rat_int(0)]));
    }
}
