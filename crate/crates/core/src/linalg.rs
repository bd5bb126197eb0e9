//! Exact dense linear algebra over the Gaussian rationals, plus small
//! symbolic determinants over polynomial entries.

use crate::poly::MultiPoly;
use crate::scalar::GaussianRational;

/// Dense matrix over `GaussianRational`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<GaussianRational>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![GaussianRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = GaussianRational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<GaussianRational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &GaussianRational {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut GaussianRational {
        &mut self.data[i * self.cols + j]
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = Matrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if !b.is_zero() {
                        *out.at_mut(i, j) += &(a * b);
                    }
                }
            }
        }
        out
    }

    /// In-place reduction to reduced row echelon form; returns the pivot
    /// columns in order.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.at(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for j in 0..self.cols {
                    let a = self.at(p, j).clone();
                    let b = self.at(row, j).clone();
                    *self.at_mut(p, j) = b;
                    *self.at_mut(row, j) = a;
                }
            }
            let inv = self.at(row, col).inv().expect("nonzero pivot");
            for j in 0..self.cols {
                let v = self.at(row, j) * &inv;
                *self.at_mut(row, j) = v;
            }
            for r in 0..self.rows {
                if r == row || self.at(r, col).is_zero() {
                    continue;
                }
                let factor = self.at(r, col).clone();
                for j in 0..self.cols {
                    let delta = self.at(row, j) * &factor;
                    let v = self.at(r, j) - &delta;
                    *self.at_mut(r, j) = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right null space, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vec<GaussianRational>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![GaussianRational::zero(); self.cols];
            v[free] = GaussianRational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m.at(r, free).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Determinant by fraction-free-ish Gaussian elimination (fine at the
    /// small sizes used here).
    pub fn det(&self) -> GaussianRational {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let mut m = self.clone();
        let n = m.rows;
        let mut det = GaussianRational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m.at(r, col).is_zero()) else {
                return GaussianRational::zero();
            };
            if p != col {
                det = -det;
                for j in 0..n {
                    let a = m.at(p, j).clone();
                    let b = m.at(col, j).clone();
                    *m.at_mut(p, j) = b;
                    *m.at_mut(col, j) = a;
                }
            }
            let pivot = m.at(col, col).clone();
            det = &det * &pivot;
            let inv = pivot.inv().expect("nonzero pivot");
            for r in col + 1..n {
                if m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col) * &inv;
                for j in col..n {
                    let delta = m.at(col, j) * &factor;
                    let v = m.at(r, j) - &delta;
                    *m.at_mut(r, j) = v;
                }
            }
        }
        det
    }
}

/// Determinant of a square matrix of polynomials by Laplace expansion along
/// the first row. Intended for the small (<= 6x6) phase matrices; cost grows
/// factorially.
pub fn poly_det(entries: &[Vec<MultiPoly>]) -> MultiPoly {
    let n = entries.len();
    assert!(entries.iter().all(|row| row.len() == n), "non-square polynomial matrix");
    assert!(n <= 8, "polynomial determinant limited to small matrices");
    let universe = *entries[0][0].universe();
    if n == 0 {
        return MultiPoly::one(universe);
    }
    if n == 1 {
        return entries[0][0].clone();
    }
    let mut out = MultiPoly::zero(universe);
    for (j, entry) in entries[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<MultiPoly>> = entries[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let mut term = entry.mul(&poly_det(&minor));
        if j % 2 == 1 {
            term = term.neg();
        }
        out = out.add(&term);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;
    use crate::vars::VarUniverse;

    fn q(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    #[test]
    fn rref_and_rank() {
        let mut m = Matrix::from_rows(vec![
            vec![q(1), q(2), q(3)],
            vec![q(2), q(4), q(6)],
            vec![q(0), q(1), q(1)],
        ]);
        assert_eq!(m.rank(), 2);
        let pivots = m.rref();
        assert_eq!(pivots, vec![0, 1]);
        assert_eq!(*m.at(0, 2), q(1));
        assert_eq!(*m.at(1, 2), q(1));
    }

    #[test]
    fn kernel() {
        // x + 2y + 3z = 0, y + z = 0 -> kernel spanned by (-1, -1, 1).
        let m = Matrix::from_rows(vec![vec![q(1), q(2), q(3)], vec![q(0), q(1), q(1)]]);
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0], vec![q(-1), q(-1), q(1)]);
        // All kernel vectors annihilate.
        for v in &basis {
            for i in 0..m.rows() {
                let mut s = GaussianRational::zero();
                for j in 0..m.cols() {
                    s += &(m.at(i, j) * &v[j]);
                }
                assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn determinants() {
        let m = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(3), q(4)]]);
        assert_eq!(m.det(), q(-2));
        let m = Matrix::from_rows(vec![
            vec![q(0), q(1), q(0)],
            vec![q(1), q(0), q(0)],
            vec![q(0), q(0), q(1)],
        ]);
        assert_eq!(m.det(), q(-1));
        assert_eq!(Matrix::identity(4).det(), q(1));
        let singular = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(4)]]);
        assert!(singular.det().is_zero());
    }

    #[test]
    fn matrix_product() {
        let a = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(3), q(4)]]);
        let b = Matrix::from_rows(vec![vec![q(0), q(1)], vec![q(1), q(0)]]);
        let ab = a.mul(&b);
        assert_eq!(ab, Matrix::from_rows(vec![vec![q(2), q(1)], vec![q(4), q(3)]]));
    }

    #[test]
    fn polynomial_determinant() {
        let universe = VarUniverse::new(2, 1);
        let p = |s: &str| parse_poly(s, universe).unwrap();
        // det [[x1, 1], [1, x2]] = x1*x2 - 1.
        let d = poly_det(&[vec![p("x1"), p("1")], vec![p("1"), p("x2")]]);
        assert_eq!(d, p("x1*x2 - 1"));
        // Hyperbolic block form [[A, -1], [-1, 0]] (1x1 blocks): det = -1.
        let d = poly_det(&[vec![p("x1^2"), p("-1")], vec![p("-1"), p("0")]]);
        assert_eq!(d, p("-1"));
    }
}
