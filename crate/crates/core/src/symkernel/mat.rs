use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{Rat, Scalar};

/// Dense row-major matrix, used for transforms and linear systems.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Solution set `particular + span(null)` of a linear system.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSolution<T> {
    pub particular: Vec<T>,
    pub null: Vec<Vec<T>>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Mat { rows: r, cols: c, data })
    }

    pub fn from_columns(cols: &[Vec<T>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| cols[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &Mat<T>) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Mat<f64> {
        self.map(|x| x.as_f64())
    }

    fn scale_hint(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.as_f64().abs()))
    }

    /// Index of the pivot row in column `col` among rows `from..`.
    fn pick_pivot(&self, from: usize, col: usize, scale: f64) -> Option<usize> {
        if T::EXACT {
            (from..self.rows).find(|&i| !self[(i, col)].is_zero())
        } else {
            let best = (from..self.rows).max_by(|&a, &b| {
                self[(a, col)]
                    .as_f64()
                    .abs()
                    .total_cmp(&self[(b, col)].as_f64().abs())
            })?;
            (!self[(best, col)].negligible(scale)).then_some(best)
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn det(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let scale = self.scale_hint();
        let mut w = self.clone();
        let mut det = T::one();
        for k in 0..w.rows {
            let Some(p) = w.pick_pivot(k, k, scale) else {
                return Ok(T::zero());
            };
            if p != k {
                w.swap_rows(p, k);
                det = -det;
            }
            let piv = w[(k, k)].clone();
            det = det * piv.clone();
            for i in k + 1..w.rows {
                let f = w[(i, k)].clone() / piv.clone();
                if f.is_zero() {
                    continue;
                }
                for j in k..w.cols {
                    let v = w[(k, j)].clone();
                    w[(i, j)] = w[(i, j)].clone() - f.clone() * v;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::SingularTransform);
        }
        let n = self.rows;
        let scale = self.scale_hint();
        let mut w = Self::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                T::one()
            } else {
                T::zero()
            }
        });
        for k in 0..n {
            let p = w.pick_pivot(k, k, scale).ok_or(Error::SingularTransform)?;
            w.swap_rows(p, k);
            let piv = w[(k, k)].clone();
            for j in 0..2 * n {
                w[(k, j)] = w[(k, j)].clone() / piv.clone();
            }
            for i in 0..n {
                if i == k || w[(i, k)].is_zero() {
                    continue;
                }
                let f = w[(i, k)].clone();
                for j in 0..2 * n {
                    let v = w[(k, j)].clone();
                    w[(i, j)] = w[(i, j)].clone() - f.clone() * v;
                }
            }
        }
        Ok(Self::from_fn(n, n, |i, j| w[(i, j + n)].clone()))
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let scale = self.scale_hint();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = self.pick_pivot(row, col, scale) else {
                if !T::EXACT {
                    for i in row..self.rows {
                        self[(i, col)] = T::zero();
                    }
                }
                continue;
            };
            self.swap_rows(p, row);
            let piv = self[(row, col)].clone();
            for j in col..self.cols {
                self[(row, j)] = self[(row, j)].clone() / piv.clone();
            }
            for i in 0..self.rows {
                if i == row || self[(i, col)].is_zero() {
                    continue;
                }
                let f = self[(i, col)].clone();
                for j in col..self.cols {
                    let v = self[(row, j)].clone();
                    self[(i, j)] = self[(i, j)].clone() - f.clone() * v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of `{x : self·x = 0}`.
    pub fn kernel(&self) -> Vec<Vec<T>> {
        let zeros = vec![T::zero(); self.rows];
        solve_affine(self, &zeros)
            .map(|s| s.null)
            .unwrap_or_default()
    }
}

/// Solve `a·x = b`. `None` when the system is inconsistent.
pub fn solve_affine<T: Scalar>(a: &Mat<T>, b: &[T]) -> Option<AffineSolution<T>> {
    assert_eq!(a.rows, b.len(), "right-hand side length");
    let n = a.cols;
    let mut w = Mat::from_fn(a.rows, n + 1, |i, j| {
        if j < n {
            a[(i, j)].clone()
        } else {
            b[i].clone()
        }
    });
    let scale = w.scale_hint();
    let pivots = w.rref();
    if pivots.last() == Some(&n) {
        return None;
    }
    if !T::EXACT {
        // rows below the pivots must have a negligible right-hand side
        for i in pivots.len()..w.rows {
            if !w[(i, n)].negligible(scale) {
                return None;
            }
        }
    }
    let mut particular = vec![T::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = w[(r, n)].clone();
    }
    let free: Vec<usize> = (0..n).filter(|j| !pivots.contains(j)).collect();
    let null = free
        .iter()
        .map(|&f| {
            let mut v = vec![T::zero(); n];
            v[f] = T::one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -w[(r, f)].clone();
            }
            v
        })
        .collect();
    Some(AffineSolution { particular, null })
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| self.data[i * self.cols + j].to_string())
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Mat<Rat> {
    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }
}

impl Mat<f64> {
    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Self {
        Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn max_abs_diff(&self, other: &Mat<f64>) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn m(rows: &[&[i64]]) -> Mat<Rat> {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).unwrap()
    }

    #[test]
    fn det_and_inverse() {
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.det().unwrap(), int(1));
        let inv = a.inverse().unwrap();
        assert_eq!(inv, m(&[&[1, -1], &[-1, 2]]));
        assert_eq!(a.mul(&inv).unwrap(), Mat::identity(2));
        let s = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(s.det().unwrap(), int(0));
        assert!(matches!(s.inverse(), Err(Error::SingularTransform)));
    }

    #[test]
    fn det_needs_row_swap() {
        let a = m(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 3]]);
        assert_eq!(a.det().unwrap(), int(-3));
    }

    #[test]
    fn affine_solution_and_kernel() {
        let a = m(&[&[1, 1, 0], &[0, 0, 1]]);
        let s = solve_affine(&a, &[int(2), int(3)]).unwrap();
        assert_eq!(a.mul_vec(&s.particular), vec![int(2), int(3)]);
        assert_eq!(s.null.len(), 1);
        assert_eq!(a.mul_vec(&s.null[0]), vec![int(0), int(0)]);
        let bad = m(&[&[1, 1], &[2, 2]]);
        assert!(solve_affine(&bad, &[int(1), int(3)]).is_none());
        assert_eq!(bad.rank(), 1);
    }

    #[test]
    fn float_solve() {
        let a = Mat::from_rows(vec![vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let s = solve_affine(&a, &[1.0, 2.0]).unwrap();
        assert!((s.particular[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!(s.null.is_empty());
        let _ = rat(1, 2);
    }
}
