use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Rat, Scalar};
use crate::symkernel::mat::Mat;

/// Dense symmetric matrix. Symmetry is checked on construction.
#[derive(Clone, PartialEq)]
pub struct SymMat<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMat<T> {
    pub fn zeros(n: usize) -> Self {
        SymMat {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![T::one(); n])
    }

    pub fn diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = v.clone();
        }
        m
    }

    /// `E_ij` with zero-based indices: a one at (i,j) and (j,i).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m.set(i, j, T::one());
        m
    }

    /// Builds from the upper triangle of `f`.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::from_rows_named(rows, "matrix")
    }

    /// Like [`from_rows`](Self::from_rows) but asymmetry errors name `context`.
    pub fn from_rows_named(rows: Vec<Vec<T>>, context: &str) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument(format!("{context}: order must be at least 1")));
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        for i in 0..n {
            for j in i + 1..n {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::Asymmetric {
                        context: context.to_string(),
                        row: i,
                        col: j,
                    });
                }
            }
        }
        Ok(SymMat { n, data })
    }

    /// Symmetric part `(M + Mᵀ)/2` of a square matrix.
    pub fn symmetrize(m: &Mat<T>) -> Self {
        assert!(m.is_square());
        let two = T::from_i64(2);
        Self::from_upper(m.rows(), |i, j| {
            if i == j {
                m[(i, i)].clone()
            } else {
                (m[(i, j)].clone() + m[(j, i)].clone()) / two.clone()
            }
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    /// Sets both (i,j) and (j,i).
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[j * self.n + i] = v.clone();
        self.data[i * self.n + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n).map(<[T]>::to_vec).collect()
    }

    pub fn to_mat(&self) -> Mat<T> {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j).clone())
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SymMat<U> {
        SymMat {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> SymMat<f64> {
        self.map(|x| x.as_f64())
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Trace inner product `A • B`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_order(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .filter(|(a, b)| !a.is_zero() && !b.is_zero())
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() + b.clone()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() - b.clone()))
    }

    /// `self + t·other`
    pub fn add_scaled(&self, t: &T, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        if t.is_zero() {
            return Ok(self.clone());
        }
        Ok(self.zip_with(other, |a, b| {
            if b.is_zero() {
                a.clone()
            } else {
                a.clone() + t.clone() * b.clone()
            }
        }))
    }

    pub fn scale(&self, t: &T) -> Self {
        self.map(|a| a.clone() * t.clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a.clone())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        SymMat {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j).clone());
            }
        }
        SymMat { n: k, data }
    }

    /// Rectangular block rows × cols.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Mat<T> {
        Mat::from_fn(rows.len(), cols.len(), |a, b| self.get(rows[a], cols[b]).clone())
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.n + other.n;
        Self::from_upper(n, |i, j| {
            if j < self.n {
                self.get(i, j).clone()
            } else if i >= self.n {
                other.get(i - self.n, j - self.n).clone()
            } else {
                T::zero()
            }
        })
    }

    /// `TᵀMT` for invertible `T`.
    pub fn congruence(&self, t: &Mat<T>) -> Result<Self> {
        if t.rows() != self.n || !t.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: t.rows(),
            });
        }
        if T::EXACT {
            if t.det()?.is_zero() {
                return Err(Error::SingularTransform);
            }
        } else if t.rank() < self.n {
            return Err(Error::SingularTransform);
        }
        Ok(self.congruence_unchecked(t))
    }

    /// `TᵀMT` for any `T` with `n` rows (may be rectangular).
    pub fn congruence_unchecked(&self, t: &Mat<T>) -> Self {
        let mt = self.to_mat().mul(t).expect("orders checked");
        let k = t.cols();
        Self::from_upper(k, |i, j| {
            (0..self.n).fold(T::zero(), |acc, r| {
                let a = &t[(r, i)];
                if a.is_zero() {
                    acc
                } else {
                    acc + a.clone() * mt[(r, j)].clone()
                }
            })
        })
    }

    /// `G₁₁ − G₁₂G₂₂⁻¹G₁₂ᵀ` where `G₂₂` is the trailing block of order `k`.
    pub fn schur_complement(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n {
            return Err(Error::InvalidArgument(format!(
                "trailing block order {k} out of range for order {}",
                self.n
            )));
        }
        let lead: Vec<usize> = (0..self.n - k).collect();
        let trail: Vec<usize> = (self.n - k..self.n).collect();
        let g22 = self.submatrix(&trail);
        let st = crate::symkernel::psd_status(&g22, &Default::default());
        if st != crate::symkernel::PsdStatus::PositiveDefinite {
            return Err(Error::NotPositiveDefinite(format!("trailing block is {st:?}")));
        }
        let inv = g22.to_mat().inverse()?;
        let g12 = self.block(&lead, &trail);
        let prod = g12.mul(&inv)?.mul(&g12.transpose())?;
        let g11 = self.submatrix(&lead);
        Ok(Self::from_upper(lead.len(), |i, j| {
            g11.get(i, j).clone() - prod[(i, j)].clone()
        }))
    }
}

impl SymMat<f64> {
    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    /// Symmetric part of a nalgebra matrix.
    pub fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Self {
        Self::from_upper(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl SymMat<Rat> {
    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }
}

impl<T: fmt::Display> fmt::Debug for SymMat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMat{}[", self.n)?;
        for (i, row) in self.data.chunks(self.n).enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = row.iter().map(ToString::to_string).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}
