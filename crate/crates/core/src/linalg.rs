//! Dense matrices over exact (or floating) scalars with Gauss-Jordan elimination.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Result, UvalError};

pub trait LinearScalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn try_div(&self, rhs: &Self) -> Option<Self>;

    /// Whether this entry can serve as an elimination pivot.
    fn is_pivot(&self) -> bool {
        !self.is_zero()
    }

    /// Larger is preferred among admissible pivots.
    fn pivot_weight(&self) -> f64 {
        1.0
    }
}

impl LinearScalar for BigRational {
    fn try_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            None
        } else {
            Some(self / rhs)
        }
    }
}

impl LinearScalar for f64 {
    fn try_div(&self, rhs: &Self) -> Option<Self> {
        if *rhs == 0.0 {
            None
        } else {
            Some(self / rhs)
        }
    }

    fn pivot_weight(&self) -> f64 {
        self.abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: LinearScalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(UvalError::Shape("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
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

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<U: LinearScalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(UvalError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = T::zero();
            for l in 0..self.cols {
                acc = acc + self[(i, l)].clone() * rhs[(l, j)].clone();
            }
            acc
        }))
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(UvalError::Shape(format!("{} columns vs vector of {}", self.cols, v.len())));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    acc = acc + a.clone() * b.clone();
                }
                acc
            })
            .collect())
    }

    fn pick_pivot(&self, col: usize, from: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for r in from..self.rows {
            let x = &self[(r, col)];
            if x.is_pivot() {
                let w = x.pivot_weight();
                if best.is_none_or(|(_, bw)| w > bw) {
                    best = Some((r, w));
                }
            }
        }
        best.map(|(r, _)| r)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// Reduced row echelon form; returns the pivot columns and the number of row swaps.
    fn eliminate(&mut self, limit_cols: usize) -> Result<(Vec<usize>, usize)> {
        let mut pivots = Vec::new();
        let mut swaps = 0;
        let mut r = 0;
        for c in 0..limit_cols {
            if r >= self.rows {
                break;
            }
            let Some(p) = self.pick_pivot(c, r) else {
                if (r..self.rows).any(|i| !self[(i, c)].is_zero()) {
                    return Err(UvalError::NonMonomialDivisor);
                }
                continue;
            };
            if p != r {
                self.swap_rows(p, r);
                swaps += 1;
            }
            let pivot = self[(r, c)].clone();
            for j in 0..self.cols {
                let v = self[(r, j)].try_div(&pivot).ok_or(UvalError::NonMonomialDivisor)?;
                self[(r, j)] = v;
            }
            for i in 0..self.rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let factor = self[(i, c)].clone();
                for j in 0..self.cols {
                    let v = self[(i, j)].clone() - factor.clone() * self[(r, j)].clone();
                    self[(i, j)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        Ok((pivots, swaps))
    }

    pub fn rank(&self) -> Result<usize> {
        let mut m = self.clone();
        let cols = m.cols;
        Ok(m.eliminate(cols)?.0.len())
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(UvalError::Shape("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = Self::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                T::one()
            } else {
                T::zero()
            }
        });
        let (pivots, _) = aug.eliminate(n)?;
        if pivots.len() < n {
            return Err(UvalError::Singular);
        }
        Ok(Self::from_fn(n, n, |i, j| aug[(i, n + j)].clone()))
    }

    /// Solve `A X = B` for square nonsingular `A`.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(UvalError::Shape("solve needs square A and matching B".into()));
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut aug = Self::from_fn(n, n + m, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else {
                rhs[(i, j - n)].clone()
            }
        });
        let (pivots, _) = aug.eliminate(n)?;
        if pivots.len() < n {
            return Err(UvalError::Singular);
        }
        Ok(Self::from_fn(n, m, |i, j| aug[(i, n + j)].clone()))
    }

    /// Determinant by elimination without normalising pivot rows.
    pub fn determinant(&self) -> Result<T> {
        if !self.is_square() {
            return Err(UvalError::Shape("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = T::one();
        for c in 0..n {
            let Some(p) = m.pick_pivot(c, c) else {
                if (c..n).any(|i| !m[(i, c)].is_zero()) {
                    return Err(UvalError::NonMonomialDivisor);
                }
                return Ok(T::zero());
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let pivot = m[(c, c)].clone();
            det = det * pivot.clone();
            for i in c + 1..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let factor = m[(i, c)].try_div(&pivot).ok_or(UvalError::NonMonomialDivisor)?;
                for j in c..n {
                    let v = m[(i, j)].clone() - factor.clone() * m[(c, j)].clone();
                    m[(i, j)] = v;
                }
            }
        }
        Ok(det)
    }

    /// Determinants of the leading `1x1, 2x2, …` submatrices.
    pub fn leading_minors(&self) -> Result<Vec<T>> {
        (1..=self.rows.min(self.cols))
            .map(|s| Self::from_fn(s, s, |i, j| self[(i, j)].clone()).determinant())
            .collect()
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.clone() * c.clone())
    }
}

impl<T: LinearScalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }
}

impl<T: LinearScalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }
}

impl<T: LinearScalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: Self) -> Matrix<T> {
        self.matmul(rhs).expect("compatible shapes")
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Rational, Scalar};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn rational_inverse() {
        let m = Matrix::from_rows(vec![vec![q(3, 1), q(1, 1)], vec![q(1, 1), q(3, 1)]]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(inv, Matrix::from_rows(vec![vec![q(3, 8), q(-1, 8)], vec![q(-1, 8), q(3, 8)]]).unwrap());
        assert_eq!(&m * &inv, Matrix::identity(2));
    }

    #[test]
    fn singular_detected() {
        let m = Matrix::from_rows(vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]]).unwrap();
        assert_eq!(m.inverse(), Err(UvalError::Singular));
        assert_eq!(m.rank().unwrap(), 1);
        assert!(m.determinant().unwrap().is_zero());
    }

    #[test]
    fn laurent_entries_with_common_pi_power() {
        let p = |n: i64, d: i64| Scalar::monomial(q(n, d), 1);
        let m = Matrix::from_rows(vec![vec![p(3, 1), p(1, 1)], vec![p(1, 1), p(3, 1)]]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(inv[(0, 0)], Scalar::monomial(q(3, 8), -1));
        assert_eq!(m.determinant().unwrap(), Scalar::monomial(q(8, 1), 2));
    }

    #[test]
    fn determinant_tracks_swaps() {
        let m = Matrix::from_rows(vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]]).unwrap();
        assert_eq!(m.determinant().unwrap(), q(-1, 1));
    }
}
