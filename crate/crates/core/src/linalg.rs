//! Small dense linear algebra over [`BigScalar`].

use std::ops::{Index, IndexMut};

use rug::Float;

use crate::error::{Result, VtdError};
use crate::precision::{BigScalar, Precision};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BigScalar>,
}

impl Matrix {
    pub fn zeros(prec: Precision, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![prec.zero(); rows * cols],
        }
    }

    pub fn identity(prec: Precision, n: usize) -> Self {
        let mut m = Self::zeros(prec, n, n);
        for i in 0..n {
            m[(i, i)] = prec.one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigScalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigScalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [BigScalar] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, prec: Precision, x: &[BigScalar]) -> Vec<BigScalar> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| crate::precision::dot(prec, self.row(i), x))
            .collect()
    }

    pub fn mul(&self, prec: Precision, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(prec, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = &self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a.clone() * &other[(l, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self, prec: Precision) -> BigScalar {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .fold(prec.zero(), |acc, v| acc + v.clone().abs())
            })
            .fold(prec.zero(), |acc, v| if v > acc { v } else { acc })
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = BigScalar;
    fn index(&self, (i, j): (usize, usize)) -> &BigScalar {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigScalar {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    prec: Precision,
    lu: Matrix,
    perm: Vec<usize>,
    norm_inf: BigScalar,
}

impl LuFactorization {
    /// Factorizes a square matrix. A pivot smaller than `2^(-bits/2) ||A||_inf`
    /// is reported as [`VtdError::SingularMatrix`].
    pub fn new(prec: Precision, a: &Matrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(VtdError::LengthMismatch {
                expected: a.rows,
                actual: a.cols,
            });
        }
        let n = a.rows;
        let norm_inf = a.norm_inf(prec);
        let threshold = prec.pow2(-(prec.bits() as i32) / 2) * &norm_inf;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut best = col;
            let mut best_abs = lu[(col, col)].clone().abs();
            for row in col + 1..n {
                let v = lu[(row, col)].clone().abs();
                if v > best_abs {
                    best = row;
                    best_abs = v;
                }
            }
            if best_abs <= threshold || best_abs.is_zero() {
                return Err(VtdError::SingularMatrix {
                    column: col,
                    pivot: best_abs.to_f64(),
                    threshold: threshold.to_f64(),
                });
            }
            if best != col {
                for j in 0..n {
                    lu.data.swap(col * n + j, best * n + j);
                }
                perm.swap(col, best);
            }
            let pivot = lu[(col, col)].clone();
            for row in col + 1..n {
                if lu[(row, col)].is_zero() {
                    continue;
                }
                let factor = Float::with_val(prec.bits(), &lu[(row, col)] / &pivot);
                for j in col + 1..n {
                    let delta = factor.clone() * &lu[(col, j)];
                    lu[(row, j)] -= delta;
                }
                lu[(row, col)] = factor;
            }
        }
        Ok(Self {
            prec,
            lu,
            perm,
            norm_inf,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn solve(&self, b: &[BigScalar]) -> Result<Vec<BigScalar>> {
        let n = self.dim();
        if b.len() != n {
            return Err(VtdError::LengthMismatch {
                expected: n,
                actual: b.len(),
            });
        }
        let mut x: Vec<BigScalar> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let delta = self.lu[(i, j)].clone() * &x[j];
                x[i] -= delta;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let delta = self.lu[(i, j)].clone() * &x[j];
                x[i] -= delta;
            }
            x[i] /= &self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        let mut inv = Matrix::zeros(self.prec, n, n);
        let mut e = vec![self.prec.zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = self.prec.zero());
            e[j] = self.prec.one();
            let col = self.solve(&e).expect("dimension checked");
            for i in 0..n {
                inv[(i, j)] = col[i].clone();
            }
        }
        inv
    }

    /// `||A||_inf ||A^{-1}||_inf`, computed from the explicit inverse.
    pub fn condition_inf(&self) -> BigScalar {
        self.inverse().norm_inf(self.prec) * &self.norm_inf
    }
}

/// A square system `A x = b`.
#[derive(Clone, Debug)]
pub struct DenseSystem {
    pub matrix: Matrix,
    pub rhs: Vec<BigScalar>,
}

/// Solution of a [`DenseSystem`] together with its infinity-norm condition number.
#[derive(Clone, Debug)]
pub struct DenseSolution {
    pub x: Vec<BigScalar>,
    pub condition: BigScalar,
}

pub fn dense_solve(prec: Precision, sys: &DenseSystem) -> Result<DenseSolution> {
    let lu = LuFactorization::new(prec, &sys.matrix)?;
    let x = lu.solve(&sys.rhs)?;
    Ok(DenseSolution {
        x,
        condition: lu.condition_inf(),
    })
}
