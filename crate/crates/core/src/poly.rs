//! Polynomials on the reference interval `(-1, 1]` in the Legendre basis.

use crate::precision::{BigScalar, Precision};

/// `L_degree(t)` by the three-term recurrence.
pub fn legendre_eval(prec: Precision, degree: usize, t: &BigScalar) -> BigScalar {
    legendre_values(prec, degree, t).pop().expect("nonempty")
}

/// `L_0(t), ..., L_max_degree(t)`.
pub fn legendre_values(prec: Precision, max_degree: usize, t: &BigScalar) -> Vec<BigScalar> {
    let mut out = Vec::with_capacity(max_degree + 1);
    out.push(prec.one());
    if max_degree == 0 {
        return out;
    }
    out.push(prec.convert(t));
    for n in 1..max_degree {
        // (n+1) L_{n+1} = (2n+1) t L_n - n L_{n-1}
        let a = out[n].clone() * t * (2 * n + 1) as u32;
        let b = out[n - 1].clone() * n as u32;
        out.push((a - b) / (n + 1) as u32);
    }
    out
}

/// Table `table[m][n] = L_n^{(m)}(t)` for `m <= max_deriv`, `n <= max_degree`,
/// from `L_{n+1}^{(m)} = L_{n-1}^{(m)} + (2n+1) L_n^{(m-1)}`.
pub fn legendre_derivative_table(
    prec: Precision,
    max_degree: usize,
    max_deriv: usize,
    t: &BigScalar,
) -> Vec<Vec<BigScalar>> {
    let mut table = vec![legendre_values(prec, max_degree, t)];
    for m in 1..=max_deriv {
        let prev = &table[m - 1];
        let mut row = vec![prec.zero(); max_degree + 1];
        for n in 0..max_degree {
            let mut v = prev[n].clone() * (2 * n + 1) as u32;
            if n >= 1 {
                v += &row[n - 1];
            }
            row[n + 1] = v;
        }
        table.push(row);
    }
    table
}

/// `L_n^{(m)}(+1) = (n+m)! / (2^m m! (n-m)!)`, and `L_n^{(m)}(-1) = (-1)^{n+m} L_n^{(m)}(+1)`.
pub fn legendre_endpoint_derivative(prec: Precision, n: usize, m: usize, right: bool) -> BigScalar {
    if m > n {
        return prec.zero();
    }
    let num = prec.factorial((n + m) as u32);
    let den = prec.factorial(m as u32) * prec.factorial((n - m) as u32);
    let mut v = num / den;
    v >>= m as u32;
    if !right && (n + m) % 2 == 1 {
        v = -v;
    }
    v
}

/// Legendre coefficients of the derivative of a scalar Legendre series.
pub fn legendre_diff(prec: Precision, coeffs: &[BigScalar]) -> Vec<BigScalar> {
    let n = coeffs.len();
    if n <= 1 {
        return vec![prec.zero()];
    }
    // b_k = (2k+1) S_k with S_k = c_{k+1} + c_{k+3} + ...
    let mut s = vec![prec.zero(); n + 1];
    for k in (0..n - 1).rev() {
        s[k] = coeffs[k + 1].clone() + &s[k + 2];
    }
    (0..n - 1).map(|k| s[k].clone() * (2 * k + 1) as u32).collect()
}

/// Legendre coefficients of the antiderivative vanishing at `-1`.
pub fn legendre_antideriv(prec: Precision, coeffs: &[BigScalar]) -> Vec<BigScalar> {
    let n = coeffs.len();
    let mut out = vec![prec.zero(); n + 1];
    for (k, c) in coeffs.iter().enumerate() {
        if k == 0 {
            out[1] += c;
        } else {
            // int L_k = (L_{k+1} - L_{k-1}) / (2k+1)
            let q = c.clone() / (2 * k + 1) as u32;
            out[k + 1] += &q;
            out[k - 1] -= &q;
        }
    }
    let mut at_minus_one = prec.zero();
    for (k, c) in out.iter().enumerate() {
        if k % 2 == 0 {
            at_minus_one += c;
        } else {
            at_minus_one -= c;
        }
    }
    out[0] -= at_minus_one;
    out
}

/// Vector-valued polynomial on the reference interval, stored as Legendre
/// coefficients: `coeffs[j][c]` multiplies `L_j` in component `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct RefPolynomial {
    coeffs: Vec<Vec<BigScalar>>,
    dim: usize,
}

impl RefPolynomial {
    pub fn zero(prec: Precision, degree: usize, dim: usize) -> Self {
        Self {
            coeffs: vec![vec![prec.zero(); dim]; degree + 1],
            dim,
        }
    }

    /// Builds a polynomial from `coeffs[j][c]`; all rows must have the same length.
    pub fn from_coeffs(coeffs: Vec<Vec<BigScalar>>) -> Self {
        assert!(!coeffs.is_empty(), "a polynomial needs at least one coefficient");
        let dim = coeffs[0].len();
        assert!(coeffs.iter().all(|c| c.len() == dim));
        Self { coeffs, dim }
    }

    /// Scalar polynomial from Legendre coefficients.
    pub fn scalar(coeffs: Vec<BigScalar>) -> Self {
        Self::from_coeffs(coeffs.into_iter().map(|c| vec![c]).collect())
    }

    /// Rebuilds a polynomial from a flat vector ordered `j * dim + c`.
    pub fn from_flat(flat: &[BigScalar], dim: usize) -> Self {
        assert!(dim > 0 && flat.len().is_multiple_of(dim) && !flat.is_empty());
        Self::from_coeffs(flat.chunks(dim).map(|c| c.to_vec()).collect())
    }

    pub fn to_flat(&self) -> Vec<BigScalar> {
        self.coeffs.iter().flatten().cloned().collect()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[Vec<BigScalar>] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize, c: usize) -> &BigScalar {
        &self.coeffs[j][c]
    }

    /// Legendre coefficients of one component.
    pub fn component(&self, c: usize) -> Vec<BigScalar> {
        self.coeffs.iter().map(|row| row[c].clone()).collect()
    }

    pub fn eval(&self, prec: Precision, t: &BigScalar) -> Vec<BigScalar> {
        let basis = legendre_values(prec, self.degree(), t);
        self.eval_with_basis(prec, &basis)
    }

    /// Evaluates with precomputed basis values `basis[j]`.
    pub fn eval_with_basis(&self, prec: Precision, basis: &[BigScalar]) -> Vec<BigScalar> {
        let mut out = vec![prec.zero(); self.dim];
        for (row, b) in self.coeffs.iter().zip(basis) {
            for (o, c) in out.iter_mut().zip(row) {
                *o += c.clone() * b;
            }
        }
        out
    }

    /// `order`-th derivative with respect to the reference variable.
    pub fn eval_derivative(&self, prec: Precision, t: &BigScalar, order: usize) -> Vec<BigScalar> {
        if order == 0 {
            return self.eval(prec, t);
        }
        let table = legendre_derivative_table(prec, self.degree(), order, t);
        self.eval_with_basis(prec, &table[order])
    }

    pub fn derivative(&self, prec: Precision) -> Self {
        let comps: Vec<Vec<BigScalar>> = (0..self.dim)
            .map(|c| legendre_diff(prec, &self.component(c)))
            .collect();
        Self::transpose_components(comps)
    }

    /// Antiderivative vanishing at `-1`.
    pub fn antiderivative(&self, prec: Precision) -> Self {
        let comps: Vec<Vec<BigScalar>> = (0..self.dim)
            .map(|c| legendre_antideriv(prec, &self.component(c)))
            .collect();
        Self::transpose_components(comps)
    }

    fn transpose_components(comps: Vec<Vec<BigScalar>>) -> Self {
        let len = comps[0].len();
        let coeffs = (0..len)
            .map(|j| comps.iter().map(|c| c[j].clone()).collect())
            .collect();
        Self::from_coeffs(coeffs)
    }

    /// Exact integral over `[-1, 1]`.
    pub fn integral(&self) -> Vec<BigScalar> {
        self.coeffs[0].iter().map(|c| c.clone() * 2u32).collect()
    }

    /// `alpha * self + other`, padding the shorter coefficient list with zeros.
    pub fn axpy(&self, prec: Precision, alpha: &BigScalar, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|j| {
                (0..self.dim)
                    .map(|c| {
                        let mut v = prec.zero();
                        if let Some(row) = self.coeffs.get(j) {
                            v += row[c].clone() * alpha;
                        }
                        if let Some(row) = other.coeffs.get(j) {
                            v += &row[c];
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn sub(&self, prec: Precision, other: &Self) -> Self {
        other.axpy(prec, &prec.int(-1), self)
    }

    /// Largest coefficient magnitude over all components.
    pub fn max_abs_coeff(&self, prec: Precision) -> BigScalar {
        let flat = self.to_flat();
        crate::precision::norm_inf(prec, &flat)
    }
}
