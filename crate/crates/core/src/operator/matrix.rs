use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix dimensions must be positive".into()));
        }
        if rows * cols != data.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from separate real and imaginary parts (row-major).
    /// An empty `im` means a purely real matrix.
    pub fn from_parts(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if !im.is_empty() && im.len() != re.len() {
            return Err(Error::Dimension(format!(
                "real part has {} entries but imaginary part has {}",
                re.len(),
                im.len()
            )));
        }
        let data = re
            .iter()
            .enumerate()
            .map(|(i, &r)| C64::new(r, im.get(i).copied().unwrap_or(0.0)))
            .collect();
        Self::from_vec(rows, cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// `|v⟩⟨v|`
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `tr(A·B)` in O(n²) without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<C64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(Error::Dimension(format!(
                "tr(AB) of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = ZERO;
        for i in 0..self.rows {
            let row = self.row(i);
            for (k, &a) in row.iter().enumerate() {
                if a != ZERO {
                    acc += a * other[(k, i)];
                }
            }
        }
        Ok(acc)
    }

    /// Matrix product. Zero entries of the left operand are skipped, so
    /// block-sparse left factors (eigenvector matrices of block-diagonal
    /// operators) cost proportionally less.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// Kronecker product: `(A⊗B)[i·p+j, k·q+l] = A[i,k]·B[j,l]` for `B` of shape p×q.
    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = (other.rows, other.cols);
        let mut out = Self::zeros(self.rows * p, self.cols * q);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..p {
                    for l in 0..q {
                        out[(i * p + j, k * q + l)] = a * other[(j, l)];
                    }
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Largest entry-wise deviation from the conjugate transpose.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(A + A†)/2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Zero-pads a square matrix to `dim × dim`, keeping it in the leading block.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if !self.is_square() || dim < self.rows {
            return Err(Error::Dimension(format!(
                "cannot embed {}x{} into {dim}x{dim}",
                self.rows, self.cols
            )));
        }
        let mut out = Self::zeros(dim, dim);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
        }
        Ok(out)
    }

    /// Extracts the principal submatrix on `idx`.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |a, b| self[(idx[a], idx[b])])
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

// The arithmetic operators panic on shape mismatch, like the std slice ops.
impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_shape(rhs).expect("matrix addition");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_shape(rhs).expect("matrix subtraction");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for x in self.row(i) {
                write!(f, "{:+.4}{:+.4}i ", x.re, x.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Pauli and ladder helpers used throughout tests and the JC model.
pub mod ops {
    use super::*;

    pub fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_parts(2, 2, &[0.0, 1.0, 1.0, 0.0], &[]).unwrap()
    }

    pub fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::from_parts(2, 2, &[0.0; 4], &[0.0, -1.0, 1.0, 0.0]).unwrap()
    }

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&[1.0, -1.0])
    }

    /// `σ₊ = |1⟩⟨0|`
    pub fn sigma_plus() -> ComplexMatrix {
        ComplexMatrix::from_parts(2, 2, &[0.0, 0.0, 1.0, 0.0], &[]).unwrap()
    }

    /// `σ₋ = |0⟩⟨1|`
    pub fn sigma_minus() -> ComplexMatrix {
        ComplexMatrix::from_parts(2, 2, &[0.0, 1.0, 0.0, 0.0], &[]).unwrap()
    }

    /// Truncated bosonic annihilation operator, `b|m⟩ = √m |m−1⟩`.
    pub fn annihilation(dim: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for k in 1..dim {
            m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
        }
        m
    }

    pub fn creation(dim: usize) -> ComplexMatrix {
        annihilation(dim).adjoint()
    }

    pub fn number(dim: usize) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&(0..dim).map(|k| k as f64).collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use super::ops::*;
    use super::*;

    #[test]
    fn kron_of_identities_is_identity() {
        assert_eq!(ComplexMatrix::identity(2).kron(&ComplexMatrix::identity(2)), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_of_projectors() {
        let a = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let b = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        assert_eq!(a.kron(&b), ComplexMatrix::from_real_diag(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_matches_index_formula() {
        let a = sigma_plus();
        let b = annihilation(3);
        let k = a.kron(&b);
        assert_eq!((k.rows(), k.cols()), (6, 6));
        for i in 0..2 {
            for kk in 0..2 {
                for j in 0..3 {
                    for l in 0..3 {
                        assert_eq!(k[(i * 3 + j, kk * 3 + l)], a[(i, kk)] * b[(j, l)]);
                    }
                }
            }
        }
    }

    #[test]
    fn from_vec_rejects_bad_length() {
        assert!(matches!(ComplexMatrix::from_vec(2, 2, vec![ONE; 3]), Err(Error::Dimension(_))));
    }

    #[test]
    fn trace_product_matches_full_product() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| C64::new(i as f64 + 1.0, j as f64 - 0.5));
        let b = ComplexMatrix::from_fn(3, 3, |i, j| C64::new((i * j) as f64, 1.0));
        let full = (&a * &b).trace();
        assert!((a.trace_product(&b).unwrap() - full).norm() < 1e-12);
    }

    #[test]
    fn ladder_operators_commute_to_identity_below_cutoff() {
        let d = 6;
        let b = annihilation(d);
        let bd = creation(d);
        let comm = &(&b * &bd) - &(&bd * &b);
        for i in 0..d - 1 {
            assert!((comm[(i, i)] - ONE).norm() < 1e-12);
        }
        assert!((&(&bd * &b) - &number(d)).frobenius_norm() < 1e-14);
    }
}
