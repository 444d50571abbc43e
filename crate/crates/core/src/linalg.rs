//! Dense exact linear algebra.
//!
//! Elimination always picks the first nonzero entry of the leftmost remaining
//! column as pivot, so every derived basis is reproducible byte for byte.

use std::ops::{Add, Mul, Neg, Sub};

use serde_json::Value;
use thiserror::Error;

use crate::scalar::{Field, Scalar, ScalarError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("entries belong to different fields")]
    FieldMismatch,
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is singular (rank {0})")]
    Singular(usize),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("cannot parse matrix: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<Scalar>,
}

/// Result of [`Matrix::inverse_or_rank`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InverseOrRank {
    Inverse(Matrix),
    Rank(usize),
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, field, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = field.one();
        }
        m
    }

    /// The matrix unit e_ij of size rows x cols.
    pub fn unit(field: Field, rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(field, rows, cols);
        m.data[i * cols + j] = field.one();
        m
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        let data: Vec<Scalar> = rows.into_iter().flatten().collect();
        if data.iter().any(|x| !field.contains(x)) {
            return Err(LinalgError::FieldMismatch);
        }
        Ok(Matrix { rows: r, cols: c, field, data })
    }

    pub fn from_flat(field: Field, rows: usize, cols: usize, data: Vec<Scalar>) -> Self {
        assert_eq!(data.len(), rows * cols, "flat data length");
        Matrix { rows, cols, field, data }
    }

    /// Integer entries, mostly for tests and fixed constructions.
    pub fn from_i64(field: Field, rows: &[&[i64]]) -> Self {
        let v = rows.iter().map(|r| r.iter().map(|&x| field.from_i64(x)).collect()).collect();
        Self::from_rows(field, v).expect("integer rows are rectangular")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Scalar) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn data(&self) -> &[Scalar] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Scalar> {
        self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|x| !x.is_zero()).count()
    }

    fn same_shape(&self, other: &Matrix) -> Result<(), LinalgError> {
        if self.field != other.field {
            return Err(LinalgError::FieldMismatch);
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, field: self.field, data })
    }

    pub fn try_sub(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, field: self.field, data })
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        let data = self.data.iter().map(|a| a * c).collect();
        Matrix { rows: self.rows, cols: self.cols, field: self.field, data }
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: &Scalar, other: &Matrix) {
        assert!(self.rows == other.rows && self.cols == other.cols, "axpy shape");
        if c.is_zero() {
            return;
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                a.add_mul_assign(c, b);
            }
        }
    }

    /// Matrix product, skipping zero entries of both factors.
    pub fn try_mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.field != other.field {
            return Err(LinalgError::FieldMismatch);
        }
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(&other.data[k * n..(k + 1) * n]) {
                    if !b.is_zero() {
                        o.add_mul_assign(a, b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Result<Vec<Scalar>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let mut out = vec![self.field.zero(); self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            for (a, b) in self.row(i).iter().zip(v) {
                if !a.is_zero() && !b.is_zero() {
                    o.add_mul_assign(a, b);
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Matrix { rows: self.cols, cols: self.rows, field: self.field, data }
    }

    /// Kronecker product; block (i, j) of the result is `self[i][j] * other`.
    pub fn kronecker(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.field != other.field {
            return Err(LinalgError::FieldMismatch);
        }
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = Matrix::zeros(self.field, r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if !b.is_zero() {
                            out.set(i * other.rows + k, j * other.cols + l, a * b);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in r0..r0 + rows {
            data.extend_from_slice(&self.data[i * self.cols + c0..i * self.cols + c0 + cols]);
        }
        Matrix { rows, cols, field: self.field, data }
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block.get(i, j).clone());
            }
        }
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self.get(r, c).inv().expect("pivot is nonzero");
            for j in c..self.cols {
                let x = &self.data[r * self.cols + j] * &inv;
                self.data[r * self.cols + j] = x;
            }
            let pivot_row: Vec<Scalar> = self.row(r)[c..].to_vec();
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                let neg = -&f;
                for (j, pv) in (c..self.cols).zip(&pivot_row) {
                    if !pv.is_zero() {
                        self.data[i * self.cols + j].add_mul_assign(&neg, pv);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space `{x : self * x = 0}`, as rows in reduced
    /// echelon form (each vector has leading coordinate 1).
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        let mut vectors = Vec::new();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        for f in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![self.field.zero(); self.cols];
            v[f] = self.field.one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r.get(row, f);
            }
            vectors.push(v);
        }
        if vectors.is_empty() {
            return vectors;
        }
        let k = vectors.len();
        let (red, _) = Matrix::from_flat(self.field, k, self.cols, vectors.concat()).rref();
        (0..k).map(|i| red.row(i).to_vec()).collect()
    }

    /// Some solution of `self * x = b`, or `None` when the system is inconsistent.
    /// Free variables are set to zero.
    pub fn solve(&self, b: &[Scalar]) -> Result<Option<Vec<Scalar>>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let mut aug = Matrix::zeros(self.field, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let pivots = aug.rref_in_place();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = aug.get(row, self.cols).clone();
        }
        Ok(Some(x))
    }

    /// Solve `self * X = B` column by column; `None` if any column is inconsistent.
    pub fn solve_matrix(&self, b: &Matrix) -> Result<Option<Matrix>, LinalgError> {
        if b.rows != self.rows {
            return Err(LinalgError::DimensionMismatch("right-hand side rows".into()));
        }
        let mut aug = Matrix::zeros(self.field, self.rows, self.cols + b.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            for j in 0..b.cols {
                aug.set(i, self.cols + j, b.get(i, j).clone());
            }
        }
        let pivots = aug.rref_in_place();
        if pivots.iter().any(|&p| p >= self.cols) {
            return Ok(None);
        }
        let mut x = Matrix::zeros(self.field, self.cols, b.cols);
        for (row, &p) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(p, j, aug.get(row, self.cols + j).clone());
            }
        }
        Ok(Some(x))
    }

    pub fn inverse_or_rank(&self) -> Result<InverseOrRank, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare);
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(self.field, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, self.field.one());
        }
        let pivots = aug.rref_in_place();
        let rank = pivots.iter().take_while(|&&p| p < n).count();
        if rank < n {
            return Ok(InverseOrRank::Rank(rank));
        }
        Ok(InverseOrRank::Inverse(aug.submatrix(0, n, n, n)))
    }

    pub fn inverse(&self) -> Result<Matrix, LinalgError> {
        match self.inverse_or_rank()? {
            InverseOrRank::Inverse(m) => Ok(m),
            InverseOrRank::Rank(r) => Err(LinalgError::Singular(r)),
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Array((0..self.rows).map(|i| Value::Array(self.row(i).iter().map(Scalar::to_json).collect())).collect())
    }

    pub fn from_json(field: Field, v: &Value) -> Result<Matrix, LinalgError> {
        let rows = v.as_array().ok_or_else(|| LinalgError::Parse("expected array of rows".into()))?;
        let parsed = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| LinalgError::Parse("expected row array".into()))?
                    .iter()
                    .map(|x| field.parse_scalar(x).map_err(LinalgError::from))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Matrix::from_rows(field, parsed)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        self.try_mul(rhs).expect("matrix product")
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        self.try_add(rhs).expect("matrix sum")
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        self.try_sub(rhs).expect("matrix difference")
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, field: self.field, data: self.data.iter().map(|x| -x).collect() }
    }
}

/// Incrementally built echelon basis; answers membership and independence
/// queries without recomputing from scratch.
#[derive(Clone, Debug)]
pub struct Echelon {
    field: Field,
    dim: usize,
    rows: Vec<(usize, Vec<Scalar>)>,
}

impl Echelon {
    pub fn new(field: Field, dim: usize) -> Self {
        Echelon { field, dim, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient(&self) -> usize {
        self.dim
    }

    /// `v` minus its component along the current span.
    pub fn reduce(&self, v: &[Scalar]) -> Vec<Scalar> {
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let f = -&v[*p];
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    x.add_mul_assign(&f, r);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.reduce(v).iter().all(Scalar::is_zero)
    }

    /// Add `v`; returns false (and changes nothing) if it was already in the span.
    pub fn insert(&mut self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.dim, "echelon vector length");
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = r[p].inv().expect("nonzero pivot");
        for x in r.iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        self.rows.push((p, r));
        true
    }

    /// The spanned subspace in canonical form.
    pub fn to_subspace(&self) -> Subspace {
        Subspace::span(self.field, self.dim, self.rows.iter().map(|(_, r)| r.clone()))
    }
}

/// A subspace of K^n held as a reduced echelon basis, so equal subspaces have
/// equal bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    field: Field,
    ambient: usize,
    basis: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(field: Field, ambient: usize) -> Self {
        Subspace { field, ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(field: Field, ambient: usize) -> Self {
        Self::span(field, ambient, (0..ambient).map(|i| unit_vector(field, ambient, i)))
    }

    pub fn span(field: Field, ambient: usize, vectors: impl IntoIterator<Item = Vec<Scalar>>) -> Self {
        let data: Vec<Scalar> = vectors.into_iter().flatten().collect();
        assert_eq!(data.len() % ambient.max(1), 0, "vector length differs from ambient dimension");
        let k = data.len().checked_div(ambient).unwrap_or(0);
        let (red, pivots) = Matrix::from_flat(field, k, ambient, data).rref();
        let basis = (0..pivots.len()).map(|i| red.row(i).to_vec()).collect();
        Subspace { field, ambient, basis, pivots }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Scalar>] {
        &self.basis
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        let mut e = Echelon::new(self.field, self.ambient);
        for b in &self.basis {
            e.insert(b);
        }
        e.contains(v)
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        Subspace::span(self.field, self.ambient, self.basis.iter().chain(&other.basis).cloned())
    }

    /// Intersection via the kernel of `[B1; -B2]^T`.
    pub fn intersect(&self, other: &Subspace) -> Subspace {
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.field, self.ambient);
        }
        let (a, b) = (self.dim(), other.dim());
        let mut m = Matrix::zeros(self.field, self.ambient, a + b);
        for (k, v) in self.basis.iter().enumerate() {
            for i in 0..self.ambient {
                m.set(i, k, v[i].clone());
            }
        }
        for (k, v) in other.basis.iter().enumerate() {
            for i in 0..self.ambient {
                m.set(i, a + k, -&v[i]);
            }
        }
        let vectors = m.kernel_basis().into_iter().map(|c| {
            let mut w = vec![self.field.zero(); self.ambient];
            for (k, coef) in c[..a].iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                for (x, y) in w.iter_mut().zip(&self.basis[k]) {
                    x.add_mul_assign(coef, y);
                }
            }
            w
        });
        Subspace::span(self.field, self.ambient, vectors)
    }
}

pub fn unit_vector(field: Field, n: usize, i: usize) -> Vec<Scalar> {
    let mut v = vec![field.zero(); n];
    v[i] = field.one();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(p: u64) -> Field {
        Field::prime(p).unwrap()
    }

    fn ints(f: Field, xs: &[i64]) -> Vec<Scalar> {
        xs.iter().map(|&x| f.from_i64(x)).collect()
    }

    #[test]
    fn identity_solve() {
        let q = Field::Rationals;
        let x = Matrix::identity(q, 2).solve(&ints(q, &[1, 2])).unwrap().unwrap();
        assert_eq!(x, ints(q, &[1, 2]));
    }

    #[test]
    fn gf5_solve_matches_brute_force() {
        let f = gf(5);
        let a = Matrix::from_i64(f, &[&[1, 2], &[3, 4]]);
        let b = ints(f, &[0, 1]);
        let mut found = Vec::new();
        for x0 in 0..5 {
            for x1 in 0..5 {
                let x = ints(f, &[x0, x1]);
                if a.mul_vec(&x).unwrap() == b {
                    found.push(x);
                }
            }
        }
        assert_eq!(found, vec![ints(f, &[1, 2])]);
        assert_eq!(a.solve(&b).unwrap().unwrap(), found[0]);
    }

    #[test]
    fn rank_one_kernel() {
        let q = Field::Rationals;
        let a = Matrix::from_i64(q, &[&[1, 1], &[2, 2]]);
        assert_eq!(a.kernel_basis(), vec![ints(q, &[1, -1])]);
        assert_eq!(a.rank(), 1);
    }

    #[test]
    fn inconsistent_system() {
        let q = Field::Rationals;
        let a = Matrix::from_i64(q, &[&[1, 1], &[2, 2]]);
        assert_eq!(a.solve(&ints(q, &[1, 0])).unwrap(), None);
        assert!(matches!(a.solve(&ints(q, &[1])), Err(LinalgError::DimensionMismatch(_))));
    }

    #[test]
    fn inverse_or_rank_cases() {
        let q = Field::Rationals;
        assert_eq!(Matrix::identity(q, 3).inverse_or_rank().unwrap(), InverseOrRank::Inverse(Matrix::identity(q, 3)));
        assert_eq!(Matrix::from_i64(q, &[&[0, 1], &[0, 0]]).inverse_or_rank().unwrap(), InverseOrRank::Rank(1));
        assert_eq!(
            Matrix::from_i64(q, &[&[1, 1], &[0, 1]]).inverse().unwrap(),
            Matrix::from_i64(q, &[&[1, -1], &[0, 1]])
        );
        assert_eq!(Matrix::zeros(q, 2, 3).inverse_or_rank(), Err(LinalgError::NotSquare));
    }

    #[test]
    fn kronecker_examples() {
        let q = Field::Rationals;
        assert_eq!(Matrix::identity(q, 2).kronecker(&Matrix::identity(q, 2)).unwrap(), Matrix::identity(q, 4));
        let e11 = Matrix::unit(q, 2, 2, 0, 0);
        assert_eq!(e11.kronecker(&e11).unwrap(), Matrix::unit(q, 4, 4, 0, 0));
        let swap = Matrix::from_i64(q, &[&[0, 1], &[1, 0]]);
        let sign = Matrix::from_i64(q, &[&[1, 0], &[0, -1]]);
        let k = swap.kronecker(&sign).unwrap();
        // written out entry by entry
        let expected = Matrix::from_i64(q, &[&[0, 0, 1, 0], &[0, 0, 0, -1], &[1, 0, 0, 0], &[0, -1, 0, 0]]);
        assert_eq!(k, expected);
        assert_eq!(&k * &k, Matrix::identity(q, 4));
        assert_eq!(swap.kronecker(&Matrix::identity(gf(5), 1)), Err(LinalgError::FieldMismatch));
    }

    #[test]
    fn subspace_intersection() {
        let q = Field::Rationals;
        let a = Subspace::span(q, 3, vec![ints(q, &[1, 0, 0]), ints(q, &[0, 1, 0])]);
        let b = Subspace::span(q, 3, vec![ints(q, &[0, 1, 1]), ints(q, &[1, 1, 0])]);
        let i = a.intersect(&b);
        assert_eq!(i, Subspace::span(q, 3, vec![ints(q, &[1, 1, 0])]));
        assert_eq!(a.sum(&b).dim(), 3);
        assert_eq!(Subspace::full(q, 3), a.sum(&b));
    }

    #[test]
    fn echelon_membership() {
        let f = gf(7);
        let mut e = Echelon::new(f, 3);
        assert!(e.insert(&ints(f, &[0, 2, 1])));
        assert!(e.insert(&ints(f, &[1, 1, 1])));
        assert!(!e.insert(&ints(f, &[2, 6, 4])));
        assert!(e.contains(&ints(f, &[1, 3, 2])));
        assert!(!e.contains(&ints(f, &[0, 0, 1])));
    }

    fn small_matrix(f: Field, r: usize, c: usize) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(-3i64..=3, r * c).prop_map(move |v| {
            Matrix::from_flat(f, r, c, v.into_iter().map(|x| f.from_i64(x)).collect())
        })
    }

    fn both_fields() -> impl Strategy<Value = Field> {
        prop_oneof![Just(Field::Rationals), Just(gf(7))]
    }

    proptest! {
        #[test]
        fn solve_recovers_consistent_systems((a, x) in both_fields().prop_flat_map(|f| (small_matrix(f, 3, 4), small_matrix(f, 4, 1)))) {
            let b = a.mul_vec(&x.column(0)).unwrap();
            let s = a.solve(&b).unwrap().expect("consistent by construction");
            prop_assert_eq!(a.mul_vec(&s).unwrap(), b);
        }

        #[test]
        fn rank_nullity(a in both_fields().prop_flat_map(|f| small_matrix(f, 3, 5))) {
            let ker = a.kernel_basis();
            prop_assert_eq!(a.rank() + ker.len(), a.cols());
            for v in &ker {
                prop_assert!(a.mul_vec(v).unwrap().iter().all(Scalar::is_zero));
            }
        }

        #[test]
        fn kronecker_mixed_product(
            (a, b, c, d) in both_fields().prop_flat_map(|f| (small_matrix(f, 2, 2), small_matrix(f, 2, 3), small_matrix(f, 2, 2), small_matrix(f, 3, 2)))
        ) {
            let lhs = &a.kronecker(&b).unwrap() * &c.kronecker(&d).unwrap();
            let rhs = (&a * &c).kronecker(&(&b * &d)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn inverse_is_two_sided(a in both_fields().prop_flat_map(|f| small_matrix(f, 3, 3))) {
            match a.inverse_or_rank().unwrap() {
                InverseOrRank::Inverse(b) => {
                    prop_assert_eq!(&a * &b, Matrix::identity(a.field(), 3));
                    prop_assert_eq!(&b * &a, Matrix::identity(a.field(), 3));
                }
                InverseOrRank::Rank(r) => prop_assert!(r < 3 && r == a.rank()),
            }
        }
    }
}
