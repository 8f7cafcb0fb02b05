//! Dense row-major matrices and the handful of factorizations the rest of
//! the crate needs: symmetric eigendecomposition (cyclic Jacobi), thin SVD
//! (one-sided Jacobi), Cholesky and LU solves.
//!
//! Eigen- and singular vectors follow a fixed sign convention: the first
//! entry of each vector whose magnitude exceeds `1e-12` is nonnegative.

use std::fmt::Write as _;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting bad lengths and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InputFormat(format!("non-finite matrix entry {bad}")));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::shape("ragged rows"));
        }
        Matrix::from_vec(rows.len(), cols, rows.concat())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        Ok(Matrix::from_rows(cols)?.transpose())
    }

    /// Column vector (n x 1).
    pub fn column_vector(v: &[f64]) -> Self {
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[f64]) {
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    /// New matrix made of the listed columns, in order.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    /// First `k` columns.
    pub fn leading_columns(&self, k: usize) -> Matrix {
        Matrix::from_fn(self.rows, k, |i, j| self[(i, j)])
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * rhsᵀ` without materializing the transpose.
    pub fn matmul_t(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.cols {
            return Err(Error::shape(format!(
                "cannot multiply {}x{} by transpose of {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, rhs.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..rhs.rows {
                out.data[i * rhs.rows + j] = dot(a, rhs.row(j));
            }
        }
        Ok(out)
    }

    /// `selfᵀ * rhs` without materializing the transpose.
    pub fn t_matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.rows != rhs.rows {
            return Err(Error::shape(format!(
                "cannot multiply transpose of {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = rhs.row(k);
            for (i, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(Error::shape(format!(
                "cannot multiply {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    /// Elementwise (Hadamard) product.
    pub fn hadamard(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        self.map(|x| x * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Adds `v[i]` to every entry of row `i`.
    pub fn add_column_broadcast(&mut self, v: &[f64]) {
        for i in 0..self.rows {
            let b = v[i];
            self.row_mut(i).iter_mut().for_each(|x| *x += b);
        }
    }

    pub fn row_means(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().sum::<f64>() / self.cols.max(1) as f64)
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn sum_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.sum_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Largest |a_ij − a_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Subtracts each row's mean; returns the centered matrix and the means.
    pub fn center_rows(&self) -> (Matrix, Vec<f64>) {
        let means = self.row_means();
        let mut c = self.clone();
        for (i, m) in means.iter().enumerate() {
            c.row_mut(i).iter_mut().for_each(|x| *x -= m);
        }
        (c, means)
    }

    /// One matrix row per CSV line, `.` decimal separator, shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.rows {
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{v}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Matrix> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: lineno as u64 + 1,
                        message: format!("{f:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Matrix::from_rows(&rows)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Flips `v` so its first non-negligible entry is nonnegative.
pub fn canonical_sign(v: &mut [f64]) {
    if let Some(&first) = v.iter().find(|x| x.abs() > 1e-12) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn canonical_sign_columns(m: &mut Matrix) -> Vec<bool> {
    let mut flipped = Vec::with_capacity(m.cols);
    for j in 0..m.cols {
        let mut c = m.column(j);
        let before = c.clone();
        canonical_sign(&mut c);
        flipped.push(c != before);
        m.set_column(j, &c);
    }
    flipped
}

/// Eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Descending.
    pub values: Vec<f64>,
    /// Column `j` pairs with `values[j]`.
    pub vectors: Matrix,
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eig(a: &Matrix) -> Result<SymEigen> {
    if !a.is_square() {
        return Err(Error::shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let scale = a.max_abs().max(1.0);
    let asym = a.asymmetry();
    if asym > 1e-10 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let n = a.rows;
    let mut m = a.clone();
    // Symmetrize exactly so rotations act on a truly symmetric matrix.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    let mut v = Matrix::identity(n);
    let total = m.frobenius_norm();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= 1e-15 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = v.select_columns(&order);
    canonical_sign_columns(&mut vectors);
    Ok(SymEigen { values, vectors })
}

/// Thin singular value decomposition `X = U diag(S) Vᵀ`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// rows(X) x k, orthonormal columns.
    pub u: Matrix,
    /// k = min(rows, cols) values, nonnegative and descending.
    pub s: Vec<f64>,
    /// cols(X) x k, orthonormal columns.
    pub v: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for j in 0..self.s.len() {
            for i in 0..us.rows {
                us[(i, j)] *= self.s[j];
            }
        }
        us.matmul_t(&self.v).expect("conformable by construction")
    }
}

/// Thin SVD by one-sided (Hestenes) Jacobi rotations.
pub fn svd(x: &Matrix) -> Result<Svd> {
    if let Some(bad) = x.data.iter().find(|v| !v.is_finite()) {
        return Err(Error::InputFormat(format!("non-finite matrix entry {bad}")));
    }
    if x.rows < x.cols {
        let t = svd(&x.transpose())?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    let (m, n) = x.shape();
    // Work on columns: store Aᵀ so each column is a contiguous row.
    let mut at = x.transpose();
    let mut vt = Matrix::identity(n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(at.row(p), at.row(p));
                let beta = dot(at.row(q), at.row(q));
                let gamma = dot(at.row(p), at.row(q));
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut at, p, q, c, s);
                rotate_rows(&mut vt, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| norm(at.row(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let smax = s.first().copied().unwrap_or(0.0);
    let tol = smax * 1e-13 * (m.max(n) as f64);

    let mut u = Matrix::zeros(m, n);
    let mut v = Matrix::zeros(n, n);
    let mut filled: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        v.set_column(k, vt.row(j));
        if s[k] > tol && s[k] > 0.0 {
            let col: Vec<f64> = at.row(j).iter().map(|x| x / s[k]).collect();
            filled.push(col.clone());
            u.set_column(k, &col);
        } else {
            pending.push(k);
        }
    }
    // Complete U with an orthonormal basis for the null directions.
    let mut e = 0;
    for k in pending {
        loop {
            let mut cand = vec![0.0; m];
            cand[e % m] = 1.0;
            e += 1;
            for _ in 0..2 {
                for f in &filled {
                    let d = dot(&cand, f);
                    cand.iter_mut().zip(f).for_each(|(c, fv)| *c -= d * fv);
                }
            }
            let nrm = norm(&cand);
            if nrm > 1e-8 {
                cand.iter_mut().for_each(|c| *c /= nrm);
                u.set_column(k, &cand);
                filled.push(cand);
                break;
            }
        }
    }
    let mut s = s;
    for x in s.iter_mut() {
        if *x <= tol {
            *x = if *x < 0.0 { 0.0 } else { *x };
        }
    }
    // Sign convention on V; mirror flips onto U to preserve the product.
    let flipped = canonical_sign_columns(&mut v);
    for (k, f) in flipped.into_iter().enumerate() {
        if f {
            let c: Vec<f64> = u.column(k).iter().map(|x| -x).collect();
            u.set_column(k, &c);
        }
    }
    Ok(Svd { u, s, v })
}

fn rotate_rows(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let cols = m.cols;
    for k in 0..cols {
        let a = m.data[p * cols + k];
        let b = m.data[q * cols + k];
        m.data[p * cols + k] = c * a - s * b;
        m.data[q * cols + k] = s * a + c * b;
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::shape("cholesky needs a square matrix"));
    }
    let n = a.rows;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::Conditioning(format!(
                "matrix is not positive definite (pivot {j} = {d:e})"
            )));
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L y = b` for lower-triangular `L`.
pub fn forward_substitute(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s = b[i] - dot(&l.row(i)[..i], &y[..i]);
        y[i] = s / l[(i, i)];
    }
    y
}

/// Solves `Lᵀ x = y` for lower-triangular `L`.
pub fn back_substitute_transposed(l: &Matrix, y: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves `A x = b` for symmetric positive-definite `A`.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows {
        return Err(Error::shape("right-hand side length"));
    }
    let l = cholesky(a)?;
    Ok(back_substitute_transposed(&l, &forward_substitute(&l, b)))
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() || b.len() != a.rows {
        return Err(Error::shape("solve needs square A and matching b"));
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs()))
            .unwrap();
        if m[(piv, col)].abs() <= 1e-14 * scale {
            return Err(Error::Conditioning(format!("singular at column {col}")));
        }
        if piv != col {
            for k in 0..n {
                let t = m[(col, k)];
                m[(col, k)] = m[(piv, k)];
                m[(piv, k)] = t;
            }
            x.swap(col, piv);
        }
        for i in (col + 1)..n {
            let f = m[(i, col)] / m[(col, col)];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[(i, k)] -= f * m[(col, k)];
            }
            x[i] -= f * x[col];
        }
    }
    for i in (0..n).rev() {
        let s = x[i] - dot(&m.row(i)[(i + 1)..], &x[(i + 1)..]);
        x[i] = s / m[(i, i)];
    }
    Ok(x)
}

/// Column space principal angles (degrees) between two matrices with the same row count.
pub fn principal_angles_deg(a: &Matrix, b: &Matrix) -> Result<Vec<f64>> {
    let qa = orthonormal_basis(a)?;
    let qb = orthonormal_basis(b)?;
    let m = qa.t_matmul(&qb)?;
    let s = svd(&m)?.s;
    Ok(s.iter()
        .map(|c| c.clamp(-1.0, 1.0).acos().to_degrees())
        .collect())
}

fn orthonormal_basis(a: &Matrix) -> Result<Matrix> {
    let d = svd(a)?;
    let rank = d.s.iter().filter(|&&s| s > 1e-10 * d.s[0].max(1e-300)).count();
    Ok(d.u.leading_columns(rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn random(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.normal())
    }

    fn random_sym(n: usize, rng: &mut Rng) -> Matrix {
        let a = random(n, n, rng);
        a.add(&a.transpose()).unwrap().scale(0.5)
    }

    fn orthonormality_error(q: &Matrix) -> f64 {
        q.t_matmul(q)
            .unwrap()
            .sub(&Matrix::identity(q.cols()))
            .unwrap()
            .max_abs()
    }

    #[test]
    fn eig_diagonal() {
        let e = sym_eig(&Matrix::from_diag(&[1.0, 4.0])).unwrap();
        assert_eq!(e.values, vec![4.0, 1.0]);
        assert_eq!(e.vectors.column(0), vec![0.0, 1.0]);
        assert_eq!(e.vectors.column(1), vec![1.0, 0.0]);
    }

    #[test]
    fn eig_two_by_two() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = sym_eig(&a).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-12);
        assert!((e.values[1] - 1.0).abs() < 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.vectors.column(0);
        let v1 = e.vectors.column(1);
        assert!((v0[0] - r).abs() < 1e-12 && (v0[1] - r).abs() < 1e-12);
        assert!((v1[0] - r).abs() < 1e-12 && (v1[1] + r).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_asymmetric() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&a), Err(Error::NotSymmetric(_))));
        assert!(matches!(sym_eig(&Matrix::zeros(2, 3)), Err(Error::Shape(_))));
    }

    #[test]
    fn eig_reconstruction_random() {
        let mut rng = Rng::new(11);
        for trial in 0..1000 {
            let n = 1 + trial % 12;
            let a = random_sym(n, &mut rng);
            let e = sym_eig(&a).unwrap();
            let vl = Matrix::from_fn(n, n, |i, j| e.vectors[(i, j)] * e.values[j]);
            let rec = vl.matmul_t(&e.vectors).unwrap();
            let rel = rec.sub(&a).unwrap().frobenius_norm() / a.frobenius_norm();
            assert!(rel < 1e-8, "n={n} rel={rel}");
            assert!(orthonormality_error(&e.vectors) < 1e-8);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_diagonal_and_rank_one() {
        let d = svd(&Matrix::from_diag(&[3.0, 0.0])).unwrap();
        assert_eq!(d.s, vec![3.0, 0.0]);
        assert!(orthonormality_error(&d.u) < 1e-12);

        let u = [0.6, 0.8, 0.0];
        let v = [0.0, 1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt(), 0.0];
        let x = Matrix::from_fn(3, 4, |i, j| 5.0 * u[i] * v[j]);
        let d = svd(&x).unwrap();
        assert!((d.s[0] - 5.0).abs() < 1e-12);
        assert!(d.s[1..].iter().all(|s| s.abs() < 1e-12));
        assert!(orthonormality_error(&d.u) < 1e-10);
        assert!(orthonormality_error(&d.v) < 1e-10);
    }

    #[test]
    fn svd_reconstruction_random() {
        let mut rng = Rng::new(5);
        for trial in 0..1000 {
            let r = 1 + trial % 12;
            let c = 1 + (trial / 12) % 12;
            let x = random(r, c, &mut rng);
            let d = svd(&x).unwrap();
            let rel = d.reconstruct().sub(&x).unwrap().frobenius_norm() / x.frobenius_norm();
            assert!(rel < 1e-8, "{r}x{c} rel={rel}");
            assert!(orthonormality_error(&d.u) < 1e-8);
            assert!(orthonormality_error(&d.v) < 1e-8);
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
            assert!(d.s.iter().all(|&s| s >= 0.0));
        }
    }

    #[test]
    fn svd_six_by_four() {
        let mut rng = Rng::new(64);
        let x = random(6, 4, &mut rng);
        let d = svd(&x).unwrap();
        assert_eq!(d.u.shape(), (6, 4));
        assert_eq!(d.v.shape(), (4, 4));
        let rel = d.reconstruct().sub(&x).unwrap().frobenius_norm() / x.frobenius_norm();
        assert!(rel < 1e-8);
    }

    #[test]
    fn solvers_agree() {
        let mut rng = Rng::new(2);
        let b = random(5, 5, &mut rng);
        let a = b.t_matmul(&b).unwrap().add(&Matrix::identity(5)).unwrap();
        let rhs: Vec<f64> = (0..5).map(|i| i as f64 - 2.0).collect();
        let x1 = solve_spd(&a, &rhs).unwrap();
        let x2 = solve(&a, &rhs).unwrap();
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-10);
        }
        let back = a.matvec(&x1).unwrap();
        for (p, q) in back.iter().zip(&rhs) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_diag(&[1.0, -1.0]);
        assert!(matches!(cholesky(&a), Err(Error::Conditioning(_))));
    }

    #[test]
    fn csv_round_trip_exact() {
        let mut rng = Rng::new(3);
        let x = random(4, 3, &mut rng);
        let text = x.to_csv();
        assert_eq!(Matrix::from_csv(&text).unwrap(), x);
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Matrix::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::from_vec(1, 2, vec![1.0]).is_err());
    }
}
