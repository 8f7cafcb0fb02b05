use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{canonical_sign, dot, solve, sym_eig, Matrix};

/// Partial least squares, `X = TPᵀ`, `Y = TBCᵀ` on centered data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlsModel {
    /// `n × c` scores, mutually orthogonal columns.
    pub t: Matrix,
    /// `p × c` X-loadings.
    pub p: Matrix,
    /// `p × c` unit weight vectors.
    pub w: Matrix,
    /// Diagonal of the inner coefficient matrix B.
    pub b: Vec<f64>,
    /// `q × c` unit response loadings.
    pub c: Matrix,
    pub x_mean: Vec<f64>,
    pub y_mean: Vec<f64>,
}

/// NIPALS with regression deflation of both blocks.
///
/// `x` is `p × n`, `y` is `q × n`. Each weight vector is the dominant
/// eigenvector of `XYᵀYXᵀ`, i.e. the fixed point of the NIPALS inner loop.
pub fn pls_fit(x: &Matrix, y: &Matrix, n_components: usize) -> Result<PlsModel> {
    let (px, n) = x.shape();
    let q = y.rows();
    if y.cols() != n {
        return Err(Error::shape("X and Y have different observation counts"));
    }
    let (mut xr, x_mean) = x.center_rows();
    let (mut yr, y_mean) = y.center_rows();
    for j in 0..px {
        if xr.row(j).iter().all(|v| v.abs() == 0.0) {
            return Err(Error::InputFormat(format!("feature {j} has zero variance")));
        }
    }
    let total = xr.sum_sq();
    let mut t = Matrix::zeros(n, n_components);
    let mut p = Matrix::zeros(px, n_components);
    let mut w = Matrix::zeros(px, n_components);
    let mut c = Matrix::zeros(q, n_components);
    let mut b = vec![0.0; n_components];
    for k in 0..n_components {
        let m = xr.matmul_t(&yr)?;
        let mut wk = sym_eig(&m.matmul_t(&m)?)?.vectors.column(0);
        canonical_sign(&mut wk);
        let tk = xr.t_matmul(&Matrix::column_vector(&wk))?.into_vec();
        let tt = dot(&tk, &tk);
        if tt <= 1e-24 * total {
            return Err(Error::param(format!(
                "{n_components} components exceed the rank of X"
            )));
        }
        let pk: Vec<f64> = xr.matvec(&tk)?.iter().map(|v| v / tt).collect();
        let ck: Vec<f64> = yr.matvec(&tk)?.iter().map(|v| v / tt).collect();
        for i in 0..px {
            for j in 0..n {
                xr[(i, j)] -= pk[i] * tk[j];
            }
        }
        for i in 0..q {
            for j in 0..n {
                yr[(i, j)] -= ck[i] * tk[j];
            }
        }
        let bk = dot(&ck, &ck).sqrt();
        let unit: Vec<f64> = ck.iter().map(|v| if bk > 0.0 { v / bk } else { 0.0 }).collect();
        t.set_column(k, &tk);
        p.set_column(k, &pk);
        w.set_column(k, &wk);
        c.set_column(k, &unit);
        b[k] = bk;
    }
    Ok(PlsModel {
        t,
        p,
        w,
        b,
        c,
        x_mean,
        y_mean,
    })
}

impl PlsModel {
    pub fn n_components(&self) -> usize {
        self.b.len()
    }

    fn add_mean(&self, mut yhat: Matrix) -> Matrix {
        yhat.add_column_broadcast(&self.y_mean);
        yhat
    }

    fn cb(&self) -> Matrix {
        let mut cb = self.c.clone();
        for k in 0..self.b.len() {
            for i in 0..cb.rows() {
                cb[(i, k)] *= self.b[k];
            }
        }
        cb
    }

    /// Training fit `ȳ + C B Tᵀ`.
    pub fn fitted(&self) -> Result<Matrix> {
        Ok(self.add_mean(self.cb().matmul_t(&self.t)?))
    }

    /// Prediction for new columns via the rotation `R = W (PᵀW)⁻¹`.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        if x.rows() != self.x_mean.len() {
            return Err(Error::shape("feature count differs from the fitted model"));
        }
        let c = self.n_components();
        let mut xc = x.clone();
        let neg: Vec<f64> = self.x_mean.iter().map(|v| -v).collect();
        xc.add_column_broadcast(&neg);
        if c == 0 {
            return Ok(self.add_mean(Matrix::zeros(self.y_mean.len(), x.cols())));
        }
        let g = self.p.t_matmul(&self.w)?;
        let mut ginv = Matrix::zeros(c, c);
        for j in 0..c {
            let mut e = vec![0.0; c];
            e[j] = 1.0;
            ginv.set_column(j, &solve(&g, &e)?);
        }
        let r = self.w.matmul(&ginv)?;
        let scores = r.t_matmul(&xc)?;
        Ok(self.add_mean(self.cb().matmul(&scores)?))
    }
}
