use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// `p × K`, orthonormal loading columns.
    pub w: Matrix,
    pub center: Vec<f64>,
    /// Descending.
    pub explained_variance: Vec<f64>,
}

/// Top-`k` eigenvectors of the `1/n` sample covariance of `x` (`p × n`).
pub fn pca_fit(x: &Matrix, k: usize) -> Result<PcaModel> {
    let (p, n) = x.shape();
    if k == 0 || k > p.min(n) {
        return Err(Error::param(format!("K = {k} outside 1..={}", p.min(n))));
    }
    let (xc, center) = x.center_rows();
    let cov = xc.matmul_t(&xc)?.scale(1.0 / n as f64);
    let eig = sym_eig(&cov)?;
    Ok(PcaModel {
        w: eig.vectors.leading_columns(k),
        center,
        explained_variance: eig.values[..k].iter().map(|v| v.max(0.0)).collect(),
    })
}

impl PcaModel {
    pub fn k(&self) -> usize {
        self.w.cols()
    }

    /// `Z = Wᵀ(X − center)`.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.rows() != self.center.len() {
            return Err(Error::shape(format!(
                "model fitted on {} features, got {}",
                self.center.len(),
                x.rows()
            )));
        }
        let mut xc = x.clone();
        let neg: Vec<f64> = self.center.iter().map(|c| -c).collect();
        xc.add_column_broadcast(&neg);
        self.w.t_matmul(&xc)
    }

    /// `W Z + center`.
    pub fn reconstruct(&self, z: &Matrix) -> Result<Matrix> {
        let mut x = self.w.matmul(z)?;
        x.add_column_broadcast(&self.center);
        Ok(x)
    }

    /// `‖X − reconstruct(transform(X))‖²`.
    pub fn reconstruction_error(&self, x: &Matrix) -> Result<f64> {
        Ok(x.sub(&self.reconstruct(&self.transform(x)?)?)?.sum_sq())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn four_point_hand_values() {
        let x = Matrix::from_rows(&[vec![2.0, -2.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -1.0]]).unwrap();
        let m = pca_fit(&x, 2).unwrap();
        assert!((m.explained_variance[0] - 2.0).abs() < 1e-12);
        assert!((m.explained_variance[1] - 0.5).abs() < 1e-12);
        assert!((m.w[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!((m.w[(1, 1)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_basis_reconstructs() {
        let mut rng = Rng::new(1);
        let x = Matrix::from_fn(4, 30, |_, _| rng.normal());
        let m = pca_fit(&x, 4).unwrap();
        assert!(m.reconstruction_error(&x).unwrap() < 1e-20 * x.sum_sq().max(1.0) + 1e-18);
    }

    #[test]
    fn scores_are_decorrelated() {
        let mut rng = Rng::new(2);
        let x = Matrix::from_fn(5, 200, |i, _| (i + 1) as f64 * rng.normal());
        let m = pca_fit(&x, 3).unwrap();
        let z = m.transform(&x).unwrap();
        let cov = z.matmul_t(&z).unwrap().scale(1.0 / 200.0);
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert!((cov[(i, i)] - m.explained_variance[i]).abs() < 1e-8);
                } else {
                    assert!(cov[(i, j)].abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn k_out_of_range() {
        let x = Matrix::zeros(3, 2);
        assert!(pca_fit(&x, 3).is_err());
        assert!(pca_fit(&x, 0).is_err());
    }
}
