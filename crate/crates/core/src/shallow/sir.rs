use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{back_substitute_transposed, cholesky, forward_substitute, sym_eig, Matrix};

/// Sliced inverse regression directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirModel {
    /// `p × k`; `Vᵀ Σ V = I` for the predictor covariance Σ.
    pub directions: Matrix,
    pub slices: usize,
    /// Descending generalized eigenvalues, all `p` of them.
    pub eigenvalues: Vec<f64>,
}

/// Slice sizes: `n / h` each, the first `n mod h` slices one larger.
fn slice_bounds(n: usize, h: usize) -> Vec<(usize, usize)> {
    let (base, extra) = (n / h, n % h);
    let mut start = 0;
    (0..h)
        .map(|s| {
            let len = base + usize::from(s < extra);
            let r = (start, start + len);
            start += len;
            r
        })
        .collect()
}

/// Top-`k` eigenvectors of the slice-mean covariance in the metric of Σ.
///
/// Observations are ordered by `y` (stable, so ties keep index order) and
/// cut into `h` contiguous slices.
pub fn sir_fit(x: &Matrix, y: &[f64], h: usize, k: usize) -> Result<SirModel> {
    let (p, n) = x.shape();
    if y.len() != n {
        return Err(Error::shape("y length differs from the observation count"));
    }
    if h < 2 || n < h {
        return Err(Error::param(format!("need 2 <= H <= n, got H = {h}, n = {n}")));
    }
    if k == 0 || k > p {
        return Err(Error::param(format!("k = {k} outside 1..={p}")));
    }
    let (xc, _) = x.center_rows();
    let sigma = xc.matmul_t(&xc)?.scale(1.0 / n as f64);
    let scale = sigma.diag().into_iter().fold(0.0, f64::max);
    let l = match cholesky(&sigma) {
        Ok(l) if (0..p).all(|i| l[(i, i)] * l[(i, i)] > 1e-12 * scale) => l,
        _ => {
            return Err(Error::Conditioning(
                "predictor covariance is singular; add a small ridge jitter to X".into(),
            ))
        }
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
    let mut between = Matrix::zeros(p, p);
    for (lo, hi) in slice_bounds(n, h) {
        let cnt = (hi - lo) as f64;
        let mut mean = vec![0.0; p];
        for &j in &order[lo..hi] {
            for (i, m) in mean.iter_mut().enumerate() {
                *m += xc[(i, j)] / cnt;
            }
        }
        let wgt = cnt / n as f64;
        for a in 0..p {
            for b in 0..p {
                between[(a, b)] += wgt * mean[a] * mean[b];
            }
        }
    }

    // L⁻¹ M L⁻ᵀ, then map eigenvectors back with L⁻ᵀ.
    let mut half = Matrix::zeros(p, p);
    for j in 0..p {
        half.set_column(j, &forward_substitute(&l, &between.column(j)));
    }
    let mut whitened = Matrix::zeros(p, p);
    for i in 0..p {
        let row = forward_substitute(&l, half.row(i));
        whitened.row_mut(i).copy_from_slice(&row);
    }
    let sym = whitened.add(&whitened.transpose())?.scale(0.5);
    let eig = sym_eig(&sym)?;
    let mut directions = Matrix::zeros(p, k);
    for j in 0..k {
        let mut v = back_substitute_transposed(&l, &eig.vectors.column(j));
        crate::linalg::canonical_sign(&mut v);
        directions.set_column(j, &v);
    }
    Ok(SirModel {
        directions,
        slices: h,
        eigenvalues: eig.values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm};
    use crate::rng::Rng;

    fn angle_to_e1(v: &[f64]) -> f64 {
        (v[0].abs() / norm(v)).clamp(0.0, 1.0).acos().to_degrees()
    }

    #[test]
    fn slices_cover_everything() {
        let b = slice_bounds(23, 5);
        assert_eq!(b.first().unwrap().0, 0);
        assert_eq!(b.last().unwrap().1, 23);
        assert!(b.iter().all(|(lo, hi)| hi - lo == 4 || hi - lo == 5));
    }

    #[test]
    fn recovers_single_index_direction() {
        let mut rng = Rng::new(1);
        let n = 5000;
        let x = Matrix::from_fn(4, n, |_, _| rng.normal());
        let y: Vec<f64> = (0..n).map(|j| x[(0, j)] + 0.1 * rng.normal()).collect();
        let m = sir_fit(&x, &y, 10, 1).unwrap();
        assert!(angle_to_e1(&m.directions.column(0)) < 5.0);
    }

    #[test]
    fn directions_are_sigma_orthonormal() {
        let mut rng = Rng::new(2);
        let x = Matrix::from_fn(3, 400, |i, _| (i + 1) as f64 * rng.normal());
        let y: Vec<f64> = (0..400).map(|j| x[(0, j)] + x[(1, j)].powi(2)).collect();
        let m = sir_fit(&x, &y, 8, 2).unwrap();
        let (xc, _) = x.center_rows();
        let sigma = xc.matmul_t(&xc).unwrap().scale(1.0 / 400.0);
        let g = m.directions.t_matmul(&sigma.matmul(&m.directions).unwrap()).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let e = if a == b { 1.0 } else { 0.0 };
                assert!((g[(a, b)] - e).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn diagonal_rescaling_maps_by_inverse() {
        let mut rng = Rng::new(3);
        let x = Matrix::from_fn(3, 300, |_, _| rng.normal());
        let y: Vec<f64> = (0..300).map(|j| x[(0, j)] - 0.5 * x[(2, j)] + 0.1 * rng.normal()).collect();
        let d = [2.0, 0.5, 3.0];
        let xs = Matrix::from_fn(3, 300, |i, j| d[i] * x[(i, j)]);
        let a = sir_fit(&x, &y, 6, 1).unwrap().directions.column(0);
        let b = sir_fit(&xs, &y, 6, 1).unwrap().directions.column(0);
        let mapped: Vec<f64> = (0..3).map(|i| a[i] / d[i]).collect();
        let cos = dot(&mapped, &b).abs() / (norm(&mapped) * norm(&b));
        assert!((cos - 1.0).abs() < 1e-10);
    }

    #[test]
    fn singular_covariance_rejected() {
        let x = Matrix::from_fn(2, 20, |_, j| j as f64);
        let y: Vec<f64> = (0..20).map(|j| j as f64).collect();
        assert!(matches!(sir_fit(&x, &y, 4, 1), Err(Error::Conditioning(_))));
    }
}
