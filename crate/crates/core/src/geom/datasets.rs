use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Simple,
    Circle,
    Spiral,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 3] = [DatasetKind::Simple, DatasetKind::Circle, DatasetKind::Spiral];

    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Simple => "simple",
            DatasetKind::Circle => "circle",
            DatasetKind::Spiral => "spiral",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset2D {
    /// `2 × n`.
    pub points: Matrix,
    /// 0 for the first `n/2` points, 1 for the rest.
    pub labels: Vec<usize>,
    pub kind: DatasetKind,
}

/// Standard deviation of each blob in the simple dataset, before jitter.
pub const BLOB_SD: f64 = 0.5;

/// Two-class toy data in the plane with Gaussian jitter of scale `noise`.
///
/// * simple: blobs centred at (−1.5, 0) and (1.5, 0), sd [`BLOB_SD`];
/// * circle: class 0 uniform in the unit disk, class 1 uniform in the annulus 1.5 ≤ r ≤ 2.5;
/// * spiral: arms `r = θ/3`, θ uniform on [π/2, 3π], class 1 rotated by π.
pub fn gen_dataset2d(kind: DatasetKind, n: usize, noise: f64, seed: u64) -> Result<Dataset2D> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::param(format!("n must be positive and even, got {n}")));
    }
    if !(noise >= 0.0) {
        return Err(Error::param("noise must be nonnegative"));
    }
    let mut rng = Rng::new(seed);
    let mut points = Matrix::zeros(2, n);
    let labels: Vec<usize> = (0..n).map(|j| usize::from(j >= n / 2)).collect();
    for (j, &c) in labels.iter().enumerate() {
        let (x, y) = match kind {
            DatasetKind::Simple => {
                let cx = if c == 0 { -1.5 } else { 1.5 };
                (cx + BLOB_SD * rng.normal(), BLOB_SD * rng.normal())
            }
            DatasetKind::Circle => {
                let r = if c == 0 {
                    rng.uniform().sqrt()
                } else {
                    (1.5f64.powi(2) + rng.uniform() * (2.5f64.powi(2) - 1.5f64.powi(2))).sqrt()
                };
                let a = rng.uniform_range(0.0, 2.0 * PI);
                (r * a.cos(), r * a.sin())
            }
            DatasetKind::Spiral => {
                let theta = rng.uniform_range(PI / 2.0, 3.0 * PI);
                let r = theta / 3.0;
                let sign = if c == 0 { 1.0 } else { -1.0 };
                (sign * r * theta.cos(), sign * r * theta.sin())
            }
        };
        points[(0, j)] = x + noise * rng.normal();
        points[(1, j)] = y + noise * rng.normal();
    }
    Ok(Dataset2D {
        points,
        labels,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{cart_fit, ks_statistic};

    #[test]
    fn balanced_and_deterministic() {
        for kind in DatasetKind::ALL {
            let a = gen_dataset2d(kind, 200, 0.1, 3).unwrap();
            assert_eq!(a.labels.iter().filter(|&&l| l == 1).count(), 100);
            assert_eq!(a, gen_dataset2d(kind, 200, 0.1, 3).unwrap());
        }
        assert!(gen_dataset2d(DatasetKind::Simple, 7, 0.1, 0).is_err());
    }

    #[test]
    fn simple_is_nearly_separable() {
        let d = gen_dataset2d(DatasetKind::Simple, 400, 0.2, 1).unwrap();
        let t = cart_fit(&d.points, &d.labels, 2, 1).unwrap();
        assert!(t.accuracy(&d.points, &d.labels) >= 0.95);
    }

    #[test]
    fn circle_depth_four() {
        let d = gen_dataset2d(DatasetKind::Circle, 400, 0.1, 2).unwrap();
        let t = cart_fit(&d.points, &d.labels, 4, 1).unwrap();
        assert!(t.accuracy(&d.points, &d.labels) >= 0.9);
    }

    #[test]
    fn accuracy_monotone_in_depth() {
        let d = gen_dataset2d(DatasetKind::Spiral, 300, 0.1, 4).unwrap();
        let mut last = 0.0;
        for depth in 0..8 {
            let acc = cart_fit(&d.points, &d.labels, depth, 1).unwrap().accuracy(&d.points, &d.labels);
            assert!(acc >= last);
            last = acc;
        }
    }

    #[test]
    fn circle_radius_law_rotation_invariant() {
        let d = gen_dataset2d(DatasetKind::Circle, 4000, 0.1, 5).unwrap();
        for class in 0..2 {
            let idx: Vec<usize> = (0..4000).filter(|&j| d.labels[j] == class).collect();
            let r: Vec<f64> = idx.iter().map(|&j| d.points[(0, j)].hypot(d.points[(1, j)])).collect();
            // 90° rotation (x, y) → (−y, x) preserves radii exactly, so compare
            // the rotated sample's empirical law against the original's.
            let rot: Vec<f64> = idx.iter().map(|&j| (-d.points[(1, j)]).hypot(d.points[(0, j)])).collect();
            let mut sorted = r.clone();
            sorted.sort_by(f64::total_cmp);
            let ecdf = |t: f64| sorted.partition_point(|v| *v <= t) as f64 / sorted.len() as f64;
            assert!(ks_statistic(&rot, ecdf) < 0.05);
        }
    }
}
