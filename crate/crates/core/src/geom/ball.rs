use statrs::distribution::{Beta, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallSpec {
    pub dim: usize,
    pub radius: f64,
}

impl BallSpec {
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::param(format!("ball needs p >= 1 and r > 0, got p = {dim}, r = {radius}")));
        }
        Ok(BallSpec { dim, radius })
    }

    pub fn unit(dim: usize) -> Result<Self> {
        BallSpec::new(dim, 1.0)
    }
}

/// `n` uniform draws from the ball, one per column.
///
/// Direction is a normalized standard normal vector, radius `r·U^{1/p}`.
pub fn ball_sample(spec: BallSpec, n: usize, rng: &mut Rng) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::param("ball_sample needs n >= 1"));
    }
    let p = spec.dim;
    let mut out = Matrix::zeros(p, n);
    let mut dir = vec![0.0; p];
    for j in 0..n {
        let mut len = 0.0;
        while len == 0.0 {
            dir.iter_mut().for_each(|d| *d = rng.normal());
            len = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        }
        let r = spec.radius * rng.uniform().powf(1.0 / p as f64);
        for i in 0..p {
            out[(i, j)] = dir[i] / len * r;
        }
    }
    Ok(out)
}

/// `wᵀy` for every column `y`.
pub fn project(samples: &Matrix, w: &[f64]) -> Result<Vec<f64>> {
    if w.len() != samples.rows() {
        return Err(Error::shape(format!(
            "direction has {} entries, samples have {} rows",
            w.len(),
            samples.rows()
        )));
    }
    if w.iter().all(|v| *v == 0.0) {
        return Err(Error::param("projection direction is the zero vector"));
    }
    samples.t_matmul(&Matrix::column_vector(w)).map(Matrix::into_vec)
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// CDF of one coordinate of the uniform unit disk, density `(2/π)√(1−t²)`.
pub fn disk_marginal_cdf(t: f64) -> f64 {
    let t = t.clamp(-1.0, 1.0);
    0.5 + (t * (1.0 - t * t).sqrt() + t.asin()) / std::f64::consts::PI
}

/// CDF of one coordinate of the uniform unit `p`-ball.
///
/// The density is proportional to `(1−t²)^{(p−1)/2}`, so `(t+1)/2` is
/// Beta((p+1)/2, (p+1)/2).
pub fn ball_marginal_cdf(p: usize, t: f64) -> Result<f64> {
    if p == 0 {
        return Err(Error::param("ball dimension must be at least 1"));
    }
    let a = (p as f64 + 1.0) / 2.0;
    let beta = Beta::new(a, a).map_err(|e| Error::param(e.to_string()))?;
    Ok(beta.cdf((t.clamp(-1.0, 1.0) + 1.0) / 2.0))
}

/// KS distance to N(0,1) of the first coordinate of `n` uniform draws from
/// the ball of radius `√(p+2)`, which has unit marginal variance.
pub fn maxwell_check(p: usize, n: usize, rng: &mut Rng) -> Result<f64> {
    if p < 2 {
        return Err(Error::param("maxwell_check needs p >= 2"));
    }
    let spec = BallSpec::new(p, ((p + 2) as f64).sqrt())?;
    let y = ball_sample(spec, n, rng)?;
    let mut e1 = vec![0.0; p];
    e1[0] = 1.0;
    let proj = project(&y, &e1)?;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(ks_statistic(&proj, |t| normal.cdf(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;

    fn var(v: &[f64]) -> f64 {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn norms_bounded() {
        let spec = BallSpec::new(7, 2.5).unwrap();
        let y = ball_sample(spec, 2000, &mut Rng::new(1)).unwrap();
        assert!((0..2000).all(|j| norm(&y.column(j)) <= 2.5));
    }

    #[test]
    fn interval_variance() {
        let y = ball_sample(BallSpec::unit(1).unwrap(), 100_000, &mut Rng::new(2)).unwrap();
        assert!((var(y.as_slice()) - 1.0 / 3.0).abs() < 0.005);
    }

    #[test]
    fn zero_direction_rejected() {
        let y = ball_sample(BallSpec::unit(3).unwrap(), 5, &mut Rng::new(3)).unwrap();
        assert!(project(&y, &[0.0; 3]).is_err());
        assert_eq!(project(&y, &[1.0, 0.0, 0.0]).unwrap(), y.row(0).to_vec());
    }

    fn equator_fraction(n: usize, seed: u64) -> f64 {
        let y = ball_sample(BallSpec::unit(50).unwrap(), n, &mut Rng::new(seed)).unwrap();
        let mut w = vec![0.0; 50];
        w[0] = 1.0;
        w[1] = 1.0;
        let proj = project(&y, &w).unwrap();
        proj.iter().filter(|v| v.abs() > 0.5).count() as f64 / n as f64
    }

    #[test]
    fn equator_concentration() {
        // |wᵀY| > 0.5 with |w| = √2 is |uᵀY| > 0.5/√2 for a unit u.
        let exact = 2.0 * (1.0 - ball_marginal_cdf(50, 0.5 / 2f64.sqrt()).unwrap());
        assert!(exact < 0.01, "{exact}");
        for (n, seed) in [(10_000, 4), (100_000, 5)] {
            let frac = equator_fraction(n, seed);
            let se = (exact * (1.0 - exact) / n as f64).sqrt();
            assert!((frac - exact).abs() < 3.0 * se, "{frac} vs {exact}");
        }
        assert!(equator_fraction(100_000, 6) < 0.01);
    }

    #[test]
    fn marginal_cdf_special_cases() {
        for t in [-0.9, -0.3, 0.0, 0.4, 0.95] {
            assert!((ball_marginal_cdf(2, t).unwrap() - disk_marginal_cdf(t)).abs() < 1e-10);
            assert!((ball_marginal_cdf(1, t).unwrap() - (t + 1.0) / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn disk_marginal() {
        let y = ball_sample(BallSpec::unit(2).unwrap(), 10_000, &mut Rng::new(5)).unwrap();
        assert!(ks_statistic(y.row(0), disk_marginal_cdf) < 0.02);
        assert!((disk_marginal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(disk_marginal_cdf(1.0), 1.0);
    }

    #[test]
    fn ks_of_exact_uniform_grid() {
        let s: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_statistic(&s, |t| t) - 0.005).abs() < 1e-12);
    }
}
