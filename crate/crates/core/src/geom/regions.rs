use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::nnet::{Activation, Network};

/// Hyperplanes `{x : wᵀx + b = 0}` in dimension `dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arrangement {
    pub dim: usize,
    pub hyperplanes: Vec<(Vec<f64>, f64)>,
}

impl Arrangement {
    pub fn new(dim: usize, hyperplanes: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if hyperplanes.len() > 64 {
            return Err(Error::param("at most 64 hyperplanes are supported"));
        }
        for (i, (w, b)) in hyperplanes.iter().enumerate() {
            if w.len() != dim {
                return Err(Error::shape(format!("hyperplane {i} has dimension {}", w.len())));
            }
            if w.iter().all(|v| *v == 0.0) {
                return Err(Error::param(format!("hyperplane {i} has a zero normal")));
            }
            if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
                return Err(Error::param(format!("hyperplane {i} is not finite")));
            }
        }
        Ok(Arrangement { dim, hyperplanes })
    }

    /// Lines tangent to the circle of radius `r` at the given angles.
    pub fn tangent_lines(r: f64, angles: &[f64]) -> Result<Self> {
        let planes = angles
            .iter()
            .map(|a| (vec![a.cos(), a.sin()], -r))
            .collect();
        Arrangement::new(2, planes)
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionMethod {
    Grid,
    Oracle,
}

/// Axis-aligned box `[lo, hi]^d` scanned with `resolution` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    pub lo: f64,
    pub hi: f64,
    pub resolution: usize,
}

impl GridBox {
    /// `[−5, 5]` with 2001 points per axis (201 in three dimensions).
    pub fn standard(dim: usize) -> Self {
        GridBox {
            lo: -5.0,
            hi: 5.0,
            resolution: if dim >= 3 { 201 } else { 2001 },
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        if self.resolution <= 1 {
            return 0.5 * (self.lo + self.hi);
        }
        self.lo + (self.hi - self.lo) * i as f64 / (self.resolution - 1) as f64
    }
}

/// Bit `i` is set when `wᵢᵀx + bᵢ > 0`.
pub fn sign_pattern(planes: &[(Vec<f64>, f64)], x: &[f64]) -> u64 {
    planes
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, (w, b))| if dot(w, x) + b > 0.0 { acc | (1 << i) } else { acc })
}

fn grid_patterns(dim: usize, planes: &[(Vec<f64>, f64)], grid: GridBox) -> Result<HashSet<u64>> {
    if !(1..=3).contains(&dim) {
        return Err(Error::param(format!("grid counting supports d <= 3, got {dim}")));
    }
    let r = grid.resolution;
    let mut seen = HashSet::new();
    let mut x = vec![0.0; dim];
    let total = r.pow(dim as u32);
    for idx in 0..total {
        let mut rest = idx;
        for xi in x.iter_mut() {
            *xi = grid.coord(rest % r);
            rest /= r;
        }
        seen.insert(sign_pattern(planes, &x));
    }
    Ok(seen)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Combinatorial count `Σ_{i≤d} C(n, i)` for an arrangement in general position.
///
/// Supports `d ∈ {1, 2}` and checks the general-position precondition.
pub fn oracle_count(arr: &Arrangement) -> Result<usize> {
    let n = arr.len();
    let h = &arr.hyperplanes;
    match arr.dim {
        1 => {
            let mut roots: Vec<f64> = h.iter().map(|(w, b)| -b / w[0]).collect();
            roots.sort_by(f64::total_cmp);
            if roots.windows(2).any(|p| (p[1] - p[0]).abs() <= 1e-12 * (1.0 + p[0].abs())) {
                return Err(Error::param("coincident points: not in general position"));
            }
        }
        2 => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let (wi, bi) = (&h[i].0, h[i].1);
                    let (wj, bj) = (&h[j].0, h[j].1);
                    let det = wi[0] * wj[1] - wi[1] * wj[0];
                    let scale = crate::linalg::norm(wi) * crate::linalg::norm(wj);
                    if det.abs() <= 1e-12 * scale {
                        return Err(Error::param(format!(
                            "lines {i} and {j} are parallel: not in general position"
                        )));
                    }
                    let p = [(-bi * wj[1] + bj * wi[1]) / det, (-wi[0] * bj + wj[0] * bi) / det];
                    for (k, (wk, bk)) in h.iter().enumerate() {
                        if k == i || k == j {
                            continue;
                        }
                        let resid = (dot(wk, &p) + bk).abs() / crate::linalg::norm(wk);
                        if resid <= 1e-9 * (1.0 + crate::linalg::norm(&p)) {
                            return Err(Error::param(format!(
                                "lines {i}, {j}, {k} are concurrent: not in general position"
                            )));
                        }
                    }
                }
            }
        }
        d => return Err(Error::param(format!("oracle counting supports d <= 2, got {d}"))),
    }
    Ok((0..=arr.dim).map(|i| binomial(n, i)).sum())
}

/// Number of regions cut out by the arrangement.
///
/// The grid method counts distinct sign patterns over [`GridBox::standard`];
/// regions lying wholly outside the box are missed.
pub fn count_regions(arr: &Arrangement, method: RegionMethod) -> Result<usize> {
    match method {
        RegionMethod::Grid => {
            Ok(grid_patterns(arr.dim, &arr.hyperplanes, GridBox::standard(arr.dim))?.len())
        }
        RegionMethod::Oracle => oracle_count(arr),
    }
}

/// Distinct on/off patterns of the first (ReLU) layer over the standard 2-D grid.
pub fn relu_regions(net: &Network) -> Result<usize> {
    if net.input_dim() != 2 {
        return Err(Error::shape("relu_regions needs a 2-D input"));
    }
    let layer = &net.layers()[0];
    if layer.act != Activation::Relu {
        return Err(Error::param("first layer must use relu"));
    }
    if layer.output_dim() > 64 {
        return Err(Error::param("at most 64 hidden neurons are supported"));
    }
    let planes: Vec<(Vec<f64>, f64)> = (0..layer.output_dim())
        .map(|i| (layer.w.row(i).to_vec(), layer.b[i]))
        .collect();
    Ok(grid_patterns(2, &planes, GridBox::standard(2))?.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::nnet::Layer;
    use std::f64::consts::PI;

    fn fan(n: usize) -> Arrangement {
        let angles: Vec<f64> = (0..n).map(|k| 0.1 + k as f64 * PI / n as f64).collect();
        Arrangement::tangent_lines(1.0, &angles).unwrap()
    }

    #[test]
    fn generic_lines_grid_matches_oracle() {
        let expect = [2, 4, 7, 11, 16, 22];
        for n in 1..=6 {
            let arr = fan(n);
            assert_eq!(count_regions(&arr, RegionMethod::Oracle).unwrap(), expect[n - 1]);
            assert_eq!(count_regions(&arr, RegionMethod::Grid).unwrap(), expect[n - 1], "n = {n}");
        }
    }

    #[test]
    fn degenerate_rejected_by_oracle() {
        let par = Arrangement::new(2, vec![(vec![1.0, 0.0], 0.0), (vec![2.0, 0.0], 1.0)]).unwrap();
        assert!(count_regions(&par, RegionMethod::Oracle).is_err());
        assert_eq!(count_regions(&par, RegionMethod::Grid).unwrap(), 3);
        let conc = Arrangement::new(
            2,
            vec![(vec![1.0, 0.0], 0.0), (vec![0.0, 1.0], 0.0), (vec![1.0, 1.0], 0.0)],
        )
        .unwrap();
        assert!(count_regions(&conc, RegionMethod::Oracle).is_err());
        assert_eq!(count_regions(&conc, RegionMethod::Grid).unwrap(), 6);
    }

    #[test]
    fn zero_normal_rejected() {
        assert!(Arrangement::new(2, vec![(vec![0.0, 0.0], 1.0)]).is_err());
    }

    #[test]
    fn one_dim_and_three_dim() {
        let pts = Arrangement::new(1, vec![(vec![1.0], -1.0), (vec![-2.0], 1.0)]).unwrap();
        assert_eq!(count_regions(&pts, RegionMethod::Oracle).unwrap(), 3);
        assert_eq!(count_regions(&pts, RegionMethod::Grid).unwrap(), 3);
        let axes = Arrangement::new(
            3,
            vec![(vec![1.0, 0.0, 0.0], 0.1), (vec![0.0, 1.0, 0.0], 0.2), (vec![0.0, 0.0, 1.0], 0.3)],
        )
        .unwrap();
        assert_eq!(count_regions(&axes, RegionMethod::Grid).unwrap(), 8);
    }

    #[test]
    fn three_relu_neurons_give_seven() {
        let arr = fan(3);
        let w = Matrix::from_rows(&arr.hyperplanes.iter().map(|(w, _)| w.clone()).collect::<Vec<_>>())
            .unwrap();
        let b = arr.hyperplanes.iter().map(|(_, b)| *b).collect();
        let net = Network::new(2, vec![Layer::new(w, b, Activation::Relu).unwrap()]).unwrap();
        assert_eq!(relu_regions(&net).unwrap(), 7);
    }
}
