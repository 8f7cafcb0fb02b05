use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CartNode {
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        label: usize,
        histogram: Vec<usize>,
    },
}

/// Classification tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartTree {
    pub nodes: Vec<CartNode>,
    pub dim: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
}

fn gini(hist: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    1.0 - hist.iter().map(|&c| (c as f64 / nf).powi(2)).sum::<f64>()
}

fn majority(hist: &[usize]) -> usize {
    // Ties go to the lower label.
    let mut best = 0;
    for (i, &c) in hist.iter().enumerate() {
        if c > hist[best] {
            best = i;
        }
    }
    best
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [usize],
    classes: usize,
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<CartNode>,
}

impl Builder<'_> {
    fn histogram(&self, idx: &[usize]) -> Vec<usize> {
        let mut h = vec![0; self.classes];
        for &i in idx {
            h[self.y[i]] += 1;
        }
        h
    }

    /// Best `(feature, threshold)` by weighted Gini; ties keep the earlier candidate.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64)> {
        let n = idx.len();
        let mut best: Option<(f64, usize, f64)> = None;
        for f in 0..self.x.rows() {
            let mut order = idx.to_vec();
            order.sort_by(|&a, &b| self.x[(f, a)].total_cmp(&self.x[(f, b)]));
            let mut left = vec![0; self.classes];
            let mut right = self.histogram(idx);
            for cut in 1..n {
                let moved = self.y[order[cut - 1]];
                left[moved] += 1;
                right[moved] -= 1;
                let (lo, hi) = (self.x[(f, order[cut - 1])], self.x[(f, order[cut])]);
                if lo == hi || cut < self.min_leaf || n - cut < self.min_leaf {
                    continue;
                }
                let score = (cut as f64 * gini(&left, cut)
                    + (n - cut) as f64 * gini(&right, n - cut))
                    / n as f64;
                let better = match best {
                    None => true,
                    Some((s, _, _)) => score < s - 1e-12,
                };
                if better {
                    best = Some((score, f, 0.5 * (lo + hi)));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let hist = self.histogram(&idx);
        let id = self.nodes.len();
        self.nodes.push(CartNode::Leaf {
            label: majority(&hist),
            histogram: hist.clone(),
        });
        let pure = hist.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth || idx.len() < 2 * self.min_leaf {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&idx) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.x[(feature, i)] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = CartNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

/// Greedy CART with Gini impurity over midpoint thresholds.
///
/// Nodes keep splitting while impure, even at zero gain, until `max_depth`
/// or `min_leaf` stops them. Ties go to the lower feature, then the lower
/// threshold. `x` holds one point per column.
pub fn cart_fit(x: &Matrix, labels: &[usize], max_depth: usize, min_leaf: usize) -> Result<CartTree> {
    let n = x.cols();
    if labels.len() != n {
        return Err(Error::shape("label count differs from point count"));
    }
    if min_leaf == 0 || n < 2 * min_leaf {
        return Err(Error::param(format!("need min_leaf >= 1 and n >= 2·min_leaf, got n = {n}, min_leaf = {min_leaf}")));
    }
    let classes = labels.iter().max().map_or(1, |m| m + 1);
    let mut b = Builder {
        x,
        y: labels,
        classes,
        max_depth,
        min_leaf,
        nodes: Vec::new(),
    };
    b.grow((0..n).collect(), 0);
    Ok(CartTree {
        nodes: b.nodes,
        dim: x.rows(),
        max_depth,
        min_leaf,
    })
}

impl CartTree {
    /// Index of the leaf containing `x`.
    pub fn leaf(&self, x: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                CartNode::Leaf { .. } => return id,
                CartNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        match &self.nodes[self.leaf(x)] {
            CartNode::Leaf { label, .. } => *label,
            CartNode::Split { .. } => unreachable!("leaf() returns leaves"),
        }
    }

    pub fn accuracy(&self, x: &Matrix, labels: &[usize]) -> f64 {
        let hits = (0..x.cols()).filter(|&j| self.predict(&x.column(j)) == labels[j]).count();
        hits as f64 / x.cols() as f64
    }

    pub fn split_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, CartNode::Split { .. })).count()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| matches!(self.nodes[i], CartNode::Leaf { .. }))
            .collect()
    }

    /// Per-feature `(lo, hi]` interval of a leaf; unbounded sides are infinite.
    pub fn leaf_bounds(&self, leaf: usize) -> Option<Vec<(f64, f64)>> {
        let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); self.dim];
        self.descend(0, leaf, &mut bounds).then_some(bounds)
    }

    fn descend(&self, id: usize, target: usize, bounds: &mut Vec<(f64, f64)>) -> bool {
        if id == target {
            return true;
        }
        match &self.nodes[id] {
            CartNode::Leaf { .. } => false,
            CartNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let saved = bounds[*feature];
                bounds[*feature].1 = saved.1.min(*threshold);
                if self.descend(*left, target, bounds) {
                    return true;
                }
                bounds[*feature] = (saved.0.max(*threshold), saved.1);
                if self.descend(*right, target, bounds) {
                    return true;
                }
                bounds[*feature] = saved;
                false
            }
        }
    }
}

/// 1 when `a` and `b` fall in the same leaf.
pub fn tree_kernel(tree: &CartTree, a: &[f64], b: &[f64]) -> f64 {
    if tree.leaf(a) == tree.leaf(b) {
        1.0
    } else {
        0.0
    }
}

/// Regular 2-D grid over `[x_lo, x_hi] × [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub resolution: usize,
}

impl Grid2 {
    pub fn square(lo: f64, hi: f64, resolution: usize) -> Self {
        Grid2 {
            x_lo: lo,
            x_hi: hi,
            y_lo: lo,
            y_hi: hi,
            resolution,
        }
    }

    /// Point at row `i` (y axis) and column `j` (x axis).
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        let step = |lo: f64, hi: f64, k: usize| {
            if self.resolution <= 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * k as f64 / (self.resolution - 1) as f64
            }
        };
        [step(self.x_lo, self.x_hi, j), step(self.y_lo, self.y_hi, i)]
    }
}

/// `K(x, ·)` painted over the grid; rows follow y, columns follow x.
pub fn kernel_map(tree: &CartTree, x: &[f64], grid: &Grid2) -> Result<Matrix> {
    if tree.dim != 2 || x.len() != 2 {
        return Err(Error::shape("kernel_map needs a 2-D tree and point"));
    }
    let r = grid.resolution;
    let mut out = Matrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            out[(i, j)] = tree_kernel(tree, x, &grid.point(i, j));
        }
    }
    Ok(out)
}
