//! High-dimensional ball concentration, hyperplane and ReLU partitions,
//! CART trees and their leaf kernel, and the toy 2-D datasets.

mod ball;
mod cart;
mod datasets;
mod regions;

pub use ball::{
    ball_marginal_cdf, ball_sample, disk_marginal_cdf, ks_statistic, maxwell_check, project, BallSpec,
};
pub use cart::{cart_fit, kernel_map, tree_kernel, CartNode, CartTree, Grid2};
pub use datasets::{gen_dataset2d, Dataset2D, DatasetKind};
pub use regions::{
    count_regions, oracle_count, relu_regions, sign_pattern, Arrangement, GridBox, RegionMethod,
};
