//! Fidelity thresholds of k-extendible maps and explicit strategies.

pub mod cj;
pub mod probe;
pub mod problem;
pub mod s3;
pub mod strategy;
pub mod threshold;

pub use cj::{cj_of_mnp, evaluate_map_fidelity, mnp_action, CJOperator};
pub use probe::{build_probe, symmetrize, Probe, ProbeMap};
pub use problem::{Backend, KExtProblem, Side, AUTO_DENSE_LIMIT, DENSE_LIMIT, ITERATIVE_LIMIT};
pub use s3::{s3_block_lambda_min, s3_block_lambda_min_d};
pub use strategy::{
    construct_f1_strategy, construct_f1_strategy_with, find_product_kernel_vector, Construction, F1Strategy,
};
pub use threshold::{
    fidelity_threshold, fidelity_threshold_with, lambda_min_alpha, ThresholdOptions, ThresholdResult, TOL_ALPHA,
    TOL_EIG,
};
