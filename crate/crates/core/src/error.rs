use thiserror::Error;

use crate::energy::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: pairwise table ({i}, {j}) is not symmetric: {message}")]
    Symmetry {
        line: usize,
        i: usize,
        j: usize,
        message: String,
    },

    #[error("invalid model: {}", join(.0))]
    InvalidModel(Vec<Violation>),

    #[error("normalizer of variable {var} vanished (all terms underflowed)")]
    Underflow { var: usize },

    #[error("search space of {size} assignments exceeds the limit of {limit}")]
    SearchSpaceTooLarge { size: f64, limit: u64 },

    #[error("kernel under-resolved: width sigma*sqrt(dt) = {width:.4e} is below {min_ratio} * h = {min:.4e}")]
    KernelUnderResolved { width: f64, min_ratio: f64, min: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
