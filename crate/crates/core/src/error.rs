use thiserror::Error;

use crate::rational::{format_rational, Rational};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed interval at index {index}: {reason}")]
    MalformedInterval { index: usize, reason: String },

    #[error("window must have finite endpoints")]
    InfiniteWindow,

    #[error("set is not closed (part {index} has an open finite endpoint)")]
    NotClosed { index: usize },

    #[error("radius must be positive, got {}", format_rational(.0))]
    NonPositiveRadius(Rational),

    #[error("point {} does not belong to the set", format_rational(.0))]
    PointNotInSet(Rational),

    #[error("invalid chain at stage {stage}: {defect}")]
    InvalidChain { stage: usize, defect: ChainDefect },

    #[error("schedule exceeds its budget by {}", format_rational(.overshoot))]
    BudgetExceeded { overshoot: Rational },

    #[error("budget infeasible: first-generation level must be at least {required_level} (cap is {max_level})")]
    InfeasibleBudget { required_level: u32, max_level: u32 },

    #[error("construction would produce {count} parts, above the limit of {limit}")]
    TooLarge { count: u128, limit: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainDefect {
    Empty,
    NotClosed,
    NotNested,
    FirstStageEmpty,
}

impl std::fmt::Display for ChainDefect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChainDefect::Empty => "chain has no stages",
            ChainDefect::NotClosed => "stage is not a closed set",
            ChainDefect::NotNested => "stage does not contain the previous stage",
            ChainDefect::FirstStageEmpty => "first stage is empty",
        })
    }
}
