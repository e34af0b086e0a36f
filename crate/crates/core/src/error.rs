use thiserror::Error;

use crate::geometry::IntVec2;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty point set")]
    EmptyPointSet,
    #[error("the zero vector has no direction")]
    ZeroDirection,
    #[error("vector {0} is not primitive")]
    NotPrimitive(IntVec2),
    #[error("convex hulls intersect; no separating half-plane")]
    NotSeparable,
    #[error("origin lies in the convex hull")]
    OriginInHull,
    #[error("neighbor set contains the origin")]
    OriginInNeighborSet,
    #[error("empty neighbor set would make the rule constant")]
    EmptySetMeansConstant,
    #[error("neighbor cell {cell} exceeds radius bound {bound}")]
    CellOutOfRange { cell: IntVec2, bound: i64 },
    #[error("kernel is not monotone and freezing: {0}")]
    NotMonotoneFreezing(String),
    #[error("radius {radius} exceeds the supported maximum {max}")]
    RadiusTooLarge { radius: usize, max: usize },
    #[error("alphabet mismatch: window has {window} states, kernel expects {kernel}")]
    AlphabetMismatch { window: usize, kernel: usize },
    #[error("light cone of the query leaves the exact region")]
    ExactnessViolated,
    #[error("family is not strongly subcritical")]
    NotStronglySubcritical,
    #[error("obstacle failed its fixed-point verification")]
    ObstacleVerificationFailed,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("machine did not halt within {0} steps")]
    BudgetExceeded(usize),
    #[error("machine head moved off the left end of the tape at step {0}")]
    HeadFellOff(usize),
    #[error("machine is not in normal form: {0}")]
    NotNormalForm(String),
    #[error("invalid Turing machine: {0}")]
    InvalidMachine(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
