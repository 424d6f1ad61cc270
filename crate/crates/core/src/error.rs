use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: expected {}", .expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
    },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("domain error: {op} at {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("frame has rank {rank} < {k} at the evaluation point")]
    DegenerateFrame { rank: usize, k: usize },
    #[error("too few target dimensions: q = {q}, need at least {required}")]
    TooFewTargets { q: usize, required: usize },
    #[error("map is not H-free at the evaluation point (rank {rank} < {required})")]
    NotHFree { rank: usize, required: usize },
    #[error("map is not an H-immersion at the evaluation point")]
    NotImmersion,
    #[error("linear solve residual {residual:e} exceeds bound {bound:e}")]
    ResidualTooLarge { residual: f64, bound: f64 },
    #[error("matrix is not symmetric at the evaluation point")]
    NotSymmetric,
    #[error("commutation violated: L_xi{field} f^{function} = {value:e}")]
    CommutationViolation {
        field: usize,
        function: usize,
        value: f64,
    },
    #[error("casimir differentials are degenerate (rank {rank} < {required})")]
    DegenerateCasimirs { rank: usize, required: usize },
    #[error("bracket {{h, f}} = {value:e} is not positive")]
    NonTransversal { value: f64 },
    #[error("curve is not free at t = {t} (a'b'' - a''b' = {value:e})")]
    NotFree { t: f64, value: f64 },
    #[error("curve is not 2*pi periodic at t = {t}")]
    NotPeriodic { t: f64 },
    #[error("trajectory left the bounding box at time {time}")]
    BlowUp { time: f64 },
    #[error("integrator step size underflow at time {time}")]
    StepSizeUnderflow { time: f64 },
    #[error("point ({x}, {y}) cannot be placed relative to the tube")]
    OutsideTube { x: f64, y: f64 },
    #[error("{} grid nodes are not covered by any tube band", .nodes.len())]
    CoverageGap { nodes: Vec<(usize, usize)> },
    #[error("linear algebra failure: {0}")]
    Numerical(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
