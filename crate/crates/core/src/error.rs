use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(usize),

    #[error("node index {index} out of range for a network of {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("network file line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid pinning configuration: {0}")]
    InvalidPinning(String),

    #[error("pinning set must not be empty")]
    EmptyPinningSet,

    #[error("eigensolver did not converge on {dim}x{dim} matrix:\n{dump}")]
    EigenNonConvergence { dim: usize, dump: String },

    #[error("bound not applicable: {0}")]
    NotApplicable(String),

    #[error("negative radicand {radicand:e} in upper bound (beta = {beta}, sum term = {sum_term}, N - m = {free})")]
    NegativeRadicand {
        radicand: f64,
        beta: f64,
        sum_term: f64,
        free: usize,
    },

    #[error("layer recursion has no root in (0, {scan_max}]")]
    NoPositiveRoot { scan_max: f64 },

    #[error("requested m = {m} exceeds network size {n}")]
    TooManyPins { m: usize, n: usize },

    #[error("network cannot be covered: nodes {unreachable:?} are unreachable from every candidate pinning set")]
    Uncoverable { unreachable: Vec<usize> },

    #[error("target rate unattainable with gain {gain}: best achieved phi = {best_phi} < mu* = {mu_star}")]
    Unattainable {
        gain: f64,
        mu_star: f64,
        best_phi: f64,
    },

    #[error("C({n}, {m}) = {count} subsets exceeds the exhaustive-search guard of {limit}; use algorithm1 instead")]
    GuardExceeded {
        n: usize,
        m: usize,
        count: u128,
        limit: u128,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step {dt} s violates the explicit-integrator stability guard; use dt <= {suggested_dt:e}")]
    StepTooLarge { dt: f64, suggested_dt: f64 },

    #[error("non-finite state at t = {t} s: {detail}")]
    NonFinite { t: f64, detail: String },

    #[error("simulation unstable at t = {t} s: {detail}")]
    Unstable { t: f64, detail: String },

    #[error("trajectory did not settle within the horizon")]
    NotSettled,

    #[error("singular nodal admittance matrix")]
    SingularAdmittance,

    #[error("plant configuration: {0}")]
    Config(String),
}
