use thiserror::Error;

/// Errors produced by the kinematics, gait, transmission and pipeline layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(
        "target ({x:.3}, {y:.3}) is outside the reachable annulus \
         [{min_reach:.3}, {max_reach:.3}] (distance {distance:.3})"
    )]
    UnreachableTarget {
        x: f64,
        y: f64,
        distance: f64,
        min_reach: f64,
        max_reach: f64,
    },

    #[error("tendon jacobian is singular (|det| = {det:.3e} < {threshold:.1e})")]
    SingularJacobian { det: f64, threshold: f64 },

    #[error("trajectory sample {sample} is unreachable: {source}")]
    UnreachableTrajectory {
        sample: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("gait plan invariant '{invariant}' violated at sample {sample}: {detail}")]
    PlanInvariant {
        invariant: &'static str,
        sample: usize,
        detail: String,
    },

    #[error("joint {joint} half-angle {angle:.4} rad exceeds limit {limit:.4} rad")]
    ChainJointLimit {
        joint: usize,
        angle: f64,
        limit: f64,
    },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("command series needs at least two samples")]
    EmptySeries,

    #[error("knot timestamps must be strictly increasing (violated at index {index})")]
    NonMonotoneTime { index: usize },

    #[error("no feasible design found across {starts} starts")]
    NoFeasiblePoint { starts: usize },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
