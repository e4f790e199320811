use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("edge list is empty")]
    EmptyEdgeList,
    #[error("conductance {conductance} on edge {from}-{to} is not a positive finite number")]
    NonPositiveConductance {
        from: String,
        to: String,
        conductance: f64,
    },
    #[error("self-loop at vertex {0}")]
    SelfLoop(String),
    #[error("network is not connected ({reached} of {total} vertices reachable)")]
    Disconnected { reached: usize, total: usize },
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("vertices must be distinct, got {0} twice")]
    SameVertex(String),
    #[error("grounded linear system is singular")]
    SingularSystem,
    #[error("invalid transition kernel: {0}")]
    InvalidKernel(String),
    #[error("kernel puts mass {mass} on self-loop at state {state}")]
    HasSelfLoopMass { state: usize, mass: f64 },
    #[error("kernel is not irreducible")]
    NotIrreducible,
    #[error("kernel is not reversible: detailed balance fails between states {from} and {to} (relative residual {residual:e})")]
    NotReversible {
        from: usize,
        to: usize,
        residual: f64,
    },
    #[error("{capped} of {trials} trials exceeded the step cap of {step_cap}")]
    CapExceeded {
        capped: u64,
        trials: u64,
        step_cap: u64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
