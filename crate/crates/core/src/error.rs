use thiserror::Error;

/// Errors raised by the simulator and its analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator lives on the wrong space: expected {expected}, found {found}")]
    WrongSpace { expected: String, found: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace:.12} instead of 1")]
    TraceNotUnit { trace: f64 },

    #[error("state is not positive (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("population {population:.3e} in the top Fock levels exceeds tolerance {tolerance:.1e}; raise n_max")]
    TruncationTail { population: f64, tolerance: f64 },

    #[error("displacement by |alpha| = {alpha_abs:.3} is not unitary on the retained subspace (deviation {deviation:.3e}); raise n_max")]
    DisplacementTruncation { alpha_abs: f64, deviation: f64 },

    #[error("trace drifted by {drift:.3e} at t = {time:.6e} s; reduce the time step")]
    TraceDrift { drift: f64, time: f64 },

    #[error("steady state is not unique: {count} eigenvalues within {threshold:.3e} of zero")]
    NonUniqueSteadyState { count: usize, threshold: f64 },

    #[error(
        "eigenvalue gap too small for a reliable steady state (|lambda_0| = {lambda0:.3e}, |lambda_1| = {lambda1:.3e})"
    )]
    SmallSpectralGap { lambda0: f64, lambda1: f64 },

    #[error("steady state requires at least one nonzero dissipation rate")]
    NoDissipation,

    #[error("no classical limit cycle: gamma1_plus ({plus}) < gamma1_minus ({minus})")]
    NoLimitCycle { plus: f64, minus: f64 },

    #[error("pulse kind {0} has no sideband Hamiltonian")]
    NotASideband(String),

    #[error("linear solve failed: zero pivot at column {0}")]
    SingularMatrix(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
