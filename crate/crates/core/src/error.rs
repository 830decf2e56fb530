use thiserror::Error;

/// Errors surfaced by the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Normalization of a (numerically) constant sequence is undefined.
    #[error("degenerate sequence: population variance {variance:.3e} is below 1e-24")]
    DegenerateSequence { variance: f64 },

    /// A terminal frequency collides with a channel eigenvalue; the
    /// second-order reduction diverges there.
    #[error("resonant level: |E_k - omega({terminal})| = {gap:.3e} <= gap_tol = {gap_tol:.3e}")]
    ResonantLevel {
        terminal: &'static str,
        gap: f64,
        gap_tol: f64,
    },

    #[error("eigensolver did not converge for eigenvalue {index} within {max_sweeps} sweeps")]
    ConvergenceFailure { index: usize, max_sweeps: usize },

    /// J' = 0: the two-level system never transfers population.
    #[error("null dynamics: effective coupling J' is zero")]
    NullDynamics,

    #[error("transition amplitude {0} lies outside [0, 1]")]
    AmplitudeDomain(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed {file}: {detail}")]
    MalformedFile { file: String, detail: String },
}

impl Error {
    /// Short machine-readable tag, used for failure accounting in sweeps.
    pub fn reason_code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::DegenerateSequence { .. } => "degenerate_sequence",
            Error::ResonantLevel { .. } => "resonant_level",
            Error::ConvergenceFailure { .. } => "convergence_failure",
            Error::NullDynamics => "null_dynamics",
            Error::AmplitudeDomain(_) => "amplitude_domain",
            Error::Io(_) => "io",
            Error::MalformedFile { .. } => "malformed_file",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
