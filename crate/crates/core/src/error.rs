use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("construction error: {0}")]
    Construction(String),

    /// An improper integral that the theory needs finite was found to diverge.
    #[error("divergent integral `{criterion}` (certificate of {} partial values)", certificate.len())]
    Divergent { criterion: String, certificate: Vec<f64> },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("no convergence after {iterations} iterations (last increment {last_increment:e})")]
    NonConvergence { iterations: usize, last_increment: f64 },

    #[error("solver fault: {0}")]
    SolverFault(String),

    #[error("gluing failed: worst residual {worst:e} at r = {radius:e}")]
    Gluing { worst: f64, radius: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Domain(msg.into()))
}
