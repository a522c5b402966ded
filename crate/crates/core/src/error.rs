use thiserror::Error;

/// Errors raised by the solvers and the run orchestration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate Dirac symbol: |a|^2 + b^2 = {norm_sq:e} is below the numeric floor")]
    DegenerateSymbol { norm_sq: f64 },

    #[error("eigenvalue {eigenvalue:e} lies within the gap floor {floor:e}")]
    NearZeroEigenvalue { eigenvalue: f64, floor: f64 },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("{what} did not converge after {iterations} iterations (last residual {last:e})", last = residuals.last().copied().unwrap_or(f64::NAN))]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("constraint violation in {what}: worst value {worst:e} at index {index}")]
    Constraint {
        what: String,
        worst: f64,
        index: usize,
    },

    #[error("lattice has {size} points, above the cap of {cap}")]
    LatticeTooLarge { size: usize, cap: usize },

    #[error("line search failed: step size fell below {0:e}")]
    StepSize(f64),

    #[error("starts disagree: sup-norm spread {spread:e} exceeds {tol:e}")]
    Uniqueness { spread: f64, tol: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Coupling constants must satisfy 0 <= alpha < 4/pi.
pub fn check_coupling(alpha: f64) -> Result<()> {
    let limit = 4.0 / std::f64::consts::PI;
    if !(alpha >= 0.0 && alpha < limit) {
        return Err(Error::Parameter(format!(
            "alpha = {alpha} violates the hypothesis 0 ≤ α < 4/π (4/π ≈ {limit:.6})"
        )));
    }
    Ok(())
}
