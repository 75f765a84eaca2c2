use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature order {order} is not supported (rule-too-large or zero)")]
    RuleTooLarge { order: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range for truncation {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("spectral-failure: eigensolver did not converge at index {index} after {iterations} iterations")]
    SpectralFailure { index: usize, iterations: usize },

    #[error("convention-violation: mode {mode} has imaginary residue {residue:e}")]
    ConventionViolation { mode: usize, residue: f64 },

    #[error("recurrence-overflow: last finite degree was {last_valid}")]
    RecurrenceOverflow { last_valid: usize },

    #[error("series-stall: no convergence within {terms} terms at xi = {xi}")]
    SeriesStall { xi: f64, terms: usize },

    #[error("series for mode {mode} is unreliable (estimated error {estimate:e})")]
    SeriesUnreliable { mode: usize, estimate: f64 },

    #[error("quadrature-unresolved: doubling the order moved entries by {drift:e}")]
    QuadratureUnresolved { drift: f64 },

    #[error("xi-quadrature-unresolved: doubling the xi-order moved mode {mode} by {drift:e}")]
    XiQuadratureUnresolved { mode: usize, drift: f64 },

    #[error("stencil-out-of-domain: stencil around y = {y} leaves (-1, 1)")]
    StencilOutOfDomain { y: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}
