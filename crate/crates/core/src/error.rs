//! Shared error type for the whole crate.

/// Everything that can go wrong across geometry validation, certification,
/// and the finite-difference solver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A waveguide description violates its own constraints (bad obstacle
    /// half-width, profile out of range, too few periods, ...).
    #[error("invalid waveguide: {0}")]
    InvalidSpec(String),

    /// Test-function or solver parameters outside their legal ranges.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The requested symmetry class has no trapped-mode problem in this
    /// setting (its threshold is not below the relevant continuum).
    #[error("symmetry class m={m} is not admissible here: {reason}")]
    InadmissibleClass { m: usize, reason: String },

    /// Point evaluation requested outside the open free region.
    #[error("point (x={x}, y={y}) lies outside the free region")]
    OutOfDomain { x: f64, y: f64 },

    /// The closed-form quotient only covers Neumann walls with centered
    /// obstacles; other settings must use the quadrature path.
    #[error("closed-form quotient is not available for this setting: {0}")]
    UnsupportedSetting(String),

    /// The optimizer exhausted its budget without pushing the quotient
    /// below the class threshold by a trustworthy margin.
    #[error(
        "certification failed for m={m}: best quotient {q_star} vs threshold {threshold} \
         (margin {margin:e})"
    )]
    CertificationFailed {
        m: usize,
        q_star: f64,
        threshold: f64,
        margin: f64,
    },

    /// Grid steps that do not place obstacle tips, slit rows, and the
    /// truncation boundary exactly on nodes.
    #[error("grid misaligned: {0}")]
    GridMisaligned(String),

    /// The iterative eigensolver did not reach its residual tolerance.
    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
