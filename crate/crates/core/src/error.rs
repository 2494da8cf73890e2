use num_complex::Complex64;

/// Errors surfaced by the model, engine, closed forms and oracle.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The vectorized Lyapunov system is singular (an eigenvalue pair of the
    /// Jacobian sums to zero) or the Jacobian is not strictly stable.
    #[error("degenerate linear system: {0}")]
    DegenerateSystem(String),

    /// s̄ coincides with an eigenvalue of the Jacobian transpose.
    #[error("resolvent is singular at s\u{0304} = {0}")]
    SingularResolvent(Complex64),

    /// A rational Laplace expression was evaluated at a pole.
    #[error("Laplace expression evaluated at a pole, s\u{0304} = {0}")]
    PoleAt(Complex64),

    /// Closed forms divide by Ḡ and require ξ·2C > (ξ−1)²/4.
    #[error("oscillatory regime required: \u{03be}\u{00b7}2C must exceed (\u{03be}\u{2212}1)\u{00b2}/4 (got \u{03be} = {xi}, C = {c})")]
    OscillatoryRegimeRequired { xi: f64, c: f64 },

    /// Composite Hilbert-space dimension exceeds the desk-scale guard.
    #[error("Hilbert-space dimension {dim} exceeds the guard of {max}")]
    DimensionGuard { dim: usize, max: usize },

    /// A solved state failed one of its self-consistency checks.
    #[error("diagnostics failure: {0}")]
    Diagnostics(String),

    #[error("integration failure: {0}")]
    Integration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
