use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A non-Markovian Hamiltonian was requested without a frequency.
    #[error("non-Markovian Hamiltonian needs a probe frequency and gamma_over_omega0 > 0")]
    MissingFrequency,

    /// The probe frequency sits on a pole of the resolvent.
    #[error("resolvent is singular at ω = {omega} (nearest pole {pole})")]
    Singular { omega: crate::C64, pole: crate::C64 },

    /// The requested quantity degenerates at a Bragg spacing.
    #[error("Bragg-degenerate spacing: |sin φ| = {0:.3e}")]
    BraggDegenerate(f64),

    /// Backward transmission of an atom vanished, so its transfer matrix does not exist.
    #[error("singular transfer matrix: backward transmission vanishes at ω = {0}")]
    SingularTransfer(f64),

    /// An iterative or truncated evaluation missed its tolerance.
    #[error("no convergence: achieved relative change {achieved:.3e} (estimate {estimate})")]
    Convergence { achieved: f64, estimate: crate::C64 },

    /// A qubit index is outside the register.
    #[error("qubit index {index} out of range for {len} qubits")]
    IndexOutOfRange { index: usize, len: usize },

    /// An input state is not normalised.
    #[error("state is not normalised (norm² = {0})")]
    Unnormalized(f64),

    /// Exact residue expansion would exceed its supported size.
    #[error("residue expansion unsupported for N = {n}; use the asymptotic method")]
    ResidueOverflow { n: usize },

    /// Empty frequency grid.
    #[error("empty frequency grid")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
