use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A file could not be read or did not parse under the documented schema.
    #[error("parse error in {source_name}: {detail}")]
    Parse { source_name: String, detail: String },

    /// Parsed data violates a physical invariant (triangle rules, sign
    /// constraints, B_hfs on a J=1/2 level, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// An argument is outside the domain of an operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A beam or preset configuration is inconsistent (detuning class,
    /// polarization/state combination, bad knob name, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A laser frequency is too close to an atomic resonance for the
    /// far-off-resonance formula to be meaningful.
    #[error(
        "near-resonance: laser at {omega_laser:.6e} rad/s is within the guard \
         band of transition at {omega_transition:.6e} rad/s ({channel})"
    )]
    NearResonance {
        omega_laser: f64,
        omega_transition: f64,
        channel: String,
    },

    /// An iterative refinement failed to converge.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A root bracket does not contain a sign change.
    #[error("bracketing error: {0}")]
    Bracketing(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that indicate bad usage or configuration, as opposed
    /// to numerical trouble during an otherwise valid run.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation(_)
                | Error::InvalidInput(_)
                | Error::Config(_)
                | Error::NearResonance { .. }
        )
    }
}
