use thiserror::Error;

/// Errors reported by the steering analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no (or too few) records match the requested setting pair: found {found}, need at least 2")]
    NoMatchingRecords { found: usize },

    #[error("all outcomes on axis {axis} are identical ({value}); bin width would be zero")]
    DegenerateRange { axis: char, value: f64 },

    #[error("delta must be nonnegative, got {0}")]
    NegativeDelta(f64),

    #[error("transmission must lie in [0, 1], got {0}")]
    OutOfRangeTransmission(f64),

    #[error("marginal variance of the conditioning quadrature is not positive ({0})")]
    SingularMarginal(f64),

    #[error("covariance matrix violates the uncertainty bound (min eigenvalue of cov + i*Omega is {0:.3e})")]
    NonPhysicalState(f64),

    #[error("delta = {0} exceeds the Gaussian threshold domain (radicand negative); no Gaussian state violates delta-LR there")]
    DeltaTooLarge(f64),

    #[error("epsilon must lie in (0, 1], got {0}")]
    EpsilonOutOfRange(f64),

    #[error("|<J^X>| must be positive, got {0}")]
    NonPositiveJx(f64),

    #[error("Fock cutoff {cutoff} too small: tail mass tanh(r)^(2(N+1)) = {tail:.3e} exceeds 1e-10")]
    CutoffTooSmall { cutoff: usize, tail: f64 },

    #[error("support n0 = {n0} exceeds the Fock cutoff {cutoff}")]
    SupportExceedsCutoff { n0: usize, cutoff: usize },

    #[error("Duan parameter must lie in (0, 1], got {0}")]
    DOutOfRange(f64),

    #[error("local-oscillator intensity {0} below the linearized readout regime (need >= 10)")]
    RegimeViolation(f64),

    #[error("invalid amplitude table: {0}")]
    InvalidAmplitudes(String),

    #[error("record schema error at line {line}: {msg}")]
    Schema { line: usize, msg: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code per the CLI contract: 2 for schema/validation
    /// problems, 3 for numeric failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Schema { .. }
            | Error::InsufficientData(_)
            | Error::InvalidParameter(_)
            | Error::NoMatchingRecords { .. }
            | Error::OutOfRangeTransmission(_)
            | Error::NegativeDelta(_)
            | Error::EpsilonOutOfRange(_)
            | Error::DOutOfRange(_)
            | Error::NonPositiveJx(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
