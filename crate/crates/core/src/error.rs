use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the models.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A coordinate or parameter fell outside its admissible interval.
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    /// NaN or infinite input where a finite number is required.
    NonFinite(&'static str),
    /// Structurally invalid input (empty profile, mismatched lengths, ...).
    InvalidInput(&'static str),
    /// `Z = -eta0`: the reflection coefficient is undefined.
    SingularReflection,
    /// Parallel combination or recursion hit an exact zero-impedance loop.
    Degenerate(&'static str),
    /// Circuit-model extraction failed.
    Fit(FitError),
}

/// Reasons the unit-cell circuit extraction can fail.
#[derive(Debug, Clone, PartialEq)]
pub enum FitError {
    /// Fewer samples than the extraction needs.
    TooFewSamples { found: usize, required: usize },
    /// The impedance pole (magnetic resonance) is not inside the sweep.
    PoleNotBracketed,
    /// No zero crossing of the reactance (electric resonance) above the pole.
    ZeroNotBracketed,
    /// Extracted values are non-physical (e.g. the zero lies below the pole).
    NonPhysical(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::OutOfRange {
                what,
                value,
                min,
                max,
            } => write!(f, "{what} = {value} is outside [{min}, {max}]"),
            Error::NonFinite(what) => write!(f, "{what} must be finite"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::SingularReflection => {
                write!(f, "surface impedance equals -eta0; reflection is undefined")
            }
            Error::Degenerate(msg) => write!(f, "degenerate network: {msg}"),
            Error::Fit(e) => write!(f, "circuit fit failed: {e}"),
        }
    }
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::TooFewSamples { found, required } => {
                write!(f, "{found} samples, at least {required} required")
            }
            FitError::PoleNotBracketed => write!(
                f,
                "magnetic resonance (impedance pole) is not bracketed by the sweep"
            ),
            FitError::ZeroNotBracketed => write!(
                f,
                "electric resonance (reactance zero above the pole) is not bracketed by the sweep"
            ),
            FitError::NonPhysical(msg) => write!(f, "non-physical extraction: {msg}"),
        }
    }
}

impl From<FitError> for Error {
    fn from(e: FitError) -> Self {
        Error::Fit(e)
    }
}

impl core::error::Error for Error {}
impl core::error::Error for FitError {}
