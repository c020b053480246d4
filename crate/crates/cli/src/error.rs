use std::fmt;

use maxpsh::LabError;

/// Process exit codes.
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_REFUSED: u8 = 3;
pub const EXIT_RESOURCE: u8 = 4;

/// A failed run: what to print and which code to exit with.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(msg: impl fmt::Display) -> Self {
        Failure { code: EXIT_CONFIG, message: msg.to_string() }
    }

    pub fn resource(msg: impl fmt::Display) -> Self {
        Failure { code: EXIT_RESOURCE, message: msg.to_string() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Errors raised while computing. Parameter-domain problems the config
/// check could not see are still config errors; everything else is a
/// refused precondition.
impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        let code = match e {
            LabError::DegenerateBox { .. }
            | LabError::InvalidSpacing(_)
            | LabError::TooCoarse { .. }
            | LabError::UnsupportedDimension(_)
            | LabError::Parse { .. }
            | LabError::InvalidParameter(_)
            | LabError::IncompatibleScheme(_)
            | LabError::UnsupportedCurrent(_)
            | LabError::RadiusConstraint(_)
            | LabError::GridMismatch(_)
            | LabError::EmptyRegion => EXIT_CONFIG,
            _ => EXIT_REFUSED,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: format!("i/o: {e}") }
    }
}
