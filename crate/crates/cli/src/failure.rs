use cdm_core::CdmError;

/// A failed command: exit code plus the message printed to standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_PRECONDITION: u8 = 4;

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_IO,
            message: message.into(),
        }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_PRECONDITION,
            message: message.into(),
        }
    }
}

impl From<CdmError> for Failure {
    fn from(e: CdmError) -> Self {
        let code = match &e {
            CdmError::Config(_) | CdmError::Json(_) => EXIT_CONFIG,
            CdmError::Data(_)
            | CdmError::MissingColumn { .. }
            | CdmError::Row { .. }
            | CdmError::Io { .. }
            | CdmError::Csv { .. } => EXIT_IO,
            CdmError::MissingPropensity(_)
            | CdmError::NotSynthetic(_)
            | CdmError::Precondition(_) => EXIT_PRECONDITION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}
