//! Library half of the `delay-h2` command line tool: file formats,
//! deterministic reporting and error-to-exit-code mapping.

pub mod io;
pub mod report;

use delay_h2::Error;

/// CLI failure with its process exit code.
///
/// 1 = a diagnostic check failed, 2 = input validation failed,
/// 3 = a numerical routine failed.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub exit_code: u8,
}

impl CliError {
    pub fn validation(message: String) -> Self {
        Self { message, exit_code: 2 }
    }

    pub fn numerical(message: String) -> Self {
        Self { message, exit_code: 3 }
    }

    pub fn check_failed(message: String) -> Self {
        Self { message, exit_code: 1 }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let exit_code = match e {
            Error::PlantInvariant(_)
            | Error::PatternInvariant(_)
            | Error::DimensionMismatch { .. }
            | Error::MismatchedPartitions { .. }
            | Error::DelayExceedsHorizon { .. }
            | Error::NonFinite { .. }
            | Error::NotSymmetric { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::OracleConfig(_) => 2,
            Error::NoConvergence { .. }
            | Error::NotStabilizing { .. }
            | Error::Unstable { .. }
            | Error::SingularResolvent { .. }
            | Error::NonStrictlyProper { .. }
            | Error::SingularHessian { .. }
            | Error::IllConditioned { .. } => 3,
        };
        Self { message: e.to_string(), exit_code }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}
