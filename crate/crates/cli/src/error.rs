use std::fmt;

use cablewalk::Error;

/// Process exit codes.
pub mod exit_code {
    pub const GENERIC: u8 = 1;
    pub const BAD_IMAGE: u8 = 2;
    pub const INSUFFICIENT_SEEDS: u8 = 3;
    pub const NO_WALK_CLOSED: u8 = 4;
    pub const INVALID_CONFIG: u8 = 5;
    pub const SEED_OUTSIDE_IMAGE: u8 = 6;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn generic(message: impl Into<String>) -> Self {
        Self::new(exit_code::GENERIC, message)
    }

    pub fn config(err: impl fmt::Display) -> Self {
        Self::new(exit_code::INVALID_CONFIG, format!("invalid config: {err}"))
    }

    pub fn image(err: impl fmt::Display) -> Self {
        Self::new(exit_code::BAD_IMAGE, format!("cannot read image: {err}"))
    }

    pub fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    /// Maps an error raised while running the pipeline.
    pub fn pipeline(err: Error) -> Self {
        let code = match err {
            Error::InvalidImage(_) | Error::Codec(_) => exit_code::BAD_IMAGE,
            Error::InsufficientSeeds { .. } => exit_code::INSUFFICIENT_SEEDS,
            Error::SeedOutOfBounds { .. } => exit_code::SEED_OUTSIDE_IMAGE,
            Error::Version(_) => exit_code::INVALID_CONFIG,
            _ => exit_code::GENERIC,
        };
        Self::new(code, err.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::generic(e.to_string())
    }
}
