use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid line section in row {row}: {reason}")]
    InvalidSection { row: usize, reason: String },

    #[error("non-finite frequency {0} Hz")]
    NonFiniteFrequency(f64),

    #[error("degenerate two-port at {frequency_hz} Hz: scattering parameters are not finite")]
    DegenerateNetwork { frequency_hz: f64 },

    #[error("frequency grid is invalid: {0}")]
    InvalidGrid(String),

    #[error("frequency {frequency_hz} Hz lies outside the sampled range [{lo_hz}, {hi_hz}] Hz")]
    OutOfRange { frequency_hz: f64, lo_hz: f64, hi_hz: f64 },

    #[error("degenerate density-of-states normalization: pass-band mean {mean:e} below 1e-6")]
    DegenerateNormalization { mean: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dressed frame undefined: drive amplitude and detuning are both zero")]
    UndefinedFrame,

    #[error("negative rate {name} = {value} 1/us")]
    NegativeRate { name: &'static str, value: f64 },

    #[error("steady state is ambiguous: {count} eigenvalues below threshold {threshold:e}")]
    AmbiguousSteadyState { count: usize, threshold: f64 },

    #[error("no stationary eigenvalue: smallest |lambda| = {smallest:e}, threshold {threshold:e}")]
    NoSteadyState { smallest: f64, threshold: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("readout calibration degenerate on axis {axis}: scale {scale:.4} below 0.05")]
    CalibrationDegenerate { axis: char, scale: f64 },

    #[error("config error in {path}: {reason}")]
    Config { path: PathBuf, reason: String },

    #[error("table {path} row {row}: {reason}")]
    Table { path: PathBuf, row: usize, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// True for problems with user input files or settings, as opposed to
    /// numerical failures during a computation.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::Table { .. }
                | Error::Io { .. }
                | Error::InvalidSection { .. }
                | Error::InvalidGrid(_)
                | Error::InvalidParameter(_)
        )
    }
}
