use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mode graph: {0}")]
    InvalidGraph(String),

    #[error("invalid netlist: {0}")]
    InvalidNetlist(String),

    #[error("invalid harmonic grid: {0}")]
    InvalidGrid(String),

    #[error("singular system at {freq_hz:.6e} Hz{}", context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    Singular {
        freq_hz: f64,
        context: Option<String>,
    },

    #[error("pump calibration failed: {0}")]
    Calibration(String),

    #[error("at grid point {index}: {source}")]
    AtGridPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors raised by a linear solve or root search rather than by bad input.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::Singular { .. } | Error::Calibration(_) => true,
            Error::AtGridPoint { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
