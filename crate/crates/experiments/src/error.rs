use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] rdnet_core::Error),
    #[error("unknown experiment `{0}` (expected one of fig1, fig2, fig3, fig4, fig5, fig6, figA1, figA2)")]
    UnknownExperiment(String),
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error("could not start worker pool: {0}")]
    Pool(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<rdnet_core::DomainError> for Error {
    fn from(e: rdnet_core::DomainError) -> Self {
        Error::Model(e.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
