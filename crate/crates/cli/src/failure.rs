use thiserror::Error;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] rdnet_core::Error),
    #[error(transparent)]
    Experiment(#[from] rdnet_experiments::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl From<rdnet_core::DomainError> for Failure {
    fn from(e: rdnet_core::DomainError) -> Self {
        Failure::Model(e.into())
    }
}

fn model_code(e: &rdnet_core::Error) -> u8 {
    use rdnet_core::Error as E;
    match e {
        E::SingularSystem { .. }
        | E::NonPositiveEffort { .. }
        | E::NoConvergence { .. }
        | E::ProfitCrossCheckFailed { .. }
        | E::BracketFailure { .. } => 3,
        E::TooLarge { .. } => 4,
        _ => 2,
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Invalid(_) | Failure::Io { .. } => 2,
            Failure::Model(e) => model_code(e),
            Failure::Experiment(rdnet_experiments::Error::Model(e)) => model_code(e),
            Failure::Experiment(rdnet_experiments::Error::UnknownExperiment(_)) => 5,
            Failure::Experiment(_) => 2,
        }
    }
}
