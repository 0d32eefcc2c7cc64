use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular {0}")]
    Singular(&'static str),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no feasible solution: {0}")]
    NoSolution(String),
}

impl Error {
    /// Input errors map to exit code 2, everything else is a domain problem.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Invalid(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
