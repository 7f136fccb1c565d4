use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("kernel evaluated at its singular point")]
    SingularOrigin,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Gamma quotient has a pole at alpha = {0}")]
    Pole(f64),
    #[error("grid does not resolve the smallest radius: h = {h}, need h <= {needed}")]
    Resolution { h: f64, needed: f64 },
    #[error("cover budget exceeded: sum r^s = {achieved} > H = {budget}")]
    BudgetExceeded { achieved: f64, budget: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no admissible starting radius found below rho* at the given depth")]
    NoStartingRadius,
    #[error("annulus scan exhausted after {0} steps")]
    DepthExhausted(usize),
    #[error("point lies in no cell")]
    OutsideCells,
    #[error("recursion degenerate: cell kept fraction {kept} < {required}")]
    Degenerate { kept: f64, required: f64 },
    #[error("empty family")]
    EmptyFamily,
    #[error("inadmissible weights: {0}")]
    Inadmissible(String),
    #[error("serialization: {0}")]
    Serde(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
