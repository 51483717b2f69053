use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("basis truncation too small: {0}")]
    Truncation(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("index {index} out of range (retained levels: {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("ambiguous dressed-branch identification at flux {flux}: {detail}; raise the photon/qubit truncation or move the flux point")]
    BranchAmbiguity { flux: f64, detail: String },

    #[error("preprocessing failed: {0}")]
    Preprocessing(String),

    #[error("no resonance feature detected: {0}")]
    NoResonance(String),

    #[error("trace is bifurcated: {0}")]
    Bifurcated(String),

    #[error("too few points: {0}")]
    TooFewPoints(String),

    #[error("invalid fit problem: {0}")]
    InvalidProblem(String),

    #[error("fit aborted: {0}")]
    FitAborted(String),

    #[error("empty loss-channel list")]
    EmptyChannels,
}
