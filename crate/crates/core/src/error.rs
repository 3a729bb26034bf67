use std::fmt;

use thiserror::Error;

/// Syntax error with the byte offset at which parsing stopped and the set of
/// tokens that would have been accepted there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at byte {}: expected ", self.offset)?;
        match self.expected.as_slice() {
            [] => write!(f, "nothing")?,
            [one] => write!(f, "{one}")?,
            many => write!(f, "one of {}", many.join(", "))?,
        }
        match &self.found {
            Some(tok) => write!(f, ", found `{tok}`"),
            None => write!(f, ", found end of input"),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("threshold {0} lies outside [0,1]")]
    ThresholdOutOfRange(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("derandomizer point {0} out of range")]
    UnknownPoint(usize),
    #[error("invalid model: {0}")]
    Schema(String),
    #[error("distribution mass {0} ≠ 1")]
    DistributionMass(String),
    #[error("derandomizer point {point} has non-positive probability {prob}")]
    NonPositiveProbability { point: String, prob: String },
    #[error("formula `{0}` is not objective (it mentions X, Pr or Ev)")]
    NotObjective(String),
    #[error("evidence space is not simple; use weight_set")]
    NotSimple,
    #[error("impossible observation: no hypothesis gives it positive probability")]
    ImpossibleObservation,
    #[error("local state `{0}` is not realized by any state")]
    UnrealizedLabel(String),
    #[error("algorithm is not complete for `{0}`")]
    NotComplete(String),
    #[error("algorithm does not respect negation for `{0}`")]
    NotNegationRespecting(String),
    #[error("bound hypothesis violated: {0}")]
    BoundHypothesis(String),
    #[error("malformed derandomizer token `{token}`: {reason}")]
    MalformedToken { token: String, reason: String },
    #[error("posterior undefined: prior and weight are contradictory certainties")]
    ZeroDenominator,
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
