use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not one of the preparation angles 0, pi/2, pi, 3pi/2")]
    InvalidPreparationAngle(f64),

    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),

    #[error("loss probability must lie in [0, 1), got {0}")]
    InvalidLossProbability(f64),

    #[error("max_rounds must be at least 1")]
    ZeroMaxRounds,

    #[error("no successful round within {max_rounds} attempts")]
    RoundLimitExceeded { max_rounds: u32 },

    #[error("trial count must be at least 1")]
    ZeroTrials,

    #[error("sweep grid must have at least one alpha and one beta value")]
    EmptyGrid,

    #[error("transcript line {line}: {reason}")]
    TranscriptParse { line: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
