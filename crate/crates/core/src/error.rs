use thiserror::Error;

#[derive(Debug, Error)]
pub enum MpmError {
    #[error("particle {particle} at ({x}, {y}) has shape support outside the grid")]
    ParticleOutsideGrid { particle: usize, x: f64, y: f64 },

    #[error("particle {particle} inverted: det(F) = {det}")]
    ElementInversion { particle: usize, det: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, MpmError>;

pub(crate) fn config_err(msg: impl Into<String>) -> MpmError {
    MpmError::Config(msg.into())
}
