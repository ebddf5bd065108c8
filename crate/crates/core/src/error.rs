use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("singular matrix in linear solve")]
    Singular,
    #[error("sideband order {m} exceeds Fock dimension {n_dim}")]
    SidebandOutOfRange { m: i64, n_dim: usize },
    #[error("Dyson/Magnus order {0} outside supported range 1..=5")]
    OrderOutOfRange(usize),
    #[error("propagator order {0} outside supported range 2..=5")]
    PropagatorOrder(usize),
    #[error("beat note {0} is zero; first-order term does not vanish")]
    ZeroBeatNote(i64),
    #[error("Trotter step count {requested} below required minimum {required}")]
    TooFewSteps { requested: usize, required: usize },
    #[error("omega_4 is not real: s^2 = {s2} < K^2 - L^2 = {gap}")]
    ComplexAmplitude { s2: f64, gap: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
