use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polarization type: {0}")]
    InvalidDelta(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("no symmetric lift with scalar in mu_{order} for {point}")]
    NoSymmetricLift { point: String, order: u32 },
    #[error("level subgroup is not a section: {0}")]
    NotASection(String),
    #[error("G'-invariant subspace has dimension {0}, expected 1")]
    InvariantsNotOneDimensional(usize),
    #[error("element is not an involution")]
    NotInvolution,
    #[error("{0}")]
    NotMonomial(String),
    #[error("element does not act diagonally by +-1 on the section basis")]
    NotDiagonalSign,
    #[error("eigenspaces split as {plus}+{minus}, expected 4+4")]
    UnexpectedSplit { plus: usize, minus: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("theta truncation: requested eps {requested:e} unreachable within radius {radius}; achieved bound {achieved:e}")]
    TruncationUnreachable { requested: f64, radius: f64, achieved: f64 },
    #[error("invalid period matrix: {0}")]
    InvalidPeriodMatrix(String),
    #[error("isogeny: {0}")]
    Isogeny(String),
    #[error("base-point-like input: all section values vanish")]
    BasePointLike,
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
