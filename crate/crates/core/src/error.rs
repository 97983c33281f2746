use thiserror::Error;

/// Errors raised across the crate. Numerical outcomes such as an empty core or
/// an unbounded supremum are *not* errors; they are reported as statuses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability weights sum to zero")]
    ZeroTotal,
    #[error("probability weights must sum to exactly 1, got {0}")]
    NotNormalized(String),
    #[error("negative weight {value} at atom {atom}")]
    NegativeWeight { atom: usize, value: String },
    #[error("{atoms} atoms exceed the limit of {limit} for this operation")]
    TooManyAtoms { atoms: usize, limit: usize },
    #[error("space must have at least one atom")]
    EmptySpace,
    #[error("event {event:#b} references atoms outside a space of {atoms} atoms")]
    ForeignEvent { event: u32, atoms: usize },
    #[error("conditioning event has probability zero")]
    NullConditioningEvent,
    #[error("objects live on spaces with {left} and {right} atoms")]
    SpaceMismatch { left: usize, right: usize },
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("charge is not absolutely continuous with respect to the reference probability (atom {0})")]
    NotAbsolutelyContinuous(usize),
    #[error("distortion is not defined at {0}")]
    DomainError(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("malformed linear program: {0}")]
    MalformedProblem(String),
    #[error("empty list of charges")]
    EmptyList,
    #[error("empty dictionary")]
    EmptyDictionary,
    #[error("pinned variable is not a constant member of the dictionary")]
    PinNotInDictionary,
    #[error("extremum does not exist (status {0})")]
    NoExtremum(String),
    #[error("scale {0} has no valid parameter")]
    OutOfRange(String),
    #[error("recursion depth {t} exceeds the resolution limit {t_max} of the space")]
    ResolutionExceeded { t: usize, t_max: usize },
    #[error("recursion layers are inconsistent: {0}")]
    InconsistentLayers(String),
    #[error("not a 0/1 capacity: {0}")]
    NotACapacity(String),
    #[error("capacity never takes the value 1")]
    AllZero,
    #[error("table has {got} entries, expected {expected}")]
    TableLength { got: usize, expected: usize },
    #[error("game value at the empty event must be 0, got {0}")]
    NotAGame(f64),
    #[error("invalid rational literal {0:?}")]
    BadRational(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown demo {0:?}")]
    UnknownDemo(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
