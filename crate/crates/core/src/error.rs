use thiserror::Error;

/// Problems detected while building or validating a system layout.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("component type `{0}` is declared more than once")]
    DuplicateType(String),
    #[error("component type `{name}` must have a count of at least 1")]
    EmptyType { name: String },
    #[error("component type `{name}` has invalid shape {shape}; it must be a finite positive number")]
    InvalidShape { name: String, shape: String },
    #[error("`{0}` is not a valid identifier (use letters, digits, `_` or `-`)")]
    InvalidIdentifier(String),
    #[error("{kind} gate has no children")]
    EmptyGate { kind: &'static str },
    #[error("k_of_n threshold {k} is outside 1..={children}")]
    InvalidThreshold { k: usize, children: usize },
    #[error("instance `{instance}` refers to unknown component type `{type_name}`")]
    UnknownType { instance: String, type_name: String },
    #[error("instance `{instance}` is used with type `{first}` and with type `{second}`")]
    DuplicateInstance {
        instance: String,
        first: String,
        second: String,
    },
    #[error("component type `{name}` declares {declared} instances but the structure uses {found}")]
    CountMismatch {
        name: String,
        declared: usize,
        found: usize,
    },
    #[error("structure has {n} components, above the enumeration limit of {limit}")]
    EnumerationLimit { n: usize, limit: usize },
    #[error("boundary condition violated: {0}")]
    Boundary(&'static str),
    #[error("state vector has length {found}, the system has {expected} components")]
    StateLength { expected: usize, found: usize },
    #[error("unknown component instance `{0}`")]
    UnknownInstance(String),
}

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Structure(#[from] StructureError),

    #[error("invalid {what}: {detail}")]
    InvalidParameter { what: &'static str, detail: String },

    #[error("invalid observations: {0}")]
    InvalidObservation(String),

    #[error("index {index:?} out of range for bounds {bounds:?}")]
    IndexOutOfRange { index: Vec<i64>, bounds: Vec<usize> },

    #[error("inputs do not match the survival signature: {0}")]
    SignatureMismatch(String),

    #[error("moment undefined: {0}")]
    UndefinedMoment(String),

    #[error("count distribution failed to normalize (sum {sum:e}, worst term magnitude {worst_term:e})")]
    Normalization { sum: f64, worst_term: f64 },

    #[error("quadrature did not converge (estimated error {achieved:e}, requested {requested:e})")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("grid oracle needs {evaluations} evaluations, limit is {limit}")]
    GridTooLarge { evaluations: u128, limit: u128 },

    #[error("system reliability at t_now is zero; the conditioned curve is undefined")]
    SystemAlreadyFailed,

    #[error("{0}")]
    Document(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(what: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            what,
            detail: detail.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Normalization { .. } | Error::Quadrature { .. } | Error::SystemAlreadyFailed
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
