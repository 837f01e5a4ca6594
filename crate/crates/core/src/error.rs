use alloc::string::String;
use core::fmt;

/// Errors raised by the calculus and its operators.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Observed and reference characteristics carry different keys.
    KeyMismatch { observed: String, reference: String },
    /// A characteristic value or parameter is NaN or infinite.
    InvalidValue { key: String },
    /// Significance requested against participants with no characteristics.
    EmptyParticipants,
    /// The composition is not one of the listed participants.
    NotParticipant { id: String },
    /// RMS of an empty selection.
    EmptySelection,
    /// No history samples fall inside the requested interval.
    EmptyInterval { from: u64, to: u64 },
    /// Interval with `from > to`.
    InvalidInterval { from: u64, to: u64 },
    /// Predicate angle outside `[0, π]`.
    InvalidAngle(f64),
    /// Activation injection must be finite and non-negative.
    InvalidInjection(f64),
    /// Boolean evaluation over no operands.
    EmptyOperands,
    /// Helix turn leaves the representable range.
    Overflow,
    /// A transform names a key absent from the source model.
    KeyNotFound { key: String },
    /// A transform names a composition or expression the system lacks.
    UnknownSource(String),
    /// Enrichment without any composition to merge.
    NothingToMerge,
    /// Two merged models share a key and no rename was requested.
    KeyCollision { key: String },
    /// Decomposition groups do not partition the remaining keys.
    InvalidPartition,
    /// Ownership check failed in an exchange.
    NotOwned { party: String, composition: String },
    /// Exchange chains need at least two parties.
    InvalidChain { parties: usize },
    /// Unknown party id.
    UnknownParty(String),
    /// Sensory capacities must be positive.
    InvalidCapacity,
    /// No memory pattern owns the stub.
    StubNotFound(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::KeyMismatch { observed, reference } => {
                write!(f, "key mismatch: observed `{observed}` vs reference `{reference}`")
            }
            Error::InvalidValue { key } => write!(f, "non-finite value for `{key}`"),
            Error::EmptyParticipants => f.write_str("participants carry no characteristics"),
            Error::NotParticipant { id } => write!(f, "composition `{id}` is not a participant"),
            Error::EmptySelection => f.write_str("harmonic state of an empty selection"),
            Error::EmptyInterval { from, to } => write!(f, "no samples in [{from}, {to}]"),
            Error::InvalidInterval { from, to } => write!(f, "invalid interval [{from}, {to}]"),
            Error::InvalidAngle(theta) => write!(f, "angle {theta} outside [0, π]"),
            Error::InvalidInjection(a) => write!(f, "invalid activation injection {a}"),
            Error::EmptyOperands => f.write_str("no operands"),
            Error::Overflow => f.write_str("helix turn overflows"),
            Error::KeyNotFound { key } => write!(f, "key `{key}` not found"),
            Error::UnknownSource(id) => write!(f, "unknown transform source `{id}`"),
            Error::NothingToMerge => f.write_str("enrichment needs at least one composition"),
            Error::KeyCollision { key } => write!(f, "key `{key}` collides"),
            Error::InvalidPartition => f.write_str("groups do not partition the model keys"),
            Error::NotOwned { party, composition } => {
                write!(f, "`{party}` does not own `{composition}`")
            }
            Error::InvalidChain { parties } => {
                write!(f, "exchange needs at least 2 parties, got {parties}")
            }
            Error::UnknownParty(id) => write!(f, "unknown party `{id}`"),
            Error::InvalidCapacity => f.write_str("capacities must be finite and positive"),
            Error::StubNotFound(id) => write!(f, "stub `{id}` has no memory pattern"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
