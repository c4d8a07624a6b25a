use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The CLI maps [`Error::is_precondition`] failures to exit code 2 and
/// everything else to exit code 1.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} = {value} is out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("malformed spec {input:?}: {reason}")]
    MalformedSpec { input: String, reason: String },

    #[error("value {value} has modulus {modulus} > 1 (functions must map into the closed unit disc)")]
    ValueRange { value: String, modulus: f64 },

    #[error("function {name} is flagged unimodular but |f({p}^{k})| = {modulus}")]
    NotUnimodular {
        name: String,
        p: u64,
        k: u32,
        modulus: f64,
    },

    #[error("congruences are inconsistent: {0}")]
    NoSolution(String),

    #[error("resultant of {0} and {1} vanishes; the polynomials share a root")]
    ResultantZero(String, String),

    #[error("degenerate linear forms: {0}")]
    DegenerateForms(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("sieve bound {bound} insufficient: composite cofactor {cofactor} left at n = {n}; need bound >= {required}")]
    SieveBound {
        n: u64,
        cofactor: u64,
        bound: u64,
        required: u64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("allocation of {0} entries failed")]
    Resource(usize),
}

impl Error {
    /// Whether the error reflects a violated precondition of the caller rather
    /// than an internal failure.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Overflow(_) | Error::Resource(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
