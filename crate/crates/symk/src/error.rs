use thiserror::Error;

/// Errors surfaced by the exact-arithmetic and K-group layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus is not irreducible")]
    ReducibleModulus,
    #[error("not a subfield (degree {sub} does not divide {sup})")]
    NotASubfield { sub: usize, sup: usize },
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("element is not a generator of the unit group")]
    NotGenerator,
    #[error("zero element has no discrete logarithm")]
    ZeroElement,
    #[error("zero function")]
    ZeroFunction,
    #[error("function has a pole at the place")]
    PoleAtPlace,
    #[error("enumeration budget exceeded: {0}")]
    TooLarge(String),
    #[error("singular Weierstrass equation")]
    SingularCurve,
    #[error("base field too small for unit-multiplier avoidance")]
    BaseFieldTooSmall,
    #[error("relation datum violates the regularity condition at {0}")]
    ConditionViolated(String),
    #[error("residue field degree {0} exceeds the extension budget")]
    DegreeOverflow(usize),
    #[error("section is not regular at the place")]
    NotRegular,
    #[error("section is not regular on the open complement of the unit fiber")]
    NotRegularOnCPrime,
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse<S: Into<String>>(pos: usize, msg: S) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }
}
