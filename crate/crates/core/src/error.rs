use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero entry in a quadratic form")]
    ZeroEntry,
    #[error("{value} does not factor over primes up to {bound}")]
    FactorBound { value: u64, bound: u64 },
    #[error("coefficient {0} is not divisible by 2")]
    NotDivisible(i64),
    #[error("expected {expected} variables, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("degree mismatch: {0}")]
    Degree(String),
    #[error("not beta-integral: triangle cell c_{i:?}^{u:?} = {value}")]
    NotBetaIntegral { u: Vec<usize>, i: Vec<usize>, value: String },
    #[error("coefficient {0} is not an integer multiple of <1>")]
    NotInteger(String),
    #[error("parity mismatch: GW {gw} and Welschinger {wel} differ mod 2")]
    Parity { gw: i64, wel: i64 },
    #[error("negative hyperbolic padding {0}")]
    NegativePadding(i64),
    #[error("class outside floor-diagram domain: {0:?}")]
    OutsideDomain(Vec<i64>),
    #[error("invalid surface class: {0}")]
    Surface(String),
    #[error("incomplete table: missing entry {0:?}")]
    MissingEntry(Vec<usize>),
    #[error("asymmetric sum: coefficient of {mask:#b} is {got}, expected {expected}")]
    Asymmetric { mask: u64, got: i64, expected: i64 },
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("unknown fixture {0}")]
    Fixture(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
