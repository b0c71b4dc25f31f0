use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight must be an even integer >= 2, got {0}")]
    InvalidWeight(u32),

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("norm {p}^{f} does not fit in 64 bits")]
    NormOverflow { p: u64, f: u32 },

    #[error("normalized coefficient {0} lies outside [-2, 2] (Deligne bound violated)")]
    DeligneViolation(f64),

    #[error("row {row}: a_p = {ap} violates the Deligne bound at p = {p}, f = {inertia_degree}")]
    DeligneRow {
        row: u64,
        p: u64,
        inertia_degree: u32,
        ap: String,
    },

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("intervals are not sorted and disjoint")]
    OverlappingIntervals,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("limit {limit} exceeds the configured ceiling {ceiling}")]
    CeilingExceeded { limit: usize, ceiling: usize },

    #[error("no coefficient data for the prime {0}")]
    MissingPrime(u64),

    #[error("coefficient table too short: need index {needed}, have {limit}")]
    TableTooShort { needed: usize, limit: usize },

    #[error("prime sites differ: {0} vs {1}")]
    InconsistentSites(String, String),

    #[error("row {row}: {msg}")]
    Malformed { row: u64, msg: String },

    #[error("row {row}: duplicate prime site p = {p}, f = {inertia_degree}")]
    DuplicateSite {
        row: u64,
        p: u64,
        inertia_degree: u32,
    },

    #[error("missing metadata line `# {0}=...`")]
    MissingMetadata(&'static str),

    #[error("character at p = {0} is not trivial; exact signs are undefined")]
    NontrivialCharacter(u64),

    #[error("sieve identity violated at n = {0}")]
    SieveIdentity(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
