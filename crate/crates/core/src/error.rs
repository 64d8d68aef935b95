//! Error type shared by all modules of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    ModulusNotPrime(u64),
    #[error("modulus {0} out of range (need 3 <= N <= 2^31)")]
    ModulusOutOfRange(u64),
    #[error("value {value} is not a residue mod {n}")]
    ResidueOutOfRange { value: u64, n: u64 },
    #[error("input {0} too wide for fast reduction (need x < 2^62)")]
    ReduceInputTooWide(u64),
    #[error("0 has no modular inverse")]
    NoInverse,
    #[error("stride B={b} must lie in [1, {n})")]
    InvalidStride { b: u64, n: u64 },
    #[error("offset A={a} must lie in [0, {n})")]
    InvalidOffset { a: u64, n: u64 },
    #[error("position {i} out of range (permutation has {n} positions)")]
    PositionOutOfRange { i: u64, n: u64 },
    #[error("prefix length {len} exceeds permutation size {n}")]
    PrefixTooLong { len: u64, n: u64 },
    #[error("aggregate prefix length {total} exceeds symbol-ID space {n}")]
    AggregateTooLong { total: u64, n: u64 },
    #[error("difference-set bound M={m} too large: need M^2 < N/2 for N={n}")]
    DiffSetTooLarge { m: u64, n: u64 },
    #[error("difference-set bound M={0} must be at least 2")]
    DiffSetTooSmall(u64),
    #[error("target distance d={d} out of range [2, 2M] for M={m}")]
    DistanceOutOfRange { d: u64, m: u64 },
    #[error("candidate cap must be nonzero")]
    ZeroCap,
    #[error("sieve strategy limited to N <= 2^24, got N={0}")]
    SieveModulusTooLarge(u64),
    #[error("invalid partition: Kt={kt}, Z={z}")]
    InvalidPartition { kt: u64, z: u64 },
    #[error("symbol size T must be >= 1")]
    InvalidSymbolSize,
    #[error("object size F must be >= 1")]
    EmptyObject,
    #[error("working size WS={ws} holds no symbol of size T={t}")]
    WorkingSizeTooSmall { ws: u64, t: u64 },
    #[error("stream position {i} out of range for Z={z} blocks")]
    StreamPositionOutOfRange { i: u64, z: u64 },
    #[error("graph node {0:?} is not defined")]
    UnknownNode(String),
    #[error("self-loop on node {0:?}")]
    SelfLoop(String),
    #[error("duplicate node {0:?}")]
    DuplicateNode(String),
    #[error("palette is empty")]
    EmptyPalette,
    #[error("palette exhausted at node {node:?} ({have} colors available)")]
    InsufficientPalette { node: String, have: usize },
    #[error("delta must lie in (0, 1), got {0}")]
    DeltaOutOfRange(f64),
    #[error("theorem precondition M^2 <= 2N violated: M={m}, N={n}")]
    TheoremPreconditionViolated { m: u64, n: u64 },
    #[error("experiment config: {0}")]
    InvalidConfig(String),
    #[error("set audit failed: {0}")]
    AuditFailure(String),
    #[error("no reachable encoding nodes")]
    EmptyClientView,
    #[error("budget {budget} below required symbol count {required}")]
    BudgetTooSmall { budget: u64, required: u64 },
    #[error("malformed file: {0}")]
    MalformedFile(String),
}
