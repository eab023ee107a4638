use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("letter {letter} is not the first letter of its own image")]
    NotAFixedPointSeed { letter: usize },
    #[error("substitution is not primitive")]
    NotPrimitive,
    #[error("no legal letter pair c.{seed} with c ending its own iterated image")]
    NoLegalSeedPair { seed: usize },
    #[error("letter id {0} is outside the alphabet")]
    UnknownLetter(usize),
    #[error("unknown rule `{name}`; built-in rules: {known}")]
    UnknownRule { name: String, known: String },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("window too short: need {needed} sites, have {available}")]
    WindowTooShort { needed: usize, available: usize },
    #[error("no table entry for word {word:?} (source index {position})")]
    MissingTableEntry { word: Vec<u8>, position: i64 },
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("difference bound {z} is not smaller than the extent {extent}")]
    ZTooLarge { z: f64, extent: f64 },
    #[error("requested size {requested} exceeds available data {available}")]
    OutOfRange { requested: f64, available: f64 },
    #[error("correlation sequence is not hermitian at lag {lag}")]
    NotHermitian { lag: i64 },
    #[error("measures live on different grids")]
    GridMismatch,
    #[error("measure has zero total mass")]
    ZeroMass,
    #[error("no point lies at distance {k_radius} from both ends of the sample")]
    EmptyInterior { k_radius: f64 },
    #[error("cluster radius {cluster} does not match requested radius {requested}")]
    IncompatibleCluster { cluster: f64, requested: f64 },
    #[error("not a silver-mean chain: {0}")]
    NotSilverMean(String),
    #[error("coordinates are not strictly increasing at index {index}")]
    NotSorted { index: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
