//! Error types shared across the crate.

use thiserror::Error;

/// A scenario configuration failed validation. Collects every violation so
/// callers can report them all at once instead of fixing one field at a time.
#[derive(Debug, Error)]
#[error("invalid scenario configuration: {}", violations.join("; "))]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl ConfigError {
    pub fn new(violations: Vec<String>) -> Self {
        Self { violations }
    }
}

/// Reading or parsing a configuration file failed (distinct from semantic
/// validation, which reports [`ConfigError`]).
#[derive(Debug, Error)]
pub enum ConfigLoadError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config file: {0}")]
    Parse(#[from] toml::de::Error),
}

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("block {index}: stored hash does not match recomputed hash")]
    HashMismatch { index: u64 },
    #[error("block {index}: prev_hash does not link to block {}", index - 1)]
    BrokenLink { index: u64 },
    #[error("block {index}: expected index {expected}")]
    IndexGap { index: u64, expected: u64 },
    #[error("block {index}: tx_count {recorded} disagrees with {actual} transactions")]
    TxCountMismatch { index: u64, recorded: u64, actual: u64 },
    #[error("block {index}: gas_used {recorded} disagrees with model cost {expected}")]
    GasMismatch { index: u64, recorded: f64, expected: f64 },
    #[error("ledger has no blocks")]
    Empty,
    #[error("a block must carry at least one transaction")]
    EmptyBlock,
    #[error("gas table fit needs at least two distinct tx counts")]
    DegenerateFit,
}

#[derive(Debug, Error)]
pub enum IdsError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("feature vector has {got} dimensions, forest expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training rows disagree on dimensionality: {first} vs {other}")]
    RaggedRows { first: usize, other: usize },
    #[error("forest settings invalid: {0}")]
    BadSettings(String),
    #[error("evaluation needs at least one labelled sample")]
    NoLabels,
    #[error("prediction and label counts differ: {preds} vs {labels}")]
    LengthMismatch { preds: usize, labels: usize },
    #[error("csv column {0:?} not found in header")]
    MissingColumn(String),
    #[error("unsupported model format version {0}")]
    BadFormatVersion(u32),
    #[error("model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("cannot elect a head from an empty candidate set")]
    NoCandidates,
    #[error("vehicle {0} is not a member of this cluster")]
    NotAMember(crate::domain::VehicleId),
    #[error("vehicle {0} already belongs to a cluster")]
    AlreadyClustered(crate::domain::VehicleId),
    #[error("ledger rejected the vote record: {0}")]
    Ledger(#[from] LedgerError),
}

/// KPI CSV text did not match the fixed schema.
#[derive(Debug, Error)]
pub enum KpiCsvError {
    #[error("unexpected KPI CSV header: {0:?}")]
    Header(String),
    #[error("KPI CSV line {line}: {msg}")]
    Row { line: usize, msg: String },
}

/// The event log could not be replayed into KPIs.
#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("event log references message id {0} before its generate record")]
    UnknownMessage(u64),
    #[error("event log names vehicle {0}, but the scenario has {1} vehicles")]
    VehicleOutOfRange(u64, usize),
    #[error("event rounds are not monotonic: {0} after {1}")]
    NonMonotonicRounds(u64, u64),
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Ids(#[from] IdsError),
    #[error("event sink: {0}")]
    Sink(#[from] std::io::Error),
}
