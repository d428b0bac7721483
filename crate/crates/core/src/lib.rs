//! Simulation core for a clustered vehicular network secured by a
//! dual-layer blockchain ledger.
//!
//! The crate models a fleet of vehicles grouped into RSU-anchored clusters.
//! Cluster heads are elected by weighted voting, every accepted message is
//! committed to a per-cluster hash chain that is periodically anchored into a
//! cloud chain, an SDN-style controller routes traffic under an NFV capacity
//! model, and an isolation forest screens flows for intrusions. Everything is
//! driven by a single seed: two runs with the same configuration produce
//! byte-identical outputs.

pub mod cluster;
pub mod config;
pub mod control;
pub mod crypto;
pub mod domain;
pub mod engine;
pub mod error;
pub mod ids;
pub mod ledger;
pub mod metrics;
pub mod rng;

pub use cluster::{CandidateScore, Cluster, ChurnOutcome, FormationOutcome};
pub use config::{
    Area, DelayModel, ElectionWeights, EnergyModel, GasModel, IdsSettings, NfvPolicy, RadioModel,
    ScenarioConfig,
};
pub use control::{
    Controller, DestClass, FlowAction, FlowMatch, FlowRule, FlowTable, TwoStepOutcome,
    TwoStepReason, VnfAllocation,
};
pub use crypto::{ClusterEnvelope, ContentStore, KeyPair, SignedMessage, VerifyOutcome};
pub use domain::{ClusterId, Point, Rsu, RsuId, Vehicle, VehicleId};
pub use engine::{
    run, run_sweep, ClusterSnapshot, Counters, EventRecord, EventSink, JsonlSink, NullSink,
    RunOutput, RunReport, SimState, SweepCell, VecSink,
};
pub use error::{
    ClusterError, ConfigError, ConfigLoadError, EngineError, IdsError, KpiCsvError, LedgerError,
    ReplayError,
};
pub use ids::{EvalReport, FlowFeatures, ForestSettings, IsolationForest, IsolationTree, Label};
pub use ledger::{Block, ChainStatus, Ledger, LedgerTier, LineFit, Tx};
pub use metrics::{compute_kpis, replay_kpis, MetricsRow, ReportBundle, WindowSample};
