//! Scenario configuration: every knob of a simulation run, loadable from a
//! TOML file with strict key checking, plus whole-config validation that
//! reports all violations at once.

use crate::error::{ConfigError, ConfigLoadError};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Rectangular simulation area in metres. Vehicles reflect at the borders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Area {
    pub width_m: f64,
    pub height_m: f64,
}

impl Default for Area {
    fn default() -> Self {
        Self { width_m: 2000.0, height_m: 2000.0 }
    }
}

/// The five delay terms of the throughput model, in seconds: ledger commit,
/// SDN controller processing, NFV allocation, intra-cluster hop, and the
/// vehicle-to-infrastructure leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelayModel {
    pub blockchain_s: f64,
    pub sdn_s: f64,
    pub nfv_s: f64,
    pub intra_cluster_s: f64,
    pub vehicle_infra_s: f64,
}

impl Default for DelayModel {
    fn default() -> Self {
        Self {
            blockchain_s: 0.2,
            sdn_s: 0.05,
            nfv_s: 0.05,
            intra_cluster_s: 0.1,
            vehicle_infra_s: 0.15,
        }
    }
}

impl DelayModel {
    /// Denominator of the cluster-size throughput model.
    pub fn cluster_denominator_s(&self) -> f64 {
        self.blockchain_s + self.sdn_s + self.nfv_s + self.intra_cluster_s
    }

    /// Denominator of the vehicle-count throughput model.
    pub fn vehicle_denominator_s(&self) -> f64 {
        self.blockchain_s + self.sdn_s + self.nfv_s + self.vehicle_infra_s
    }
}

/// Per-node energy accounting knobs, in millijoules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyModel {
    pub tx_cost_per_byte: f64,
    pub rx_cost_per_byte: f64,
    pub idle_cost_per_round: f64,
    /// Extra drain on cluster heads for aggregation and endorsement duty.
    pub ch_overhead_per_round: f64,
    /// Energy budget every vehicle starts with.
    pub initial_energy_mj: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            tx_cost_per_byte: 0.004,
            rx_cost_per_byte: 0.002,
            idle_cost_per_round: 0.5,
            ch_overhead_per_round: 2.0,
            initial_energy_mj: 50_000.0,
        }
    }
}

/// Relative weights of the three cluster-head election criteria. Must sum
/// to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectionWeights {
    pub signal: f64,
    pub power: f64,
    pub vehicle_type: f64,
}

impl Default for ElectionWeights {
    fn default() -> Self {
        Self { signal: 0.4, power: 0.4, vehicle_type: 0.2 }
    }
}

/// Intrusion-detector hyperparameters plus the size of the synthetic benign
/// sample the engine trains on before a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdsSettings {
    pub trees: usize,
    pub subsample: usize,
    pub threshold: f64,
    pub feature_dim: usize,
    pub train_samples: usize,
}

impl Default for IdsSettings {
    fn default() -> Self {
        Self { trees: 100, subsample: 256, threshold: 0.5, feature_dim: 4, train_samples: 2000 }
    }
}

/// Log-distance radio model parameters shared by clustering and elections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioModel {
    pub tx_power_dbm: f64,
    pub path_loss_exp: f64,
    pub coverage_radius_m: f64,
}

impl Default for RadioModel {
    fn default() -> Self {
        Self { tx_power_dbm: 20.0, path_loss_exp: 2.7, coverage_radius_m: 500.0 }
    }
}

/// Elastic capacity policy for the NFV layer: controllers re-size their
/// capacity every `window_rounds` so that mean load sits at
/// `target_utilization` of allocated throughput.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NfvPolicy {
    pub window_rounds: u64,
    pub target_utilization: f64,
    /// Messages per round one capacity unit absorbs.
    pub unit_capacity_msgs: f64,
    pub max_capacity_units: u32,
}

impl Default for NfvPolicy {
    fn default() -> Self {
        Self {
            window_rounds: 5,
            target_utilization: 0.8,
            unit_capacity_msgs: 10.0,
            max_capacity_units: 1000,
        }
    }
}

/// Per-transaction gas accounting: `cost = (base + complexity) · tx_count +
/// fixed_overhead`. Defaults are the pure-linear mode; a table-calibrated
/// affine mode is produced by the gas-fit routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GasModel {
    pub base_gas_per_tx: f64,
    pub complexity_gas_per_tx: f64,
    pub fixed_overhead: f64,
}

impl Default for GasModel {
    fn default() -> Self {
        Self { base_gas_per_tx: 4000.0, complexity_gas_per_tx: 1400.0, fixed_overhead: 0.0 }
    }
}

impl GasModel {
    /// Gas consumed by a block carrying `tx_count` transactions.
    pub fn cost(&self, tx_count: u64) -> f64 {
        (self.base_gas_per_tx + self.complexity_gas_per_tx) * tx_count as f64
            + self.fixed_overhead
    }
}

/// Full description of one simulation scenario. A TOML file with these exact
/// keys (unknown keys rejected, missing keys defaulted) drives the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_vehicles: usize,
    pub n_rsus: usize,
    pub rounds: u64,
    pub seed: u64,
    /// Inclusive bounds on generated packet sizes, bytes.
    pub packet_size_range: [u32; 2],
    /// Messages each live vehicle generates per round.
    pub messages_per_vehicle_per_round: u32,
    /// Fraction of generated flows drawn from the outlier feature
    /// distribution to exercise the intrusion detector.
    pub malicious_fraction: f64,
    /// Number of SDN controller instances; clusters are assigned round-robin.
    pub controllers: usize,
    /// Clusters re-form every this many rounds (and on head depletion).
    pub recluster_interval: u64,
    /// Cluster-ledger blocks are anchored into the cloud chain every this
    /// many rounds.
    pub cloud_flush_interval: u64,
    /// Cluster size used by the analytic throughput model; when absent the
    /// measured mean cluster size is used instead.
    pub cluster_size_target: Option<u32>,
    pub area: Area,
    pub delay_model: DelayModel,
    pub energy_model: EnergyModel,
    pub gas_model: GasModel,
    pub election_weights: ElectionWeights,
    pub ids: IdsSettings,
    pub radio: RadioModel,
    pub nfv: NfvPolicy,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_vehicles: 80,
            n_rsus: 10,
            rounds: 1000,
            seed: 1,
            packet_size_range: [100, 512],
            messages_per_vehicle_per_round: 1,
            malicious_fraction: 0.05,
            controllers: 2,
            recluster_interval: 50,
            cloud_flush_interval: 10,
            cluster_size_target: None,
            area: Area::default(),
            delay_model: DelayModel::default(),
            energy_model: EnergyModel::default(),
            gas_model: GasModel::default(),
            election_weights: ElectionWeights::default(),
            ids: IdsSettings::default(),
            radio: RadioModel::default(),
            nfv: NfvPolicy::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigLoadError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_toml_path(path: &Path) -> Result<Self, ConfigLoadError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario config serializes")
    }

    /// Validate and wrap violations in an error, for callers that just want
    /// pass/fail.
    pub fn validated(self) -> Result<Self, ConfigError> {
        let violations = validate_config(&self);
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(ConfigError::new(violations))
        }
    }
}

/// Check every invariant of a scenario configuration and return one
/// human-readable violation per broken rule (empty = runnable). Pure; never
/// fails.
pub fn validate_config(cfg: &ScenarioConfig) -> Vec<String> {
    let mut v = Vec::new();
    let mut need = |ok: bool, msg: String| {
        if !ok {
            v.push(msg);
        }
    };

    need(cfg.n_vehicles >= 1, format!("n_vehicles: must be >= 1 (got {})", cfg.n_vehicles));
    need(cfg.n_rsus >= 1, format!("n_rsus: must be >= 1 (got {})", cfg.n_rsus));
    need(cfg.controllers >= 1, format!("controllers: must be >= 1 (got {})", cfg.controllers));
    need(
        cfg.messages_per_vehicle_per_round >= 1,
        format!(
            "messages_per_vehicle_per_round: must be >= 1 (got {})",
            cfg.messages_per_vehicle_per_round
        ),
    );
    need(
        cfg.recluster_interval >= 1,
        format!("recluster_interval: must be >= 1 (got {})", cfg.recluster_interval),
    );
    need(
        cfg.cloud_flush_interval >= 1,
        format!("cloud_flush_interval: must be >= 1 (got {})", cfg.cloud_flush_interval),
    );
    if let Some(target) = cfg.cluster_size_target {
        need(target >= 1, format!("cluster_size_target: must be >= 1 (got {target})"));
    }

    let [lo, hi] = cfg.packet_size_range;
    need(lo >= 1, format!("packet_size_range: lower bound must be >= 1 byte (got {lo})"));
    need(lo <= hi, format!("packet_size_range: empty range [{lo}, {hi}]"));

    need(
        (0.0..=1.0).contains(&cfg.malicious_fraction),
        format!("malicious_fraction: must lie in [0, 1] (got {})", cfg.malicious_fraction),
    );

    need(cfg.area.width_m > 0.0, format!("area.width_m: must be > 0 (got {})", cfg.area.width_m));
    need(
        cfg.area.height_m > 0.0,
        format!("area.height_m: must be > 0 (got {})", cfg.area.height_m),
    );

    let d = &cfg.delay_model;
    for (name, value) in [
        ("blockchain_s", d.blockchain_s),
        ("sdn_s", d.sdn_s),
        ("nfv_s", d.nfv_s),
        ("intra_cluster_s", d.intra_cluster_s),
        ("vehicle_infra_s", d.vehicle_infra_s),
    ] {
        need(value >= 0.0, format!("delay_model.{name}: must be >= 0 (got {value})"));
    }
    need(
        d.cluster_denominator_s() > 0.0,
        "delay_model: blockchain_s + sdn_s + nfv_s + intra_cluster_s must be > 0".to_string(),
    );
    need(
        d.vehicle_denominator_s() > 0.0,
        "delay_model: blockchain_s + sdn_s + nfv_s + vehicle_infra_s must be > 0".to_string(),
    );

    let e = &cfg.energy_model;
    for (name, value) in [
        ("tx_cost_per_byte", e.tx_cost_per_byte),
        ("rx_cost_per_byte", e.rx_cost_per_byte),
        ("idle_cost_per_round", e.idle_cost_per_round),
        ("ch_overhead_per_round", e.ch_overhead_per_round),
    ] {
        need(value >= 0.0, format!("energy_model.{name}: must be >= 0 (got {value})"));
    }
    need(
        e.initial_energy_mj > 0.0,
        format!("energy_model.initial_energy_mj: must be > 0 (got {})", e.initial_energy_mj),
    );

    let g = &cfg.gas_model;
    for (name, value) in [
        ("base_gas_per_tx", g.base_gas_per_tx),
        ("complexity_gas_per_tx", g.complexity_gas_per_tx),
        ("fixed_overhead", g.fixed_overhead),
    ] {
        need(value >= 0.0, format!("gas_model.{name}: must be >= 0 (got {value})"));
    }

    let w = &cfg.election_weights;
    for (name, value) in
        [("signal", w.signal), ("power", w.power), ("vehicle_type", w.vehicle_type)]
    {
        need(
            (0.0..=1.0).contains(&value),
            format!("election_weights.{name}: must lie in [0, 1] (got {value})"),
        );
    }
    let sum = w.signal + w.power + w.vehicle_type;
    need(
        (sum - 1.0).abs() <= 1e-9,
        format!("election_weights: weights must sum to 1 within 1e-9 (got {sum})"),
    );

    let i = &cfg.ids;
    need(i.trees >= 1, format!("ids.trees: must be >= 1 (got {})", i.trees));
    need(i.subsample >= 2, format!("ids.subsample: must be >= 2 (got {})", i.subsample));
    need(
        i.threshold > 0.0 && i.threshold < 1.0,
        format!("ids.threshold: must lie strictly in (0, 1) (got {})", i.threshold),
    );
    need(i.feature_dim >= 1, format!("ids.feature_dim: must be >= 1 (got {})", i.feature_dim));
    need(
        i.train_samples >= i.subsample,
        format!(
            "ids.train_samples: must be >= ids.subsample (got {} < {})",
            i.train_samples, i.subsample
        ),
    );

    let r = &cfg.radio;
    need(
        r.path_loss_exp > 0.0,
        format!("radio.path_loss_exp: must be > 0 (got {})", r.path_loss_exp),
    );
    need(
        r.coverage_radius_m > 0.0,
        format!("radio.coverage_radius_m: must be > 0 (got {})", r.coverage_radius_m),
    );

    let n = &cfg.nfv;
    need(n.window_rounds >= 1, format!("nfv.window_rounds: must be >= 1 (got {})", n.window_rounds));
    need(
        n.target_utilization > 0.0 && n.target_utilization <= 1.0,
        format!("nfv.target_utilization: must lie in (0, 1] (got {})", n.target_utilization),
    );
    need(
        n.unit_capacity_msgs > 0.0,
        format!("nfv.unit_capacity_msgs: must be > 0 (got {})", n.unit_capacity_msgs),
    );
    need(
        n.max_capacity_units >= 1,
        format!("nfv.max_capacity_units: must be >= 1 (got {})", n.max_capacity_units),
    );

    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let cfg = ScenarioConfig::default();
        assert_eq!(cfg.n_vehicles, 80);
        assert_eq!(cfg.n_rsus, 10);
        assert_eq!(cfg.packet_size_range, [100, 512]);
        assert_eq!(validate_config(&cfg), Vec::<String>::new());
    }

    #[test]
    fn zero_vehicles_is_one_violation_naming_the_field() {
        let cfg = ScenarioConfig { n_vehicles: 0, ..ScenarioConfig::default() };
        let violations = validate_config(&cfg);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].contains("n_vehicles"));
    }

    #[test]
    fn bad_weight_sum_is_one_violation_naming_the_sum() {
        let cfg = ScenarioConfig {
            election_weights: ElectionWeights { signal: 0.5, power: 0.5, vehicle_type: 0.5 },
            ..ScenarioConfig::default()
        };
        let violations = validate_config(&cfg);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].contains("sum"));
    }

    #[test]
    fn validation_collects_multiple_violations() {
        let mut cfg = ScenarioConfig::default();
        cfg.n_rsus = 0;
        cfg.packet_size_range = [200, 100];
        cfg.ids.threshold = 1.5;
        let violations = validate_config(&cfg);
        assert_eq!(violations.len(), 3);
    }

    #[test]
    fn validate_is_idempotent_and_pure() {
        let cfg = ScenarioConfig { n_vehicles: 0, ..ScenarioConfig::default() };
        let a = validate_config(&cfg);
        let b = validate_config(&cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn toml_round_trip_preserves_config() {
        let cfg = ScenarioConfig::default();
        let text = cfg.to_toml_string();
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ScenarioConfig::from_toml_str("n_vehicels = 10\n");
        assert!(err.is_err());
        let err = ScenarioConfig::from_toml_str("[delay_model]\nwarp_drive_s = 1.0\n");
        assert!(err.is_err());
    }

    #[test]
    fn missing_keys_fall_back_to_defaults() {
        let cfg = ScenarioConfig::from_toml_str("n_vehicles = 20\n").unwrap();
        assert_eq!(cfg.n_vehicles, 20);
        assert_eq!(cfg.n_rsus, 10);
        assert_eq!(cfg.delay_model, DelayModel::default());
    }

    #[test]
    fn gas_cost_is_linear_with_default_rates() {
        let g = GasModel::default();
        assert_eq!(g.cost(0), 0.0);
        assert_eq!(g.cost(5), 27_000.0);
        assert_eq!(g.cost(1) * 7.0, g.cost(7));
    }
}
