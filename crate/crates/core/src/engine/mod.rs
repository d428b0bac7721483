//! The round-based simulation engine.
//!
//! Each 1-second round runs a fixed pipeline: mobility, message generation,
//! member-to-head forwarding, intrusion screening, per-cluster ledger
//! commits, controller verification + routing, periodic cloud anchoring,
//! energy accounting, churn, and KPI window sampling. Every phase draws from
//! seed-derived named RNG streams, so a rerun with the same configuration
//! reproduces the identical event log bit for bit.
//!
//! Messages the detector flags are quarantined before signing: their
//! payloads never enter the main content store and their digests never
//! reach a chain.

pub mod events;
pub mod mobility;
pub mod scenario;
pub mod sweep;

pub use events::{parse_jsonl, ClusterSnapshot, EventRecord, EventSink, JsonlSink, NullSink, VecSink};
pub use sweep::{run_sweep, SweepCell};

use crate::cluster::{form_clusters, handle_churn, Cluster};
use crate::config::{DelayModel, ScenarioConfig};
use crate::control::{
    two_step_verify, Controller, DestClass, FlowAction, FlowMatch, FlowRule,
};
use crate::crypto::{
    derive_keypair, endorse_message, sign_message, verify_message, ContentStore, KeyPair,
};
use crate::domain::{ClusterId, Rsu, Vehicle, VehicleId};
use crate::error::EngineError;
use crate::ids::{self, synth, ForestSettings, IsolationForest, Label};
use crate::ledger::{Ledger, LedgerTier, Tx};
use crate::metrics::WindowSample;
use crate::rng;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Std-dev of benign in-simulation feature vectors. Deliberately tighter
/// than the detector's training distribution (sigma = 1) so honest traffic
/// sits well inside the decision boundary.
pub const BENIGN_FEATURE_SIGMA: f64 = 0.5;
/// Per-coordinate magnitude range of malicious feature vectors.
pub const OUTLIER_FEATURE_RANGE: (f64, f64) = (20.0, 100.0);
/// KPI sampling window length in rounds.
pub const METRICS_WINDOW_ROUNDS: u64 = 10;
/// Priority of the default cloud-uplink flow rules the engine installs.
const UPLINK_RULE_PRIORITY: u32 = 10;

/// Message-level tallies. `sent` always equals
/// `delivered + blocked + dropped` at the end of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub sent: u64,
    pub delivered: u64,
    pub blocked: u64,
    pub dropped: u64,
    /// Overhead: data forwards + controller routes + block commits (cluster
    /// and cloud) + election vote entries.
    pub exchanged_msgs: u64,
}

impl Counters {
    pub fn conserved(&self) -> bool {
        self.sent == self.delivered + self.blocked + self.dropped
    }
}

/// Aggregates computed while the simulation runs; the raw material for
/// [`crate::metrics::compute_kpis`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub counters: Counters,
    /// Round of the first battery depletion (= total rounds if none).
    pub nlt_round: u64,
    pub total_energy_mj: f64,
    /// Sum of end-to-end delays over delivered messages, in delivery order.
    pub delay_sum_s: f64,
    pub delivered_bits: u64,
    pub windows: Vec<WindowSample>,
    pub clusters_formed: u64,
    pub formation_member_total: u64,
    pub mean_cluster_size: f64,
    pub rounds_run: u64,
}

/// End-to-end delay of one delivered message: intra-cluster hop, block
/// commit, controller hop, effective processing delay, and the
/// vehicle-to-infrastructure leg.
pub fn end_to_end_delay(dm: &DelayModel, nfv_effective_s: f64) -> f64 {
    dm.intra_cluster_s + dm.blockchain_s + dm.sdn_s + nfv_effective_s + dm.vehicle_infra_s
}

/// Full mutable world state of one simulation.
pub struct SimState {
    pub cfg: ScenarioConfig,
    pub vehicles: Vec<Vehicle>,
    pub rsus: Vec<Rsu>,
    pub clusters: BTreeMap<ClusterId, Cluster>,
    /// Every cluster chain ever created, including dissolved clusters.
    pub cluster_ledgers: BTreeMap<ClusterId, Ledger>,
    pub cloud_chain: Ledger,
    pub controllers: Vec<Controller>,
    /// Payloads of signed (accepted) messages, content-addressed.
    pub store: ContentStore,
    /// Payloads the detector blocked; kept apart for forensics.
    pub quarantine: ContentStore,
    pub forest: IsolationForest,
    vehicle_keys: Vec<KeyPair>,
    /// cluster id -> controller index
    assignment: BTreeMap<ClusterId, usize>,
    /// cluster id -> next chain height not yet anchored on the cloud chain
    anchored: BTreeMap<ClusterId, u64>,
    depleted: BTreeSet<VehicleId>,
    mobility_rngs: Vec<ChaCha12Rng>,
    traffic_rng: ChaCha12Rng,
    next_cluster_id: u64,
    next_message_id: u64,
}

/// What [`run`] returns: the final world plus the aggregate report.
pub struct RunOutput {
    pub state: SimState,
    pub report: RunReport,
}

struct PendingMessage {
    id: u64,
    sender: VehicleId,
    cluster: ClusterId,
    bytes: u32,
    features: Vec<f64>,
    payload: Vec<u8>,
}

impl SimState {
    pub fn new(cfg: ScenarioConfig) -> Result<Self, EngineError> {
        let cfg = cfg.validated()?;
        let rsus = scenario::place_rsus(&cfg);
        let vehicles = scenario::spawn_vehicles(&cfg);
        let vehicle_keys: Vec<KeyPair> =
            vehicles.iter().map(|v| derive_keypair(cfg.seed, "vehicle", v.id.0, 0)).collect();
        let mobility_rngs: Vec<ChaCha12Rng> =
            (0..cfg.n_vehicles).map(|i| rng::substream(cfg.seed, "mobility", i as u64)).collect();
        let traffic_rng = rng::stream(cfg.seed, "traffic");

        let mut train_rng = rng::stream(cfg.seed, "ids-train");
        let training =
            synth::gaussian_inliers(&mut train_rng, cfg.ids.train_samples, cfg.ids.feature_dim, 1.0);
        let forest = ids::fit(
            &training,
            &ForestSettings {
                trees: cfg.ids.trees,
                subsample: cfg.ids.subsample,
                threshold: cfg.ids.threshold,
            },
            rng::derive_u64(cfg.seed, "iforest", &[]),
        )?;

        let controllers =
            (0..cfg.controllers).map(|i| Controller::new(i, cfg.delay_model.nfv_s)).collect();
        let cloud_chain = Ledger::new(LedgerTier::Cloud, cfg.gas_model, 0);

        Ok(Self {
            vehicles,
            rsus,
            clusters: BTreeMap::new(),
            cluster_ledgers: BTreeMap::new(),
            cloud_chain,
            controllers,
            store: ContentStore::new(),
            quarantine: ContentStore::new(),
            forest,
            vehicle_keys,
            assignment: BTreeMap::new(),
            anchored: BTreeMap::new(),
            depleted: BTreeSet::new(),
            mobility_rngs,
            traffic_rng,
            next_cluster_id: 0,
            next_message_id: 0,
            cfg,
        })
    }

    fn step_mobility(&mut self) {
        for i in 0..self.vehicles.len() {
            if self.vehicles[i].is_depleted() {
                continue;
            }
            let lo = -self.vehicles[i].max_decel_mps2;
            let hi = self.vehicles[i].max_accel_mps2;
            let accel = self.mobility_rngs[i].random_range(lo..=hi);
            mobility::advance(&mut self.vehicles[i], accel, &self.cfg.area);
        }
    }

    /// Tear down every cluster and form the partition afresh. Installs flow
    /// rules, assigns controllers round-robin in cluster-id order, and emits
    /// one churn event carrying the whole transition.
    fn reform(
        &mut self,
        round: u64,
        departed: Vec<u64>,
        sink: &mut dyn EventSink,
        report: &mut RunReport,
    ) -> Result<(), EngineError> {
        let dissolved: Vec<u64> = self.clusters.keys().map(|c| c.0).collect();
        for raw in &dissolved {
            let cid = ClusterId(*raw);
            for ctrl in &mut self.controllers {
                ctrl.table.remove_cluster(cid);
            }
        }
        self.clusters.clear();
        self.assignment.clear();
        for v in &mut self.vehicles {
            v.cluster = None;
        }

        let outcome =
            form_clusters(&self.vehicles, &self.rsus, &self.cfg, round, &mut self.next_cluster_id)?;
        let mut votes = 0u64;
        let mut formed = Vec::new();
        for cluster in outcome.clusters {
            votes += cluster.vote_record.len() as u64;
            formed.push(ClusterSnapshot {
                cluster: cluster.id.0,
                rsu: cluster.rsu_id.0,
                head: cluster.head.0,
                members: cluster.members.len() as u64,
            });
            for m in &cluster.members {
                self.vehicles[m.0 as usize].cluster = Some(cluster.id);
            }
            self.anchored.insert(cluster.id, 0);
            self.clusters.insert(cluster.id, cluster);
        }
        self.cluster_ledgers.extend(outcome.ledgers);

        let n_ctrl = self.controllers.len();
        let ids: Vec<ClusterId> = self.clusters.keys().copied().collect();
        for (i, cid) in ids.into_iter().enumerate() {
            let ctrl = i % n_ctrl;
            self.assignment.insert(cid, ctrl);
            self.controllers[ctrl].table.install(FlowRule {
                matches: FlowMatch { cluster: cid, dest: DestClass::CloudUplink },
                action: FlowAction::ForwardToCloud,
                priority: UPLINK_RULE_PRIORITY,
                installed_round: round,
            });
        }

        report.clusters_formed += formed.len() as u64;
        report.formation_member_total += formed.iter().map(|s| s.members).sum::<u64>();
        // Each election exchanges one message per vote entry, plus the vote
        // and registration block commits per cluster.
        report.counters.exchanged_msgs += votes + 2 * formed.len() as u64;
        sink.record(&EventRecord::Churn {
            round,
            departed,
            dissolved,
            formed,
            unclustered: outcome.unclustered.len() as u64,
            votes,
        })?;
        Ok(())
    }

    /// Incremental churn: drop newly depleted members from their clusters.
    /// Only called when no cluster head depleted, so no re-election happens
    /// and no blocks are written.
    fn apply_depletion_churn(
        &mut self,
        round: u64,
        newly_depleted: &[u64],
        sink: &mut dyn EventSink,
    ) -> Result<(), EngineError> {
        let departed_set: BTreeSet<VehicleId> =
            newly_depleted.iter().map(|id| VehicleId(*id)).collect();
        let roster: BTreeMap<VehicleId, Vehicle> =
            self.vehicles.iter().map(|v| (v.id, v.clone())).collect();
        let affected: Vec<ClusterId> = self
            .clusters
            .iter()
            .filter(|(_, c)| c.members.iter().any(|m| departed_set.contains(m)))
            .map(|(cid, _)| *cid)
            .collect();

        let mut dissolved = Vec::new();
        for cid in affected {
            let mut cluster = self.clusters.remove(&cid).expect("cluster present");
            let departed: BTreeSet<VehicleId> =
                cluster.members.intersection(&departed_set).copied().collect();
            let rsu = &self.rsus[cluster.rsu_id.0 as usize];
            let ledger = self.cluster_ledgers.get_mut(&cid).expect("ledger present");
            let out = handle_churn(
                &mut cluster,
                &departed,
                &BTreeSet::new(),
                &roster,
                rsu,
                &self.cfg,
                ledger,
                round,
            )?;
            debug_assert!(!out.head_changed, "head depletion must trigger re-formation instead");
            if out.dissolved {
                dissolved.push(cid.0);
                self.assignment.remove(&cid);
                for ctrl in &mut self.controllers {
                    ctrl.table.remove_cluster(cid);
                }
            } else {
                self.clusters.insert(cid, cluster);
            }
        }
        for vid in &departed_set {
            self.vehicles[vid.0 as usize].cluster = None;
        }
        sink.record(&EventRecord::Churn {
            round,
            departed: newly_depleted.to_vec(),
            dissolved,
            formed: vec![],
            unclustered: 0,
            votes: 0,
        })?;
        Ok(())
    }

    /// Anchor every not-yet-anchored cluster-chain block (including genesis
    /// blocks) into one new cloud-chain block.
    fn flush_to_cloud(
        &mut self,
        round: u64,
        sink: &mut dyn EventSink,
        report: &mut RunReport,
    ) -> Result<(), EngineError> {
        let mut anchors = Vec::new();
        for (cid, next) in self.anchored.iter_mut() {
            let ledger = &self.cluster_ledgers[cid];
            while *next <= ledger.height() {
                anchors.push(Tx::VerificationRecord {
                    cluster: *cid,
                    height: *next,
                    digest: ledger.blocks()[*next as usize].hash,
                });
                *next += 1;
            }
        }
        if anchors.is_empty() {
            return Ok(());
        }
        let count = anchors.len() as u64;
        let block = self.cloud_chain.append_block(anchors, round)?;
        sink.record(&EventRecord::CloudFlush {
            round,
            anchored: count,
            cloud_height: block.index,
            gas_used: block.gas_used,
        })?;
        report.counters.exchanged_msgs += 1;
        Ok(())
    }

    /// Mean member count over the currently live clusters.
    pub fn live_mean_cluster_size(&self) -> f64 {
        if self.clusters.is_empty() {
            return 0.0;
        }
        let total: usize = self.clusters.values().map(|c| c.members.len()).sum();
        total as f64 / self.clusters.len() as f64
    }
}

/// Run one simulation to completion, streaming events into `sink`.
pub fn run(cfg: &ScenarioConfig, sink: &mut dyn EventSink) -> Result<RunOutput, EngineError> {
    let mut state = SimState::new(cfg.clone())?;
    let rounds = state.cfg.rounds;
    let mut report = RunReport { rounds_run: rounds, ..RunReport::default() };
    if rounds == 0 {
        return Ok(RunOutput { state, report });
    }

    state.reform(0, Vec::new(), sink, &mut report)?;

    let mut first_depletion: Option<u64> = None;
    let mut window_bits: u64 = 0;
    let mut window_start: u64 = 1;
    let [packet_lo, packet_hi] = state.cfg.packet_size_range;
    let feature_dim = state.cfg.ids.feature_dim;

    for r in 1..=rounds {
        state.step_mobility();

        // Per-round snapshot of the partition; membership is stable within
        // a round.
        let round_clusters: Vec<(ClusterId, VehicleId, Vec<VehicleId>)> = state
            .clusters
            .iter()
            .map(|(cid, c)| (*cid, c.head, c.members.iter().copied().collect()))
            .collect();
        let head_of: BTreeMap<ClusterId, VehicleId> =
            round_clusters.iter().map(|(cid, head, _)| (*cid, *head)).collect();

        // --- generation ---
        let mut pending: Vec<PendingMessage> = Vec::new();
        for (cid, _, members) in &round_clusters {
            for member in members {
                if state.vehicles[member.0 as usize].is_depleted() {
                    continue;
                }
                for _ in 0..state.cfg.messages_per_vehicle_per_round {
                    let bytes = state.traffic_rng.random_range(packet_lo..=packet_hi);
                    let malicious = state.traffic_rng.random_bool(state.cfg.malicious_fraction);
                    let features = if malicious {
                        synth::outlier_point(
                            &mut state.traffic_rng,
                            feature_dim,
                            OUTLIER_FEATURE_RANGE.0,
                            OUTLIER_FEATURE_RANGE.1,
                        )
                    } else {
                        synth::inlier_point(&mut state.traffic_rng, feature_dim, BENIGN_FEATURE_SIGMA)
                    };
                    let mut payload = vec![0u8; bytes as usize];
                    state.traffic_rng.fill_bytes(&mut payload);
                    let id = state.next_message_id;
                    state.next_message_id += 1;
                    report.counters.sent += 1;
                    window_bits += bytes as u64 * 8;
                    sink.record(&EventRecord::Generate {
                        round: r,
                        message_id: id,
                        sender: member.0,
                        cluster: cid.0,
                        bytes,
                        malicious,
                    })?;
                    pending.push(PendingMessage {
                        id,
                        sender: *member,
                        cluster: *cid,
                        bytes,
                        features,
                        payload,
                    });
                }
            }
        }
        // Kept for the energy phase after payloads move out of `pending`.
        let round_msgs: Vec<(VehicleId, ClusterId, u32)> =
            pending.iter().map(|m| (m.sender, m.cluster, m.bytes)).collect();

        // --- member -> head forwarding ---
        for msg in &pending {
            sink.record(&EventRecord::ClusterForward {
                round: r,
                message_id: msg.id,
                sender: msg.sender.0,
                head: head_of[&msg.cluster].0,
                cluster: msg.cluster.0,
            })?;
            report.counters.exchanged_msgs += 1;
        }

        // --- intrusion screening, then signing of clean traffic ---
        type Batch = Vec<(u64, u32, crate::crypto::SignedMessage)>;
        let mut benign: BTreeMap<ClusterId, Batch> = BTreeMap::new();
        for msg in pending {
            let score = state.forest.anomaly_score(&msg.features)?;
            let verdict = if score >= state.cfg.ids.threshold {
                Label::Malicious
            } else {
                Label::Benign
            };
            sink.record(&EventRecord::IdsCheck {
                round: r,
                message_id: msg.id,
                cluster: msg.cluster.0,
                score,
                verdict,
            })?;
            if verdict == Label::Malicious {
                report.counters.blocked += 1;
                state.quarantine.put(msg.payload);
                continue;
            }
            let key = &state.vehicle_keys[msg.sender.0 as usize];
            let signed = sign_message(msg.payload, msg.sender, msg.cluster, r, key, &mut state.store);
            let check = verify_message(&signed, &key.verifying_key(), &state.store);
            debug_assert!(check.is_accepted());
            if check.is_accepted() {
                benign.entry(msg.cluster).or_default().push((msg.id, msg.bytes, signed));
            } else {
                report.counters.dropped += 1;
            }
        }

        // --- per-cluster digest commits ---
        for (cid, batch) in &benign {
            let txs: Vec<Tx> = batch
                .iter()
                .map(|(_, _, sm)| Tx::MessageDigest {
                    digest: sm.payload_digest,
                    sender: sm.sender,
                    message_round: r,
                })
                .collect();
            let ledger = state.cluster_ledgers.get_mut(cid).expect("ledger present");
            let block = ledger.append_block(txs, r)?;
            sink.record(&EventRecord::LedgerCommit {
                round: r,
                cluster: cid.0,
                height: block.index,
                tx_count: block.tx_count,
                gas_used: block.gas_used,
                block_hash: hex::encode(block.hash),
            })?;
            report.counters.exchanged_msgs += 1;
        }

        // --- controller verification + routing ---
        let mut ctrl_load = vec![0f64; state.controllers.len()];
        let mut routed: Vec<(VehicleId, u32)> = Vec::new();
        for (cid, batch) in &benign {
            let cluster = &state.clusters[cid];
            let ledger = &state.cluster_ledgers[cid];
            let ctrl_idx = state.assignment[cid];
            let uplink = FlowMatch { cluster: *cid, dest: DestClass::CloudUplink };
            for (mid, bytes, sm) in batch {
                let env = endorse_message(sm.clone(), &cluster.key);
                let verify = two_step_verify(&env, &cluster.key.verifying_key(), ledger, &state.store);
                let action = state.controllers[ctrl_idx].table.lookup(uplink);
                let delivered = verify.is_accepted() && action == FlowAction::ForwardToCloud;
                let nfv_delay = state.controllers[ctrl_idx].nfv_delay_s();
                let delay =
                    if delivered { end_to_end_delay(&state.cfg.delay_model, nfv_delay) } else { 0.0 };
                if delivered {
                    report.counters.delivered += 1;
                    report.delivered_bits += *bytes as u64 * 8;
                    report.delay_sum_s += delay;
                } else {
                    report.counters.dropped += 1;
                }
                sink.record(&EventRecord::ControllerRoute {
                    round: r,
                    message_id: *mid,
                    cluster: cid.0,
                    controller: ctrl_idx,
                    action,
                    verify,
                    delivered,
                    sdn_delay_s: state.cfg.delay_model.sdn_s,
                    nfv_delay_s: nfv_delay,
                    delay_s: delay,
                })?;
                report.counters.exchanged_msgs += 1;
                ctrl_load[ctrl_idx] += 1.0;
                routed.push((cluster.head, *bytes));
            }
        }

        // --- cloud anchoring ---
        if r % state.cfg.cloud_flush_interval == 0 || r == rounds {
            state.flush_to_cloud(r, sink, &mut report)?;
        }

        // --- controller load bookkeeping ---
        let reallocate = r % state.cfg.nfv.window_rounds == 0;
        for (i, ctrl) in state.controllers.iter_mut().enumerate() {
            ctrl.finish_round(ctrl_load[i], &state.cfg.nfv, state.cfg.delay_model.nfv_s, reallocate);
        }

        // --- energy accounting (canonical replayable order) ---
        let tx_per_byte = state.cfg.energy_model.tx_cost_per_byte;
        let rx_per_byte = state.cfg.energy_model.rx_cost_per_byte;
        let idle_cost = state.cfg.energy_model.idle_cost_per_round;
        let head_cost = state.cfg.energy_model.ch_overhead_per_round;
        for (sender, cluster, bytes) in &round_msgs {
            let spent = state.vehicles[sender.0 as usize].spend_energy(tx_per_byte * *bytes as f64);
            report.total_energy_mj += spent;
            let head = head_of[cluster];
            let spent = state.vehicles[head.0 as usize].spend_energy(rx_per_byte * *bytes as f64);
            report.total_energy_mj += spent;
        }
        for (head, bytes) in &routed {
            let spent = state.vehicles[head.0 as usize].spend_energy(tx_per_byte * *bytes as f64);
            report.total_energy_mj += spent;
        }
        for v in &mut state.vehicles {
            report.total_energy_mj += v.spend_energy(idle_cost);
        }
        let heads: Vec<VehicleId> = state.clusters.values().map(|c| c.head).collect();
        for head in heads {
            let spent = state.vehicles[head.0 as usize].spend_energy(head_cost);
            report.total_energy_mj += spent;
        }

        // --- depletion detection ---
        let mut newly_depleted: Vec<u64> = Vec::new();
        for v in &state.vehicles {
            if v.is_depleted() && !state.depleted.contains(&v.id) {
                newly_depleted.push(v.id.0);
            }
        }
        for id in &newly_depleted {
            state.depleted.insert(VehicleId(*id));
        }
        if first_depletion.is_none() && !newly_depleted.is_empty() {
            first_depletion = Some(r);
        }

        // --- churn ---
        let head_depleted =
            state.clusters.values().any(|c| newly_depleted.contains(&c.head.0));
        let interval_due = r % state.cfg.recluster_interval == 0;
        if r < rounds && (interval_due || head_depleted) {
            state.reform(r, newly_depleted.clone(), sink, &mut report)?;
        } else if !newly_depleted.is_empty() {
            if r < rounds {
                state.apply_depletion_churn(r, &newly_depleted, sink)?;
            } else {
                // Final round: record the departures, but leave the partition
                // alone so no post-flush blocks are ever written.
                sink.record(&EventRecord::Churn {
                    round: r,
                    departed: newly_depleted.clone(),
                    dissolved: vec![],
                    formed: vec![],
                    unclustered: 0,
                    votes: 0,
                })?;
            }
        }

        // --- KPI window sampling ---
        if (r % METRICS_WINDOW_ROUNDS == 0 || r == rounds) && r >= window_start {
            let d_mbit = window_bits as f64 / 1e6 / state.cfg.n_vehicles as f64;
            let cluster_size = match state.cfg.cluster_size_target {
                Some(c) => c as f64,
                None => state.live_mean_cluster_size(),
            };
            report.windows.push(WindowSample {
                index: report.windows.len() as u64,
                start_round: window_start,
                end_round: r,
                d_mbit_per_vehicle: d_mbit,
                cluster_size,
                model_cluster_mbps: crate::metrics::throughput_mbps_for_cluster(
                    cluster_size,
                    d_mbit,
                    &state.cfg.delay_model,
                ),
                model_vehicle_mbps: crate::metrics::throughput_mbps_for_vehicles(
                    state.cfg.n_vehicles as f64,
                    d_mbit,
                    &state.cfg.delay_model,
                ),
            });
            window_bits = 0;
            window_start = r + 1;
        }
    }

    report.nlt_round = first_depletion.unwrap_or(rounds);
    report.mean_cluster_size = if report.clusters_formed == 0 {
        0.0
    } else {
        report.formation_member_total as f64 / report.clusters_formed as f64
    };
    debug_assert!(report.counters.conserved(), "message conservation violated");
    Ok(RunOutput { state, report })
}
