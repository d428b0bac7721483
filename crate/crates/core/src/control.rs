//! Software-defined control plane: flow tables, the controller's two-step
//! message verification, and delay-aware virtual-function capacity
//! allocation.
//!
//! A controller first checks a forwarded message against the cluster chain
//! (digest on chain + valid head endorsement), then fetches the payload from
//! the content store and re-hashes it. Only then does the flow table decide
//! where the message goes. Capacity allocation watches per-round load and
//! sizes processing units so that steady-state utilization stays at or below
//! the configured target.

use crate::config::NfvPolicy;
use crate::crypto::{sha256, verify_endorsement, ClusterEnvelope, ContentStore};
use crate::domain::ClusterId;
use crate::ledger::Ledger;
use ed25519_dalek::VerifyingKey;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

/// Destination class of a flow, from the controller's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DestClass {
    CloudUplink,
    IntraCluster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowAction {
    ForwardToCloud,
    ForwardToCluster,
    Drop,
}

/// Match key of a flow rule: which cluster the traffic originates from and
/// where it is headed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowMatch {
    pub cluster: ClusterId,
    pub dest: DestClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowRule {
    pub matches: FlowMatch,
    pub action: FlowAction,
    pub priority: u32,
    pub installed_round: u64,
}

/// Controller flow table. At most one rule per (match, priority); on lookup
/// the highest-priority rule for the match wins, and a miss falls through to
/// an implicit drop.
#[derive(Debug, Clone, Default)]
pub struct FlowTable {
    rules: BTreeMap<FlowMatch, BTreeMap<u32, FlowRule>>,
}

impl FlowTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Install a rule, replacing any existing rule with the same match and
    /// priority. Returns the replaced rule, if any.
    pub fn install(&mut self, rule: FlowRule) -> Option<FlowRule> {
        self.rules.entry(rule.matches).or_default().insert(rule.priority, rule)
    }

    /// Resolve a match to an action; misses drop.
    pub fn lookup(&self, m: FlowMatch) -> FlowAction {
        self.lookup_rule(m).map_or(FlowAction::Drop, |r| r.action)
    }

    /// The winning rule for a match, if any rule matches at all.
    pub fn lookup_rule(&self, m: FlowMatch) -> Option<&FlowRule> {
        self.rules.get(&m).and_then(|by_prio| by_prio.values().next_back())
    }

    pub fn rule_count(&self) -> usize {
        self.rules.values().map(BTreeMap::len).sum()
    }

    /// Remove every rule that matches on the given cluster (used when a
    /// cluster dissolves).
    pub fn remove_cluster(&mut self, cluster: ClusterId) -> usize {
        let before = self.rule_count();
        self.rules.retain(|m, _| m.cluster != cluster);
        before - self.rule_count()
    }

    pub fn iter(&self) -> impl Iterator<Item = &FlowRule> {
        self.rules.values().flat_map(BTreeMap::values)
    }
}

/// Why the controller's two-step check rejected a message, and at which step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoStepReason {
    /// Step 1: the message digest is not committed on the cluster chain.
    NotOnChain,
    /// Step 1: the cluster-head endorsement does not verify.
    BadEndorsement,
    /// Step 2: the payload is absent from the content store.
    MissingContent,
    /// Step 2: the stored payload does not hash back to the digest.
    ContentMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "outcome")]
pub enum TwoStepOutcome {
    Accepted,
    Rejected { step: u8, reason: TwoStepReason },
}

impl TwoStepOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, TwoStepOutcome::Accepted)
    }
}

/// The controller's dual verification of a forwarded message.
///
/// Step 1 consults the cluster chain: the payload digest must already be
/// committed, and the envelope must carry a valid endorsement under the
/// cluster key. Step 2 fetches the payload from the content store and
/// re-hashes it against the digest. The first failing check decides the
/// outcome.
pub fn two_step_verify(
    env: &ClusterEnvelope,
    cluster_public: &VerifyingKey,
    ledger: &Ledger,
    store: &ContentStore,
) -> TwoStepOutcome {
    if !ledger.contains_message_digest(&env.message.payload_digest) {
        return TwoStepOutcome::Rejected { step: 1, reason: TwoStepReason::NotOnChain };
    }
    if !verify_endorsement(env, cluster_public) {
        return TwoStepOutcome::Rejected { step: 1, reason: TwoStepReason::BadEndorsement };
    }
    match store.get(&env.message.content_id) {
        None => TwoStepOutcome::Rejected { step: 2, reason: TwoStepReason::MissingContent },
        Some(payload) if sha256(payload) != env.message.payload_digest => {
            TwoStepOutcome::Rejected { step: 2, reason: TwoStepReason::ContentMismatch }
        }
        Some(_) => TwoStepOutcome::Accepted,
    }
}

/// Current processing capacity of one controller: how many unit-sized
/// function instances are allocated and the resulting effective processing
/// delay under the present load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VnfAllocation {
    pub capacity_units: u32,
    /// Messages per round most recently observed.
    pub load: f64,
    pub effective_nfv_delay_s: f64,
}

fn effective_delay(base_nfv_delay_s: f64, load: f64, capacity_units: u32, policy: &NfvPolicy) -> f64 {
    let throughput = capacity_units as f64 * policy.unit_capacity_msgs;
    base_nfv_delay_s * (load / throughput).max(1.0)
}

/// Size capacity from a load window: enough units that the mean load sits at
/// or below the target utilization, clamped to [1, max]. The effective delay
/// is the base delay stretched by any overload of the *current* (last
/// observed) load against the new capacity, and is never below the base.
pub fn allocate_resources(
    load_history: &[f64],
    policy: &NfvPolicy,
    base_nfv_delay_s: f64,
) -> VnfAllocation {
    let mean = if load_history.is_empty() {
        0.0
    } else {
        load_history.iter().sum::<f64>() / load_history.len() as f64
    };
    let per_unit = policy.target_utilization * policy.unit_capacity_msgs;
    let capacity_units =
        (mean / per_unit).ceil().max(1.0).min(policy.max_capacity_units as f64) as u32;
    let load = load_history.last().copied().unwrap_or(0.0);
    VnfAllocation {
        capacity_units,
        load,
        effective_nfv_delay_s: effective_delay(base_nfv_delay_s, load, capacity_units, policy),
    }
}

/// One SDN controller: its flow table, current capacity allocation, and the
/// sliding window of observed per-round loads that drives reallocation.
#[derive(Debug, Clone)]
pub struct Controller {
    pub id: usize,
    pub table: FlowTable,
    pub allocation: VnfAllocation,
    load_window: VecDeque<f64>,
}

impl Controller {
    /// A fresh controller starts with a single capacity unit and the base
    /// processing delay; the first reallocation window corrects both.
    pub fn new(id: usize, base_nfv_delay_s: f64) -> Self {
        Self {
            id,
            table: FlowTable::new(),
            allocation: VnfAllocation {
                capacity_units: 1,
                load: 0.0,
                effective_nfv_delay_s: base_nfv_delay_s,
            },
            load_window: VecDeque::new(),
        }
    }

    /// The processing delay messages routed through this controller pay now.
    pub fn nfv_delay_s(&self) -> f64 {
        self.allocation.effective_nfv_delay_s
    }

    /// Record this round's load. The effective delay is refreshed against the
    /// current capacity every round; capacity itself is resized only when
    /// `reallocate` is set (once per policy window).
    pub fn finish_round(
        &mut self,
        load: f64,
        policy: &NfvPolicy,
        base_nfv_delay_s: f64,
        reallocate: bool,
    ) {
        if self.load_window.len() == policy.window_rounds as usize {
            self.load_window.pop_front();
        }
        self.load_window.push_back(load);
        if reallocate {
            let window: Vec<f64> = self.load_window.iter().copied().collect();
            self.allocation = allocate_resources(&window, policy, base_nfv_delay_s);
        } else {
            self.allocation.load = load;
            self.allocation.effective_nfv_delay_s =
                effective_delay(base_nfv_delay_s, load, self.allocation.capacity_units, policy);
        }
    }

    pub fn window(&self) -> impl Iterator<Item = f64> + '_ {
        self.load_window.iter().copied()
    }
}
