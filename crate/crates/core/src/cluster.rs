//! Cluster formation and head election.
//!
//! Each RSU anchors at most one cluster: every live vehicle joins the nearest
//! RSU whose coverage disc contains it (ties to the lower RSU id). The head
//! is the member with the best weighted combination of signal strength,
//! processing power, and vehicle type; the full vote record is committed to
//! the cluster's ledger before the election is final, and the cluster key is
//! registered on-chain right after.

use crate::config::{ElectionWeights, RadioModel, ScenarioConfig};
use crate::crypto::{derive_keypair, KeyPair};
use crate::domain::{signal_strength, ClusterId, Rsu, RsuId, Vehicle, VehicleId};
use crate::error::ClusterError;
use crate::ledger::{Ledger, LedgerTier, Tx, VoteEntry};
use std::collections::{BTreeMap, BTreeSet};

/// One candidate's election scorecard. Signal and power are min-max
/// normalized over the candidate set; the type weight is already in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub vehicle: VehicleId,
    pub normalized_signal: f64,
    pub normalized_power: f64,
    pub type_weight: f64,
    pub total: f64,
}

fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        // A constant criterion carries no information; park everyone at the
        // midpoint instead of dividing by zero.
        return vec![0.5; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

/// Score a candidate set for election at the given RSU. Order of the result
/// follows the order of `members`.
pub fn score_candidates(
    members: &[&Vehicle],
    rsu: &Rsu,
    weights: &ElectionWeights,
    radio: &RadioModel,
) -> Vec<CandidateScore> {
    let signals: Vec<f64> = members
        .iter()
        .map(|v| signal_strength(v, rsu, radio.tx_power_dbm, radio.path_loss_exp))
        .collect();
    let powers: Vec<f64> = members.iter().map(|v| v.processing_power).collect();
    let norm_signal = min_max_normalize(&signals);
    let norm_power = min_max_normalize(&powers);
    members
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let total = weights.signal * norm_signal[i]
                + weights.power * norm_power[i]
                + weights.vehicle_type * v.type_weight;
            CandidateScore {
                vehicle: v.id,
                normalized_signal: norm_signal[i],
                normalized_power: norm_power[i],
                type_weight: v.type_weight,
                total,
            }
        })
        .collect()
}

/// Pick the winner: highest total score, ties to the lowest vehicle id.
/// Pure argmax, no ledger involved; [`elect_head`] is the committing wrapper.
pub fn pick_winner(candidates: &[CandidateScore]) -> Result<VehicleId, ClusterError> {
    let mut best: Option<&CandidateScore> = None;
    for c in candidates {
        best = match best {
            None => Some(c),
            Some(b) if c.total > b.total || (c.total == b.total && c.vehicle < b.vehicle) => {
                Some(c)
            }
            Some(b) => Some(b),
        };
    }
    best.map(|c| c.vehicle).ok_or(ClusterError::NoCandidates)
}

/// Elect a cluster head: the vote record is appended to the cluster ledger
/// as a vote transaction (one entry per candidate, cast by the anchoring
/// RSU), and only then is the result final.
pub fn elect_head(
    cluster: ClusterId,
    rsu: RsuId,
    candidates: &[CandidateScore],
    ledger: &mut Ledger,
    round: u64,
) -> Result<VehicleId, ClusterError> {
    let winner = pick_winner(candidates)?;
    let entries: Vec<VoteEntry> = candidates
        .iter()
        .map(|c| VoteEntry { voter: rsu, candidate: c.vehicle, score: c.total })
        .collect();
    ledger.append_block(vec![Tx::Vote { cluster, elected: winner, entries }], round)?;
    Ok(winner)
}

/// A live cluster: members, elected head, and the cluster signing key
/// (rotated whenever the head changes).
#[derive(Debug, Clone)]
pub struct Cluster {
    pub id: ClusterId,
    pub rsu_id: RsuId,
    pub members: BTreeSet<VehicleId>,
    pub head: VehicleId,
    pub key: KeyPair,
    /// Bumped on every key rotation; part of key derivation.
    pub key_epoch: u64,
    pub vote_record: Vec<VoteEntry>,
}

/// Everything a formation pass produces: the clusters, one fresh ledger per
/// cluster (genesis + vote + registration blocks), and the vehicles left
/// outside all coverage.
#[derive(Debug)]
pub struct FormationOutcome {
    pub clusters: Vec<Cluster>,
    pub ledgers: BTreeMap<ClusterId, Ledger>,
    pub unclustered: Vec<VehicleId>,
}

/// Nearest in-coverage RSU for one vehicle, ties to the lower RSU id.
pub fn nearest_in_coverage(vehicle: &Vehicle, rsus: &[Rsu]) -> Option<RsuId> {
    let mut best: Option<(f64, RsuId)> = None;
    for rsu in rsus {
        let d = vehicle.position.distance_to(&rsu.position);
        if d <= rsu.coverage_radius_m {
            best = match best {
                None => Some((d, rsu.id)),
                Some((bd, bid)) if d < bd || (d == bd && rsu.id < bid) => Some((d, rsu.id)),
                other => other,
            };
        }
    }
    best.map(|(_, id)| id)
}

/// Form clusters from scratch: assign every live vehicle to its nearest
/// in-coverage RSU, elect heads, mint cluster keys, and commit vote +
/// registration blocks to each fresh cluster ledger. `next_cluster_id` is
/// advanced for every cluster created, so ids are never reused across
/// formations.
pub fn form_clusters(
    vehicles: &[Vehicle],
    rsus: &[Rsu],
    cfg: &ScenarioConfig,
    round: u64,
    next_cluster_id: &mut u64,
) -> Result<FormationOutcome, ClusterError> {
    let mut assignment: BTreeMap<RsuId, Vec<VehicleId>> = BTreeMap::new();
    let mut unclustered = Vec::new();
    let by_id: BTreeMap<VehicleId, &Vehicle> = vehicles.iter().map(|v| (v.id, v)).collect();

    for vehicle in vehicles {
        if vehicle.is_depleted() {
            continue;
        }
        match nearest_in_coverage(vehicle, rsus) {
            Some(rsu_id) => assignment.entry(rsu_id).or_default().push(vehicle.id),
            None => unclustered.push(vehicle.id),
        }
    }

    let rsu_by_id: BTreeMap<RsuId, &Rsu> = rsus.iter().map(|r| (r.id, r)).collect();
    let mut clusters = Vec::new();
    let mut ledgers = BTreeMap::new();

    for (rsu_id, mut member_ids) in assignment {
        member_ids.sort();
        let rsu = rsu_by_id[&rsu_id];
        let id = ClusterId(*next_cluster_id);
        *next_cluster_id += 1;

        let members: Vec<&Vehicle> = member_ids.iter().map(|vid| by_id[vid]).collect();
        let candidates = score_candidates(&members, rsu, &cfg.election_weights, &cfg.radio);

        let mut ledger = Ledger::new(LedgerTier::Cluster, cfg.gas_model, round);
        let head = elect_head(id, rsu_id, &candidates, &mut ledger, round)?;
        let key = derive_keypair(cfg.seed, "cluster-key", id.0, 0);
        ledger.append_block(
            vec![Tx::ClusterRegistration {
                cluster: id,
                rsu: rsu_id,
                head,
                cluster_public_key: key.public_bytes(),
                members: member_ids.clone(),
            }],
            round,
        )?;

        let vote_record: Vec<VoteEntry> = candidates
            .iter()
            .map(|c| VoteEntry { voter: rsu_id, candidate: c.vehicle, score: c.total })
            .collect();

        clusters.push(Cluster {
            id,
            rsu_id,
            members: member_ids.into_iter().collect(),
            head,
            key,
            key_epoch: 0,
            vote_record,
        });
        ledgers.insert(id, ledger);
    }

    Ok(FormationOutcome { clusters, ledgers, unclustered })
}

/// What a churn application did to one cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChurnOutcome {
    /// Cluster lost its last member and must be dropped by the caller.
    pub dissolved: bool,
    /// Head changed (re-election ran and the key was rotated).
    pub head_changed: bool,
}

/// Apply membership churn to one cluster: remove departures, add joiners,
/// and — only if the head itself departed — re-elect among the remaining
/// members, rotate the cluster key, and commit fresh vote + registration
/// blocks. `roster` must contain current data for all resulting members.
#[allow(clippy::too_many_arguments)]
pub fn handle_churn(
    cluster: &mut Cluster,
    departed: &BTreeSet<VehicleId>,
    joined: &BTreeSet<VehicleId>,
    roster: &BTreeMap<VehicleId, Vehicle>,
    rsu: &Rsu,
    cfg: &ScenarioConfig,
    ledger: &mut Ledger,
    round: u64,
) -> Result<ChurnOutcome, ClusterError> {
    for vid in departed {
        if !cluster.members.contains(vid) {
            return Err(ClusterError::NotAMember(*vid));
        }
    }
    for vid in joined {
        if cluster.members.contains(vid) {
            return Err(ClusterError::AlreadyClustered(*vid));
        }
        if let Some(v) = roster.get(vid) {
            if v.cluster.is_some() {
                return Err(ClusterError::AlreadyClustered(*vid));
            }
        }
    }

    for vid in departed {
        cluster.members.remove(vid);
    }
    cluster.members.extend(joined.iter().copied());

    if cluster.members.is_empty() {
        return Ok(ChurnOutcome { dissolved: true, head_changed: false });
    }
    if !departed.contains(&cluster.head) {
        return Ok(ChurnOutcome { dissolved: false, head_changed: false });
    }

    // The head left: re-elect over the remaining members and rotate the key.
    let members: Vec<&Vehicle> = cluster.members.iter().map(|vid| &roster[vid]).collect();
    let candidates = score_candidates(&members, rsu, &cfg.election_weights, &cfg.radio);
    let head = elect_head(cluster.id, cluster.rsu_id, &candidates, ledger, round)?;
    cluster.key_epoch += 1;
    cluster.key = derive_keypair(cfg.seed, "cluster-key", cluster.id.0, cluster.key_epoch);
    let member_ids: Vec<VehicleId> = cluster.members.iter().copied().collect();
    ledger.append_block(
        vec![Tx::ClusterRegistration {
            cluster: cluster.id,
            rsu: cluster.rsu_id,
            head,
            cluster_public_key: cluster.key.public_bytes(),
            members: member_ids,
        }],
        round,
    )?;
    cluster.head = head;
    cluster.vote_record = candidates
        .iter()
        .map(|c| VoteEntry { voter: cluster.rsu_id, candidate: c.vehicle, score: c.total })
        .collect();
    Ok(ChurnOutcome { dissolved: false, head_changed: true })
}
