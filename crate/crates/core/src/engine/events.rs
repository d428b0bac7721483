//! Event records emitted by the simulation, and the sinks that capture them.
//!
//! The log is an append-only, JSON-lines-friendly trace: every record carries
//! its round, and records appear in (round, kind, subject) order. The log is
//! detailed enough to recompute every reported KPI without rerunning the
//! simulation (see [`crate::metrics::replay_kpis`]).

use crate::control::{FlowAction, TwoStepOutcome};
use crate::ids::Label;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Membership summary of one freshly formed cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSnapshot {
    pub cluster: u64,
    pub rsu: u64,
    pub head: u64,
    pub members: u64,
}

/// One simulation event. Ids are plain integers so the log stays greppable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventRecord {
    /// A member vehicle produced a message. `malicious` is ground truth,
    /// recorded for offline detector scoring; the simulation itself acts
    /// only on detector verdicts.
    Generate { round: u64, message_id: u64, sender: u64, cluster: u64, bytes: u32, malicious: bool },
    /// The message reached its cluster head.
    ClusterForward { round: u64, message_id: u64, sender: u64, head: u64, cluster: u64 },
    /// Detector verdict at the head, before anything is signed or stored.
    IdsCheck { round: u64, message_id: u64, cluster: u64, score: f64, verdict: Label },
    /// A block of message digests was appended to a cluster chain.
    LedgerCommit {
        round: u64,
        cluster: u64,
        height: u64,
        tx_count: u64,
        gas_used: f64,
        block_hash: String,
    },
    /// The controller verified and routed one message.
    ControllerRoute {
        round: u64,
        message_id: u64,
        cluster: u64,
        controller: usize,
        action: FlowAction,
        verify: TwoStepOutcome,
        delivered: bool,
        sdn_delay_s: f64,
        nfv_delay_s: f64,
        /// Full end-to-end delay if delivered, 0 otherwise.
        delay_s: f64,
    },
    /// Pending cluster-chain blocks were anchored on the cloud chain.
    CloudFlush { round: u64, anchored: u64, cloud_height: u64, gas_used: f64 },
    /// Membership changed: vehicles depleted, clusters dissolved, clusters
    /// formed. A full re-formation lists every replaced cluster in
    /// `dissolved` and every new one in `formed`; `votes` counts the vote
    /// entries committed by the elections. `unclustered` is only meaningful
    /// after a formation (0 otherwise).
    Churn {
        round: u64,
        departed: Vec<u64>,
        dissolved: Vec<u64>,
        formed: Vec<ClusterSnapshot>,
        unclustered: u64,
        votes: u64,
    },
}

impl EventRecord {
    pub fn round(&self) -> u64 {
        match self {
            EventRecord::Generate { round, .. }
            | EventRecord::ClusterForward { round, .. }
            | EventRecord::IdsCheck { round, .. }
            | EventRecord::LedgerCommit { round, .. }
            | EventRecord::ControllerRoute { round, .. }
            | EventRecord::CloudFlush { round, .. }
            | EventRecord::Churn { round, .. } => *round,
        }
    }

    /// Position of this kind in the within-round execution order.
    pub fn kind_rank(&self) -> u8 {
        match self {
            EventRecord::Generate { .. } => 0,
            EventRecord::ClusterForward { .. } => 1,
            EventRecord::IdsCheck { .. } => 2,
            EventRecord::LedgerCommit { .. } => 3,
            EventRecord::ControllerRoute { .. } => 4,
            EventRecord::CloudFlush { .. } => 5,
            EventRecord::Churn { .. } => 6,
        }
    }

    /// Tie-break id within (round, kind): the message id where there is one,
    /// the cluster id for ledger commits, 0 for singleton kinds.
    pub fn subject(&self) -> u64 {
        match self {
            EventRecord::Generate { message_id, .. }
            | EventRecord::ClusterForward { message_id, .. }
            | EventRecord::IdsCheck { message_id, .. }
            | EventRecord::ControllerRoute { message_id, .. } => *message_id,
            EventRecord::LedgerCommit { cluster, .. } => *cluster,
            EventRecord::CloudFlush { .. } | EventRecord::Churn { .. } => 0,
        }
    }

    /// Sort key realizing the log's total order.
    pub fn order_key(&self) -> (u64, u8, u64) {
        (self.round(), self.kind_rank(), self.subject())
    }
}

/// Receives events as the simulation produces them.
pub trait EventSink {
    fn record(&mut self, event: &EventRecord) -> std::io::Result<()>;
}

/// Discards everything; the default for throughput-oriented runs.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl EventSink for NullSink {
    fn record(&mut self, _event: &EventRecord) -> std::io::Result<()> {
        Ok(())
    }
}

/// Buffers every event in memory, for tests and the replay audit.
#[derive(Debug, Default, Clone)]
pub struct VecSink {
    pub events: Vec<EventRecord>,
}

impl VecSink {
    pub fn new() -> Self {
        Self::default()
    }
}

impl EventSink for VecSink {
    fn record(&mut self, event: &EventRecord) -> std::io::Result<()> {
        self.events.push(event.clone());
        Ok(())
    }
}

/// Streams events as JSON lines, one record per line.
#[derive(Debug)]
pub struct JsonlSink<W: Write> {
    writer: W,
}

impl<W: Write> JsonlSink<W> {
    pub fn new(writer: W) -> Self {
        Self { writer }
    }

    pub fn into_inner(self) -> W {
        self.writer
    }
}

impl<W: Write> EventSink for JsonlSink<W> {
    fn record(&mut self, event: &EventRecord) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.writer, event)?;
        self.writer.write_all(b"\n")
    }
}

/// Parse a JSON-lines event log back into records (blank lines skipped).
pub fn parse_jsonl(text: &str) -> Result<Vec<EventRecord>, serde_json::Error> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trips() {
        let events = vec![
            EventRecord::Generate {
                round: 1,
                message_id: 0,
                sender: 4,
                cluster: 2,
                bytes: 256,
                malicious: false,
            },
            EventRecord::ControllerRoute {
                round: 1,
                message_id: 0,
                cluster: 2,
                controller: 1,
                action: FlowAction::ForwardToCloud,
                verify: TwoStepOutcome::Accepted,
                delivered: true,
                sdn_delay_s: 0.05,
                nfv_delay_s: 0.05,
                delay_s: 0.55,
            },
            EventRecord::Churn {
                round: 1,
                departed: vec![7],
                dissolved: vec![2],
                formed: vec![ClusterSnapshot { cluster: 3, rsu: 0, head: 4, members: 5 }],
                unclustered: 1,
                votes: 5,
            },
        ];
        let mut sink = JsonlSink::new(Vec::new());
        for e in &events {
            sink.record(e).unwrap();
        }
        let text = String::from_utf8(sink.into_inner()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().next().unwrap().contains("\"kind\":\"generate\""));
        let parsed = parse_jsonl(&text).unwrap();
        assert_eq!(parsed, events);
    }

    #[test]
    fn order_keys_follow_the_kind_ranking() {
        let generate = EventRecord::Generate {
            round: 3,
            message_id: 9,
            sender: 0,
            cluster: 0,
            bytes: 100,
            malicious: false,
        };
        let flush = EventRecord::CloudFlush { round: 3, anchored: 2, cloud_height: 1, gas_used: 0.0 };
        let churn_prev_round = EventRecord::Churn {
            round: 2,
            departed: vec![],
            dissolved: vec![],
            formed: vec![],
            unclustered: 0,
            votes: 0,
        };
        assert!(churn_prev_round.order_key() < generate.order_key());
        assert!(generate.order_key() < flush.order_key());
    }

    #[test]
    fn null_and_vec_sinks_behave() {
        let ev = EventRecord::CloudFlush { round: 0, anchored: 0, cloud_height: 0, gas_used: 0.0 };
        NullSink.record(&ev).unwrap();
        let mut vec_sink = VecSink::new();
        vec_sink.record(&ev).unwrap();
        assert_eq!(vec_sink.events, vec![ev]);
    }
}
