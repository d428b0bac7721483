//! KPI computation, the closed-form throughput model, the fixed-schema KPI
//! CSV, sweep report bundling, and the event-log replay audit.
//!
//! [`replay_kpis`] recomputes every KPI from nothing but the event log and
//! the configuration, repeating the engine's arithmetic in the same order,
//! so an honest log reproduces the reported row *exactly* — a cheap
//! tamper-evidence check for archived runs.

use crate::config::{DelayModel, ScenarioConfig};
use crate::engine::{EventRecord, RunReport, SweepCell};
use crate::error::{KpiCsvError, ReplayError};
use crate::ids::Label;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One KPI sampling window (closed every 10 rounds and at run end).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSample {
    pub index: u64,
    pub start_round: u64,
    pub end_round: u64,
    /// Data generated per vehicle over the window, in Mbit.
    pub d_mbit_per_vehicle: f64,
    /// Cluster size fed to the model: the configured target, or the live
    /// mean at window close.
    pub cluster_size: f64,
    pub model_cluster_mbps: f64,
    pub model_vehicle_mbps: f64,
}

/// One row of the KPI table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub vehicles: u64,
    pub cluster_size: u64,
    pub nlt_rounds: u64,
    pub pdr_pct: f64,
    pub thrpt_kbps: f64,
    pub eted_s: f64,
    pub ecm_mj: f64,
    pub overhead_msgs: u64,
}

pub const KPI_HEADER: &str =
    "vehicles,cluster_size,nlt_rounds,pdr_pct,thrpt_kbps,eted_s,ecm_mj,overhead_msgs";

/// Cluster-level throughput model: members times per-vehicle data over the
/// sum of intra-cluster, block-commit, controller, and processing delays.
pub fn throughput_mbps_for_cluster(cluster_size: f64, d_mbit_per_vehicle: f64, dm: &DelayModel) -> f64 {
    cluster_size * d_mbit_per_vehicle / dm.cluster_denominator_s()
}

/// Network-level variant: vehicle count over the vehicle-to-infrastructure
/// delay stack.
pub fn throughput_mbps_for_vehicles(vehicles: f64, d_mbit_per_vehicle: f64, dm: &DelayModel) -> f64 {
    vehicles * d_mbit_per_vehicle / dm.vehicle_denominator_s()
}

/// Assemble a KPI row from raw aggregates. Shared by the engine-report path
/// and the replay audit so both perform bit-identical arithmetic.
#[allow(clippy::too_many_arguments)]
fn row_from_aggregates(
    cfg: &ScenarioConfig,
    mean_cluster_size: f64,
    nlt_round: u64,
    sent: u64,
    delivered: u64,
    delivered_bits: u64,
    delay_sum_s: f64,
    total_energy_mj: f64,
    exchanged_msgs: u64,
) -> MetricsRow {
    let cluster_size = match cfg.cluster_size_target {
        Some(target) => target as u64,
        None => mean_cluster_size.round() as u64,
    };
    let pdr_pct = if sent == 0 { 0.0 } else { delivered as f64 / sent as f64 * 100.0 };
    let thrpt_kbps = if cfg.rounds == 0 {
        0.0
    } else {
        delivered_bits as f64 / cfg.rounds as f64 / 1000.0
    };
    let eted_s = if delivered == 0 { 0.0 } else { delay_sum_s / delivered as f64 };
    let ecm_mj = total_energy_mj / cfg.n_vehicles as f64;
    MetricsRow {
        vehicles: cfg.n_vehicles as u64,
        cluster_size,
        nlt_rounds: nlt_round,
        pdr_pct,
        thrpt_kbps,
        eted_s,
        ecm_mj,
        overhead_msgs: exchanged_msgs,
    }
}

/// Reduce a finished run to its KPI row.
pub fn compute_kpis(cfg: &ScenarioConfig, report: &RunReport) -> MetricsRow {
    row_from_aggregates(
        cfg,
        report.mean_cluster_size,
        report.nlt_round,
        report.counters.sent,
        report.counters.delivered,
        report.delivered_bits,
        report.delay_sum_s,
        report.total_energy_mj,
        report.counters.exchanged_msgs,
    )
}

impl MetricsRow {
    /// Row in the fixed CSV column order. Floats print in shortest
    /// round-trip form, so emit -> parse -> emit is byte-identical.
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.vehicles,
            self.cluster_size,
            self.nlt_rounds,
            self.pdr_pct,
            self.thrpt_kbps,
            self.eted_s,
            self.ecm_mj,
            self.overhead_msgs
        )
    }

    fn parse_line(line: &str, lineno: usize) -> Result<Self, KpiCsvError> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(KpiCsvError::Row {
                line: lineno,
                msg: format!("expected 8 fields, got {}", fields.len()),
            });
        }
        fn int(s: &str, lineno: usize, col: &str) -> Result<u64, KpiCsvError> {
            s.parse().map_err(|e| KpiCsvError::Row { line: lineno, msg: format!("{col}: {e}") })
        }
        fn num(s: &str, lineno: usize, col: &str) -> Result<f64, KpiCsvError> {
            s.parse().map_err(|e| KpiCsvError::Row { line: lineno, msg: format!("{col}: {e}") })
        }
        Ok(MetricsRow {
            vehicles: int(fields[0], lineno, "vehicles")?,
            cluster_size: int(fields[1], lineno, "cluster_size")?,
            nlt_rounds: int(fields[2], lineno, "nlt_rounds")?,
            pdr_pct: num(fields[3], lineno, "pdr_pct")?,
            thrpt_kbps: num(fields[4], lineno, "thrpt_kbps")?,
            eted_s: num(fields[5], lineno, "eted_s")?,
            ecm_mj: num(fields[6], lineno, "ecm_mj")?,
            overhead_msgs: int(fields[7], lineno, "overhead_msgs")?,
        })
    }
}

/// Serialize rows under the fixed header (trailing newline included).
pub fn kpi_csv_string(rows: &[MetricsRow]) -> String {
    let mut out = String::from(KPI_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

/// Parse KPI CSV text; the header must match the schema byte for byte.
pub fn parse_kpi_csv(text: &str) -> Result<Vec<MetricsRow>, KpiCsvError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header == KPI_HEADER => {}
        Some((_, header)) => return Err(KpiCsvError::Header(header.to_string())),
        None => return Err(KpiCsvError::Header(String::new())),
    }
    lines.map(|(i, line)| MetricsRow::parse_line(line, i + 1)).collect()
}

/// Everything a sweep produces, shaped for writing out: the KPI table plus
/// per-cluster-size series of model throughput and messaging overhead
/// against vehicle count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub kpi_rows: Vec<MetricsRow>,
    pub cluster_throughput_series: BTreeMap<u32, Vec<(usize, f64)>>,
    pub overhead_series: BTreeMap<u32, Vec<(usize, u64)>>,
}

impl ReportBundle {
    pub fn from_cells(cells: &[SweepCell]) -> Self {
        let kpi_rows = cells.iter().map(|c| c.row).collect();
        let mut cluster_throughput_series: BTreeMap<u32, Vec<(usize, f64)>> = BTreeMap::new();
        let mut overhead_series: BTreeMap<u32, Vec<(usize, u64)>> = BTreeMap::new();
        for cell in cells {
            cluster_throughput_series
                .entry(cell.cluster_size)
                .or_default()
                .push((cell.vehicles, cell.mean_model_cluster_mbps));
            overhead_series
                .entry(cell.cluster_size)
                .or_default()
                .push((cell.vehicles, cell.row.overhead_msgs));
        }
        for series in cluster_throughput_series.values_mut() {
            series.sort_by_key(|(v, _)| *v);
        }
        for series in overhead_series.values_mut() {
            series.sort_by_key(|(v, _)| *v);
        }
        Self { kpi_rows, cluster_throughput_series, overhead_series }
    }

    pub fn kpi_csv(&self) -> String {
        kpi_csv_string(&self.kpi_rows)
    }

    pub fn cluster_throughput_csv(&self) -> String {
        let mut out = String::from("cluster_size,vehicles,model_thrpt_mbps\n");
        for (size, series) in &self.cluster_throughput_series {
            for (vehicles, mbps) in series {
                out.push_str(&format!("{size},{vehicles},{mbps}\n"));
            }
        }
        out
    }

    pub fn overhead_csv(&self) -> String {
        let mut out = String::from("cluster_size,vehicles,overhead_msgs\n");
        for (size, series) in &self.overhead_series {
            for (vehicles, overhead) in series {
                out.push_str(&format!("{size},{vehicles},{overhead}\n"));
            }
        }
        out
    }
}

/// Recompute the KPI row from an event log alone.
///
/// The replay repeats the engine's accounting — including per-vehicle energy
/// with the same spend order and the same clamping — so the result of an
/// unmodified log equals the engine's own row exactly, not approximately.
pub fn replay_kpis(events: &[EventRecord], cfg: &ScenarioConfig) -> Result<MetricsRow, ReplayError> {
    let n = cfg.n_vehicles;
    let check_vehicle = |id: u64| -> Result<usize, ReplayError> {
        if (id as usize) < n {
            Ok(id as usize)
        } else {
            Err(ReplayError::VehicleOutOfRange(id, n))
        }
    };

    let mut sent = 0u64;
    let mut delivered = 0u64;
    let mut blocked = 0u64;
    let mut dropped = 0u64;
    let mut exchanged = 0u64;
    let mut delay_sum = 0.0f64;
    let mut delivered_bits = 0u64;
    let mut clusters_formed = 0u64;
    let mut member_total = 0u64;
    let mut first_depletion: Option<u64> = None;

    let mut energy = vec![cfg.energy_model.initial_energy_mj; n];
    let mut total_energy = 0.0f64;
    let mut depleted = vec![false; n];
    // cluster id -> head id, for the per-round head-overhead charge
    let mut live: BTreeMap<u64, u64> = BTreeMap::new();

    let tx_per_byte = cfg.energy_model.tx_cost_per_byte;
    let rx_per_byte = cfg.energy_model.rx_cost_per_byte;

    let mut cursor = 0usize;
    let mut last_round_seen = 0u64;
    for ev in events {
        let r = ev.round();
        if r < last_round_seen {
            return Err(ReplayError::NonMonotonicRounds(r, last_round_seen));
        }
        last_round_seen = r;
    }

    for r in 0..=cfg.rounds {
        // Slice out this round's events (the log is round-monotonic).
        let start = cursor;
        while cursor < events.len() && events[cursor].round() == r {
            cursor += 1;
        }
        let round_events = &events[start..cursor];

        // (sender, bytes, head) per message, in generation order.
        let mut msg_meta: BTreeMap<u64, (u64, u32)> = BTreeMap::new();
        let mut forwards: Vec<(u64, u64)> = Vec::new(); // (message id, head)
        let mut routes: Vec<u64> = Vec::new(); // message ids, route order
        let mut churns: Vec<(&Vec<u64>, &Vec<crate::engine::ClusterSnapshot>, u64)> = Vec::new();

        for ev in round_events {
            match ev {
                EventRecord::Generate { message_id, sender, bytes, .. } => {
                    sent += 1;
                    msg_meta.insert(*message_id, (*sender, *bytes));
                }
                EventRecord::ClusterForward { message_id, head, .. } => {
                    exchanged += 1;
                    if !msg_meta.contains_key(message_id) {
                        return Err(ReplayError::UnknownMessage(*message_id));
                    }
                    forwards.push((*message_id, *head));
                }
                EventRecord::IdsCheck { verdict, .. } => {
                    if *verdict == Label::Malicious {
                        blocked += 1;
                    }
                }
                EventRecord::LedgerCommit { .. } => exchanged += 1,
                EventRecord::ControllerRoute { message_id, delivered: ok, delay_s, .. } => {
                    exchanged += 1;
                    let (_, bytes) = msg_meta
                        .get(message_id)
                        .ok_or(ReplayError::UnknownMessage(*message_id))?;
                    if *ok {
                        delivered += 1;
                        delivered_bits += *bytes as u64 * 8;
                        delay_sum += delay_s;
                    } else {
                        dropped += 1;
                    }
                    routes.push(*message_id);
                }
                EventRecord::CloudFlush { .. } => exchanged += 1,
                EventRecord::Churn { dissolved, formed, votes, .. } => {
                    churns.push((dissolved, formed, *votes));
                }
            }
        }

        // Energy replay mirrors the engine's canonical spend order. Round 0
        // is setup only: no energy is consumed there.
        if r >= 1 {
            let mut spend = |idx: usize, amount: f64, energy: &mut [f64]| {
                let spent = amount.min(energy[idx]).max(0.0);
                energy[idx] -= spent;
                total_energy += spent;
            };
            let head_of_msg: BTreeMap<u64, u64> = forwards.iter().copied().collect();
            for (mid, head) in &forwards {
                let (sender, bytes) = msg_meta[mid];
                spend(check_vehicle(sender)?, tx_per_byte * bytes as f64, &mut energy);
                spend(check_vehicle(*head)?, rx_per_byte * bytes as f64, &mut energy);
            }
            for mid in &routes {
                let (_, bytes) = msg_meta[mid];
                let head = head_of_msg[mid];
                spend(check_vehicle(head)?, tx_per_byte * bytes as f64, &mut energy);
            }
            for idx in 0..n {
                spend(idx, cfg.energy_model.idle_cost_per_round, &mut energy);
            }
            let heads: Vec<u64> = live.values().copied().collect();
            for head in heads {
                spend(check_vehicle(head)?, cfg.energy_model.ch_overhead_per_round, &mut energy);
            }
            for (idx, e) in energy.iter().enumerate() {
                if !depleted[idx] && *e <= 0.0 {
                    depleted[idx] = true;
                    if first_depletion.is_none() {
                        first_depletion = Some(r);
                    }
                }
            }
        }

        // Apply this round's membership changes after the energy replay,
        // matching the engine's churn-last ordering.
        for (dissolved, formed, votes) in churns {
            for cid in dissolved {
                live.remove(cid);
            }
            for snap in formed {
                live.insert(snap.cluster, snap.head);
            }
            clusters_formed += formed.len() as u64;
            member_total += formed.iter().map(|s| s.members).sum::<u64>();
            exchanged += votes + 2 * formed.len() as u64;
        }
    }

    let mean_cluster_size = if clusters_formed == 0 {
        0.0
    } else {
        member_total as f64 / clusters_formed as f64
    };
    let nlt = first_depletion.unwrap_or(cfg.rounds);
    debug_assert_eq!(sent, delivered + blocked + dropped);
    Ok(row_from_aggregates(
        cfg,
        mean_cluster_size,
        nlt,
        sent,
        delivered,
        delivered_bits,
        delay_sum,
        total_energy,
        exchanged,
    ))
}
