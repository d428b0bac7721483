//! Randomized invariants that cut across modules: serialization round trips,
//! chain tamper detection, score ranges, and whole-run conservation checks
//! on small scenarios.

use proptest::prelude::*;
use std::sync::OnceLock;
use vanetsim_core::config::{validate_config, ScenarioConfig};
use vanetsim_core::engine::{self, VecSink};
use vanetsim_core::ids::{self, avg_path_normalizer, synth, ForestSettings, IsolationForest, Label};
use vanetsim_core::ledger::{fit_gas_table, Ledger, LedgerTier, Tx, VoteEntry};
use vanetsim_core::metrics::{compute_kpis, kpi_csv_string, parse_kpi_csv, replay_kpis, MetricsRow};
use vanetsim_core::{ClusterId, GasModel, RsuId, Vehicle, VehicleId};

#[test]
fn bundled_default_config_is_the_built_in_default() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.toml");
    let cfg = ScenarioConfig::from_toml_path(std::path::Path::new(path)).unwrap();
    assert_eq!(cfg, ScenarioConfig::default());
    assert!(validate_config(&cfg).is_empty());
}

#[test]
fn bundled_ids_fixture_regenerates_byte_identically() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/ids_fixture.csv");
    let committed = std::fs::read_to_string(path).unwrap();
    let regenerated = synth::to_labeled_csv(&synth::fixture_dataset(42));
    assert_eq!(committed, regenerated);
}

fn fresh_vehicle(energy: f64) -> Vehicle {
    Vehicle {
        id: VehicleId(0),
        position: vanetsim_core::Point { x: 0.0, y: 0.0 },
        speed_mps: 0.0,
        heading_rad: 0.0,
        max_speed_mps: 50.0,
        max_accel_mps2: 3.6,
        max_decel_mps2: 5.0,
        processing_power: 0.5,
        type_weight: 0.5,
        energy_mj: energy,
        cluster: None,
    }
}

fn shared_forest() -> &'static IsolationForest {
    static FOREST: OnceLock<IsolationForest> = OnceLock::new();
    FOREST.get_or_init(|| {
        let data = synth::fixture_dataset(3);
        ids::fit(&data, &ForestSettings { trees: 50, subsample: 64, threshold: 0.5 }, 11).unwrap()
    })
}

fn arb_tx() -> impl Strategy<Value = Tx> {
    prop_oneof![
        (0u64..50, 0u64..50, proptest::collection::vec((0u64..6, 0u64..50, 0.0f64..1.0), 1..4))
            .prop_map(|(c, e, entries)| Tx::Vote {
                cluster: ClusterId(c),
                elected: VehicleId(e),
                entries: entries
                    .into_iter()
                    .map(|(r, v, s)| VoteEntry {
                        voter: RsuId(r),
                        candidate: VehicleId(v),
                        score: s,
                    })
                    .collect(),
            }),
        (any::<[u8; 32]>(), 0u64..100, 0u64..1000).prop_map(|(d, s, r)| Tx::MessageDigest {
            digest: d,
            sender: VehicleId(s),
            message_round: r,
        }),
        (0u64..50, 0u64..6, 0u64..50, any::<[u8; 32]>(), proptest::collection::vec(0u64..50, 1..5))
            .prop_map(|(c, r, h, key, members)| Tx::ClusterRegistration {
                cluster: ClusterId(c),
                rsu: RsuId(r),
                head: VehicleId(h),
                cluster_public_key: key,
                members: members.into_iter().map(VehicleId).collect(),
            }),
        (0u64..50, 0u64..40, any::<[u8; 32]>()).prop_map(|(c, h, d)| Tx::VerificationRecord {
            cluster: ClusterId(c),
            height: h,
            digest: d,
        }),
    ]
}

fn build_chain(blocks: &[Vec<Tx>]) -> Ledger {
    let mut ledger = Ledger::new(LedgerTier::Cluster, GasModel::default(), 0);
    for (i, txs) in blocks.iter().enumerate() {
        ledger.append_block(txs.clone(), i as u64 + 1).unwrap();
    }
    ledger
}

proptest! {
    #[test]
    fn energy_never_goes_negative(
        start in 0.0f64..1e6,
        amounts in proptest::collection::vec(-10.0f64..1e5, 1..30),
    ) {
        let mut v = fresh_vehicle(start);
        for a in amounts {
            let before = v.energy_mj;
            let spent = v.spend_energy(a);
            prop_assert!(spent >= 0.0);
            prop_assert!(v.energy_mj >= 0.0);
            prop_assert!((before - spent - v.energy_mj).abs() < 1e-9);
        }
    }

    #[test]
    fn path_normalizer_is_monotone(a in 0usize..5000, b in 0usize..5000) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(avg_path_normalizer(lo) <= avg_path_normalizer(hi) + 1e-12);
        prop_assert_eq!(avg_path_normalizer(2), 1.0);
    }

    #[test]
    fn anomaly_scores_stay_in_the_open_unit_interval(
        x in -1e6f64..1e6,
        y in -1e6f64..1e6,
    ) {
        let forest = shared_forest();
        let score = forest.anomaly_score(&[x, y]).unwrap();
        prop_assert!(score > 0.0 && score < 1.0, "score {score} out of range");
        let label = forest.classify(&[x, y]).unwrap();
        prop_assert_eq!(label, if score >= 0.5 { Label::Malicious } else { Label::Benign });
    }

    #[test]
    fn random_chains_validate_clean(blocks in proptest::collection::vec(
        proptest::collection::vec(arb_tx(), 1..5), 1..8)) {
        let ledger = build_chain(&blocks);
        prop_assert!(ledger.validate_chain().is_valid());
        prop_assert_eq!(ledger.height(), blocks.len() as u64);
    }

    #[test]
    fn any_committed_field_tamper_is_detected(
        blocks in proptest::collection::vec(proptest::collection::vec(arb_tx(), 1..5), 1..8),
        which in any::<proptest::sample::Index>(),
        field in 0u8..6,
        byte in any::<proptest::sample::Index>(),
    ) {
        let mut ledger = build_chain(&blocks);
        let n = ledger.blocks().len();
        let b = which.index(n);
        {
            let block = &mut ledger.blocks_mut()[b];
            match field {
                0 => block.index = block.index.wrapping_add(1),
                1 => {
                    let i = byte.index(32);
                    block.prev_hash[i] ^= 0x01;
                }
                2 => block.timestamp = block.timestamp.wrapping_add(1),
                3 => block.tx_count = block.tx_count.wrapping_add(1),
                4 => block.gas_used += 1.0,
                _ => {
                    let i = byte.index(32);
                    block.hash[i] ^= 0x01;
                }
            }
        }
        let status = ledger.validate_chain();
        prop_assert!(!status.is_valid(), "tamper of field {field} in block {b} went undetected");
    }

    #[test]
    fn exact_lines_fit_exactly(
        slope in -1e3f64..1e3,
        intercept in -1e5f64..1e5,
        xs in proptest::collection::btree_set(0u32..10_000, 2..10),
    ) {
        let points: Vec<(f64, f64)> =
            xs.iter().map(|&x| (x as f64, slope * x as f64 + intercept)).collect();
        let fit = fit_gas_table(&points).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-6 * slope.abs().max(1.0));
        prop_assert!((fit.intercept - intercept).abs() <= 1e-5 * intercept.abs().max(1.0));
        prop_assert!(fit.r_squared > 1.0 - 1e-9);
    }

    #[test]
    fn kpi_rows_round_trip_through_csv(
        vehicles in 0u64..10_000,
        cluster_size in 0u64..10_000,
        nlt in 0u64..100_000,
        pdr in proptest::num::f64::POSITIVE | proptest::num::f64::NEGATIVE | proptest::num::f64::ZERO,
        thrpt in proptest::num::f64::POSITIVE | proptest::num::f64::ZERO,
        eted in proptest::num::f64::POSITIVE | proptest::num::f64::ZERO,
        ecm in proptest::num::f64::POSITIVE | proptest::num::f64::ZERO,
        overhead in 0u64..1_000_000,
    ) {
        let row = MetricsRow {
            vehicles,
            cluster_size,
            nlt_rounds: nlt,
            pdr_pct: pdr,
            thrpt_kbps: thrpt,
            eted_s: eted,
            ecm_mj: ecm,
            overhead_msgs: overhead,
        };
        let text = kpi_csv_string(&[row]);
        let parsed = parse_kpi_csv(&text).unwrap();
        prop_assert_eq!(parsed, vec![row]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10, ..ProptestConfig::default() })]

    #[test]
    fn small_scenarios_conserve_replay_and_rerun_identically(
        n_vehicles in 1usize..14,
        n_rsus in 1usize..4,
        rounds in 0u64..12,
        seed in 0u64..1_000_000,
        malicious in 0.0f64..1.0,
        recluster in 1u64..6,
        flush in 1u64..5,
        tight_energy in proptest::bool::ANY,
    ) {
        let cfg = ScenarioConfig {
            n_vehicles,
            n_rsus,
            rounds,
            seed,
            malicious_fraction: malicious,
            recluster_interval: recluster,
            cloud_flush_interval: flush,
            energy_model: vanetsim_core::config::EnergyModel {
                initial_energy_mj: if tight_energy { 12.0 } else { 50_000.0 },
                ..Default::default()
            },
            ids: vanetsim_core::config::IdsSettings {
                trees: 15,
                subsample: 32,
                train_samples: 200,
                ..Default::default()
            },
            ..Default::default()
        };

        let mut sink = VecSink::default();
        let out = engine::run(&cfg, &mut sink).unwrap();
        let c = &out.report.counters;
        prop_assert!(c.conserved(), "sent {} != delivered {} + blocked {} + dropped {}",
            c.sent, c.delivered, c.blocked, c.dropped);

        for pair in sink.events.windows(2) {
            prop_assert!(pair[0].order_key() <= pair[1].order_key(),
                "events out of order: {:?} then {:?}", pair[0], pair[1]);
        }

        for ledger in out.state.cluster_ledgers.values() {
            prop_assert!(ledger.validate_chain().is_valid());
        }
        prop_assert!(out.state.cloud_chain.validate_chain().is_valid());

        let reported = compute_kpis(&cfg, &out.report);
        let replayed = replay_kpis(&sink.events, &cfg).unwrap();
        prop_assert_eq!(replayed, reported);

        let mut sink2 = VecSink::default();
        let out2 = engine::run(&cfg, &mut sink2).unwrap();
        prop_assert_eq!(sink.events, sink2.events);
        prop_assert_eq!(compute_kpis(&cfg, &out2.report), reported);
    }
}
