//! Hot-path benchmarks: forest training and scoring, chain append and
//! validation, cluster formation, and whole simulation rounds.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use vanetsim_core::cluster::form_clusters;
use vanetsim_core::config::ScenarioConfig;
use vanetsim_core::engine::{self, scenario, NullSink};
use vanetsim_core::ids::{self, synth, ForestSettings};
use vanetsim_core::ledger::{Ledger, LedgerTier, Tx};
use vanetsim_core::{rng, GasModel, VehicleId};

fn training_data() -> Vec<ids::FlowFeatures> {
    let mut r = rng::stream(5, "bench-train");
    synth::gaussian_inliers(&mut r, 2000, 4, 1.0)
}

fn forest_benches(c: &mut Criterion) {
    let data = training_data();
    let settings = ForestSettings { trees: 100, subsample: 256, threshold: 0.5 };

    c.bench_function("forest_fit_100_trees_2000_rows", |b| {
        b.iter(|| ids::fit(&data, &settings, 7).unwrap())
    });

    let forest = ids::fit(&data, &settings, 7).unwrap();
    let queries: Vec<Vec<f64>> = data.iter().take(1000).map(|f| f.values.clone()).collect();
    c.bench_function("forest_score_1000_points", |b| {
        b.iter(|| -> f64 { queries.iter().map(|q| forest.anomaly_score(q).unwrap()).sum() })
    });
}

fn digest_block(round: u64) -> Vec<Tx> {
    (0..5u64)
        .map(|i| {
            let mut digest = [0u8; 32];
            digest[..8].copy_from_slice(&(round * 8 + i).to_le_bytes());
            Tx::MessageDigest { digest, sender: VehicleId(i), message_round: round }
        })
        .collect()
}

fn ledger_benches(c: &mut Criterion) {
    let mut chain = Ledger::new(LedgerTier::Cluster, GasModel::default(), 0);
    for round in 1..=100 {
        chain.append_block(digest_block(round), round).unwrap();
    }

    c.bench_function("ledger_append_5_tx_block", |b| {
        b.iter_batched(
            || chain.clone(),
            |mut ch| {
                ch.append_block(digest_block(101), 101).unwrap();
                ch
            },
            BatchSize::SmallInput,
        )
    });

    c.bench_function("ledger_validate_100_blocks", |b| b.iter(|| chain.validate_chain()));
}

fn clustering_bench(c: &mut Criterion) {
    let cfg = ScenarioConfig { n_vehicles: 200, n_rsus: 10, ..ScenarioConfig::default() };
    let vehicles = scenario::spawn_vehicles(&cfg);
    let rsus = scenario::place_rsus(&cfg);

    c.bench_function("cluster_formation_200_vehicles", |b| {
        b.iter(|| {
            let mut next_id = 0;
            form_clusters(&vehicles, &rsus, &cfg, 0, &mut next_id).unwrap()
        })
    });
}

fn engine_bench(c: &mut Criterion) {
    let cfg = ScenarioConfig {
        n_vehicles: 20,
        n_rsus: 4,
        rounds: 50,
        ids: vanetsim_core::config::IdsSettings {
            trees: 50,
            subsample: 128,
            train_samples: 500,
            ..Default::default()
        },
        ..ScenarioConfig::default()
    };
    let mut group = c.benchmark_group("engine");
    group.sample_size(10);
    group.bench_function("run_20_vehicles_50_rounds", |b| {
        b.iter(|| engine::run(&cfg, &mut NullSink).unwrap())
    });
    group.finish();
}

criterion_group!(benches, forest_benches, ledger_benches, clustering_bench, engine_bench);
criterion_main!(benches);
