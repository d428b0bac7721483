//! Scenario construction: RSU grid placement and vehicle spawning.

use crate::config::ScenarioConfig;
use crate::domain::{Point, Rsu, RsuId, Vehicle, VehicleId};
use crate::rng;
use rand::Rng;
use std::f64::consts::TAU;

/// Kinematic limits shared by every vehicle.
pub const MAX_SPEED_MPS: f64 = 50.0;
pub const MAX_ACCEL_MPS2: f64 = 3.6;
pub const MAX_DECEL_MPS2: f64 = 5.0;

/// Place RSUs on a near-square grid of cell centers covering the area:
/// rows = floor(sqrt(n)), cols = ceil(n / rows), ids row-major from 0.
pub fn place_rsus(cfg: &ScenarioConfig) -> Vec<Rsu> {
    let n = cfg.n_rsus;
    let rows = ((n as f64).sqrt().floor() as usize).max(1);
    let cols = n.div_ceil(rows);
    (0..n)
        .map(|k| {
            let row = k / cols;
            let col = k % cols;
            let x = (col as f64 + 0.5) * cfg.area.width_m / cols as f64;
            let y = (row as f64 + 0.5) * cfg.area.height_m / rows as f64;
            Rsu::new(RsuId(k as u64), Point::new(x, y), cfg.radio.coverage_radius_m)
        })
        .collect()
}

/// Spawn vehicles uniformly over the area with random initial speed and
/// heading; processing power and type weight are uniform in [0, 1]. All
/// draws come from the scenario seed, in vehicle-id order.
pub fn spawn_vehicles(cfg: &ScenarioConfig) -> Vec<Vehicle> {
    let mut r = rng::stream(cfg.seed, "scenario");
    (0..cfg.n_vehicles)
        .map(|i| {
            let x = r.random_range(0.0..cfg.area.width_m);
            let y = r.random_range(0.0..cfg.area.height_m);
            let speed = r.random_range(0.0..=MAX_SPEED_MPS);
            let heading = r.random_range(0.0..TAU);
            let processing_power = r.random_range(0.0..=1.0);
            let type_weight = r.random_range(0.0..=1.0);
            Vehicle {
                id: VehicleId(i as u64),
                position: Point::new(x, y),
                speed_mps: speed,
                heading_rad: heading,
                max_speed_mps: MAX_SPEED_MPS,
                max_accel_mps2: MAX_ACCEL_MPS2,
                max_decel_mps2: MAX_DECEL_MPS2,
                processing_power,
                type_weight,
                energy_mj: cfg.energy_model.initial_energy_mj,
                cluster: None,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_rsus_form_a_3_by_4_grid() {
        let cfg = ScenarioConfig { n_rsus: 10, ..ScenarioConfig::default() };
        let rsus = place_rsus(&cfg);
        assert_eq!(rsus.len(), 10);
        // rows = 3, cols = 4; first row at y = height/6.
        assert!((rsus[0].position.y - cfg.area.height_m / 6.0).abs() < 1e-9);
        assert!((rsus[0].position.x - cfg.area.width_m / 8.0).abs() < 1e-9);
        // Row-major ids: rsu 4 starts the second row.
        assert!(rsus[4].position.y > rsus[3].position.y);
        for r in &rsus {
            assert!(r.position.x > 0.0 && r.position.x < cfg.area.width_m);
            assert!(r.position.y > 0.0 && r.position.y < cfg.area.height_m);
            assert_eq!(r.coverage_radius_m, cfg.radio.coverage_radius_m);
        }
    }

    #[test]
    fn single_rsu_sits_at_the_center() {
        let cfg = ScenarioConfig { n_rsus: 1, ..ScenarioConfig::default() };
        let rsus = place_rsus(&cfg);
        assert_eq!(rsus.len(), 1);
        assert!((rsus[0].position.x - cfg.area.width_m / 2.0).abs() < 1e-9);
        assert!((rsus[0].position.y - cfg.area.height_m / 2.0).abs() < 1e-9);
    }

    #[test]
    fn vehicles_spawn_in_bounds_with_unit_attributes() {
        let cfg = ScenarioConfig { n_vehicles: 200, ..ScenarioConfig::default() };
        let vehicles = spawn_vehicles(&cfg);
        assert_eq!(vehicles.len(), 200);
        for (i, v) in vehicles.iter().enumerate() {
            assert_eq!(v.id.0, i as u64);
            assert!(v.position.x >= 0.0 && v.position.x < cfg.area.width_m);
            assert!(v.position.y >= 0.0 && v.position.y < cfg.area.height_m);
            assert!(v.speed_mps >= 0.0 && v.speed_mps <= MAX_SPEED_MPS);
            assert!((0.0..=1.0).contains(&v.processing_power));
            assert!((0.0..=1.0).contains(&v.type_weight));
            assert_eq!(v.energy_mj, cfg.energy_model.initial_energy_mj);
            assert!(v.cluster.is_none());
        }
    }

    #[test]
    fn spawning_is_seed_deterministic() {
        let cfg = ScenarioConfig::default();
        let a = spawn_vehicles(&cfg);
        let b = spawn_vehicles(&cfg);
        assert_eq!(a, b);
        let other = spawn_vehicles(&ScenarioConfig { seed: cfg.seed + 1, ..cfg });
        assert_ne!(a, other);
    }
}
