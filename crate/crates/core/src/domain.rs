//! Core entities: vehicles, roadside units, and the radio geometry that
//! connects them.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident, $prefix:literal) => {
        $(#[$doc])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }

        impl From<u64> for $name {
            fn from(raw: u64) -> Self {
                Self(raw)
            }
        }
    };
}

id_type!(
    /// Identifier of a vehicle (OBU).
    VehicleId,
    "v"
);
id_type!(
    /// Identifier of a roadside unit.
    RsuId,
    "rsu"
);
id_type!(
    /// Identifier of a cluster. Fresh ids are minted at every formation, so a
    /// cluster id never refers to two different member sets.
    ClusterId,
    "c"
);

/// Planar position in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A vehicle with its kinematic envelope, residual energy budget and cluster
/// membership. Signing keys are held by the engine's key store, not inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: VehicleId,
    pub position: Point,
    /// Current scalar speed, m/s.
    pub speed_mps: f64,
    /// Direction of travel, radians.
    pub heading_rad: f64,
    pub max_speed_mps: f64,
    pub max_accel_mps2: f64,
    pub max_decel_mps2: f64,
    /// Relative on-board processing capacity in [0, 1].
    pub processing_power: f64,
    /// Static capability weight of the vehicle's type in [0, 1] (a bus or
    /// utility vehicle makes a steadier cluster head than a two-wheeler).
    pub type_weight: f64,
    /// Residual energy, millijoules. Zero means depleted: the vehicle stops
    /// generating or relaying traffic.
    pub energy_mj: f64,
    pub cluster: Option<ClusterId>,
}

impl Vehicle {
    pub fn is_depleted(&self) -> bool {
        self.energy_mj <= 0.0
    }

    /// Spend up to `amount` millijoules; energy never goes negative. Returns
    /// how much was actually consumed.
    pub fn spend_energy(&mut self, amount: f64) -> f64 {
        let spent = amount.min(self.energy_mj).max(0.0);
        self.energy_mj -= spent;
        spent
    }
}

/// A roadside unit: fixed position, coverage disc, and the clusters it
/// currently anchors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rsu {
    pub id: RsuId,
    pub position: Point,
    pub coverage_radius_m: f64,
    pub clusters: BTreeSet<ClusterId>,
}

impl Rsu {
    pub fn new(id: RsuId, position: Point, coverage_radius_m: f64) -> Self {
        Self { id, position, coverage_radius_m, clusters: BTreeSet::new() }
    }

    pub fn covers(&self, p: &Point) -> bool {
        self.position.distance_to(p) <= self.coverage_radius_m
    }
}

/// Received signal strength at an RSU from a vehicle, in dBm, under a
/// log-distance path-loss model: `tx_power - 10 * exp * log10(d)`, with the
/// distance floored at one metre so co-located nodes do not blow up the
/// logarithm. Strictly decreasing in distance beyond a metre.
pub fn signal_strength(v: &Vehicle, r: &Rsu, tx_power_dbm: f64, path_loss_exp: f64) -> f64 {
    let d = v.position.distance_to(&r.position).max(1.0);
    tx_power_dbm - 10.0 * path_loss_exp * d.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vehicle_at(x: f64, y: f64) -> Vehicle {
        Vehicle {
            id: VehicleId(0),
            position: Point::new(x, y),
            speed_mps: 0.0,
            heading_rad: 0.0,
            max_speed_mps: 50.0,
            max_accel_mps2: 3.6,
            max_decel_mps2: 5.0,
            processing_power: 0.5,
            type_weight: 0.5,
            energy_mj: 100.0,
            cluster: None,
        }
    }

    #[test]
    fn distance_is_euclidean() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(3.0, 4.0);
        assert_eq!(a.distance_to(&b), 5.0);
        assert_eq!(b.distance_to(&a), 5.0);
    }

    #[test]
    fn signal_decays_with_distance() {
        let r = Rsu::new(RsuId(0), Point::new(0.0, 0.0), 500.0);
        let near = signal_strength(&vehicle_at(10.0, 0.0), &r, 20.0, 2.7);
        let far = signal_strength(&vehicle_at(100.0, 0.0), &r, 20.0, 2.7);
        assert!(near > far);
        // One decade of distance costs 10 * exponent dB.
        assert!((near - far - 27.0).abs() < 1e-9);
    }

    #[test]
    fn signal_is_floored_at_one_metre() {
        let r = Rsu::new(RsuId(0), Point::new(0.0, 0.0), 500.0);
        let on_top = signal_strength(&vehicle_at(0.0, 0.0), &r, 20.0, 2.7);
        let metre = signal_strength(&vehicle_at(1.0, 0.0), &r, 20.0, 2.7);
        assert_eq!(on_top, 20.0);
        assert_eq!(metre, 20.0);
    }

    #[test]
    fn energy_never_goes_negative() {
        let mut v = vehicle_at(0.0, 0.0);
        v.energy_mj = 1.0;
        assert_eq!(v.spend_energy(0.4), 0.4);
        assert_eq!(v.spend_energy(2.0), 0.6);
        assert!(v.is_depleted());
        assert_eq!(v.spend_energy(1.0), 0.0);
        assert_eq!(v.energy_mj, 0.0);
    }

    #[test]
    fn coverage_uses_radius() {
        let r = Rsu::new(RsuId(3), Point::new(0.0, 0.0), 100.0);
        assert!(r.covers(&Point::new(100.0, 0.0)));
        assert!(!r.covers(&Point::new(100.1, 0.0)));
        assert_eq!(format!("{}", r.id), "rsu3");
        assert_eq!(format!("{}", VehicleId(9)), "v9");
        assert_eq!(format!("{}", ClusterId(2)), "c2");
    }
}
