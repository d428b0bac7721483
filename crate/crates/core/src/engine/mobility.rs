//! Vehicle kinematics: 1 Hz bounded-acceleration motion with reflecting
//! area borders.

use crate::config::Area;
use crate::domain::{Point, Vehicle};
use std::f64::consts::{PI, TAU};

/// Fold a coordinate back into [0, len] by reflection, reporting whether the
/// axis direction flipped. Handles arbitrary overshoot in one pass (the
/// reflected trajectory is periodic with period 2·len).
fn reflect(pos: f64, len: f64) -> (f64, bool) {
    let folded = pos.rem_euclid(2.0 * len);
    if folded > len {
        (2.0 * len - folded, true)
    } else {
        (folded, false)
    }
}

/// Advance one vehicle by one 1-second step: apply the acceleration, clamp
/// speed into [0, max], move along the heading, and bounce off the borders.
pub fn advance(v: &mut Vehicle, accel_mps2: f64, area: &Area) {
    const DT: f64 = 1.0;
    v.speed_mps = (v.speed_mps + accel_mps2 * DT).clamp(0.0, v.max_speed_mps);
    let raw_x = v.position.x + v.speed_mps * DT * v.heading_rad.cos();
    let raw_y = v.position.y + v.speed_mps * DT * v.heading_rad.sin();
    let (x, flip_x) = reflect(raw_x, area.width_m);
    let (y, flip_y) = reflect(raw_y, area.height_m);
    let mut heading = v.heading_rad;
    if flip_x {
        heading = PI - heading;
    }
    if flip_y {
        heading = -heading;
    }
    v.position = Point::new(x, y);
    v.heading_rad = heading.rem_euclid(TAU);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::VehicleId;

    fn vehicle(x: f64, y: f64, speed: f64, heading: f64) -> Vehicle {
        Vehicle {
            id: VehicleId(0),
            position: Point::new(x, y),
            speed_mps: speed,
            heading_rad: heading,
            max_speed_mps: 50.0,
            max_accel_mps2: 3.6,
            max_decel_mps2: 5.0,
            processing_power: 0.5,
            type_weight: 0.5,
            energy_mj: 100.0,
            cluster: None,
        }
    }

    fn area() -> Area {
        Area { width_m: 2000.0, height_m: 2000.0 }
    }

    #[test]
    fn straight_line_motion_moves_speed_meters() {
        let mut v = vehicle(100.0, 100.0, 10.0, 0.0);
        advance(&mut v, 0.0, &area());
        assert!((v.position.x - 110.0).abs() < 1e-12);
        assert!((v.position.y - 100.0).abs() < 1e-12);
    }

    #[test]
    fn speed_clamps_at_zero_and_at_max() {
        let mut v = vehicle(100.0, 100.0, 2.0, 0.0);
        advance(&mut v, -5.0, &area());
        assert_eq!(v.speed_mps, 0.0);
        let mut v = vehicle(100.0, 100.0, 49.0, 0.0);
        advance(&mut v, 3.6, &area());
        assert_eq!(v.speed_mps, 50.0);
    }

    #[test]
    fn border_reflection_keeps_vehicle_inside_and_flips_heading() {
        // Heading straight at the right wall from 5 m away at 20 m/s: ends up
        // 15 m inside, moving left.
        let mut v = vehicle(1995.0, 1000.0, 20.0, 0.0);
        advance(&mut v, 0.0, &area());
        assert!((v.position.x - 1985.0).abs() < 1e-9);
        assert!((v.heading_rad - PI).abs() < 1e-12);

        // Straight down through the bottom wall.
        let mut v = vehicle(1000.0, 3.0, 10.0, -std::f64::consts::FRAC_PI_2);
        advance(&mut v, 0.0, &area());
        assert!((v.position.y - 7.0).abs() < 1e-9);
        assert!(v.heading_rad.sin() > 0.0, "must now move upward");
    }

    #[test]
    fn positions_stay_in_bounds_under_long_random_walks() {
        use rand::Rng;
        let mut r = crate::rng::stream(3, "mobility-bounds");
        let a = Area { width_m: 40.0, height_m: 25.0 };
        let mut v = vehicle(10.0, 10.0, 30.0, 1.0);
        for _ in 0..5000 {
            let accel = r.random_range(-5.0..=3.6);
            advance(&mut v, accel, &a);
            assert!(v.position.x >= 0.0 && v.position.x <= a.width_m, "x={}", v.position.x);
            assert!(v.position.y >= 0.0 && v.position.y <= a.height_m, "y={}", v.position.y);
            assert!(v.speed_mps >= 0.0 && v.speed_mps <= 50.0);
            assert!(v.heading_rad >= 0.0 && v.heading_rad < TAU);
        }
    }

    #[test]
    fn same_inputs_same_trajectory() {
        let mut a_v = vehicle(5.0, 5.0, 12.0, 2.2);
        let mut b_v = vehicle(5.0, 5.0, 12.0, 2.2);
        let accels = [1.0, -2.0, 3.0, 0.5, -4.9];
        for acc in accels {
            advance(&mut a_v, acc, &area());
            advance(&mut b_v, acc, &area());
        }
        assert_eq!(a_v.position, b_v.position);
        assert_eq!(a_v.speed_mps, b_v.speed_mps);
        assert_eq!(a_v.heading_rad, b_v.heading_rad);
    }
}
