//! Fixtures shared by the benchmarks.

use safeguard_core::scenario::Scenario;
use safeguard_core::{ConvexPolygon, EllipseShape, PlacedEllipse, SE2Pose, Vec2};

pub const UNICYCLE_SCENARIO: &str = include_str!("../../cli/scenarios/unicycle_gap.json");
pub const ARM_SCENARIO: &str = include_str!("../../cli/scenarios/arm_three_link.json");

pub fn scenario(text: &str) -> Scenario {
    Scenario::from_json(text).expect("bundled scenario is valid")
}

pub fn triangle() -> ConvexPolygon {
    ConvexPolygon::new(vec![Vec2::new(0.8, 0.0), Vec2::new(-0.5, 0.5), Vec2::new(-0.5, -0.5)]).unwrap()
}

pub fn hexagon() -> ConvexPolygon {
    let v = (0..6)
        .map(|k| {
            let t = k as f64 * std::f64::consts::FRAC_PI_3;
            Vec2::new(0.7 * t.cos(), 0.4 * t.sin())
        })
        .collect();
    ConvexPolygon::new(v).unwrap()
}

/// A fixed spread of separated obstacle/robot placements.
pub fn scenes() -> Vec<(PlacedEllipse, SE2Pose)> {
    (0..64)
        .map(|k| {
            let s = k as f64;
            let e = PlacedEllipse::new(
                EllipseShape::new(0.5 + (s * 0.37).sin().abs() * 2.0, 0.3 + (s * 0.61).cos().abs()).unwrap(),
                SE2Pose::from_xy_theta((s * 0.3).cos(), (s * 0.7).sin(), s * 0.45),
            );
            let r = 5.0 + (s * 0.13).sin();
            let robot = SE2Pose::from_xy_theta(r * (s * 1.1).cos(), r * (s * 1.1).sin(), s * 0.9);
            (e, robot)
        })
        .collect()
}
