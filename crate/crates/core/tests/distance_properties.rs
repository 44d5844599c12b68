//! Polygon–ellipse distance against a brute-force oracle, plus invariances.

use std::f64::consts::TAU;

use proptest::prelude::*;
use safeguard_core::distance::polygon_ellipse_distance;
use safeguard_core::{ConvexPolygon, EllipseShape, PlacedEllipse, SE2Pose, Vec2};

fn polygon_from(rx: f64, ry: f64, angles: &[f64], shift: Vec2) -> Option<ConvexPolygon> {
    let mut a = angles.to_vec();
    a.sort_by(f64::total_cmp);
    let n = a.len();
    let spaced = (0..n).all(|i| {
        let next = if i + 1 < n { a[i + 1] } else { a[0] + TAU };
        next - a[i] > 0.15
    });
    if !spaced {
        return None;
    }
    ConvexPolygon::new(a.iter().map(|t| Vec2::new(rx * t.cos(), ry * t.sin()) + shift).collect()).ok()
}

/// Minimum over the ellipse boundary parameter of the closed-form distance
/// to the polygon outline, refined by golden-section search.
fn oracle(e: &PlacedEllipse, poly: &ConvexPolygon, pose: &SE2Pose) -> f64 {
    let edges: Vec<(Vec2, Vec2)> = (0..poly.edge_count())
        .map(|i| {
            let (p0, p1) = poly.edge(i);
            (pose.from_frame(p0), pose.from_frame(p1))
        })
        .collect();
    let f = |t: f64| {
        let p = e.pose.from_frame(e.shape.point_at(t));
        edges
            .iter()
            .map(|(w0, w1)| {
                let d = w1 - w0;
                let tau = ((p - w0).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
                (w0 + tau * d - p).norm()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let n = 1024;
    let step = TAU / n as f64;
    let s: Vec<f64> = (0..n).map(|k| f(step * k as f64)).collect();
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut best = f64::INFINITY;
    for k in 0..n {
        if s[k] > s[(k + n - 1) % n] || s[k] > s[(k + 1) % n] {
            continue;
        }
        let (mut lo, mut hi) = (step * (k as f64 - 1.0), step * (k as f64 + 1.0));
        for _ in 0..80 {
            let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
            if f(x1) < f(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        best = best.min(f(0.5 * (lo + hi)));
    }
    best
}

fn scene() -> impl Strategy<Value = (PlacedEllipse, ConvexPolygon, SE2Pose)> {
    (
        (0.3..3.0f64, 0.3..3.0f64, -5.0..5.0f64, -5.0..5.0f64, 0.0..TAU),
        (0.2..1.5f64, 0.2..1.5f64, prop::collection::vec(0.0..TAU, 3..=6), -0.3..0.3f64),
        (-8.0..8.0f64, -8.0..8.0f64, 0.0..TAU),
    )
        .prop_filter_map("polygon vertices too close", |((a, b, x, y, th), (rx, ry, angles, s), (px, py, pth))| {
            let poly = polygon_from(rx, ry, &angles, Vec2::new(s, -s))?;
            let e = PlacedEllipse::new(EllipseShape::new(a, b).unwrap(), SE2Pose::from_xy_theta(x, y, th));
            Some((e, poly, SE2Pose::from_xy_theta(px, py, pth)))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn matches_brute_force((e, poly, pose) in scene()) {
        let r = polygon_ellipse_distance(&e, &poly, &pose);
        prop_assume!(!r.penetrating);
        let o = oracle(&e, &poly, &pose);
        prop_assert!((r.value - o).abs() < 1e-6, "Φ = {}, oracle = {}", r.value, o);
    }

    #[test]
    fn rigid_motion_leaves_distance_unchanged(
        (e, poly, pose) in scene(),
        (x, y, th) in (-10.0..10.0f64, -10.0..10.0f64, 0.0..TAU),
    ) {
        let g = SE2Pose::from_xy_theta(x, y, th);
        let before = polygon_ellipse_distance(&e, &poly, &pose).value;
        let moved = PlacedEllipse::new(e.shape, g.compose(&e.pose));
        let after = polygon_ellipse_distance(&moved, &poly, &g.compose(&pose)).value;
        prop_assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn uniform_scaling_scales_distance((e, poly, pose) in scene(), s in 0.2..5.0f64) {
        let r = polygon_ellipse_distance(&e, &poly, &pose);
        prop_assume!(!r.penetrating);
        let scaled_e = PlacedEllipse::new(
            EllipseShape::new(s * e.shape.a(), s * e.shape.b()).unwrap(),
            SE2Pose::new(s * e.pose.position(), e.pose.theta()),
        );
        let scaled_poly = ConvexPolygon::new(poly.vertices().iter().map(|v| s * v).collect()).unwrap();
        let scaled_pose = SE2Pose::new(s * pose.position(), pose.theta());
        let scaled = polygon_ellipse_distance(&scaled_e, &scaled_poly, &scaled_pose).value;
        prop_assert!((scaled - s * r.value).abs() < 1e-9 * (1.0 + s * r.value));
    }

    #[test]
    fn pose_gradients_match_finite_differences((e, poly, pose) in scene()) {
        let r = polygon_ellipse_distance(&e, &poly, &pose);
        let interior_switch = r.argmin_tau > 0.0 && r.argmin_tau < 1.0
            && (r.argmin_tau < 1e-3 || r.argmin_tau > 1.0 - 1e-3);
        prop_assume!(!r.penetrating && r.margin > 1e-4 && !interior_switch);
        let h = 1e-6;
        let phi = |q: Vec2, th: f64| {
            polygon_ellipse_distance(&e, &poly, &SE2Pose::new(q, th)).value
        };
        let (q, th) = (pose.position(), pose.theta());
        let fd = Vec2::new(
            (phi(q + Vec2::new(h, 0.0), th) - phi(q - Vec2::new(h, 0.0), th)) / (2.0 * h),
            (phi(q + Vec2::new(0.0, h), th) - phi(q - Vec2::new(0.0, h), th)) / (2.0 * h),
        );
        let fd_th = (phi(q, th + h) - phi(q, th - h)) / (2.0 * h);
        prop_assert!((fd - r.grad_qtilde).norm() < 1e-5 * r.grad_qtilde.norm().max(1.0));
        prop_assert!((fd_th - r.grad_thetatilde).abs() < 1e-5 * r.grad_thetatilde.abs().max(1.0));
        // translating both bodies together changes nothing
        prop_assert!((r.grad_q + r.grad_qtilde).norm() < 1e-9);
    }
}
