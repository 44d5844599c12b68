//! Distance between a world-frame ellipse and a world-frame convex polygon,
//! with its partial derivatives with respect to both poses.
//!
//! The polygon is expressed in the ellipse frame (`p' = Rᵀ(R̃ p̃ + q̃ − q)`)
//! and the distance is the minimum over its edges of the segment/ellipse
//! distance. Each edge is resolved either at an interior tangency (line
//! tangent to the ellipse, parallel to the edge) or at one of its endpoints.
//! Since the result equals the ellipse SDF evaluated at the polygon witness
//! `p'`, every pose derivative follows from `∇ψ(p')` by the chain rule.

use serde::{Deserialize, Serialize};

use crate::ellipse::{closest_point_to_line, closest_point_to_point, EllipseShape};
use crate::error::GeometryError;
use crate::se2::{Mat2, Rot2, SE2Pose, Vec2};

/// Two edges whose distances differ by less than this are tied.
pub const EDGE_TIE_TOLERANCE: f64 = 1e-12;
/// Witness points closer than this are treated as the same feature when
/// computing the margin.
pub const WITNESS_MERGE_TOLERANCE: f64 = 1e-9;

/// Convex polygon in its body frame, vertices counter-clockwise.
///
/// Two vertices describe a line segment (one edge).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
}

impl TryFrom<Vec<[f64; 2]>> for ConvexPolygon {
    type Error = GeometryError;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self, Self::Error> {
        ConvexPolygon::new(v.into_iter().map(|[x, y]| Vec2::new(x, y)).collect())
    }
}

impl From<ConvexPolygon> for Vec<[f64; 2]> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices.iter().map(|v| [v.x, v.y]).collect()
    }
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        let m = vertices.len();
        if m < 2 {
            return Err(GeometryError::InvalidPolygon(format!(
                "need at least 2 vertices, got {m}"
            )));
        }
        if vertices.iter().any(|v| !(v.x.is_finite() && v.y.is_finite())) {
            return Err(GeometryError::InvalidPolygon("non-finite vertex".into()));
        }
        let edges = if m == 2 { 1 } else { m };
        for i in 0..edges {
            let d = vertices[(i + 1) % m] - vertices[i];
            if d.norm() <= 1e-9 {
                return Err(GeometryError::InvalidPolygon(format!(
                    "vertices {i} and {} coincide",
                    (i + 1) % m
                )));
            }
        }
        if m >= 3 {
            let scale = vertices.iter().map(|v| v.norm()).fold(1.0, f64::max);
            let mut area = 0.0;
            for i in 0..m {
                let (a, b, c) = (vertices[i], vertices[(i + 1) % m], vertices[(i + 2) % m]);
                if cross(b - a, c - b) < -1e-12 * scale * scale {
                    return Err(GeometryError::InvalidPolygon(format!(
                        "not convex and counter-clockwise at vertex {}",
                        (i + 1) % m
                    )));
                }
                area += cross(a, b);
            }
            if area <= 0.0 {
                return Err(GeometryError::InvalidPolygon(
                    "vertices must be counter-clockwise".into(),
                ));
            }
        }
        Ok(Self { vertices })
    }

    /// A segment from `(0, 0)` to `(length, 0)`.
    pub fn segment(length: f64) -> Result<Self, GeometryError> {
        Self::new(vec![Vec2::zeros(), Vec2::new(length, 0.0)])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn edge_count(&self) -> usize {
        match self.vertices.len() {
            2 => 1,
            m => m,
        }
    }

    /// Endpoints of edge `i` in the body frame.
    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        let m = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % m])
    }

    /// Largest vertex distance from the body origin.
    pub fn circumradius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// An ellipse placed in the world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedEllipse {
    pub shape: EllipseShape,
    pub pose: SE2Pose,
}

impl PlacedEllipse {
    pub fn new(shape: EllipseShape, pose: SE2Pose) -> Self {
        Self { shape, pose }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentDistance {
    pub distance: f64,
    pub tau: f64,
    pub seg_point: Vec2,
    pub ellipse_point: Vec2,
}

/// Distance between the ellipse and the segment `p0 → p1`, both in the
/// ellipse frame. Fails with [`GeometryError::Penetration`] when the segment
/// touches the interior.
pub fn segment_distance(
    e: &EllipseShape,
    p0: Vec2,
    p1: Vec2,
) -> Result<SegmentDistance, GeometryError> {
    let end0 = closest_point_to_point(e, p0).map_err(|_| GeometryError::Penetration)?;
    let end1 = closest_point_to_point(e, p1).map_err(|_| GeometryError::Penetration)?;
    if end0.distance < 0.0 || end1.distance < 0.0 {
        return Err(GeometryError::Penetration);
    }
    let endpoint = if end0.distance <= end1.distance {
        SegmentDistance {
            distance: end0.distance,
            tau: 0.0,
            seg_point: p0,
            ellipse_point: end0.point_on_ellipse,
        }
    } else {
        SegmentDistance {
            distance: end1.distance,
            tau: 1.0,
            seg_point: p1,
            ellipse_point: end1.point_on_ellipse,
        }
    };

    match closest_point_to_line(e, p0, p1) {
        Ok(t) if t.tau > 0.0 && t.tau < 1.0 && t.distance <= endpoint.distance => {
            Ok(SegmentDistance {
                distance: t.distance,
                tau: t.tau,
                seg_point: t.line_point,
                ellipse_point: t.ellipse_point,
            })
        }
        Ok(_) => Ok(endpoint),
        Err(GeometryError::LineIntersectsEllipse) => {
            if deepest_point(e, p0, p1).1 < 0.0 {
                Err(GeometryError::Penetration)
            } else {
                Ok(endpoint)
            }
        }
        Err(err) => Err(err),
    }
}

/// Minimizer over `τ ∈ [0, 1]` of the implicit function `(x/a)² + (y/b)² − 1`
/// along the segment, and its value.
fn deepest_point(e: &EllipseShape, p0: Vec2, p1: Vec2) -> (f64, f64) {
    let scale = |v: Vec2| Vec2::new(v.x / e.a(), v.y / e.b());
    let (s0, sd) = (scale(p0), scale(p1 - p0));
    let a = sd.norm_squared();
    let tau = if a > 0.0 {
        (-s0.dot(&sd) / a).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (tau, e.implicit(p0 + tau * (p1 - p0)))
}

/// Distance between an ellipse and a polygon, with pose derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceResult {
    /// `Φ`; negative (a surrogate) when the shapes overlap.
    pub value: f64,
    /// Polygon witness `p'` in the ellipse frame.
    pub robot_witness: Vec2,
    /// Ellipse witness in the ellipse frame.
    pub ellipse_witness: Vec2,
    /// `∇ψ(p')` in the ellipse frame.
    pub sdf_gradient: Vec2,
    /// Polygon witness `p̃` in the robot body frame.
    pub witness_body: Vec2,
    /// `∂Φ/∂q` (obstacle position).
    pub grad_q: Vec2,
    /// `∂Φ/∂θ` (obstacle orientation).
    pub grad_theta_obs: f64,
    /// `∂Φ/∂q̃` (robot position).
    pub grad_qtilde: Vec2,
    /// `∂Φ/∂θ̃` (robot orientation).
    pub grad_thetatilde: f64,
    pub argmin_edge: usize,
    pub argmin_tau: f64,
    /// Gap between the best edge distance and the closest competing witness.
    pub margin: f64,
    pub penetrating: bool,
}

struct Witness {
    value: f64,
    point: Vec2,
    ellipse_point: Vec2,
    gradient: Vec2,
    edge: usize,
    tau: f64,
    margin: f64,
    penetrating: bool,
}

/// `Φ(q, R, q̃, R̃)` for an ellipse obstacle and a polygonal robot.
pub fn polygon_ellipse_distance(
    obstacle: &PlacedEllipse,
    poly: &ConvexPolygon,
    robot_pose: &SE2Pose,
) -> DistanceResult {
    let e = &obstacle.shape;
    let local: Vec<Vec2> = poly
        .vertices()
        .iter()
        .map(|v| obstacle.pose.to_frame(robot_pose.from_frame(*v)))
        .collect();
    let m = local.len();
    let edge = |i: usize| (local[i], local[(i + 1) % m]);

    let overlap = match (boundary_penetration(e, poly.edge_count(), &edge), center_inside(&local)) {
        (Some(b), Some(c)) => Some(if c.value < b.value { c } else { b }),
        (b, c) => b.or(c),
    };
    let witness = overlap.unwrap_or_else(|| separated(e, poly.edge_count(), &edge));
    finish(obstacle, robot_pose, witness)
}

/// Distance between the ellipse and a disc of `radius` centered at the
/// robot position; the encapsulating-circle baseline.
pub fn disc_ellipse_distance(
    obstacle: &PlacedEllipse,
    radius: f64,
    robot_pose: &SE2Pose,
) -> DistanceResult {
    let center = obstacle.pose.to_frame(robot_pose.position());
    let (psi, gradient, ellipse_point) = sdf_or_center(&obstacle.shape, center);
    let value = psi - radius;
    let witness = Witness {
        value,
        point: center - radius * gradient,
        ellipse_point,
        gradient,
        edge: 0,
        tau: 0.0,
        margin: f64::INFINITY,
        penetrating: value < 0.0,
    };
    finish(obstacle, robot_pose, witness)
}

/// SDF value, gradient and closest point, with the center handled as
/// `ψ(0) = −min(a, b)` along the minor axis.
fn sdf_or_center(e: &EllipseShape, p: Vec2) -> (f64, Vec2, Vec2) {
    match closest_point_to_point(e, p) {
        Ok(r) => (r.distance, r.gradient, r.point_on_ellipse),
        Err(_) => {
            if e.b() <= e.a() {
                (-e.b(), Vec2::new(0.0, -1.0), Vec2::new(0.0, e.b()))
            } else {
                (-e.a(), Vec2::new(-1.0, 0.0), Vec2::new(e.a(), 0.0))
            }
        }
    }
}

/// Minimum of `ψ` along the segment `p0 → p1` and its parameter. `ψ` is
/// convex, so golden-section search finds the single minimizer.
fn segment_min_sdf(e: &EllipseShape, p0: Vec2, p1: Vec2) -> (f64, f64) {
    let at = |tau: f64| sdf_or_center(e, p0 + tau * (p1 - p0)).0;
    let ratio = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut x1, mut x2) = (hi - ratio * (hi - lo), lo + ratio * (hi - lo));
    let (mut f1, mut f2) = (at(x1), at(x2));
    while hi - lo > 1e-9 {
        if f1 < f2 {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - ratio * (hi - lo);
            f1 = at(x1);
        } else {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + ratio * (hi - lo);
            f2 = at(x2);
        }
    }
    [(at(0.0), 0.0), (at(1.0), 1.0), (f1, x1), (f2, x2)]
        .into_iter()
        .fold((f64::INFINITY, 0.0), |a, c| if c.0 < a.0 { c } else { a })
}

/// Deepest boundary point of an overlapping polygon: the minimum of `ψ` over
/// every edge that reaches into the ellipse.
fn boundary_penetration(
    e: &EllipseShape,
    edges: usize,
    edge: &dyn Fn(usize) -> (Vec2, Vec2),
) -> Option<Witness> {
    let psi = |p: Vec2| sdf_or_center(e, p).0;
    let mut best: Option<(f64, usize, f64)> = None;
    for i in 0..edges {
        let (p0, p1) = edge(i);
        let (_, g) = deepest_point(e, p0, p1);
        if g >= 0.0 && psi(p0) >= 0.0 && psi(p1) >= 0.0 {
            continue;
        }
        let (value, tau) = segment_min_sdf(e, p0, p1);
        if value < 0.0 && best.is_none_or(|b| value < b.0) {
            best = Some((value, i, tau));
        }
    }
    let (_, i, tau) = best?;
    let (p0, p1) = edge(i);
    let point = p0 + tau * (p1 - p0);
    let (value, gradient, ellipse_point) = sdf_or_center(e, point);
    Some(Witness {
        value,
        point,
        ellipse_point,
        gradient,
        edge: i,
        tau,
        margin: 0.0,
        penetrating: true,
    })
}

/// Ellipse center inside the polygon: `Φ = −dist(center, ∂P)`.
fn center_inside(local: &[Vec2]) -> Option<Witness> {
    let m = local.len();
    if m < 3 {
        return None;
    }
    let inside = (0..m).all(|i| cross(local[(i + 1) % m] - local[i], -local[i]) >= 0.0);
    if !inside {
        return None;
    }
    let mut best = (f64::INFINITY, Vec2::zeros(), 0usize, 0.0);
    for i in 0..m {
        let (p0, p1) = (local[i], local[(i + 1) % m]);
        let d = p1 - p0;
        let tau = (-p0.dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
        let w = p0 + tau * d;
        if w.norm() < best.0 {
            best = (w.norm(), w, i, tau);
        }
    }
    let (dist, w, edge, tau) = best;
    let gradient = if dist > 0.0 { -w / dist } else { Vec2::new(0.0, -1.0) };
    Some(Witness {
        value: -dist,
        point: w,
        ellipse_point: Vec2::zeros(),
        gradient,
        edge,
        tau,
        margin: 0.0,
        penetrating: true,
    })
}

fn separated(
    e: &EllipseShape,
    edges: usize,
    edge: &dyn Fn(usize) -> (Vec2, Vec2),
) -> Witness {
    let per_edge: Vec<SegmentDistance> = (0..edges)
        .map(|i| {
            let (p0, p1) = edge(i);
            // grazing contact can still be reported as a crossing
            segment_distance(e, p0, p1).unwrap_or_else(|_| {
                let (distance, tau) = segment_min_sdf(e, p0, p1);
                let seg_point = p0 + tau * (p1 - p0);
                SegmentDistance {
                    distance: distance.max(0.0),
                    tau,
                    seg_point,
                    ellipse_point: sdf_or_center(e, seg_point).2,
                }
            })
        })
        .collect();

    let mut best = 0;
    for (i, s) in per_edge.iter().enumerate().skip(1) {
        if s.distance < per_edge[best].distance - EDGE_TIE_TOLERANCE {
            best = i;
        }
    }
    let chosen = per_edge[best];
    let margin = per_edge
        .iter()
        .enumerate()
        .filter(|(i, s)| {
            *i != best && (s.seg_point - chosen.seg_point).norm() > WITNESS_MERGE_TOLERANCE
        })
        .map(|(_, s)| s.distance - chosen.distance)
        .fold(f64::INFINITY, f64::min);

    let diff = chosen.seg_point - chosen.ellipse_point;
    let gradient = if chosen.distance > 0.0 {
        diff / diff.norm()
    } else {
        e.outward_normal(chosen.ellipse_point)
    };
    Witness {
        value: chosen.distance,
        point: chosen.seg_point,
        ellipse_point: chosen.ellipse_point,
        gradient,
        edge: best,
        tau: chosen.tau,
        margin,
        penetrating: false,
    }
}

/// Robot body used for distance queries.
#[derive(Debug, Clone, PartialEq)]
pub enum RobotShape {
    Polygon(ConvexPolygon),
    /// Disc centered at the body origin.
    Disc(f64),
}

impl RobotShape {
    pub fn distance(&self, obstacle: &PlacedEllipse, robot_pose: &SE2Pose) -> DistanceResult {
        match self {
            RobotShape::Polygon(p) => polygon_ellipse_distance(obstacle, p, robot_pose),
            RobotShape::Disc(r) => disc_ellipse_distance(obstacle, *r, robot_pose),
        }
    }

    /// Radius of the smallest origin-centered disc containing the body.
    pub fn circumradius(&self) -> f64 {
        match self {
            RobotShape::Polygon(p) => p.circumradius(),
            RobotShape::Disc(r) => *r,
        }
    }
}

/// Chain rule from `∇ψ(p')` to the four pose partials.
fn finish(obstacle: &PlacedEllipse, robot_pose: &SE2Pose, w: Witness) -> DistanceResult {
    let rot: Rot2 = obstacle.pose.rotation();
    let rot_robot: Rot2 = robot_pose.rotation();
    let g = w.gradient;
    let q = obstacle.pose.position();
    let q_robot = robot_pose.position();

    // p̃ = R̃ᵀ(R p' + q − q̃)
    let witness_body = rot_robot.apply_inverse(rot.apply(w.point) + q - q_robot);
    let lever = rot_robot.apply(witness_body) + (q_robot - q);

    let world_grad = rot.apply(g);
    let grad_theta_obs = g.dot(&(rot.derivative().transpose() * lever));
    let grad_thetatilde = g.dot(&rot.apply_inverse(rot_robot.derivative() * witness_body));

    DistanceResult {
        value: w.value,
        robot_witness: w.point,
        ellipse_witness: w.ellipse_point,
        sdf_gradient: g,
        witness_body,
        grad_q: -world_grad,
        grad_theta_obs,
        grad_qtilde: world_grad,
        grad_thetatilde,
        argmin_edge: w.edge,
        argmin_tau: w.tau,
        margin: w.margin,
        penetrating: w.penetrating,
    }
}

/// Partials of `Φ` with respect to the rotation matrices themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixPartials {
    /// `∂Φ/∂R = ∇ψ ⊗ (R̃ p̃ + q̃ − q)`.
    pub dd_dr: Mat2,
    /// `∂Φ/∂R̃ = R (∇ψ ⊗ p̃)`.
    pub dd_drtilde: Mat2,
}

impl MatrixPartials {
    /// `tr[∂Φ/∂R · ∂R/∂θ]`.
    pub fn obstacle_angle_partial(&self, obstacle_theta: f64) -> f64 {
        (self.dd_dr * Rot2::new(obstacle_theta).derivative()).trace()
    }

    /// `tr[∂Φ/∂R̃ · (∂R̃/∂θ̃)ᵀ]`.
    pub fn robot_angle_partial(&self, robot_theta: f64) -> f64 {
        (self.dd_drtilde * Rot2::new(robot_theta).derivative().transpose()).trace()
    }
}

pub fn matrix_partials(
    result: &DistanceResult,
    obstacle_pose: &SE2Pose,
    robot_pose: &SE2Pose,
) -> MatrixPartials {
    let g = result.sdf_gradient;
    let lever = robot_pose.rotation().apply(result.witness_body) + robot_pose.position()
        - obstacle_pose.position();
    MatrixPartials {
        dd_dr: g * lever.transpose(),
        dd_drtilde: obstacle_pose.rotation().matrix() * (g * result.witness_body.transpose()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ConvexPolygon {
        ConvexPolygon::new(vec![
            Vec2::new(-0.5, -0.5),
            Vec2::new(0.5, -0.5),
            Vec2::new(0.5, 0.5),
            Vec2::new(-0.5, 0.5),
        ])
        .unwrap()
    }

    fn ellipse_at(a: f64, b: f64, pose: SE2Pose) -> PlacedEllipse {
        PlacedEllipse::new(EllipseShape::new(a, b).unwrap(), pose)
    }

    #[test]
    fn polygon_validation() {
        assert!(ConvexPolygon::new(vec![Vec2::zeros()]).is_err());
        assert!(ConvexPolygon::new(vec![Vec2::zeros(), Vec2::zeros()]).is_err());
        // clockwise
        assert!(ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 0.0)
        ])
        .is_err());
        // reflex vertex
        assert!(ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 0.2),
            Vec2::new(1.0, 2.0),
        ])
        .is_err());
        assert_eq!(square().edge_count(), 4);
        assert_eq!(ConvexPolygon::segment(2.0).unwrap().edge_count(), 1);
    }

    #[test]
    fn overhead_segment() {
        let e = EllipseShape::new(2.0, 1.0).unwrap();
        let s = segment_distance(&e, Vec2::new(-1.0, 3.0), Vec2::new(1.0, 3.0)).unwrap();
        assert!((s.distance - 2.0).abs() < 1e-15);
        assert!((s.tau - 0.5).abs() < 1e-15);
        assert!((s.seg_point - Vec2::new(0.0, 3.0)).norm() < 1e-15);
        assert!((s.ellipse_point - Vec2::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn collinear_segment_uses_endpoint() {
        let e = EllipseShape::new(2.0, 1.0).unwrap();
        let s = segment_distance(&e, Vec2::new(3.0, 0.0), Vec2::new(5.0, 0.0)).unwrap();
        assert_eq!(s.tau, 0.0);
        assert!((s.distance - 1.0).abs() < 1e-15);
        assert!((s.ellipse_point - Vec2::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn crossing_segment_is_penetration() {
        let e = EllipseShape::new(2.0, 1.0).unwrap();
        assert_eq!(
            segment_distance(&e, Vec2::new(-3.0, 0.5), Vec2::new(3.0, 0.5)),
            Err(GeometryError::Penetration)
        );
        assert_eq!(
            segment_distance(&e, Vec2::new(0.0, 0.5), Vec2::new(3.0, 3.0)),
            Err(GeometryError::Penetration)
        );
        // line crosses, segment does not
        let s = segment_distance(&e, Vec2::new(3.0, 0.5), Vec2::new(5.0, 0.5)).unwrap();
        assert_eq!(s.tau, 0.0);
    }

    #[test]
    fn square_over_ellipse() {
        let obstacle = ellipse_at(2.0, 1.0, SE2Pose::identity());
        let robot = SE2Pose::from_xy_theta(0.0, 5.0, 0.0);
        let r = polygon_ellipse_distance(&obstacle, &square(), &robot);
        assert!(!r.penetrating);
        assert!((r.value - 3.5).abs() < 1e-12);
        assert!((r.robot_witness - Vec2::new(0.0, 4.5)).norm() < 1e-12);
        assert!((r.ellipse_witness - Vec2::new(0.0, 1.0)).norm() < 1e-12);
        assert!((r.grad_qtilde - Vec2::new(0.0, 1.0)).norm() < 1e-12);
        assert!((r.grad_q - Vec2::new(0.0, -1.0)).norm() < 1e-12);
        assert!(r.grad_thetatilde.abs() < 1e-12);
        assert_eq!(r.grad_q + r.grad_qtilde, Vec2::zeros());

        let mp = matrix_partials(&r, &obstacle.pose, &robot);
        assert!((mp.robot_angle_partial(0.0) - r.grad_thetatilde).abs() < 1e-10);
        assert!((mp.obstacle_angle_partial(0.0) - r.grad_theta_obs).abs() < 1e-10);
        // R = I: ∂Φ/∂R̃ = ∇ψ ⊗ p̃ exactly
        assert_eq!(mp.dd_drtilde, r.sdf_gradient * r.witness_body.transpose());
    }

    #[test]
    fn isometry_invariance_example() {
        let obstacle = ellipse_at(2.0, 1.0, SE2Pose::identity());
        let robot = SE2Pose::from_xy_theta(0.0, 5.0, 0.0);
        let base = polygon_ellipse_distance(&obstacle, &square(), &robot).value;
        let g = SE2Pose::from_xy_theta(7.0, -2.0, 0.9);
        let moved = polygon_ellipse_distance(
            &ellipse_at(2.0, 1.0, g.compose(&obstacle.pose)),
            &square(),
            &g.compose(&robot),
        );
        assert!((moved.value - base).abs() < 1e-10);
    }

    #[test]
    fn penetration_surrogates() {
        let obstacle = ellipse_at(2.0, 1.0, SE2Pose::identity());
        // vertex inside
        let r = polygon_ellipse_distance(
            &obstacle,
            &square(),
            &SE2Pose::from_xy_theta(0.0, 1.3, 0.0),
        );
        assert!(r.penetrating);
        assert!(r.value < 0.0);
        // edge cuts through, all vertices outside
        let long = ConvexPolygon::new(vec![
            Vec2::new(-3.0, -0.1),
            Vec2::new(3.0, -0.1),
            Vec2::new(3.0, 0.1),
            Vec2::new(-3.0, 0.1),
        ])
        .unwrap();
        let r = polygon_ellipse_distance(&obstacle, &long, &SE2Pose::from_xy_theta(0.0, 0.8, 0.0));
        assert!(r.penetrating && r.value < 0.0);
        // ellipse swallowed by the polygon
        let big = ConvexPolygon::new(vec![
            Vec2::new(-5.0, -5.0),
            Vec2::new(5.0, -5.0),
            Vec2::new(5.0, 5.0),
            Vec2::new(-5.0, 5.0),
        ])
        .unwrap();
        let r = polygon_ellipse_distance(&obstacle, &big, &SE2Pose::from_xy_theta(1.0, 0.0, 0.0));
        assert!(r.penetrating);
        assert!((r.value + 4.0).abs() < 1e-12);
        // the nearest wall is x = -4; sliding the polygon toward +x brings it
        // closer to the center and shrinks the overlap
        assert!((r.grad_qtilde - Vec2::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn surrogate_is_continuous_through_contact() {
        // a triangle slides down onto the ellipse tip: first an edge crosses
        // the boundary, then a vertex enters
        let obstacle = ellipse_at(2.0, 0.6, SE2Pose::identity());
        let tri = ConvexPolygon::new(vec![Vec2::new(0.8, 0.0), Vec2::new(-0.5, 0.5), Vec2::new(-0.5, -0.5)]).unwrap();
        let step = 4e-4;
        let mut prev: Option<f64> = None;
        for k in 0..3_000 {
            let y = 0.9 - k as f64 * step;
            let r = polygon_ellipse_distance(&obstacle, &tri, &SE2Pose::from_xy_theta(1.6, y, 2.0));
            if let Some(p) = prev {
                assert!((r.value - p).abs() <= 1.5 * step, "jump {} → {} at y = {y}", p, r.value);
            }
            prev = Some(r.value);
        }
        assert!(prev.unwrap() < -0.2);
    }

    #[test]
    fn equal_edges_tie_to_lower_index() {
        // square directly above a circle, rotated 45°: the bottom vertex is
        // shared by edges 0 and 3 (after rotation it is vertex 0)
        let obstacle = ellipse_at(1.0, 1.0, SE2Pose::identity());
        let robot = SE2Pose::from_xy_theta(0.0, 3.0, std::f64::consts::FRAC_PI_4);
        let r = polygon_ellipse_distance(&obstacle, &square(), &robot);
        assert_eq!(r.argmin_edge, 0);
        assert!(r.margin > 0.1);
    }

    #[test]
    fn disc_distance() {
        let obstacle = ellipse_at(2.0, 1.0, SE2Pose::identity());
        let r = disc_ellipse_distance(&obstacle, 1.0, &SE2Pose::from_xy_theta(0.0, 5.0, 0.3));
        assert!((r.value - 3.0).abs() < 1e-12);
        assert!(r.grad_thetatilde.abs() < 1e-12);
        assert!((r.grad_qtilde - Vec2::new(0.0, 1.0)).norm() < 1e-12);
        let r = disc_ellipse_distance(&obstacle, 0.0, &SE2Pose::from_xy_theta(3.0, 0.0, 0.0));
        assert!((r.value - 1.0).abs() < 1e-12);
    }
}
