//! Ellipse signed distance and closest points, in the ellipse body frame.
//!
//! The ellipse is `(x/a)² + (y/b)² = 1` with `a` along the body x-axis.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::quartic::{solve_monic_quartic, MonicQuartic};
use crate::se2::Vec2;

/// Numerical thresholds used by the closest-point queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseTolerances {
    /// Queries closer than this to the center have no SDF gradient.
    pub center: f64,
    /// `|b² − a²| < circle_relative · max(a², b²)` is treated as a circle.
    pub circle_relative: f64,
    /// Query-to-boundary distance below which the outward normal is used as
    /// the gradient.
    pub boundary: f64,
    /// Quartic roots this far outside `[-1, 1]` are clamped rather than dropped.
    pub cosine_slack: f64,
}

pub const DEFAULT_TOLERANCES: EllipseTolerances = EllipseTolerances {
    center: 1e-12,
    circle_relative: 1e-9,
    boundary: 1e-12,
    cosine_slack: 1e-9,
};

impl Default for EllipseTolerances {
    fn default() -> Self {
        DEFAULT_TOLERANCES
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct EllipseShape {
    a: f64,
    b: f64,
}

impl TryFrom<(f64, f64)> for EllipseShape {
    type Error = GeometryError;
    fn try_from((a, b): (f64, f64)) -> Result<Self, Self::Error> {
        EllipseShape::new(a, b)
    }
}

impl From<EllipseShape> for (f64, f64) {
    fn from(e: EllipseShape) -> Self {
        (e.a, e.b)
    }
}

impl EllipseShape {
    pub fn new(a: f64, b: f64) -> Result<Self, GeometryError> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(GeometryError::InvalidEllipse { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn circle(radius: f64) -> Result<Self, GeometryError> {
        Self::new(radius, radius)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `(x/a)² + (y/b)² − 1`: negative inside, zero on the boundary.
    pub fn implicit(&self, p: Vec2) -> f64 {
        let (x, y) = (p.x / self.a, p.y / self.b);
        x * x + y * y - 1.0
    }

    pub fn point_at(&self, t: f64) -> Vec2 {
        Vec2::new(self.a * t.cos(), self.b * t.sin())
    }

    /// Outward unit normal at a boundary point.
    pub fn outward_normal(&self, on_boundary: Vec2) -> Vec2 {
        let n = Vec2::new(on_boundary.x / (self.a * self.a), on_boundary.y / (self.b * self.b));
        n / n.norm()
    }

    fn is_circle(&self, tol: &EllipseTolerances) -> bool {
        let (a2, b2) = (self.a * self.a, self.b * self.b);
        (b2 - a2).abs() < tol.circle_relative * a2.max(b2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPointResult {
    pub point_on_ellipse: Vec2,
    /// Signed: positive outside, negative inside.
    pub distance: f64,
    /// Unit SDF gradient at the query point.
    pub gradient: Vec2,
}

/// Global closest boundary point to `p`, with the SDF value and gradient.
pub fn closest_point_to_point(
    e: &EllipseShape,
    p: Vec2,
) -> Result<ClosestPointResult, GeometryError> {
    closest_point_to_point_with(e, p, &DEFAULT_TOLERANCES)
}

pub fn closest_point_to_point_with(
    e: &EllipseShape,
    p: Vec2,
    tol: &EllipseTolerances,
) -> Result<ClosestPointResult, GeometryError> {
    if p.norm() < tol.center {
        return Err(GeometryError::AtCenter);
    }
    let (sx, sy) = (sign(p.x), sign(p.y));
    let u = p.x.abs();
    let v = p.y.abs();

    let q = first_quadrant_closest(e, u, v, tol);
    let point = Vec2::new(sx * q.x, sy * q.y);
    let diff = p - point;
    let dist = diff.norm();
    let inside = e.implicit(p) < 0.0;

    let (distance, gradient) = if dist < tol.boundary {
        (0.0, e.outward_normal(point))
    } else if inside {
        (-dist, -diff / dist)
    } else {
        (dist, diff / dist)
    };
    Ok(ClosestPointResult {
        point_on_ellipse: point,
        distance,
        gradient,
    })
}

/// Signed distance `ψ(p)`.
pub fn sdf(e: &EllipseShape, p: Vec2) -> Result<f64, GeometryError> {
    closest_point_to_point(e, p).map(|r| r.distance)
}

fn sign(x: f64) -> f64 {
    if x.is_sign_negative() {
        -1.0
    } else {
        1.0
    }
}

/// Closest point for a query with `u, v ≥ 0`; the answer lies in the first
/// quadrant too.
fn first_quadrant_closest(e: &EllipseShape, u: f64, v: f64, tol: &EllipseTolerances) -> Vec2 {
    let (a, b) = (e.a, e.b);
    if e.is_circle(tol) {
        // radial projection onto the (near-)circle
        let s = ((u / a).powi(2) + (v / b).powi(2)).sqrt();
        return Vec2::new(u / s, v / s);
    }

    let query = Vec2::new(u, v);
    let mut best = Vec2::new(a, 0.0);
    let mut best_d2 = (query - best).norm_squared();
    let mut consider = |c: Vec2| {
        let d2 = (query - c).norm_squared();
        if d2 < best_d2 {
            best_d2 = d2;
            best = c;
        }
    };
    consider(Vec2::new(0.0, b));
    consider(Vec2::new(-a, 0.0));
    consider(Vec2::new(0.0, -b));

    let diff = b * b - a * a;
    // The on-axis stationary points. Near an axis the matching quartic root
    // is nearly double and can come back as a complex pair, so these seeds
    // are always offered and the polish below moves them off the axis.
    let lambda = -a * u / diff;
    if lambda.abs() <= 1.0 {
        consider(Vec2::new(a * lambda, b * (1.0 - lambda * lambda).sqrt()));
    }
    let s = b * v / diff;
    if s.abs() <= 1.0 {
        consider(Vec2::new(a * (1.0 - s * s).sqrt(), b * s));
    }
    if u != 0.0 && v != 0.0 {
        let m = u * a / diff;
        let n = v * b / diff;
        let poly = MonicQuartic::new(2.0 * m, m * m + n * n - 1.0, -2.0 * m, -m * m);
        if let Ok(roots) = solve_monic_quartic(poly) {
            for lambda in roots.iter() {
                if lambda.abs() > 1.0 + tol.cosine_slack {
                    continue;
                }
                let lambda = lambda.clamp(-1.0, 1.0);
                consider(Vec2::new(a * lambda, b * (1.0 - lambda * lambda).sqrt()));
            }
        }
    }

    if best.x >= 0.0 && best.y >= 0.0 {
        polish_parameter(e, u, v, best)
    } else {
        best
    }
}

/// Newton refinement of the boundary parameter on the stationarity condition
/// `(b² − a²) cos t sin t + a u sin t − b v cos t = 0`, accepting only steps
/// that stay in the quadrant and do not increase the distance.
fn polish_parameter(e: &EllipseShape, u: f64, v: f64, start: Vec2) -> Vec2 {
    let (a, b) = (e.a, e.b);
    let diff = b * b - a * a;
    let query = Vec2::new(u, v);
    let mut t = (start.y / b).atan2(start.x / a).clamp(0.0, FRAC_PI_2);
    let mut point = e.point_at(t);
    let mut d2 = (query - point).norm_squared();
    for _ in 0..8 {
        let (s, c) = t.sin_cos();
        let f = diff * c * s + a * u * s - b * v * c;
        let df = diff * (c * c - s * s) + a * u * c + b * v * s;
        if df <= 0.0 || f == 0.0 {
            break;
        }
        let t_new = t - f / df;
        if !(0.0..=FRAC_PI_2).contains(&t_new) {
            break;
        }
        let candidate = e.point_at(t_new);
        let d2_new = (query - candidate).norm_squared();
        if d2_new > d2 {
            break;
        }
        let done = (t_new - t).abs() <= 1e-15;
        t = t_new;
        point = candidate;
        d2 = d2_new;
        if done {
            break;
        }
    }
    point
}

/// Tangency between an ellipse and the infinite line through a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineTangency {
    pub ellipse_point: Vec2,
    pub line_point: Vec2,
    /// Projection parameter of `line_point` along `p0 → p1` (unclamped).
    pub tau: f64,
    /// Gap between the line and the ellipse along the signed normal.
    pub distance: f64,
    /// Unit normal pointing from the ellipse toward the line.
    pub normal: Vec2,
}

/// Closest ellipse point to the infinite line through `p0` and `p1`, and its
/// projection onto that line.
pub fn closest_point_to_line(
    e: &EllipseShape,
    p0: Vec2,
    p1: Vec2,
) -> Result<LineTangency, GeometryError> {
    let d = p1 - p0;
    let len2 = d.norm_squared();
    if len2.sqrt() <= 1e-12 {
        return Err(GeometryError::DegenerateSegment);
    }
    let n = Vec2::new(-d.y, d.x) / len2.sqrt();
    let support = Vec2::new(e.a * n.x, e.b * n.y).norm();
    let tangent = Vec2::new(e.a * e.a * n.x, e.b * e.b * n.y) / support;

    // line: n·x + C = 0
    let c = -n.dot(&p0);
    let side = if c > 0.0 { -1.0 } else { 1.0 };
    let ellipse_point = side * tangent;
    let tau = d.dot(&(ellipse_point - p0)) / len2;
    let line_point = p0 + tau * d;
    let normal = side * n;
    let distance = (line_point - ellipse_point).dot(&normal);
    if distance <= 0.0 {
        return Err(GeometryError::LineIntersectsEllipse);
    }
    Ok(LineTangency {
        ellipse_point,
        line_point,
        tau,
        distance,
        normal,
    })
}
