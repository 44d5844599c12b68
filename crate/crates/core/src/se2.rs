//! Planar rigid-body poses and rotations.
//!
//! Everything here is a small `Copy` value; nothing allocates.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Normalize an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wrap an angle difference into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = normalize_angle(theta);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// A 2-D rotation stored as its cosine/sine pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot2 {
    cos: f64,
    sin: f64,
}

impl Rot2 {
    pub fn new(theta: f64) -> Self {
        let (sin, cos) = theta.sin_cos();
        Self { cos, sin }
    }

    pub fn identity() -> Self {
        Self { cos: 1.0, sin: 0.0 }
    }

    pub fn cos(&self) -> f64 {
        self.cos
    }

    pub fn sin(&self) -> f64 {
        self.sin
    }

    pub fn angle(&self) -> f64 {
        self.sin.atan2(self.cos)
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(self.cos, -self.sin, self.sin, self.cos)
    }

    /// `∂R/∂θ` evaluated at this rotation.
    pub fn derivative(&self) -> Mat2 {
        Mat2::new(-self.sin, -self.cos, self.cos, -self.sin)
    }

    #[inline]
    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.cos * v.x - self.sin * v.y, self.sin * v.x + self.cos * v.y)
    }

    /// `Rᵀ v`.
    #[inline]
    pub fn apply_inverse(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.cos * v.x + self.sin * v.y, -self.sin * v.x + self.cos * v.y)
    }

    pub fn inverse(&self) -> Self {
        Self {
            cos: self.cos,
            sin: -self.sin,
        }
    }

    pub fn compose(&self, other: &Rot2) -> Self {
        Self {
            cos: self.cos * other.cos - self.sin * other.sin,
            sin: self.sin * other.cos + self.cos * other.sin,
        }
    }
}

/// Rotation matrix `[[cos θ, −sin θ], [sin θ, cos θ]]`.
pub fn rotation_matrix(theta: f64) -> Mat2 {
    Rot2::new(theta).matrix()
}

/// Derivative of [`rotation_matrix`] with respect to the angle.
pub fn rotation_derivative(theta: f64) -> Mat2 {
    Rot2::new(theta).derivative()
}

/// Position plus orientation of a rigid body in the plane.
///
/// The orientation is kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoseRepr", into = "PoseRepr")]
pub struct SE2Pose {
    q: Vec2,
    theta: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseRepr {
    x: f64,
    y: f64,
    #[serde(default)]
    theta: f64,
}

impl TryFrom<PoseRepr> for SE2Pose {
    type Error = String;

    fn try_from(r: PoseRepr) -> Result<Self, Self::Error> {
        if !(r.x.is_finite() && r.y.is_finite() && r.theta.is_finite()) {
            return Err("pose components must be finite".into());
        }
        Ok(SE2Pose::new(Vec2::new(r.x, r.y), r.theta))
    }
}

impl From<SE2Pose> for PoseRepr {
    fn from(p: SE2Pose) -> Self {
        PoseRepr {
            x: p.q.x,
            y: p.q.y,
            theta: p.theta,
        }
    }
}

impl Default for SE2Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl SE2Pose {
    pub fn new(q: Vec2, theta: f64) -> Self {
        Self {
            q,
            theta: normalize_angle(theta),
        }
    }

    pub fn from_xy_theta(x: f64, y: f64, theta: f64) -> Self {
        Self::new(Vec2::new(x, y), theta)
    }

    pub fn identity() -> Self {
        Self {
            q: Vec2::zeros(),
            theta: 0.0,
        }
    }

    pub fn position(&self) -> Vec2 {
        self.q
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn rotation(&self) -> Rot2 {
        Rot2::new(self.theta)
    }

    /// `Rᵀ (p − q)`: a world point expressed in this body's frame.
    pub fn to_frame(&self, world_point: Vec2) -> Vec2 {
        self.rotation().apply_inverse(world_point - self.q)
    }

    /// `q + R p`: a body-frame point expressed in the world frame.
    pub fn from_frame(&self, body_point: Vec2) -> Vec2 {
        self.q + self.rotation().apply(body_point)
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &SE2Pose) -> SE2Pose {
        SE2Pose::new(self.from_frame(other.q), self.theta + other.theta)
    }
}

/// Free-function form of [`SE2Pose::to_frame`].
pub fn to_frame(pose: &SE2Pose, world_point: Vec2) -> Vec2 {
    pose.to_frame(world_point)
}

/// Free-function form of [`SE2Pose::from_frame`].
pub fn from_frame(pose: &SE2Pose, body_point: Vec2) -> Vec2 {
    pose.from_frame(body_point)
}
