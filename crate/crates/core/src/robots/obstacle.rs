use serde::{Deserialize, Serialize};

use crate::distance::PlacedEllipse;
use crate::ellipse::EllipseShape;
use crate::se2::{SE2Pose, Vec2};

/// A change of velocity at time `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSegment {
    pub start: f64,
    pub velocity: [f64; 2],
    #[serde(default)]
    pub angular_velocity: f64,
}

/// Rigid-body obstacle motion: constant linear and angular velocity,
/// optionally switching to new constant velocities at scripted times.
/// The pose is continuous and affine in `t` on every segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleMotion {
    pub initial: SE2Pose,
    pub velocity: Vec2,
    pub angular_velocity: f64,
    segments: Vec<MotionSegment>,
}

impl ObstacleMotion {
    pub fn constant(initial: SE2Pose, velocity: Vec2, angular_velocity: f64) -> Self {
        Self {
            initial,
            velocity,
            angular_velocity,
            segments: vec![],
        }
    }

    pub fn stationary(initial: SE2Pose) -> Self {
        Self::constant(initial, Vec2::zeros(), 0.0)
    }

    /// Segments are sorted by start time; those starting at or before `t = 0`
    /// are kept but never reached before their start.
    pub fn with_segments(mut self, mut segments: Vec<MotionSegment>) -> Self {
        segments.sort_by(|a, b| a.start.total_cmp(&b.start));
        self.segments = segments;
        self
    }

    pub fn segments(&self) -> &[MotionSegment] {
        &self.segments
    }

    /// `(v_i, ω_i)` in effect at time `t` (right-continuous).
    pub fn velocity_at(&self, t: f64) -> (Vec2, f64) {
        let mut current = (self.velocity, self.angular_velocity);
        for s in &self.segments {
            if s.start <= t {
                current = (Vec2::new(s.velocity[0], s.velocity[1]), s.angular_velocity);
            } else {
                break;
            }
        }
        current
    }

    pub fn pose_at(&self, t: f64) -> SE2Pose {
        let mut q = self.initial.position();
        let mut theta = self.initial.theta();
        let mut t0 = 0.0;
        let (mut v, mut w) = (self.velocity, self.angular_velocity);
        for s in &self.segments {
            if s.start > t {
                break;
            }
            let span = (s.start - t0).max(0.0);
            q += v * span;
            theta += w * span;
            t0 = t0.max(s.start);
            v = Vec2::new(s.velocity[0], s.velocity[1]);
            w = s.angular_velocity;
        }
        let span = t - t0;
        SE2Pose::new(q + v * span, theta + w * span)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub shape: EllipseShape,
    pub motion: ObstacleMotion,
}

impl Obstacle {
    pub fn new(shape: EllipseShape, motion: ObstacleMotion) -> Self {
        Self { shape, motion }
    }

    pub fn placed_at(&self, t: f64) -> PlacedEllipse {
        PlacedEllipse::new(self.shape, self.motion.pose_at(t))
    }
}

/// Disk around the target position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalRegion {
    pub center: Vec2,
    pub radius: f64,
}

impl GoalRegion {
    pub fn new(center: Vec2, radius: f64) -> Option<Self> {
        (radius > 0.0 && radius.is_finite()).then_some(Self { center, radius })
    }

    pub fn contains(&self, p: Vec2) -> bool {
        (p - self.center).norm() <= self.radius
    }
}
