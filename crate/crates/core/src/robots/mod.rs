//! Controlled systems: a polygonal unicycle and a planar K-link arm.

pub mod arm;
pub mod obstacle;
pub mod unicycle;

use nalgebra::{DMatrix, DVector};

use crate::control::BarrierSample;
use crate::distance::PlacedEllipse;
use crate::se2::{wrap_angle, Vec2};

pub use arm::{ArmBarrier, ArmJacobian, ArmKinematics, ArmModel};
pub use obstacle::{GoalRegion, MotionSegment, Obstacle, ObstacleMotion};
pub use unicycle::{unicycle_dynamics, UnicycleModel, UnicycleState};

/// World-frame outline of a robot body, for drawing.
#[derive(Debug, Clone, PartialEq)]
pub enum Outline {
    Polygon(Vec<Vec2>),
    Polyline(Vec<Vec2>),
    Circle { center: Vec2, radius: f64 },
}

/// A control-affine system `ẋ = f(x) + g(x) u` with a rigid body (or chain
/// of bodies) whose distance to an ellipse defines the barrier.
pub trait RobotModel: Send + Sync {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;

    /// `f(x)`.
    fn drift(&self, x: &DVector<f64>) -> DVector<f64>;
    /// `g(x)`, `state_dim × control_dim`.
    fn actuation(&self, x: &DVector<f64>) -> DMatrix<f64>;

    fn dynamics(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        self.drift(x) + self.actuation(x) * u
    }

    /// State components that are angles.
    fn angle_indices(&self) -> Vec<usize>;

    /// Wrap angle components into `(−π, π]`.
    fn wrap_state(&self, mut x: DVector<f64>) -> DVector<f64> {
        for i in self.angle_indices() {
            x[i] = wrap_angle(x[i]);
        }
        x
    }

    /// `h(x)` against one obstacle at its current pose, with gradients.
    fn barrier(&self, x: &DVector<f64>, obstacle: &PlacedEllipse) -> BarrierSample;

    /// Barriers whose conditions are imposed in the QP. Multi-body robots
    /// return one per body; the default is the single barrier.
    fn component_barriers(&self, x: &DVector<f64>, obstacle: &PlacedEllipse) -> Vec<BarrierSample> {
        vec![self.barrier(x, obstacle)]
    }

    /// Point that must enter the goal disk (position or end effector).
    fn goal_point(&self, x: &DVector<f64>) -> Vec2;

    fn outline(&self, x: &DVector<f64>) -> Vec<Outline>;
}
