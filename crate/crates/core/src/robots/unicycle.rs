use nalgebra::{DMatrix, DVector};

use crate::control::BarrierSample;
use crate::distance::{PlacedEllipse, RobotShape};
use crate::robots::{Outline, RobotModel};
use crate::se2::{wrap_angle, SE2Pose, Vec2};

/// `(x, y, θ)`; control is `(v, ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnicycleState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl UnicycleState {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_vector(self) -> DVector<f64> {
        DVector::from_vec(vec![self.x, self.y, self.theta])
    }

    /// Body pose of the robot: position and heading map one-to-one.
    pub fn pose(&self) -> SE2Pose {
        SE2Pose::from_xy_theta(self.x, self.y, self.theta)
    }
}

/// `(ẋ, ẏ, θ̇) = (v cos θ, v sin θ, ω)`.
pub fn unicycle_dynamics(state: &UnicycleState, u: [f64; 2]) -> [f64; 3] {
    let (s, c) = state.theta.sin_cos();
    [u[0] * c, u[0] * s, u[1]]
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnicycleModel {
    pub shape: RobotShape,
}

impl UnicycleModel {
    pub fn new(shape: RobotShape) -> Self {
        Self { shape }
    }
}

impl RobotModel for UnicycleModel {
    fn state_dim(&self) -> usize {
        3
    }

    fn control_dim(&self) -> usize {
        2
    }

    fn drift(&self, _x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(3)
    }

    fn actuation(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (s, c) = x[2].sin_cos();
        DMatrix::from_row_slice(3, 2, &[c, 0.0, s, 0.0, 0.0, 1.0])
    }

    fn angle_indices(&self) -> Vec<usize> {
        vec![2]
    }

    fn barrier(&self, x: &DVector<f64>, obstacle: &PlacedEllipse) -> BarrierSample {
        let pose = UnicycleState::from_vector(x).pose();
        let r = self.shape.distance(obstacle, &pose);
        BarrierSample {
            h: r.value,
            grad_x: DVector::from_vec(vec![r.grad_qtilde.x, r.grad_qtilde.y, r.grad_thetatilde]),
            grad_q: r.grad_q,
            grad_theta_obs: r.grad_theta_obs,
            margin: r.margin,
            penetrating: r.penetrating,
            argmin_link: 0,
        }
    }

    fn goal_point(&self, x: &DVector<f64>) -> Vec2 {
        Vec2::new(x[0], x[1])
    }

    fn outline(&self, x: &DVector<f64>) -> Vec<Outline> {
        let pose = UnicycleState::from_vector(x).pose();
        match &self.shape {
            RobotShape::Polygon(p) => {
                let pts = p.vertices().iter().map(|v| pose.from_frame(*v)).collect();
                if p.vertices().len() == 2 {
                    vec![Outline::Polyline(pts)]
                } else {
                    vec![Outline::Polygon(pts)]
                }
            }
            RobotShape::Disc(r) => vec![Outline::Circle {
                center: pose.position(),
                radius: *r,
            }],
        }
    }
}
