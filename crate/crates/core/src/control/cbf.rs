use nalgebra::{DMatrix, DVector};

use crate::control::clf::AffineInControl;
use crate::error::ControlError;
use crate::robots::{Obstacle, RobotModel};
use crate::se2::Vec2;

/// `h_i(x, t)` and the derivatives needed to form its barrier condition.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSample {
    pub h: f64,
    /// `∂h/∂x`.
    pub grad_x: DVector<f64>,
    /// `∂h/∂q_i` (obstacle position).
    pub grad_q: Vec2,
    /// `∂h/∂θ_i` (obstacle orientation).
    pub grad_theta_obs: f64,
    pub margin: f64,
    pub penetrating: bool,
    /// Link attaining the minimum (always 0 for single-body robots).
    pub argmin_link: usize,
}

/// The barrier condition
/// `L_fh + L_gh·u + ∂h/∂q_i·v_i + ∂h/∂θ_i·ω_i + γ_h h`, affine in `u`.
pub fn barrier_condition(
    sample: &BarrierSample,
    drift: &DVector<f64>,
    actuation: &DMatrix<f64>,
    velocity: Vec2,
    angular_velocity: f64,
    gamma_h: f64,
) -> AffineInControl {
    AffineInControl {
        constant: sample.grad_x.dot(drift)
            + sample.grad_q.dot(&velocity)
            + sample.grad_theta_obs * angular_velocity
            + gamma_h * sample.h,
        linear: actuation.transpose() * &sample.grad_x,
    }
}

/// A time-varying CBF: one obstacle seen by one robot model.
pub struct TimeVaryingCbf<'a> {
    pub model: &'a dyn RobotModel,
    pub obstacle: &'a Obstacle,
    pub gamma_h: f64,
}

impl TimeVaryingCbf<'_> {
    pub fn sample(&self, x: &DVector<f64>, t: f64) -> BarrierSample {
        self.model.barrier(x, &self.obstacle.placed_at(t))
    }

    /// The barrier condition at `(x, t)` as an affine function of `u`,
    /// together with the sample it was built from. Penetrating states use
    /// the surrogate value.
    pub fn condition(&self, x: &DVector<f64>, t: f64) -> (BarrierSample, AffineInControl) {
        let sample = self.sample(x, t);
        let (v, w) = self.obstacle.motion.velocity_at(t);
        let row = barrier_condition(
            &sample,
            &self.model.drift(x),
            &self.model.actuation(x),
            v,
            w,
            self.gamma_h,
        );
        (sample, row)
    }

    /// Conditions for every component barrier at `(x, t)`.
    pub fn component_conditions(&self, x: &DVector<f64>, t: f64) -> Vec<AffineInControl> {
        let (v, w) = self.obstacle.motion.velocity_at(t);
        let (drift, actuation) = (self.model.drift(x), self.model.actuation(x));
        self.model
            .component_barriers(x, &self.obstacle.placed_at(t))
            .iter()
            .map(|s| barrier_condition(s, &drift, &actuation, v, w, self.gamma_h))
            .collect()
    }

    /// `CBC_i(x, u, t)`.
    pub fn cbc(&self, x: &DVector<f64>, u: &DVector<f64>, t: f64) -> Result<f64, ControlError> {
        let (sample, row) = self.condition(x, t);
        if sample.penetrating {
            return Err(ControlError::Penetration);
        }
        Ok(row.eval(u))
    }
}
