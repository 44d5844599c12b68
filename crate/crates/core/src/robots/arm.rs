use nalgebra::{DMatrix, DVector};

use crate::control::BarrierSample;
use crate::distance::{
    polygon_ellipse_distance, ConvexPolygon, DistanceResult, PlacedEllipse, EDGE_TIE_TOLERANCE,
    WITNESS_MERGE_TOLERANCE,
};
use crate::robots::{Outline, RobotModel};
use crate::se2::{SE2Pose, Vec2};

/// Planar serial arm with joint-velocity control `θ̇ = ω`. Link `j` spans
/// joint `j` to joint `j + 1` with orientation `θ̲_j = θ_0 + … + θ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    link_lengths: Vec<f64>,
    links: Vec<ConvexPolygon>,
    pub base: Vec2,
    /// Temperature of a log-sum-exp soft minimum over links; `None` for the
    /// hard minimum.
    pub smooth_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmKinematics {
    /// Joint positions; the last one is the end effector.
    pub joints: Vec<Vec2>,
    /// Cumulative link orientations.
    pub cumulative: Vec<f64>,
}

impl ArmKinematics {
    pub fn end_effector(&self) -> Vec2 {
        *self.joints.last().expect("at least one link")
    }

    pub fn link_pose(&self, j: usize) -> SE2Pose {
        SE2Pose::new(self.joints[j], self.cumulative[j])
    }
}

/// Sensitivities of joint positions and link orientations to each joint angle.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmJacobian {
    /// `position[j][k] = ∂q̃_j/∂θ_k`, for joints `j = 0..=K`.
    pub position: Vec<Vec<Vec2>>,
}

impl ArmJacobian {
    /// `∂θ̲_j/∂θ_k`.
    pub fn orientation(&self, j: usize, k: usize) -> f64 {
        if k <= j {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmBarrier {
    pub h: f64,
    /// `∂h/∂θ`.
    pub gradient: DVector<f64>,
    pub argmin_link: usize,
    pub grad_q: Vec2,
    pub grad_theta_obs: f64,
    pub margin: f64,
    pub penetrating: bool,
    pub links: Vec<DistanceResult>,
    /// `∂φ_j/∂θ` for every link `j`.
    pub link_gradients: Vec<DVector<f64>>,
}

impl ArmModel {
    pub fn new(link_lengths: Vec<f64>, base: Vec2) -> Option<Self> {
        if link_lengths.is_empty() || link_lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return None;
        }
        let links = link_lengths
            .iter()
            .map(|&l| ConvexPolygon::segment(l).ok())
            .collect::<Option<Vec<_>>>()?;
        Some(Self {
            link_lengths,
            links,
            base,
            smooth_min: None,
        })
    }

    pub fn with_smooth_min(mut self, temperature: Option<f64>) -> Self {
        self.smooth_min = temperature;
        self
    }

    pub fn link_lengths(&self) -> &[f64] {
        &self.link_lengths
    }

    pub fn links(&self) -> usize {
        self.link_lengths.len()
    }

    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    pub fn forward_kinematics(&self, angles: &[f64]) -> ArmKinematics {
        assert_eq!(angles.len(), self.links());
        let mut joints = Vec::with_capacity(self.links() + 1);
        let mut cumulative = Vec::with_capacity(self.links());
        let mut p = self.base;
        let mut acc = 0.0;
        joints.push(p);
        for (l, th) in self.link_lengths.iter().zip(angles) {
            acc += th;
            p += *l * Vec2::new(acc.cos(), acc.sin());
            cumulative.push(acc);
            joints.push(p);
        }
        ArmKinematics { joints, cumulative }
    }

    pub fn jacobian(&self, angles: &[f64]) -> ArmJacobian {
        let fk = self.forward_kinematics(angles);
        let k_links = self.links();
        let lever: Vec<Vec2> = (0..k_links)
            .map(|i| {
                let a = fk.cumulative[i];
                self.link_lengths[i] * Vec2::new(-a.sin(), a.cos())
            })
            .collect();
        let position = (0..=k_links)
            .map(|j| {
                (0..k_links)
                    .map(|k| (k..j).map(|i| lever[i]).fold(Vec2::zeros(), |s, v| s + v))
                    .collect()
            })
            .collect();
        ArmJacobian { position }
    }

    /// Minimum over links of the link/ellipse distance, with its gradient
    /// with respect to the joint angles.
    pub fn barrier_of(&self, angles: &[f64], obstacle: &PlacedEllipse) -> ArmBarrier {
        let fk = self.forward_kinematics(angles);
        let jac = self.jacobian(angles);
        let k_links = self.links();
        let results: Vec<DistanceResult> = (0..k_links)
            .map(|j| polygon_ellipse_distance(obstacle, &self.links[j], &fk.link_pose(j)))
            .collect();
        let link_gradients: Vec<DVector<f64>> = results
            .iter()
            .enumerate()
            .map(|(j, r)| {
                DVector::from_iterator(
                    k_links,
                    (0..k_links).map(|k| {
                        r.grad_qtilde.dot(&jac.position[j][k]) + r.grad_thetatilde * jac.orientation(j, k)
                    }),
                )
            })
            .collect();

        let mut best = 0;
        for j in 1..k_links {
            if results[j].value < results[best].value - EDGE_TIE_TOLERANCE {
                best = j;
            }
        }
        let witness = |j: usize| obstacle.pose.from_frame(results[j].robot_witness);
        let margin = (0..k_links)
            .filter(|&j| j != best && (witness(j) - witness(best)).norm() > WITNESS_MERGE_TOLERANCE)
            .map(|j| results[j].value - results[best].value)
            .fold(results[best].margin, f64::min);
        let penetrating = results.iter().any(|r| r.penetrating);

        match self.smooth_min {
            None => ArmBarrier {
                h: results[best].value,
                gradient: link_gradients[best].clone(),
                argmin_link: best,
                grad_q: results[best].grad_q,
                grad_theta_obs: results[best].grad_theta_obs,
                margin,
                penetrating,
                links: results,
                link_gradients,
            },
            Some(temperature) => {
                let h_min = results[best].value;
                let weights: Vec<f64> = results
                    .iter()
                    .map(|r| (-(r.value - h_min) / temperature).exp())
                    .collect();
                let total: f64 = weights.iter().sum();
                let mut gradient = DVector::zeros(k_links);
                let mut grad_q = Vec2::zeros();
                let mut grad_theta_obs = 0.0;
                for (j, w) in weights.iter().enumerate() {
                    let w = w / total;
                    gradient += &link_gradients[j] * w;
                    grad_q += results[j].grad_q * w;
                    grad_theta_obs += results[j].grad_theta_obs * w;
                }
                ArmBarrier {
                    h: h_min - temperature * total.ln(),
                    gradient,
                    argmin_link: best,
                    grad_q,
                    grad_theta_obs,
                    margin,
                    penetrating,
                    links: results,
                    link_gradients,
                }
            }
        }
    }
}

impl RobotModel for ArmModel {
    fn state_dim(&self) -> usize {
        self.links()
    }

    fn control_dim(&self) -> usize {
        self.links()
    }

    fn drift(&self, _x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(self.links())
    }

    fn actuation(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(self.links(), self.links())
    }

    fn angle_indices(&self) -> Vec<usize> {
        (0..self.links()).collect()
    }

    fn barrier(&self, x: &DVector<f64>, obstacle: &PlacedEllipse) -> BarrierSample {
        let b = self.barrier_of(x.as_slice(), obstacle);
        BarrierSample {
            h: b.h,
            grad_x: b.gradient,
            grad_q: b.grad_q,
            grad_theta_obs: b.grad_theta_obs,
            margin: b.margin,
            penetrating: b.penetrating,
            argmin_link: b.argmin_link,
        }
    }

    /// One barrier per link when the hard minimum is used: keeping every
    /// link's condition keeps the minimum nonnegative across link switches.
    fn component_barriers(&self, x: &DVector<f64>, obstacle: &PlacedEllipse) -> Vec<BarrierSample> {
        if self.smooth_min.is_some() {
            return vec![self.barrier(x, obstacle)];
        }
        let b = self.barrier_of(x.as_slice(), obstacle);
        b.links
            .iter()
            .zip(b.link_gradients)
            .enumerate()
            .map(|(j, (r, grad_x))| BarrierSample {
                h: r.value,
                grad_x,
                grad_q: r.grad_q,
                grad_theta_obs: r.grad_theta_obs,
                margin: r.margin,
                penetrating: r.penetrating,
                argmin_link: j,
            })
            .collect()
    }

    fn goal_point(&self, x: &DVector<f64>) -> Vec2 {
        self.forward_kinematics(x.as_slice()).end_effector()
    }

    fn outline(&self, x: &DVector<f64>) -> Vec<Outline> {
        vec![Outline::Polyline(self.forward_kinematics(x.as_slice()).joints)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellipse::EllipseShape;
    use crate::se2::Rot2;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::FRAC_PI_2;

    fn two_link() -> ArmModel {
        ArmModel::new(vec![1.0, 1.0], Vec2::zeros()).unwrap()
    }

    #[test]
    fn straight_and_bent_arm() {
        let fk = two_link().forward_kinematics(&[0.0, 0.0]);
        assert_eq!(fk.joints, vec![Vec2::zeros(), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)]);
        let fk = two_link().forward_kinematics(&[FRAC_PI_2, -FRAC_PI_2]);
        assert!((fk.joints[1] - Vec2::new(0.0, 1.0)).norm() < 1e-15);
        assert!((fk.end_effector() - Vec2::new(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn fk_matches_rotation_products() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let arm = ArmModel::new(vec![1.0, 0.7, 1.3, 0.4], Vec2::new(0.5, -1.0)).unwrap();
        for _ in 0..200 {
            let th: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.2..3.2)).collect();
            // homogeneous chain: R(θ₀)·T(L₀)·R(θ₁)·T(L₁)…
            let mut rot = Rot2::identity();
            let mut p = arm.base;
            for (l, t) in arm.link_lengths().iter().zip(&th) {
                rot = rot.compose(&Rot2::new(*t));
                p += rot.apply(Vec2::new(*l, 0.0));
            }
            let ee = arm.forward_kinematics(&th).end_effector();
            assert!((ee - p).norm() < 1e-12);
            assert!((ee - arm.base).norm() <= arm.reach() + 1e-12);
        }
    }

    #[test]
    fn jacobian_examples() {
        let j = two_link().jacobian(&[0.0, 0.0]);
        assert_eq!(j.position[2][0], Vec2::new(0.0, 2.0));
        assert_eq!(j.position[1][1], Vec2::zeros());
        assert_eq!(j.orientation(0, 1), 0.0);
        assert_eq!(j.orientation(1, 0), 1.0);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let arm = ArmModel::new(vec![1.0, 0.7, 1.3], Vec2::zeros()).unwrap();
        for _ in 0..200 {
            let th: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let jac = arm.jacobian(&th);
            for k in 0..3 {
                let h = 1e-6;
                let (mut tp, mut tm) = (th.clone(), th.clone());
                tp[k] += h;
                tm[k] -= h;
                let (fp, fm) = (arm.forward_kinematics(&tp), arm.forward_kinematics(&tm));
                for j in 0..=3 {
                    let fd = (fp.joints[j] - fm.joints[j]) / (2.0 * h);
                    assert!((fd - jac.position[j][k]).norm() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn circle_above_straight_arm() {
        let arm = two_link();
        let obstacle = PlacedEllipse::new(EllipseShape::circle(0.5).unwrap(), SE2Pose::from_xy_theta(1.0, 2.0, 0.0));
        let b = arm.barrier_of(&[0.0, 0.0], &obstacle);
        assert!((b.h - 1.5).abs() < 1e-12);
        // the shared joint (1, 0) is the witness of both links
        assert_eq!(b.argmin_link, 0);
        assert!(b.gradient.iter().all(|g| g.is_finite()));
        // raising the first joint angle lifts the whole arm toward the circle
        assert!(b.gradient[0] < 0.0);
    }

    #[test]
    fn value_is_continuous_across_link_switch() {
        // circle in the inner corner of a bent arm, equidistant from both links
        let arm = two_link();
        let obstacle =
            PlacedEllipse::new(EllipseShape::circle(0.2).unwrap(), SE2Pose::from_xy_theta(0.5, -0.5, 0.0));
        let th = [0.0, -FRAC_PI_2];
        let a = arm.barrier_of(&[th[0] - 1e-6, th[1]], &obstacle);
        let b = arm.barrier_of(&[th[0] + 1e-6, th[1]], &obstacle);
        assert!((a.h - b.h).abs() < 1e-5);
        let here = arm.barrier_of(&th, &obstacle);
        assert!(here.margin < 1e-9);
    }

    #[test]
    fn barrier_gradient_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let arm = ArmModel::new(vec![1.0, 1.0, 1.0], Vec2::zeros()).unwrap();
        let mut checked = 0;
        while checked < 300 {
            let th: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let obstacle = PlacedEllipse::new(
                EllipseShape::new(rng.gen_range(0.2..1.0), rng.gen_range(0.2..1.0)).unwrap(),
                SE2Pose::from_xy_theta(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(0.0..6.0)),
            );
            let b = arm.barrier_of(&th, &obstacle);
            if b.penetrating || b.margin < 1e-4 {
                continue;
            }
            for k in 0..3 {
                let h = 1e-6;
                let (mut tp, mut tm) = (th.clone(), th.clone());
                tp[k] += h;
                tm[k] -= h;
                let fd = (arm.barrier_of(&tp, &obstacle).h - arm.barrier_of(&tm, &obstacle).h) / (2.0 * h);
                assert!((fd - b.gradient[k]).abs() < 1e-5 * b.gradient.norm().max(1.0), "{fd} vs {}", b.gradient[k]);
            }
            checked += 1;
        }
    }

    #[test]
    fn smooth_min_is_below_hard_min() {
        let obstacle = PlacedEllipse::new(EllipseShape::new(0.5, 0.3).unwrap(), SE2Pose::from_xy_theta(1.5, 1.5, 0.2));
        let th = [0.3, 0.4, -0.2];
        let arm = ArmModel::new(vec![1.0, 1.0, 1.0], Vec2::zeros()).unwrap();
        let hard = arm.barrier_of(&th, &obstacle);
        let soft = arm.clone().with_smooth_min(Some(0.05)).barrier_of(&th, &obstacle);
        assert!(soft.h <= hard.h);
        assert!(hard.h - soft.h <= 0.05 * 3f64.ln() + 1e-12);
    }
}
