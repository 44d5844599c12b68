//! Scenario files: JSON description of a robot, obstacles, controller gains,
//! goal and integration settings.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::QuadraticClf;
use crate::distance::{ConvexPolygon, RobotShape};
use crate::ellipse::EllipseShape;
use crate::robots::{
    ArmModel, GoalRegion, MotionSegment, Obstacle, ObstacleMotion, RobotModel, UnicycleModel,
};
use crate::se2::{SE2Pose, Vec2};
use crate::sim::{ControllerParams, SimConfig, Simulation};

/// Invalid scenario, located by a JSON pointer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioError {
    pub pointer: String,
    pub message: String,
}

impl ScenarioError {
    pub fn at(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pointer = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{pointer}: {}", self.message)
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RobotConfig {
    /// Polygonal unicycle; state `(x, y, θ)`, control `(v, ω)`.
    Unicycle {
        vertices: Vec<[f64; 2]>,
        initial_state: [f64; 3],
        target_state: [f64; 3],
    },
    /// Disc-shaped unicycle.
    Disc {
        radius: f64,
        initial_state: [f64; 3],
        target_state: [f64; 3],
    },
    /// Planar arm; state and control are joint angles and joint rates.
    Arm {
        link_lengths: Vec<f64>,
        #[serde(default)]
        base: [f64; 2],
        initial_state: Vec<f64>,
        target_state: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        smooth_min: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    pub a: f64,
    pub b: f64,
    pub pose: SE2Pose,
    #[serde(default)]
    pub velocity: [f64; 2],
    #[serde(default)]
    pub angular_velocity: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segments: Vec<MotionSegment>,
    /// Half-width of a seeded uniform perturbation of the initial position.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub jitter: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    /// Constant nominal control; defaults to `(3, 0)` for unicycles and zero
    /// joint rates for arms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal: Option<Vec<f64>>,
    #[serde(default = "default_gamma_v")]
    pub gamma_v: f64,
    #[serde(default = "default_gamma_h")]
    pub gamma_h: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// CLF weight matrix; identity if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    /// Input bounds; arms default to `±3` per joint, unicycles to none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_upper: Option<Vec<f64>>,
}

fn default_gamma_v() -> f64 {
    2.0
}
fn default_gamma_h() -> f64 {
    3.0
}
fn default_lambda() -> f64 {
    100.0
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            nominal: None,
            gamma_v: default_gamma_v(),
            gamma_h: default_gamma_h(),
            lambda: default_lambda(),
            q: None,
            input_lower: None,
            input_upper: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalConfig {
    #[serde(default = "default_goal_radius")]
    pub radius: f64,
}

fn default_goal_radius() -> f64 {
    0.5
}

impl Default for GoalConfig {
    fn default() -> Self {
        Self {
            radius: default_goal_radius(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub monitor_substeps: usize,
}

fn default_dt() -> f64 {
    0.01
}
fn default_t_max() -> f64 {
    30.0
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            dt: default_dt(),
            t_max: default_t_max(),
            seed: 0,
            monitor_substeps: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub robot: RobotConfig,
    #[serde(default)]
    pub obstacles: Vec<ObstacleConfig>,
    #[serde(default)]
    pub controller: ControllerConfig,
    #[serde(default)]
    pub goal: GoalConfig,
    #[serde(default)]
    pub sim: SimSettings,
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}

fn check(cond: bool, pointer: impl Into<String>, message: impl Into<String>) -> Result<(), ScenarioError> {
    if cond {
        Ok(())
    } else {
        Err(ScenarioError::at(pointer, message))
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl Scenario {
    /// Parse and validate.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let scenario = Self::parse(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Structural parse only (types and unknown keys); call
    /// [`Scenario::validate`] before use.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = pointer_of(e.path());
            ScenarioError::at(pointer, e.into_inner().to_string())
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn state_dim(&self) -> usize {
        match &self.robot {
            RobotConfig::Unicycle { .. } | RobotConfig::Disc { .. } => 3,
            RobotConfig::Arm { link_lengths, .. } => link_lengths.len(),
        }
    }

    pub fn control_dim(&self) -> usize {
        match &self.robot {
            RobotConfig::Unicycle { .. } | RobotConfig::Disc { .. } => 2,
            RobotConfig::Arm { link_lengths, .. } => link_lengths.len(),
        }
    }

    pub fn is_arm(&self) -> bool {
        matches!(self.robot, RobotConfig::Arm { .. })
    }

    pub fn state_labels(&self) -> Vec<String> {
        match &self.robot {
            RobotConfig::Arm { link_lengths, .. } => {
                (1..=link_lengths.len()).map(|i| format!("theta_{i}")).collect()
            }
            _ => vec!["x".into(), "y".into(), "theta".into()],
        }
    }

    pub fn control_labels(&self) -> Vec<String> {
        match &self.robot {
            RobotConfig::Arm { link_lengths, .. } => {
                (1..=link_lengths.len()).map(|i| format!("omega_{i}")).collect()
            }
            _ => vec!["v".into(), "omega".into()],
        }
    }

    fn initial_state(&self) -> Vec<f64> {
        match &self.robot {
            RobotConfig::Unicycle { initial_state, .. } | RobotConfig::Disc { initial_state, .. } => {
                initial_state.to_vec()
            }
            RobotConfig::Arm { initial_state, .. } => initial_state.clone(),
        }
    }

    fn target_state(&self) -> Vec<f64> {
        match &self.robot {
            RobotConfig::Unicycle { target_state, .. } | RobotConfig::Disc { target_state, .. } => {
                target_state.to_vec()
            }
            RobotConfig::Arm { target_state, .. } => target_state.clone(),
        }
    }

    pub fn nominal(&self) -> Vec<f64> {
        self.controller.nominal.clone().unwrap_or_else(|| match &self.robot {
            RobotConfig::Arm { link_lengths, .. } => vec![0.0; link_lengths.len()],
            _ => vec![3.0, 0.0],
        })
    }

    pub fn bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let m = self.control_dim();
        let (lo, hi) = (&self.controller.input_lower, &self.controller.input_upper);
        match (lo, hi, self.is_arm()) {
            (None, None, false) => None,
            (None, None, true) => Some((vec![-3.0; m], vec![3.0; m])),
            (lo, hi, _) => Some((
                lo.clone().unwrap_or_else(|| vec![f64::NEG_INFINITY; m]),
                hi.clone().unwrap_or_else(|| vec![f64::INFINITY; m]),
            )),
        }
    }

    fn q_matrix(&self) -> DMatrix<f64> {
        let n = self.state_dim();
        match &self.controller.q {
            None => DMatrix::identity(n, n),
            Some(rows) => DMatrix::from_fn(n, n, |i, j| rows[i][j]),
        }
    }

    fn model(&self) -> Result<Box<dyn RobotModel>, ScenarioError> {
        Ok(match &self.robot {
            RobotConfig::Unicycle { vertices, .. } => {
                let poly = ConvexPolygon::new(vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect())
                    .map_err(|e| ScenarioError::at("/robot/vertices", e.to_string()))?;
                Box::new(UnicycleModel::new(RobotShape::Polygon(poly)))
            }
            RobotConfig::Disc { radius, .. } => Box::new(UnicycleModel::new(RobotShape::Disc(*radius))),
            RobotConfig::Arm {
                link_lengths,
                base,
                smooth_min,
                ..
            } => Box::new(
                ArmModel::new(link_lengths.clone(), Vec2::new(base[0], base[1]))
                    .ok_or_else(|| ScenarioError::at("/robot/link_lengths", "link lengths must be positive"))?
                    .with_smooth_min(*smooth_min),
            ),
        })
    }

    /// Obstacles with the seeded initial-position jitter applied.
    pub fn obstacles(&self) -> Vec<Obstacle> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.sim.seed);
        self.obstacles
            .iter()
            .map(|o| {
                let mut q = o.pose.position();
                if o.jitter > 0.0 {
                    q += Vec2::new(rng.gen_range(-o.jitter..=o.jitter), rng.gen_range(-o.jitter..=o.jitter));
                }
                let motion = ObstacleMotion::constant(
                    SE2Pose::new(q, o.pose.theta()),
                    Vec2::new(o.velocity[0], o.velocity[1]),
                    o.angular_velocity,
                )
                .with_segments(o.segments.clone());
                Obstacle::new(EllipseShape::new(o.a, o.b).expect("validated"), motion)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let s = &self.sim;
        check(s.dt.is_finite() && s.dt > 0.0 && s.dt <= 0.1, "/sim/dt", format!("must be in (0, 0.1], got {}", s.dt))?;
        check(s.t_max.is_finite() && s.t_max > 0.0, "/sim/t_max", "must be positive")?;
        check(s.monitor_substeps <= 1000, "/sim/monitor_substeps", "at most 1000")?;
        check(self.goal.radius.is_finite() && self.goal.radius > 0.0, "/goal/radius", "must be positive")?;

        let c = &self.controller;
        check(c.gamma_v.is_finite() && c.gamma_v > 0.0, "/controller/gamma_v", "must be positive")?;
        check(c.gamma_h.is_finite() && c.gamma_h > 0.0, "/controller/gamma_h", "must be positive")?;
        check(c.lambda.is_finite() && c.lambda > 0.0, "/controller/lambda", "must be positive")?;

        let n = self.state_dim();
        let m = self.control_dim();
        match &self.robot {
            RobotConfig::Unicycle { vertices, .. } => {
                check(vertices.iter().all(|v| all_finite(v)), "/robot/vertices", "must be finite")?;
            }
            RobotConfig::Disc { radius, .. } => {
                check(radius.is_finite() && *radius > 0.0, "/robot/radius", "must be positive")?;
            }
            RobotConfig::Arm {
                link_lengths,
                base,
                initial_state,
                target_state,
                smooth_min,
            } => {
                check(!link_lengths.is_empty(), "/robot/link_lengths", "need at least one link")?;
                for (i, l) in link_lengths.iter().enumerate() {
                    check(l.is_finite() && *l > 0.0, format!("/robot/link_lengths/{i}"), "must be positive")?;
                }
                check(all_finite(base), "/robot/base", "must be finite")?;
                check(initial_state.len() == n, "/robot/initial_state", format!("expected {n} joint angles"))?;
                check(target_state.len() == n, "/robot/target_state", format!("expected {n} joint angles"))?;
                if let Some(t) = smooth_min {
                    check(t.is_finite() && *t > 0.0, "/robot/smooth_min", "temperature must be positive")?;
                }
            }
        }
        check(all_finite(&self.initial_state()), "/robot/initial_state", "must be finite")?;
        check(all_finite(&self.target_state()), "/robot/target_state", "must be finite")?;

        if let Some(nominal) = &c.nominal {
            check(nominal.len() == m, "/controller/nominal", format!("expected {m} entries"))?;
            check(all_finite(nominal), "/controller/nominal", "must be finite")?;
        }
        if let Some(q) = &c.q {
            check(
                q.len() == n && q.iter().all(|r| r.len() == n),
                "/controller/q",
                format!("expected a {n}x{n} matrix"),
            )?;
            check(q.iter().all(|r| all_finite(r)), "/controller/q", "must be finite")?;
        }
        for (name, v) in [("input_lower", &c.input_lower), ("input_upper", &c.input_upper)] {
            if let Some(v) = v {
                check(v.len() == m, format!("/controller/{name}"), format!("expected {m} entries"))?;
                check(v.iter().all(|x| !x.is_nan()), format!("/controller/{name}"), "must be numbers")?;
            }
        }
        if let Some((lo, hi)) = self.bounds() {
            check(lo.iter().zip(&hi).all(|(l, h)| l <= h), "/controller/input_lower", "must not exceed input_upper")?;
        }

        for (i, o) in self.obstacles.iter().enumerate() {
            let p = format!("/obstacles/{i}");
            check(o.a.is_finite() && o.a > 0.0, format!("{p}/a"), "must be positive")?;
            check(o.b.is_finite() && o.b > 0.0, format!("{p}/b"), "must be positive")?;
            check(all_finite(&o.velocity) && o.angular_velocity.is_finite(), format!("{p}/velocity"), "must be finite")?;
            check(o.jitter.is_finite() && o.jitter >= 0.0, format!("{p}/jitter"), "must be non-negative")?;
            for (k, seg) in o.segments.iter().enumerate() {
                check(
                    seg.start.is_finite() && seg.start >= 0.0 && all_finite(&seg.velocity) && seg.angular_velocity.is_finite(),
                    format!("{p}/segments/{k}"),
                    "start must be non-negative and velocities finite",
                )?;
            }
        }

        let model = self.model()?;
        QuadraticClf::new(self.q_matrix(), DVector::from_vec(self.target_state()), c.gamma_v, model.angle_indices())
            .map_err(|e| ScenarioError::at("/controller/q", e.to_string()))?;

        let x0 = DVector::from_vec(self.initial_state());
        for (i, o) in self.obstacles().iter().enumerate() {
            let h = model.barrier(&x0, &o.placed_at(0.0)).h;
            check(h > 0.0, "/robot/initial_state", format!("robot overlaps obstacle {i} at t = 0 (h = {h:.4})"))?;
        }
        Ok(())
    }

    /// Validate and assemble the closed-loop simulation.
    pub fn build(&self) -> Result<Simulation, ScenarioError> {
        self.validate()?;
        let model = self.model()?;
        let clf = QuadraticClf::new(
            self.q_matrix(),
            DVector::from_vec(self.target_state()),
            self.controller.gamma_v,
            model.angle_indices(),
        )
        .map_err(|e| ScenarioError::at("/controller/q", e.to_string()))?;
        let target = DVector::from_vec(self.target_state());
        let goal = GoalRegion::new(model.goal_point(&target), self.goal.radius)
            .ok_or_else(|| ScenarioError::at("/goal/radius", "must be positive"))?;
        Ok(Simulation {
            obstacles: self.obstacles(),
            clf,
            controller: ControllerParams {
                nominal: DVector::from_vec(self.nominal()),
                lambda: self.controller.lambda,
                gamma_h: self.controller.gamma_h,
                bounds: self
                    .bounds()
                    .map(|(lo, hi)| (DVector::from_vec(lo), DVector::from_vec(hi))),
            },
            goal,
            initial_state: DVector::from_vec(self.initial_state()),
            config: SimConfig {
                dt: self.sim.dt,
                t_max: self.sim.t_max,
                monitor_substeps: self.sim.monitor_substeps,
            },
            model,
        })
    }

    /// The same scenario with a polygonal unicycle replaced by its
    /// encapsulating disc (centered at the body origin).
    pub fn with_encapsulating_circle(&self) -> Option<Scenario> {
        let RobotConfig::Unicycle {
            vertices,
            initial_state,
            target_state,
        } = &self.robot
        else {
            return None;
        };
        let radius = vertices
            .iter()
            .map(|v| v[0].hypot(v[1]))
            .fold(0.0, f64::max);
        let mut out = self.clone();
        out.robot = RobotConfig::Disc {
            radius,
            initial_state: *initial_state,
            target_state: *target_state,
        };
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "robot": {"kind": "unicycle", "vertices": [[0.8, 0], [-0.5, 0.5], [-0.5, -0.5]],
                  "initial_state": [0, 0, 0.785], "target_state": [5, 5, 0.785]},
        "obstacles": [{"a": 1, "b": 0.5, "pose": {"x": 3, "y": 0, "theta": 0}}]
    }"#;

    #[test]
    fn defaults_are_filled_in() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.controller.gamma_v, 2.0);
        assert_eq!(s.controller.gamma_h, 3.0);
        assert_eq!(s.controller.lambda, 100.0);
        assert_eq!(s.nominal(), vec![3.0, 0.0]);
        assert_eq!(s.sim.dt, 0.01);
        assert!(s.bounds().is_none());
    }

    #[test]
    fn round_trip() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn unknown_keys_are_rejected_with_pointer() {
        let text = MINIMAL.replace("\"a\": 1", "\"a\": 1, \"colour\": 2");
        let e = Scenario::from_json(&text).unwrap_err();
        assert_eq!(e.pointer, "/obstacles/0/colour");
        let text = MINIMAL.replace("\"kind\": \"unicycle\"", "\"kind\": \"unicycle\", \"speed\": 1");
        assert!(Scenario::from_json(&text).is_err());
    }

    #[test]
    fn semantic_errors_carry_pointers() {
        let text = MINIMAL.replace("\"obstacles\"", "\"sim\": {\"dt\": -0.01}, \"obstacles\"");
        let e = Scenario::from_json(&text).unwrap_err();
        assert_eq!(e.pointer, "/sim/dt");
        let overlapping = MINIMAL.replace("\"x\": 3", "\"x\": 0.5");
        assert_eq!(Scenario::from_json(&overlapping).unwrap_err().pointer, "/robot/initial_state");
    }

    #[test]
    fn jitter_is_seeded() {
        let text = MINIMAL.replace("\"theta\": 0}}", "\"theta\": 0}, \"jitter\": 0.2}");
        let mut s = Scenario::from_json(&text).unwrap();
        let a = s.obstacles()[0].motion.initial;
        assert_eq!(a, s.obstacles()[0].motion.initial);
        s.sim.seed = 9;
        assert_ne!(a, s.obstacles()[0].motion.initial);
    }

    #[test]
    fn encapsulating_circle() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        let c = s.with_encapsulating_circle().unwrap();
        assert!(matches!(c.robot, RobotConfig::Disc { radius, .. } if (radius - 0.8).abs() < 1e-15));
    }
}
