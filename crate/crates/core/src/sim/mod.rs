//! Closed-loop simulation: per-step CLF-CBF QP, zero-order hold, RK4.

pub mod grid;

use nalgebra::DVector;
use serde::Serialize;

use crate::control::{
    solve_clf_cbf_qp, AffineInControl, BarrierSample, ClfCbfProblem, ControlSolution, QpStatus,
    QuadraticClf, TimeVaryingCbf,
};
use crate::robots::{GoalRegion, Obstacle, RobotModel};

pub use grid::{grid_evaluate, GridMode, GridSpec, GridValues};

/// `‖L_gh‖` below this means the control has no authority over a barrier.
pub const LOW_AUTHORITY: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerParams {
    /// Constant nominal control `k(x)`.
    pub nominal: DVector<f64>,
    pub lambda: f64,
    pub gamma_h: f64,
    pub bounds: Option<(DVector<f64>, DVector<f64>)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Extra barrier evaluations inside each step (0 disables the monitor).
    pub monitor_substeps: usize,
}

/// One logged step, taken at time `t` before integrating.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub state: DVector<f64>,
    pub u: DVector<f64>,
    pub delta: f64,
    pub v: f64,
    pub h: Vec<f64>,
    pub cbc: Vec<f64>,
    pub status: QpStatus,
    pub active_set: Vec<usize>,
    pub min_margin: f64,
    /// Smallest barrier value seen at the intra-step monitor points.
    pub monitor_min_h: Option<f64>,
    pub penetrating: bool,
    /// Some barrier had `‖L_gh‖ < LOW_AUTHORITY`.
    pub low_authority: bool,
}

impl StepRecord {
    pub fn min_h(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub goal_reached: bool,
    pub t_goal: Option<f64>,
    pub t_final: f64,
    pub steps: usize,
    /// Minimum over logged rows of `min_i h_i`.
    pub min_h: f64,
    pub monitor_min_h: Option<f64>,
    /// Rows with `min_i h_i ≤ 0`.
    pub violations: usize,
    pub infeasible_steps: usize,
    pub failed_steps: usize,
    pub low_authority_steps: usize,
    pub v_initial: f64,
    pub v_final: f64,
}

/// Destination for logged rows.
pub trait LogSink {
    fn record(&mut self, row: &StepRecord);
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub rows: Vec<StepRecord>,
    pub summary: RunSummary,
}

impl LogSink for Vec<StepRecord> {
    fn record(&mut self, row: &StepRecord) {
        self.push(row.clone());
    }
}

impl<F: FnMut(&StepRecord)> LogSink for F {
    fn record(&mut self, row: &StepRecord) {
        self(row)
    }
}

pub struct Simulation {
    pub model: Box<dyn RobotModel>,
    pub obstacles: Vec<Obstacle>,
    pub clf: QuadraticClf,
    pub controller: ControllerParams,
    pub goal: GoalRegion,
    pub initial_state: DVector<f64>,
    pub config: SimConfig,
}

/// Everything the controller computed at one `(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlStep {
    pub v: f64,
    pub clc: AffineInControl,
    pub barriers: Vec<BarrierSample>,
    pub cbc_rows: Vec<AffineInControl>,
    /// Rows handed to the QP: every component barrier of every obstacle.
    pub qp_rows: Vec<AffineInControl>,
    pub solution: ControlSolution,
}

impl Simulation {
    fn cbf<'a>(&'a self, obstacle: &'a Obstacle) -> TimeVaryingCbf<'a> {
        TimeVaryingCbf {
            model: self.model.as_ref(),
            obstacle,
            gamma_h: self.controller.gamma_h,
        }
    }

    pub fn barriers(&self, x: &DVector<f64>, t: f64) -> Vec<BarrierSample> {
        self.obstacles.iter().map(|o| self.cbf(o).sample(x, t)).collect()
    }

    pub fn control(&self, x: &DVector<f64>, t: f64) -> ControlStep {
        let drift = self.model.drift(x);
        let actuation = self.model.actuation(x);
        let (v, clc) = self.clf.condition(x, &drift, &actuation);
        let (barriers, cbc_rows): (Vec<_>, Vec<_>) =
            self.obstacles.iter().map(|o| self.cbf(o).condition(x, t)).unzip();
        let qp_rows: Vec<_> = self
            .obstacles
            .iter()
            .flat_map(|o| self.cbf(o).component_conditions(x, t))
            .collect();
        let problem = ClfCbfProblem {
            nominal: self.controller.nominal.clone(),
            lambda: self.controller.lambda,
            clc: clc.clone(),
            cbc: qp_rows.clone(),
            bounds: self.controller.bounds.clone(),
        };
        let solution = solve_clf_cbf_qp(&problem);
        ControlStep {
            v,
            clc,
            barriers,
            cbc_rows,
            qp_rows,
            solution,
        }
    }

    fn rk4(&self, x: &DVector<f64>, u: &DVector<f64>, dt: f64) -> DVector<f64> {
        let f = |s: &DVector<f64>| self.model.dynamics(s, u);
        let k1 = f(x);
        let k2 = f(&(x + &k1 * (dt / 2.0)));
        let k3 = f(&(x + &k2 * (dt / 2.0)));
        let k4 = f(&(x + &k3 * dt));
        x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
    }

    /// One RK4 step of length `dt` under the constant control `u`, with
    /// angle components wrapped afterwards.
    pub fn integrate(&self, x: &DVector<f64>, u: &DVector<f64>, dt: f64) -> DVector<f64> {
        self.model.wrap_state(self.rk4(x, u, dt))
    }

    fn monitor(&self, x: &DVector<f64>, u: &DVector<f64>, t: f64) -> Option<f64> {
        let n = self.config.monitor_substeps;
        if n == 0 || self.obstacles.is_empty() {
            return None;
        }
        let h = self.config.dt / n as f64;
        let mut s = x.clone();
        let mut lowest = f64::INFINITY;
        for i in 1..=n {
            s = self.rk4(&s, u, h);
            let ti = t + i as f64 * h;
            for b in self.barriers(&s, ti) {
                lowest = lowest.min(b.h);
            }
        }
        Some(lowest)
    }

    /// Control and log at `(x, t)`, then advance one step.
    pub fn step(&self, x: &DVector<f64>, t: f64) -> (DVector<f64>, StepRecord) {
        let c = self.control(x, t);
        let u = c.solution.u.clone();
        let mut low_authority = false;
        for (i, (row, b)) in c.cbc_rows.iter().zip(&c.barriers).enumerate() {
            if row.linear.norm() < LOW_AUTHORITY {
                low_authority = true;
                log::warn!("t={t:.4}: barrier {i} has no control authority (|L_g h| < {LOW_AUTHORITY:e}, h={:.6})", b.h);
            }
        }
        match c.solution.status {
            QpStatus::Optimal => {}
            QpStatus::InfeasibleRelaxed => log::warn!(
                "t={t:.4}: barrier rows infeasible within input bounds; relaxed by {:.3e}",
                c.solution.cbc_relaxation
            ),
            QpStatus::Failed => log::warn!("t={t:.4}: QP solver failed"),
        }
        let record = StepRecord {
            t,
            state: x.clone(),
            delta: c.solution.delta,
            v: c.v,
            h: c.barriers.iter().map(|b| b.h).collect(),
            cbc: c.cbc_rows.iter().map(|r| r.eval(&u)).collect(),
            status: c.solution.status,
            active_set: c.solution.active_set.clone(),
            min_margin: c.barriers.iter().map(|b| b.margin).fold(f64::INFINITY, f64::min),
            monitor_min_h: self.monitor(x, &u, t),
            penetrating: c.barriers.iter().any(|b| b.penetrating),
            low_authority,
            u,
        };
        let next = self.integrate(x, &record.u, self.config.dt);
        (next, record)
    }

    /// Run from the initial state until the goal is entered or `t_max`.
    pub fn run_into(&self, sink: &mut dyn LogSink) -> RunSummary {
        let dt = self.config.dt;
        let last_step = (self.config.t_max / dt).round() as usize;
        let mut x = self.model.wrap_state(self.initial_state.clone());
        let mut summary = RunSummary {
            goal_reached: false,
            t_goal: None,
            t_final: 0.0,
            steps: 0,
            min_h: f64::INFINITY,
            monitor_min_h: None,
            violations: 0,
            infeasible_steps: 0,
            failed_steps: 0,
            low_authority_steps: 0,
            v_initial: self.clf.value(&x),
            v_final: 0.0,
        };
        for k in 0..=last_step {
            let t = k as f64 * dt;
            let reached = self.goal.contains(self.model.goal_point(&x));
            let (next, row) = self.step(&x, t);
            sink.record(&row);

            summary.steps += 1;
            summary.t_final = t;
            summary.v_final = row.v;
            let min_h = row.min_h();
            summary.min_h = summary.min_h.min(min_h);
            if min_h <= 0.0 {
                summary.violations += 1;
            }
            if let Some(m) = row.monitor_min_h {
                summary.monitor_min_h = Some(summary.monitor_min_h.map_or(m, |s: f64| s.min(m)));
            }
            match row.status {
                QpStatus::Optimal => {}
                QpStatus::InfeasibleRelaxed => summary.infeasible_steps += 1,
                QpStatus::Failed => summary.failed_steps += 1,
            }
            if row.low_authority {
                summary.low_authority_steps += 1;
            }
            if reached {
                summary.goal_reached = true;
                summary.t_goal = Some(t);
                break;
            }
            x = next;
        }
        summary
    }

    pub fn run(&self) -> TrajectoryLog {
        let mut rows = Vec::new();
        let summary = self.run_into(&mut rows);
        TrajectoryLog { rows, summary }
    }
}
