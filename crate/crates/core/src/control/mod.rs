//! CLF/CBF conditions and the CLF-CBF quadratic program.

pub mod cbf;
pub mod clf;
pub mod qp;

use nalgebra::{DMatrix, DVector};

pub use cbf::{barrier_condition, BarrierSample, TimeVaryingCbf};
pub use clf::{clf_value_and_clc, AffineInControl, ClcEvaluation, QuadraticClf};
pub use qp::{QpSolution, QpStatus, QuadraticProgram};

/// `minimize ‖u − k‖² + λδ²` subject to `CLC(u) ≤ δ`, `CBC_i(u) ≥ 0`,
/// `δ ≥ 0` and optional box bounds on `u`.
///
/// Constraint rows are ordered: CLC, the CBC rows, `δ ≥ 0`, lower bounds,
/// upper bounds. [`ControlSolution::active_set`] indexes into this order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClfCbfProblem {
    pub nominal: DVector<f64>,
    pub lambda: f64,
    pub clc: AffineInControl,
    pub cbc: Vec<AffineInControl>,
    pub bounds: Option<(DVector<f64>, DVector<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlSolution {
    pub u: DVector<f64>,
    pub delta: f64,
    pub status: QpStatus,
    pub kkt_residual: f64,
    pub active_set: Vec<usize>,
    /// Uniform relaxation applied to the CBC rows (zero unless
    /// [`QpStatus::InfeasibleRelaxed`]).
    pub cbc_relaxation: f64,
}

impl ClfCbfProblem {
    pub fn control_dim(&self) -> usize {
        self.nominal.len()
    }

    /// The problem in `½zᵀHz + cᵀz, Az ≥ b` form over `z = (u, δ)`, and the
    /// mask of CBC rows.
    pub fn to_qp(&self) -> (QuadraticProgram, Vec<bool>) {
        let m = self.control_dim();
        let n = m + 1;
        let mut h = DMatrix::identity(n, n) * 2.0;
        h[(m, m)] = 2.0 * self.lambda;
        let mut c = DVector::zeros(n);
        c.rows_mut(0, m).copy_from(&(-2.0 * &self.nominal));

        let box_rows = if self.bounds.is_some() { 2 * m } else { 0 };
        let rows = 1 + self.cbc.len() + 1 + box_rows;
        let mut a = DMatrix::zeros(rows, n);
        let mut b = DVector::zeros(rows);
        let mut elastic = vec![false; rows];

        // δ − lᵀu ≥ c
        for j in 0..m {
            a[(0, j)] = -self.clc.linear[j];
        }
        a[(0, m)] = 1.0;
        b[0] = self.clc.constant;
        for (k, row) in self.cbc.iter().enumerate() {
            let i = 1 + k;
            for j in 0..m {
                a[(i, j)] = row.linear[j];
            }
            b[i] = -row.constant;
            elastic[i] = true;
        }
        let i_delta = 1 + self.cbc.len();
        a[(i_delta, m)] = 1.0;
        if let Some((lo, hi)) = &self.bounds {
            for j in 0..m {
                a[(i_delta + 1 + j, j)] = 1.0;
                b[i_delta + 1 + j] = lo[j];
                a[(i_delta + 1 + m + j, j)] = -1.0;
                b[i_delta + 1 + m + j] = -hi[j];
            }
        }
        (QuadraticProgram::new(h, c, a, b), elastic)
    }
}

/// Solve the CLF-CBF QP. When the CBC rows and the bounds admit no common
/// control, the CBC rows are relaxed by the smallest uniform amount and the
/// result is flagged [`QpStatus::InfeasibleRelaxed`].
pub fn solve_clf_cbf_qp(problem: &ClfCbfProblem) -> ControlSolution {
    let m = problem.control_dim();
    let (qp, elastic) = problem.to_qp();

    // start from the clamped nominal control with enough slack for the CLC
    let mut u0 = problem.nominal.clone();
    if let Some((lo, hi)) = &problem.bounds {
        for j in 0..m {
            u0[j] = u0[j].clamp(lo[j], hi[j]);
        }
    }
    let delta0 = problem.clc.eval(&u0).max(0.0);
    let mut z0 = DVector::zeros(m + 1);
    z0.rows_mut(0, m).copy_from(&u0);
    z0[m] = delta0 + 1e-9 * (1.0 + delta0);

    let sol = qp::solve_with_elastic_rows(&qp, &elastic, &z0);
    ControlSolution {
        u: sol.z.rows(0, m).into_owned(),
        delta: sol.z[m].max(0.0),
        status: sol.status,
        kkt_residual: sol.kkt_residual,
        active_set: sol.active_set,
        cbc_relaxation: sol.relaxation,
    }
}
