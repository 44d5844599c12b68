//! Dense primal active-set solver for small strictly convex QPs:
//!
//! ```text
//! minimize   ½ zᵀ H z + cᵀ z
//! subject to A z ≥ b
//! ```
//!
//! Each iteration solves the equality-constrained problem on the working set
//! by the range-space method (Cholesky of `H` and of `A_W H⁻¹ A_Wᵀ`). Pivoting
//! follows Bland's rule: the lowest-index negative multiplier leaves, the
//! lowest-index blocking constraint enters.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QpStatus {
    Optimal,
    /// The constraint set was empty; the returned point solves a relaxed
    /// problem (see [`solve_with_elastic_rows`]).
    InfeasibleRelaxed,
    Failed,
}

impl QpStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            QpStatus::Optimal => "optimal",
            QpStatus::InfeasibleRelaxed => "infeasible_relaxed",
            QpStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProgram {
    pub h: DMatrix<f64>,
    pub c: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub z: DVector<f64>,
    /// One multiplier per constraint row; zero off the active set.
    pub multipliers: DVector<f64>,
    pub active_set: Vec<usize>,
    pub status: QpStatus,
    pub kkt_residual: f64,
    pub iterations: usize,
    /// Amount by which the elastic rows had to be relaxed (zero if feasible).
    pub relaxation: f64,
}

/// Primal feasibility tolerance, relative to `1 + |b_i|`.
const FEASIBILITY_TOLERANCE: f64 = 1e-12;
/// Elastic phase regularization toward the starting point.
const ELASTIC_REGULARIZATION: f64 = 1e-6;
/// Relaxations below this are treated as zero.
const RELAXATION_TOLERANCE: f64 = 1e-9;
/// Rows whose component outside the working-set span is below this
/// fraction of their norm are treated as dependent.
const DEPENDENCE_TOLERANCE: f64 = 1e-10;

impl QuadraticProgram {
    pub fn new(h: DMatrix<f64>, c: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>) -> Self {
        assert_eq!(h.nrows(), h.ncols());
        assert_eq!(h.nrows(), c.len());
        assert_eq!(a.nrows(), b.len());
        assert!(a.nrows() == 0 || a.ncols() == c.len());
        Self { h, c, a, b }
    }

    pub fn variables(&self) -> usize {
        self.c.len()
    }

    pub fn constraints(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        0.5 * z.dot(&(&self.h * z)) + self.c.dot(z)
    }

    fn row(&self, i: usize) -> DVector<f64> {
        self.a.row(i).transpose()
    }

    /// Largest constraint violation, relative to `1 + |b_i|`.
    fn violation(&self, z: &DVector<f64>) -> f64 {
        (0..self.constraints())
            .map(|i| (self.b[i] - self.a.row(i).dot(&z.transpose())) / (1.0 + self.b[i].abs()))
            .fold(0.0, f64::max)
    }

    /// Stationarity, primal/dual feasibility and complementarity, as a
    /// single max-norm.
    pub fn kkt_residual(&self, z: &DVector<f64>, multipliers: &DVector<f64>) -> f64 {
        let mut r = (&self.h * z + &self.c - self.a.transpose() * multipliers).amax();
        for i in 0..self.constraints() {
            let slack = self.a.row(i).dot(&z.transpose()) - self.b[i];
            r = r.max(-slack).max(-multipliers[i]).max((multipliers[i] * slack).abs());
        }
        r
    }
}

fn is_feasible(qp: &QuadraticProgram, z: &DVector<f64>) -> bool {
    (0..qp.constraints())
        .all(|i| qp.a.row(i).dot(&z.transpose()) >= qp.b[i] - FEASIBILITY_TOLERANCE * (1.0 + qp.b[i].abs()))
}

/// Minimizer of the cost subject to `A_W z = b_W`, with the working-set
/// multipliers. `None` if the working-set rows are numerically dependent.
fn equality_solve(
    qp: &QuadraticProgram,
    chol: &Cholesky<f64, Dyn>,
    working: &[usize],
) -> Option<(DVector<f64>, DVector<f64>)> {
    let hinv_c = chol.solve(&qp.c);
    if working.is_empty() {
        return Some((-hinv_c, DVector::zeros(0)));
    }
    let n = qp.variables();
    let mut aw = DMatrix::zeros(working.len(), n);
    let mut bw = DVector::zeros(working.len());
    for (r, &i) in working.iter().enumerate() {
        aw.set_row(r, &qp.a.row(i));
        bw[r] = qp.b[i];
    }
    let hinv_awt = chol.solve(&aw.transpose());
    let s = &aw * &hinv_awt;
    let s_chol = Cholesky::new(s)?;
    // A_W H⁻¹ (A_Wᵀ λ − c) = b_W
    let lambda = s_chol.solve(&(&bw + &aw * &hinv_c));
    let z = &hinv_awt * &lambda - hinv_c;
    Some((z, lambda))
}

/// Whether `row` lies (numerically) in the span of the working-set rows.
fn depends_on(qp: &QuadraticProgram, working: &[usize], row: &DVector<f64>) -> bool {
    if working.is_empty() {
        return false;
    }
    let n = qp.variables();
    let mut aw = DMatrix::zeros(working.len(), n);
    for (r, &i) in working.iter().enumerate() {
        aw.set_row(r, &qp.a.row(i));
    }
    let Some(gram) = Cholesky::new(&aw * aw.transpose()) else {
        return true;
    };
    let coeffs = gram.solve(&(&aw * row));
    let residual = row - aw.transpose() * coeffs;
    residual.norm() <= DEPENDENCE_TOLERANCE * row.norm()
}

/// Active-set iterations from a feasible starting point.
///
/// `start` must satisfy every constraint (within `1e-12·(1 + |b_i|)`).
pub fn solve_from(qp: &QuadraticProgram, start: &DVector<f64>) -> QpSolution {
    let n = qp.variables();
    let m = qp.constraints();
    let failed = |z: DVector<f64>, iterations| QpSolution {
        z,
        multipliers: DVector::zeros(m),
        active_set: vec![],
        status: QpStatus::Failed,
        kkt_residual: f64::INFINITY,
        iterations,
        relaxation: 0.0,
    };
    let Some(chol) = Cholesky::new(qp.h.clone()) else {
        return failed(start.clone(), 0);
    };

    let mut z = start.clone();
    let mut working: Vec<usize> = Vec::new();
    let cap = 3 * (n + m);
    for iteration in 0..=cap {
        let Some((target, lambda)) = equality_solve(qp, &chol, &working) else {
            return failed(z, iteration);
        };
        let step = &target - &z;
        if step.amax() <= 1e-14 * (1.0 + z.amax()) {
            // stationary on the working set: check multiplier signs
            let leaving = working
                .iter()
                .zip(lambda.iter())
                .filter(|(_, &l)| l < 0.0)
                .map(|(&i, _)| i)
                .min();
            match leaving {
                Some(i) => working.retain(|&w| w != i),
                None => {
                    let mut multipliers = DVector::zeros(m);
                    for (&i, &l) in working.iter().zip(lambda.iter()) {
                        multipliers[i] = l;
                    }
                    let mut active_set = working.clone();
                    active_set.sort_unstable();
                    let kkt_residual = qp.kkt_residual(&target, &multipliers);
                    return QpSolution {
                        z: target,
                        multipliers,
                        active_set,
                        status: QpStatus::Optimal,
                        kkt_residual,
                        iterations: iteration,
                        relaxation: 0.0,
                    };
                }
            }
            continue;
        }

        // longest feasible step toward the working-set minimizer
        let mut alpha = 1.0;
        let mut blocking = None;
        for i in 0..m {
            if working.contains(&i) {
                continue;
            }
            let ai = qp.row(i);
            let rate = ai.dot(&step);
            // rows dependent on the working set see only rounding here
            if rate >= -1e-13 * ai.norm() * step.norm() {
                continue;
            }
            let slack = (ai.dot(&z) - qp.b[i]).max(0.0);
            let ratio = slack / -rate;
            if ratio < alpha && !depends_on(qp, &working, &ai) {
                alpha = ratio;
                blocking = Some(i);
            }
        }
        match blocking {
            Some(i) => {
                z += alpha * step;
                working.push(i);
            }
            None => z = target,
        }
    }
    failed(z, cap)
}

/// Solve a QP whose feasible set may be empty.
///
/// Rows flagged in `elastic` may be relaxed; the others must hold at
/// `start`. If `start` violates elastic rows, a phase-one problem finds the
/// smallest uniform relaxation `s` (minimizing the largest violation) and the
/// QP is then solved with those rows shifted by `s`. A positive `s` yields
/// [`QpStatus::InfeasibleRelaxed`].
pub fn solve_with_elastic_rows(
    qp: &QuadraticProgram,
    elastic: &[bool],
    start: &DVector<f64>,
) -> QpSolution {
    assert_eq!(elastic.len(), qp.constraints());
    if is_feasible(qp, start) {
        return solve_from(qp, start);
    }

    let n = qp.variables();
    let m = qp.constraints();
    // phase one over (z, s): minimize s + μ/2 (‖z − z0‖² + s²)
    let s0 = (0..m)
        .filter(|&i| elastic[i])
        .map(|i| qp.b[i] - qp.a.row(i).dot(&start.transpose()))
        .fold(0.0, f64::max);
    let mu = ELASTIC_REGULARIZATION;
    let h = DMatrix::identity(n + 1, n + 1) * mu;
    let mut c = DVector::zeros(n + 1);
    c.rows_mut(0, n).copy_from(&(-mu * start));
    c[n] = 1.0;
    let mut a = DMatrix::zeros(m + 1, n + 1);
    let mut b = DVector::zeros(m + 1);
    for i in 0..m {
        a.view_mut((i, 0), (1, n)).copy_from(&qp.a.row(i));
        a[(i, n)] = if elastic[i] { 1.0 } else { 0.0 };
        b[i] = qp.b[i];
    }
    a[(m, n)] = 1.0;
    let phase_one = QuadraticProgram::new(h, c, a, b);
    let mut z0 = DVector::zeros(n + 1);
    z0.rows_mut(0, n).copy_from(start);
    z0[n] = s0;
    let first = solve_from(&phase_one, &z0);
    if first.status == QpStatus::Failed {
        let mut out = solve_from(qp, start);
        out.status = QpStatus::Failed;
        return out;
    }
    let relaxation = first.z[n].max(0.0);
    let feasible_point = first.z.rows(0, n).into_owned();

    if relaxation <= RELAXATION_TOLERANCE {
        // numerically feasible: tighten back onto the original set
        let mut out = solve_from(qp, &project_onto(qp, feasible_point));
        if out.status == QpStatus::Optimal && qp.violation(&out.z) > RELAXATION_TOLERANCE {
            out.status = QpStatus::Failed;
        }
        return out;
    }

    let mut relaxed = qp.clone();
    for (i, _) in elastic.iter().enumerate().take(m).filter(|(_, &e)| e) {
        relaxed.b[i] -= relaxation;
    }
    let mut out = solve_from(&relaxed, &project_onto(&relaxed, feasible_point));
    if out.status == QpStatus::Optimal {
        out.status = QpStatus::InfeasibleRelaxed;
    }
    out.relaxation = relaxation;
    out
}

/// Phase-one output satisfies the constraints only up to rounding; nudge
/// it onto the feasible side so the active-set iteration starts feasible.
fn project_onto(qp: &QuadraticProgram, mut z: DVector<f64>) -> DVector<f64> {
    for _ in 0..4 {
        let mut worst = None;
        let mut worst_gap = 0.0;
        for i in 0..qp.constraints() {
            let gap = qp.b[i] - qp.a.row(i).dot(&z.transpose());
            if gap > worst_gap {
                worst_gap = gap;
                worst = Some(i);
            }
        }
        let Some(i) = worst else { break };
        let ai = qp.row(i);
        z += ai.clone() * (worst_gap / ai.norm_squared());
    }
    z
}

/// Solve from scratch, starting at the origin with every row elastic.
pub fn solve(qp: &QuadraticProgram) -> QpSolution {
    solve_with_elastic_rows(
        qp,
        &vec![true; qp.constraints()],
        &DVector::zeros(qp.variables()),
    )
}
