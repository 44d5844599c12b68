use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::ControlError;
use crate::se2::wrap_angle;

/// `c + lᵀu`, an affine function of the control.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineInControl {
    pub constant: f64,
    pub linear: DVector<f64>,
}

impl AffineInControl {
    pub fn eval(&self, u: &DVector<f64>) -> f64 {
        self.constant + self.linear.dot(u)
    }
}

/// `V(x) = (x − x*)ᵀ Q (x − x*)` with the angle components of `x − x*`
/// wrapped to `(−π, π]`, and the linear class-K gain `γ_V`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticClf {
    q: DMatrix<f64>,
    x_star: DVector<f64>,
    gamma_v: f64,
    angle_indices: Vec<usize>,
}

impl QuadraticClf {
    pub fn new(
        q: DMatrix<f64>,
        x_star: DVector<f64>,
        gamma_v: f64,
        angle_indices: Vec<usize>,
    ) -> Result<Self, ControlError> {
        let n = x_star.len();
        if q.nrows() != n || q.ncols() != n {
            return Err(ControlError::Dimension(format!(
                "Q is {}x{}, state has {n} components",
                q.nrows(),
                q.ncols()
            )));
        }
        if let Some(&i) = angle_indices.iter().find(|&&i| i >= n) {
            return Err(ControlError::Dimension(format!("angle index {i} out of range")));
        }
        let scale = q.amax().max(f64::MIN_POSITIVE);
        if (&q - q.transpose()).amax() > 1e-12 * scale || Cholesky::new(q.clone()).is_none() {
            return Err(ControlError::NonPositiveDefiniteQ);
        }
        Ok(Self {
            q,
            x_star,
            gamma_v,
            angle_indices,
        })
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn x_star(&self) -> &DVector<f64> {
        &self.x_star
    }

    pub fn gamma_v(&self) -> f64 {
        self.gamma_v
    }

    pub fn error(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut e = x - &self.x_star;
        for &i in &self.angle_indices {
            e[i] = wrap_angle(e[i]);
        }
        e
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let e = self.error(x);
        e.dot(&(&self.q * &e))
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        2.0 * (&self.q * self.error(x))
    }

    /// The control Lyapunov condition `L_fV + L_gV·u + γ_V V` split into its
    /// constant and control-linear parts, along with `V`.
    pub fn condition(
        &self,
        x: &DVector<f64>,
        drift: &DVector<f64>,
        actuation: &DMatrix<f64>,
    ) -> (f64, AffineInControl) {
        let v = self.value(x);
        let grad = self.gradient(x);
        let clc = AffineInControl {
            constant: grad.dot(drift) + self.gamma_v * v,
            linear: actuation.transpose() * grad,
        };
        (v, clc)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClcEvaluation {
    pub v: f64,
    pub clc: AffineInControl,
    /// The CLC evaluated at the given control.
    pub value: f64,
}

/// `V(x)` and `CLC(x, u)` for dynamics `ẋ = f(x) + g(x) u`.
pub fn clf_value_and_clc(
    clf: &QuadraticClf,
    x: &DVector<f64>,
    drift: &DVector<f64>,
    actuation: &DMatrix<f64>,
    u: &DVector<f64>,
) -> Result<ClcEvaluation, ControlError> {
    let n = clf.x_star.len();
    if x.len() != n || drift.len() != n || actuation.nrows() != n || actuation.ncols() != u.len() {
        return Err(ControlError::Dimension(format!(
            "state {n}, x {}, f {}, g {}x{}, u {}",
            x.len(),
            drift.len(),
            actuation.nrows(),
            actuation.ncols(),
            u.len()
        )));
    }
    let (v, clc) = clf.condition(x, drift, actuation);
    let value = clc.eval(u);
    Ok(ClcEvaluation { v, clc, value })
}
