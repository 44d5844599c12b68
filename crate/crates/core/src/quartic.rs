//! Closed-form real roots of monic quartics (Ferrari with a Cardano resolvent),
//! followed by Newton polishing.
//!
//! Near a multiple root the closed form loses about half the available digits,
//! so every candidate is polished against the original polynomial and roots
//! from nearly degenerate quartics are additionally recovered by sign-change
//! bisection and by the critical points of the derivative (for roots of even
//! multiplicity, which never change sign).

use crate::error::GeometryError;

/// Discriminant (of the scale-normalized depressed quartic) below which the
/// bracketing fallback also runs.
pub const DEGENERATE_DISCRIMINANT: f64 = 1e-12;
/// Maximum Newton iterations per candidate.
pub const MAX_POLISH_ITERATIONS: usize = 20;
/// Number of bracketing intervals in the fallback scan.
pub const BRACKET_INTERVALS: usize = 64;
/// A root is accepted when `|p(x)|` is below this multiple of the evaluation
/// magnitude `Σ|cᵢ||x|ⁱ`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;
/// Candidates closer than this (relative to `max(1, |x|)`) are the same root.
pub const MERGE_TOLERANCE: f64 = 1e-6;

/// `λ⁴ + c3·λ³ + c2·λ² + c1·λ + c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonicQuartic {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl MonicQuartic {
    pub fn new(c3: f64, c2: f64, c1: f64, c0: f64) -> Self {
        Self { c3, c2, c1, c0 }
    }

    /// Expand `Π (λ − rᵢ)`.
    pub fn from_roots(r: [f64; 4]) -> Self {
        let [a, b, c, d] = r;
        Self {
            c3: -(a + b + c + d),
            c2: a * b + a * c + a * d + b * c + b * d + c * d,
            c1: -(a * b * c + a * b * d + a * c * d + b * c * d),
            c0: a * b * c * d,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (((x + self.c3) * x + self.c2) * x + self.c1) * x + self.c0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        ((4.0 * x + 3.0 * self.c3) * x + 2.0 * self.c2) * x + self.c1
    }

    /// Compensated Horner evaluation (error-free transforms), accurate to
    /// about one rounding of the exact value even near multiple roots.
    pub fn eval_compensated(&self, x: f64) -> f64 {
        let mut s = 1.0f64;
        let mut err = 0.0f64;
        for a in [self.c3, self.c2, self.c1, self.c0] {
            let p = s * x;
            let pe = s.mul_add(x, -p);
            let t = p + a;
            let bb = t - p;
            let se = (p - (t - bb)) + (a - bb);
            s = t;
            err = err.mul_add(x, pe + se);
        }
        s + err
    }

    /// `Σ |cᵢ| |x|ⁱ`, the natural scale of rounding error in [`Self::eval`].
    pub fn magnitude(&self, x: f64) -> f64 {
        let ax = x.abs();
        (((ax + self.c3.abs()) * ax + self.c2.abs()) * ax + self.c1.abs()) * ax + self.c0.abs()
    }

    /// Cauchy bound: every root satisfies `|x| < 1 + max|cᵢ|`.
    pub fn root_bound(&self) -> f64 {
        1.0 + self.c3.abs().max(self.c2.abs()).max(self.c1.abs()).max(self.c0.abs())
    }

    fn is_finite(&self) -> bool {
        self.c3.is_finite() && self.c2.is_finite() && self.c1.is_finite() && self.c0.is_finite()
    }

    fn accepts(&self, x: f64) -> bool {
        self.eval_compensated(x).abs() <= RESIDUAL_TOLERANCE * self.magnitude(x).max(f64::MIN_POSITIVE)
    }
}

/// Sorted distinct real roots.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RealRoots(Vec<f64>);

impl RealRoots {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// All real roots of a monic quartic.
pub fn solve_monic_quartic(poly: MonicQuartic) -> Result<RealRoots, GeometryError> {
    if !poly.is_finite() {
        return Err(GeometryError::DegenerateCoefficients);
    }
    let MonicQuartic { c3, c2, c1, c0 } = poly;

    // λ = y − c3/4 removes the cubic term.
    let shift = 0.25 * c3;
    let c3_2 = c3 * c3;
    let p = c2 - 0.375 * c3_2;
    let q = c1 - 0.5 * c3 * c2 + 0.125 * c3_2 * c3;
    let r = c0 - 0.25 * c3 * c1 + 0.0625 * c3_2 * c2 - 3.0 / 256.0 * c3_2 * c3_2;

    let mut candidates: Vec<f64> = Vec::with_capacity(8);
    let scale = p.abs().sqrt().max(q.abs().cbrt()).max(r.abs().sqrt().sqrt());

    let degenerate;
    if scale == 0.0 || !scale.is_finite() {
        candidates.push(-shift);
        degenerate = !scale.is_finite();
    } else {
        // Solve z⁴ + pn z² + qn z + rn = 0 with y = scale·z.
        let pn = p / (scale * scale);
        let qn = q / (scale * scale * scale);
        let rn = r / (scale * scale * scale * scale);
        let disc = discriminant(pn, qn, rn);
        degenerate = disc.abs() < DEGENERATE_DISCRIMINANT;

        let mut push = |z: f64| candidates.push(scale * z - shift);
        if qn.abs() < 1e-14 {
            // biquadratic: w² + pn w + rn = 0 with w = z²
            for w in quadratic_roots(pn, rn, true) {
                let root = w.max(0.0).sqrt();
                push(root);
                push(-root);
            }
        } else {
            // 8m³ + 8p m² + (2p² − 8r) m − q² = 0 has a positive root when q ≠ 0
            let m = solve_cubic_resolvent(pn, 0.25 * pn * pn - rn, -0.125 * qn * qn);
            let m = if m > 0.0 { m } else { f64::EPSILON };
            let s = (2.0 * m).sqrt();
            let k = qn / (2.0 * s);
            for z in quadratic_roots(s, 0.5 * pn + m - k, true) {
                push(z);
            }
            for z in quadratic_roots(-s, 0.5 * pn + m + k, true) {
                push(z);
            }
        }
    }

    if degenerate {
        candidates.extend(bracketed_roots(&poly));
        let crit = cubic_real_roots(0.75 * c3, 0.5 * c2, 0.25 * c1);
        candidates.extend(crit);
    }

    let mut roots: Vec<(f64, f64)> = candidates
        .into_iter()
        .filter(|x| x.is_finite())
        .map(|x| polish(&poly, x))
        .filter(|&x| poly.accepts(x))
        .map(|x| (x, poly.eval_compensated(x).abs()))
        .collect();
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(roots.len());
    for (x, res) in roots {
        match merged.last_mut() {
            Some(last) if (x - last.0).abs() <= MERGE_TOLERANCE * x.abs().max(1.0) => {
                if res < last.1 {
                    *last = (x, res);
                }
            }
            _ => merged.push((x, res)),
        }
    }
    Ok(RealRoots(merged.into_iter().map(|(x, _)| x).collect()))
}

/// Discriminant of `z⁴ + p z² + q z + r`.
fn discriminant(p: f64, q: f64, r: f64) -> f64 {
    let (p2, q2) = (p * p, q * q);
    256.0 * r * r * r - 128.0 * p2 * r * r + 144.0 * p * q2 * r - 27.0 * q2 * q2
        + 16.0 * p2 * p2 * r
        - 4.0 * p2 * p * q2
}

/// Real roots of `x² + b x + c`. With `keep_tangent`, a slightly negative
/// discriminant (rounding noise around a double root) yields the vertex.
fn quadratic_roots(b: f64, c: f64, keep_tangent: bool) -> Vec<f64> {
    let disc = b * b - 4.0 * c;
    let noise = 64.0 * f64::EPSILON * (b * b + 4.0 * c.abs());
    if disc < 0.0 {
        if keep_tangent && disc >= -noise.max(1e-10) {
            return vec![-0.5 * b];
        }
        return Vec::new();
    }
    let sq = disc.sqrt();
    if b == 0.0 {
        let h = 0.5 * sq;
        return if h == 0.0 { vec![0.0] } else { vec![h, -h] };
    }
    // numerically stable pairing: |t| >= |b|/2 > 0
    let t = -0.5 * (b + b.signum() * sq);
    vec![t, c / t]
}

/// One real root of the monic cubic `y³ + p y² + q y + r` (the largest one).
pub fn solve_cubic_resolvent(p: f64, q: f64, r: f64) -> f64 {
    cubic_real_roots(p, q, r)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// All real roots of `x³ + a x² + b x + c`, each Newton-polished.
fn cubic_real_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let shift = a / 3.0;
    let pp = b - a * shift;
    let qq = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let half_q = 0.5 * qq;
    let third_p = pp / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    let mut ts = Vec::with_capacity(3);
    if disc > 0.0 {
        let sign = if half_q >= 0.0 { -1.0 } else { 1.0 };
        let u = (sign * (half_q.abs() + disc.sqrt())).cbrt();
        ts.push(if u == 0.0 { 0.0 } else { u - third_p / u });
    } else if pp == 0.0 {
        ts.push(0.0);
    } else {
        let rad = (-third_p).sqrt();
        let arg = (-half_q / (rad * rad * rad)).clamp(-1.0, 1.0);
        let phi = arg.acos();
        for k in 0..3 {
            ts.push(2.0 * rad * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos());
        }
    }

    let f = |x: f64| ((x + a) * x + b) * x + c;
    let df = |x: f64| (3.0 * x + 2.0 * a) * x + b;
    ts.into_iter()
        .map(|t| {
            let mut x = t - shift;
            let mut best = (f(x).abs(), x);
            for _ in 0..8 {
                let d = df(x);
                if d == 0.0 {
                    break;
                }
                x -= f(x) / d;
                let fx = f(x).abs();
                if fx < best.0 {
                    best = (fx, x);
                } else {
                    break;
                }
            }
            best.1
        })
        .collect()
}

/// Newton from `x0`, keeping the best iterate. Falls back to bisection when a
/// sign change brackets the root near the best iterate.
fn polish(poly: &MonicQuartic, x0: f64) -> f64 {
    let mut x = x0;
    let mut best_x = x0;
    let mut best_res = poly.eval_compensated(x0).abs();
    for _ in 0..MAX_POLISH_ITERATIONS {
        let fx = poly.eval_compensated(x);
        let dfx = poly.derivative(x);
        if fx == 0.0 || dfx == 0.0 || !dfx.is_finite() {
            break;
        }
        let step = fx / dfx;
        x -= step;
        let res = poly.eval_compensated(x).abs();
        if res < best_res {
            best_res = res;
            best_x = x;
        }
        if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            break;
        }
    }
    if poly.accepts(best_x) {
        return best_x;
    }
    let w = 1e-6 * best_x.abs().max(1.0);
    bisect(poly, best_x - w, best_x + w).unwrap_or(best_x)
}

fn bisect(poly: &MonicQuartic, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut flo = poly.eval_compensated(lo);
    let fhi = poly.eval_compensated(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = poly.eval_compensated(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Sign-change bisection on a uniform grid over the Cauchy bound.
fn bracketed_roots(poly: &MonicQuartic) -> Vec<f64> {
    let bound = poly.root_bound();
    let h = 2.0 * bound / BRACKET_INTERVALS as f64;
    (0..BRACKET_INTERVALS)
        .filter_map(|i| {
            let lo = -bound + h * i as f64;
            bisect(poly, lo, lo + h)
        })
        .collect()
}
