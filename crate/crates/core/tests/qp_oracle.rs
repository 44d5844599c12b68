//! Active-set QP against exhaustive working-set enumeration, and CLF-CBF
//! problem properties.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use safeguard_core::control::qp::{self, QpStatus, QuadraticProgram};
use safeguard_core::control::{solve_clf_cbf_qp, AffineInControl, ClfCbfProblem};

fn enumerate(qp: &QuadraticProgram, h: &DMatrix<f64>, c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    let (n, m) = (c.len(), b.len());
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << m) {
        let rows: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        if rows.len() > n {
            continue;
        }
        let k = rows.len();
        let mut kkt = DMatrix::zeros(n + k, n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(h);
        let mut rhs = DVector::zeros(n + k);
        rhs.rows_mut(0, n).copy_from(&(-c));
        for (r, &i) in rows.iter().enumerate() {
            for j in 0..n {
                kkt[(n + r, j)] = a[(i, j)];
                kkt[(j, n + r)] = a[(i, j)];
            }
            rhs[n + r] = b[i];
        }
        let Some(sol) = kkt.clone().lu().solve(&rhs) else { continue };
        if (&kkt * &sol - &rhs).amax() > 1e-9 * (1.0 + rhs.amax()) {
            continue;
        }
        let z = sol.rows(0, n).into_owned();
        if (0..m).all(|i| (a.row(i) * &z)[0] >= b[i] - 1e-9 * (1.0 + b[i].abs())) {
            best = best.min(qp.objective(&z));
        }
    }
    best
}

#[test]
fn random_feasible_programs_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..500 {
        let n = rng.gen_range(1..=5);
        let m = rng.gen_range(1..=8);
        let l = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let h = &l * l.transpose() + DMatrix::identity(n, n) * rng.gen_range(0.1..1.0);
        let c = DVector::from_fn(n, |_, _| rng.gen_range(-5.0..5.0));
        let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
        let zf = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
        let b = DVector::from_fn(m, |i, _| (a.row(i) * &zf)[0] - rng.gen_range(0.0..1.0));
        let p = QuadraticProgram::new(h.clone(), c.clone(), a.clone(), b.clone());
        let sol = qp::solve(&p);
        assert_eq!(sol.status, QpStatus::Optimal, "case {case}");
        let best = enumerate(&p, &h, &c, &a, &b);
        let gap = (p.objective(&sol.z) - best).abs() / (1.0 + best.abs());
        assert!(gap < 1e-7, "case {case}: objective gap {gap:e}");
        assert!(sol.kkt_residual < 1e-8, "case {case}: KKT {:e}", sol.kkt_residual);
    }
}

fn clf_cbf(lambda: f64, clc: f64, gain: [f64; 2], cbc: Vec<(f64, [f64; 2])>) -> ClfCbfProblem {
    ClfCbfProblem {
        nominal: DVector::from_vec(vec![1.0, -0.5]),
        lambda,
        clc: AffineInControl {
            constant: clc,
            linear: DVector::from_row_slice(&gain),
        },
        cbc: cbc
            .into_iter()
            .map(|(c, l)| AffineInControl {
                constant: c,
                linear: DVector::from_row_slice(&l),
            })
            .collect(),
        bounds: None,
    }
}

proptest! {
    #[test]
    fn slack_does_not_grow_with_lambda(
        clc in 0.0..10.0f64,
        gain in prop::array::uniform2(-2.0..2.0f64),
        row in (-3.0..3.0f64, prop::array::uniform2(-2.0..2.0f64)),
        lambda in 0.1..100.0f64,
        factor in 1.0..50.0f64,
    ) {
        let lo = solve_clf_cbf_qp(&clf_cbf(lambda, clc, gain, vec![row]));
        let hi = solve_clf_cbf_qp(&clf_cbf(lambda * factor, clc, gain, vec![row]));
        prop_assume!(lo.status == QpStatus::Optimal && hi.status == QpStatus::Optimal);
        prop_assert!(hi.delta <= lo.delta + 1e-9 * (1.0 + lo.delta));
        prop_assert!(lo.delta >= 0.0 && hi.delta >= 0.0);
    }

    #[test]
    fn optimal_controls_satisfy_every_cbc(
        rows in prop::collection::vec((-3.0..3.0f64, prop::array::uniform2(-2.0..2.0f64)), 0..4),
        clc in -5.0..5.0f64,
        gain in prop::array::uniform2(-2.0..2.0f64),
    ) {
        let p = clf_cbf(100.0, clc, gain, rows);
        let s = solve_clf_cbf_qp(&p);
        if s.status == QpStatus::Optimal {
            for r in &p.cbc {
                prop_assert!(r.eval(&s.u) >= -1e-9 * (1.0 + r.constant.abs()));
            }
            prop_assert!(p.clc.eval(&s.u) <= s.delta + 1e-9 * (1.0 + clc.abs()));
        }
    }
}
