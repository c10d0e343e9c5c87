mod common;

use std::sync::Arc;

use common::{grid_oracle, plain_root_bound, tiny_specs, generated_pq};
use poolnet::relaxation::envelope_planes;
use poolnet::solve::{LpProblem, LpStatus};
use poolnet::{build_pq, fixtures, refresh_bounds, relax_pq, Sense};
use proptest::prelude::*;

fn plane_holds(plane: (f64, f64, f64, Sense, f64), w: f64, x: f64, y: f64, tol: f64) -> bool {
    let (cw, cx, cy, sense, rhs) = plane;
    let lhs = cw * w + cx * x + cy * y;
    match sense {
        Sense::Le => lhs <= rhs + tol,
        Sense::Ge => lhs >= rhs - tol,
        Sense::Eq => (lhs - rhs).abs() <= tol,
    }
}

fn envelope_range(b: (f64, f64, f64, f64), x: f64, y: f64) -> (f64, f64) {
    let (xl, xu, yl, yu) = b;
    let lo = (xl * y + yl * x - xl * yl).max(xu * y + yu * x - xu * yu);
    let hi = (xu * y + yl * x - xu * yl).min(xl * y + yu * x - xl * yu);
    (lo, hi)
}

fn boxes() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (-10.0f64..10.0, 0.0f64..10.0, -10.0f64..10.0, 0.0f64..10.0).prop_map(|(xl, dx, yl, dy)| (xl, xl + dx, yl, yl + dy))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn product_lies_inside_envelope(b in boxes(), sx in 0.0f64..=1.0, sy in 0.0f64..=1.0) {
        let (xl, xu, yl, yu) = b;
        let x = xl + sx * (xu - xl);
        let y = yl + sy * (yu - yl);
        let tol = 1e-9 * (1.0 + (x * y).abs() + xl.abs().max(xu.abs()) * yl.abs().max(yu.abs()));
        for plane in envelope_planes(xl, xu, yl, yu) {
            prop_assert!(plane_holds(plane, x * y, x, y, tol));
        }
    }

    #[test]
    fn envelope_is_exact_at_corners(b in boxes(), cx in any::<bool>(), cy in any::<bool>()) {
        let (xl, xu, yl, yu) = b;
        let x = if cx { xu } else { xl };
        let y = if cy { yu } else { yl };
        let (lo, hi) = envelope_range(b, x, y);
        let tol = 1e-9 * (1.0 + (x * y).abs());
        prop_assert!((lo - x * y).abs() <= tol && (hi - x * y).abs() <= tol);
    }

    #[test]
    fn envelope_width_vanishes_when_a_factor_is_fixed(xl in -5.0f64..5.0, yl in -5.0f64..5.0, dy in 0.0f64..5.0, sy in 0.0f64..=1.0) {
        let b = (xl, xl, yl, yl + dy);
        let y = yl + sy * dy;
        let (lo, hi) = envelope_range(b, xl, y);
        prop_assert!((hi - lo).abs() <= 1e-9 * (1.0 + (xl * y).abs()));
    }
}

#[test]
fn lifted_oracle_points_are_relaxation_feasible() {
    let mut pqs = vec![build_pq(Arc::new(fixtures::h1())).unwrap()];
    pqs.extend(tiny_specs(3).iter().map(|s| generated_pq(s).1));
    for pq in &pqs {
        let rm = relax_pq(pq).unwrap();
        let oracle = grid_oracle(pq).unwrap();
        for point in oracle.grid_points.iter().step_by(7) {
            let report = rm.lp.is_feasible(&rm.lift(point), 1e-7).unwrap();
            assert!(report.feasible, "{:?} {}", report.worst, report.worst_residual);
        }
        let root = plain_root_bound(pq);
        assert!(root <= oracle.objective + 1e-6 * (1.0 + oracle.objective.abs()), "{root} > {}", oracle.objective);
    }
}

#[test]
fn tightening_a_box_never_weakens_the_bound() {
    let pq = build_pq(Arc::new(fixtures::h1())).unwrap();
    let root = plain_root_bound(&pq);
    for (&_, &q) in pq.q_vars() {
        for (lo, hi) in [(0.0, 0.5), (0.5, 1.0), (0.2, 0.3)] {
            let mut rm = relax_pq(&pq).unwrap();
            refresh_bounds(&mut rm, &[(q, lo, hi)]).unwrap();
            let res = LpProblem::from_model(&rm.lp).unwrap().solve(None).unwrap();
            if res.status == LpStatus::Optimal {
                assert!(res.objective >= root - 1e-7, "{} < {root}", res.objective);
            }
        }
    }
    assert!(refresh_bounds(&mut relax_pq(&pq).unwrap(), &[(pq.q("i1", "l1").unwrap(), -1.0, 1.0)]).is_err());
}
