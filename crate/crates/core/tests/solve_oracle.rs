mod common;

use common::{generated_pq, grid_oracle, tiny_specs};
use poolnet::model::FEAS_TOL;
use poolnet::solve::{branch_and_cut, heuristic_gap_spec, restriction_search, BranchAndCutOptions, GapSpec, SolveStatus};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-4 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn branch_and_cut_matches_grid_oracle() {
    let spec = GapSpec::default().with_rel_tol(1e-6).with_abs_tol(1e-8);
    for gen in tiny_specs(6) {
        let (_, pq) = generated_pq(&gen);
        let oracle = grid_oracle(&pq).unwrap();
        for opts in [BranchAndCutOptions::default(), BranchAndCutOptions::default().with_cuts(true).with_heuristic(true)] {
            let report = branch_and_cut(&pq, &spec, &opts).unwrap();
            if !oracle.objective.is_finite() {
                assert_eq!(report.status, SolveStatus::Infeasible, "{}", gen.name());
                continue;
            }
            assert_eq!(report.status, SolveStatus::Optimal, "{}", gen.name());
            let inc = report.incumbent.as_ref().unwrap();
            assert!(pq.model.is_feasible(&inc.values, FEAS_TOL).unwrap().feasible);
            assert!(close(report.upper, oracle.objective), "{}: {} vs {}", gen.name(), report.upper, oracle.objective);
            assert!(report.lower <= oracle.objective + 1e-6 * (1.0 + oracle.objective.abs()));
        }
    }
}

#[test]
fn heuristic_solutions_are_feasible_upper_bounds() {
    for gen in tiny_specs(6) {
        let (_, pq) = generated_pq(&gen);
        let oracle = grid_oracle(&pq).unwrap();
        for tau in [1, 2] {
            if let Some(sol) = restriction_search(&pq, tau, &heuristic_gap_spec()).unwrap() {
                assert!(pq.model.is_feasible(&sol.values, FEAS_TOL).unwrap().feasible, "{}", gen.name());
                assert!((pq.model.objective_value(&sol.values).unwrap() - sol.objective).abs() <= 1e-6 * (1.0 + sol.objective.abs()));
                assert!(sol.objective >= oracle.objective - 1e-6 * (1.0 + oracle.objective.abs()), "{}", gen.name());
            }
        }
    }
}
