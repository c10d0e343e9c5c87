use std::time::Duration;

use super::gap::GapSpec;
use super::mip::solve_mip;
use crate::error::SolveError;
use crate::pq::{groups, PqModel};
use crate::restriction::{derive_fractional_flows, install_restriction, uninstall_restriction, RestoredSolution, RestrictionSpec};

/// Limits used by [`initial_primal_search`].
pub fn heuristic_gap_spec() -> GapSpec {
    GapSpec::default().with_rel_tol(1e-2).with_time_limit(Duration::from_secs(60))
}

fn check_side_constraints(pq: &PqModel) -> Result<(), SolveError> {
    let pooling: Vec<&String> = pq.group(groups::PATH_DEFINITION).iter().chain(pq.group(groups::PQ_CUT)).collect();
    for c in pq.model.constraints() {
        if c.active && !c.bilinear.is_empty() && !pooling.contains(&&c.name) {
            return Err(SolveError::NonLinearSideConstraints(c.name.clone()));
        }
    }
    Ok(())
}

/// Solves the restriction with `tau` copies per pool and returns the derived PQ solution, or
/// `None` when the MIP finds no feasible point.
pub fn restriction_search(pq: &PqModel, tau: usize, spec: &GapSpec) -> Result<Option<RestoredSolution>, SolveError> {
    check_side_constraints(pq)?;
    let mut rm = install_restriction(pq, &RestrictionSpec::uniform(tau))?;
    let result = solve_mip(&rm.pq().model, spec);
    let restored = match result {
        Ok(r) => match r.x {
            Some(x) => Some(derive_fractional_flows(&rm, &x)?),
            None => None,
        },
        Err(e) => {
            uninstall_restriction(&mut rm);
            return Err(e);
        }
    };
    uninstall_restriction(&mut rm);
    Ok(restored)
}

/// Runs the single-copy restriction under a 60 second limit and 1% gap.
pub fn initial_primal_search(pq: &PqModel) -> Result<Option<RestoredSolution>, SolveError> {
    restriction_search(pq, 1, &heuristic_gap_spec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{BilinearTerm, Constraint, LinearExpr, Sense};
    use crate::pq::build_pq;
    use std::sync::Arc;

    #[test]
    fn h1_heuristic_finds_optimum() {
        let pq = build_pq(Arc::new(fixtures::h1())).unwrap();
        let sol = initial_primal_search(&pq).unwrap().expect("feasible");
        assert!((sol.objective + 400.0).abs() < 1e-6);
        assert!(pq.model.is_feasible(&sol.values, 1e-6).unwrap().feasible);
    }

    #[test]
    fn side_constraints_are_refused() {
        let mut pq = build_pq(Arc::new(fixtures::h1())).unwrap();
        let (a, b) = (pq.q("i1", "l1").unwrap(), pq.y_pool("l1", "j1").unwrap());
        let row = Constraint::linear("extra", LinearExpr::new(), Sense::Le, 5.0).with_bilinear(BilinearTerm::new(1.0, a, b));
        pq.model.add_constraint(row).unwrap();
        assert_eq!(initial_primal_search(&pq).unwrap_err(), SolveError::NonLinearSideConstraints("extra".into()));
    }
}
