use poolnet::solve::{solve_mip, GapSpec, LpProblem, LpStatus, MipStatus};
use poolnet::{Constraint, LinearExpr, Model, Sense};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct SmallLp {
    bounds: Vec<(f64, f64)>,
    rows: Vec<(Vec<f64>, Sense, f64)>,
    cost: Vec<f64>,
}

impl SmallLp {
    fn model(&self) -> Model {
        let mut m = Model::new();
        let ids: Vec<_> =
            self.bounds.iter().enumerate().map(|(j, &(lo, hi))| m.continuous(format!("x{j}"), lo, hi).unwrap()).collect();
        for (k, (coefs, sense, rhs)) in self.rows.iter().enumerate() {
            let e = LinearExpr::from_terms(ids.iter().zip(coefs).map(|(&v, &c)| (v, c)));
            m.add_constraint(Constraint::linear(format!("r{k}"), e, *sense, *rhs)).unwrap();
        }
        m.objective.linear = LinearExpr::from_terms(ids.iter().zip(&self.cost).map(|(&v, &c)| (v, c)));
        m
    }

    fn feasible(&self, x: &[f64]) -> bool {
        let tol = 1e-7;
        self.bounds.iter().zip(x).all(|(&(lo, hi), &v)| v >= lo - tol && v <= hi + tol)
            && self.rows.iter().all(|(a, sense, rhs)| {
                let lhs: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum();
                match sense {
                    Sense::Le => lhs <= rhs + tol,
                    Sense::Ge => lhs >= rhs - tol,
                    Sense::Eq => (lhs - rhs).abs() <= tol,
                }
            })
    }
}

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

/// Minimum over all vertices of the bounded polytope, `None` when it is empty.
fn vertex_oracle(lp: &SmallLp) -> Option<f64> {
    let n = lp.bounds.len();
    let mut planes: Vec<(Vec<f64>, f64)> = lp.rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lo));
        planes.push((e, hi));
    }
    let mut best: Option<f64> = None;
    for subset in combinations(planes.len(), n) {
        let a = subset.iter().map(|&i| planes[i].0.clone()).collect();
        let b = subset.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if lp.feasible(&x) {
                let obj: f64 = x.iter().zip(&lp.cost).map(|(x, c)| x * c).sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    }
    best
}

fn small_lp() -> impl Strategy<Value = SmallLp> {
    (1usize..=4, 1usize..=3).prop_flat_map(|(n, m)| {
        let bounds = prop::collection::vec((-4i32..=0, 1i32..=5), n)
            .prop_map(|v| v.into_iter().map(|(lo, w)| (lo as f64, (lo + w) as f64)).collect::<Vec<_>>());
        let sense = prop_oneof![Just(Sense::Le), Just(Sense::Ge), Just(Sense::Eq)];
        let row = (prop::collection::vec(-3i32..=3, n), sense, -6i32..=6)
            .prop_map(|(a, s, b)| (a.into_iter().map(f64::from).collect::<Vec<_>>(), s, b as f64));
        let rows = prop::collection::vec(row, m);
        let cost = prop::collection::vec(-5i32..=5, n).prop_map(|c| c.into_iter().map(f64::from).collect::<Vec<_>>());
        (bounds, rows, cost).prop_map(|(bounds, rows, cost)| SmallLp { bounds, rows, cost })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_matches_vertex_enumeration(lp in small_lp()) {
        let res = LpProblem::from_model(&lp.model()).unwrap().solve(None).unwrap();
        match vertex_oracle(&lp) {
            None => prop_assert_eq!(res.status, LpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(res.status, LpStatus::Optimal);
                prop_assert!((res.objective - best).abs() <= 1e-7 * (1.0 + best.abs()), "{} vs {}", res.objective, best);
                prop_assert!(lp.feasible(&res.x));
            }
        }
    }

    #[test]
    fn warm_start_after_bound_change_agrees_with_cold(lp in small_lp(), j in 0usize..4, cut in 0.0f64..1.0) {
        let mut problem = LpProblem::from_model(&lp.model()).unwrap();
        let first = problem.solve(None).unwrap();
        let j = j % problem.num_columns();
        let (lo, hi) = problem.column_bounds(j);
        problem.set_column_bounds(j, lo, lo + cut * (hi - lo));
        let warm = problem.solve(Some(&first.basis)).unwrap();
        let cold = problem.solve(None).unwrap();
        prop_assert_eq!(warm.status, cold.status);
        if cold.status == LpStatus::Optimal {
            prop_assert!((warm.objective - cold.objective).abs() <= 1e-7 * (1.0 + cold.objective.abs()));
        }
    }

    #[test]
    fn branch_and_bound_matches_enumeration(
        coefs in prop::collection::vec(prop::collection::vec(-4i32..=4, 5), 2),
        rhs in prop::collection::vec(-2i32..=8, 2),
        cost in prop::collection::vec(-6i32..=6, 5),
    ) {
        // three binaries and two continuous variables in [0, 2]
        let build = |fix: Option<[f64; 3]>| {
            let mut m = Model::new();
            let mut ids = Vec::new();
            for b in 0..3 {
                match fix {
                    Some(v) => ids.push(m.continuous(format!("b{b}"), v[b], v[b]).unwrap()),
                    None => ids.push(m.binary(format!("b{b}"))),
                }
            }
            for c in 0..2 {
                ids.push(m.continuous(format!("c{c}"), 0.0, 2.0).unwrap());
            }
            for (k, (row, r)) in coefs.iter().zip(&rhs).enumerate() {
                let e = LinearExpr::from_terms(ids.iter().zip(row).map(|(&v, &a)| (v, f64::from(a))));
                m.add_constraint(Constraint::linear(format!("r{k}"), e, Sense::Le, f64::from(*r))).unwrap();
            }
            m.objective.linear = LinearExpr::from_terms(ids.iter().zip(&cost).map(|(&v, &c)| (v, f64::from(c))));
            m
        };
        let mut best: Option<f64> = None;
        for mask in 0..8u32 {
            let fix = [0, 1, 2].map(|b| f64::from((mask >> b) & 1));
            let r = LpProblem::from_model(&build(Some(fix))).unwrap().solve(None).unwrap();
            if r.status == LpStatus::Optimal {
                best = Some(best.map_or(r.objective, |b: f64| b.min(r.objective)));
            }
        }
        let res = solve_mip(&build(None), &GapSpec::default().with_rel_tol(0.0).with_abs_tol(1e-9)).unwrap();
        match best {
            None => prop_assert_eq!(res.status, MipStatus::Infeasible),
            Some(b) => {
                prop_assert_eq!(res.status, MipStatus::Optimal);
                prop_assert!((res.objective - b).abs() <= 1e-7 * (1.0 + b.abs()), "{} vs {}", res.objective, b);
                let x = res.x.unwrap();
                prop_assert!(x[..3].iter().all(|&v| v == 0.0 || v == 1.0));
            }
        }
    }
}
