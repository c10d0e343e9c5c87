//! Bounded-variable primal simplex on a dense explicit basis inverse.
//!
//! Every row `a·x` gets a logical column `r` with `a·x - r = 0` and `r` bounded by the
//! row's range, so the solver only ever deals with bounded columns and equality rows.

use crate::error::SolveError;
use crate::model::{Model, Sense};

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free column resting at zero.
    Free,
}

/// Column and row statuses of a simplex basis. Rows follow the order of the model's active
/// constraints, so a basis survives appending rows or columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub columns: Vec<BasisStatus>,
    pub rows: Vec<BasisStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    /// Values of the model variables; meaningful for `Optimal` only.
    pub x: Vec<f64>,
    pub iterations: usize,
    pub basis: Basis,
}

/// A linear program in column form, extracted from a bilinear-free [`Model`].
#[derive(Debug, Clone)]
pub struct LpProblem {
    n: usize,
    m: usize,
    columns: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    constant: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LpProblem {
    /// Builds the LP from the active rows of `model`. Binary variables are relaxed to `[0, 1]`.
    pub fn from_model(model: &Model) -> Result<Self, SolveError> {
        if !model.objective.bilinear.is_empty() {
            return Err(SolveError::NotLinear("objective".into()));
        }
        let n = model.num_vars();
        let mut columns = vec![Vec::new(); n];
        let mut lower: Vec<f64> = model.variables().iter().map(|v| v.lower).collect();
        let mut upper: Vec<f64> = model.variables().iter().map(|v| v.upper).collect();
        let mut m = 0;
        for c in model.constraints().iter().filter(|c| c.active) {
            if !c.bilinear.is_empty() {
                return Err(SolveError::NotLinear(c.name.clone()));
            }
            for (var, coef) in c.linear.terms() {
                columns[var].push((m, coef));
            }
            let rhs = c.rhs - c.linear.constant;
            let (lo, hi) = match c.sense {
                Sense::Le => (f64::NEG_INFINITY, rhs),
                Sense::Ge => (rhs, f64::INFINITY),
                Sense::Eq => (rhs, rhs),
            };
            lower.push(lo);
            upper.push(hi);
            m += 1;
        }
        let mut cost = vec![0.0; n];
        for (var, coef) in model.objective.linear.terms() {
            cost[var] = coef;
        }
        Ok(LpProblem { n, m, columns, cost, constant: model.objective.linear.constant, lower, upper })
    }

    pub fn num_columns(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn set_column_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    pub fn column_bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn solve(&self, warm: Option<&Basis>) -> Result<LpResult, SolveError> {
        let mut simplex = Simplex::new(self);
        if let Some(basis) = warm {
            simplex.load_basis(basis);
        }
        simplex.run()
    }
}

/// Solves the LP of a bilinear-free model from the slack basis.
pub fn solve_lp(model: &Model) -> Result<LpResult, SolveError> {
    LpProblem::from_model(model)?.solve(None)
}

struct Simplex<'a> {
    p: &'a LpProblem,
    m: usize,
    x: Vec<f64>,
    status: Vec<BasisStatus>,
    head: Vec<usize>,
    /// Product-form inverse: `B^-1 = E_k ... E_1`.
    etas: Vec<Eta>,
    iterations: usize,
    since_refactor: usize,
    degenerate_run: usize,
}

struct Leaving {
    position: usize,
    theta: f64,
    to_upper: bool,
}

enum Step {
    Flip(f64),
    Pivot(Leaving),
    Unbounded,
}

impl<'a> Simplex<'a> {
    fn new(p: &'a LpProblem) -> Self {
        let total = p.n + p.m;
        let mut s = Simplex {
            p,
            m: p.m,
            x: vec![0.0; total],
            status: vec![BasisStatus::AtLower; total],
            head: (p.n..total).collect(),
            etas: Vec::new(),
            iterations: 0,
            since_refactor: 0,
            degenerate_run: 0,
        };
        for j in 0..p.n {
            s.status[j] = s.resting_status(j, BasisStatus::AtLower);
        }
        for j in p.n..total {
            s.status[j] = BasisStatus::Basic;
        }
        s
    }

    fn resting_status(&self, j: usize, preferred: BasisStatus) -> BasisStatus {
        let (lo, hi) = (self.p.lower[j], self.p.upper[j]);
        match preferred {
            BasisStatus::AtUpper if hi.is_finite() => BasisStatus::AtUpper,
            _ if lo.is_finite() => BasisStatus::AtLower,
            _ if hi.is_finite() => BasisStatus::AtUpper,
            _ => BasisStatus::Free,
        }
    }

    fn load_basis(&mut self, basis: &Basis) {
        let total = self.p.n + self.m;
        let mut status = Vec::with_capacity(total);
        for j in 0..self.p.n {
            status.push(basis.columns.get(j).copied().unwrap_or(BasisStatus::AtLower));
        }
        for i in 0..self.m {
            status.push(basis.rows.get(i).copied().unwrap_or(BasisStatus::Basic));
        }
        let head: Vec<usize> = (0..total).filter(|&j| status[j] == BasisStatus::Basic).collect();
        if head.len() != self.m {
            return;
        }
        for (j, st) in status.iter_mut().enumerate() {
            if *st != BasisStatus::Basic {
                *st = self.resting_status(j, *st);
            }
        }
        self.status = status;
        self.head = head;
    }

    fn column(&self, j: usize) -> ColumnIter<'_> {
        if j < self.p.n {
            ColumnIter::Structural(self.p.columns[j].iter())
        } else {
            ColumnIter::Logical(Some(j - self.p.n))
        }
    }

    fn place_nonbasic(&mut self) {
        for j in 0..self.p.n + self.m {
            self.x[j] = match self.status[j] {
                BasisStatus::AtLower => self.p.lower[j],
                BasisStatus::AtUpper => self.p.upper[j],
                BasisStatus::Free => 0.0,
                BasisStatus::Basic => continue,
            };
        }
    }

    /// Recomputes the basis inverse and basic values. Dependent basic columns are swapped
    /// for logicals of uncovered rows.
    fn refactor(&mut self) -> Result<(), SolveError> {
        for _ in 0..3 {
            if self.invert() {
                self.since_refactor = 0;
                self.place_nonbasic();
                self.compute_basic_values();
                return Ok(());
            }
        }
        Err(SolveError::NumericalFailure("basis repair failed".into()))
    }

    /// Product-form inversion: logicals first, then structurals by ascending length, each
    /// pivoting on its largest entry among the rows not yet covered. Basic positions are
    /// renumbered so that position `r` holds the column pivoted on row `r`.
    fn invert(&mut self) -> bool {
        let m = self.m;
        let n = self.p.n;
        let mut etas = Vec::with_capacity(m);
        let mut new_head = vec![usize::MAX; m];
        let mut structurals = Vec::new();
        for &j in &self.head {
            if j >= n {
                let r = j - n;
                etas.push(Eta { row: r, pivot: -1.0, entries: Vec::new() });
                new_head[r] = j;
            } else {
                structurals.push(j);
            }
        }
        structurals.sort_by_key(|&j| (self.p.columns[j].len(), j));
        let mut singular = Vec::new();
        let mut work = vec![0.0; m];
        for &j in &structurals {
            for (row, v) in self.column(j) {
                work[row] += v;
            }
            apply_etas(&etas, &mut work);
            let mut best = usize::MAX;
            let mut best_val = SINGULAR_TOL;
            for (r, &v) in work.iter().enumerate() {
                if new_head[r] == usize::MAX && v.abs() > best_val {
                    best_val = v.abs();
                    best = r;
                }
            }
            if best == usize::MAX {
                singular.push(j);
                work.iter_mut().for_each(|v| *v = 0.0);
                continue;
            }
            etas.push(Eta::from_column(best, &mut work));
            new_head[best] = j;
        }
        if !singular.is_empty() {
            let mut free_rows = (0..m).filter(|&r| new_head[r] == usize::MAX);
            for out in singular {
                let r = free_rows.next().expect("one uncovered row per dependent column");
                self.status[out] = self.resting_status(out, BasisStatus::AtLower);
                self.status[n + r] = BasisStatus::Basic;
                let pos = self.head.iter().position(|&h| h == out).expect("basic column");
                self.head[pos] = n + r;
            }
            return false;
        }
        self.head = new_head;
        self.etas = etas;
        true
    }

    fn compute_basic_values(&mut self) {
        let m = self.m;
        // B x_B = -N x_N
        let mut rhs = vec![0.0; m];
        for j in 0..self.p.n + m {
            if self.status[j] == BasisStatus::Basic || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            for (row, v) in self.column(j) {
                rhs[row] -= v * xj;
            }
        }
        apply_etas(&self.etas, &mut rhs);
        for (pos, &j) in self.head.iter().enumerate() {
            self.x[j] = rhs[pos];
        }
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (row, v) in self.column(j) {
            out[row] += v;
        }
        apply_etas(&self.etas, &mut out);
        out
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let x = self.x[j];
        if x < self.p.lower[j] - PRIMAL_TOL {
            self.p.lower[j] - x
        } else if x > self.p.upper[j] + PRIMAL_TOL {
            x - self.p.upper[j]
        } else {
            0.0
        }
    }

    /// Basic costs for the current phase; `None` means the basis is primal feasible.
    fn phase_one_costs(&self) -> Option<Vec<f64>> {
        let mut any = false;
        let costs = self
            .head
            .iter()
            .map(|&j| {
                if self.x[j] < self.p.lower[j] - PRIMAL_TOL {
                    any = true;
                    -1.0
                } else if self.x[j] > self.p.upper[j] + PRIMAL_TOL {
                    any = true;
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        any.then_some(costs)
    }

    fn duals(&self, cb: &[f64]) -> Vec<f64> {
        let mut y = cb.to_vec();
        for eta in self.etas.iter().rev() {
            let mut v = y[eta.row];
            for &(i, a) in &eta.entries {
                v -= a * y[i];
            }
            y[eta.row] = v / eta.pivot;
        }
        y
    }

    fn reduced_cost(&self, j: usize, pi: &[f64], phase_one: bool) -> f64 {
        let c = if phase_one || j >= self.p.n { 0.0 } else { self.p.cost[j] };
        c - self.column(j).map(|(row, v)| pi[row] * v).sum::<f64>()
    }

    /// Entering column and direction (+1 increase, -1 decrease).
    fn price(&self, pi: &[f64], phase_one: bool, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.p.n + self.m {
            let st = self.status[j];
            if st == BasisStatus::Basic || self.p.lower[j] == self.p.upper[j] {
                continue;
            }
            let d = self.reduced_cost(j, pi, phase_one);
            let dir = match st {
                BasisStatus::AtLower if d < -DUAL_TOL => 1.0,
                BasisStatus::AtUpper if d > DUAL_TOL => -1.0,
                BasisStatus::Free if d.abs() > DUAL_TOL => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn ratio_test(&self, entering: usize, dir: f64, alpha: &[f64], bland: bool) -> Step {
        let flip = self.p.upper[entering] - self.p.lower[entering];
        // (position, relaxed ratio, exact ratio, blocks at upper)
        let mut candidates = Vec::new();
        for (pos, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let j = self.head[pos];
            let rate = -dir * a;
            let (x, lo, hi) = (self.x[j], self.p.lower[j], self.p.upper[j]);
            let block = if rate < 0.0 {
                if x > hi + PRIMAL_TOL {
                    Some(((x - hi) / -rate, (x - hi) / -rate, true))
                } else if lo.is_finite() && x >= lo - PRIMAL_TOL {
                    Some(((x - lo + PRIMAL_TOL) / -rate, (x - lo) / -rate, false))
                } else {
                    None
                }
            } else if x < lo - PRIMAL_TOL {
                Some(((lo - x) / rate, (lo - x) / rate, false))
            } else if hi.is_finite() && x <= hi + PRIMAL_TOL {
                Some(((hi - x + PRIMAL_TOL) / rate, (hi - x) / rate, true))
            } else {
                None
            };
            if let Some((relaxed, exact, to_upper)) = block {
                candidates.push((pos, relaxed, exact.max(0.0), to_upper));
            }
        }
        if candidates.is_empty() {
            return if flip.is_finite() { Step::Flip(flip) } else { Step::Unbounded };
        }
        let chosen = if bland {
            let min = candidates.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
            candidates
                .iter()
                .filter(|c| c.2 <= min + 1e-12)
                .min_by_key(|c| self.head[c.0])
                .copied()
                .expect("nonempty")
        } else {
            let bound = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
            candidates
                .iter()
                .filter(|c| c.2 <= bound)
                .max_by(|a, b| alpha[a.0].abs().total_cmp(&alpha[b.0].abs()))
                .copied()
                .expect("the minimum relaxed ratio bounds its own exact ratio")
        };
        if flip <= chosen.2 {
            return Step::Flip(flip);
        }
        Step::Pivot(Leaving { position: chosen.0, theta: chosen.2, to_upper: chosen.3 })
    }

    fn pivot(&mut self, entering: usize, dir: f64, alpha: &[f64], leave: Leaving) {
        let theta = leave.theta;
        for (pos, &a) in alpha.iter().enumerate() {
            let j = self.head[pos];
            self.x[j] -= dir * theta * a;
        }
        self.x[entering] += dir * theta;
        let r = leave.position;
        let out = self.head[r];
        if leave.to_upper {
            self.x[out] = self.p.upper[out];
            self.status[out] = BasisStatus::AtUpper;
        } else {
            self.x[out] = self.p.lower[out];
            self.status[out] = BasisStatus::AtLower;
        }
        if self.p.lower[out] == self.p.upper[out] {
            self.status[out] = BasisStatus::AtLower;
        }
        self.head[r] = entering;
        self.status[entering] = BasisStatus::Basic;

        let mut column = alpha.to_vec();
        self.etas.push(Eta::from_column(r, &mut column));
    }

    fn run(&mut self) -> Result<LpResult, SolveError> {
        let total = self.p.n + self.m;
        let limit = 50_000 + 50 * total;
        let bland_after = 5 * total;
        self.refactor()?;
        loop {
            if self.iterations >= limit {
                return Err(SolveError::NumericalFailure(format!("iteration limit {limit} reached")));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let phase_costs = self.phase_one_costs();
            let phase_one = phase_costs.is_some();
            let cb: Vec<f64> = match phase_costs {
                Some(c) => c,
                None => self.head.iter().map(|&j| if j < self.p.n { self.p.cost[j] } else { 0.0 }).collect(),
            };
            let pi = self.duals(&cb);
            let bland = self.degenerate_run >= bland_after;
            let Some((entering, dir)) = self.price(&pi, phase_one, bland) else {
                if self.since_refactor > 0 {
                    self.refactor()?;
                    continue;
                }
                let status = if phase_one { LpStatus::Infeasible } else { LpStatus::Optimal };
                return Ok(self.finish(status));
            };
            let alpha = self.ftran(entering);
            self.iterations += 1;
            self.since_refactor += 1;
            match self.ratio_test(entering, dir, &alpha, bland) {
                Step::Unbounded => {
                    if self.since_refactor > 1 {
                        self.refactor()?;
                        continue;
                    }
                    if phase_one {
                        return Err(SolveError::NumericalFailure("phase one ray".into()));
                    }
                    return Ok(self.finish(LpStatus::Unbounded));
                }
                Step::Flip(delta) => {
                    for (pos, &a) in alpha.iter().enumerate() {
                        let j = self.head[pos];
                        self.x[j] -= dir * delta * a;
                    }
                    if self.status[entering] == BasisStatus::AtLower {
                        self.status[entering] = BasisStatus::AtUpper;
                        self.x[entering] = self.p.upper[entering];
                    } else {
                        self.status[entering] = BasisStatus::AtLower;
                        self.x[entering] = self.p.lower[entering];
                    }
                    self.degenerate_run = 0;
                }
                Step::Pivot(leave) => {
                    if leave.theta <= 1e-12 {
                        self.degenerate_run += 1;
                    } else {
                        self.degenerate_run = 0;
                    }
                    self.pivot(entering, dir, &alpha, leave);
                }
            }
        }
    }

    fn finish(&self, status: LpStatus) -> LpResult {
        let n = self.p.n;
        let mut x: Vec<f64> = self.x[..n].to_vec();
        if status == LpStatus::Optimal {
            // clean values that drifted past a bound within tolerance
            for (j, v) in x.iter_mut().enumerate() {
                *v = v.max(self.p.lower[j]).min(self.p.upper[j]);
            }
        }
        debug_assert!(status != LpStatus::Optimal || (0..n + self.m).all(|j| self.infeasibility(j) <= 1e-6));
        let objective = match status {
            LpStatus::Optimal => x.iter().zip(&self.p.cost).map(|(a, b)| a * b).sum::<f64>() + self.p.constant,
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
        };
        LpResult {
            status,
            objective,
            x,
            iterations: self.iterations,
            basis: Basis { columns: self.status[..n].to_vec(), rows: self.status[n..].to_vec() },
        }
    }
}

/// Elementary column transformation pivoting on `row`.
struct Eta {
    row: usize,
    pivot: f64,
    /// Off-pivot entries of the transformed column.
    entries: Vec<(usize, f64)>,
}

impl Eta {
    /// Builds the eta of a transformed column and clears `work`.
    fn from_column(row: usize, work: &mut [f64]) -> Eta {
        let pivot = work[row];
        let mut entries = Vec::new();
        for (i, v) in work.iter_mut().enumerate() {
            if i != row && v.abs() > 1e-14 {
                entries.push((i, *v));
            }
            *v = 0.0;
        }
        Eta { row, pivot, entries }
    }
}

fn apply_etas(etas: &[Eta], v: &mut [f64]) {
    for eta in etas {
        let vr = v[eta.row];
        if vr == 0.0 {
            continue;
        }
        let vr = vr / eta.pivot;
        for &(i, a) in &eta.entries {
            v[i] -= a * vr;
        }
        v[eta.row] = vr;
    }
}

enum ColumnIter<'a> {
    Structural(std::slice::Iter<'a, (usize, f64)>),
    Logical(Option<usize>),
}

impl Iterator for ColumnIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColumnIter::Structural(it) => it.next().copied(),
            ColumnIter::Logical(row) => row.take().map(|r| (r, -1.0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Constraint, LinearExpr};

    fn lp(vars: &[(f64, f64)], rows: &[(&[f64], Sense, f64)], cost: &[f64]) -> Model {
        let mut m = Model::new();
        let ids: Vec<_> = vars.iter().enumerate().map(|(i, &(lo, hi))| m.continuous(format!("x{i}"), lo, hi).unwrap()).collect();
        for (r, (coefs, sense, rhs)) in rows.iter().enumerate() {
            let expr = LinearExpr::from_terms(ids.iter().zip(coefs.iter()).map(|(&v, &c)| (v, c)));
            m.add_constraint(Constraint::linear(format!("r{r}"), expr, *sense, *rhs)).unwrap();
        }
        m.objective.linear = LinearExpr::from_terms(ids.iter().zip(cost).map(|(&v, &c)| (v, c)));
        m
    }

    #[test]
    fn single_bounded_variable() {
        let m = lp(&[(0.0, 1.0)], &[], &[-1.0]);
        let r = solve_lp(&m).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert_eq!(r.x, vec![1.0]);
        assert_eq!(r.objective, -1.0);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let inf = f64::INFINITY;
        let m = lp(&[(-inf, inf)], &[(&[1.0], Sense::Le, 0.0), (&[1.0], Sense::Ge, 1.0)], &[0.0]);
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let inf = f64::INFINITY;
        let m = lp(&[(0.0, inf), (0.0, inf)], &[(&[1.0, -1.0], Sense::Le, 1.0)], &[-1.0, -1.0]);
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn textbook_two_variable_lp() {
        let inf = f64::INFINITY;
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
        let m = lp(
            &[(0.0, inf), (0.0, inf)],
            &[(&[1.0, 0.0], Sense::Le, 4.0), (&[0.0, 2.0], Sense::Le, 12.0), (&[3.0, 2.0], Sense::Le, 18.0)],
            &[-3.0, -5.0],
        );
        let r = solve_lp(&m).unwrap();
        assert!((r.objective + 36.0).abs() < 1e-9);
        assert!((r.x[0] - 2.0).abs() < 1e-9 && (r.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_rows_and_free_columns() {
        let inf = f64::INFINITY;
        // min x + y, x - y = 2, x + y >= 4, y free
        let m = lp(&[(0.0, inf), (-inf, inf)], &[(&[1.0, -1.0], Sense::Eq, 2.0), (&[1.0, 1.0], Sense::Ge, 4.0)], &[1.0, 1.0]);
        let r = solve_lp(&m).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 4.0).abs() < 1e-9);
        assert!((r.x[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn warm_start_reuses_basis() {
        let inf = f64::INFINITY;
        let m = lp(
            &[(0.0, inf), (0.0, inf)],
            &[(&[1.0, 0.0], Sense::Le, 4.0), (&[0.0, 2.0], Sense::Le, 12.0), (&[3.0, 2.0], Sense::Le, 18.0)],
            &[-3.0, -5.0],
        );
        let p = LpProblem::from_model(&m).unwrap();
        let cold = p.solve(None).unwrap();
        let warm = p.solve(Some(&cold.basis)).unwrap();
        assert_eq!(warm.iterations, 0);
        assert!((warm.objective - cold.objective).abs() < 1e-12);
    }

    #[test]
    fn bilinear_rows_are_rejected() {
        let mut m = lp(&[(0.0, 1.0), (0.0, 1.0)], &[], &[0.0, 0.0]);
        let c = Constraint::linear("b", LinearExpr::new(), Sense::Le, 1.0).with_bilinear(crate::model::BilinearTerm::new(1.0, 0, 1));
        m.add_constraint(c).unwrap();
        assert_eq!(solve_lp(&m).unwrap_err(), SolveError::NotLinear("b".into()));
    }
}
