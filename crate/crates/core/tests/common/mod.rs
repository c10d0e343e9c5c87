#![allow(dead_code)]

use std::sync::Arc;

use poolnet::bench::{generate_instance, Family, GenSpec};
use poolnet::cuts::{add_all_pooling_inequalities, CutBlock, DEFAULT_EPSILON};
use poolnet::solve::{cut_loop, LpProblem, LpStatus};
use poolnet::{build_pq, relax, relax_pq, Network, PqModel, VarId};

pub const GRID_STEP: f64 = 0.02;
pub const MAX_GRID_POINTS: usize = 3000;

/// All points of the simplex in `dim` dimensions with coordinates on multiples of `1/parts`.
pub fn simplex_grid(dim: usize, parts: usize) -> Vec<Vec<f64>> {
    fn rec(dim: usize, left: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if prefix.len() + 1 == dim {
            prefix.push(left);
            out.push(prefix.iter().map(|&c| c as f64 / parts as f64).collect());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(dim, left - c, parts, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, parts, parts, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Per-pool fraction variables in pool order.
pub fn pool_fraction_vars(pq: &PqModel) -> Vec<Vec<VarId>> {
    let net = pq.network().clone();
    net.pools().into_iter().map(|l| net.pool_inputs(l).into_iter().map(|i| pq.q(i, l).unwrap()).collect()).collect()
}

pub fn grid_size(pq: &PqModel) -> usize {
    let parts = (1.0 / GRID_STEP).round() as usize;
    pool_fraction_vars(pq).iter().map(|ids| binomial(parts + ids.len() - 1, ids.len() - 1)).fold(1usize, usize::saturating_mul)
}

/// Optimal value and point of the LP left after fixing every `q`, or `None` when infeasible.
pub fn fixed_q_lp(pq: &PqModel, fractions: &[(VarId, f64)]) -> Option<(f64, Vec<f64>)> {
    let mut m = pq.model.clone();
    for &(q, v) in fractions {
        m.set_bounds(q, v, v).unwrap();
    }
    let rm = relax(&m).unwrap();
    let res = LpProblem::from_model(&rm.lp).unwrap().solve(None).unwrap();
    (res.status == LpStatus::Optimal).then(|| (res.objective, res.x[..pq.model.num_vars()].to_vec()))
}

pub struct OracleResult {
    pub objective: f64,
    pub point: Vec<f64>,
    /// Optimal points of every feasible grid LP.
    pub grid_points: Vec<Vec<f64>>,
}

fn assignment(groups: &[Vec<VarId>], choice: &[Vec<f64>]) -> Vec<(VarId, f64)> {
    groups.iter().zip(choice).flat_map(|(ids, vals)| ids.iter().copied().zip(vals.iter().copied())).collect()
}

/// Grid-over-q oracle refined by a coordinate pattern search on the simplex.
/// Returns `None` when the grid exceeds [`MAX_GRID_POINTS`].
pub fn grid_oracle(pq: &PqModel) -> Option<OracleResult> {
    if grid_size(pq) > MAX_GRID_POINTS {
        return None;
    }
    let parts = (1.0 / GRID_STEP).round() as usize;
    let groups = pool_fraction_vars(pq);
    let grids: Vec<Vec<Vec<f64>>> = groups.iter().map(|ids| simplex_grid(ids.len(), parts)).collect();
    let mut idx = vec![0usize; groups.len()];
    let mut best: Option<(f64, Vec<Vec<f64>>, Vec<f64>)> = None;
    let mut grid_points = Vec::new();
    loop {
        let choice: Vec<Vec<f64>> = idx.iter().zip(&grids).map(|(&k, g)| g[k].clone()).collect();
        if let Some((obj, x)) = fixed_q_lp(pq, &assignment(&groups, &choice)) {
            grid_points.push(x.clone());
            if best.as_ref().is_none_or(|b| obj < b.0) {
                best = Some((obj, choice, x));
            }
        }
        let mut p = 0;
        loop {
            if p == idx.len() {
                let (objective, choice, point) = match best {
                    Some(b) => refine(pq, &groups, b),
                    None => (f64::INFINITY, Vec::new(), Vec::new()),
                };
                let _ = choice;
                return Some(OracleResult { objective, point, grid_points });
            }
            idx[p] += 1;
            if idx[p] < grids[p].len() {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

/// Moves mass between pairs of fractions of one pool while the fixed-q LP improves.
fn refine(
    pq: &PqModel,
    groups: &[Vec<VarId>],
    start: (f64, Vec<Vec<f64>>, Vec<f64>),
) -> (f64, Vec<Vec<f64>>, Vec<f64>) {
    let (mut obj, mut choice, mut point) = start;
    let mut step = GRID_STEP;
    while step > 1e-7 {
        let mut improved = false;
        for g in 0..groups.len() {
            for a in 0..groups[g].len() {
                for b in 0..groups[g].len() {
                    if a == b || choice[g][b] < step {
                        continue;
                    }
                    let mut trial = choice.clone();
                    trial[g][a] += step;
                    trial[g][b] -= step;
                    if let Some((o, x)) = fixed_q_lp(pq, &assignment(groups, &trial)) {
                        if o < obj - 1e-12 {
                            obj = o;
                            choice = trial;
                            point = x;
                            improved = true;
                        }
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    (obj, choice, point)
}

pub fn plain_root_bound(pq: &PqModel) -> f64 {
    let rm = relax_pq(pq).unwrap();
    let res = LpProblem::from_model(&rm.lp).unwrap().solve(None).unwrap();
    assert_eq!(res.status, LpStatus::Optimal);
    res.objective
}

/// Root bound after the pooling inequalities and the gradient-cut loop.
pub fn cut_root_bound(pq: &PqModel, max_rounds: usize) -> (f64, CutBlock) {
    let mut rm = relax_pq(pq).unwrap();
    let mut cb = add_all_pooling_inequalities(&mut rm, pq).unwrap();
    let (_, last) = cut_loop(&mut rm, &mut cb, max_rounds, DEFAULT_EPSILON, None, |_| {}).unwrap();
    assert_eq!(last.status, LpStatus::Optimal);
    (last.objective, cb)
}

pub fn generated_pq(spec: &GenSpec) -> (Arc<Network>, PqModel) {
    let net = Arc::new(generate_instance(spec).unwrap());
    let pq = build_pq(net.clone()).unwrap();
    (net, pq)
}

/// Tiny seeded instances whose q-grid fits the oracle budget.
pub fn tiny_specs(count: usize) -> Vec<GenSpec> {
    let shapes = [(3, 1, 2, 1, 6), (4, 2, 3, 2, 11), (3, 1, 3, 2, 8), (4, 2, 2, 1, 9), (4, 1, 3, 1, 9), (3, 2, 3, 2, 10)];
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count {
        let (i, l, j, k, a) = shapes[seed as usize % shapes.len()];
        let family = if seed % 3 == 2 { Family::DenseRand } else { Family::SparseHaverly };
        let spec = GenSpec::new(family, i, l, j, k, a, 1000 + seed);
        seed += 1;
        let (_, pq) = generated_pq(&spec);
        if grid_size(&pq) <= MAX_GRID_POINTS {
            out.push(spec);
        }
    }
    out
}
