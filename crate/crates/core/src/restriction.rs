//! MIP restriction of the PQ-formulation: every pool is split into `tau` copies that receive
//! fixed fractions of the pool's inflow and each deliver to exactly one output.

use std::collections::BTreeMap;

use crate::error::RestrictionError;
use crate::model::{Constraint, LinearExpr, Sense, VarId, FEAS_TOL};
use crate::pq::{groups, FlowBounds, PqModel};

/// Throughput below which a pool counts as empty when deriving fractions.
pub const ZERO_THROUGHPUT: f64 = 1e-9;

/// Number of pool copies and the share of inflow each copy receives.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionSpec {
    pub tau: usize,
    /// Per pool, one weight per copy. Pools not listed use uniform weights `1 / tau`.
    pub weights: BTreeMap<String, Vec<f64>>,
}

impl RestrictionSpec {
    pub fn uniform(tau: usize) -> Self {
        RestrictionSpec { tau, weights: BTreeMap::new() }
    }

    pub fn with_weights(mut self, pool: impl Into<String>, weights: Vec<f64>) -> Self {
        self.weights.insert(pool.into(), weights);
        self
    }

    pub fn weights_for(&self, pool: &str) -> Vec<f64> {
        self.weights.get(pool).cloned().unwrap_or_else(|| vec![1.0 / self.tau as f64; self.tau])
    }

    pub fn validate(&self) -> Result<(), RestrictionError> {
        if self.tau == 0 {
            return Err(RestrictionError::InvalidWeights("tau must be positive".into()));
        }
        for (pool, w) in &self.weights {
            if w.len() != self.tau {
                return Err(RestrictionError::InvalidWeights(format!("pool `{pool}` has {} weights for {} copies", w.len(), self.tau)));
            }
            if w.iter().any(|&g| !(0.0..=1.0).contains(&g)) {
                return Err(RestrictionError::InvalidWeights(format!("pool `{pool}` has a weight outside [0, 1]")));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(RestrictionError::InvalidWeights(format!("weights of pool `{pool}` sum to {sum}")));
            }
        }
        Ok(())
    }
}

/// A PQ model carrying the restriction sub-block.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedModel {
    pq: PqModel,
    spec: RestrictionSpec,
    w: BTreeMap<(String, String, usize, String), VarId>,
    zeta: BTreeMap<(String, usize, String), VarId>,
    saved_size: (usize, usize),
    saved_flags: Vec<(String, bool)>,
    installed: bool,
}

impl RestrictedModel {
    pub fn pq(&self) -> &PqModel {
        &self.pq
    }

    pub fn spec(&self) -> &RestrictionSpec {
        &self.spec
    }

    pub fn w(&self, i: &str, l: &str, t: usize, j: &str) -> Option<VarId> {
        self.w.get(&(i.to_string(), l.to_string(), t, j.to_string())).copied()
    }

    pub fn zeta(&self, l: &str, t: usize, j: &str) -> Option<VarId> {
        self.zeta.get(&(l.to_string(), t, j.to_string())).copied()
    }

    pub fn zeta_vars(&self) -> &BTreeMap<(String, usize, String), VarId> {
        &self.zeta
    }

    pub fn is_installed(&self) -> bool {
        self.installed
    }
}

/// A full assignment of the PQ variables, feasible for the PQ model.
#[derive(Debug, Clone, PartialEq)]
pub struct RestoredSolution {
    pub values: Vec<f64>,
    pub objective: f64,
}

/// Splits every pool of `pq` into `spec.tau` copies and deactivates `path_definition`.
pub fn install_restriction(pq: &PqModel, spec: &RestrictionSpec) -> Result<RestrictedModel, RestrictionError> {
    if pq.restricted {
        return Err(RestrictionError::AlreadyRestricted);
    }
    spec.validate()?;
    let mut base = pq.clone();
    let saved_size = (base.model.num_vars(), base.model.num_constraints());
    let saved_flags: Vec<(String, bool)> = base
        .group(groups::PATH_DEFINITION)
        .iter()
        .map(|n| (n.clone(), base.model.constraint(n).expect("group rows exist").active))
        .collect();
    base.set_group_active(groups::PATH_DEFINITION, false);
    base.restricted = true;

    let net = base.network().clone();
    let caps = FlowBounds::new(&net);
    let model = &mut base.model;
    let mut w = BTreeMap::new();
    let mut zeta = BTreeMap::new();
    for l in net.pools() {
        let inputs = net.pool_inputs(l);
        let outputs = net.pool_outputs(l);
        if outputs.is_empty() {
            continue;
        }
        let gamma = spec.weights_for(l);
        for t in 0..spec.tau {
            for j in &outputs {
                zeta.insert((l.to_string(), t, j.to_string()), model.binary(format!("zeta[{l},{t},{j}]")));
            }
        }
        for i in &inputs {
            for t in 0..spec.tau {
                for j in &outputs {
                    let v = pq.v(i, l, j).expect("path variable");
                    let hi = model.var(v).upper;
                    let id = model.continuous(format!("w[{i},{l},{t},{j}]"), 0.0, hi)?;
                    w.insert((i.to_string(), l.to_string(), t, j.to_string()), id);
                }
            }
        }
        for i in &inputs {
            for j in &outputs {
                let mut e = LinearExpr::from_terms([(pq.v(i, l, j).expect("path variable"), 1.0)]);
                for t in 0..spec.tau {
                    e.add_term(w[&(i.to_string(), l.to_string(), t, j.to_string())], -1.0);
                }
                model.add_constraint(Constraint::linear(format!("flow_balance[{i},{l},{j}]"), e, Sense::Eq, 0.0))?;
            }
            for (t, &g) in gamma.iter().enumerate() {
                let mut e = LinearExpr::new();
                for j in &outputs {
                    e.add_term(w[&(i.to_string(), l.to_string(), t, j.to_string())], 1.0);
                    e.add_term(pq.v(i, l, j).expect("path variable"), -g);
                }
                model.add_constraint(Constraint::linear(format!("flow_balance_2[{i},{l},{t}]"), e, Sense::Eq, 0.0))?;
            }
            for t in 0..spec.tau {
                for j in &outputs {
                    let c_lj = caps.pool_output(l, j).min(caps.pool(l));
                    if !c_lj.is_finite() {
                        return Err(RestrictionError::UnboundedFlow(l.to_string(), j.to_string()));
                    }
                    let e = LinearExpr::from_terms([
                        (w[&(i.to_string(), l.to_string(), t, j.to_string())], 1.0),
                        (zeta[&(l.to_string(), t, j.to_string())], -c_lj),
                    ]);
                    model.add_constraint(Constraint::linear(format!("flow_choice_limit[{i},{l},{t},{j}]"), e, Sense::Le, 0.0))?;
                }
            }
        }
        for t in 0..spec.tau {
            let e = LinearExpr::from_terms(outputs.iter().map(|j| (zeta[&(l.to_string(), t, j.to_string())], 1.0)));
            model.add_constraint(Constraint::linear(format!("flow_choice[{l},{t}]"), e, Sense::Eq, 1.0))?;
        }
    }
    Ok(RestrictedModel { pq: base, spec: spec.clone(), w, zeta, saved_size, saved_flags, installed: true })
}

/// Removes the sub-block and restores `path_definition`. Calling it again returns the same model.
pub fn uninstall_restriction(rm: &mut RestrictedModel) -> PqModel {
    if rm.installed {
        rm.pq.model.truncate(rm.saved_size.0, rm.saved_size.1);
        for (name, active) in &rm.saved_flags {
            rm.pq.model.set_active(name, *active).expect("saved rows exist");
        }
        rm.pq.restricted = false;
        rm.w.clear();
        rm.zeta.clear();
        rm.installed = false;
    }
    rm.pq.clone()
}

/// Replaces the `q` entries of `point` by inflow ratios read from the `v` values: for each pool
/// the output with the largest throughput is used, and empty pools get uniform fractions.
pub fn derive_fractions(pq: &PqModel, point: &mut [f64]) {
    let net = pq.network().clone();
    for l in net.pools() {
        let inputs = net.pool_inputs(l);
        let best = net
            .pool_outputs(l)
            .into_iter()
            .map(|j| (j, inputs.iter().map(|i| point[pq.v(i, l, j).expect("path variable")]).sum::<f64>()))
            .fold(None, |acc: Option<(&str, f64)>, (j, f)| match acc {
                Some((_, g)) if g >= f => acc,
                _ => Some((j, f)),
            });
        for i in &inputs {
            let q = pq.q(i, l).expect("fraction variable");
            point[q] = match best {
                Some((j, total)) if total > ZERO_THROUGHPUT => point[pq.v(i, l, j).expect("path variable")].max(0.0) / total,
                _ => 1.0 / inputs.len() as f64,
            };
        }
    }
}

/// Turns a solution of the restricted model into a PQ-feasible assignment.
pub fn derive_fractional_flows(rm: &RestrictedModel, solution: &[f64]) -> Result<RestoredSolution, RestrictionError> {
    let report = rm.pq.model.is_feasible(solution, FEAS_TOL)?;
    if !report.feasible {
        return Err(RestrictionError::InfeasibleInput(report.worst.unwrap_or_default()));
    }
    let mut base = rm.clone();
    let pq = uninstall_restriction(&mut base);
    let mut values = solution[..pq.model.num_vars()].to_vec();
    derive_fractions(&pq, &mut values);
    let report = pq.model.is_feasible(&values, FEAS_TOL)?;
    if !report.feasible {
        return Err(RestrictionError::DerivationFailed(report.worst.unwrap_or_default()));
    }
    let objective = pq.model.objective_value(&values)?;
    Ok(RestoredSolution { values, objective })
}
