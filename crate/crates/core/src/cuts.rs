//! Pooling inequalities and gradient cuts for each pool, output and quality triplet.
//!
//! Excess values are measured as `C_ik - P^U_jk`, so a nonnegative weighted excess at an
//! output means its quality bound is active or violated. Flow-based quantities `s`, `u`
//! and `t` are scaled by the output capacity `c_j`.

use std::collections::{BTreeMap, HashSet};

use crate::error::{CutError, ModelError};
use crate::model::{Constraint, LinearExpr, Sense, VarId};
use crate::network::Network;
use crate::pq::{Pair, PqModel};
use crate::relaxation::RelaxedModel;

/// Default violation threshold for gradient cuts.
pub const DEFAULT_EPSILON: f64 = 1e-5;

const MIN_SCALED_FLOW: f64 = 1e-8;

/// Parameters of one `(l, j, k)` triplet.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletParams {
    pub l: String,
    pub j: String,
    pub k: String,
    pub eta_lo: f64,
    pub eta_hi: f64,
    /// Excess range over the inputs reaching `j` without passing through `l`; absent when
    /// there are none.
    pub beta: Option<(f64, f64)>,
    pub p_lo: f64,
    pub p_hi: f64,
    /// Output capacity used for scaling.
    pub c_j: f64,
}

impl TripletParams {
    pub fn beta_lo(&self) -> Option<f64> {
        self.beta.map(|b| b.0)
    }

    pub fn beta_hi(&self) -> Option<f64> {
        self.beta.map(|b| b.1)
    }

    /// Whether the upper-excess inequality applies.
    pub fn has_upper_inequality(&self) -> bool {
        self.beta_hi().is_some_and(|b| b > 0.0)
    }

    /// Whether the lower-excess inequality applies.
    pub fn has_lower_inequality(&self) -> bool {
        self.beta_lo().is_some_and(|b| b < 0.0)
    }
}

/// Variable ids of one triplet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripletVars {
    pub z: VarId,
    pub s: VarId,
    pub u: VarId,
    pub t: VarId,
    pub p: VarId,
    pub r: VarId,
}

/// A linear cut `expr <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub name: String,
    pub expr: LinearExpr,
    pub rhs: f64,
    /// `expr - rhs` at the separated point.
    pub violation: f64,
}

/// The auxiliary variables, definitions and inequalities installed for every triplet.
#[derive(Debug, Clone, PartialEq)]
pub struct CutBlock {
    params: Vec<TripletParams>,
    vars: Vec<TripletVars>,
    z: BTreeMap<Pair, VarId>,
    s: BTreeMap<Pair, VarId>,
    definitions: Vec<String>,
    inequalities: Vec<String>,
    pool: Vec<String>,
    seen: HashSet<Vec<i64>>,
    pq_source: PqSource,
}

// v ids of the pool path, bypass y ids, other pool y ids
type FlowIds = (Vec<VarId>, Vec<VarId>, Vec<VarId>);

// Index data needed to lift an original point into the block's variables.
#[derive(Debug, Clone, PartialEq)]
struct PqSource {
    flows: BTreeMap<Pair, FlowIds>,
    // per triplet: excess-weighted terms of u, t and p
    u_terms: Vec<Vec<(VarId, f64)>>,
    t_terms: Vec<Vec<(VarId, f64)>>,
    p_terms: Vec<Vec<(VarId, f64)>>,
}

impl CutBlock {
    pub fn params(&self) -> &[TripletParams] {
        &self.params
    }

    pub fn vars(&self) -> &[TripletVars] {
        &self.vars
    }

    pub fn triplet(&self, l: &str, j: &str, k: &str) -> Option<(&TripletParams, &TripletVars)> {
        let idx = self.params.iter().position(|p| p.l == l && p.j == j && p.k == k)?;
        Some((&self.params[idx], &self.vars[idx]))
    }

    /// Names of the defining equality rows.
    pub fn definitions(&self) -> &[String] {
        &self.definitions
    }

    /// Names of the static linear inequalities.
    pub fn inequalities(&self) -> &[String] {
        &self.inequalities
    }

    /// Names of the gradient cuts added so far.
    pub fn cut_pool(&self) -> &[String] {
        &self.pool
    }

    /// Extends an assignment of the relaxed model's non-block variables with the values the
    /// block variables take by definition. Only entries for block variables are written.
    pub fn lift(&self, point: &mut [f64]) -> Result<(), CutError> {
        let get = |point: &[f64], id: VarId| point.get(id).copied().ok_or(CutError::Model(ModelError::UnknownVariable(id)));
        let weighted = |point: &[f64], terms: &[(VarId, f64)]| -> Result<f64, CutError> {
            terms.iter().try_fold(0.0, |acc, &(id, c)| Ok(acc + c * get(point, id)?))
        };
        for (idx, (par, vars)) in self.params.iter().zip(&self.vars).enumerate() {
            let key = (par.l.clone(), par.j.clone());
            let (path, bypass, others) = &self.pq_source.flows[&key];
            let sum = |point: &[f64], ids: &[VarId]| -> Result<f64, CutError> { ids.iter().try_fold(0.0, |a, &i| Ok(a + get(point, i)?)) };
            let z = sum(point, bypass)? + sum(point, others)?;
            let s = sum(point, path)? / par.c_j;
            let u = weighted(point, &self.pq_source.u_terms[idx])? / par.c_j;
            let t = weighted(point, &self.pq_source.t_terms[idx])? / par.c_j;
            let p = weighted(point, &self.pq_source.p_terms[idx])?;
            if vars.z >= point.len() || vars.r >= point.len() {
                return Err(CutError::Model(ModelError::UnknownVariable(vars.r.max(vars.z))));
            }
            point[vars.z] = z;
            point[vars.s] = s;
            point[vars.u] = u;
            point[vars.t] = t;
            point[vars.p] = p;
            point[vars.r] = u;
        }
        Ok(())
    }
}

fn excess(net: &Network, i: &str, j: &str, k: &str) -> f64 {
    let c = net.node(i).and_then(|n| n.quality(k)).unwrap_or(0.0);
    let bound = net.node(j).and_then(|n| n.quality_upper(k)).unwrap_or(0.0);
    c - bound
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Triplet parameters for every pool-output edge and bounded quality of the network.
pub fn triplet_params(net: &Network) -> Result<Vec<TripletParams>, CutError> {
    let mut out = Vec::new();
    for l in net.pools() {
        for j in net.pool_outputs(l) {
            let node = net.node(j).expect("output exists");
            let Some(bounds) = node.attr.get(crate::network::QUALITY_UPPER) else { continue };
            if bounds.is_empty() {
                continue;
            }
            let c_j = node.capacity.effective_upper();
            if c_j == 0.0 {
                continue;
            }
            if !c_j.is_finite() {
                return Err(CutError::UnboundedOutputCapacity(j.to_string()));
            }
            let mut others: Vec<&str> = net.output_inputs(j);
            for other in net.output_pools(j).into_iter().filter(|&o| o != l) {
                others.extend(net.pool_inputs(other));
            }
            others.sort_unstable();
            others.dedup();
            for k in bounds.keys() {
                let (eta_lo, eta_hi) =
                    range(net.pool_inputs(l).into_iter().map(|i| excess(net, i, j, k))).expect("pools have inputs");
                let beta = range(others.iter().map(|i| excess(net, i, j, k)));
                out.push(TripletParams {
                    l: l.to_string(),
                    j: j.to_string(),
                    k: k.clone(),
                    eta_lo,
                    eta_hi,
                    beta,
                    p_lo: eta_lo,
                    p_hi: eta_hi,
                    c_j,
                });
            }
        }
    }
    Ok(out)
}

fn expr(terms: &[(VarId, f64)]) -> LinearExpr {
    LinearExpr::from_terms(terms.iter().copied())
}

/// Installs the auxiliary variables, their definitions, the envelope of `s * p` and the static
/// inequalities into `rm`.
pub fn add_all_pooling_inequalities(rm: &mut RelaxedModel, pq: &PqModel) -> Result<CutBlock, CutError> {
    if rm.cuts_installed {
        return Err(CutError::AlreadyInstalled);
    }
    let net = pq.network().as_ref();
    let params = triplet_params(net)?;
    let lp = &mut rm.lp;
    let mut definitions = Vec::new();
    let mut inequalities = Vec::new();
    let mut z = BTreeMap::new();
    let mut s = BTreeMap::new();
    let mut flows = BTreeMap::new();
    let add = |lp: &mut crate::model::Model, list: &mut Vec<String>, c: Constraint| -> Result<(), CutError> {
        list.push(c.name.clone());
        lp.add_constraint(c)?;
        Ok(())
    };

    for par in &params {
        let key = (par.l.clone(), par.j.clone());
        if z.contains_key(&key) {
            continue;
        }
        let (l, j) = (&par.l, &par.j);
        let path: Vec<VarId> = net.pool_inputs(l).iter().map(|i| pq.v(i, l, j).expect("path variable")).collect();
        let bypass: Vec<VarId> = net.output_inputs(j).iter().map(|i| pq.y_bypass(i, j).expect("bypass variable")).collect();
        let others: Vec<VarId> =
            net.output_pools(j).into_iter().filter(|o| o != l).map(|o| pq.y_pool(o, j).expect("pool flow variable")).collect();
        let zid = lp.continuous(format!("z[{l},{j}]"), 0.0, f64::INFINITY)?;
        let sid = lp.continuous(format!("s[{l},{j}]"), 0.0, 1.0)?;
        let mut zdef: Vec<(VarId, f64)> = vec![(zid, 1.0)];
        zdef.extend(bypass.iter().chain(&others).map(|&v| (v, -1.0)));
        add(lp, &mut definitions, Constraint::linear(format!("z_definition[{l},{j}]"), expr(&zdef), Sense::Eq, 0.0))?;
        let mut sdef: Vec<(VarId, f64)> = vec![(sid, par.c_j)];
        sdef.extend(path.iter().map(|&v| (v, -1.0)));
        add(lp, &mut definitions, Constraint::linear(format!("s_definition[{l},{j}]"), expr(&sdef), Sense::Eq, 0.0))?;
        z.insert(key.clone(), zid);
        s.insert(key.clone(), sid);
        flows.insert(key, (path, bypass, others));
    }

    let mut vars = Vec::new();
    let mut u_terms = Vec::new();
    let mut t_terms = Vec::new();
    let mut p_terms = Vec::new();
    for par in &params {
        let (l, j, k) = (&par.l, &par.j, &par.k);
        let key = (l.clone(), j.clone());
        let tag = format!("{l},{j},{k}");
        let uw: Vec<(VarId, f64)> =
            net.pool_inputs(l).iter().map(|i| (pq.v(i, l, j).expect("path variable"), excess(net, i, j, k))).collect();
        let mut tw: Vec<(VarId, f64)> =
            net.output_inputs(j).iter().map(|i| (pq.y_bypass(i, j).expect("bypass variable"), excess(net, i, j, k))).collect();
        for other in net.output_pools(j).into_iter().filter(|o| o != l) {
            for i in net.pool_inputs(other) {
                tw.push((pq.v(i, other, j).expect("path variable"), excess(net, i, j, k)));
            }
        }
        let pw: Vec<(VarId, f64)> =
            net.pool_inputs(l).iter().map(|i| (pq.q(i, l).expect("fraction variable"), excess(net, i, j, k))).collect();

        let u = lp.continuous(format!("u[{tag}]"), f64::NEG_INFINITY, f64::INFINITY)?;
        let t = lp.continuous(format!("t[{tag}]"), f64::NEG_INFINITY, f64::INFINITY)?;
        let p = lp.continuous(format!("p[{tag}]"), par.p_lo, par.p_hi)?;
        let r = lp.continuous(format!("r[{tag}]"), par.p_lo.min(0.0), par.p_hi.max(0.0))?;
        let sid = s[&key];

        let mut e = vec![(u, par.c_j)];
        e.extend(uw.iter().map(|&(v, c)| (v, -c)));
        add(lp, &mut definitions, Constraint::linear(format!("u_definition[{tag}]"), expr(&e), Sense::Eq, 0.0))?;
        let mut e = vec![(t, par.c_j)];
        e.extend(tw.iter().map(|&(v, c)| (v, -c)));
        add(lp, &mut definitions, Constraint::linear(format!("t_definition[{tag}]"), expr(&e), Sense::Eq, 0.0))?;
        let mut e = vec![(p, 1.0)];
        e.extend(pw.iter().map(|&(v, c)| (v, -c)));
        add(lp, &mut definitions, Constraint::linear(format!("p_definition[{tag}]"), expr(&e), Sense::Eq, 0.0))?;
        add(lp, &mut definitions, Constraint::linear(format!("r_definition[{tag}]"), expr(&[(r, 1.0), (u, -1.0)]), Sense::Eq, 0.0))?;

        let (pl, pu) = (par.p_lo, par.p_hi);
        let envelope = [
            (expr(&[(r, 1.0), (sid, -pl)]), Sense::Ge, 0.0),
            (expr(&[(sid, pu), (r, -1.0)]), Sense::Ge, 0.0),
            (expr(&[(r, 1.0), (sid, -pl), (p, -1.0)]), Sense::Le, -pl),
            (expr(&[(sid, pu), (r, -1.0), (p, 1.0)]), Sense::Le, pu),
        ];
        for (n, (e, sense, rhs)) in envelope.into_iter().enumerate() {
            add(lp, &mut definitions, Constraint::linear(format!("sp_envelope_{}[{tag}]", n + 1), e, sense, rhs))?;
        }

        let (el, eh) = (par.eta_lo, par.eta_hi);
        if par.has_upper_inequality() {
            let bh = par.beta_hi().expect("checked");
            let e = expr(&[(t, eh - el), (sid, el * eh - bh * el), (u, bh - el), (p, -bh)]);
            add(lp, &mut inequalities, Constraint::linear(format!("upper_excess[{tag}]"), e, Sense::Le, -bh * el))?;
        }
        if par.has_lower_inequality() {
            let bl = par.beta_lo().expect("checked");
            let e = expr(&[(sid, (el - bl) * eh), (u, -(el - bl)), (p, -bl)]);
            add(lp, &mut inequalities, Constraint::linear(format!("lower_excess[{tag}]"), e, Sense::Le, -bl * eh))?;
        }
        vars.push(TripletVars { z: z[&key], s: sid, u, t, p, r });
        u_terms.push(uw);
        t_terms.push(tw);
        p_terms.push(pw);
    }
    rm.cuts_installed = true;
    Ok(CutBlock {
        params,
        vars,
        z,
        s,
        definitions,
        inequalities,
        pool: Vec::new(),
        seen: HashSet::new(),
        pq_source: PqSource { flows, u_terms, t_terms, p_terms },
    })
}

fn value(point: &[f64], id: VarId) -> Result<f64, CutError> {
    match point.get(id) {
        Some(v) if !v.is_nan() => Ok(*v),
        _ => Err(CutError::Model(ModelError::MissingVariableValue(format!("#{id}")))),
    }
}

/// Gradient cut of the perspective form of the lower-excess inequality at the point, if it is
/// violated by more than `epsilon`.
pub fn lower_excess_cut(par: &TripletParams, vars: &TripletVars, point: &[f64], epsilon: f64) -> Result<Option<Cut>, CutError> {
    let Some(bl) = par.beta_lo().filter(|&b| b < 0.0) else { return Ok(None) };
    let el = par.eta_lo;
    let (s, u, p) = (value(point, vars.s)?, value(point, vars.u)?, value(point, vars.p)?);
    if s <= MIN_SCALED_FLOW {
        return Ok(None);
    }
    let violation = u * u / s - (bl + el) * u + bl * el * s + bl * (p - el);
    if !(violation > epsilon) {
        return Ok(None);
    }
    let rho = u / s;
    let e = expr(&[(vars.u, 2.0 * rho - (bl + el)), (vars.s, bl * el - rho * rho), (vars.p, bl)]);
    Ok(Some(Cut { name: format!("lower_excess_cut[{},{},{}]", par.l, par.j, par.k), expr: e, rhs: bl * el, violation }))
}

/// Gradient cut of the upper-excess inequality with the fractional term linearized at the
/// point, if it is violated by more than `epsilon`.
pub fn upper_excess_cut(par: &TripletParams, vars: &TripletVars, point: &[f64], epsilon: f64) -> Result<Option<Cut>, CutError> {
    let Some(bh) = par.beta_hi().filter(|&b| b > 0.0) else { return Ok(None) };
    let (el, eh) = (par.eta_lo, par.eta_hi);
    if !(el < 0.0 && eh >= 0.0) {
        return Ok(None);
    }
    let (s, u, t, p) = (value(point, vars.s)?, value(point, vars.u)?, value(point, vars.t)?, value(point, vars.p)?);
    let a = u - el * s;
    if t <= 0.0 || a < 0.0 || t + a <= MIN_SCALED_FLOW {
        return Ok(None);
    }
    let violation = (eh - el) * t + bh * (eh * s - u) + el * t * a / (t + a) - bh * (eh - p);
    if !(violation > epsilon) {
        return Ok(None);
    }
    let rho = a / (t + a);
    let w = (1.0 - rho) * (1.0 - rho);
    let e = expr(&[(vars.t, (eh - el) + el * rho * rho), (vars.u, -bh + el * w), (vars.s, bh * eh - el * el * w), (vars.p, bh)]);
    Ok(Some(Cut { name: format!("upper_excess_cut[{},{},{}]", par.l, par.j, par.k), expr: e, rhs: bh * eh, violation }))
}

/// Cuts violated by more than `epsilon` at `point`, in triplet order.
pub fn generate_valid_cuts(cb: &CutBlock, point: &[f64], epsilon: f64) -> Result<Vec<Cut>, CutError> {
    let mut cuts = Vec::new();
    for (par, vars) in cb.params.iter().zip(&cb.vars) {
        cuts.extend(lower_excess_cut(par, vars, point, epsilon)?);
        cuts.extend(upper_excess_cut(par, vars, point, epsilon)?);
    }
    Ok(cuts)
}

fn fingerprint(cut: &Cut) -> Vec<i64> {
    let q = |v: f64| (v * 1e9).round() as i64;
    let mut key: Vec<i64> = cut.expr.terms().flat_map(|(id, c)| [id as i64, q(c)]).collect();
    key.push(q(cut.rhs));
    key
}

/// Separates cuts at `point` and appends the new ones to `rm`. Returns how many were added.
pub fn add_valid_cuts(cb: &mut CutBlock, rm: &mut RelaxedModel, point: &[f64], epsilon: f64) -> Result<usize, CutError> {
    let mut added = 0;
    for cut in generate_valid_cuts(cb, point, epsilon)? {
        if !cb.seen.insert(fingerprint(&cut)) {
            continue;
        }
        let name = format!("{}#{}", cut.name, cb.pool.len());
        rm.lp.add_constraint(Constraint::linear(name.clone(), cut.expr, Sense::Le, cut.rhs))?;
        cb.pool.push(name);
        added += 1;
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::pq::build_pq;
    use crate::relaxation::relax_pq;
    use std::sync::Arc;

    fn h1_block() -> (PqModel, RelaxedModel, CutBlock) {
        let pq = build_pq(Arc::new(fixtures::h1())).unwrap();
        let mut rm = relax_pq(&pq).unwrap();
        let cb = add_all_pooling_inequalities(&mut rm, &pq).unwrap();
        (pq, rm, cb)
    }

    #[test]
    fn h1_parameters() {
        let (_, _, cb) = h1_block();
        let (par, _) = cb.triplet("l1", "j2", "k").unwrap();
        assert_eq!((par.eta_lo, par.eta_hi), (-0.5, 1.5));
        assert_eq!(par.beta, Some((0.5, 0.5)));
        assert!(par.has_upper_inequality());
        assert!(!par.has_lower_inequality());
        assert_eq!(cb.params().len(), 2);
        assert_eq!(cb.inequalities().len(), 2);
    }

    #[test]
    fn second_install_fails() {
        let (pq, mut rm, _) = h1_block();
        assert_eq!(add_all_pooling_inequalities(&mut rm, &pq).unwrap_err(), CutError::AlreadyInstalled);
    }

    #[test]
    fn no_outside_inputs_means_no_inequalities() {
        let mut net = fixtures::h1();
        let mut trimmed = Network::new("h1-pool-only");
        for n in net.nodes().filter(|n| n.name != "i3") {
            trimmed.insert_node(n.clone()).unwrap();
        }
        for e in net.edges().filter(|e| e.source != "i3") {
            trimmed.insert_edge(e.clone()).unwrap();
        }
        net = trimmed;
        let pq = build_pq(Arc::new(net)).unwrap();
        let mut rm = relax_pq(&pq).unwrap();
        let cb = add_all_pooling_inequalities(&mut rm, &pq).unwrap();
        assert!(cb.params().iter().all(|p| p.beta.is_none()));
        assert!(cb.inequalities().is_empty());
    }

    #[test]
    fn unbounded_output_is_rejected() {
        let mut net = Network::new("open");
        for n in fixtures::h1().nodes() {
            let mut n = n.clone();
            if n.name == "j1" {
                n.capacity = crate::network::Capacity(None, None);
            }
            net.insert_node(n).unwrap();
        }
        for e in fixtures::h1().edges() {
            let mut e = e.clone();
            if e.destination == "j1" {
                e.capacity = crate::network::Capacity(None, Some(100.0));
            }
            net.insert_edge(e).unwrap();
        }
        let pq = build_pq(Arc::new(net)).unwrap();
        let mut rm = relax_pq(&pq).unwrap();
        assert_eq!(add_all_pooling_inequalities(&mut rm, &pq).unwrap_err(), CutError::UnboundedOutputCapacity("j1".into()));
    }

    #[test]
    fn cut_violation_matches_residual() {
        let (_, rm, cb) = h1_block();
        let (par, vars) = cb.triplet("l1", "j2", "k").unwrap();
        let mut point = vec![0.0; rm.lp.num_vars()];
        point[vars.s] = 0.5;
        point[vars.u] = 0.2;
        point[vars.t] = 0.3;
        point[vars.p] = 1.2;
        let cut = upper_excess_cut(par, vars, &point, 1e-12).unwrap().expect("violated");
        let lhs = cut.expr.terms().map(|(id, c)| c * point[id]).sum::<f64>();
        assert!((lhs - cut.rhs - cut.violation).abs() < 1e-12);
        point[vars.t] = 0.0;
        assert!(upper_excess_cut(par, vars, &point, 1e-12).unwrap().is_none());
        assert!(generate_valid_cuts(&cb, &point, f64::INFINITY).unwrap().is_empty());
    }

    #[test]
    fn short_point_is_reported() {
        let (_, _, cb) = h1_block();
        assert!(matches!(generate_valid_cuts(&cb, &[0.0; 3], 1e-5), Err(CutError::Model(ModelError::MissingVariableValue(_)))));
    }
}
