//! McCormick relaxation of bilinear models.

use std::collections::HashMap;

use crate::error::RelaxError;
use crate::model::{Constraint, Domain, LinearExpr, Model, Sense, VarId};
use crate::pq::{groups, PqModel};

/// The envelope of one product `w = x * y`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeEntry {
    pub aux: VarId,
    pub x: VarId,
    pub y: VarId,
    /// Indices of the four envelope rows in the relaxed model.
    pub rows: [usize; 4],
    /// Names of the constraints whose products this entry replaces.
    pub sources: Vec<String>,
}

/// A linear relaxation. Variable ids of the original model are kept; auxiliary product
/// variables are appended after them.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedModel {
    pub lp: Model,
    envelopes: Vec<EnvelopeEntry>,
    by_product: HashMap<(VarId, VarId), usize>,
    num_original: usize,
    pub(crate) cuts_installed: bool,
}

impl RelaxedModel {
    /// Maps a point of the original model to the relaxed model: products take their exact
    /// values and any later variables are zero.
    pub fn lift(&self, original: &[f64]) -> Vec<f64> {
        let mut point = vec![0.0; self.lp.num_vars()];
        let n = self.num_original.min(original.len());
        point[..n].copy_from_slice(&original[..n]);
        for e in &self.envelopes {
            point[e.aux] = point[e.x] * point[e.y];
        }
        point
    }

    pub fn envelopes(&self) -> &[EnvelopeEntry] {
        &self.envelopes
    }

    pub fn envelope(&self, x: VarId, y: VarId) -> Option<&EnvelopeEntry> {
        let key = if x <= y { (x, y) } else { (y, x) };
        self.by_product.get(&key).map(|&i| &self.envelopes[i])
    }

    pub fn num_original_vars(&self) -> usize {
        self.num_original
    }
}

/// Coefficients `(w, x, y, sense, rhs)` of the four McCormick planes.
pub fn envelope_planes(xl: f64, xu: f64, yl: f64, yu: f64) -> [(f64, f64, f64, Sense, f64); 4] {
    [
        (1.0, -yl, -xl, Sense::Ge, -xl * yl),
        (1.0, -yu, -xu, Sense::Ge, -xu * yu),
        (1.0, -yl, -xu, Sense::Le, -xu * yl),
        (1.0, -yu, -xl, Sense::Le, -xl * yu),
    ]
}

fn corner_range(xl: f64, xu: f64, yl: f64, yu: f64) -> (f64, f64) {
    let corners = [xl * yl, xl * yu, xu * yl, xu * yu];
    let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn plane_expr(aux: VarId, x: VarId, y: VarId, plane: (f64, f64, f64, Sense, f64)) -> LinearExpr {
    let mut e = LinearExpr::new();
    e.add_term(aux, plane.0);
    e.add_term(x, plane.1);
    e.add_term(y, plane.2);
    e
}

struct Relaxer {
    lp: Model,
    envelopes: Vec<EnvelopeEntry>,
    by_product: HashMap<(VarId, VarId), usize>,
    pending_rows: Vec<Constraint>,
    // envelope rows follow the original constraints
    first_envelope_row: usize,
}

impl Relaxer {
    fn bounds(&self, v: VarId) -> (f64, f64) {
        let var = self.lp.var(v);
        (var.lower, var.upper)
    }

    /// Adds `coef * x * y` to `expr`, either directly when a factor is fixed or through an
    /// auxiliary variable.
    fn linearize(&mut self, expr: &mut LinearExpr, coef: f64, x: VarId, y: VarId, source: &str) -> Result<(), RelaxError> {
        let (xl, xu) = self.bounds(x);
        let (yl, yu) = self.bounds(y);
        if xl == xu {
            expr.add_term(y, coef * xl);
            return Ok(());
        }
        if yl == yu {
            expr.add_term(x, coef * yl);
            return Ok(());
        }
        let idx = match self.by_product.get(&(x, y)) {
            Some(&i) => i,
            None => {
                let (lo, hi) = corner_range(xl, xu, yl, yu);
                let name = format!("w[{}*{}]", self.lp.var(x).name, self.lp.var(y).name);
                let aux = self.lp.continuous(name.clone(), lo, hi)?;
                let planes = envelope_planes(xl, xu, yl, yu);
                let base = self.first_envelope_row + self.pending_rows.len();
                for (k, plane) in planes.into_iter().enumerate() {
                    let row = Constraint::linear(format!("mccormick_{}[{name}]", k + 1), plane_expr(aux, x, y, plane), plane.3, plane.4);
                    self.pending_rows.push(row);
                }
                let rows = [base, base + 1, base + 2, base + 3];
                self.envelopes.push(EnvelopeEntry { aux, x, y, rows, sources: Vec::new() });
                self.by_product.insert((x, y), self.envelopes.len() - 1);
                self.envelopes.len() - 1
            }
        };
        let entry = &mut self.envelopes[idx];
        if !entry.sources.iter().any(|s| s == source) {
            entry.sources.push(source.to_string());
        }
        expr.add_term(entry.aux, coef);
        Ok(())
    }
}

/// Replaces every bilinear term of `model` by its McCormick envelope. Inactive constraints are
/// relaxed too and keep their flag. Binary variables become continuous on `[0, 1]`.
pub fn relax(model: &Model) -> Result<RelaxedModel, RelaxError> {
    let mut lp = Model::new();
    for var in model.variables() {
        lp.add_var(var.name.clone(), var.lower, var.upper, Domain::Continuous)?;
    }
    let mut bilinear_vars: Vec<VarId> = model
        .constraints()
        .iter()
        .flat_map(|c| c.bilinear.iter())
        .chain(model.objective.bilinear.iter())
        .flat_map(|t| [t.a, t.b])
        .collect();
    bilinear_vars.sort_unstable();
    bilinear_vars.dedup();
    for v in bilinear_vars {
        let var = model.var(v);
        if !var.lower.is_finite() || !var.upper.is_finite() {
            return Err(RelaxError::UnboundedBilinearVariable(var.name.clone()));
        }
    }

    let mut r = Relaxer {
        lp,
        envelopes: Vec::new(),
        by_product: HashMap::new(),
        pending_rows: Vec::new(),
        first_envelope_row: model.num_constraints(),
    };
    let mut objective = model.objective.linear.clone();
    for t in &model.objective.bilinear {
        r.linearize(&mut objective, t.coef, t.a, t.b, "objective")?;
    }
    r.lp.objective.linear = objective;
    for c in model.constraints() {
        let mut linear = c.linear.clone();
        for t in &c.bilinear {
            r.linearize(&mut linear, t.coef, t.a, t.b, &c.name)?;
        }
        let mut row = Constraint::linear(c.name.clone(), linear, c.sense, c.rhs);
        row.active = c.active;
        r.lp.add_constraint(row)?;
    }
    let pending = std::mem::take(&mut r.pending_rows);
    for row in pending {
        r.lp.add_constraint(row)?;
    }
    Ok(RelaxedModel { lp: r.lp, envelopes: r.envelopes, by_product: r.by_product, num_original: model.num_vars(), cuts_installed: false })
}

/// Relaxes a PQ model with the `pq_cut` rows switched on.
pub fn relax_pq(pq: &PqModel) -> Result<RelaxedModel, RelaxError> {
    let mut rm = relax(&pq.model)?;
    for name in pq.group(groups::PQ_CUT) {
        rm.lp.set_active(name, true)?;
    }
    Ok(rm)
}

/// Tightens variable bounds and recomputes the envelopes of affected products.
pub fn refresh_bounds(rm: &mut RelaxedModel, bounds: &[(VarId, f64, f64)]) -> Result<(), RelaxError> {
    for &(v, lo, hi) in bounds {
        if v >= rm.lp.num_vars() {
            return Err(RelaxError::Model(crate::error::ModelError::UnknownVariable(v)));
        }
        let var = rm.lp.var(v);
        if lo < var.lower || hi > var.upper || lo > hi {
            return Err(RelaxError::BoundsWiden(var.name.clone()));
        }
    }
    for &(v, lo, hi) in bounds {
        rm.lp.set_bounds(v, lo, hi)?;
    }
    let changed: Vec<VarId> = bounds.iter().map(|b| b.0).collect();
    for idx in 0..rm.envelopes.len() {
        let e = rm.envelopes[idx].clone();
        if !changed.contains(&e.x) && !changed.contains(&e.y) {
            continue;
        }
        let (xl, xu) = (rm.lp.var(e.x).lower, rm.lp.var(e.x).upper);
        let (yl, yu) = (rm.lp.var(e.y).lower, rm.lp.var(e.y).upper);
        for (plane, &row) in envelope_planes(xl, xu, yl, yu).into_iter().zip(&e.rows) {
            let c = rm.lp.constraint_at_mut(row);
            c.linear = plane_expr(e.aux, e.x, e.y, plane);
            c.rhs = plane.4;
        }
        let (lo, hi) = corner_range(xl, xu, yl, yu);
        let aux = rm.lp.var(e.aux);
        let (lo, hi) = (lo.max(aux.lower), hi.min(aux.upper));
        rm.lp.set_bounds(e.aux, lo, hi.max(lo))?;
    }
    Ok(())
}
