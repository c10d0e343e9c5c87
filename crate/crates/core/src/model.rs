//! Solver-agnostic optimisation model: bounded variables, linear rows with optional
//! bilinear terms, and a minimisation objective.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::ModelError;

pub type VarId = usize;

/// Default absolute feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub domain: Domain,
}

/// Sparse linear expression `sum(coef * x) + constant`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearExpr {
    terms: BTreeMap<VarId, f64>,
    pub constant: f64,
}

impl LinearExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (VarId, f64)>) -> Self {
        let mut e = Self::new();
        for (v, c) in terms {
            e.add_term(v, c);
        }
        e
    }

    pub fn add_term(&mut self, var: VarId, coef: f64) -> &mut Self {
        if coef == 0.0 {
            return self;
        }
        let entry = self.terms.entry(var).or_insert(0.0);
        *entry += coef;
        if *entry == 0.0 {
            self.terms.remove(&var);
        }
        self
    }

    pub fn with_term(mut self, var: VarId, coef: f64) -> Self {
        self.add_term(var, coef);
        self
    }

    pub fn coef(&self, var: VarId) -> f64 {
        self.terms.get(&var).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, f64)> + '_ {
        self.terms.iter().map(|(&v, &c)| (v, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn remove(&mut self, var: VarId) -> f64 {
        self.terms.remove(&var).unwrap_or(0.0)
    }

    pub fn eval(&self, point: &[f64], model: &Model) -> Result<f64, ModelError> {
        let mut acc = self.constant;
        for (v, c) in self.terms() {
            acc += c * model.value_of(point, v)?;
        }
        Ok(acc)
    }
}

/// `coef * x_a * x_b` with `a <= b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearTerm {
    pub coef: f64,
    pub a: VarId,
    pub b: VarId,
}

impl BilinearTerm {
    pub fn new(coef: f64, x: VarId, y: VarId) -> Self {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        BilinearTerm { coef, a, b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "==",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub linear: LinearExpr,
    pub bilinear: Vec<BilinearTerm>,
    pub sense: Sense,
    pub rhs: f64,
    pub active: bool,
}

impl Constraint {
    pub fn linear(name: impl Into<String>, linear: LinearExpr, sense: Sense, rhs: f64) -> Self {
        Constraint { name: name.into(), linear, bilinear: Vec::new(), sense, rhs, active: true }
    }

    pub fn with_bilinear(mut self, term: BilinearTerm) -> Self {
        self.bilinear.push(term);
        self
    }

    pub fn is_linear(&self) -> bool {
        self.bilinear.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Objective {
    pub linear: LinearExpr,
    pub bilinear: Vec<BilinearTerm>,
}

/// Outcome of a feasibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// Constraint (or `bound:<var>`) with the largest violation.
    pub worst: Option<String>,
    pub worst_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Model {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    index: HashMap<String, usize>,
    pub objective: Objective,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, domain: Domain) -> Result<VarId, ModelError> {
        let name = name.into();
        let bad_binary = domain == Domain::Binary && (lower < 0.0 || upper > 1.0);
        if lower.is_nan() || upper.is_nan() || lower > upper || bad_binary {
            return Err(ModelError::InvalidBounds(name));
        }
        let id = self.variables.len();
        self.variables.push(Variable { id, name, lower, upper, domain });
        Ok(id)
    }

    pub fn continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> Result<VarId, ModelError> {
        self.add_var(name, lower, upper, Domain::Continuous)
    }

    pub fn binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, 0.0, 1.0, Domain::Binary).expect("binary bounds are valid")
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id]
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn find_var(&self, name: &str) -> Option<VarId> {
        self.variables.iter().find(|v| v.name == name).map(|v| v.id)
    }

    pub fn set_bounds(&mut self, id: VarId, lower: f64, upper: f64) -> Result<(), ModelError> {
        let var = self.variables.get_mut(id).ok_or(ModelError::UnknownVariable(id))?;
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(ModelError::InvalidBounds(var.name.clone()));
        }
        var.lower = lower;
        var.upper = upper;
        Ok(())
    }

    pub fn set_domain(&mut self, id: VarId, domain: Domain) {
        self.variables[id].domain = domain;
    }

    pub fn add_constraint(&mut self, constraint: Constraint) -> Result<usize, ModelError> {
        if self.index.contains_key(&constraint.name) {
            return Err(ModelError::DuplicateConstraint(constraint.name));
        }
        let n = self.variables.len();
        let ids = constraint.linear.terms().map(|(v, _)| v).chain(constraint.bilinear.iter().flat_map(|t| [t.a, t.b]));
        if let Some(bad) = ids.into_iter().find(|&v| v >= n) {
            return Err(ModelError::UnknownVariable(bad));
        }
        let pos = self.constraints.len();
        self.index.insert(constraint.name.clone(), pos);
        self.constraints.push(constraint);
        Ok(pos)
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraint(&self, name: &str) -> Result<&Constraint, ModelError> {
        self.index
            .get(name)
            .map(|&i| &self.constraints[i])
            .ok_or_else(|| ModelError::UnknownConstraint(name.to_string()))
    }

    pub fn constraint_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn constraint_at_mut(&mut self, index: usize) -> &mut Constraint {
        &mut self.constraints[index]
    }

    pub fn set_active(&mut self, name: &str, active: bool) -> Result<(), ModelError> {
        let i = *self.index.get(name).ok_or_else(|| ModelError::UnknownConstraint(name.to_string()))?;
        self.constraints[i].active = active;
        Ok(())
    }

    /// Drops every variable and constraint created after the given counts.
    pub fn truncate(&mut self, num_vars: usize, num_constraints: usize) {
        for c in self.constraints.drain(num_constraints..) {
            self.index.remove(&c.name);
        }
        self.variables.truncate(num_vars);
    }

    pub(crate) fn value_of(&self, point: &[f64], var: VarId) -> Result<f64, ModelError> {
        match point.get(var) {
            Some(v) if !v.is_nan() => Ok(*v),
            _ => Err(ModelError::MissingVariableValue(
                self.variables.get(var).map_or_else(|| format!("#{var}"), |v| v.name.clone()),
            )),
        }
    }

    /// Left-hand side of a constraint, linear plus bilinear part.
    pub fn lhs(&self, constraint: &Constraint, point: &[f64]) -> Result<f64, ModelError> {
        let mut lhs = constraint.linear.eval(point, self)?;
        for t in &constraint.bilinear {
            lhs += t.coef * self.value_of(point, t.a)? * self.value_of(point, t.b)?;
        }
        Ok(lhs)
    }

    pub fn constraint_residual(&self, constraint: &Constraint, point: &[f64]) -> Result<f64, ModelError> {
        let lhs = self.lhs(constraint, point)?;
        Ok(match constraint.sense {
            Sense::Le => (lhs - constraint.rhs).max(0.0),
            Sense::Eq => (lhs - constraint.rhs).abs(),
            Sense::Ge => (constraint.rhs - lhs).max(0.0),
        })
    }

    /// Violation of the named constraint at `point`.
    pub fn residual(&self, point: &[f64], name: &str) -> Result<f64, ModelError> {
        self.constraint_residual(self.constraint(name)?, point)
    }

    pub fn objective_value(&self, point: &[f64]) -> Result<f64, ModelError> {
        let mut val = self.objective.linear.eval(point, self)?;
        for t in &self.objective.bilinear {
            val += t.coef * self.value_of(point, t.a)? * self.value_of(point, t.b)?;
        }
        Ok(val)
    }

    pub fn is_feasible(&self, point: &[f64], tol: f64) -> Result<FeasibilityReport, ModelError> {
        let mut worst: Option<String> = None;
        let mut worst_residual = 0.0;
        for var in &self.variables {
            let x = self.value_of(point, var.id)?;
            let viol = (var.lower - x).max(x - var.upper).max(0.0);
            if viol > worst_residual {
                worst_residual = viol;
                worst = Some(format!("bound:{}", var.name));
            }
        }
        for c in self.constraints.iter().filter(|c| c.active) {
            let r = self.constraint_residual(c, point)?;
            if r > worst_residual {
                worst_residual = r;
                worst = Some(c.name.clone());
            }
        }
        Ok(FeasibilityReport { feasible: worst_residual <= tol, worst, worst_residual })
    }

    fn write_expr(&self, out: &mut String, linear: &LinearExpr, bilinear: &[BilinearTerm]) {
        let mut first = true;
        for (v, c) in linear.terms() {
            let sep = if first { "" } else { " + " };
            let _ = write!(out, "{sep}{c} {}", self.variables[v].name);
            first = false;
        }
        for t in bilinear {
            let sep = if first { "" } else { " + " };
            let _ = write!(out, "{sep}{} {}*{}", t.coef, self.variables[t.a].name, self.variables[t.b].name);
            first = false;
        }
        if linear.constant != 0.0 || first {
            let sep = if first { "" } else { " + " };
            let _ = write!(out, "{sep}{}", linear.constant);
        }
    }

    /// Text dump, one item per line: variables, objective, then `name: expr sense rhs`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for v in &self.variables {
            let _ = writeln!(out, "var {} [{}, {}] {:?}", v.name, v.lower, v.upper, v.domain);
        }
        out.push_str("minimize: ");
        self.write_expr(&mut out, &self.objective.linear, &self.objective.bilinear);
        out.push('\n');
        for c in &self.constraints {
            let _ = write!(out, "{}: ", c.name);
            self.write_expr(&mut out, &c.linear, &c.bilinear);
            let _ = write!(out, " {} {}", c.sense.symbol(), c.rhs);
            if !c.active {
                out.push_str(" [inactive]");
            }
            out.push('\n');
        }
        out
    }
}
