use thiserror::Error;

use crate::network::NodeLayer;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("node `{0}` already exists")]
    DuplicateName(String),
    #[error("invalid capacity bounds on `{0}`")]
    InvalidBounds(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("edge `{0}` -> `{1}` already exists")]
    DuplicateEdge(String, String),
    #[error("parse error at line {line}, field `{path}`: {message}")]
    Parse { line: usize, path: String, message: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("unknown constraint `{0}`")]
    UnknownConstraint(String),
    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraint(String),
    #[error("missing value for variable `{0}`")]
    MissingVariableValue(String),
    #[error("unknown variable id {0}")]
    UnknownVariable(usize),
    #[error("invalid bounds for variable `{0}`")]
    InvalidBounds(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum BuildError {
    #[error("network has no {0:?} nodes")]
    EmptyLayer(NodeLayer),
    #[error("pool `{0}` has no inbound edges, its simplex row would read 0 = 1")]
    InfeasiblePool(String),
    #[error("output `{output}` bounds quality `{quality}` which no input carries")]
    MissingQuality { output: String, quality: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, PartialEq)]
pub enum RelaxError {
    #[error("variable `{0}` appears in a bilinear term but is unbounded")]
    UnboundedBilinearVariable(String),
    #[error("new bounds for `{0}` are wider than the current ones")]
    BoundsWiden(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, PartialEq)]
pub enum CutError {
    #[error("pooling inequalities are already installed")]
    AlreadyInstalled,
    #[error("output `{0}` has no finite capacity")]
    UnboundedOutputCapacity(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, PartialEq)]
pub enum RestrictionError {
    #[error("the model already carries a restriction")]
    AlreadyRestricted,
    #[error("invalid restriction weights: {0}")]
    InvalidWeights(String),
    #[error("solution is not feasible for the restricted model: {0}")]
    InfeasibleInput(String),
    #[error("derived point violates `{0}` of the PQ model")]
    DerivationFailed(String),
    #[error("flow from pool `{0}` to output `{1}` has no finite bound")]
    UnboundedFlow(String, String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("numerical failure in the LP solver: {0}")]
    NumericalFailure(String),
    #[error("constraint `{0}` is not linear")]
    NotLinear(String),
    #[error("model has non-linear side constraint `{0}` outside the pooling block")]
    NonLinearSideConstraints(String),
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error(transparent)]
    Restriction(#[from] RestrictionError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("instance spec cannot be realised: {0}")]
    InfeasibleSpec(String),
    #[error("empty input")]
    EmptyInput,
    #[error("value {0} plus shift is not positive")]
    NonPositiveShifted(f64),
    #[error("no record for instance `{instance}` and config `{config}`")]
    MissingRecord { instance: String, config: String },
    #[error("unknown configuration `{0}`")]
    UnknownConfig(String),
    #[error("record table error: {0}")]
    Table(String),
}
