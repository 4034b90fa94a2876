use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ColorError {
    #[error("invalid hex color {0:?}, expected #rrggbb")]
    InvalidHex(String),
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("malformed specification: {0}")]
    Json(#[from] serde_json::Error),
    #[error("specification has no views")]
    Empty,
    #[error("duplicate view id {0:?}")]
    DuplicateView(String),
    #[error("view {id:?}: {reason}")]
    InvalidView { id: String, reason: String },
    #[error("relation references unknown view {0:?}")]
    UnknownView(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("relation between {a:?} and {b:?} is ambiguous (hierarchy and redundancy both match); declare it explicitly")]
    AmbiguousRelation { a: String, b: String },
    #[error("hierarchy links contain a cycle through color group {0}")]
    CyclicHierarchy(usize),
    #[error("color group {group} has more than one hierarchy parent")]
    ConflictingHierarchy { group: usize },
    #[error("invalid relation between {a:?} and {b:?}: {reason}")]
    InvalidRelation { a: String, b: String, reason: String },
    #[error("unknown view {0:?}")]
    UnknownView(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InheritError {
    #[error("need at least two samples for a sequential colormap, got {0}")]
    TooFewSamples(usize),
    #[error("hue spread {0} outside (0, 120] degrees")]
    InvalidSpread(f64),
    #[error("parent {0:?} needs at least one child")]
    NoChildren(String),
    #[error("parent hues too close: spread would shrink to {0:.2} degrees")]
    ParentsTooClose(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("color group {0} has no root colormap")]
    MissingRoot(usize),
    #[error("color group {group} expects {expected} root colors, got {actual}")]
    RootSize { group: usize, expected: usize, actual: usize },
    #[error(transparent)]
    Inherit(#[from] InheritError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(String),
    #[error("palette library is empty")]
    NoPalettes,
    #[error("no feasible solution was found; every candidate was rejected")]
    AllRejected,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("assignment does not match the specification: {0}")]
    SchemaMismatch(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EditError {
    #[error("unknown view {0:?}")]
    UnknownView(String),
    #[error("entity {key:?} is not in the domain of view {view:?}")]
    UnknownEntity { view: String, key: String },
    #[error("entity {key:?} of view {view:?} is derived from its hierarchy parent; edit the parent color instead")]
    DerivedEntity { view: String, key: String },
    #[error("no solution is selected")]
    NoSelection,
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("params file i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed params file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum PaletteError {
    #[error("palette file i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed palette file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("palette library is empty")]
    Empty,
    #[error("palette {0:?} has no colors")]
    EmptyPalette(String),
}

impl GraphError {
    /// Stable machine-readable identifier of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::AmbiguousRelation { .. } => "ambiguous_relation",
            GraphError::CyclicHierarchy(_) => "cyclic_hierarchy",
            GraphError::ConflictingHierarchy { .. } => "conflicting_hierarchy",
            GraphError::InvalidRelation { .. } => "invalid_relation",
            GraphError::UnknownView(_) => "unknown_view",
        }
    }
}
