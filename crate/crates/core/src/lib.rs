//! Colormap generation and evaluation for multiple-view visualizations.
//!
//! A specification ([`MvSpec`]) is turned into a graph of views, color
//! groups and hierarchy links ([`MvGraph`]); the genetic search in
//! [`optimizer`] returns a Pareto front of assignments trading single-view
//! effectiveness against cross-view consistency, and [`evaluator`] scores
//! any assignment.

pub mod color;
pub mod document;
pub mod error;
pub mod evaluator;
pub mod graph;
pub mod metrics;
pub mod optimizer;
pub mod palette;
pub mod params;
pub mod session;
pub mod spec;

pub use color::{ciede2000, Color};
pub use document::{Assignment, ResultDoc};
pub use error::{ColorError, DecodeError, EditError, EvalError, GraphError, InheritError, OptimizeError, PaletteError, ParamsError, SpecError};
pub use evaluator::EvalReport;
pub use graph::{build_graph, MvGraph};
pub use metrics::{Applicable, Colormap, CostVector, Weights};
pub use optimizer::{optimize, GaConfig, OptimizeResult, ParetoFront, Solution};
pub use palette::PaletteLibrary;
pub use params::ParamsStore;
pub use session::Session;
pub use spec::MvSpec;
