//! Design and verification toolkit for a three-port parametrically pumped
//! circulator, from filter-prototype synthesis down to a lumped-element
//! conversion-matrix circuit solver.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod error;
pub mod io;
pub mod linalg;
pub mod modegraph;
pub mod parallel;
pub mod scatter;
pub mod scenario;
pub mod synthesis;
pub mod units;

pub use error::{Error, Result};
pub use modegraph::{cme_sweep, nonreciprocity_map, ModeGraph};
pub use scatter::{Channel, NonreciprocityMap, Normalization, ScatterResult};
pub use synthesis::{
    build_circulator_graph, chebyshev_prototype, reduced_parameters, Prototype, ReducedDesign,
};
