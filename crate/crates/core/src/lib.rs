//! Grid-map molecular docking kernels.
//!
//! The pipeline is: receptor -> precomputed grid maps ([`grid`]); genotype ->
//! docked coordinates ([`pose`]); docked coordinates -> score through one of
//! several interchangeable compute backends ([`scoring`]); a genetic algorithm
//! driving the search ([`ga`]); a work-stealing batch screener ([`screen`]);
//! and a benchmark harness for timing and roofline modeling ([`bench`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod energy;
pub mod error;
pub mod ga;
pub mod grid;
pub mod io;
pub mod model;
pub mod pose;
pub mod scoring;
pub mod screen;

pub use error::{Error, Result};
pub use model::{AtomParams, Coords, HbondRole, LigandTopology, NonbondPairList, ParameterTable, Protein};
pub use scoring::{BackendKind, ScoreBreakdown};
