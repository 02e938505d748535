//! Simulation and nonparametric intensity estimation for spatial
//! birth-death-move processes.
//!
//! A birth-death-move process is a continuous-time Markov process on finite
//! point configurations: points are born, die, and move continuously between
//! these jumps. The crate provides
//!
//! * [`geometry`]: configurations, configuration distances (Hausdorff,
//!   optimal matching, cardinality) and Delaunay-based features;
//! * [`model`]: intensity functions, transition kernels, move processes and
//!   named model presets;
//! * [`simulate`]: exact trajectory simulation and discretisation into frames;
//! * [`estimate`]: kernel estimators of the birth, death and total intensities
//!   from continuous trajectories or frame sequences;
//! * [`bandwidth`]: partial-likelihood cross-validation;
//! * [`analysis`]: MSE experiments, cross-correlation and scatter exports;
//! * [`io`]: file formats and run configuration.

pub mod analysis;
pub mod bandwidth;
mod error;
pub mod estimate;
pub mod geometry;
pub mod io;
pub mod model;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
