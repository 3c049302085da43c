//! Spline-partition Markov process over labeled 2-D point sets: random
//! Bézier cuts, a sequential Monte Carlo posterior sampler, shape
//! extraction from sampled partitions, and evaluation utilities.

pub mod cutgen;
pub mod data;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod inference;
pub mod model;
pub mod partition;
pub mod registry;
pub mod rng;
pub mod shape;

pub use error::{Result, SmspError};
