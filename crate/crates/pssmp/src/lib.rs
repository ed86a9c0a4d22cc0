//! Exponential functionals of Lévy processes, quasi-stationary laws and Yaglom limits of
//! positive self-similar Markov processes.
//!
//! Every numerical type is generic over [`Real`] (`f32` or `f64`); the `*64` aliases fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cpy;
pub mod error;
pub mod expfun;
pub mod gallery;
pub mod lamperti;
pub mod levy;
pub mod mc;
pub mod mda;
pub mod norming;
pub mod path;
pub mod quad;
pub mod real;
pub mod rng;
pub mod special;
pub mod stats;
pub mod yaglom;

pub use error::{Error, Result};
pub use levy::{LampertiShape, LevyMeasure, LevySpec};
pub use real::Real;

pub type LevySpec64 = LevySpec<f64>;
pub type LevyMeasure64 = LevyMeasure<f64>;
pub type WeightedSample64 = stats::WeightedSample<f64>;
pub type SimConfig64 = path::SimConfig<f64>;
