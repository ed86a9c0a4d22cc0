//! Lévy process specifications and jump measures.

pub mod json;
pub mod measure;
pub mod spec;

pub use measure::{LampertiShape, LevyMeasure, TailFn, TailSource};
pub use spec::LevySpec;
