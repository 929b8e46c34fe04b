//! Euclidean construction programs: a small coordinate-free language, a
//! rejection-sampling realizer, a renderer, the built-in few-shot concept
//! library with its task generator, and the prototype-distance evaluation.

pub mod cli;
pub mod concepts;
pub mod dsl;
pub mod eval;
pub mod geom;
pub mod realize;
pub mod render;
