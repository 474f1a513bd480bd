//! Spectral elements on triangles through the one-to-one rectangle-triangle
//! map, with the logarithmic singularity of the map removed by a
//! precomputed integral table.

pub mod assembly;
pub mod basis;
pub mod error;
pub mod mapping;
pub mod polyquad;
pub mod singular;
pub mod solver;

pub use error::{Error, Result};
