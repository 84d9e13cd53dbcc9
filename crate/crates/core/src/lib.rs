//! Discrete maximal functions, mean oscillation seminorms and weight
//! constants on uniform grids over the unit cube in one and two dimensions.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod grid;
pub mod operators;
pub mod oscillation;
pub mod report;
pub mod verify;
pub(crate) mod window;

pub use error::{Error, Result};
pub use grid::{CubeFamily, CubeSelection, GridCube, GridFunction, PrefixTable, Shape, Weight};
pub use operators::{BoundaryMode, FieldKind, MaximalField};
