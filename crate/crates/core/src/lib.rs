//! Exact evaluation of triangular, base, kernel and ball maximal operators on
//! finite windows of locally finite trees, with certificates that windowed
//! suprema are global suprema.

pub mod error;
pub mod function;
pub mod levelset;
pub mod ops;
pub mod rational;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use function::SparseFunction;
pub use rational::Rational;
pub use tree::{ModTriangleRef, TreeWindow, TriangleRef, ValenceSpec, VertexAddress, VertexId};
