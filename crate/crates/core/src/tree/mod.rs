//! Trees with a distinguished ray, finite windows and their geometry.

mod address;
mod spec;
mod triangle;
mod window;

pub use address::VertexAddress;
pub use spec::{Override, Segment, ValenceSpec};
pub use triangle::{ModTriangleRef, TriangleRef};
pub use window::{TreeWindow, VertexId, DEFAULT_VERTEX_CAP};
