//! Annular domains: boundary curves, triangulation and mesh I/O.

mod build;
mod curve;
mod io;
mod mesh;

pub use build::{build_annulus_mesh, curve_distance};
pub use curve::{Curve, Shape};
pub use io::{mesh_to_string, read_mesh, write_mesh};
pub use mesh::{BoundaryCycle, BoundaryEdge, BoundaryTag, Mesh};
