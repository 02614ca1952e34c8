//! Free-flow staggered grid, porous primary mesh, box dual topology and the
//! interface facet decomposition.

pub mod basis;
pub mod boxmesh;
pub mod dual;
pub mod generate;
pub mod interface;
pub mod io;
pub mod staggered;

pub use basis::{eval_basis, BasisEval};
pub use boxmesh::{BoundaryEdge, BoxMesh, Element};
pub use dual::{BoundarySubface, DualTopology, Scv, Scvf};
pub use generate::{generate_pm_grid, GridKind, InterfaceSide, PmGridSpec};
pub use interface::{intersect_interface, InterfaceFacet};
pub use staggered::{markers, Cell, Face, StaggeredGrid};

use crate::error::Result;
use crate::geometry::Rect;
use crate::scalar::Scalar;

/// Uniform staggered grid over `domain`.
pub fn build_structured_grid<T: Scalar>(domain: Rect<T>, nx: usize, ny: usize) -> Result<StaggeredGrid<T>> {
    StaggeredGrid::new(domain, nx, ny)
}

/// Dual topology of a box mesh.
pub fn build_dual_topology<T: Scalar>(mesh: &BoxMesh<T>) -> Result<DualTopology<T>> {
    DualTopology::build(mesh)
}
