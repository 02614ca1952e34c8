//! Coupled free-flow / porous-medium finite-volume solver.
//!
//! The free flow is discretised with a staggered (MAC) scheme on an
//! axis-aligned grid, the porous medium with a vertex-centred box scheme on
//! triangles and quadrilaterals. The two meshes may be non-matching along the
//! interface; exchange happens on the facets of the overlap decomposition.
//! All discrete equations are solved monolithically with Newton's method.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the type
//! aliases at the crate root fix it to `f64`, which every tolerance in the
//! test suite assumes.

pub mod coupling;
pub mod error;
pub mod freeflow;
pub mod geometry;
pub mod mesh;
pub mod porous;
pub mod quadrature;
pub mod scalar;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{Axis, Point, Rect, Tensor};
pub use scalar::Scalar;

/// Default working precision.
pub type Real = f64;

pub type Vec2 = geometry::Point<Real>;
pub type Grid = mesh::StaggeredGrid<Real>;
pub type PmMesh = mesh::BoxMesh<Real>;
pub type Dual = mesh::DualTopology<Real>;
pub type Problem = solver::CoupledProblem<Real>;
pub type State = solver::SystemState<Real>;
pub type Manufactured = verify::ManufacturedCase<Real>;
