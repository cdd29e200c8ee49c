//! hp-version symmetric interior penalty discontinuous Galerkin discretisation
//! of the Poisson problem on polygonal meshes, together with agglomeration
//! based mesh hierarchies and two-level / W-cycle multigrid solvers.

pub mod analysis;
pub mod assembly;
pub mod dgspace;
pub mod error;
pub mod hierarchy;
mod io_util;
pub mod linalg;
pub mod mesh;
pub mod solvers;
pub mod sparse;
pub mod transfer;

pub use error::{Error, Result};
pub use io_util::write_atomic;
pub use mesh::{Face, Point2, PolyMesh, Polygon};
pub use sparse::SparseOperator;
pub use assembly::PenaltyParams;
pub use dgspace::{DGSpace, QuadratureRule};
pub use hierarchy::{Agglomeration, MeshHierarchy, QualityReport};
pub use transfer::TransferPair;
