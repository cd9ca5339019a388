//! Surface reconstruction from unstructured point clouds.
//!
//! The pipeline samples virtual camera views around the cloud, renders the
//! points into per-view depth/ID buffers, estimates per-view point
//! visibility, and solves an s-t min cut over the Delaunay tetrahedralization
//! of the cloud. The surface is the set of facets between inner and outer
//! tetrahedra, which bounds a volume and is therefore watertight.

pub mod delaunay;
pub mod error;
pub mod geom;
pub mod metrics;
pub mod ply;
pub mod predicates;
pub mod recon;
pub mod render;
pub mod synth;
pub mod view;
pub mod visibility;

pub use error::{Error, Result};
pub use geom::{Aabb, NormTransform, PointCloud, Vec3};
pub use recon::{ReconParams, TriangleMesh};
pub use view::{Intrinsics, RigidPose, VirtualView};
