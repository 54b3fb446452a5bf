//! Neck geometry and boundary-fitted meshes of the shell.

mod mesh;
pub mod mesh_io;
mod profile;

pub(crate) use mesh::signed_area;
pub use mesh::{
    build_mesh, triangle_quality, BoundaryEdge, BoundaryTag, GradingConfig, GradingReport, Mesh,
};
pub(crate) use profile::norm;
pub use profile::{
    ball_radius, ball_volume, dist_to_flat, gap, make_profile, NeckProfile, ProfileKind,
};
