//! Vectors, rigid transforms, the pinhole camera, triangle meshes and depth
//! images.
//!
//! Camera frames are x-right, y-down, z-forward. The robot base frame is
//! z-up; the platform normal is `[0, 0, 1]`. Integer pixel `(u, v)` has its
//! center at continuous coordinates `(u, v)`.

mod camera;
mod depth;
pub mod depth_io;
mod kdtree;
mod mesh;
pub mod mesh_io;
pub mod render;
mod transform;
mod vector;

pub use camera::PinholeCamera;
pub use depth::{nearest_surface_pixel, nearest_surface_pixel_exhaustive, DepthMap, NormalMap, SurfaceCloud};
pub use mesh::{RayHit, TriangleMesh};
pub use transform::{Frame, RigidTransform};
pub(crate) use transform::{check_rotation, row_major as transform_row_major};
pub use vector::{rotation_distance, Pixel, PixelIndex, UnitVec3, Vec3};
