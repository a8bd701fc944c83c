//! Surface extraction, simplification, UV atlas and texture baking.

mod atlas;
mod bake;
mod marching;
mod mesh;
mod simplify;

pub use atlas::{parametrize, required_atlas_size, AtlasError, AtlasLayout, MIN_BLOCK};
pub use bake::{bake_textures, decode_normal, encode_normal, BakeError, MeshTextures, GUTTER_RINGS};
pub use marching::{marching_cubes, MIN_TRIANGLE_AREA};
pub use mesh::{MeshError, TriMesh};
pub use simplify::{simplify, Quadric};
