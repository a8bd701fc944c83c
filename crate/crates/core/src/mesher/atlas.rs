//! Per-triangle block atlas.
//!
//! The atlas is cut into a grid of square blocks of `block` texels. Each
//! block holds two right triangles sitting in opposite corners, inset from
//! the block border and from each other, so that every triangle owns the
//! texels its bilinear footprint touches.

use thiserror::Error;

use super::mesh::TriMesh;

/// Smallest block edge in texels.
pub const MIN_BLOCK: usize = 8;
/// Inset of the right-angle corner from the block border, in texels.
const CORNER_INSET: f64 = 1.5;
/// Inset of the acute corners from the far block border, in texels.
const LEG_INSET: f64 = 3.5;

#[derive(Debug, Error, PartialEq)]
pub enum AtlasError {
    #[error("{triangles} triangles do not fit a {atlas_size}x{atlas_size} atlas; need at least {required}")]
    Capacity {
        triangles: usize,
        atlas_size: usize,
        required: usize,
    },
}

/// Block grid for a given triangle count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtlasLayout {
    pub atlas_size: usize,
    pub block: usize,
    pub blocks_per_row: usize,
}

/// Smallest atlas edge that fits `triangles` at the minimum block size.
pub fn required_atlas_size(triangles: usize) -> usize {
    let blocks = triangles.div_ceil(2);
    let mut per_row = blocks.isqrt();
    if per_row * per_row < blocks {
        per_row += 1;
    }
    per_row.max(1) * MIN_BLOCK
}

impl AtlasLayout {
    /// Picks the largest block edge that still fits every triangle.
    pub fn for_triangles(triangles: usize, atlas_size: usize) -> Result<Self, AtlasError> {
        let fits = |block: usize| {
            let per_row = atlas_size / block;
            2 * per_row * per_row >= triangles
        };
        if atlas_size < MIN_BLOCK || !fits(MIN_BLOCK) {
            return Err(AtlasError::Capacity {
                triangles,
                atlas_size,
                required: required_atlas_size(triangles),
            });
        }
        let block = (MIN_BLOCK..=atlas_size)
            .rev()
            .find(|&b| fits(b))
            .expect("minimum block fits");
        Ok(AtlasLayout {
            atlas_size,
            block,
            blocks_per_row: atlas_size / block,
        })
    }

    /// Corners of triangle `t` in texel coordinates (texel centers at +0.5).
    pub fn triangle_texels(&self, t: usize) -> [[f64; 2]; 3] {
        let b = t / 2;
        let ox = ((b % self.blocks_per_row) * self.block) as f64;
        let oy = ((b / self.blocks_per_row) * self.block) as f64;
        let s = self.block as f64;
        let (p, q) = (CORNER_INSET, LEG_INSET);
        let local = if t % 2 == 0 {
            [[p, p], [s - q, p], [p, s - q]]
        } else {
            [[s - p, s - p], [q, s - p], [s - p, q]]
        };
        local.map(|[x, y]| [ox + x, oy + y])
    }
}

/// Assigns every triangle its own UV triangle in a block atlas.
pub fn parametrize(mesh: &TriMesh, atlas_size: usize) -> Result<TriMesh, AtlasError> {
    let layout = AtlasLayout::for_triangles(mesh.triangles.len(), atlas_size)?;
    let a = atlas_size as f64;
    let uvs = (0..mesh.triangles.len())
        .map(|t| layout.triangle_texels(t).map(|[x, y]| [x / a, y / a]))
        .collect();
    Ok(TriMesh {
        vertices: mesh.vertices.clone(),
        triangles: mesh.triangles.clone(),
        uvs: Some(uvs),
    })
}
