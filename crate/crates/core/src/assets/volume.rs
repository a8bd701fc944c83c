use super::quantize::QuantizedMap;
use crate::sparsevol::{psh_lookup, Occupancy, PshTable, SparseVolume};
use crate::texture::Texture;

/// Densities are stored linearly on `[0, DENSITY_RANGE_MAX]`.
pub const DENSITY_RANGE_MAX: f32 = 200.0;

/// Brick data as 2D atlases of the `(m_bar * B)^3` slot volume.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeMaps {
    pub diffuse: QuantizedMap,
    pub tint: QuantizedMap,
    pub weights: QuantizedMap,
    /// `(n + 1) / 2` per component.
    pub normal: QuantizedMap,
    /// Density in R, metallic in G, B unused.
    pub density_metal: QuantizedMap,
}

impl VolumeMaps {
    pub fn maps(&self) -> [&QuantizedMap; 5] {
        [&self.diffuse, &self.tint, &self.weights, &self.normal, &self.density_metal]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeHash {
    pub psh: PshTable,
    pub maps: VolumeMaps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeAssets {
    pub grid_n: usize,
    pub block_b: usize,
    pub occupancy: Occupancy,
    /// Absent when nothing is occupied.
    pub hash: Option<VolumeHash>,
}

/// Atlas texel of voxel `(i, j, k)` inside the brick of slot `(sx, sy, sz)`.
#[inline]
pub fn atlas_texel(m_bar: usize, block_b: usize, slot: [usize; 3], local: [usize; 3]) -> (usize, usize) {
    let w = m_bar * block_b;
    let x = slot[0] * block_b + local[0];
    let y = (slot[2] * block_b + local[2]) * w + slot[1] * block_b + local[1];
    (x, y)
}

impl VolumeAssets {
    /// Occupied block coordinates ordered by `(z, y, x)`.
    pub fn block_coords(&self) -> Vec<[u32; 3]> {
        let b = self.block_b;
        let mut blocks: Vec<[u32; 3]> = self
            .occupancy
            .iter_set()
            .map(|i| self.occupancy.coords(i).map(|c| (c / b) as u32))
            .collect();
        blocks.sort_by_key(|c| [c[2], c[1], c[0]]);
        blocks.dedup();
        blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.block_coords().len()
    }

    /// Quantizes the bricks of a packed volume into slot-ordered atlases.
    pub fn from_sparse(sparse: &SparseVolume, psh: Option<PshTable>) -> Self {
        let hash = psh.map(|psh| {
            let b = sparse.block_b;
            let w = psh.m_bar * b;
            let atlas = |c| Texture::new(w, w * w, c);
            let (mut diffuse, mut tint, mut weights, mut normal, mut dm) =
                (atlas(3), atlas(3), atlas(4), atlas(3), atlas(3));
            for brick in &sparse.blocks {
                let slot = psh.slot_coords(psh_lookup(&psh, brick.coord));
                for (li, r) in brick.records.iter().enumerate() {
                    let local = [li % b, (li / b) % b, li / (b * b)];
                    let (x, y) = atlas_texel(psh.m_bar, b, slot, local);
                    diffuse.texel_mut(x, y).copy_from_slice(&r.diffuse);
                    tint.texel_mut(x, y).copy_from_slice(&r.tint);
                    weights.texel_mut(x, y).copy_from_slice(&r.weights);
                    normal.texel_mut(x, y).copy_from_slice(&r.normal.map(|c| (c + 1.0) * 0.5));
                    dm.texel_mut(x, y).copy_from_slice(&[r.density, r.metallic, 0.0]);
                }
            }
            let q = |t: &Texture| QuantizedMap::from_texture(t, &[]);
            VolumeHash {
                maps: VolumeMaps {
                    diffuse: q(&diffuse),
                    tint: q(&tint),
                    weights: q(&weights),
                    normal: q(&normal),
                    density_metal: QuantizedMap::from_texture(
                        &dm,
                        &[Some([0.0, DENSITY_RANGE_MAX]), None, Some([0.0, 0.0])],
                    ),
                },
                psh,
            }
        });
        VolumeAssets {
            grid_n: sparse.grid_n,
            block_b: sparse.block_b,
            occupancy: sparse.occupancy.clone(),
            hash,
        }
    }
}
