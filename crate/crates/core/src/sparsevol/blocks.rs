use std::collections::BTreeMap;

use super::occupancy::Occupancy;
use super::voxelize::{VoxelGrid, VoxelRecord};
use crate::math::Aabb;

pub const DEFAULT_BLOCK: usize = 16;
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 0.01;

/// A dense `B^3` chunk of voxel records; local index `i + B * (j + B * k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Brick {
    pub coord: [u32; 3],
    pub records: Vec<VoxelRecord>,
}

/// Pruned voxels packed into bricks.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVolume {
    pub grid_n: usize,
    pub block_b: usize,
    pub bounds: Aabb,
    pub occupancy: Occupancy,
    /// Ordered by `(z, y, x)` block coordinate.
    pub blocks: Vec<Brick>,
}

impl SparseVolume {
    pub fn domain_blocks(&self) -> usize {
        self.grid_n / self.block_b
    }

    pub fn block_coords(&self) -> Vec<[u32; 3]> {
        self.blocks.iter().map(|b| b.coord).collect()
    }

    /// Record of an occupied voxel, searched through the brick list.
    pub fn record(&self, voxel: [usize; 3]) -> Option<VoxelRecord> {
        let b = self.block_b;
        let coord = voxel.map(|v| (v / b) as u32);
        let brick = self.blocks.iter().find(|br| br.coord == coord)?;
        let [i, j, k] = voxel.map(|v| v % b);
        Some(brick.records[i + b * (j + b * k)])
    }
}

/// Keeps voxels whose contribution reaches `threshold` and whose density
/// is positive.
pub fn prune(grid: &VoxelGrid, contributions: &[f32], threshold: f64) -> Occupancy {
    assert!(threshold >= 0.0, "prune threshold must be nonnegative");
    assert_eq!(contributions.len(), grid.density.len());
    let mut occ = Occupancy::empty(grid.grid_n);
    for (i, _) in &grid.records {
        if grid.density[*i] > 0.0 && contributions[*i] as f64 >= threshold {
            let [x, y, z] = occ.coords(*i);
            occ.set(x, y, z, true);
        }
    }
    occ
}

/// Groups occupied voxels into bricks; unoccupied voxels of a brick hold
/// the empty record.
pub fn pack_blocks(occupancy: &Occupancy, grid: &VoxelGrid, block_b: usize) -> SparseVolume {
    let n = grid.grid_n;
    assert!(block_b > 0 && n % block_b == 0, "grid size must be a multiple of the block size");
    assert_eq!(occupancy.grid_n, n);
    let mut bricks: BTreeMap<[u32; 3], Vec<VoxelRecord>> = BTreeMap::new();
    for i in occupancy.iter_set() {
        let v = occupancy.coords(i);
        let coord = v.map(|c| (c / block_b) as u32);
        let records = bricks
            .entry([coord[2], coord[1], coord[0]])
            .or_insert_with(|| vec![VoxelRecord::EMPTY; block_b * block_b * block_b]);
        let [li, lj, lk] = v.map(|c| c % block_b);
        records[li + block_b * (lj + block_b * lk)] = grid.record(i);
    }
    SparseVolume {
        grid_n: n,
        block_b,
        bounds: grid.bounds,
        occupancy: occupancy.clone(),
        blocks: bricks
            .into_iter()
            .map(|([z, y, x], records)| Brick {
                coord: [x, y, z],
                records,
            })
            .collect(),
    }
}

/// Occupancy bytes as stored in the container.
pub fn build_occupancy(sparse: &SparseVolume) -> Vec<u8> {
    sparse.occupancy.bytes.clone()
}
