//! Sparse voxel volume: voxelization, contribution pruning, brick packing
//! and the perfect spatial hash that indexes the bricks.

mod blocks;
mod contributions;
mod occupancy;
mod psh;
mod voxelize;

pub use blocks::{build_occupancy, pack_blocks, prune, Brick, SparseVolume, DEFAULT_BLOCK, DEFAULT_PRUNE_THRESHOLD};
pub use contributions::{compute_contributions, ray_weights, DEFAULT_STEP_SCALE};
pub use occupancy::Occupancy;
pub use psh::{psh_build, psh_lookup, PshError, PshTable, PSH_SEED};
pub use voxelize::{sample_points, voxelize, VoxelGrid, VoxelRecord, SUBSAMPLES};
