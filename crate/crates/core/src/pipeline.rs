//! End-to-end baking from an analytic scene to quantized assets.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::assets::{quantize_env, quantize_lut, MeshMaps, VMeshAssets, VolumeAssets};
use crate::field::SceneDescription;
use crate::math::{orbit_ring, CameraPose};
use crate::mesher::{bake_textures, marching_cubes, parametrize, simplify, AtlasError, BakeError, TriMesh};
use crate::refbasis::{bake_attenuation_lut, bake_env_maps, RefBasisError, DEFAULT_ENV_EDGE, DEFAULT_LUT_SIZE};
use crate::sparsevol::{
    compute_contributions, pack_blocks, prune, psh_build, voxelize, PshError, DEFAULT_BLOCK,
    DEFAULT_PRUNE_THRESHOLD, DEFAULT_STEP_SCALE,
};

#[derive(Debug, Clone, PartialEq)]
pub struct BakeOptions {
    pub grid_n: usize,
    pub block_b: usize,
    pub mc_resolution: usize,
    pub face_ratio: f64,
    pub atlas_size: usize,
    pub env_edge: usize,
    pub lut_size: usize,
    pub prune_threshold: f64,
    /// Cameras whose pixel rays decide which voxels survive pruning.
    pub cameras: Vec<CameraPose>,
}

/// Ring of poses used for pruning when no camera file is given.
pub fn default_contribution_cameras() -> Vec<CameraPose> {
    orbit_ring(20, 2.5, 20.0, 50.0, 256, 256)
}

impl Default for BakeOptions {
    fn default() -> Self {
        BakeOptions {
            grid_n: 128,
            block_b: DEFAULT_BLOCK,
            mc_resolution: 256,
            face_ratio: 0.25,
            atlas_size: 1024,
            env_edge: DEFAULT_ENV_EDGE,
            lut_size: DEFAULT_LUT_SIZE,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
            cameras: default_contribution_cameras(),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid bake options: {0}")]
    Options(String),
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Texture(#[from] BakeError),
    #[error(transparent)]
    RefBasis(#[from] RefBasisError),
    #[error(transparent)]
    Hash(#[from] PshError),
}

impl BakeOptions {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Options(m));
        if self.block_b < 2 || self.grid_n < 2 || self.grid_n % self.block_b != 0 {
            return bad(format!("grid {} must be a multiple of block {} (both at least 2)", self.grid_n, self.block_b));
        }
        if self.grid_n / self.block_b > 256 {
            return bad("more than 256 blocks per axis".into());
        }
        if self.mc_resolution < 2 || self.atlas_size < 2 || self.env_edge < 2 || self.lut_size < 2 {
            return bad("sizes must be at least 2".into());
        }
        if !(self.face_ratio > 0.0 && self.face_ratio <= 1.0) {
            return bad(format!("face ratio {} outside (0, 1]", self.face_ratio));
        }
        if !(self.prune_threshold >= 0.0) {
            return bad(format!("prune threshold {} is negative", self.prune_threshold));
        }
        if self.cameras.is_empty() {
            return bad("no contribution cameras".into());
        }
        Ok(())
    }
}

/// What a bake produced, for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct BakeReport {
    pub extracted_faces: usize,
    pub faces: usize,
    pub occupied_voxels: usize,
    pub occupied_fraction: f64,
    pub blocks: usize,
    pub m_bar: Option<usize>,
    pub r_bar: Option<usize>,
    pub timings: Vec<(&'static str, Duration)>,
}

/// Bakes the mesh, maps, cube maps, table and sparse volume of a scene.
pub fn bake_assets(scene: &SceneDescription, opts: &BakeOptions) -> Result<(VMeshAssets, BakeReport), PipelineError> {
    opts.validate()?;
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &'static str| {
        timings.push((name, clock.elapsed()));
        clock = Instant::now();
    };

    let extracted = marching_cubes(scene, opts.mc_resolution);
    let extracted_faces = extracted.triangles.len();
    let (mesh, textures) = if extracted.is_empty() {
        lap("mesh");
        (TriMesh::default(), None)
    } else {
        let simplified = simplify(&extracted, opts.face_ratio);
        let mut mesh = parametrize(&simplified, opts.atlas_size)?;
        mesh.round_to_f32();
        lap("mesh");
        let maps = bake_textures(&mesh, scene, opts.atlas_size)?;
        lap("textures");
        (mesh, Some(MeshMaps::from_textures(&maps)))
    };

    let env = bake_env_maps(scene, opts.env_edge)?;
    let lut = bake_attenuation_lut(scene.lut_kind, opts.lut_size)?;
    lap("env+lut");

    let grid = voxelize(scene, opts.grid_n);
    lap("voxelize");
    let contributions = compute_contributions(&grid, &mesh, &opts.cameras, DEFAULT_STEP_SCALE);
    lap("contributions");
    let occupancy = prune(&grid, &contributions, opts.prune_threshold);
    let sparse = pack_blocks(&occupancy, &grid, opts.block_b);
    let psh = if sparse.blocks.is_empty() {
        None
    } else {
        Some(psh_build(&sparse.block_coords(), sparse.domain_blocks())?)
    };
    let volume = VolumeAssets::from_sparse(&sparse, psh);
    lap("volume");

    let report = BakeReport {
        extracted_faces,
        faces: mesh.triangles.len(),
        occupied_voxels: occupancy.count(),
        occupied_fraction: occupancy.fraction(),
        blocks: sparse.blocks.len(),
        m_bar: volume.hash.as_ref().map(|h| h.psh.m_bar),
        r_bar: volume.hash.as_ref().map(|h| h.psh.r_bar),
        timings,
    };
    let assets = VMeshAssets {
        bounds: scene.bounds,
        mesh,
        textures,
        env_edge: env.edge,
        env: quantize_env(&env),
        lut: quantize_lut(&lut),
        volume,
    };
    Ok((assets, report))
}
