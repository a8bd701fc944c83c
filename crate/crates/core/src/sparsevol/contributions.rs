use rayon::prelude::*;

use super::voxelize::VoxelGrid;
use crate::math::{ray_box_intersect, Aabb, CameraPose, Ray, Vec3};
use crate::mesher::TriMesh;
use crate::raster::rasterize;

/// March step as a fraction of the smallest voxel edge. One sample per
/// voxel edge makes a sample weight the weight of a voxel-length segment.
pub const DEFAULT_STEP_SCALE: f64 = 1.0;

/// Tight box around all voxels with positive density.
fn density_bounds(grid: &VoxelGrid) -> Option<Aabb> {
    let n = grid.grid_n;
    let size = grid.voxel_size();
    let mut lo = [usize::MAX; 3];
    let mut hi = [0; 3];
    for (i, _) in &grid.records {
        let v = [i % n, (i / n) % n, i / (n * n)];
        for a in 0..3 {
            lo[a] = lo[a].min(v[a]);
            hi[a] = hi[a].max(v[a] + 1);
        }
    }
    (lo[0] != usize::MAX).then(|| {
        let at = |v: [usize; 3]| {
            Vec3::new(
                grid.bounds.min.x + v[0] as f64 * size.x,
                grid.bounds.min.y + v[1] as f64 * size.y,
                grid.bounds.min.z + v[2] as f64 * size.z,
            )
        };
        Aabb::new(at(lo), at(hi))
    })
}

/// Sample weights `(voxel index, T * alpha)` along one ray. Samples sit at
/// the midpoints of steps of length `delta` starting at the bounds entry;
/// the last step is shortened to end at `t_stop`.
pub fn ray_weights(
    grid: &VoxelGrid,
    ray: &Ray,
    delta: f64,
    t_stop: f64,
    hull: Option<&Aabb>,
) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let Some((t_enter, t_exit)) = ray_box_intersect(ray, &grid.bounds) else {
        return out;
    };
    let t_enter = t_enter.max(0.0);
    let t_end = t_exit.min(t_stop);
    // Skip the steps before the ray reaches any density; they add nothing.
    let first = match hull {
        Some(h) => match ray_box_intersect(ray, h) {
            Some((a, _)) => ((a - t_enter) / delta).floor().max(0.0) as usize,
            None => return out,
        },
        None => 0,
    };
    let mut transmittance = 1.0;
    let mut k = first;
    loop {
        let ta = t_enter + k as f64 * delta;
        if ta >= t_end {
            break;
        }
        let tb = (ta + delta).min(t_end);
        k += 1;
        let Some([x, y, z]) = grid.voxel_at(ray.at(0.5 * (ta + tb))) else {
            continue;
        };
        let i = grid.index(x, y, z);
        let sigma = grid.density[i] as f64;
        if sigma <= 0.0 {
            continue;
        }
        let alpha = 1.0 - (-sigma * (tb - ta)).exp();
        out.push((i, transmittance * alpha));
        transmittance *= 1.0 - alpha;
        if transmittance == 0.0 {
            break;
        }
    }
    out
}

/// Largest sample weight each voxel receives over every pixel ray of every
/// camera. Rays stop at the first mesh surface they hit.
pub fn compute_contributions(
    grid: &VoxelGrid,
    mesh: &TriMesh,
    cameras: &[CameraPose],
    step_scale: f64,
) -> Vec<f32> {
    assert!(!cameras.is_empty(), "contributions need at least one camera");
    let n = grid.grid_n;
    let mut contribution = vec![0.0f32; n * n * n];
    let Some(hull) = density_bounds(grid) else {
        return contribution;
    };
    let size = grid.voxel_size();
    let delta = size.x.min(size.y).min(size.z) * step_scale;
    for cam in cameras {
        let depth = rasterize(mesh, cam);
        let basis = cam.basis();
        let (w, h) = (cam.width as usize, cam.height as usize);
        let rows: Vec<Vec<(usize, f64)>> = (0..h)
            .into_par_iter()
            .map(|y| {
                let mut row = Vec::new();
                for x in 0..w {
                    let t_stop = depth[y * w + x].map_or(f64::INFINITY, |f| f.t);
                    let ray = basis.pixel_ray(x as u32, y as u32);
                    row.extend(ray_weights(grid, &ray, delta, t_stop, Some(&hull)));
                }
                row
            })
            .collect();
        for (i, weight) in rows.into_iter().flatten() {
            let c = &mut contribution[i];
            *c = c.max(weight as f32);
        }
    }
    contribution
}
