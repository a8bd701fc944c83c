use rayon::prelude::*;

use crate::field::{SceneDescription, N_BASIS};
use crate::math::{Aabb, Vec3};

/// Samples per voxel axis; `SUBSAMPLES^3` samples per voxel.
pub const SUBSAMPLES: usize = 4;

/// Averaged fields of one voxel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VoxelRecord {
    pub density: f32,
    pub normal: [f32; 3],
    pub diffuse: [f32; 3],
    pub tint: [f32; 3],
    pub weights: [f32; N_BASIS],
    pub metallic: f32,
}

impl VoxelRecord {
    /// Record stored for unoccupied voxels inside a brick.
    pub const EMPTY: VoxelRecord = VoxelRecord {
        density: 0.0,
        normal: [0.0, 0.0, 1.0],
        diffuse: [0.0; 3],
        tint: [0.0; 3],
        weights: [0.0; N_BASIS],
        metallic: 0.0,
    };
}

/// Voxelized volume: densities for every voxel, full records only where
/// the density is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub grid_n: usize,
    pub bounds: Aabb,
    /// Indexed `x + n * (y + n * z)`.
    pub density: Vec<f32>,
    /// Sorted by voxel index.
    pub records: Vec<(usize, VoxelRecord)>,
}

impl VoxelGrid {
    pub fn voxel_size(&self) -> Vec3 {
        self.bounds.extent() / self.grid_n as f64
    }

    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.grid_n * (y + self.grid_n * z)
    }

    pub fn record(&self, index: usize) -> VoxelRecord {
        match self.records.binary_search_by_key(&index, |r| r.0) {
            Ok(i) => self.records[i].1,
            Err(_) => VoxelRecord::EMPTY,
        }
    }

    /// Voxel containing `p`, or `None` outside the bounds.
    pub fn voxel_at(&self, p: Vec3) -> Option<[usize; 3]> {
        let rel = (p - self.bounds.min).to_array();
        let ext = self.bounds.extent().to_array();
        let mut out = [0; 3];
        for a in 0..3 {
            let f = rel[a] / ext[a] * self.grid_n as f64;
            if !(f >= 0.0) || f >= self.grid_n as f64 {
                return None;
            }
            out[a] = f as usize;
        }
        Some(out)
    }
}

/// Positions of the stratified samples inside voxel `(x, y, z)`.
pub fn sample_points(bounds: &Aabb, grid_n: usize, voxel: [usize; 3]) -> impl Iterator<Item = Vec3> {
    let size = bounds.extent() / grid_n as f64;
    let lo = bounds.min;
    let s = SUBSAMPLES;
    (0..s * s * s).map(move |k| {
        let sub = [k % s, (k / s) % s, k / (s * s)];
        let at = |a: usize| (voxel[a] as f64 + (sub[a] as f64 + 0.5) / s as f64) * size[a] + lo[a];
        Vec3::new(at(0), at(1), at(2))
    })
}

/// Voxel index range `[lo, hi)` per axis covering a box.
fn voxel_range(bounds: &Aabb, grid_n: usize, region: &Aabb) -> [std::ops::Range<usize>; 3] {
    let size = bounds.extent() / grid_n as f64;
    std::array::from_fn(|a| {
        let lo = ((region.min[a] - bounds.min[a]) / size[a]).floor().max(0.0) as usize;
        let hi = ((region.max[a] - bounds.min[a]) / size[a]).floor() + 1.0;
        lo.min(grid_n)..(hi.max(0.0) as usize).min(grid_n)
    })
}

fn average_voxel(scene: &SceneDescription, grid_n: usize, voxel: [usize; 3]) -> VoxelRecord {
    let b = &scene.bounds;
    let count = (SUBSAMPLES * SUBSAMPLES * SUBSAMPLES) as f64;
    let mut density_sum = 0.0;
    let mut normal = Vec3::ZERO;
    let mut diffuse = Vec3::ZERO;
    let mut tint = Vec3::ZERO;
    let mut weights = [0.0; N_BASIS];
    let mut metallic = 0.0;
    for p in sample_points(b, grid_n, voxel) {
        let rho = scene.density(p);
        density_sum += rho;
        if rho <= 0.0 {
            continue;
        }
        normal += crate::field::normal_at(scene, p) * rho;
        diffuse += scene.materials.diffuse.eval(p, b) * rho;
        tint += scene.materials.tint.eval(p, b) * rho;
        for (w, v) in weights.iter_mut().zip(scene.materials.weights.eval(p, b)) {
            *w += v * rho;
        }
        metallic += scene.materials.metallic.eval(p, b) * rho;
    }
    if density_sum <= 0.0 {
        return VoxelRecord::EMPTY;
    }
    let inv = 1.0 / density_sum;
    let unit = |c: f64| (c * inv).clamp(0.0, 1.0) as f32;
    let normal = if normal.length() > 0.0 { normal.normalize() } else { Vec3::Z };
    VoxelRecord {
        density: (density_sum / count) as f32,
        normal: normal.to_array().map(|c| c as f32),
        diffuse: diffuse.to_array().map(unit),
        tint: tint.to_array().map(unit),
        weights: weights.map(unit),
        metallic: unit(metallic),
    }
}

/// Averages the scene fields over `grid_n^3` voxels spanning the bounds.
/// Only voxels touching some density element's support are sampled.
pub fn voxelize(scene: &SceneDescription, grid_n: usize) -> VoxelGrid {
    assert!(grid_n > 0, "grid needs at least one voxel");
    let n = grid_n;
    let mut candidate = vec![false; n * n * n];
    for element in &scene.volume {
        let [rx, ry, rz] = voxel_range(&scene.bounds, n, &element.support(&scene.bounds));
        for z in rz.clone() {
            for y in ry.clone() {
                for x in rx.clone() {
                    candidate[x + n * (y + n * z)] = true;
                }
            }
        }
    }
    let indices: Vec<usize> = (0..n * n * n).filter(|&i| candidate[i]).collect();
    let records: Vec<(usize, VoxelRecord)> = indices
        .par_iter()
        .map(|&i| (i, average_voxel(scene, n, [i % n, (i / n) % n, i / (n * n)])))
        .filter(|(_, r)| r.density > 0.0)
        .collect();
    let mut density = vec![0.0f32; n * n * n];
    for (i, r) in &records {
        density[*i] = r.density;
    }
    VoxelGrid {
        grid_n,
        bounds: scene.bounds,
        density,
        records,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ColorField, DensityElement};

    fn scene(volume: Vec<DensityElement>) -> SceneDescription {
        SceneDescription::simple(vec![], volume)
    }

    #[test]
    fn empty_scene_has_no_density() {
        let g = voxelize(&scene(vec![]), 8);
        assert!(g.density.iter().all(|&d| d == 0.0));
        assert!(g.records.is_empty());
    }

    #[test]
    fn constant_density_is_exact() {
        let mut s = scene(vec![DensityElement::Slab {
            axis: 2,
            min: -1.0,
            max: 1.0,
            density: 7.25,
        }]);
        s.materials.diffuse = ColorField::Constant(Vec3::new(0.2, 0.4, 0.6));
        let g = voxelize(&s, 4);
        assert!(g.density.iter().all(|&d| d == 7.25));
        let r = g.record(g.index(1, 2, 3));
        assert_eq!(r.diffuse, [0.2f32, 0.4, 0.6].map(|c| (c as f64).clamp(0.0, 1.0) as f32));
        // Constant density has no gradient: the fallback normal.
        assert_eq!(r.normal, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn blob_matches_independent_average() {
        // Voxel edge 0.25; the blob sits inside voxel (4,4,4).
        let center = Vec3::new(0.1, 0.1, 0.12);
        let blob = DensityElement::Blob {
            center,
            radius: 0.1,
            density: 50.0,
        };
        let s = scene(vec![blob]);
        let g = voxelize(&s, 8);
        let mut sum = 0.0;
        for k in 0..64 {
            let (i, j, l) = (k % 4, (k / 4) % 4, k / 16);
            let p = Vec3::new(
                (i as f64 + 0.5) / 16.0,
                (j as f64 + 0.5) / 16.0,
                (l as f64 + 0.5) / 16.0,
            );
            let d = (p - center).length() / 0.1;
            if d < 1.0 {
                sum += 50.0 * (-4.5 * d * d).exp();
            }
        }
        let expect = (sum / 64.0) as f32;
        assert_eq!(g.density[g.index(4, 4, 4)], expect);
        let n = g.record(g.index(4, 4, 4)).normal;
        let len = n.iter().map(|c| c * c).sum::<f32>().sqrt();
        assert!((len - 1.0).abs() < 1e-6);
    }

    #[test]
    fn voxel_lookup() {
        let g = voxelize(&scene(vec![]), 8);
        assert_eq!(g.voxel_at(Vec3::splat(-1.0)), Some([0, 0, 0]));
        assert_eq!(g.voxel_at(Vec3::new(0.99, 0.0, -0.01)), Some([7, 4, 3]));
        assert_eq!(g.voxel_at(Vec3::splat(1.0)), None);
    }
}
