//! Texture baking in UV space.

use rayon::prelude::*;
use thiserror::Error;

use super::mesh::TriMesh;
use crate::field::{SceneDescription, N_BASIS};
use crate::math::Vec3;
use crate::texture::Texture;

/// Uncovered texels within this many rings of a covered one get its value.
pub const GUTTER_RINGS: usize = 2;

/// Barycentric slack for texel centers lying on a UV edge.
const EDGE_SLACK: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum BakeError {
    #[error("mesh has no texture coordinates")]
    MissingUvs,
    #[error("texture size must be positive")]
    EmptyTexture,
}

/// The surface material maps.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshTextures {
    /// `(n + 1) / 2` per component.
    pub normal: Texture,
    pub diffuse: Texture,
    pub tint: Texture,
    pub weights: Texture,
    pub metallic: Texture,
}

impl MeshTextures {
    fn new(size: usize) -> Self {
        MeshTextures {
            normal: Texture::new(size, size, 3),
            diffuse: Texture::new(size, size, 3),
            tint: Texture::new(size, size, 3),
            weights: Texture::new(size, size, N_BASIS),
            metallic: Texture::new(size, size, 1),
        }
    }

    pub fn maps(&self) -> [&Texture; 5] {
        [&self.normal, &self.diffuse, &self.tint, &self.weights, &self.metallic]
    }

    pub fn maps_mut(&mut self) -> [&mut Texture; 5] {
        [
            &mut self.normal,
            &mut self.diffuse,
            &mut self.tint,
            &mut self.weights,
            &mut self.metallic,
        ]
    }
}

pub fn encode_normal(n: Vec3) -> [f32; 3] {
    [
        ((n.x + 1.0) * 0.5) as f32,
        ((n.y + 1.0) * 0.5) as f32,
        ((n.z + 1.0) * 0.5) as f32,
    ]
}

pub fn decode_normal(c: [f64; 3]) -> Vec3 {
    Vec3::new(2.0 * c[0] - 1.0, 2.0 * c[1] - 1.0, 2.0 * c[2] - 1.0).normalize()
}

/// Barycentric coordinates of `p` in the 2D triangle `t`.
fn barycentric_2d(t: &[[f64; 2]; 3], p: [f64; 2]) -> Option<[f64; 3]> {
    let [a, b, c] = t;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    if det == 0.0 {
        return None;
    }
    let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
    let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
    Some([1.0 - l1 - l2, l1, l2])
}

/// Texels of one triangle: `(x, y, channel values)`.
type BakedTexels = Vec<(usize, usize, [f32; 14])>;

fn bake_triangle(mesh: &TriMesh, scene: &SceneDescription, t: usize, size: usize) -> BakedTexels {
    let uv = mesh.uvs.as_ref().expect("checked by caller")[t];
    let px = uv.map(|[u, v]| [u * size as f64, v * size as f64]);
    let lo_x = px.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let hi_x = px.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    let lo_y = px.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    let hi_y = px.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
    let range = |lo: f64, hi: f64| {
        let start = (lo - 0.5).ceil().max(0.0) as usize;
        let end = ((hi - 0.5).floor() as i64).min(size as i64 - 1);
        start..(end + 1).max(start as i64) as usize
    };
    let corners = mesh.corners(t);
    let mut out = Vec::new();
    for y in range(lo_y, hi_y) {
        for x in range(lo_x, hi_x) {
            let center = [x as f64 + 0.5, y as f64 + 0.5];
            let Some(l) = barycentric_2d(&px, center) else { continue };
            if l.iter().any(|&w| w < -EDGE_SLACK) {
                continue;
            }
            let p = corners[0] * l[0] + corners[1] * l[1] + corners[2] * l[2];
            let s = scene.sample(p);
            let n = encode_normal(s.normal);
            let mut v = [0.0f32; 14];
            v[..3].copy_from_slice(&n);
            v[3..6].copy_from_slice(&s.diffuse.to_array().map(|c| c as f32));
            v[6..9].copy_from_slice(&s.tint.to_array().map(|c| c as f32));
            v[9..13].copy_from_slice(&s.weights.map(|c| c as f32));
            v[13] = s.metallic as f32;
            out.push((x, y, v));
        }
    }
    out
}

/// Nearest covered source for every texel within `rings` of coverage.
/// Ties go to the source with the smallest `(y, x)`.
pub(crate) fn dilation_sources(
    covered: &[bool],
    size: usize,
    rings: usize,
) -> Vec<Option<(usize, usize)>> {
    let mut src: Vec<Option<(usize, usize)>> = (0..size * size)
        .map(|i| covered[i].then_some((i % size, i / size)))
        .collect();
    for _ in 0..rings {
        let prev = src.clone();
        for y in 0..size {
            for x in 0..size {
                if prev[y * size + x].is_some() {
                    continue;
                }
                let mut best: Option<(i64, usize, usize)> = None;
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                        if nx < 0 || ny < 0 || nx >= size as i64 || ny >= size as i64 {
                            continue;
                        }
                        if let Some((sx, sy)) = prev[ny as usize * size + nx as usize] {
                            let d = (sx as i64 - x as i64).pow(2) + (sy as i64 - y as i64).pow(2);
                            let key = (d, sy, sx);
                            if best.is_none_or(|b| key < b) {
                                best = Some(key);
                            }
                        }
                    }
                }
                src[y * size + x] = best.map(|(_, sy, sx)| (sx, sy));
            }
        }
    }
    src
}

/// Bakes normal and material maps by evaluating the fields at the surface
/// point behind every covered texel center, then fills a gutter around
/// each UV triangle.
pub fn bake_textures(
    mesh: &TriMesh,
    scene: &SceneDescription,
    size: usize,
) -> Result<MeshTextures, BakeError> {
    if mesh.uvs.is_none() {
        return Err(BakeError::MissingUvs);
    }
    if size == 0 {
        return Err(BakeError::EmptyTexture);
    }
    let baked: Vec<BakedTexels> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| bake_triangle(mesh, scene, t, size))
        .collect();
    let mut maps = MeshTextures::new(size);
    let mut covered = vec![false; size * size];
    for (x, y, v) in baked.into_iter().flatten() {
        covered[y * size + x] = true;
        maps.normal.texel_mut(x, y).copy_from_slice(&v[..3]);
        maps.diffuse.texel_mut(x, y).copy_from_slice(&v[3..6]);
        maps.tint.texel_mut(x, y).copy_from_slice(&v[6..9]);
        maps.weights.texel_mut(x, y).copy_from_slice(&v[9..13]);
        maps.metallic.texel_mut(x, y)[0] = v[13];
    }
    let sources = dilation_sources(&covered, size, GUTTER_RINGS);
    for map in maps.maps_mut() {
        for y in 0..size {
            for x in 0..size {
                if covered[y * size + x] {
                    continue;
                }
                if let Some((sx, sy)) = sources[y * size + x] {
                    let value = map.texel(sx, sy).to_vec();
                    map.texel_mut(x, y).copy_from_slice(&value);
                }
            }
        }
    }
    Ok(maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ColorField, SdfPrimitive};
    use crate::mesher::{marching_cubes, parametrize};

    #[test]
    fn normal_encoding() {
        assert_eq!(encode_normal(Vec3::Z), [0.5, 0.5, 1.0]);
        assert_eq!(decode_normal([0.5, 0.5, 1.0]), Vec3::Z);
    }

    #[test]
    fn dilation_prefers_nearest() {
        let size = 6;
        let mut covered = vec![false; 36];
        covered[2 * 6 + 1] = true;
        covered[2 * 6 + 5] = true;
        let src = dilation_sources(&covered, size, 2);
        assert_eq!(src[2 * 6 + 2], Some((1, 2)));
        assert_eq!(src[2 * 6 + 4], Some((5, 2)));
        // equidistant: the tie goes to the smaller (y, x)
        assert_eq!(src[2 * 6 + 3], Some((1, 2)));
        assert_eq!(src[5 * 6], None);
    }

    fn sphere_scene() -> SceneDescription {
        let mut s = SceneDescription::simple(
            vec![SdfPrimitive::Sphere {
                center: Vec3::ZERO,
                radius: 0.5,
            }],
            vec![],
        );
        s.materials.diffuse = ColorField::Constant(Vec3::new(0.25, 0.5, 0.75));
        s
    }

    #[test]
    fn constant_material_and_sphere_normals() {
        let scene = sphere_scene();
        let mesh = parametrize(&marching_cubes(&scene, 16), 256).unwrap();
        let maps = bake_textures(&mesh, &scene, 256).unwrap();
        let expect = [0.25f32, 0.5, 0.75];
        let uvs = mesh.uvs.as_ref().unwrap();
        for (t, uv) in uvs.iter().enumerate() {
            let corners = mesh.corners(t);
            for l in [[1.0 / 3.0; 3], [0.6, 0.2, 0.2], [0.1, 0.1, 0.8]] {
                let u = uv[0][0] * l[0] + uv[1][0] * l[1] + uv[2][0] * l[2];
                let v = uv[0][1] * l[0] + uv[1][1] * l[1] + uv[2][1] * l[2];
                let d = maps.diffuse.sample(u, v);
                for ch in 0..3 {
                    assert_eq!(d[ch], expect[ch] as f64);
                }
                let n = maps.normal.sample(u, v);
                let p = corners[0] * l[0] + corners[1] * l[1] + corners[2] * l[2];
                let analytic = encode_normal(p.normalize());
                for ch in 0..3 {
                    assert!((n[ch] - analytic[ch] as f64).abs() <= 0.02, "{n:?} vs {analytic:?}");
                }
            }
        }
    }

    #[test]
    fn requires_uvs() {
        let scene = sphere_scene();
        let mesh = marching_cubes(&scene, 8);
        assert_eq!(bake_textures(&mesh, &scene, 64), Err(BakeError::MissingUvs));
    }
}
