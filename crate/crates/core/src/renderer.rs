//! Deterministic CPU version of the four-pass renderer: box interval,
//! mesh G-buffer with RefBasis shading, guarded sparse-volume march, and
//! compositing.

use rayon::prelude::*;

use crate::assets::{atlas_texel, VMeshAssets};
use crate::image::ImageRGBA;
use crate::math::{ray_box_intersect, Aabb, CameraPose, Ray, Rgb, Vec3};
use crate::mesher::{decode_normal, TriMesh};
use crate::raster::rasterize;
use crate::refbasis::{shade, AttenuationLut, CubeMapSet, MaterialSample};
use crate::sparsevol::{psh_lookup, Occupancy, PshTable};
use crate::texture::Texture;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    /// March step as a fraction of the smallest voxel edge.
    pub step_scale: f64,
    pub early_stop_transmittance: f64,
    /// Straight (not premultiplied) RGBA.
    pub background: [f64; 4],
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            step_scale: 0.5,
            early_stop_transmittance: 1e-3,
            background: [0.0; 4],
        }
    }
}

struct MeshLayer {
    mesh: TriMesh,
    normal: Texture,
    diffuse: Texture,
    tint: Texture,
    weights: Texture,
    metallic: Texture,
}

struct VolumeLayer {
    grid_n: usize,
    block_b: usize,
    occupancy: Occupancy,
    psh: PshTable,
    diffuse: Texture,
    tint: Texture,
    weights: Texture,
    normal: Texture,
    density_metal: Texture,
}

/// Dequantized, render-ready view of a container.
pub struct Renderer {
    bounds: Aabb,
    mesh: Option<MeshLayer>,
    volume: Option<VolumeLayer>,
    env: CubeMapSet,
    lut: AttenuationLut,
}

/// Per-pixel result of the mesh pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GSample {
    pub depth: f64,
    pub normal: Vec3,
    pub material: MaterialSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GBuffer {
    pub width: u32,
    pub height: u32,
    /// Row-major; `None` where no front face covers the pixel.
    pub samples: Vec<Option<GSample>>,
}

impl Renderer {
    pub fn new(assets: &VMeshAssets) -> Self {
        let mesh = assets.textures.as_ref().map(|t| MeshLayer {
            mesh: assets.mesh.clone(),
            normal: t.normal.to_texture(),
            diffuse: t.diffuse.to_texture(),
            tint: t.tint.to_texture(),
            weights: t.weights.to_texture(),
            metallic: t.metallic.to_texture(),
        });
        let volume = assets.volume.hash.as_ref().map(|h| VolumeLayer {
            grid_n: assets.volume.grid_n,
            block_b: assets.volume.block_b,
            occupancy: assets.volume.occupancy.clone(),
            psh: h.psh.clone(),
            diffuse: h.maps.diffuse.to_texture(),
            tint: h.maps.tint.to_texture(),
            weights: h.maps.weights.to_texture(),
            normal: h.maps.normal.to_texture(),
            density_metal: h.maps.density_metal.to_texture(),
        });
        let env = CubeMapSet::new(
            assets.env_edge,
            assets.env.iter().map(|m| m.to_texture().data).collect(),
        )
        .expect("loaded env maps have validated sizes");
        let lut = AttenuationLut::new(assets.lut.width, assets.lut.to_texture().data)
            .expect("loaded table has validated size");
        Renderer {
            bounds: assets.bounds,
            mesh,
            volume,
            env,
            lut,
        }
    }

    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    /// Rasterizes the mesh and fetches its maps at the interpolated uv.
    pub fn rasterize_mesh(&self, cam: &CameraPose) -> GBuffer {
        let n = (cam.width * cam.height) as usize;
        let Some(layer) = &self.mesh else {
            return GBuffer {
                width: cam.width,
                height: cam.height,
                samples: vec![None; n],
            };
        };
        let uvs = layer.mesh.uvs.as_ref().expect("textured mesh has uvs");
        let samples = rasterize(&layer.mesh, cam)
            .into_par_iter()
            .map(|frag| {
                let f = frag?;
                let uv = uvs[f.triangle as usize];
                let b = f.barycentric;
                let u = uv[0][0] * b[0] + uv[1][0] * b[1] + uv[2][0] * b[2];
                let v = uv[0][1] * b[0] + uv[1][1] * b[1] + uv[2][1] * b[2];
                let nrm = layer.normal.sample(u, v);
                let normal = decode_normal([nrm[0], nrm[1], nrm[2]]);
                let d = layer.diffuse.sample(u, v);
                let t = layer.tint.sample(u, v);
                Some(GSample {
                    depth: f.t,
                    normal,
                    material: MaterialSample {
                        diffuse: Vec3::new(d[0], d[1], d[2]),
                        tint: Vec3::new(t[0], t[1], t[2]),
                        weights: layer.weights.sample(u, v),
                        metallic: layer.metallic.sample(u, v)[0],
                        normal,
                    },
                })
            })
            .collect();
        GBuffer {
            width: cam.width,
            height: cam.height,
            samples,
        }
    }

    /// Premultiplied color and opacity of the volume over `[t_start, t_end]`.
    pub fn raymarch_volume(&self, ray: &Ray, t_start: f64, t_end: f64, cfg: &RenderConfig) -> (Rgb, f64) {
        let Some(vol) = &self.volume else {
            return (Vec3::ZERO, 0.0);
        };
        if !(t_end > t_start) {
            return (Vec3::ZERO, 0.0);
        }
        let n = vol.grid_n;
        let b = vol.block_b;
        let size = self.bounds.extent() / n as f64;
        let delta = size.x.min(size.y).min(size.z) * cfg.step_scale;
        let omega_o = -ray.direction;
        let mut color = Vec3::ZERO;
        let mut transmittance = 1.0;
        let mut k = 0usize;
        loop {
            let ta = t_start + k as f64 * delta;
            if ta >= t_end {
                break;
            }
            let tb = (ta + delta).min(t_end);
            k += 1;
            let Some(v) = voxel_of(&self.bounds, n, ray.at(0.5 * (ta + tb))) else {
                continue;
            };
            if !vol.occupancy.get(v[0], v[1], v[2]) {
                continue;
            }
            let slot = vol.psh.slot_coords(psh_lookup(&vol.psh, v.map(|c| (c / b) as u32)));
            let (x, y) = atlas_texel(vol.psh.m_bar, b, slot, v.map(|c| c % b));
            let dm = vol.density_metal.texel(x, y);
            let sigma = dm[0] as f64;
            let alpha = 1.0 - (-sigma * (tb - ta)).exp();
            if alpha <= 0.0 {
                continue;
            }
            let rgb = |t: &Texture| {
                let c = t.texel(x, y);
                Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64)
            };
            let nrm = vol.normal.texel(x, y);
            let normal = decode_normal([nrm[0] as f64, nrm[1] as f64, nrm[2] as f64]);
            let w = vol.weights.texel(x, y);
            let mat = MaterialSample {
                diffuse: rgb(&vol.diffuse),
                tint: rgb(&vol.tint),
                weights: [w[0] as f64, w[1] as f64, w[2] as f64, w[3] as f64],
                metallic: dm[1] as f64,
                normal,
            };
            color += shade(&mat, omega_o, &self.env, &self.lut) * (transmittance * alpha);
            transmittance *= 1.0 - alpha;
            if transmittance < cfg.early_stop_transmittance {
                break;
            }
        }
        (color, 1.0 - transmittance)
    }

    pub fn shade_surface(&self, g: &GSample, ray: &Ray) -> Rgb {
        shade(&g.material, -ray.direction, &self.env, &self.lut)
    }

    pub fn render_frame(&self, cam: &CameraPose, cfg: &RenderConfig) -> ImageRGBA {
        let gbuf = self.rasterize_mesh(cam);
        let basis = cam.basis();
        let w = cam.width;
        let pixels: Vec<[f32; 4]> = gbuf
            .samples
            .par_iter()
            .enumerate()
            .map(|(i, g)| {
                let ray = basis.pixel_ray(i as u32 % w, i as u32 / w);
                let (c_vol, m_vol) = match march_interval(&self.bounds, &ray, g.as_ref()) {
                    Some((t0, t1)) => self.raymarch_volume(&ray, t0, t1, cfg),
                    None => (Vec3::ZERO, 0.0),
                };
                let c_mesh = g.as_ref().map(|g| self.shade_surface(g, &ray));
                composite(c_vol, m_vol, c_mesh, cfg.background).map(|c| c as f32)
            })
            .collect();
        ImageRGBA::new_float(cam.width, cam.height, pixels).expect("one pixel per ray")
    }
}

/// Voxel containing `p`.
#[inline]
fn voxel_of(bounds: &Aabb, n: usize, p: Vec3) -> Option<[usize; 3]> {
    let rel = p - bounds.min;
    let ext = bounds.extent();
    let f = [rel.x / ext.x, rel.y / ext.y, rel.z / ext.z].map(|t| t * n as f64);
    if f.iter().all(|&c| c >= 0.0 && c < n as f64) {
        Some(f.map(|c| c as usize))
    } else {
        None
    }
}

/// Volume interval: box entry (not behind the camera) to the nearer of
/// box exit and surface depth.
pub fn march_interval(bounds: &Aabb, ray: &Ray, surface: Option<&GSample>) -> Option<(f64, f64)> {
    let (t0, t1) = ray_box_intersect(ray, bounds)?;
    let t0 = t0.max(0.0);
    let t1 = surface.map_or(t1, |g| t1.min(g.depth));
    (t1 > t0).then_some((t0, t1))
}

/// Volume over mesh (opaque) or over the background.
pub fn composite(c_vol: Rgb, m_vol: f64, c_mesh: Option<Rgb>, background: [f64; 4]) -> [f64; 4] {
    let keep = 1.0 - m_vol;
    match c_mesh {
        Some(c) => {
            let c = c_vol + c * keep;
            [c.x, c.y, c.z, 1.0]
        }
        None => {
            let bg = Vec3::new(background[0], background[1], background[2]) * background[3];
            let c = c_vol + bg * keep;
            [c.x, c.y, c.z, m_vol + keep * background[3]]
        }
    }
}
