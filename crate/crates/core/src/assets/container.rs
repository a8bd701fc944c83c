use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::manifest::*;
use super::quantize::QuantizedMap;
use super::volume::{VolumeAssets, VolumeHash, VolumeMaps};
use crate::field::N_BASIS;
use crate::image::{read_png, write_png, ImageError};
use crate::math::{Aabb, Vec3};
use crate::mesher::{MeshError, MeshTextures, TriMesh};
use crate::refbasis::{AttenuationLut, CubeMapSet, FACE_ORDER};
use crate::sparsevol::{psh_lookup, Occupancy, PshError, PshTable};
use crate::texture::Texture;

pub const MESH_FILE: &str = "mesh.obj";
pub const OFFSETS_FILE: &str = "offsets.png";
pub const OCCUPANCY_FILE: &str = "occupancy.bin";

#[derive(Debug, Error)]
pub enum AssetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing file {0}")]
    MissingFile(String),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("{path}: malformed manifest: {msg}")]
    Manifest { path: String, msg: String },
    #[error("unsupported manifest version {found} (this build reads version {MANIFEST_VERSION})")]
    UnsupportedVersion { found: u64 },
    #[error("dimension mismatch in {file}: expected {expected}, found {found}")]
    Dimension {
        file: String,
        expected: String,
        found: String,
    },
    #[error("{path}: {source}")]
    Mesh {
        path: String,
        #[source]
        source: MeshError,
    },
    #[error("{check} check failed: {detail}")]
    Invariant { check: &'static str, detail: String },
}

/// A failed container invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub check: &'static str,
    pub detail: String,
}

impl From<Violation> for AssetError {
    fn from(v: Violation) -> Self {
        AssetError::Invariant {
            check: v.check,
            detail: v.detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshMaps {
    pub normal: QuantizedMap,
    pub diffuse: QuantizedMap,
    pub tint: QuantizedMap,
    pub weights: QuantizedMap,
    pub metallic: QuantizedMap,
}

impl MeshMaps {
    pub fn from_textures(t: &MeshTextures) -> Self {
        let q = |tex: &Texture| QuantizedMap::from_texture(tex, &[]);
        MeshMaps {
            normal: q(&t.normal),
            diffuse: q(&t.diffuse),
            tint: q(&t.tint),
            weights: q(&t.weights),
            metallic: q(&t.metallic),
        }
    }

    pub fn maps(&self) -> [&QuantizedMap; 5] {
        [&self.normal, &self.diffuse, &self.tint, &self.weights, &self.metallic]
    }
}

/// Everything a renderer needs, in quantized form.
#[derive(Debug, Clone, PartialEq)]
pub struct VMeshAssets {
    pub bounds: Aabb,
    /// Coordinates and uvs are `f32` values.
    pub mesh: TriMesh,
    /// Absent when the mesh is empty.
    pub textures: Option<MeshMaps>,
    pub env_edge: usize,
    /// One vertical strip per basis.
    pub env: Vec<QuantizedMap>,
    pub lut: QuantizedMap,
    pub volume: VolumeAssets,
}

pub fn quantize_env(maps: &CubeMapSet) -> Vec<QuantizedMap> {
    maps.maps
        .iter()
        .map(|m| {
            let tex = Texture {
                width: maps.edge,
                height: 6 * maps.edge,
                channels: 3,
                data: m.clone(),
            };
            QuantizedMap::from_texture(&tex, &[])
        })
        .collect()
}

pub fn quantize_lut(lut: &AttenuationLut) -> QuantizedMap {
    let tex = Texture {
        width: lut.size,
        height: lut.size,
        channels: 1,
        data: lut.table.clone(),
    };
    QuantizedMap::from_texture(&tex, &[])
}

const TEXTURE_FILES: [&str; 5] = [
    "tex_normal.png",
    "tex_diffuse.png",
    "tex_tint.png",
    "tex_weights.png",
    "tex_metal.png",
];
const VOLUME_FILES: [&str; 5] = [
    "vol_diffuse.png",
    "vol_tint.png",
    "vol_weights.png",
    "vol_normal.png",
    "vol_density_metal.png",
];
const LUT_FILE: &str = "lut.png";

fn env_file(i: usize) -> String {
    format!("env_{i}.png")
}

fn entry(file: &str, map: &QuantizedMap) -> MapEntry {
    MapEntry {
        file: file.to_string(),
        width: map.width,
        height: map.height,
        channels: map.channels,
        ranges: map.ranges.clone(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AssetError + '_ {
    move |source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            AssetError::MissingFile(path.display().to_string())
        } else {
            AssetError::Io {
                path: path.display().to_string(),
                source,
            }
        }
    }
}

impl VMeshAssets {
    pub fn manifest(&self) -> Manifest {
        let textures = self.textures.as_ref().map(|t| {
            let [n, d, ti, w, m] = TEXTURE_FILES;
            TextureEntries {
                size: t.normal.width,
                normal: entry(n, &t.normal),
                diffuse: entry(d, &t.diffuse),
                tint: entry(ti, &t.tint),
                weights: entry(w, &t.weights),
                metallic: entry(m, &t.metallic),
            }
        });
        let v = &self.volume;
        let hash = v.hash.as_ref().map(|h| {
            let [d, t, w, n, dm] = VOLUME_FILES;
            HashEntries {
                m_bar: h.psh.m_bar,
                r_bar: h.psh.r_bar,
                r_bar_initial: h.psh.initial_r_bar,
                offsets: OFFSETS_FILE.to_string(),
                diffuse: entry(d, &h.maps.diffuse),
                tint: entry(t, &h.maps.tint),
                weights: entry(w, &h.maps.weights),
                normal: entry(n, &h.maps.normal),
                density_metal: entry(dm, &h.maps.density_metal),
            }
        });
        Manifest {
            version: MANIFEST_VERSION,
            bounds_min: self.bounds.min.to_array(),
            bounds_max: self.bounds.max.to_array(),
            mesh: MeshEntry {
                file: MESH_FILE.to_string(),
                vertices: self.mesh.vertices.len(),
                triangles: self.mesh.triangles.len(),
            },
            textures,
            env: EnvEntries {
                edge: self.env_edge,
                face_order: FACE_ORDER.iter().map(|s| s.to_string()).collect(),
                maps: self.env.iter().enumerate().map(|(i, m)| entry(&env_file(i), m)).collect(),
            },
            lut: entry(LUT_FILE, &self.lut),
            volume: VolumeEntries {
                grid_n: v.grid_n,
                block_b: v.block_b,
                n_blocks: v.n_blocks(),
                occupied_voxels: v.occupancy.count(),
                occupancy: OCCUPANCY_FILE.to_string(),
                hash,
            },
            conventions: Conventions::default(),
        }
    }

    /// Invariants that must hold for any valid container.
    pub fn check(&self) -> Vec<Violation> {
        check_against(self, &self.manifest())
    }
}

fn offsets_image(psh: &PshTable) -> Vec<u8> {
    // Entry (x, y, z) at pixel (x, z * r + y): the natural entry order.
    psh.offsets.iter().flat_map(|o| o.iter().copied()).collect()
}

fn write_map(dir: &Path, file: &str, map: &QuantizedMap) -> Result<(), AssetError> {
    write_png(&dir.join(file), map.width as u32, map.height as u32, map.channels, &map.data)?;
    Ok(())
}

/// Writes the container into `dir`, creating it if needed.
pub fn save_container(assets: &VMeshAssets, dir: &Path) -> Result<Manifest, AssetError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let manifest = assets.manifest();
    let write = |file: &str, bytes: &[u8]| {
        let p = dir.join(file);
        fs::write(&p, bytes).map_err(io_err(&p))
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(MANIFEST_FILE, format!("{json}\n").as_bytes())?;
    write(MESH_FILE, assets.mesh.to_obj().as_bytes())?;
    if let Some(t) = &assets.textures {
        for (file, map) in TEXTURE_FILES.iter().zip(t.maps()) {
            write_map(dir, file, map)?;
        }
    }
    for (i, map) in assets.env.iter().enumerate() {
        write_map(dir, &env_file(i), map)?;
    }
    write_map(dir, LUT_FILE, &assets.lut)?;
    write(OCCUPANCY_FILE, &assets.volume.occupancy.bytes)?;
    if let Some(h) = &assets.volume.hash {
        let r = h.psh.r_bar as u32;
        write_png(&dir.join(OFFSETS_FILE), r, r * r, 3, &offsets_image(&h.psh))?;
        for (file, map) in VOLUME_FILES.iter().zip(h.maps.maps()) {
            write_map(dir, file, map)?;
        }
    }
    Ok(manifest)
}

fn dims(w: usize, h: usize, c: usize) -> String {
    format!("{w}x{h}x{c}")
}

fn read_map(dir: &Path, e: &MapEntry) -> Result<QuantizedMap, AssetError> {
    let path = dir.join(&e.file);
    if !path.exists() {
        return Err(AssetError::MissingFile(path.display().to_string()));
    }
    let png = read_png(&path)?;
    let found = dims(png.width as usize, png.height as usize, png.channels);
    let expected = dims(e.width, e.height, e.channels);
    if found != expected || e.ranges.len() != e.channels {
        return Err(AssetError::Dimension {
            file: e.file.clone(),
            expected,
            found,
        });
    }
    Ok(QuantizedMap {
        width: e.width,
        height: e.height,
        channels: e.channels,
        ranges: e.ranges.clone(),
        data: png.data,
    })
}

fn expect_dims(file: &str, map: &QuantizedMap, w: usize, h: usize, c: usize) -> Result<(), AssetError> {
    if (map.width, map.height, map.channels) != (w, h, c) {
        return Err(AssetError::Dimension {
            file: file.to_string(),
            expected: dims(w, h, c),
            found: dims(map.width, map.height, map.channels),
        });
    }
    Ok(())
}

/// Reads just the manifest, checking its version.
pub fn read_manifest(dir: &Path) -> Result<Manifest, AssetError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let bad = |msg: String| AssetError::Manifest {
        path: path.display().to_string(),
        msg,
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let version = value
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| bad("no numeric version field".into()))?;
    if version != MANIFEST_VERSION as u64 {
        return Err(AssetError::UnsupportedVersion { found: version });
    }
    serde_json::from_value(value).map_err(|e| bad(e.to_string()))
}

fn bounds_of(m: &Manifest) -> Aabb {
    Aabb::new(Vec3::from_array(m.bounds_min), Vec3::from_array(m.bounds_max))
}

/// Reads and validates a container.
pub fn load_container(dir: &Path) -> Result<VMeshAssets, AssetError> {
    let (assets, manifest) = load_unchecked(dir)?;
    if let Some(v) = check_against(&assets, &manifest).into_iter().next() {
        return Err(v.into());
    }
    Ok(assets)
}

/// Reads a container, checking only file presence, format and dimensions.
/// Pair with [`check_against`] for the invariants.
pub fn load_unchecked(dir: &Path) -> Result<(VMeshAssets, Manifest), AssetError> {
    let manifest = read_manifest(dir)?;
    let mesh_path: PathBuf = dir.join(&manifest.mesh.file);
    let obj = fs::read_to_string(&mesh_path).map_err(io_err(&mesh_path))?;
    let mesh = TriMesh::from_obj(&obj).map_err(|source| AssetError::Mesh {
        path: mesh_path.display().to_string(),
        source,
    })?;

    let textures = match &manifest.textures {
        Some(t) => {
            let maps = MeshMaps {
                normal: read_map(dir, &t.normal)?,
                diffuse: read_map(dir, &t.diffuse)?,
                tint: read_map(dir, &t.tint)?,
                weights: read_map(dir, &t.weights)?,
                metallic: read_map(dir, &t.metallic)?,
            };
            let channels = [3, 3, 3, N_BASIS, 1];
            for ((map, c), e) in maps.maps().into_iter().zip(channels).zip([
                &t.normal, &t.diffuse, &t.tint, &t.weights, &t.metallic,
            ]) {
                expect_dims(&e.file, map, t.size, t.size, c)?;
            }
            Some(maps)
        }
        None => None,
    };

    let edge = manifest.env.edge;
    if manifest.env.maps.len() != N_BASIS {
        return Err(AssetError::Dimension {
            file: MANIFEST_FILE.into(),
            expected: format!("{N_BASIS} environment maps"),
            found: manifest.env.maps.len().to_string(),
        });
    }
    let mut env = Vec::with_capacity(N_BASIS);
    for e in &manifest.env.maps {
        let map = read_map(dir, e)?;
        expect_dims(&e.file, &map, edge, 6 * edge, 3)?;
        env.push(map);
    }
    let lut = read_map(dir, &manifest.lut)?;
    expect_dims(&manifest.lut.file, &lut, lut.width, lut.width, 1)?;

    let v = &manifest.volume;
    let sizes_ok = v.block_b > 0
        && v.grid_n % v.block_b == 0
        && v.hash.as_ref().is_none_or(|h| h.m_bar > 0 && h.r_bar > 0 && h.r_bar <= 256);
    if !sizes_ok {
        return Err(AssetError::Dimension {
            file: MANIFEST_FILE.into(),
            expected: "grid a multiple of a positive block size, positive table sizes".into(),
            found: format!("grid {} block {}", v.grid_n, v.block_b),
        });
    }
    let occ_path = dir.join(&v.occupancy);
    let bytes = fs::read(&occ_path).map_err(io_err(&occ_path))?;
    let expected_len = (v.grid_n * v.grid_n * v.grid_n).div_ceil(8);
    let found_len = bytes.len();
    let occupancy = Occupancy::from_bytes(v.grid_n, bytes).ok_or_else(|| AssetError::Dimension {
        file: v.occupancy.clone(),
        expected: format!("{expected_len} bytes"),
        found: format!("{found_len} bytes"),
    })?;
    let mut volume = VolumeAssets {
        grid_n: v.grid_n,
        block_b: v.block_b,
        occupancy,
        hash: None,
    };
    if let Some(h) = &v.hash {
        let path = dir.join(&h.offsets);
        if !path.exists() {
            return Err(AssetError::MissingFile(path.display().to_string()));
        }
        let png = read_png(&path)?;
        let r = h.r_bar;
        if (png.width as usize, png.height as usize, png.channels) != (r, r * r, 3) {
            return Err(AssetError::Dimension {
                file: h.offsets.clone(),
                expected: dims(r, r * r, 3),
                found: dims(png.width as usize, png.height as usize, png.channels),
            });
        }
        let offsets = png.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        let mut psh = PshTable {
            m_bar: h.m_bar,
            r_bar: r,
            offsets,
            slots: vec![None; h.m_bar.pow(3)],
            initial_r_bar: h.r_bar_initial,
        };
        let coords = volume.block_coords();
        for (i, &c) in coords.iter().enumerate() {
            let slot = psh_lookup(&psh, c);
            if let Some(s) = psh.slots.get_mut(slot) {
                *s = Some(i as u32);
            }
        }
        let w = h.m_bar * v.block_b;
        let maps = VolumeMaps {
            diffuse: read_map(dir, &h.diffuse)?,
            tint: read_map(dir, &h.tint)?,
            weights: read_map(dir, &h.weights)?,
            normal: read_map(dir, &h.normal)?,
            density_metal: read_map(dir, &h.density_metal)?,
        };
        let channels = [3, 3, N_BASIS, 3, 3];
        for ((map, c), e) in maps.maps().into_iter().zip(channels).zip([
            &h.diffuse, &h.tint, &h.weights, &h.normal, &h.density_metal,
        ]) {
            expect_dims(&e.file, map, w, w * w, c)?;
        }
        volume.hash = Some(VolumeHash { psh, maps });
    }

    let assets = VMeshAssets {
        bounds: bounds_of(&manifest),
        mesh,
        textures,
        env_edge: edge,
        env,
        lut,
        volume,
    };
    Ok((assets, manifest))
}

fn psh_violation(e: &PshError) -> Violation {
    Violation {
        check: "psh injectivity",
        detail: e.to_string(),
    }
}

/// Checks the assets against a manifest describing them.
pub fn check_against(a: &VMeshAssets, m: &Manifest) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut fail = |check: &'static str, detail: String| out.push(Violation { check, detail });

    if m.mesh.vertices != a.mesh.vertices.len() || m.mesh.triangles != a.mesh.triangles.len() {
        fail(
            "manifest consistency",
            format!(
                "mesh has {} vertices and {} triangles, manifest lists {} and {}",
                a.mesh.vertices.len(),
                a.mesh.triangles.len(),
                m.mesh.vertices,
                m.mesh.triangles
            ),
        );
    }
    if let Err(e) = a.mesh.validate() {
        fail("manifest consistency", format!("mesh: {e}"));
    }
    if a.mesh.triangles.is_empty() != a.textures.is_none() {
        fail("manifest consistency", "textures must be present exactly when the mesh is non-empty".into());
    }
    if !a.mesh.triangles.is_empty() && a.mesh.uvs.is_none() {
        fail("manifest consistency", "mesh has no texture coordinates".into());
    }

    let mut maps: Vec<&QuantizedMap> = a.env.iter().collect();
    maps.push(&a.lut);
    if let Some(t) = &a.textures {
        maps.extend(t.maps());
    }
    if let Some(h) = &a.volume.hash {
        maps.extend(h.maps.maps());
    }
    for map in maps {
        if map.ranges.len() != map.channels
            || map.ranges.iter().any(|[lo, hi]| !lo.is_finite() || !hi.is_finite() || lo > hi)
        {
            fail("quantization ranges", format!("invalid ranges {:?}", map.ranges));
        }
        if map.data.len() != map.width * map.height * map.channels {
            fail("manifest consistency", "map payload size disagrees with its dimensions".into());
        }
    }

    let v = &a.volume;
    if v.block_b == 0 || v.grid_n % v.block_b != 0 {
        fail("manifest consistency", format!("grid {} is not a multiple of block {}", v.grid_n, v.block_b));
        return out;
    }
    let popcount = v.occupancy.count();
    if popcount != m.volume.occupied_voxels {
        fail(
            "occupancy popcount",
            format!("{popcount} occupancy bits set, manifest lists {} occupied voxels", m.volume.occupied_voxels),
        );
    }
    let coords = v.block_coords();
    if coords.len() != m.volume.n_blocks {
        fail(
            "brick coverage",
            format!("occupied voxels span {} blocks, manifest lists {} bricks", coords.len(), m.volume.n_blocks),
        );
    }
    match &v.hash {
        None if !coords.is_empty() => {
            fail("brick coverage", format!("{} occupied blocks but no brick table", coords.len()));
        }
        Some(h) => {
            if h.psh.m_bar.pow(3) < coords.len() {
                fail("brick coverage", format!("{} blocks exceed {} slots", coords.len(), h.psh.m_bar.pow(3)));
            } else if let Err(e) = h.psh.verify(&coords) {
                out.push(psh_violation(&e));
            }
        }
        None => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_pixel_order() {
        // entry (x, y, z) = x + r * (y + r * z) lands at row z * r + y
        let r = 3;
        let offsets: Vec<[u8; 3]> = (0..27).map(|i| [i as u8, 0, 0]).collect();
        let psh = PshTable {
            m_bar: 4,
            r_bar: r,
            offsets,
            slots: vec![None; 64],
            initial_r_bar: r,
        };
        let img = offsets_image(&psh);
        let (x, y, z) = (2usize, 1usize, 2usize);
        let row = z * r + y;
        assert_eq!(img[(row * r + x) * 3] as usize, x + r * (y + r * z));
    }
}
