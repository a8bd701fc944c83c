use serde::{Deserialize, Serialize};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    pub file: String,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    /// `[min, max]` per channel; `v = min + q / 255 * (max - min)`.
    pub ranges: Vec<[f32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshEntry {
    pub file: String,
    pub vertices: usize,
    pub triangles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextureEntries {
    pub size: usize,
    pub normal: MapEntry,
    pub diffuse: MapEntry,
    pub tint: MapEntry,
    pub weights: MapEntry,
    pub metallic: MapEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvEntries {
    pub edge: usize,
    /// Faces stacked top to bottom in this order.
    pub face_order: Vec<String>,
    pub maps: Vec<MapEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashEntries {
    pub m_bar: usize,
    pub r_bar: usize,
    pub r_bar_initial: usize,
    pub offsets: String,
    pub diffuse: MapEntry,
    pub tint: MapEntry,
    pub weights: MapEntry,
    pub normal: MapEntry,
    pub density_metal: MapEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeEntries {
    pub grid_n: usize,
    pub block_b: usize,
    pub n_blocks: usize,
    pub occupied_voxels: usize,
    pub occupancy: String,
    /// Absent when no voxel survived pruning.
    pub hash: Option<HashEntries>,
}

/// Fixed layout rules a reader needs besides the numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub quantization: String,
    pub uv_origin: String,
    pub normal_encoding: String,
    pub cube_map_layout: String,
    pub lut_axes: String,
    pub occupancy_bits: String,
    pub hash_function: String,
    pub brick_atlas: String,
    pub offsets_layout: String,
    pub camera_path: String,
}

impl Default for Conventions {
    fn default() -> Self {
        let s = |v: &str| v.to_string();
        Conventions {
            quantization: s("v = min + q / 255 * (max - min), per channel"),
            uv_origin: s("top-left, v grows downward, texel centers at (i + 0.5) / size"),
            normal_encoding: s("(n + 1) / 2 per component"),
            cube_map_layout: s("width edge, height 6 * edge, faces stacked in face_order; face coords (s, t): +X (-z, -y), -X (z, -y), +Y (x, z), -Y (x, -z), +Z (x, -y), -Z (-x, -y), divided by the major axis; column (s + 1) / 2 * edge, row (t + 1) / 2 * edge"),
            lut_axes: s("column u = cos theta * (size - 1), row v = metallic * (size - 1); values at nodes"),
            occupancy_bits: s("bit x + n * (y + n * z), 8 per byte, least significant bit first"),
            hash_function: s("h(p) = ((p mod m_bar) + (offsets[p mod r_bar] mod r_bar)) mod m_bar per component"),
            brick_atlas: s("width m_bar * B, height (m_bar * B)^2; voxel (i, j, k) of slot (sx, sy, sz) at x = sx * B + i, y = (sz * B + k) * m_bar * B + sy * B + j"),
            offsets_layout: s("RGB, width r_bar, height r_bar^2; entry (x, y, z) at pixel (x, z * r_bar + y)"),
            camera_path: s("one pose per line: px py pz lx ly lz ux uy uz fov_deg width height; # starts a comment"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub bounds_min: [f64; 3],
    pub bounds_max: [f64; 3],
    pub mesh: MeshEntry,
    /// Absent for an empty mesh.
    pub textures: Option<TextureEntries>,
    pub env: EnvEntries,
    pub lut: MapEntry,
    pub volume: VolumeEntries,
    pub conventions: Conventions,
}
