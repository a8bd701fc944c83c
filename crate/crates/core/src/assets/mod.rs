//! The quantized on-disk container.

mod container;
mod manifest;
mod quantize;
mod volume;

pub use container::{
    check_against, load_container, load_unchecked, quantize_env, quantize_lut, read_manifest, save_container, AssetError,
    MeshMaps, VMeshAssets, Violation, MESH_FILE, OCCUPANCY_FILE, OFFSETS_FILE,
};
pub use manifest::*;
pub use quantize::{dequantize, quantization_bound, quantize, QuantizedMap};
pub use volume::{atlas_texel, VolumeAssets, VolumeHash, VolumeMaps, DENSITY_RANGE_MAX};
