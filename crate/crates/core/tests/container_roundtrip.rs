use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use vmesh::assets::{
    load_container, read_manifest, save_container, AssetError, VMeshAssets, MANIFEST_FILE, OCCUPANCY_FILE,
    OFFSETS_FILE,
};
use vmesh::field::parse_scene;
use vmesh::image::{read_png, write_png};
use vmesh::math::orbit_ring;
use vmesh::pipeline::{bake_assets, BakeOptions};
use vmesh::renderer::{RenderConfig, Renderer};
use vmesh::scenes;
use vmesh::sparsevol::psh_lookup;

fn small_options() -> BakeOptions {
    BakeOptions {
        grid_n: 64,
        mc_resolution: 96,
        atlas_size: 512,
        env_edge: 32,
        lut_size: 32,
        cameras: orbit_ring(8, 2.5, 20.0, 50.0, 96, 96),
        ..BakeOptions::default()
    }
}

fn hybrid() -> &'static VMeshAssets {
    static ASSETS: OnceLock<VMeshAssets> = OnceLock::new();
    ASSETS.get_or_init(|| {
        let scene = parse_scene(scenes::HYBRID_DEMO).unwrap();
        bake_assets(&scene, &small_options()).unwrap().0
    })
}

fn saved() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    save_container(hybrid(), dir.path()).unwrap();
    dir
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn save_load_save_is_byte_identical() {
    let first = saved();
    let loaded = load_container(first.path()).unwrap();
    assert_eq!(&loaded, hybrid());
    let second = tempfile::tempdir().unwrap();
    save_container(&loaded, second.path()).unwrap();
    assert_eq!(files(first.path()), files(second.path()));
}

#[test]
fn loaded_container_renders_identically() {
    let dir = saved();
    let loaded = load_container(dir.path()).unwrap();
    let cfg = RenderConfig::default();
    let (before, after) = (Renderer::new(hybrid()), Renderer::new(&loaded));
    for cam in orbit_ring(3, 2.5, 20.0, 50.0, 64, 64) {
        assert_eq!(before.render_frame(&cam, &cfg), after.render_frame(&cam, &cfg));
    }
}

#[test]
fn every_stored_block_hashes_to_its_own_slot() {
    let volume = &hybrid().volume;
    let psh = &volume.hash.as_ref().unwrap().psh;
    let coords = volume.block_coords();
    assert!(!coords.is_empty());
    let slots: HashSet<usize> = coords.iter().map(|&c| psh_lookup(psh, c)).collect();
    assert_eq!(slots.len(), coords.len());
}

#[test]
fn flipped_occupancy_bit_fails_popcount() {
    let dir = saved();
    let path = dir.path().join(OCCUPANCY_FILE);
    let mut bytes = fs::read(&path).unwrap();
    let i = bytes.iter().position(|&b| b != 0).unwrap();
    bytes[i] ^= bytes[i] & bytes[i].wrapping_neg();
    fs::write(&path, bytes).unwrap();
    match load_container(dir.path()) {
        Err(AssetError::Invariant { check, .. }) => assert_eq!(check, "occupancy popcount"),
        other => panic!("expected a popcount failure, got {other:?}"),
    }
}

#[test]
fn tampered_offsets_are_rejected() {
    let dir = saved();
    let psh = &hybrid().volume.hash.as_ref().unwrap().psh;
    let coords = hybrid().volume.block_coords();
    let r = psh.r_bar as u32;
    let entry = |c: [u32; 3]| (c[0] % r + r * (c[1] % r + r * (c[2] % r))) as usize;
    // Move one block onto the slot of a block from another bucket.
    let tampered = coords
        .iter()
        .flat_map(|&a| coords.iter().map(move |&b| (a, b)))
        .filter(|(a, b)| entry(*a) != entry(*b))
        .find_map(|(a, b)| {
            let mut t = psh.clone();
            let target = psh_lookup(psh, a);
            for o in 0..r.pow(3) {
                t.offsets[entry(b)] = [o % r, o / r % r, o / (r * r)].map(|v| v as u8);
                if psh_lookup(&t, b) == target {
                    return Some(t);
                }
            }
            None
        })
        .expect("some offset change collides");

    let path = dir.path().join(OFFSETS_FILE);
    let png = read_png(&path).unwrap();
    let data: Vec<u8> = tampered.offsets.iter().flatten().copied().collect();
    assert_eq!(data.len(), png.data.len());
    write_png(&path, png.width, png.height, 3, &data).unwrap();
    match load_container(dir.path()) {
        Err(AssetError::Invariant { check, .. }) => assert_eq!(check, "psh injectivity"),
        other => panic!("expected an injectivity failure, got {other:?}"),
    }
}

#[test]
fn unknown_version_is_rejected() {
    let dir = saved();
    let path = dir.path().join(MANIFEST_FILE);
    let mut json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    json["version"] = 7.into();
    fs::write(&path, json.to_string()).unwrap();
    assert!(matches!(
        read_manifest(dir.path()),
        Err(AssetError::UnsupportedVersion { found: 7 })
    ));
    assert!(matches!(
        load_container(dir.path()),
        Err(AssetError::UnsupportedVersion { found: 7 })
    ));
}

#[test]
fn missing_map_is_named() {
    let dir = saved();
    fs::remove_file(dir.path().join("vol_tint.png")).unwrap();
    match load_container(dir.path()) {
        Err(AssetError::MissingFile(p)) => assert!(p.ends_with("vol_tint.png"), "{p}"),
        other => panic!("expected a missing file, got {other:?}"),
    }
}

#[test]
fn manifest_documents_conventions() {
    let dir = saved();
    let text = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in [
        "quantization",
        "uv_origin",
        "normal_encoding",
        "cube_map_layout",
        "occupancy_bits",
        "hash_function",
        "brick_atlas",
        "camera_path",
    ] {
        assert!(json["conventions"][key].is_string(), "{key}");
    }
    let m = read_manifest(dir.path()).unwrap();
    assert_eq!(m.volume.grid_n, 64);
    assert_eq!(m.volume.block_b, 16);
    let h = m.volume.hash.unwrap();
    let psh = &hybrid().volume.hash.as_ref().unwrap().psh;
    assert_eq!((h.m_bar, h.r_bar), (psh.m_bar, psh.r_bar));
}
