use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use vmesh::assets::OCCUPANCY_FILE;
use vmesh::scenes;

fn vmesh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vmesh")).args(args).output().unwrap()
}

fn text(out: &Output) -> String {
    format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    )
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Bakes the hybrid scene small enough to keep the test quick.
fn bake_small(dir: &Path) -> std::path::PathBuf {
    let scene = dir.join("hybrid.scene");
    fs::write(&scene, scenes::HYBRID_DEMO).unwrap();
    let out = dir.join("assets");
    let args = [
        "bake", p(&scene), p(&out), "--grid", "64", "--mc", "96", "--atlas", "512", "--env", "32", "--lut", "32",
    ];
    let run = vmesh(&args);
    assert!(run.status.success(), "{}", text(&run));
    out
}

#[test]
fn bake_validate_info_render_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let assets = bake_small(tmp.path());

    let validate = vmesh(&["validate", p(&assets)]);
    assert_eq!(validate.status.code(), Some(0), "{}", text(&validate));

    let info = vmesh(&["info", p(&assets)]);
    assert!(info.status.success());
    let summary = text(&info);
    assert!(summary.contains("grid: 64^3, block 16"), "{summary}");
    assert!(summary.contains("hash: m_bar"), "{summary}");

    let path = tmp.path().join("two.cam");
    let cams: String = scenes::ORBIT_PATH.lines().filter(|l| !l.starts_with('#')).take(2).collect::<Vec<_>>().join("\n");
    fs::write(&path, format!("{cams}\n")).unwrap();
    let frames = tmp.path().join("frames");
    let render = vmesh(&["render", p(&assets), p(&path), p(&frames), "--width", "48", "--height", "48"]);
    assert!(render.status.success(), "{}", text(&render));
    assert!(frames.join("frame_0000.png").exists());
    assert!(frames.join("frame_0001.png").exists());

    let same = vmesh(&["compare", p(&frames), p(&frames), "--min-psnr", "90"]);
    assert_eq!(same.status.code(), Some(0), "{}", text(&same));
    assert!(text(&same).contains("99.00"));

    let scene = tmp.path().join("hybrid.scene");
    let reference = tmp.path().join("reference");
    let run = vmesh(&["reference", p(&scene), p(&path), p(&reference), "--width", "48", "--height", "48", "--steps", "64"]);
    assert!(run.status.success(), "{}", text(&run));
    let strict = vmesh(&["compare", p(&frames), p(&reference), "--min-psnr", "98"]);
    assert_eq!(strict.status.code(), Some(1), "{}", text(&strict));
}

#[test]
fn validate_reports_a_flipped_occupancy_bit() {
    let tmp = tempfile::tempdir().unwrap();
    let assets = bake_small(tmp.path());
    let occ = assets.join(OCCUPANCY_FILE);
    let mut bytes = fs::read(&occ).unwrap();
    let i = bytes.iter().position(|&b| b != 0).unwrap();
    bytes[i] ^= 1 << bytes[i].trailing_zeros();
    fs::write(&occ, bytes).unwrap();
    let out = vmesh(&["validate", p(&assets)]);
    assert_eq!(out.status.code(), Some(1), "{}", text(&out));
    assert!(text(&out).contains("FAIL occupancy popcount"), "{}", text(&out));
}

#[test]
fn input_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope");
    assert_eq!(vmesh(&["validate", p(&missing)]).status.code(), Some(2));
    assert_eq!(vmesh(&["info", p(&missing)]).status.code(), Some(2));

    let bad = tmp.path().join("bad.scene");
    fs::write(&bad, "scene {\n  volume {\n    blob radius -1\n  }\n}\n").unwrap();
    let out = vmesh(&["bake", p(&bad), p(&tmp.path().join("out"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out).starts_with("vmesh: "), "{}", text(&out));

    let scene = tmp.path().join("ok.scene");
    fs::write(&scene, scenes::MESH_ONLY).unwrap();
    let out = vmesh(&["bake", p(&scene), p(&tmp.path().join("out")), "--grid", "100", "--block", "16"]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out));

    assert_eq!(vmesh(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn mismatched_frame_sets_are_input_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    fs::create_dir_all(&a).unwrap();
    fs::create_dir_all(&b).unwrap();
    let img = vmesh::image::ImageRGBA::filled(4, 4, [0.5, 0.5, 0.5, 1.0]);
    img.save_png(&a.join("frame_0000.png")).unwrap();
    img.save_png(&a.join("frame_0001.png")).unwrap();
    img.save_png(&b.join("frame_0000.png")).unwrap();
    assert_eq!(vmesh(&["compare", p(&a), p(&b)]).status.code(), Some(2));
}
