//! Commands behind the `vmesh` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use vmesh::assets::{
    check_against, load_container, load_unchecked, read_manifest, save_container, AssetError, Manifest,
};
use vmesh::field::{parse_scene, render_reference, SceneDescription, DEFAULT_REFERENCE_STEPS};
use vmesh::image::{psnr, ImageRGBA};
use vmesh::math::{parse_camera_path, CameraPose};
use vmesh::pipeline::{bake_assets, BakeOptions};
use vmesh::renderer::{RenderConfig, Renderer};

#[derive(Debug, Parser)]
#[command(name = "vmesh", version, about = "Bake and render hybrid volume-mesh assets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bake a scene file into an asset container.
    Bake(BakeArgs),
    /// Render every pose of a camera path from a container.
    Render(RenderArgs),
    /// Render a camera path straight from the analytic scene.
    Reference(ReferenceArgs),
    /// Check a container's invariants.
    Validate { assets: PathBuf },
    /// PSNR between two directories of frames.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        min_psnr: f64,
    },
    /// Summarize a container.
    Info { assets: PathBuf },
}

#[derive(Debug, Args)]
pub struct BakeArgs {
    pub scene: PathBuf,
    pub out: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    #[arg(long, default_value_t = 16)]
    pub block: usize,
    #[arg(long, default_value_t = 256)]
    pub mc: usize,
    #[arg(long, default_value_t = 0.25)]
    pub faces: f64,
    #[arg(long, default_value_t = 1024)]
    pub atlas: usize,
    #[arg(long, default_value_t = 512)]
    pub env: usize,
    #[arg(long, default_value_t = 256)]
    pub lut: usize,
    #[arg(long, default_value_t = 0.01)]
    pub prune: f64,
    /// Camera path used for pruning instead of the default ring.
    #[arg(long)]
    pub cams: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub assets: PathBuf,
    pub campath: PathBuf,
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
    /// Overrides the width in the camera path.
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
}

#[derive(Debug, Args)]
pub struct ReferenceArgs {
    pub scene: PathBuf,
    pub campath: PathBuf,
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_REFERENCE_STEPS)]
    pub steps: usize,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
}

/// A command failure and its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad usage or unreadable input: exit 2.
    Input(String),
    /// An invariant or comparison did not hold: exit 1.
    Check(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Check(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Check(m) => m,
        }
    }
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bake(a) => bake(&a),
        Command::Render(a) => render(&a),
        Command::Reference(a) => reference(&a),
        Command::Validate { assets } => validate(&assets),
        Command::Compare { a, b, min_psnr } => compare(&a, &b, min_psnr),
        Command::Info { assets } => info(&assets),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_scene(path: &Path) -> Result<SceneDescription, Failure> {
    parse_scene(&read_text(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_cameras(path: &Path, width: Option<u32>, height: Option<u32>) -> Result<Vec<CameraPose>, Failure> {
    let cams = parse_camera_path(&read_text(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if cams.is_empty() {
        return Err(Failure::Input(format!("{}: no cameras", path.display())));
    }
    Ok(cams
        .into_iter()
        .map(|c| c.with_size(width.unwrap_or(c.width), height.unwrap_or(c.height)))
        .collect())
}

pub fn frame_name(i: usize) -> String {
    format!("frame_{i:04}.png")
}

fn bake(a: &BakeArgs) -> Result<(), Failure> {
    let scene = load_scene(&a.scene)?;
    let mut opts = BakeOptions {
        grid_n: a.grid,
        block_b: a.block,
        mc_resolution: a.mc,
        face_ratio: a.faces,
        atlas_size: a.atlas,
        env_edge: a.env,
        lut_size: a.lut,
        prune_threshold: a.prune,
        ..BakeOptions::default()
    };
    if let Some(path) = &a.cams {
        opts.cameras = load_cameras(path, None, None)?;
    }
    let start = Instant::now();
    let (assets, report) = bake_assets(&scene, &opts).map_err(input)?;
    let manifest = save_container(&assets, &a.out).map_err(input)?;
    println!("faces: {} (extracted {})", report.faces, report.extracted_faces);
    println!(
        "occupied voxels: {} ({:.4}% of {}^3)",
        report.occupied_voxels,
        100.0 * report.occupied_fraction,
        opts.grid_n
    );
    println!("blocks: {}", report.blocks);
    match (report.m_bar, report.r_bar) {
        (Some(m), Some(r)) => println!("hash: m_bar {m}, r_bar {r}"),
        _ => println!("hash: none"),
    }
    for (stage, t) in &report.timings {
        println!("time {stage}: {:.2}s", t.as_secs_f64());
    }
    print_storage(&a.out, &manifest);
    println!("total: {:.2}s", start.elapsed().as_secs_f64());
    Ok(())
}

fn payload_files(m: &Manifest) -> Vec<String> {
    let mut files = vec![vmesh::assets::MANIFEST_FILE.to_string(), m.mesh.file.clone()];
    if let Some(t) = &m.textures {
        files.extend([&t.normal, &t.diffuse, &t.tint, &t.weights, &t.metallic].map(|e| e.file.clone()));
    }
    files.extend(m.env.maps.iter().map(|e| e.file.clone()));
    files.push(m.lut.file.clone());
    files.push(m.volume.occupancy.clone());
    if let Some(h) = &m.volume.hash {
        files.push(h.offsets.clone());
        files.extend([&h.diffuse, &h.tint, &h.weights, &h.normal, &h.density_metal].map(|e| e.file.clone()));
    }
    files
}

fn print_storage(dir: &Path, m: &Manifest) {
    let mut total = 0;
    for f in payload_files(m) {
        let bytes = fs::metadata(dir.join(&f)).map(|md| md.len()).unwrap_or(0);
        total += bytes;
        println!("  {f}: {bytes} bytes");
    }
    println!("  total: {total} bytes");
}

fn render(a: &RenderArgs) -> Result<(), Failure> {
    if !(a.step > 0.0 && a.step <= 1.0) {
        return Err(Failure::Input(format!("step {} outside (0, 1]", a.step)));
    }
    let assets = load_container(&a.assets).map_err(input)?;
    let cams = load_cameras(&a.campath, a.width, a.height)?;
    fs::create_dir_all(&a.out).map_err(|e| Failure::Input(format!("{}: {e}", a.out.display())))?;
    let renderer = Renderer::new(&assets);
    let cfg = RenderConfig {
        step_scale: a.step,
        ..RenderConfig::default()
    };
    let mut total = 0.0;
    for (i, cam) in cams.iter().enumerate() {
        let start = Instant::now();
        let frame = renderer.render_frame(cam, &cfg);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        total += ms;
        frame.save_png(&a.out.join(frame_name(i))).map_err(input)?;
        println!("{}: {ms:.1} ms", frame_name(i));
    }
    println!("mean: {:.1} ms", total / cams.len() as f64);
    Ok(())
}

fn reference(a: &ReferenceArgs) -> Result<(), Failure> {
    if a.steps < 2 {
        return Err(Failure::Input("reference needs at least 2 steps".into()));
    }
    let scene = load_scene(&a.scene)?;
    let cams = load_cameras(&a.campath, a.width, a.height)?;
    fs::create_dir_all(&a.out).map_err(|e| Failure::Input(format!("{}: {e}", a.out.display())))?;
    for (i, cam) in cams.iter().enumerate() {
        let start = Instant::now();
        let frame = render_reference(&scene, cam, a.steps);
        frame.save_png(&a.out.join(frame_name(i))).map_err(input)?;
        println!("{}: {:.1} ms", frame_name(i), start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(())
}

/// Invariant name of a load failure.
fn check_name(e: &AssetError) -> &'static str {
    match e {
        AssetError::Invariant { check, .. } => check,
        AssetError::Dimension { .. } => "dimension mismatch",
        AssetError::MissingFile(_) => "missing file",
        AssetError::UnsupportedVersion { .. } => "manifest version",
        AssetError::Manifest { .. } => "manifest consistency",
        AssetError::Mesh { .. } => "mesh",
        AssetError::Io { .. } | AssetError::Image(_) => "readable payload",
    }
}

fn validate(dir: &Path) -> Result<(), Failure> {
    if !dir.is_dir() {
        return Err(Failure::Input(format!("{}: not a directory", dir.display())));
    }
    let (assets, manifest) = match load_unchecked(dir) {
        Ok(v) => v,
        Err(e) => {
            let line = format!("FAIL {}: {e}", check_name(&e));
            println!("{line}");
            return Err(Failure::Check(line));
        }
    };
    let violations = check_against(&assets, &manifest);
    for v in &violations {
        println!("FAIL {}: {}", v.check, v.detail);
    }
    if violations.is_empty() {
        println!("ok: {}", dir.display());
        Ok(())
    } else {
        Err(Failure::Check(format!("{} check(s) failed", violations.len())))
    }
}

fn frame_files(dir: &Path) -> Result<Vec<String>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".png"))
        .collect();
    names.sort();
    Ok(names)
}

fn compare(a: &Path, b: &Path, min_psnr: f64) -> Result<(), Failure> {
    let (fa, fb) = (frame_files(a)?, frame_files(b)?);
    if fa.is_empty() || fa != fb {
        return Err(Failure::Input(format!(
            "frame sets differ: {} has {} frames, {} has {}",
            a.display(),
            fa.len(),
            b.display(),
            fb.len()
        )));
    }
    let mut sum = 0.0;
    for name in &fa {
        let ia = ImageRGBA::load_png(&a.join(name)).map_err(input)?;
        let ib = ImageRGBA::load_png(&b.join(name)).map_err(input)?;
        let p = psnr(&ia, &ib).map_err(|e| Failure::Input(format!("{name}: {e}")))?;
        sum += p;
        println!("{name}: {p:.2} dB");
    }
    let mean = sum / fa.len() as f64;
    println!("mean: {mean:.2} dB");
    if mean >= min_psnr {
        Ok(())
    } else {
        Err(Failure::Check(format!("mean PSNR {mean:.2} dB below {min_psnr} dB")))
    }
}

fn info(dir: &Path) -> Result<(), Failure> {
    let m = read_manifest(dir).map_err(input)?;
    let v = &m.volume;
    println!("version: {}", m.version);
    println!("bounds: {:?} .. {:?}", m.bounds_min, m.bounds_max);
    println!("mesh: {} vertices, {} triangles", m.mesh.vertices, m.mesh.triangles);
    match &m.textures {
        Some(t) => println!("textures: {0}x{0}", t.size),
        None => println!("textures: none"),
    }
    println!("env: {} maps, edge {}", m.env.maps.len(), m.env.edge);
    println!("lut: {}x{}", m.lut.width, m.lut.height);
    println!("grid: {}^3, block {}", v.grid_n, v.block_b);
    println!("blocks: {}", v.n_blocks);
    match &v.hash {
        Some(h) => println!("hash: m_bar {}, r_bar {}", h.m_bar, h.r_bar),
        None => println!("hash: none"),
    }
    let total = (v.grid_n as f64).powi(3);
    println!(
        "sparsity: {} occupied voxels, {:.4}%",
        v.occupied_voxels,
        100.0 * v.occupied_voxels as f64 / total
    );
    println!("storage:");
    print_storage(dir, &m);
    Ok(())
}
