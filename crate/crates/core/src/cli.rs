//! Command-line frontend. Every subcommand writes a `manifest.json` (or
//! `<file>.manifest.json`) recording the tool version, seed and SHA-256 of
//! each input.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::annotation::{annotate_view, AnnotationConfig, AnnotationStats, SceneConfig};
use crate::config::Tolerances;
use crate::convert::{
    contactnet_to_mono, l2g_to_mono, mono_to_contactnet, mono_to_l2g, GraspContactNet, GraspL2G,
};
use crate::error::{Error, Result};
use crate::geom::{depth_io, mesh_io, render, Frame, PinholeCamera, Pixel, PixelIndex, RigidTransform};
use crate::pose::{recover_pose, GraspMono};
use crate::sampling::{sample_grasps, AntipodalGrasp, GripperModel, SamplerConfig};
use crate::selfcheck::run_selfcheck;
use crate::training::{
    crop_pair, make_heatmap, normals_from_depth, roi_align, write_crop, write_heatmap, DEFAULT_SIGMA, ROI_SIZE,
};

pub const LOG_ENV: &str = "GRASPGEOM_LOG";

#[derive(Debug, Parser)]
#[command(name = "graspgeom", version, about = "Monocular grasp geometry toolkit")]
pub struct Cli {
    /// Pipeline configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Validate inputs and configuration without writing anything.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample antipodal grasps on a mesh (JSON lines).
    SampleGrasps {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Annotate every view of a scene; grasps are read from `<dir>/<object>.jsonl`.
    Annotate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        grasps: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Heatmaps and RoI-aligned RGB + normal crops for annotated views.
    GenTraining {
        #[arg(long)]
        anno: PathBuf,
        #[arg(long)]
        rgb: PathBuf,
        #[arg(long)]
        depth: PathBuf,
        #[arg(long, default_value_t = 55)]
        r: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a grasp file between representations.
    Convert {
        #[arg(long, value_enum)]
        from: Repr,
        #[arg(long, value_enum)]
        to: Repr,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        camera: PathBuf,
        /// Camera-to-base transform; required for the contact-point form.
        #[arg(long)]
        extrinsics: Option<PathBuf>,
    },
    /// Recover base-frame 6-DoF poses from monocular grasps.
    Recover {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        camera: PathBuf,
        #[arg(long)]
        extrinsics: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the analytic-shape checks.
    Selfcheck,
    /// Ray-cast depth and RGB for every view of a scene, to the paths it names.
    RenderScene {
        #[arg(long)]
        scene: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Repr {
    Mono,
    L2g,
    Contactnet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub sampler: SamplerConfig,
    pub tolerances: Tolerances,
    pub gripper: GripperModel,
    pub seed: Option<u64>,
    pub heatmap_sigma: f64,
    /// Meters per unit of 16-bit PNG depth.
    pub png_depth_scale: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sampler: SamplerConfig::default(),
            tolerances: Tolerances::default(),
            gripper: GripperModel::default(),
            seed: None,
            heatmap_sigma: DEFAULT_SIGMA,
            png_depth_scale: depth_io::DEFAULT_PNG_SCALE,
        }
    }
}

impl PipelineConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let cfg: Self = read_json(path)?;
        cfg.sampler.validate()?;
        if !(cfg.heatmap_sigma > 0.0) || !(cfg.png_depth_scale > 0.0) {
            return Err(Error::Config("heatmap_sigma and png_depth_scale must be positive".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<serde_json::Value>,
}

struct Run {
    cfg: PipelineConfig,
    seed: u64,
    dry_run: bool,
    inputs: BTreeMap<String, String>,
}

impl Run {
    fn hash(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(())
    }

    fn manifest(&self, command: &'static str, path: &Path, stats: Option<serde_json::Value>) -> Result<()> {
        let m = Manifest {
            tool: "graspgeom",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: self.seed,
            inputs: self.inputs.clone(),
            stats,
        };
        write_text(path, &(serde_json::to_string_pretty(&m)? + "\n"))
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

fn jsonl<T: Serialize>(items: &[T]) -> Result<String> {
    let mut s = String::new();
    for it in items {
        s.push_str(&serde_json::to_string(it)?);
        s.push('\n');
    }
    Ok(s)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn sibling_manifest(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn read_extrinsics(path: &Path) -> Result<RigidTransform> {
    let t: RigidTransform = read_json(path)?;
    t.expect_from(&Frame::camera())?;
    if t.to_frame() != &Frame::base() {
        return Err(Error::FrameMismatch { expected: Frame::base(), found: t.to_frame().clone() });
    }
    Ok(t)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.category().exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(p) => PipelineConfig::read(p)?,
        None => PipelineConfig::default(),
    };
    let seed = cli.seed.or(cfg.seed).unwrap_or(cfg.sampler.seed);
    let mut run = Run { cfg, seed, dry_run: cli.dry_run, inputs: BTreeMap::new() };
    if let Some(p) = &cli.config {
        run.hash(p)?;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| dispatch(&mut run, cli.command))
}

fn dispatch(run: &mut Run, command: Command) -> Result<i32> {
    match command {
        Command::SampleGrasps { mesh, out } => cmd_sample(run, &mesh, &out),
        Command::Annotate { scene, grasps, out } => cmd_annotate(run, &scene, &grasps, &out),
        Command::GenTraining { anno, rgb, depth, r, out } => cmd_gen_training(run, &anno, &rgb, &depth, r, &out),
        Command::Convert { from, to, input, out, camera, extrinsics } => {
            cmd_convert(run, from, to, &input, &out, &camera, extrinsics.as_deref())
        }
        Command::Recover { input, camera, extrinsics, out } => cmd_recover(run, &input, &camera, &extrinsics, &out),
        Command::Selfcheck => cmd_selfcheck(run),
        Command::RenderScene { scene } => cmd_render(run, &scene),
    }
}

fn cmd_sample(run: &mut Run, mesh_path: &Path, out: &Path) -> Result<i32> {
    let mesh = mesh_io::load_mesh(mesh_path)?;
    run.hash(mesh_path)?;
    if run.dry_run {
        return Ok(0);
    }
    let cfg = SamplerConfig { seed: run.seed, ..run.cfg.sampler.clone() };
    let grasps = sample_grasps(&mesh, &cfg, &run.cfg.tolerances)?;
    log::info!("{}: {} grasps from {} samples", mesh_path.display(), grasps.len(), cfg.n_surface_samples);
    write_text(out, &jsonl(&grasps)?)?;
    run.manifest("sample-grasps", &sibling_manifest(out), Some(serde_json::json!({ "grasps": grasps.len() })))?;
    Ok(0)
}

fn cmd_annotate(run: &mut Run, scene_path: &Path, grasp_dir: &Path, out: &Path) -> Result<i32> {
    let scene_cfg = SceneConfig::read(scene_path)?;
    let root = scene_path.parent().unwrap_or(Path::new("."));
    let scene = scene_cfg.load(root, run.cfg.png_depth_scale)?;
    run.hash(scene_path)?;
    for o in &scene_cfg.objects {
        run.hash(&root.join(&o.mesh))?;
    }
    for b in &scene_cfg.background {
        run.hash(&root.join(&b.mesh))?;
    }
    let mut grasps = Vec::new();
    for o in &scene_cfg.objects {
        let path = grasp_dir.join(format!("{}.jsonl", o.name));
        grasps.push(read_jsonl::<AntipodalGrasp>(&path)?);
        run.hash(&path)?;
    }
    for (i, v) in scene_cfg.views.iter().enumerate() {
        let path = root.join(&v.depth);
        if !path.exists() {
            return Err(Error::MissingDepth(i));
        }
        run.hash(&path)?;
    }
    if run.dry_run {
        return Ok(0);
    }
    create_dir(out)?;
    let cfg = AnnotationConfig { gripper: run.cfg.gripper.clone() };
    let mut all_stats = Vec::new();
    for (i, view) in scene.views.iter().enumerate() {
        let (records, stats): (_, AnnotationStats) = annotate_view(&scene, i, &grasps, &cfg, &run.cfg.tolerances)?;
        log::info!("view {i}: {stats:?}");
        write_text(&out.join(format!("view_{i}.jsonl")), &jsonl(&records)?)?;
        write_text(&out.join(format!("view_{i}.camera.json")), &serde_json::to_string_pretty(&view.camera)?)?;
        let base_from_cam = view.cam_from_base.inverse();
        write_text(&out.join(format!("view_{i}.extrinsics.json")), &serde_json::to_string_pretty(&base_from_cam)?)?;
        all_stats.push(stats);
    }
    run.manifest("annotate", &out.join("manifest.json"), Some(serde_json::to_value(&all_stats)?))?;
    Ok(0)
}

/// Only the fields of an annotation record the training data needs.
#[derive(Debug, Deserialize)]
struct KeypointRecord {
    keypoint: PixelIndex,
    grasp_id: serde_json::Value,
    w: f64,
    phi: f64,
}

#[derive(Debug, Serialize)]
struct Correspondence<'a> {
    keypoint: PixelIndex,
    crop: &'a str,
    grasp_id: &'a serde_json::Value,
    w: f64,
    phi: f64,
}

fn view_files(dir: &Path) -> Result<Vec<(usize, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(i) = name.strip_prefix("view_").and_then(|s| s.strip_suffix(".jsonl")) {
            if let Ok(i) = i.parse() {
                out.push((i, path));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn find_depth(dir: &Path, view: usize) -> Result<PathBuf> {
    for ext in ["gdf", "png"] {
        let p = dir.join(format!("view_{view}.{ext}"));
        if p.exists() {
            return Ok(p);
        }
    }
    Err(Error::MissingDepth(view))
}

fn cmd_gen_training(run: &mut Run, anno: &Path, rgb_dir: &Path, depth_dir: &Path, r: usize, out: &Path) -> Result<i32> {
    let views = view_files(anno)?;
    let mut jobs = Vec::new();
    for (i, path) in views {
        let records: Vec<KeypointRecord> = read_jsonl(&path)?;
        let cam_path = anno.join(format!("view_{i}.camera.json"));
        let cam: PinholeCamera = read_json(&cam_path)?;
        let rgb_path = rgb_dir.join(format!("view_{i}.png"));
        let rgb = image::open(&rgb_path)
            .map_err(|e| match e {
                image::ImageError::IoError(io) => Error::io(&rgb_path, io),
                other => Error::format(&rgb_path, other.to_string()),
            })?
            .to_rgb8();
        let depth_path = find_depth(depth_dir, i)?;
        let depth = depth_io::load_depth(&depth_path, run.cfg.png_depth_scale)?;
        depth.check_camera(&cam)?;
        if (rgb.width() as usize, rgb.height() as usize) != (cam.width, cam.height) {
            return Err(Error::DimensionMismatch(format!("{} does not match the camera size", rgb_path.display())));
        }
        for p in [&path, &cam_path, &rgb_path, &depth_path] {
            run.hash(p)?;
        }
        jobs.push((i, records, cam, rgb, depth));
    }
    if r == 0 {
        return Err(Error::DegenerateWindow);
    }
    if run.dry_run {
        return Ok(0);
    }
    create_dir(out)?;
    for (i, records, cam, rgb, depth) in jobs {
        let normals = normals_from_depth(&depth, &cam)?;
        let keypoints: Vec<PixelIndex> = {
            let mut k: Vec<PixelIndex> = records.iter().map(|r| r.keypoint).collect();
            k.sort_by_key(|p| (p.v, p.u));
            k.dedup();
            k
        };
        let pixels: Vec<Pixel> = keypoints.iter().map(|k| k.to_pixel()).collect();
        let hm = make_heatmap(&pixels, cam.width, cam.height, run.cfg.heatmap_sigma)?;
        write_heatmap(&hm, out, &format!("view_{i}_heatmap"))?;
        let view_dir = out.join(format!("view_{i}"));
        create_dir(&view_dir)?;
        use rayon::prelude::*;
        let crops: Vec<_> = keypoints
            .par_iter()
            .map(|k| crop_pair(&rgb, &normals, *k, r).map(|c| roi_align(&c, ROI_SIZE)))
            .collect::<Result<_>>()?;
        let names: Vec<String> = (0..keypoints.len()).map(|j| format!("view_{i}/crop_{j}")).collect();
        for (j, c) in crops.iter().enumerate() {
            write_crop(c, &view_dir, &format!("crop_{j}"))?;
        }
        let links: Vec<Correspondence> = records
            .iter()
            .map(|rec| {
                let j = keypoints.binary_search_by_key(&(rec.keypoint.v, rec.keypoint.u), |p| (p.v, p.u)).expect("listed");
                Correspondence { keypoint: rec.keypoint, crop: &names[j], grasp_id: &rec.grasp_id, w: rec.w, phi: rec.phi }
            })
            .collect();
        write_text(&out.join(format!("view_{i}.jsonl")), &jsonl(&links)?)?;
    }
    run.manifest("gen-training", &out.join("manifest.json"), Some(serde_json::json!({ "r": r })))?;
    Ok(0)
}

fn cmd_convert(
    run: &mut Run,
    from: Repr,
    to: Repr,
    input: &Path,
    out: &Path,
    camera: &Path,
    extrinsics: Option<&Path>,
) -> Result<i32> {
    let tol = run.cfg.tolerances.clone();
    let cam: PinholeCamera = read_json(camera)?;
    run.hash(camera)?;
    let ext = match extrinsics {
        Some(p) => {
            run.hash(p)?;
            Some(read_extrinsics(p)?)
        }
        None => None,
    };
    let need_ext = || ext.as_ref().ok_or_else(|| Error::Config("--extrinsics is required for contactnet".into()));
    run.hash(input)?;
    let monos: Vec<GraspMono> = match from {
        Repr::Mono => read_jsonl::<GraspMono>(input)?.into_iter().map(|g| g.validate(&tol).map(|_| g)).collect::<Result<_>>()?,
        Repr::L2g => read_jsonl::<GraspL2G>(input)?.iter().map(|g| l2g_to_mono(g, &cam, &tol)).collect::<Result<_>>()?,
        Repr::Contactnet => {
            let t = need_ext()?;
            read_jsonl::<GraspContactNet>(input)?.iter().map(|g| contactnet_to_mono(g, &cam, t, &tol)).collect::<Result<_>>()?
        }
    };
    let text = match to {
        Repr::Mono => jsonl(&monos)?,
        Repr::L2g => jsonl(&monos.iter().map(|g| mono_to_l2g(g, &cam, &tol)).collect::<Result<Vec<_>>>()?)?,
        Repr::Contactnet => {
            let t = need_ext()?;
            jsonl(&monos.iter().map(|g| mono_to_contactnet(g, &cam, t, &tol)).collect::<Result<Vec<_>>>()?)?
        }
    };
    if run.dry_run {
        return Ok(0);
    }
    write_text(out, &text)?;
    run.manifest("convert", &sibling_manifest(out), None)?;
    Ok(0)
}

fn cmd_recover(run: &mut Run, input: &Path, camera: &Path, extrinsics: &Path, out: &Path) -> Result<i32> {
    let tol = run.cfg.tolerances.clone();
    let cam: PinholeCamera = read_json(camera)?;
    let ext = read_extrinsics(extrinsics)?;
    let grasps: Vec<GraspMono> = read_jsonl(input)?;
    for p in [input, camera, extrinsics] {
        run.hash(p)?;
    }
    let poses = grasps.iter().map(|g| recover_pose(g, &cam, &ext, &tol)).collect::<Result<Vec<_>>>()?;
    if run.dry_run {
        return Ok(0);
    }
    write_text(out, &jsonl(&poses)?)?;
    run.manifest("recover", &sibling_manifest(out), None)?;
    Ok(0)
}

fn cmd_selfcheck(run: &mut Run) -> Result<i32> {
    let report = run_selfcheck(&run.cfg.tolerances);
    print!("{report}");
    Ok(if report.passed() { 0 } else { crate::error::ErrorCategory::Geometry.exit_code() })
}

fn cmd_render(run: &mut Run, scene_path: &Path) -> Result<i32> {
    let scene_cfg = SceneConfig::read(scene_path)?;
    let root = scene_path.parent().unwrap_or(Path::new("."));
    let scene = scene_cfg.load(root, run.cfg.png_depth_scale)?;
    run.hash(scene_path)?;
    let world = scene.world_mesh()?;
    if run.dry_run {
        return Ok(0);
    }
    for (entry, view) in scene_cfg.views.iter().zip(&scene.views) {
        let rendered = render::render_view(&world, &view.camera, &view.cam_from_base)?;
        let depth_path = root.join(&entry.depth);
        if depth_path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
            depth_io::write_png16(&rendered.depth, &depth_path, run.cfg.png_depth_scale)?;
        } else {
            depth_io::write_f32(&rendered.depth, &depth_path)?;
        }
        if let Some(rgb) = &entry.rgb {
            let path = root.join(rgb);
            rendered.rgb.save(&path).map_err(|e| Error::format(&path, e.to_string()))?;
        }
    }
    Ok(0)
}

pub fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}
