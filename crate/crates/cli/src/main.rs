//! `viewcut`: surface reconstruction from point clouds via virtual views,
//! per-view visibility estimation, and a Delaunay graph cut.
//!
//! Exit codes: 0 success, 2 bad input, 3 degenerate geometry, 4 I/O error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use viewcut_core::error::Error;
use viewcut_core::geom::{compute_aabb, normalize_cloud, Aabb, PointCloud, Vec3};
use viewcut_core::metrics;
use viewcut_core::ply;
use viewcut_core::recon::{self, EstimatorChoice, ReconParams};
use viewcut_core::render::{
    render_mesh_depth, render_points, write_idm, write_pfm, write_pgm_mask,
};
use viewcut_core::synth;
use viewcut_core::view::{
    load_custom_views, sample_grid_nadir, sample_grid_oblique, sample_spherical,
    sample_spherical_default, save_views, Intrinsics, RigidPose, VirtualView,
};
use viewcut_core::visibility::{
    cascade_visibility, hpr_visibility, oracle_visibility, write_labels, EstimatorConfig,
};

type Result<T> = std::result::Result<T, Error>;

#[derive(Parser)]
#[command(name = "viewcut", version, about)]
struct Cli {
    /// Worker threads (0 = one per core). Results are thread-count invariant.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate virtual camera views around a point cloud
    SampleViews(SampleViewsArgs),
    /// Render point depth / ID / mask maps for each view
    Render(RenderArgs),
    /// Estimate per-view point visibility
    EstimateVisibility(EstimateArgs),
    /// Reconstruct a watertight surface from a point cloud
    Reconstruct(ReconstructArgs),
    /// Compare a reconstructed mesh against a ground-truth mesh
    Eval(EvalArgs),
    /// Generate a synthetic scene with per-view ground-truth data
    GenDataset(GenDatasetArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Pattern {
    /// 8 azimuths x 3 elevations plus 2 near-polar views (26 total)
    SphericalDefault,
    Spherical,
    GridNadir,
    GridOblique,
    Custom,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum EstimatorKind {
    Oracle,
    Hpr,
    Cascade,
}

#[derive(Args, Clone)]
struct ViewGenArgs {
    #[arg(long, value_enum, default_value = "spherical-default")]
    pattern: Pattern,
    #[arg(long, default_value_t = 8)]
    n_az: u32,
    #[arg(long, default_value_t = 3)]
    n_el: u32,
    /// Orbit radius as a multiple of the scene diagonal
    #[arg(long, default_value_t = 2.0)]
    radius_factor: f64,
    /// Camera height above the scene top (grid patterns)
    #[arg(long, default_value_t = 1.0)]
    height_agl: f64,
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
    #[arg(long, default_value_t = 45.0)]
    tilt_deg: f64,
    /// Custom view file (JSON), for --pattern custom
    #[arg(long)]
    views: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    width: u32,
    #[arg(long, default_value_t = 256)]
    height: u32,
}

impl ViewGenArgs {
    fn generate(&self, bbox: &Aabb) -> Result<Vec<VirtualView>> {
        let intr = Intrinsics::with_resolution(self.width, self.height);
        match self.pattern {
            Pattern::SphericalDefault => sample_spherical_default(bbox, self.radius_factor),
            Pattern::Spherical => {
                sample_spherical(bbox, self.n_az, self.n_el, self.radius_factor, intr)
            }
            Pattern::GridNadir => sample_grid_nadir(bbox, self.height_agl, self.overlap, intr),
            Pattern::GridOblique => {
                sample_grid_oblique(bbox, self.height_agl, self.overlap, self.tilt_deg, intr)
            }
            Pattern::Custom => {
                let path = self.views.as_ref().ok_or_else(|| {
                    Error::InvalidParameter("--pattern custom requires --views".into())
                })?;
                load_custom_views(path)
            }
        }
    }
}

#[derive(Args)]
struct SampleViewsArgs {
    /// Input point cloud (PLY); its bounding box anchors the views
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    gen: ViewGenArgs,
    /// Output view list (JSON)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    input: PathBuf,
    /// View list (JSON) as written by sample-views
    #[arg(long)]
    views: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    splat_radius: u32,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    views: PathBuf,
    #[arg(long, value_enum)]
    estimator: EstimatorKind,
    /// Ground-truth mesh (PLY), required for the oracle estimator
    #[arg(long)]
    gt_mesh: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 2.0)]
    hpr_exponent: f64,
    #[arg(long, default_value_t = 1)]
    splat_radius: u32,
    #[arg(long)]
    out_dir: PathBuf,
}

/// Full pipeline configuration. Every field has a default; a JSON config
/// file and then CLI flags override it.
#[derive(Clone, Serialize, Deserialize)]
#[serde(default)]
struct RunConfig {
    estimator: EstimatorKind,
    epsilon: f64,
    hpr_exponent: f64,
    estimator_config: EstimatorConfig,
    recon: ReconParams,
    splat_radius: u32,
    seed: u64,
    pattern: String,
    n_az: u32,
    n_el: u32,
    radius_factor: f64,
    width: u32,
    height: u32,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            estimator: EstimatorKind::Cascade,
            epsilon: 0.05,
            hpr_exponent: 2.0,
            estimator_config: EstimatorConfig::default(),
            recon: ReconParams::default(),
            splat_radius: 1,
            seed: 0,
            pattern: "spherical-default".into(),
            n_az: 8,
            n_el: 3,
            radius_factor: 2.0,
            width: 256,
            height: 256,
        }
    }
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output mesh (binary PLY)
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON run report
    #[arg(long)]
    report: Option<PathBuf>,
    /// JSON config file; CLI flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    estimator: Option<EstimatorKind>,
    #[arg(long)]
    gt_mesh: Option<PathBuf>,
    /// Custom view file (JSON, original coordinates)
    #[arg(long)]
    views: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    hpr_exponent: Option<f64>,
    #[arg(long)]
    lambda_avw: Option<f64>,
    #[arg(long)]
    lambda_ql: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    alpha_max: Option<f64>,
    #[arg(long)]
    splat_radius: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    n_az: Option<u32>,
    #[arg(long)]
    n_el: Option<u32>,
    #[arg(long)]
    radius_factor: Option<f64>,
}

#[derive(Args)]
struct EvalArgs {
    /// Reconstructed mesh (PLY)
    #[arg(long)]
    mesh: PathBuf,
    /// Ground-truth mesh (PLY)
    #[arg(long)]
    gt: PathBuf,
    /// Samples per surface
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the JSON report here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SceneKind {
    Sphere,
    Box,
    Torus,
    TwoPlanes,
    Cage,
}

#[derive(Args)]
struct GenDatasetArgs {
    #[arg(long, value_enum)]
    scene: SceneKind,
    #[arg(long, default_value_t = 10_000)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 2.0)]
    radius_factor: f64,
    #[arg(long, default_value_t = 1)]
    splat_radius: u32,
    /// Gaussian point noise, standard deviation in scene units
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Bar half-thickness for the cage scene
    #[arg(long, default_value_t = 0.05)]
    bar_radius: f64,
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // ignore failure: the global pool may already exist in tests
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let result = match cli.cmd {
        Cmd::SampleViews(a) => cmd_sample_views(a),
        Cmd::Render(a) => cmd_render(a),
        Cmd::EstimateVisibility(a) => cmd_estimate(a),
        Cmd::Reconstruct(a) => cmd_reconstruct(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::GenDataset(a) => cmd_gen_dataset(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e.root() {
                Error::Degenerate(_) => 3,
                Error::Io(_) => 4,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn read_cloud(path: &Path) -> Result<PointCloud> {
    ply::read_point_cloud(path)
        .map_err(|e| Error::Parse(format!("reading {}: {}", path.display(), e)))
}

fn cmd_sample_views(a: SampleViewsArgs) -> Result<()> {
    let cloud = read_cloud(&a.input)?;
    let bbox = compute_aabb(&cloud)?;
    let views = a.gen.generate(&bbox)?;
    save_views(&a.out, &views)?;
    println!("wrote {} views to {}", views.len(), a.out.display());
    Ok(())
}

fn render_view_dir(
    dir: &Path,
    buffers: &viewcut_core::render::RenderBuffers,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_pfm(&dir.join("pt_depth.pfm"), &buffers.depth)?;
    write_idm(&dir.join("pt_id.idm"), &buffers.id)?;
    write_pgm_mask(&dir.join("mask.pgm"), &buffers.mask)?;
    Ok(())
}

fn cmd_render(a: RenderArgs) -> Result<()> {
    let cloud = read_cloud(&a.input)?;
    let views = load_custom_views(&a.views)?;
    for view in &views {
        let buffers = render_points(&cloud, view, a.splat_radius);
        render_view_dir(&a.out_dir.join(format!("view_{}", view.id)), &buffers)?;
    }
    println!("rendered {} views into {}", views.len(), a.out_dir.display());
    Ok(())
}

fn cmd_estimate(a: EstimateArgs) -> Result<()> {
    if a.estimator == EstimatorKind::Oracle && a.gt_mesh.is_none() {
        return Err(Error::InvalidParameter(
            "oracle requires ground truth (--gt-mesh)".into(),
        ));
    }
    let cloud = read_cloud(&a.input)?;
    let views = load_custom_views(&a.views)?;
    let gt = a.gt_mesh.as_ref().map(|p| ply::read_mesh(p)).transpose()?;
    std::fs::create_dir_all(&a.out_dir)?;
    for view in &views {
        let labels = match a.estimator {
            EstimatorKind::Oracle => {
                let buffers = render_points(&cloud, view, a.splat_radius);
                let depth = render_mesh_depth(gt.as_ref().unwrap(), view)?;
                oracle_visibility(&buffers, &depth, a.epsilon, view.id)?
            }
            EstimatorKind::Hpr => hpr_visibility(&cloud, view, a.hpr_exponent)?,
            EstimatorKind::Cascade => {
                let buffers = render_points(&cloud, view, a.splat_radius);
                cascade_visibility(&buffers, &EstimatorConfig::default(), view.id)?
            }
        };
        write_labels(&a.out_dir.join(format!("labels_{}.json", view.id)), &labels)?;
    }
    println!("labeled {} views", views.len());
    Ok(())
}

/// Re-express a camera pose given in original coordinates in the
/// normalized frame (rotation unchanged, center remapped).
fn normalize_view(view: &VirtualView, tf: &viewcut_core::geom::NormTransform) -> VirtualView {
    let c = tf.normalize(view.pose.camera_center());
    let r = view.pose.rotation;
    let t = Vec3::new(
        -(r[0][0] * c.x + r[0][1] * c.y + r[0][2] * c.z),
        -(r[1][0] * c.x + r[1][1] * c.y + r[1][2] * c.z),
        -(r[2][0] * c.x + r[2][1] * c.y + r[2][2] * c.z),
    );
    VirtualView {
        id: view.id,
        pose: RigidPose {
            rotation: r,
            translation: t,
        },
        intr: view.intr,
    }
}

fn cmd_reconstruct(a: ReconstructArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => {
            let data = std::fs::read_to_string(path)?;
            serde_json::from_str::<RunConfig>(&data)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    // CLI overrides
    if let Some(v) = a.estimator {
        cfg.estimator = v;
    }
    macro_rules! set {
        ($($field:ident <- $opt:expr;)*) => { $(if let Some(v) = $opt { cfg.$field = v; })* };
    }
    set! {
        epsilon <- a.epsilon;
        hpr_exponent <- a.hpr_exponent;
        splat_radius <- a.splat_radius;
        seed <- a.seed;
        pattern <- a.pattern.clone();
        n_az <- a.n_az;
        n_el <- a.n_el;
        radius_factor <- a.radius_factor;
    }
    if let Some(v) = a.lambda_avw {
        cfg.recon.lambda_avw = v;
    }
    if let Some(v) = a.lambda_ql {
        cfg.recon.lambda_ql = v;
    }
    if let Some(v) = a.sigma {
        cfg.recon.sigma = v;
    }
    if let Some(v) = a.alpha_max {
        cfg.recon.alpha_max = v;
    }

    if cfg.estimator == EstimatorKind::Oracle && a.gt_mesh.is_none() {
        return Err(Error::InvalidParameter(
            "oracle requires ground truth (--gt-mesh)".into(),
        ));
    }
    let cloud = read_cloud(&a.input)?;
    let gt = a.gt_mesh.as_ref().map(|p| ply::read_mesh(p)).transpose()?;
    let estimator = match cfg.estimator {
        EstimatorKind::Oracle => EstimatorChoice::Oracle {
            gt_mesh: gt.as_ref().unwrap(),
            epsilon: cfg.epsilon,
        },
        EstimatorKind::Hpr => EstimatorChoice::Hpr {
            exponent: cfg.hpr_exponent,
        },
        EstimatorKind::Cascade => EstimatorChoice::Cascade(cfg.estimator_config),
    };

    // pre-normalize custom views so the closure below can stay pure
    let custom_views = match (cfg.pattern.as_str(), &a.views) {
        ("custom", Some(path)) => {
            let views = load_custom_views(path)?;
            let (_, tf) = normalize_cloud(&cloud)?;
            Some(views.iter().map(|v| normalize_view(v, &tf)).collect::<Vec<_>>())
        }
        ("custom", None) => {
            return Err(Error::InvalidParameter(
                "--pattern custom requires --views".into(),
            ))
        }
        _ => None,
    };
    let intr = Intrinsics::with_resolution(cfg.width, cfg.height);
    let pattern = cfg.pattern.clone();
    let (n_az, n_el, rf) = (cfg.n_az, cfg.n_el, cfg.radius_factor);
    let view_gen = move |bbox: &Aabb| -> Result<Vec<VirtualView>> {
        match pattern.as_str() {
            "spherical-default" => sample_spherical_default(bbox, rf),
            "spherical" => sample_spherical(bbox, n_az, n_el, rf, intr),
            "custom" => Ok(custom_views.clone().unwrap()),
            other => Err(Error::InvalidParameter(format!(
                "unknown view pattern '{other}'"
            ))),
        }
    };

    let total = Instant::now();
    let (mesh, report) = recon::reconstruct(
        &cloud,
        &view_gen,
        &estimator,
        &cfg.recon,
        cfg.splat_radius,
    )?;
    ply::write_mesh(&a.out, &mesh, true)?;

    let run_report = serde_json::json!({
        "input": a.input.display().to_string(),
        "output": a.out.display().to_string(),
        "config": cfg,
        "report": report,
        "total_seconds": total.elapsed().as_secs_f64(),
    });
    let text = serde_json::to_string_pretty(&run_report).expect("report serializes");
    if let Some(path) = &a.report {
        std::fs::write(path, &text)?;
    }
    println!("{text}");
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let empty = || Error::EmptyInput(format!("empty mesh: {}", a.mesh.display()));
    let mesh = ply::read_mesh(&a.mesh).map_err(|e| match &e {
        Error::Parse(msg) if msg.contains("no faces") => empty(),
        _ => e,
    })?;
    if mesh.is_empty() {
        return Err(empty());
    }
    let gt = ply::read_mesh(&a.gt)?;
    let cal = metrics::calibrate(&gt, a.n, (a.seed, a.seed.wrapping_add(1)))?;
    let p = metrics::sample_mesh(&mesh, a.n, a.seed.wrapping_add(2))?;
    let q = metrics::sample_mesh(&gt, a.n, a.seed.wrapping_add(3))?;
    let chamfer = metrics::chamfer(&p, &q, cal.k)?;
    let f = metrics::fscore(&p, &q, cal.t)?;
    let report = serde_json::json!({
        "chamfer": chamfer,
        "precision": f.precision,
        "recall": f.recall,
        "fscore": f.fscore,
        "K": cal.k,
        "T": cal.t,
        "n": a.n,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(path) = &a.out {
        std::fs::write(path, &text)?;
    }
    println!("{text}");
    Ok(())
}

fn scene_mesh(kind: SceneKind, bar_radius: f64) -> Result<viewcut_core::geom::TriangleMesh> {
    match kind {
        SceneKind::Sphere => synth::sphere_mesh(Vec3::ZERO, 1.0, 4),
        SceneKind::Box => synth::box_mesh(
            Vec3::new(-0.5, -0.5, -0.5),
            Vec3::new(0.5, 0.5, 0.5),
        ),
        SceneKind::Torus => synth::torus_mesh(0.7, 0.25, 64, 32),
        SceneKind::TwoPlanes => Ok(synth::two_planes_mesh(-0.3, 0.3, 0.3, 0.8)),
        SceneKind::Cage => synth::cage_mesh(0.5, bar_radius),
    }
}

fn cmd_gen_dataset(a: GenDatasetArgs) -> Result<()> {
    let gt = scene_mesh(a.scene, a.bar_radius)?;
    let mut cloud = metrics::sample_mesh(&gt, a.points, a.seed)?;
    if a.noise > 0.0 {
        cloud = synth::perturb_cloud(&cloud, a.noise, a.seed.wrapping_add(1000));
    }
    std::fs::create_dir_all(&a.out_dir)?;
    ply::write_mesh(&a.out_dir.join("gt_mesh.ply"), &gt, true)?;
    ply::write_point_cloud(&a.out_dir.join("cloud.ply"), &cloud, true)?;

    // work in the normalized frame so epsilon is in unit-diagonal units
    let (norm_cloud, tf) = normalize_cloud(&cloud)?;
    let norm_gt = viewcut_core::geom::TriangleMesh {
        vertices: gt.vertices.iter().map(|&v| tf.normalize(v)).collect(),
        triangles: gt.triangles.clone(),
    };
    let bbox = compute_aabb(&norm_cloud)?;
    let views = sample_spherical_default(&bbox, a.radius_factor)?;
    save_views(&a.out_dir.join("views.json"), &views)?;
    for view in &views {
        let dir = a.out_dir.join(format!("view_{}", view.id));
        let buffers = render_points(&norm_cloud, view, a.splat_radius);
        render_view_dir(&dir, &buffers)?;
        let gt_depth = render_mesh_depth(&norm_gt, view)?;
        write_pfm(&dir.join("gt_depth.pfm"), &gt_depth)?;
        let labels = oracle_visibility(&buffers, &gt_depth, a.epsilon, view.id)?;
        write_labels(&dir.join("labels.json"), &labels)?;
    }
    println!(
        "wrote {} views for scene into {}",
        views.len(),
        a.out_dir.display()
    );
    Ok(())
}
