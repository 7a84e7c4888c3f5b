//! Command-line front end.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::load_obj_file;
use crate::math::{Pose, Vec3};
use crate::pose::{
    estimate_pose, reprojection_rms, synthesize_correspondences, visible_points, FeatureSource,
    LmConfig, NoiseConfig,
};
use crate::render::{
    apply_exposure, render, render_with_workers, write_float_image, CameraModel, RadianceImage,
};
use crate::scene_file::{load_scene_file, LoadedScene, SCHEMA};
use crate::sensors::{
    contour_map, depth_map, point_cloud, relative_error_pct, triangulate, StereoRig,
};

#[derive(Debug, Parser)]
#[command(
    name = "raynav",
    version,
    about = "Path tracing, sensor simulation and pose estimation for space scenes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a scene to PPM (or PNG when the output ends in .png).
    Render(RenderArgs),
    /// Write a depth map, its preview and a point cloud.
    Depth(DepthArgs),
    /// Triangulate ground-truth correspondences between two views.
    Stereo(StereoArgs),
    /// Estimate a mesh pose against a reference view.
    Pose(PoseArgs),
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub scene: PathBuf,
    /// Output image path.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Samples per pixel; overrides sampler.spp.
    #[arg(long)]
    pub spp: Option<u32>,
    /// RNG seed; overrides sampler.seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Exposure in stops; overrides the scene's camera.exposure_stops.
    #[arg(long, allow_negative_numbers = true)]
    pub stops: Option<f64>,
    /// Worker threads (0 = all cores). Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Also write linear radiance in the flat float format.
    #[arg(long)]
    pub radiance: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    pub scene: PathBuf,
    /// Output stem: writes <stem>.depth, <stem>.pgm and <stem>.xyz.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Also write <stem>.contour.pgm with this many bands.
    #[arg(long)]
    pub contours: Option<u32>,
}

#[derive(Debug, Args)]
pub struct StereoArgs {
    pub left: PathBuf,
    pub right: PathBuf,
    /// CSV of true and triangulated points per feature.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Gaussian pixel noise (standard deviation) added to both views.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Upper bound on the number of sampled features.
    #[arg(long, default_value_t = 400)]
    pub max_points: usize,
}

#[derive(Debug, Args)]
pub struct PoseArgs {
    /// Scene whose camera defines the reference view of the mesh.
    pub scene: PathBuf,
    /// Mesh whose vertices are the features, in the scene's world frame.
    pub mesh: PathBuf,
    /// Initial pose qx,qy,qz,tx,ty,tz (CRP attitude, translation).
    #[arg(
        long,
        required = true,
        allow_hyphen_values = true,
        value_delimiter = ','
    )]
    pub init: Vec<f64>,
    /// CSV of the solver trace (iter,chi2,lambda,rho,accepted); the image goes next to it.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Gaussian pixel noise added to the observed features.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip rendering the image at the estimated pose.
    #[arg(long)]
    pub no_image: bool,
}

/// Parses arguments, runs the command and maps errors to exit code 1.
pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let matches = Cli::command().after_long_help(schema_help()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn schema_help() -> String {
    format!("SCENE FILE FORMAT (TOML):\n\n{SCHEMA}")
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Render(a) => run_render(a),
        Command::Depth(a) => run_depth(a),
        Command::Stereo(a) => run_stereo(a),
        Command::Pose(a) => run_pose(a),
    }
}

fn load(path: &Path) -> Result<LoadedScene> {
    load_scene_file(path)?.build()
}

fn write_image(img: &RadianceImage, path: &Path) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("png") => img.write_png(path),
        _ => img.write_ppm(path),
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn run_render(a: &RenderArgs) -> Result<()> {
    let mut loaded = load(&a.scene)?;
    if let Some(spp) = a.spp {
        loaded.sampler.spp = spp;
    }
    if let Some(seed) = a.seed {
        loaded.sampler.seed = seed;
    }
    let workers = if a.workers == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        a.workers
    };
    let (img, stats) =
        render_with_workers(&loaded.scene, &loaded.camera, &loaded.sampler, workers)?;
    info!("{} paths, {} non-finite", stats.paths, stats.non_finite);
    if let Some(p) = &a.radiance {
        let file = std::fs::File::create(p)
            .map_err(|e| Error::io(format!("creating {}", p.display()), e))?;
        write_float_image(&img.to_float_image(), std::io::BufWriter::new(file))?;
    }
    let stops = a.stops.unwrap_or(loaded.exposure_stops);
    write_image(&apply_exposure(&img, stops), &a.output)
}

fn run_depth(a: &DepthArgs) -> Result<()> {
    let loaded = load(&a.scene)?;
    let depth = depth_map(&loaded.scene, &loaded.camera);
    let path = with_suffix(&a.output, ".depth");
    let file = std::fs::File::create(&path)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    write_float_image(&depth.to_float_image(), std::io::BufWriter::new(file))?;
    write_bytes(&with_suffix(&a.output, ".pgm"), &depth.preview_pgm())?;
    point_cloud(&loaded.scene, &loaded.camera).write_xyz(&with_suffix(&a.output, ".xyz"))?;
    if let Some(n) = a.contours {
        let map = contour_map(&depth.depth, depth.width, depth.height, n)?;
        write_bytes(&with_suffix(&a.output, ".contour.pgm"), &map.to_pgm())?;
    }
    println!("{} of {} pixels hit", depth.hit_count(), depth.depth.len());
    Ok(())
}

fn run_stereo(a: &StereoArgs) -> Result<()> {
    let left_cfg = load_scene_file(&a.left)?;
    let right_cfg = load_scene_file(&a.right)?;
    if left_cfg.world_hash()? != right_cfg.world_hash()? {
        return Err(Error::Config(format!(
            "{} and {} describe different worlds (lights, objects, background must match)",
            a.left.display(),
            a.right.display()
        )));
    }
    let left = left_cfg.build()?;
    let right_cam = right_cfg.camera_model()?;
    let rig = StereoRig::from_cameras(&left.camera, &right_cam);
    let hits = crate::render::first_hits(&left.scene, &left.camera);
    let n_hit = hits.iter().flatten().count();
    let stride = n_hit.div_ceil(a.max_points.max(1)).max(1);
    let sampled: Vec<Vec3> = hits
        .iter()
        .flatten()
        .step_by(stride)
        .map(|h| h.point)
        .collect();
    let features = visible_points(&left.scene, &right_cam, &sampled);
    if features.is_empty() {
        return Err(Error::InsufficientFeatures {
            required: 1,
            found: 0,
        });
    }

    let truth_left: Vec<Vec3> = features
        .iter()
        .map(|p| left.camera.to_camera_frame(p))
        .collect();
    let noise = NoiseConfig {
        sigma: a.noise,
        seed: a.seed,
    };
    let pixels = stereo_pixels(&rig, &truth_left, &noise)?;

    let mut csv = String::from("x,y,z,x_est,y_est,z_est,err_x_pct,err_y_pct,err_z_pct\n");
    let mut max_abs: f64 = 0.0;
    let mut solved = 0usize;
    for (p, (l, r)) in truth_left.iter().zip(&pixels) {
        let Ok(est) = triangulate(&rig, *l, *r) else {
            continue;
        };
        solved += 1;
        max_abs = max_abs.max((est - p).amax());
        let pct =
            relative_error_pct(&est, p).map(|e| e.map_or(String::new(), |v| format!("{v:e}")));
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            p.x, p.y, p.z, est.x, est.y, est.z, pct[0], pct[1], pct[2]
        ));
    }
    write_bytes(&a.output, csv.as_bytes())?;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "triangulated {solved} of {} features", features.len());
    let _ = writeln!(out, "max abs coordinate error {max_abs:e}");
    Ok(())
}

type Pixel = (f64, f64);

/// Left/right pixels of left-frame points with Gaussian noise on every
/// coordinate.
fn stereo_pixels(
    rig: &StereoRig,
    points: &[Vec3],
    noise: &NoiseConfig,
) -> Result<Vec<(Pixel, Pixel)>> {
    if !(noise.sigma >= 0.0 && noise.sigma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "noise must be non-negative, got {}",
            noise.sigma
        )));
    }
    let normal = Normal::new(0.0, noise.sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut jitter = |(u, v): Pixel| {
        if noise.sigma > 0.0 {
            (u + normal.sample(&mut rng), v + normal.sample(&mut rng))
        } else {
            (u, v)
        }
    };
    points
        .iter()
        .map(|p| {
            let (l, r) = rig.project(p)?;
            Ok((jitter(l), jitter(r)))
        })
        .collect()
}

fn run_pose(a: &PoseArgs) -> Result<()> {
    let loaded = load(&a.scene)?;
    let mesh = load_obj_file(&a.mesh)?;
    if a.init.len() != 6 {
        return Err(Error::InvalidInput(format!(
            "--init needs 6 values, got {}",
            a.init.len()
        )));
    }
    let x0 = Pose::from_slice(&a.init)?;
    let reference = loaded.camera.pose()?;
    let k = loaded.camera.intrinsics();

    let mut candidates = mesh.positions.clone();
    candidates.sort_by(|p, q| {
        (p.x, p.y, p.z)
            .partial_cmp(&(q.x, q.y, q.z))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    candidates.dedup();
    let points = visible_points(&loaded.scene, &loaded.camera, &candidates);
    let noise = NoiseConfig {
        sigma: a.noise,
        seed: a.seed,
    };
    let correspondences = synthesize_correspondences(&points, &reference, &k, &noise)?;
    let source = FeatureSource::Correspondences(correspondences.clone());
    let report = estimate_pose(&source, &k, &x0, &LmConfig::default())?;
    report.write_csv(&a.output)?;

    let est = report.pose()?;
    let rms = reprojection_rms(&est, &correspondences, &k)?;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{} features, {} iterations, {:?}, reprojection RMS {rms:.3e} px",
        points.len(),
        report.iterations,
        report.termination
    );
    let p = est.to_array();
    let _ = writeln!(
        out,
        "estimate q = ({:.9}, {:.9}, {:.9}) t = ({:.9}, {:.9}, {:.9})",
        p[0], p[1], p[2], p[3], p[4], p[5]
    );
    if !a.no_image {
        let cam = CameraModel::from_pose(
            &est,
            loaded.camera.fov,
            loaded.camera.width,
            loaded.camera.height,
        )?;
        let img = render(&loaded.scene, &cam, &loaded.sampler)?;
        write_image(
            &apply_exposure(&img, loaded.exposure_stops),
            &a.output.with_extension("ppm"),
        )?;
    }
    Ok(())
}
