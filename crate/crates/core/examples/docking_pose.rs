//! Five-frame docking approach: render each reference view, then track the
//! station pose frame to frame from noisy vertex features.
//!
//! ```text
//! cargo run --release --example docking_pose
//! ```

use std::path::Path;

use raynav::geometry::load_obj_file;
use raynav::math::{rotation_to_crp, Pose, Rgb, Rotation3, Vec3};
use raynav::pose::{
    estimate_pose, reprojection_rms, synthesize_correspondences, visible_points, FeatureSource,
    LmConfig, NoiseConfig,
};
use raynav::render::{render, CameraModel, SamplerConfig};
use raynav::scene::{Scene, Transform};
use raynav::shading::{LightSource, Material};

fn main() -> raynav::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let mesh = load_obj_file(&root.join("assets/station.obj"))?;
    let mut b = Scene::builder();
    let fallback = b.material(Material::diffuse(Rgb::repeat(0.5)));
    b.mesh(&mesh, &Transform::default(), None, fallback, None)?;
    b.light(LightSource::directional(
        Vec3::new(-0.5, 0.6, -1.0),
        Rgb::repeat(4.0),
    ));
    b.ambient(Rgb::repeat(0.03));
    let scene = b.build()?;

    let mut vertices = mesh.positions.clone();
    vertices.sort_by(|p, q| (p.x, p.y, p.z).partial_cmp(&(q.x, q.y, q.z)).unwrap());
    vertices.dedup();

    std::fs::create_dir_all("out").map_err(|e| raynav::Error::io("creating out/", e))?;
    let sampler = SamplerConfig {
        spp: 8,
        max_depth: 4,
        ..Default::default()
    };
    let (far, near, target) = (
        Vec3::new(14.0, -30.0, 66.0),
        Vec3::new(4.0, -9.0, 22.0),
        Vec3::new(0.0, 0.0, 2.0),
    );
    let mut estimate: Option<Pose> = None;
    for frame in 0..5 {
        let eye = far + (near - far) * (frame as f64 / 4.0);
        let camera = CameraModel::look_at(eye, target, Vec3::y(), 40f64.to_radians(), 320, 240)?;
        let truth = camera.pose()?;
        let k = camera.intrinsics();
        render(&scene, &camera, &sampler)?
            .write_png(Path::new(&format!("out/docking_{frame}.png")))?;

        let points = visible_points(&scene, &camera, &vertices);
        let corr = synthesize_correspondences(
            &points,
            &truth,
            &k,
            &NoiseConfig {
                sigma: 0.25,
                seed: frame,
            },
        )?;
        let x0 = match estimate {
            Some(prev) => prev,
            None => {
                let tilt = Rotation3::from_axis_angle(
                    &Vec3::new(1.0, 1.0, 0.0).normalize(),
                    5f64.to_radians(),
                );
                Pose::new(
                    rotation_to_crp(&truth.rotation().compose(&tilt))?,
                    truth.t * 1.05,
                )?
            }
        };
        let report = estimate_pose(
            &FeatureSource::Correspondences(corr.clone()),
            &k,
            &x0,
            &LmConfig::default(),
        )?;
        let est = report.pose()?;
        println!(
            "frame {frame}: range {:5.1}, {:3} features, {:2} iterations ({:?}), RMS {:.3} px, rotation error {:.2e} rad, position error {:.3}",
            (eye - target).norm(),
            points.len(),
            report.iterations,
            report.termination,
            reprojection_rms(&est, &corr, &k)?,
            est.rotation().angle_to(&truth.rotation()),
            (est.camera_center() - eye).norm()
        );
        estimate = Some(est);
    }
    println!("wrote out/docking_0.png .. out/docking_4.png");
    Ok(())
}
