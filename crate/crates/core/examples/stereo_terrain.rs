//! Triangulates terrain points seen by the bundled stereo pair and reports
//! the relative coordinate error as pixel noise grows.
//!
//! ```text
//! cargo run --release --example stereo_terrain
//! ```

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use raynav::pose::visible_points;
use raynav::scene_file::load_scene_file;
use raynav::sensors::{relative_error_pct, triangulate, StereoRig};

fn main() -> raynav::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let left = load_scene_file(&root.join("scenes/stereo_left.toml"))?.build()?;
    let right_cam = load_scene_file(&root.join("scenes/stereo_right.toml"))?.camera_model()?;
    let rig = StereoRig::from_cameras(&left.camera, &right_cam);
    println!(
        "baseline {:.3}, rotation between views {:.3e} rad",
        rig.baseline(),
        rig.rotation.angle_to(&raynav::math::Rotation3::identity())
    );

    // Terrain points under a coarse pixel grid of the left view.
    let mut samples = Vec::new();
    for j in (10..500).step_by(35) {
        for i in (10..500).step_by(35) {
            if let Some(hit) = left
                .scene
                .intersect(&left.camera.pinhole_ray(i as f64 + 0.5, j as f64 + 0.5))
            {
                samples.push(hit.point);
            }
        }
    }
    let features = visible_points(&left.scene, &right_cam, &samples);
    let truth: Vec<_> = features
        .iter()
        .map(|p| left.camera.to_camera_frame(p))
        .collect();
    println!("{} features visible in both views", truth.len());

    println!(
        "{:>8} {:>10} {:>10} {:>10}",
        "sigma", "x err %", "y err %", "z err %"
    );
    for sigma in [0.0, 0.1, 0.5, 1.0] {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut jitter =
            |(u, v): (f64, f64)| (u + noise.sample(&mut rng), v + noise.sample(&mut rng));
        let mut sums = [0.0; 3];
        let mut counts = [0usize; 3];
        for p in &truth {
            let (l, r) = rig.project(p)?;
            let est = triangulate(&rig, jitter(l), jitter(r))?;
            for (k, e) in relative_error_pct(&est, p).into_iter().enumerate() {
                if let Some(e) = e {
                    sums[k] += e;
                    counts[k] += 1;
                }
            }
        }
        let mean = |k: usize| sums[k] / counts[k].max(1) as f64;
        println!(
            "{sigma:>8} {:>10.4} {:>10.4} {:>10.4}",
            mean(0),
            mean(1),
            mean(2)
        );
    }
    Ok(())
}
