//! White-furnace check: inside a closed emissive sphere of albedo ρ every
//! path collects `Σ ρ^k` for `k = 0..=depth`.
//!
//! ```text
//! cargo run --release --example furnace
//! ```

use raynav::geometry::Sphere;
use raynav::math::{Rgb, Vec3};
use raynav::render::{render, CameraModel, SamplerConfig};
use raynav::scene::Scene;
use raynav::shading::Material;

fn main() -> raynav::Result<()> {
    let camera = CameraModel::look_at(
        Vec3::zeros(),
        -Vec3::z(),
        Vec3::y(),
        60f64.to_radians(),
        16,
        16,
    )?;
    println!(
        "{:>6} {:>6} {:>12} {:>12} {:>10}",
        "albedo", "depth", "mean", "expected", "rel err"
    );
    for albedo in [0.2, 0.5, 0.8] {
        let mut b = Scene::builder();
        let wall = b.material(Material {
            k_e: Rgb::repeat(1.0),
            emission_strength: 1.0,
            ..Material::diffuse(Rgb::repeat(albedo))
        });
        b.sphere(Sphere::new(Vec3::zeros(), 10.0, wall)?);
        let scene = b.build()?;
        for depth in [0, 1, 5, 40] {
            let sampler = SamplerConfig {
                spp: 256,
                max_depth: depth,
                ..Default::default()
            };
            let mean = render(&scene, &camera, &sampler)?.mean().mean();
            let expected: f64 = (0..=depth as i32).map(|k| albedo.powi(k)).sum();
            println!(
                "{albedo:>6} {depth:>6} {mean:>12.6} {expected:>12.6} {:>10.2e}",
                (mean - expected).abs() / expected
            );
        }
    }
    Ok(())
}
