//! Shell atmosphere: sky colour against turbidity, direct-sun transmittance
//! and refraction of a grazing ray.
//!
//! ```text
//! cargo run --release --example atmosphere
//! ```

use std::path::Path;

use raynav::atmosphere::{build_shells, refractive_index, sun_direction, AtmosphereConfig, SkyMap};
use raynav::math::Vec3;
use raynav::render::{apply_exposure, render, CameraModel, SamplerConfig};
use raynav::scene::{Background, Scene};

fn main() -> raynav::Result<()> {
    let sun = sun_direction(0.0, 30f64.to_radians());
    let zenith = Vec3::z();
    let horizon = sun_direction(std::f64::consts::PI, 5f64.to_radians());
    println!(
        "{:>9} {:>28} {:>28} {:>24}",
        "turbidity", "zenith RGB", "anti-sun horizon RGB", "sun transmittance"
    );
    for turbidity in [1.0, 2.0, 4.0, 8.0] {
        let grid = build_shells(&AtmosphereConfig {
            turbidity,
            sun_direction: sun,
            ..Default::default()
        })?;
        let z = grid.sky_radiance(&zenith, &sun);
        let h = grid.sky_radiance(&horizon, &sun);
        let t = grid.sun_transmittance(&sun);
        println!(
            "{turbidity:>9} {:>8.4} {:>8.4} {:>8.4}   {:>8.4} {:>8.4} {:>8.4}   {:>6.3} {:>6.3} {:>6.3}",
            z.x, z.y, z.z, h.x, h.y, h.z, t.x, t.y, t.z
        );
    }

    let grid = build_shells(&AtmosphereConfig::default())?;
    println!(
        "refractive index: sea level {:.6}, 5 km {:.6}, 20 km {:.6}",
        refractive_index(0.0),
        refractive_index(5000.0),
        refractive_index(20_000.0)
    );
    let grazing = sun_direction(0.0, 1f64.to_radians());
    let path = grid.refracted_path(&grid.observer(), &grazing);
    let bend = path.direction.dot(&grazing).clamp(-1.0, 1.0).acos();
    println!(
        "1 degree ray: {} segments, exit direction turned by {:.4} degrees",
        path.points.len() - 1,
        bend.to_degrees()
    );

    std::fs::create_dir_all("out").map_err(|e| raynav::Error::io("creating out/", e))?;
    let camera = CameraModel::look_at(
        Vec3::zeros(),
        Vec3::new(0.0, 100.0, 70.0),
        Vec3::z(),
        60f64.to_radians(),
        240,
        135,
    )?;
    for elevation in [5.0, 20.0, 60.0] {
        let cfg = AtmosphereConfig {
            turbidity: 2.5,
            sun_direction: sun_direction(70f64.to_radians(), f64::to_radians(elevation)),
            ..Default::default()
        };
        let mut b = Scene::builder();
        b.background(Background::Sky(Box::new(SkyMap::new(
            &build_shells(&cfg)?,
            48,
            96,
        ))));
        let img = render(
            &b.build()?,
            &camera,
            &SamplerConfig {
                spp: 2,
                max_depth: 1,
                ..Default::default()
            },
        )?;
        let name = format!("out/sky_{elevation}.png");
        apply_exposure(&img, -2.0).write_png(Path::new(&name))?;
        println!("wrote {name}");
    }
    Ok(())
}
