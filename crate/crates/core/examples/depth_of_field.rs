//! Thin-lens depth of field: three spheres at different depths rendered with
//! the focus on each in turn, alongside the predicted blur circles.
//!
//! ```text
//! cargo run --release --example depth_of_field
//! ```

use std::path::Path;

use raynav::geometry::{Sphere, Triangle};
use raynav::math::{Rgb, Vec3};
use raynav::render::{circle_of_confusion, render, CameraModel, Lens, SamplerConfig};
use raynav::scene::Scene;
use raynav::shading::{LightSource, Material};

fn main() -> raynav::Result<()> {
    let mut b = Scene::builder();
    let floor = b.material(Material::diffuse(Rgb::repeat(0.6)));
    let colours = [
        Rgb::new(0.8, 0.2, 0.2),
        Rgb::new(0.2, 0.8, 0.2),
        Rgb::new(0.2, 0.3, 0.9),
    ];
    let depths = [2.0, 4.0, 8.0];
    for (c, d) in colours.iter().zip(depths) {
        let m = b.material(Material::diffuse(*c));
        b.sphere(Sphere::new(Vec3::new(0.6 * (d - 4.0), 0.0, -d), 0.4, m)?);
    }
    let s = 40.0;
    let (p0, p1, p2, p3) = (
        Vec3::new(-s, -0.4, 1.0),
        Vec3::new(s, -0.4, 1.0),
        Vec3::new(s, -0.4, -s),
        Vec3::new(-s, -0.4, -s),
    );
    b.triangle(Triangle::new(p0, p1, p2, floor)?);
    b.triangle(Triangle::new(p0, p2, p3, floor)?);
    b.light(LightSource::directional(
        Vec3::new(-0.3, -1.0, -0.4),
        Rgb::repeat(2.5),
    ));
    b.ambient(Rgb::repeat(0.1));
    let scene = b.build()?;

    let (focal_length, aperture) = (0.05, 0.08);
    std::fs::create_dir_all("out").map_err(|e| raynav::Error::io("creating out/", e))?;
    for focus in depths {
        let camera = CameraModel::look_at(
            Vec3::zeros(),
            -Vec3::z(),
            Vec3::y(),
            40f64.to_radians(),
            240,
            160,
        )?
        .with_lens(Lens::ThinLens {
            aperture_radius: aperture,
            focus_distance: focus,
            focal_length,
        })?;
        let film_height = 2.0 * camera.image_distance().unwrap() * (0.5 * camera.fov).tan();
        let blur: Vec<String> = depths
            .iter()
            .map(|d| {
                circle_of_confusion(focal_length, focus, aperture, *d)
                    .map(|c| format!("{:.1}", c / film_height * 160.0))
            })
            .collect::<raynav::Result<_>>()?;
        let img = render(
            &scene,
            &camera,
            &SamplerConfig {
                spp: 64,
                max_depth: 3,
                ..Default::default()
            },
        )?;
        let name = format!("out/focus_{focus}.png");
        img.write_png(Path::new(&name))?;
        println!("focus {focus}: blur circle diameters in pixels at depths {depths:?} = [{}], wrote {name}", blur.join(", "));
    }
    Ok(())
}
