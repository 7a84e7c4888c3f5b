//! Loads an OBJ mesh with its MTL materials, builds the BVH and compares
//! traversal against brute force.
//!
//! ```text
//! cargo run --release --example load_obj [-- path/to/mesh.obj]
//! ```

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use raynav::geometry::load_obj_file;
use raynav::math::{Ray, Rgb, Vec3};
use raynav::scene::{Scene, Transform};
use raynav::shading::Material;

fn main() -> raynav::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets/station.obj")
        });
    let mesh = load_obj_file(&path)?;
    println!(
        "{}: {} vertices, {} triangles, {} normals, {} uvs",
        path.display(),
        mesh.positions.len(),
        mesh.triangle_count(),
        mesh.normals.len(),
        mesh.uvs.len()
    );
    for m in &mesh.materials {
        println!(
            "  material {:<10} Kd {:?} Ks {:?} Ns {} illum {}",
            m.name,
            m.kd.as_slice(),
            m.ks.as_slice(),
            m.ns,
            m.illum
        );
    }

    let mut b = Scene::builder();
    let fallback = b.material(Material::diffuse(Rgb::repeat(0.5)));
    b.mesh(&mesh, &Transform::default(), None, fallback, None)?;
    let scene = b.build()?;
    let bvh = scene.bvh().expect("non-empty scene");
    println!("BVH: {} nodes, depth {}", bvh.nodes().len(), bvh.depth());

    let bounds = scene.bounds().unwrap();
    let (c, r) = (bounds.centroid(), bounds.extent().norm());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rays: Vec<Ray> = (0..20_000)
        .map(|_| {
            let dir = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let origin = c + dir.normalize() * r;
            let aim = c + Vec3::new(
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
            ) * r;
            Ray::new(origin, aim - origin)
        })
        .collect();
    let start = Instant::now();
    let fast: Vec<_> = rays
        .iter()
        .map(|ray| scene.intersect(ray).map(|h| (h.primitive, h.t)))
        .collect();
    let t_fast = start.elapsed();
    let start = Instant::now();
    let slow: Vec<_> = rays
        .iter()
        .map(|ray| scene.intersect_brute_force(ray).map(|h| (h.primitive, h.t)))
        .collect();
    let t_slow = start.elapsed();
    let agree = fast.iter().zip(&slow).filter(|(a, b)| a == b).count();
    println!(
        "{} rays: {} hits, {agree} identical to brute force; BVH {:.1} ms, brute force {:.1} ms",
        rays.len(),
        fast.iter().flatten().count(),
        t_fast.as_secs_f64() * 1e3,
        t_slow.as_secs_f64() * 1e3
    );
    Ok(())
}
