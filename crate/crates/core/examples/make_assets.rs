//! Regenerates the bundled meshes under `assets/`.
//!
//! ```text
//! cargo run --example make_assets [-- <output dir>]
//! ```

use std::path::PathBuf;

use raynav::geometry::procedural::{station, terrain};
use raynav::geometry::TriangleMesh;

fn write_mesh(dir: &std::path::Path, stem: &str, mesh: &TriangleMesh) -> std::io::Result<()> {
    let mtl = format!("{stem}.mtl");
    std::fs::write(dir.join(format!("{stem}.obj")), mesh.to_obj(Some(&mtl)))?;
    std::fs::write(dir.join(mtl), mesh.to_mtl())?;
    println!(
        "{stem}: {} vertices, {} triangles",
        mesh.positions.len(),
        mesh.triangle_count()
    );
    Ok(())
}

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets"));
    std::fs::create_dir_all(&dir)?;
    write_mesh(&dir, "station", &station())?;
    write_mesh(&dir, "terrain", &terrain())?;
    Ok(())
}
