//! Range sensor products for the docking view: a depth map, its preview,
//! an XYZ point cloud and a banded contour image.
//!
//! ```text
//! cargo run --release --example depth_point_cloud
//! ```

use std::path::Path;

use raynav::render::write_float_image;
use raynav::scene_file::load_scene_file;
use raynav::sensors::{contour_map, depth_map, point_cloud};

fn main() -> raynav::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let loaded = load_scene_file(&root.join("scenes/docking.toml"))?.build()?;
    let depth = depth_map(&loaded.scene, &loaded.camera);
    let cloud = point_cloud(&loaded.scene, &loaded.camera);
    let (near, far) = depth.finite_range().unwrap_or((0.0, 0.0));
    println!(
        "{} of {} pixels hit, range {near:.2} to {far:.2}, {} cloud points",
        depth.hit_count(),
        depth.depth.len(),
        cloud.len()
    );

    std::fs::create_dir_all("out").map_err(|e| raynav::Error::io("creating out/", e))?;
    let file = std::fs::File::create("out/docking.depth")
        .map_err(|e| raynav::Error::io("creating out/docking.depth", e))?;
    write_float_image(&depth.to_float_image(), std::io::BufWriter::new(file))?;
    std::fs::write("out/docking_depth.pgm", depth.preview_pgm())
        .map_err(|e| raynav::Error::io("writing preview", e))?;
    cloud.write_xyz(Path::new("out/docking.xyz"))?;
    let contours = contour_map(&depth.depth, depth.width, depth.height, 8)?;
    std::fs::write("out/docking_contours.pgm", contours.to_pgm())
        .map_err(|e| raynav::Error::io("writing contours", e))?;
    println!(
        "wrote out/docking.depth, out/docking_depth.pgm, out/docking.xyz, out/docking_contours.pgm"
    );
    Ok(())
}
