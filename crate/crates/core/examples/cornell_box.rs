//! Renders the bundled sphere box scene with the path tracer.
//!
//! ```text
//! cargo run --release --example cornell_box [-- <spp>]
//! ```

use std::path::Path;
use std::time::Instant;

use raynav::render::{apply_exposure, render_with_workers};
use raynav::scene_file::load_scene_file;

fn main() -> raynav::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let mut loaded = load_scene_file(&root.join("scenes/cornell.toml"))?.build()?;
    if let Some(spp) = std::env::args().nth(1).and_then(|s| s.parse().ok()) {
        loaded.sampler.spp = spp;
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let start = Instant::now();
    let (img, stats) =
        render_with_workers(&loaded.scene, &loaded.camera, &loaded.sampler, workers)?;
    println!(
        "{}x{} at {} spp on {workers} workers: {:.2} s, {} paths, {} non-finite samples dropped",
        img.width,
        img.height,
        loaded.sampler.spp,
        start.elapsed().as_secs_f64(),
        stats.paths,
        stats.non_finite
    );
    std::fs::create_dir_all("out").map_err(|e| raynav::Error::io("creating out/", e))?;
    apply_exposure(&img, loaded.exposure_stops).write_png(Path::new("out/cornell.png"))?;
    println!("wrote out/cornell.png");
    Ok(())
}
