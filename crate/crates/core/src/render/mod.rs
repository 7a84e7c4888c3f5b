//! Monte Carlo path tracing, cameras, textures and image output.

mod camera;
mod image;
mod integrator;
pub(crate) use integrator::first_hits;
pub mod sampling;
mod texture;

pub use camera::{circle_of_confusion, thin_lens_image_distance, CameraModel, Lens};
pub(crate) use image::pgm_bytes;
pub use image::{apply_exposure, read_float_image, write_float_image, FloatImage, RadianceImage};
pub use integrator::{
    pixel_rng, render, render_with_workers, trace_path, PixelHit, RenderStats, SamplerConfig,
};
pub use texture::Texture;
