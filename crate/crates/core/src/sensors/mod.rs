//! Sensor products derived from first-hit ray casting: depth maps, point
//! clouds, contour maps, and stereo triangulation.

mod stereo;

pub use stereo::{relative_error_pct, triangulate, StereoRig};

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::{Rgb, Vec3};
use crate::render::{CameraModel, FloatImage};
use crate::scene::Scene;

/// Per-pixel Euclidean range `t` along the unit primary ray; misses are
/// `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub width: u32,
    pub height: u32,
    pub depth: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint {
    pub point: Vec3,
    pub color: Rgb,
    pub primitive: usize,
    pub pixel: (u32, u32),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<CloudPoint>,
}

fn pixel_rays(
    camera: &CameraModel,
) -> impl IndexedParallelIterator<Item = (usize, crate::math::Ray)> + '_ {
    let w = camera.width as usize;
    (0..w * camera.height as usize)
        .into_par_iter()
        .map(move |k| {
            let ray = camera.pinhole_ray((k % w) as f64 + 0.5, (k / w) as f64 + 0.5);
            (k, ray)
        })
}

/// Depth from pixel-centre pinhole rays (any lens setting is ignored).
pub fn depth_map(scene: &Scene, camera: &CameraModel) -> DepthMap {
    let depth = pixel_rays(camera)
        .map(|(_, ray)| scene.intersect(&ray).map_or(f64::INFINITY, |h| h.t))
        .collect();
    DepthMap {
        width: camera.width,
        height: camera.height,
        depth,
    }
}

/// Hit points with headlight-shaded surface colour.
pub fn point_cloud(scene: &Scene, camera: &CameraModel) -> PointCloud {
    let w = camera.width as usize;
    let points = pixel_rays(camera)
        .filter_map(|(k, ray)| {
            let hit = scene.intersect(&ray)?;
            let mat = scene.material(scene.primitives()[hit.primitive].material());
            let shade = hit.shading_normal.dot(&ray.direction).abs();
            let color = (scene.albedo_at(&hit) * shade + mat.emission()).map(|c| c.clamp(0.0, 1.0));
            Some(CloudPoint {
                point: ray.at(hit.t),
                color,
                primitive: hit.primitive,
                pixel: ((k % w) as u32, (k / w) as u32),
            })
        })
        .collect();
    PointCloud { points }
}

impl DepthMap {
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.depth[(y * self.width + x) as usize]
    }

    pub fn hit_count(&self) -> usize {
        self.depth.iter().filter(|d| d.is_finite()).count()
    }

    pub fn finite_range(&self) -> Option<(f64, f64)> {
        let mut it = self.depth.iter().copied().filter(|d| d.is_finite());
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), d| (lo.min(d), hi.max(d))))
    }

    /// Single-channel float image; misses stay `+∞`.
    pub fn to_float_image(&self) -> FloatImage {
        FloatImage {
            width: self.width,
            height: self.height,
            channels: 1,
            data: self.depth.iter().map(|&d| d as f32).collect(),
        }
    }

    /// 8-bit preview: near is bright, far is dark, misses are black.
    pub fn preview_pgm(&self) -> Vec<u8> {
        let (lo, hi) = self.finite_range().unwrap_or((0.0, 1.0));
        let span = (hi - lo).max(f64::MIN_POSITIVE);
        let gray: Vec<u8> = self
            .depth
            .iter()
            .map(|&d| {
                if d.is_finite() {
                    (255.0 - 223.0 * (d - lo) / span).round() as u8
                } else {
                    0
                }
            })
            .collect();
        crate::render::pgm_bytes(self.width, self.height, &gray)
    }
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One `x y z r g b` line per point, colours as 0–255 integers.
    pub fn to_xyz(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let c = p.color.map(|c| (c * 255.0).round() as u8);
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                p.point.x, p.point.y, p.point.z, c.x, c.y, c.z
            );
        }
        out
    }

    pub fn write_xyz(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_xyz())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }
}

/// Grid of band labels; `None` marks cells without a finite value.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourMap {
    pub width: u32,
    pub height: u32,
    pub n_levels: u32,
    pub labels: Vec<Option<u32>>,
    /// Lower edge of every band.
    pub boundaries: Vec<f64>,
}

/// Uniform quantization of the finite values into `n_levels` bands between
/// their minimum and maximum. A constant grid yields one band.
pub fn contour_map(values: &[f64], width: u32, height: u32, n_levels: u32) -> Result<ContourMap> {
    if n_levels < 2 {
        return Err(Error::InvalidInput(format!(
            "contour map needs at least 2 levels, got {n_levels}"
        )));
    }
    if values.len() != width as usize * height as usize {
        return Err(Error::InvalidInput(format!(
            "contour grid has {} values for {width}x{height}",
            values.len()
        )));
    }
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
        (l.min(v), h.max(v))
    });
    if !(lo <= hi) || lo == hi {
        return Ok(ContourMap {
            width,
            height,
            n_levels: 1,
            labels: values.iter().map(|v| v.is_finite().then_some(0)).collect(),
            boundaries: if lo.is_finite() { vec![lo] } else { vec![] },
        });
    }
    let n = n_levels as f64;
    let span = hi - lo;
    let labels = values
        .iter()
        .map(|&v| {
            v.is_finite()
                .then(|| (((v - lo) / span * n).floor() as u32).min(n_levels - 1))
        })
        .collect();
    Ok(ContourMap {
        width,
        height,
        n_levels,
        labels,
        boundaries: (0..n_levels).map(|k| lo + k as f64 * span / n).collect(),
    })
}

impl ContourMap {
    /// One gray level per band; unlabeled cells are black.
    pub fn to_pgm(&self) -> Vec<u8> {
        let steps = self.n_levels.saturating_sub(1).max(1) as f64;
        let gray: Vec<u8> = self
            .labels
            .iter()
            .map(|l| match l {
                Some(k) => (32.0 + 223.0 * *k as f64 / steps).round() as u8,
                None => 0,
            })
            .collect();
        crate::render::pgm_bytes(self.width, self.height, &gray)
    }
}
