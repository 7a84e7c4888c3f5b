//! Unidirectional path tracer with next-event estimation.
//!
//! Paths are cut at a fixed depth with no Russian roulette, so a furnace
//! of albedo ρ and unit emission converges to `Σ_{k=0}^{depth} ρᵏ`.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::HitRecord;
use crate::math::{Ray, Rgb, Vec3};
use crate::scene::Scene;
use crate::shading::{
    phong_radiance, reflect_dir, refract_dir, schlick_reflectance, shadow_test, MaterialKind,
};

use super::camera::CameraModel;
use super::image::RadianceImage;
use super::sampling::{cosine_hemisphere, phong_lobe};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub spp: u32,
    pub max_depth: u32,
    pub seed: u64,
    /// Also record the pixel-centre first hit of every pixel.
    pub record_hits: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            spp: 16,
            max_depth: 40,
            seed: 0,
            record_hits: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.spp == 0 {
            return Err(Error::Config("samples per pixel must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelHit {
    pub t: f64,
    pub point: Vec3,
    pub primitive: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RenderStats {
    pub paths: u64,
    /// Path samples whose radiance was NaN or infinite and replaced by 0.
    pub non_finite: u64,
}

/// RNG for one pixel: ChaCha8 keyed by `seed` on stream `pixel_index`.
pub fn pixel_rng(seed: u64, pixel_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pixel_index);
    rng
}

/// Radiance arriving along `ray`, with non-finite estimates replaced by 0.
pub fn trace_path<R: Rng + ?Sized>(scene: &Scene, ray: &Ray, max_depth: u32, rng: &mut R) -> Rgb {
    let l = radiance(scene, ray, max_depth, rng);
    if l.iter().all(|c| c.is_finite()) {
        l
    } else {
        Rgb::zeros()
    }
}

fn mean(c: &Rgb) -> f64 {
    (c.x + c.y + c.z) / 3.0
}

/// Offsets `p` off the surface to the side `dir` leaves from.
fn spawn(hit: &HitRecord, dir: Vec3, eps: f64) -> Ray {
    let side = if dir.dot(&hit.normal) >= 0.0 {
        1.0
    } else {
        -1.0
    };
    Ray::new(hit.point + hit.normal * (side * eps), dir)
}

fn radiance<R: Rng + ?Sized>(scene: &Scene, primary: &Ray, max_depth: u32, rng: &mut R) -> Rgb {
    let eps = scene.epsilon();
    let ambient = scene.ambient();
    let mut l = Rgb::zeros();
    let mut beta = Rgb::repeat(1.0);
    let mut ray = *primary;

    for depth in 0..=max_depth {
        let Some(hit) = scene.intersect(&ray) else {
            l += beta.component_mul(&scene.background().radiance(&ray.direction));
            break;
        };
        let prim = &scene.primitives()[hit.primitive];
        let mat = scene.material(prim.material());
        l += beta.component_mul(&(mat.emission() + mat.k_a.component_mul(&ambient)));
        if depth == max_depth {
            break;
        }

        let dir = ray.direction;
        let front = dir.dot(&hit.normal) < 0.0;
        let n_g = if front { hit.normal } else { -hit.normal };
        let mut n_s = hit.shading_normal;
        if n_s.dot(&n_g) < 0.0 {
            n_s = -n_s;
        }

        let next = match mat.kind {
            MaterialKind::Diffuse => {
                let albedo = scene.albedo_at(&hit);
                let coeffs = mat.brdf_phong(albedo);
                let origin = hit.point + n_g * eps;
                for light in scene.lights() {
                    if !shadow_test(scene, &origin, light, eps) {
                        let direct =
                            phong_radiance(&hit.point, &n_s, &dir, light, &coeffs, &Rgb::zeros());
                        l += beta.component_mul(&direct);
                    }
                }
                let p_d = mean(&albedo).max(0.0);
                let p_s = mean(&mat.k_s).max(0.0);
                let total = p_d + p_s;
                if total <= 0.0 {
                    break;
                }
                if rng.random::<f64>() * total < p_d {
                    let (wi, _) = cosine_hemisphere(&n_s, rng.random(), rng.random());
                    beta = beta.component_mul(&albedo) * (total / p_d);
                    wi
                } else {
                    let axis = reflect_dir(&dir, &n_s);
                    let n = mat.shininess;
                    let (wi, _) = phong_lobe(&axis, n, rng.random(), rng.random());
                    let cos = wi.dot(&n_s);
                    if cos <= 0.0 {
                        break;
                    }
                    beta =
                        beta.component_mul(&mat.k_s) * ((n + 2.0) / (n + 1.0) * cos * total / p_s);
                    wi
                }
            }
            MaterialKind::Specular => {
                beta = beta.component_mul(&mat.k_s);
                reflect_dir(&dir, &n_s)
            }
            MaterialKind::Dielectric => {
                let (n1, n2) = if front {
                    (1.0, mat.ior)
                } else {
                    (mat.ior, 1.0)
                };
                let cos_i = -dir.dot(&n_s);
                match refract_dir(&dir, &n_s, n1, n2) {
                    None => reflect_dir(&dir, &n_s),
                    Some(t) => {
                        let cos = if n1 > n2 { -t.dot(&n_s) } else { cos_i };
                        let r = schlick_reflectance(cos, n2 / n1);
                        if rng.random::<f64>() < r {
                            reflect_dir(&dir, &n_s)
                        } else {
                            t
                        }
                    }
                }
            }
        };
        if beta == Rgb::zeros() {
            break;
        }
        ray = spawn(&hit, next, eps);
    }
    l
}

/// Renders with rayon's global pool.
pub fn render(
    scene: &Scene,
    camera: &CameraModel,
    sampler: &SamplerConfig,
) -> Result<RadianceImage> {
    render_impl(scene, camera, sampler).map(|(img, _)| img)
}

/// Renders on a dedicated pool of `workers` threads and reports statistics.
/// The image does not depend on `workers`.
pub fn render_with_workers(
    scene: &Scene,
    camera: &CameraModel,
    sampler: &SamplerConfig,
    workers: usize,
) -> Result<(RadianceImage, RenderStats)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| render_impl(scene, camera, sampler))
}

fn render_impl(
    scene: &Scene,
    camera: &CameraModel,
    sampler: &SamplerConfig,
) -> Result<(RadianceImage, RenderStats)> {
    sampler.validate()?;
    let (w, h) = (camera.width as usize, camera.height as usize);
    let mut img = RadianceImage::new(camera.width, camera.height);
    let non_finite = AtomicU64::new(0);
    let inv_spp = 1.0 / sampler.spp as f64;

    img.pixels
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(j, row)| {
            for (i, px) in row.iter_mut().enumerate() {
                let mut rng = pixel_rng(sampler.seed, (j * w + i) as u64);
                let mut sum = Rgb::zeros();
                for _ in 0..sampler.spp {
                    let x = i as f64 + rng.random::<f64>();
                    let y = j as f64 + rng.random::<f64>();
                    let lens = [rng.random::<f64>(), rng.random::<f64>()];
                    let ray = camera.generate_ray(x, y, lens);
                    let l = radiance(scene, &ray, sampler.max_depth, &mut rng);
                    if l.iter().all(|c| c.is_finite()) {
                        sum += l.map(|c| c.max(0.0));
                    } else {
                        non_finite.fetch_add(1, Ordering::Relaxed);
                    }
                }
                *px = sum * inv_spp;
            }
        });

    if sampler.record_hits {
        img.hits = Some(first_hits(scene, camera));
    }
    let stats = RenderStats {
        paths: (w * h) as u64 * sampler.spp as u64,
        non_finite: non_finite.into_inner(),
    };
    if stats.non_finite > 0 {
        log::warn!("{} non-finite path samples clamped to 0", stats.non_finite);
    }
    Ok((img, stats))
}

/// First hit of each pixel-centre pinhole ray.
pub(crate) fn first_hits(scene: &Scene, camera: &CameraModel) -> Vec<Option<PixelHit>> {
    let w = camera.width as usize;
    let n = w * camera.height as usize;
    (0..n)
        .into_par_iter()
        .map(|k| {
            let ray = camera.pinhole_ray((k % w) as f64 + 0.5, (k / w) as f64 + 0.5);
            scene.intersect(&ray).map(|h| PixelHit {
                t: h.t,
                point: h.point,
                primitive: h.primitive,
            })
        })
        .collect()
}
