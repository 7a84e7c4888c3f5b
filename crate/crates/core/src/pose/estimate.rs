use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::math::{CameraIntrinsics, Pose, Ray, Vec3, MIN_DEPTH};
use crate::render::CameraModel;
use crate::scene::Scene;
use crate::shading::Occluder;

use super::lm::{lm_solve, LeastSquaresModel, LmConfig, LmReport};
use super::{analytic_jacobian, apply_intrinsics, f_of_h, g_of_x};

pub const MIN_CORRESPONDENCES: usize = 4;

/// Object-frame point and its measured pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub point: Vec3,
    pub pixel: (f64, f64),
}

/// Parses `x y z u v` lines; blank lines and `#` comments are skipped.
pub fn parse_correspondences(text: &str, source: &str) -> Result<Vec<Correspondence>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: source.into(),
            line: k + 1,
            message,
        };
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| parse_err(format!("{s:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        if v.len() != 5 {
            return Err(parse_err(format!("expected 5 numbers, found {}", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(parse_err("non-finite value".into()));
        }
        out.push(Correspondence {
            point: Vec3::new(v[0], v[1], v[2]),
            pixel: (v[3], v[4]),
        });
    }
    Ok(out)
}

/// Pixel reprojection model over a fixed set of correspondences.
#[derive(Debug, Clone)]
pub struct PnpModel {
    points: Vec<Vec3>,
    k: CameraIntrinsics,
    observed: DVector<f64>,
}

impl PnpModel {
    pub fn new(correspondences: &[Correspondence], k: CameraIntrinsics) -> Result<Self> {
        if correspondences.len() < MIN_CORRESPONDENCES {
            return Err(Error::InsufficientFeatures {
                required: MIN_CORRESPONDENCES,
                found: correspondences.len(),
            });
        }
        Ok(Self {
            points: correspondences.iter().map(|c| c.point).collect(),
            k,
            observed: DVector::from_iterator(
                2 * correspondences.len(),
                correspondences.iter().flat_map(|c| [c.pixel.0, c.pixel.1]),
            ),
        })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }
}

impl LeastSquaresModel for PnpModel {
    fn observations(&self) -> &DVector<f64> {
        &self.observed
    }

    /// Fails if any point sits on or behind the camera plane.
    fn predict(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let pose = Pose::from_slice(x.as_slice())?;
        let h = apply_intrinsics(&g_of_x(&pose), &self.k);
        for (i, p) in self.points.iter().enumerate() {
            let s = h[8] * p.x + h[9] * p.y + h[10] * p.z + h[11];
            if !(s > MIN_DEPTH) {
                return Err(Error::DegenerateDepth { index: i, depth: s });
            }
        }
        Ok(DVector::from_vec(f_of_h(&h, &self.points)?))
    }

    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        analytic_jacobian(&Pose::from_slice(x.as_slice())?, &self.points, &self.k)
    }
}

/// Where the 2D–3D matches come from.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureSource {
    Correspondences(Vec<Correspondence>),
    /// Feature points projected through a known reference pose.
    Reference {
        points: Vec<Vec3>,
        pose: Pose,
        noise: NoiseConfig,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Standard deviation of Gaussian pixel noise on each coordinate.
    pub sigma: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma: 0.0,
            seed: 0,
        }
    }
}

/// Projects `points` through `pose` and perturbs the pixels.
pub fn synthesize_correspondences(
    points: &[Vec3],
    pose: &Pose,
    k: &CameraIntrinsics,
    noise: &NoiseConfig,
) -> Result<Vec<Correspondence>> {
    if !(noise.sigma >= 0.0 && noise.sigma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "noise sigma must be non-negative, got {}",
            noise.sigma
        )));
    }
    let uv = f_of_h(&apply_intrinsics(&g_of_x(pose), k), points)?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let normal = Normal::new(0.0, noise.sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut jitter = || {
        if noise.sigma > 0.0 {
            normal.sample(&mut rng)
        } else {
            0.0
        }
    };
    Ok(points
        .iter()
        .enumerate()
        .map(|(i, p)| Correspondence {
            point: *p,
            pixel: (uv[2 * i] + jitter(), uv[2 * i + 1] + jitter()),
        })
        .collect())
}

/// Points of `candidates` (world frame) in front of `camera`, inside its
/// image and not hidden behind other geometry in `scene`.
pub fn visible_points(scene: &Scene, camera: &CameraModel, candidates: &[Vec3]) -> Vec<Vec3> {
    let k = camera.intrinsics();
    let eps = scene.epsilon();
    candidates
        .iter()
        .filter(|p| {
            let c = camera.to_camera_frame(p);
            if c.z <= MIN_DEPTH {
                return false;
            }
            let u = k.ox + k.fx * c.x / c.z;
            let v = k.oy + k.fy * c.y / c.z;
            if !(0.0..camera.width as f64).contains(&u) || !(0.0..camera.height as f64).contains(&v)
            {
                return false;
            }
            let d = *p - camera.origin;
            let dist = d.norm();
            let ray = Ray::new(camera.origin, d).with_bounds(0.0, dist - 10.0 * eps);
            !scene.occluded(&ray)
        })
        .copied()
        .collect()
}

/// Fits a pose to the features of `source` starting from `x0`.
pub fn estimate_pose(
    source: &FeatureSource,
    k: &CameraIntrinsics,
    x0: &Pose,
    cfg: &LmConfig,
) -> Result<LmReport> {
    let correspondences = match source {
        FeatureSource::Correspondences(c) => c.clone(),
        FeatureSource::Reference {
            points,
            pose,
            noise,
        } => synthesize_correspondences(points, pose, k, noise)?,
    };
    let model = PnpModel::new(&correspondences, *k)?;
    lm_solve(&model, &x0.to_array(), cfg)
}

/// Root-mean-square pixel distance between projections at `pose` and the
/// measured pixels.
pub fn reprojection_rms(
    pose: &Pose,
    correspondences: &[Correspondence],
    k: &CameraIntrinsics,
) -> Result<f64> {
    if correspondences.is_empty() {
        return Ok(0.0);
    }
    let points: Vec<Vec3> = correspondences.iter().map(|c| c.point).collect();
    let uv = f_of_h(&apply_intrinsics(&g_of_x(pose), k), &points)?;
    let sum: f64 = correspondences
        .iter()
        .enumerate()
        .map(|(i, c)| (uv[2 * i] - c.pixel.0).powi(2) + (uv[2 * i + 1] - c.pixel.1).powi(2))
        .sum();
    Ok((sum / correspondences.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Rotation3;
    use rand::Rng;

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::new(800.0, 800.0, 320.0, 240.0).unwrap()
    }

    fn cloud(n: usize, seed: u64) -> Vec<Vec3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect()
    }

    fn truth() -> Pose {
        Pose::new(Vec3::new(0.1, -0.2, 0.15), Vec3::new(0.2, -0.1, 6.0)).unwrap()
    }

    #[test]
    fn parses_correspondence_files() {
        let text = "# x y z u v\n1 2 3 4.5 6\n\n-1 0 0.5 10 20 # trailing\n";
        let c = parse_correspondences(text, "c.txt").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[1].point, Vec3::new(-1.0, 0.0, 0.5));
        assert_eq!(c[1].pixel, (10.0, 20.0));
        let err = parse_correspondences("1 2 3 4\n", "c.txt").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(parse_correspondences("1 2 x 4 5\n", "c.txt").is_err());
    }

    #[test]
    fn too_few_features() {
        let c = synthesize_correspondences(&cloud(3, 1), &truth(), &k(), &NoiseConfig::default())
            .unwrap();
        let err = estimate_pose(
            &FeatureSource::Correspondences(c),
            &k(),
            &truth(),
            &LmConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientFeatures {
                required: 4,
                found: 3
            }
        ));
    }

    #[test]
    fn start_at_truth_converges_immediately() {
        let src = FeatureSource::Reference {
            points: cloud(10, 2),
            pose: truth(),
            noise: NoiseConfig::default(),
        };
        let rep = estimate_pose(&src, &k(), &truth(), &LmConfig::default()).unwrap();
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn recovers_perturbed_pose_to_gauge_precision() {
        let pts = cloud(12, 3);
        let t = truth();
        let src = FeatureSource::Reference {
            points: pts.clone(),
            pose: t,
            noise: NoiseConfig::default(),
        };
        let q0 = Rotation3::from_axis_angle(&Vec3::new(1.0, 1.0, 0.0).normalize(), 0.09)
            .compose(&t.rotation());
        let x0 = Pose::from_rotation(&q0, t.t * 1.05).unwrap();
        let rep = estimate_pose(&src, &k(), &x0, &LmConfig::default()).unwrap();
        let est = rep.pose().unwrap();
        let rel = est.rotation().transpose().compose(&t.rotation());
        let off = (rel.matrix() - nalgebra::Matrix3::identity()).abs().max();
        assert!(off < 1e-6, "rotation gauge {off}");
        assert!((est.t - t.t).norm() < 1e-6);
        let costs = rep.accepted_costs();
        assert!(costs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn noisy_fit_residual_tracks_sigma() {
        let pts = cloud(50, 4);
        let t = truth();
        let noise = NoiseConfig {
            sigma: 0.5,
            seed: 11,
        };
        let corr = synthesize_correspondences(&pts, &t, &k(), &noise).unwrap();
        let rep = estimate_pose(
            &FeatureSource::Correspondences(corr.clone()),
            &k(),
            &t,
            &LmConfig::default(),
        )
        .unwrap();
        let rms = reprojection_rms(&rep.pose().unwrap(), &corr, &k()).unwrap();
        // Per-point distance RMS of isotropic noise is √2·σ.
        let per_axis = rms / 2f64.sqrt();
        assert!(per_axis > 0.25 && per_axis < 1.0, "rms {rms}");
    }

    #[test]
    fn behind_camera_points_rejected() {
        let corr =
            synthesize_correspondences(&cloud(6, 5), &truth(), &k(), &NoiseConfig::default())
                .unwrap();
        let model = PnpModel::new(&corr, k()).unwrap();
        let behind = Pose::new(Vec3::zeros(), Vec3::new(0.0, 0.0, -6.0)).unwrap();
        assert!(model
            .predict(&DVector::from_column_slice(&behind.to_array()))
            .is_err());
    }
}
