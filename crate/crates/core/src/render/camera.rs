use crate::error::{Error, Result};
use crate::math::{camera_basis, CameraBasis, CameraIntrinsics, Pose, Ray, Rotation3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lens {
    Pinhole,
    ThinLens {
        aperture_radius: f64,
        focus_distance: f64,
        focal_length: f64,
    },
}

/// Perspective camera. `fov` is the vertical field of view in radians and
/// pixels are square. Continuous pixel coordinates put the centre of pixel
/// `(i, j)` at `(i + ½, j + ½)` with rows growing downward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub origin: Vec3,
    pub basis: CameraBasis,
    pub fov: f64,
    pub width: u32,
    pub height: u32,
    pub lens: Lens,
}

/// Distance behind the lens at which a point `d_f` in front comes into focus.
pub fn thin_lens_image_distance(f: f64, d_f: f64) -> Result<f64> {
    if !(f > 0.0) || !(d_f > f) {
        return Err(Error::InvalidInput(format!(
            "thin lens needs d_f > f > 0, got f={f} d_f={d_f}"
        )));
    }
    if d_f.is_infinite() {
        return Ok(f);
    }
    Ok(f * d_f / (d_f - f))
}

/// Blur-circle diameter on the film for a point at depth `d` when a lens of
/// focal length `f` and aperture radius `aperture_radius` is focused at
/// `d_f`. Same length unit as `aperture_radius`.
pub fn circle_of_confusion(f: f64, d_f: f64, aperture_radius: f64, d: f64) -> Result<f64> {
    if !(aperture_radius >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "aperture radius must be non-negative, got {aperture_radius}"
        )));
    }
    let v = thin_lens_image_distance(f, d_f)?;
    let v_d = thin_lens_image_distance(f, d)?;
    Ok(2.0 * aperture_radius * (v_d - v).abs() / v_d)
}

impl CameraModel {
    pub fn look_at(
        origin: Vec3,
        target: Vec3,
        up: Vec3,
        fov: f64,
        width: u32,
        height: u32,
    ) -> Result<Self> {
        let basis = camera_basis(&origin, &target, &up)?;
        Self::from_basis(origin, basis, fov, width, height)
    }

    pub fn from_basis(
        origin: Vec3,
        basis: CameraBasis,
        fov: f64,
        width: u32,
        height: u32,
    ) -> Result<Self> {
        if !(fov > 0.0 && fov < std::f64::consts::PI) {
            return Err(Error::Config(format!(
                "field of view must lie in (0, 180) degrees, got {}",
                fov.to_degrees()
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::Config("resolution must be at least 1x1".into()));
        }
        Ok(Self {
            origin,
            basis,
            fov,
            width,
            height,
            lens: Lens::Pinhole,
        })
    }

    /// Camera whose frame places an object at `pose` (object → camera).
    pub fn from_pose(pose: &Pose, fov: f64, width: u32, height: u32) -> Result<Self> {
        let basis = CameraBasis::from_world_to_camera(&pose.rotation());
        Self::from_basis(pose.camera_center(), basis, fov, width, height)
    }

    pub fn with_lens(mut self, lens: Lens) -> Result<Self> {
        if let Lens::ThinLens {
            aperture_radius,
            focus_distance,
            focal_length,
        } = lens
        {
            if !(aperture_radius >= 0.0) {
                return Err(Error::Config("aperture radius must be non-negative".into()));
            }
            thin_lens_image_distance(focal_length, focus_distance)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        self.lens = lens;
        Ok(self)
    }

    pub fn focal_pixels(&self) -> f64 {
        0.5 * self.height as f64 / (0.5 * self.fov).tan()
    }

    pub fn intrinsics(&self) -> CameraIntrinsics {
        let f = self.focal_pixels();
        CameraIntrinsics {
            fx: f,
            fy: f,
            ox: 0.5 * self.width as f64,
            oy: 0.5 * self.height as f64,
        }
    }

    pub fn world_to_camera(&self) -> Rotation3 {
        self.basis.world_to_camera()
    }

    /// World point expressed in the camera frame (`z` forward).
    pub fn to_camera_frame(&self, p: &Vec3) -> Vec3 {
        self.world_to_camera().apply(&(p - self.origin))
    }

    /// Pose mapping world points into this camera's frame.
    pub fn pose(&self) -> Result<Pose> {
        let r = self.world_to_camera();
        Pose::from_rotation(&r, -(r.apply(&self.origin)))
    }

    /// Unnormalized chief-ray direction with unit forward component.
    fn chief_direction(&self, px: f64, py: f64) -> Vec3 {
        let f = self.focal_pixels();
        let x = (px - 0.5 * self.width as f64) / f;
        let y = (py - 0.5 * self.height as f64) / f;
        self.basis.u * x - self.basis.v * y - self.basis.w
    }

    pub fn pinhole_ray(&self, px: f64, py: f64) -> Ray {
        Ray::new(self.origin, self.chief_direction(px, py))
    }

    /// Thin-lens ray through lens sample `lens_uv ∈ [0,1]²`, mapped to the
    /// aperture disk as `r = A√u₁, φ = 2πu₂`. All rays for a pixel meet on
    /// the focal plane at `focus_distance` along the view axis.
    pub fn thin_lens_ray(&self, px: f64, py: f64, lens_uv: [f64; 2]) -> Ray {
        let Lens::ThinLens {
            aperture_radius,
            focus_distance,
            ..
        } = self.lens
        else {
            return self.pinhole_ray(px, py);
        };
        if aperture_radius == 0.0 {
            return self.pinhole_ray(px, py);
        }
        let chief = self.chief_direction(px, py);
        let focus = self.origin + chief * focus_distance;
        let r = aperture_radius * lens_uv[0].sqrt();
        let phi = 2.0 * std::f64::consts::PI * lens_uv[1];
        let lens_point =
            self.origin + self.basis.u * (r * phi.cos()) + self.basis.v * (r * phi.sin());
        Ray::new(lens_point, focus - lens_point)
    }

    pub fn generate_ray(&self, px: f64, py: f64, lens_uv: [f64; 2]) -> Ray {
        match self.lens {
            Lens::Pinhole => self.pinhole_ray(px, py),
            Lens::ThinLens { .. } => self.thin_lens_ray(px, py, lens_uv),
        }
    }

    /// Film distance of the thin lens, if any.
    pub fn image_distance(&self) -> Option<f64> {
        match self.lens {
            Lens::ThinLens {
                focus_distance,
                focal_length,
                ..
            } => thin_lens_image_distance(focal_length, focus_distance).ok(),
            Lens::Pinhole => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cam() -> CameraModel {
        CameraModel::look_at(
            Vec3::zeros(),
            Vec3::new(0.0, 0.0, 5.0),
            Vec3::y(),
            60f64.to_radians(),
            64,
            48,
        )
        .unwrap()
    }

    #[test]
    fn image_distance_examples() {
        assert_eq!(thin_lens_image_distance(1.0, 2.0).unwrap(), 2.0);
        assert_abs_diff_eq!(
            thin_lens_image_distance(1.0, 1.5).unwrap(),
            3.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            thin_lens_image_distance(1.0, 1e12).unwrap(),
            1.0,
            epsilon = 1e-11
        );
        assert_eq!(thin_lens_image_distance(1.0, f64::INFINITY).unwrap(), 1.0);
        assert!(thin_lens_image_distance(1.0, 1.0).is_err());
        assert!(thin_lens_image_distance(1.0, 0.5).is_err());
    }

    #[test]
    fn circle_of_confusion_examples() {
        assert_eq!(circle_of_confusion(1.0, 2.0, 0.5, 2.0).unwrap(), 0.0);
        // v = 2, v_d = 4/3 at d = 4.
        assert_abs_diff_eq!(
            circle_of_confusion(1.0, 2.0, 0.5, 4.0).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(circle_of_confusion(1.0, 2.0, -0.1, 4.0).is_err());
        assert!(circle_of_confusion(1.0, 2.0, 0.5, 0.9).is_err());
    }

    #[test]
    fn centre_ray_looks_at_target() {
        let c = cam();
        let r = c.pinhole_ray(32.0, 24.0);
        assert_abs_diff_eq!(r.direction, Vec3::z(), epsilon = 1e-15);
    }

    #[test]
    fn intrinsics_reproject_pixels() {
        let c = cam();
        let k = c.intrinsics();
        for (px, py) in [(0.5, 0.5), (10.25, 40.0), (63.5, 47.5)] {
            let ray = c.pinhole_ray(px, py);
            let p = c.to_camera_frame(&ray.at(7.0));
            assert_abs_diff_eq!(k.ox + k.fx * p.x / p.z, px, epsilon = 1e-9);
            assert_abs_diff_eq!(k.oy + k.fy * p.y / p.z, py, epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_aperture_matches_pinhole() {
        let c = cam()
            .with_lens(Lens::ThinLens {
                aperture_radius: 0.0,
                focus_distance: 5.0,
                focal_length: 0.05,
            })
            .unwrap();
        assert_eq!(
            c.thin_lens_ray(3.0, 7.0, [0.7, 0.2]),
            c.pinhole_ray(3.0, 7.0)
        );
    }

    #[test]
    fn invalid_configs() {
        assert!(CameraModel::look_at(Vec3::zeros(), Vec3::z(), Vec3::y(), -0.1, 4, 4).is_err());
        assert!(CameraModel::look_at(Vec3::zeros(), Vec3::z(), Vec3::y(), 1.0, 0, 4).is_err());
        assert!(cam()
            .with_lens(Lens::ThinLens {
                aperture_radius: 0.1,
                focus_distance: 0.01,
                focal_length: 0.05
            })
            .is_err());
    }

    #[test]
    fn pose_round_trip() {
        let c = CameraModel::look_at(
            Vec3::new(3.0, -2.0, 10.0),
            Vec3::new(0.5, 0.0, 0.0),
            Vec3::y(),
            0.8,
            32,
            32,
        )
        .unwrap();
        let pose = c.pose().unwrap();
        let back = CameraModel::from_pose(&pose, c.fov, 32, 32).unwrap();
        assert_abs_diff_eq!(back.origin, c.origin, epsilon = 1e-12);
        assert_abs_diff_eq!(back.basis.u, c.basis.u, epsilon = 1e-12);
        assert_abs_diff_eq!(back.basis.w, c.basis.w, epsilon = 1e-12);
        let p = Vec3::new(0.3, 0.1, -0.4);
        assert_abs_diff_eq!(pose.transform(&p), c.to_camera_frame(&p), epsilon = 1e-12);
    }
}
