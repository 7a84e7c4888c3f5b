use crate::error::{Error, Result};
use crate::math::{CameraIntrinsics, Rotation3, Vec3};
use crate::render::CameraModel;

/// Calibrated camera pair. `x_r = R·x_l + t` maps left-frame coordinates
/// into the right frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StereoRig {
    pub left: CameraIntrinsics,
    pub right: CameraIntrinsics,
    pub rotation: Rotation3,
    pub translation: Vec3,
}

impl StereoRig {
    pub fn new(
        left: CameraIntrinsics,
        right: CameraIntrinsics,
        rotation: Rotation3,
        translation: Vec3,
    ) -> Self {
        Self {
            left,
            right,
            rotation,
            translation,
        }
    }

    /// Rig relating two placed cameras.
    pub fn from_cameras(left: &CameraModel, right: &CameraModel) -> Self {
        let cl = left.world_to_camera();
        let cr = right.world_to_camera();
        Self {
            left: left.intrinsics(),
            right: right.intrinsics(),
            rotation: cr.compose(&cl.transpose()),
            translation: cr.apply(&(left.origin - right.origin)),
        }
    }

    pub fn baseline(&self) -> f64 {
        self.translation.norm()
    }

    /// Pixel of a left-frame point in each view.
    pub fn project(&self, p_left: &Vec3) -> Result<((f64, f64), (f64, f64))> {
        let p_right = self.rotation.apply(p_left) + self.translation;
        Ok((
            project_with(&self.left, p_left)?,
            project_with(&self.right, &p_right)?,
        ))
    }
}

fn project_with(k: &CameraIntrinsics, p: &Vec3) -> Result<(f64, f64)> {
    if p.z.abs() < 1e-12 {
        return Err(Error::DegenerateDepth {
            index: 0,
            depth: p.z,
        });
    }
    Ok((k.ox + k.fx * p.x / p.z, k.oy + k.fy * p.y / p.z))
}

/// Left-frame point from a pixel correspondence, solving the right-view
/// horizontal projection for the left depth.
pub fn triangulate(rig: &StereoRig, left_px: (f64, f64), right_px: (f64, f64)) -> Result<Vec3> {
    let (kl, kr) = (&rig.left, &rig.right);
    let ul = left_px.0 - kl.ox;
    let vl = left_px.1 - kl.oy;
    let ur = right_px.0 - kr.ox;
    let r = rig.rotation.matrix();
    let t = &rig.translation;
    let fr = kr.fx;
    let a = ul / kl.fx;
    let b = vl / kl.fy;
    let num = t.z * ur - fr * t.x;
    let den = (r[(0, 0)] * fr - r[(2, 0)] * ur) * a
        + (r[(0, 1)] * fr - r[(2, 1)] * ur) * b
        + (r[(0, 2)] * fr - r[(2, 2)] * ur);
    if den.abs() < 1e-12 || t.norm() < 1e-12 {
        return Err(Error::DegenerateGeometry(format!(
            "triangulation denominator {den:e} with baseline {:e}",
            t.norm()
        )));
    }
    let z = num / den;
    Ok(Vec3::new(z * a, z * b, z))
}

/// `|x̂ − x| / |x| × 100` per coordinate; `None` where the truth is zero.
pub fn relative_error_pct(estimate: &Vec3, truth: &Vec3) -> [Option<f64>; 3] {
    std::array::from_fn(|k| {
        (truth[k].abs() > 1e-12).then(|| (estimate[k] - truth[k]).abs() / truth[k].abs() * 100.0)
    })
}
