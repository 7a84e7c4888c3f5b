//! Shared math substrate: vectors, rays, CRP attitude, camera bases,
//! homographies and perspective projection.

use nalgebra::{Matrix3, Matrix3x4, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Linear RGB triple. Radiance, reflectance and coefficients all use it.
pub type Rgb = Vector3<f64>;

/// Smallest projective depth accepted by [`project`].
pub const MIN_DEPTH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
    pub t_min: f64,
    pub t_max: f64,
}

impl Ray {
    /// Builds a ray over `[0, inf)`, normalizing `direction`.
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        Self {
            origin,
            direction: direction.normalize(),
            t_min: 0.0,
            t_max: f64::INFINITY,
        }
    }

    pub fn with_bounds(mut self, t_min: f64, t_max: f64) -> Self {
        self.t_min = t_min;
        self.t_max = t_max;
        self
    }

    #[inline]
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }

    #[inline]
    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }
}

/// Skew-symmetric cross-product matrix `[q×]`.
pub fn skew(q: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -q.z, q.y, q.z, 0.0, -q.x, -q.y, q.x, 0.0)
}

pub(crate) fn ensure_finite(v: &Vec3, what: &str) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} has non-finite components: {v:?}"
        )))
    }
}

/// Proper orthonormal 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(Matrix3<f64>);

impl Rotation3 {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Wraps a matrix that the caller guarantees is a rotation.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    /// Rotation by `angle` radians about `axis` (right-hand rule).
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        let k = axis.normalize();
        let kx = skew(&k);
        Self(Matrix3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos()))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    pub fn compose(&self, other: &Rotation3) -> Self {
        Self(self.0 * other.0)
    }

    /// Rotation angle of `selfᵀ·other`, in radians.
    pub fn angle_to(&self, other: &Rotation3) -> f64 {
        let rel = self.0.transpose() * other.0;
        ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }
}

/// Cayley transform `(I + [q×])⁻¹ (I − [q×])` evaluated in closed form.
pub fn crp_to_rotation(q: &Vec3) -> Result<Rotation3> {
    ensure_finite(q, "CRP vector")?;
    Ok(Rotation3(crp_matrix(q)))
}

/// `[(1 − qᵀq) I + 2 q qᵀ − 2 [q×]] / (1 + qᵀq)`
pub(crate) fn crp_matrix(q: &Vec3) -> Matrix3<f64> {
    let s = q.norm_squared();
    let m = Matrix3::identity() * (1.0 - s) + q * q.transpose() * 2.0 - skew(q) * 2.0;
    m / (1.0 + s)
}

/// Inverse Cayley map. Fails for half-turn rotations where the CRP is unbounded.
pub fn rotation_to_crp(r: &Rotation3) -> Result<Vec3> {
    let m = r.matrix();
    let i = Matrix3::identity();
    let inv = (i + m)
        .try_inverse()
        .filter(|_| (1.0 + m.trace()).abs() > 1e-9)
        .ok_or_else(|| {
            Error::DegenerateGeometry("rotation of 180° has no CRP representation".into())
        })?;
    let qx = (i - m) * inv;
    let q = Vec3::new(qx[(2, 1)], qx[(0, 2)], qx[(1, 0)]);
    ensure_finite(&q, "CRP vector")?;
    Ok(q)
}

/// Orthonormal right-handed camera frame. The camera looks along `−w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraBasis {
    pub u: Vec3,
    pub v: Vec3,
    pub w: Vec3,
}

impl CameraBasis {
    /// World→camera rotation with camera axes `x = u`, `y = −v`, `z = −w`,
    /// so `z` points forward and image rows grow downward.
    pub fn world_to_camera(&self) -> Rotation3 {
        let (u, v, w) = (self.u, self.v, self.w);
        Rotation3(Matrix3::new(
            u.x, u.y, u.z, -v.x, -v.y, -v.z, -w.x, -w.y, -w.z,
        ))
    }

    pub fn from_world_to_camera(r: &Rotation3) -> Self {
        let m = r.matrix();
        Self {
            u: m.row(0).transpose(),
            v: -m.row(1).transpose(),
            w: -m.row(2).transpose(),
        }
    }
}

pub fn camera_basis(origin: &Vec3, target: &Vec3, up: &Vec3) -> Result<CameraBasis> {
    ensure_finite(origin, "camera origin")?;
    ensure_finite(target, "camera target")?;
    ensure_finite(up, "camera up")?;
    let back = origin - target;
    if back.norm() < 1e-12 {
        return Err(Error::Config("camera origin coincides with target".into()));
    }
    let w = back.normalize();
    let side = up.cross(&w);
    if side.norm() < 1e-12 * up.norm().max(1.0) {
        return Err(Error::Config(
            "camera up vector is parallel to the viewing direction".into(),
        ));
    }
    let u = side.normalize();
    let v = w.cross(&u);
    Ok(CameraBasis { u, v, w })
}

/// Six-DOF pose: CRP attitude `q` and translation `t`, mapping object-frame
/// points into the camera frame as `R(q)·a + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub q: Vec3,
    pub t: Vec3,
}

impl Pose {
    pub fn new(q: Vec3, t: Vec3) -> Result<Self> {
        ensure_finite(&q, "pose attitude")?;
        ensure_finite(&t, "pose translation")?;
        Ok(Self { q, t })
    }

    pub fn identity() -> Self {
        Self {
            q: Vec3::zeros(),
            t: Vec3::zeros(),
        }
    }

    pub fn from_rotation(r: &Rotation3, t: Vec3) -> Result<Self> {
        Self::new(rotation_to_crp(r)?, t)
    }

    /// Parameter vector `[q1 q2 q3 t1 t2 t3]`.
    pub fn to_array(&self) -> [f64; 6] {
        [self.q.x, self.q.y, self.q.z, self.t.x, self.t.y, self.t.z]
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        if x.len() != 6 {
            return Err(Error::InvalidInput(format!(
                "pose needs 6 parameters, got {}",
                x.len()
            )));
        }
        Self::new(Vec3::new(x[0], x[1], x[2]), Vec3::new(x[3], x[4], x[5]))
    }

    pub fn rotation(&self) -> Rotation3 {
        Rotation3(crp_matrix(&self.q))
    }

    pub fn transform(&self, a: &Vec3) -> Vec3 {
        self.rotation().apply(a) + self.t
    }

    /// Position of the camera centre in the object frame.
    pub fn camera_center(&self) -> Vec3 {
        -(self.rotation().matrix().transpose() * self.t)
    }
}

/// Pinhole intrinsics with zero skew.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub ox: f64,
    pub oy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, ox: f64, oy: f64) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "focal lengths must be positive, got fx={fx} fy={fy}"
            )));
        }
        if !(ox.is_finite() && oy.is_finite()) {
            return Err(Error::InvalidInput("principal point must be finite".into()));
        }
        Ok(Self { fx, fy, ox, oy })
    }

    /// Square pixels, principal point at the origin.
    pub fn focal(f: f64) -> Result<Self> {
        Self::new(f, f, 0.0, 0.0)
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.ox, 0.0, self.fy, self.oy, 0.0, 0.0, 1.0)
    }
}

/// The 3×4 projection `K·[R | t]`, stored row-major as `h1..h12`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography(pub [f64; 12]);

impl Homography {
    pub fn from_matrix(m: &Matrix3x4<f64>) -> Self {
        let mut h = [0.0; 12];
        for r in 0..3 {
            for c in 0..4 {
                h[4 * r + c] = m[(r, c)];
            }
        }
        Self(h)
    }

    pub fn matrix(&self) -> Matrix3x4<f64> {
        Matrix3x4::from_row_slice(&self.0)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self(self.0.map(|h| h * alpha))
    }

    /// Projective depth factor `s = h9 x + h10 y + h11 z + h12`.
    #[inline]
    pub fn depth(&self, p: &Vec3) -> f64 {
        let h = &self.0;
        h[8] * p.x + h[9] * p.y + h[10] * p.z + h[11]
    }
}

pub fn pose_to_homography(pose: &Pose, k: &CameraIntrinsics) -> Result<Homography> {
    ensure_finite(&pose.q, "pose attitude")?;
    ensure_finite(&pose.t, "pose translation")?;
    let mut rt = Matrix3x4::zeros();
    rt.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&crp_matrix(&pose.q));
    rt.set_column(3, &pose.t);
    Ok(Homography::from_matrix(&(k.matrix() * rt)))
}

/// Rational pinhole projection. Points with `s ≤ 1e-12` (at or behind the
/// camera plane) are rejected.
pub fn project(h: &Homography, p: &Vec3) -> Result<(f64, f64)> {
    let s = h.depth(p);
    if !(s > MIN_DEPTH) {
        return Err(Error::DegenerateDepth { index: 0, depth: s });
    }
    let m = &h.0;
    let u = (m[0] * p.x + m[1] * p.y + m[2] * p.z + m[3]) / s;
    let v = (m[4] * p.x + m[5] * p.y + m[6] * p.z + m[7]) / s;
    Ok((u, v))
}
