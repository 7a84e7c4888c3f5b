//! Direction sampling on the hemisphere and disk.

use std::f64::consts::PI;

use crate::math::Vec3;

/// Orthonormal tangent frame `(t, b)` around unit `n` (Duff et al. 2017).
pub fn tangent_frame(n: &Vec3) -> (Vec3, Vec3) {
    let sign = 1f64.copysign(n.z);
    let a = -1.0 / (sign + n.z);
    let b = n.x * n.y * a;
    (
        Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x),
        Vec3::new(b, sign + n.y * n.y * a, -n.y),
    )
}

fn local_to_world(axis: &Vec3, local: Vec3) -> Vec3 {
    let (t, b) = tangent_frame(axis);
    t * local.x + b * local.y + axis * local.z
}

/// Cosine-weighted direction around `n`; pdf = cosθ/π.
pub fn cosine_hemisphere(n: &Vec3, u1: f64, u2: f64) -> (Vec3, f64) {
    let r = u1.sqrt();
    let phi = 2.0 * PI * u2;
    let z = (1.0 - u1).max(0.0).sqrt();
    let d = local_to_world(n, Vec3::new(r * phi.cos(), r * phi.sin(), z));
    (d, z / PI)
}

/// Direction around `axis` with density `(n+1)/(2π) cos^n α`.
pub fn phong_lobe(axis: &Vec3, exponent: f64, u1: f64, u2: f64) -> (Vec3, f64) {
    let cos_a = u1.powf(1.0 / (exponent + 1.0));
    let sin_a = (1.0 - cos_a * cos_a).max(0.0).sqrt();
    let phi = 2.0 * PI * u2;
    let d = local_to_world(axis, Vec3::new(sin_a * phi.cos(), sin_a * phi.sin(), cos_a));
    (d, phong_lobe_pdf(exponent, cos_a))
}

pub fn phong_lobe_pdf(exponent: f64, cos_a: f64) -> f64 {
    (exponent + 1.0) / (2.0 * PI) * cos_a.max(0.0).powf(exponent)
}

/// Uniform point on the unit disk.
pub fn uniform_disk(u1: f64, u2: f64) -> (f64, f64) {
    let r = u1.sqrt();
    let phi = 2.0 * PI * u2;
    (r * phi.cos(), r * phi.sin())
}
