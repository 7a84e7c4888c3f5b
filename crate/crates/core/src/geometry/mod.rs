//! Primitive shapes and ray intersection.

mod obj;
pub mod procedural;

pub use obj::{load_obj_file, parse_mtl, parse_obj, Face, MtlMaterial, TriangleMesh};

use crate::error::{Error, Result};
use crate::math::{Ray, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
    pub material: usize,
    pub texture: Option<usize>,
}

impl Sphere {
    pub fn new(center: Vec3, radius: f64, material: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        crate::math::ensure_finite(&center, "sphere center")?;
        Ok(Self {
            center,
            radius,
            material,
            texture: None,
        })
    }

    pub fn with_texture(mut self, texture: usize) -> Self {
        self.texture = Some(texture);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub vertices: [Vec3; 3],
    pub normals: Option<[Vec3; 3]>,
    pub uvs: Option<[[f64; 2]; 3]>,
    pub material: usize,
    pub texture: Option<usize>,
}

impl Triangle {
    pub fn new(a: Vec3, b: Vec3, c: Vec3, material: usize) -> Result<Self> {
        let area2 = (b - a).cross(&(c - a)).norm();
        if !(area2 > 1e-12) {
            return Err(Error::DegenerateGeometry(format!(
                "triangle {a:?} {b:?} {c:?} has zero area"
            )));
        }
        Ok(Self {
            vertices: [a, b, c],
            normals: None,
            uvs: None,
            material,
            texture: None,
        })
    }

    pub fn geometric_normal(&self) -> Vec3 {
        let [a, b, c] = self.vertices;
        (b - a).cross(&(c - a)).normalize()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitRecord {
    pub t: f64,
    pub point: Vec3,
    /// Unit geometric normal, outward for spheres and along the winding
    /// order for triangles.
    pub normal: Vec3,
    /// Unit shading normal (interpolated vertex normals when available).
    pub shading_normal: Vec3,
    pub primitive: usize,
    pub barycentric: Option<(f64, f64)>,
    pub uv: Option<(f64, f64)>,
}

/// Smallest root of the ray/sphere quadratic inside the ray's interval.
pub fn ray_sphere_intersect(ray: &Ray, s: &Sphere) -> Option<HitRecord> {
    let oc = ray.origin - s.center;
    let b = ray.direction.dot(&oc);
    let c = oc.norm_squared() - s.radius * s.radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let t = [-b - root, -b + root]
        .into_iter()
        .find(|&t| ray.contains(t))?;
    let point = ray.at(t);
    let normal = (point - s.center) / s.radius;
    Some(HitRecord {
        t,
        point,
        normal,
        shading_normal: normal,
        primitive: 0,
        barycentric: None,
        uv: None,
    })
}

/// Möller–Trumbore. Points on an edge count as hits; a ray parallel to the
/// triangle plane misses.
pub fn ray_triangle_intersect(ray: &Ray, tri: &Triangle) -> Option<HitRecord> {
    let [a, b, c] = tri.vertices;
    let e1 = b - a;
    let e2 = c - a;
    let pvec = ray.direction.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() <= 1e-12 * e1.norm() * e2.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let tvec = ray.origin - a;
    let beta = tvec.dot(&pvec) * inv;
    if !(0.0..=1.0).contains(&beta) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let gamma = ray.direction.dot(&qvec) * inv;
    if gamma < 0.0 || beta + gamma > 1.0 {
        return None;
    }
    let t = e2.dot(&qvec) * inv;
    if !ray.contains(t) {
        return None;
    }
    let normal = e1.cross(&e2).normalize();
    let alpha = 1.0 - beta - gamma;
    let shading_normal = match tri.normals {
        Some([na, nb, nc]) => {
            let n = na * alpha + nb * beta + nc * gamma;
            if n.norm() > 1e-12 {
                n.normalize()
            } else {
                normal
            }
        }
        None => normal,
    };
    let uv = tri.uvs.map(|[ta, tb, tc]| {
        (
            ta[0] * alpha + tb[0] * beta + tc[0] * gamma,
            ta[1] * alpha + tb[1] * beta + tc[1] * gamma,
        )
    });
    Some(HitRecord {
        t,
        point: ray.at(t),
        normal,
        shading_normal,
        primitive: 0,
        barycentric: Some((beta, gamma)),
        uv,
    })
}

/// Spherical texture coordinates with `u = 0` on the `+x` seam and `v = 1`
/// at the `+z` pole.
pub fn sphere_uv(p: &Vec3, s: &Sphere) -> Result<(f64, f64)> {
    let d = p - s.center;
    if (d.norm() - s.radius).abs() > 1e-6 * s.radius {
        return Err(Error::InvalidInput(format!(
            "point {p:?} is not on the sphere surface"
        )));
    }
    let theta = (d.z / s.radius).clamp(-1.0, 1.0).acos();
    let mut phi = d.y.atan2(d.x);
    if phi < 0.0 {
        phi += 2.0 * std::f64::consts::PI;
    }
    let u = phi / (2.0 * std::f64::consts::PI);
    let v = (std::f64::consts::PI - theta) / std::f64::consts::PI;
    Ok((u.min(1.0), v))
}
