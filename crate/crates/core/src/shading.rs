//! Local illumination: Phong terms, mirror reflection, Snell refraction,
//! Schlick's Fresnel approximation and shadow rays.
//!
//! Direction convention: an incident direction `v` points from the eye (or
//! previous vertex) toward the surface, so `v · n < 0` on the front side.

use crate::math::{Ray, Rgb, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaterialKind {
    /// Lambertian plus optional Phong lobe.
    Diffuse,
    /// Perfect mirror weighted by `k_s`.
    Specular,
    /// Smooth dielectric with index `ior`.
    Dielectric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub k_e: Rgb,
    /// Emitted radiance scale `I_E`; surface emission is `k_e · I_E`.
    pub emission_strength: f64,
    pub k_a: Rgb,
    pub k_d: Rgb,
    pub k_s: Rgb,
    pub shininess: f64,
    /// Diffuse albedo ρ used by the path tracer (BRDF ρ/π).
    pub albedo: Rgb,
    pub ior: f64,
    pub kind: MaterialKind,
    pub texture: Option<usize>,
}

impl Default for Material {
    fn default() -> Self {
        Self::diffuse(Rgb::repeat(0.5))
    }
}

impl Material {
    pub fn diffuse(albedo: Rgb) -> Self {
        Self {
            k_e: Rgb::zeros(),
            emission_strength: 1.0,
            k_a: Rgb::zeros(),
            k_d: albedo,
            k_s: Rgb::zeros(),
            shininess: 0.0,
            albedo,
            ior: 1.0,
            kind: MaterialKind::Diffuse,
            texture: None,
        }
    }

    pub fn emissive(color: Rgb, strength: f64) -> Self {
        Self {
            k_e: color,
            emission_strength: strength,
            ..Self::diffuse(Rgb::zeros())
        }
    }

    pub fn mirror(k_s: Rgb) -> Self {
        Self {
            k_s,
            kind: MaterialKind::Specular,
            ..Self::diffuse(Rgb::zeros())
        }
    }

    pub fn glass(ior: f64) -> Self {
        Self {
            ior,
            kind: MaterialKind::Dielectric,
            ..Self::diffuse(Rgb::zeros())
        }
    }

    pub fn emission(&self) -> Rgb {
        self.k_e * self.emission_strength
    }

    pub fn is_emissive(&self) -> bool {
        self.emission().iter().any(|&c| c > 0.0)
    }

    /// Checks coefficient ranges.
    pub fn validate(&self) -> Result<(), String> {
        let unit = |c: &Rgb| c.iter().all(|&x| (0.0..=1.0).contains(&x));
        if !(unit(&self.k_e) && unit(&self.k_a) && unit(&self.k_d) && unit(&self.k_s)) {
            return Err("Phong coefficients must lie in [0, 1]".into());
        }
        if (self.k_d + self.k_s).iter().any(|&x| x > 1.0 + 1e-12) {
            return Err("k_d + k_s exceeds 1 in some channel".into());
        }
        if self.albedo.iter().any(|&x| !(0.0..1.0).contains(&x)) {
            return Err("albedo must lie in [0, 1)".into());
        }
        if !(self.ior > 0.0) || !(self.shininess >= 0.0) || !(self.emission_strength >= 0.0) {
            return Err("ior must be positive, shininess and emission non-negative".into());
        }
        Ok(())
    }

    /// Phong terms evaluated against an incident irradiance: diffuse is the
    /// Lambertian BRDF ρ/π and the specular lobe carries the (n+2)/2π
    /// normalization.
    pub fn brdf_phong(&self, albedo: Rgb) -> PhongCoefficients {
        PhongCoefficients {
            k_e: Rgb::zeros(),
            emission: 0.0,
            k_a: Rgb::zeros(),
            k_d: albedo / std::f64::consts::PI,
            k_s: self.k_s * (self.shininess + 2.0) / (2.0 * std::f64::consts::PI),
            shininess: self.shininess,
        }
    }

    /// Classic display-oriented Phong terms straight from the coefficients.
    pub fn phong(&self) -> PhongCoefficients {
        PhongCoefficients {
            k_e: self.k_e,
            emission: self.emission_strength,
            k_a: self.k_a,
            k_d: self.k_d,
            k_s: self.k_s,
            shininess: self.shininess,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhongCoefficients {
    pub k_e: Rgb,
    pub emission: f64,
    pub k_a: Rgb,
    pub k_d: Rgb,
    pub k_s: Rgb,
    pub shininess: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LightKind {
    Point {
        position: Vec3,
    },
    /// `direction` is the unit direction the light travels.
    Directional {
        direction: Vec3,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightSource {
    pub kind: LightKind,
    pub intensity: Rgb,
}

impl LightSource {
    pub fn point(position: Vec3, intensity: Rgb) -> Self {
        Self {
            kind: LightKind::Point { position },
            intensity,
        }
    }

    pub fn directional(direction: Vec3, intensity: Rgb) -> Self {
        Self {
            kind: LightKind::Directional {
                direction: direction.normalize(),
            },
            intensity,
        }
    }

    /// Unit direction from `x` toward the light, distance to it, and the
    /// radiance-like intensity arriving at `x` (inverse-square for points).
    pub fn incident(&self, x: &Vec3) -> (Vec3, f64, Rgb) {
        match self.kind {
            LightKind::Point { position } => {
                let d = position - x;
                let dist = d.norm();
                (d / dist, dist, self.intensity / (dist * dist))
            }
            LightKind::Directional { direction } => (-direction, f64::INFINITY, self.intensity),
        }
    }
}

/// `I = k_e I_E + k_a I_A + k_d I_D max(0, L·N) + k_s I_S max(0, R·E)^n`
/// where `E` is the direction from the surface to the eye and `R` the mirror
/// of the light direction. `view` follows the module's eye→surface convention.
pub fn phong_radiance(
    x_p: &Vec3,
    normal: &Vec3,
    view: &Vec3,
    light: &LightSource,
    coeffs: &PhongCoefficients,
    ambient: &Rgb,
) -> Rgb {
    let (l, _, incoming) = light.incident(x_p);
    let diffuse = l.dot(normal).max(0.0);
    let r = reflect_dir(&(-l), normal);
    let to_eye = -view;
    let spec_base = r.dot(&to_eye).max(0.0);
    let specular = if coeffs.shininess == 0.0 {
        if spec_base > 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        spec_base.powf(coeffs.shininess)
    };
    coeffs.k_e * coeffs.emission
        + coeffs.k_a.component_mul(ambient)
        + coeffs.k_d.component_mul(&incoming) * diffuse
        + coeffs.k_s.component_mul(&incoming) * specular
}

/// Mirror `v` (eye→surface) about `n`.
pub fn reflect_dir(v: &Vec3, n: &Vec3) -> Vec3 {
    v - n * (2.0 * v.dot(n))
}

/// Snell refraction of `v` (eye→surface) through a surface with normal `n`
/// on the incident side, from index `n1` into `n2`. `None` on total internal
/// reflection.
pub fn refract_dir(v: &Vec3, n: &Vec3, n1: f64, n2: f64) -> Option<Vec3> {
    let cos_theta = (-v.dot(n)).clamp(-1.0, 1.0);
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    if sin_theta < 1e-12 {
        return Some(*v);
    }
    let sin_phi = n1 / n2 * sin_theta;
    if sin_phi > 1.0 {
        return None;
    }
    let cos_phi = (1.0 - sin_phi * sin_phi).sqrt();
    let b = (v + n * cos_theta) / sin_theta;
    Some((b * sin_phi - n * cos_phi).normalize())
}

/// `R0 + (1 − R0)(1 − cosθ)^5` with `R0 = ((n_t − 1)/(n_t + 1))²`.
pub fn schlick_reflectance(cos_theta: f64, n_t: f64) -> f64 {
    let r0 = ((n_t - 1.0) / (n_t + 1.0)).powi(2);
    let c = cos_theta.clamp(0.0, 1.0);
    (r0 + (1.0 - r0) * (1.0 - c).powi(5)).clamp(0.0, 1.0)
}

/// Anything that can answer visibility queries.
pub trait Occluder {
    fn occluded(&self, ray: &Ray) -> bool;
}

/// Whether the segment from `x_p` toward `light` is blocked. Hits closer than
/// `eps` are ignored to avoid self-shadowing.
pub fn shadow_test<O: Occluder + ?Sized>(
    scene: &O,
    x_p: &Vec3,
    light: &LightSource,
    eps: f64,
) -> bool {
    let (dir, dist, _) = light.incident(x_p);
    let t_max = if dist.is_finite() {
        dist - eps
    } else {
        f64::INFINITY
    };
    if t_max <= eps {
        return false;
    }
    scene.occluded(&Ray::new(*x_p, dir).with_bounds(eps, t_max))
}
