//! Renderable scene: primitives, materials, textures, lights and the BVH.

use log::warn;

use crate::accel::{Aabb, Bvh};
use crate::atmosphere::SkyMap;
use crate::error::{Error, Result};
use crate::geometry::{
    ray_sphere_intersect, ray_triangle_intersect, sphere_uv, HitRecord, MtlMaterial, Sphere,
    Triangle, TriangleMesh,
};
use crate::math::{Ray, Rgb, Rotation3, Vec3};
use crate::render::Texture;
use crate::shading::{LightSource, Material, MaterialKind, Occluder};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    Sphere(Sphere),
    Triangle(Triangle),
}

impl Primitive {
    pub fn bounds(&self) -> Aabb {
        match self {
            Primitive::Sphere(s) => Aabb::new(
                s.center - Vec3::repeat(s.radius),
                s.center + Vec3::repeat(s.radius),
            ),
            Primitive::Triangle(t) => Aabb::from_points(&t.vertices),
        }
    }

    pub fn material(&self) -> usize {
        match self {
            Primitive::Sphere(s) => s.material,
            Primitive::Triangle(t) => t.material,
        }
    }

    pub fn texture(&self) -> Option<usize> {
        match self {
            Primitive::Sphere(s) => s.texture,
            Primitive::Triangle(t) => t.texture,
        }
    }

    pub fn intersect(&self, ray: &Ray) -> Option<HitRecord> {
        match self {
            Primitive::Sphere(s) => ray_sphere_intersect(ray, s).map(|mut h| {
                if s.texture.is_some() {
                    h.uv = sphere_uv(&h.point, s).ok();
                }
                h
            }),
            Primitive::Triangle(t) => ray_triangle_intersect(ray, t),
        }
    }
}

/// Similarity transform `p ↦ R·(s·p) + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub rotation: Rotation3,
    pub translation: Vec3,
    pub scale: f64,
}

impl Default for Transform {
    fn default() -> Self {
        Self {
            rotation: Rotation3::identity(),
            translation: Vec3::zeros(),
            scale: 1.0,
        }
    }
}

impl Transform {
    pub fn apply_point(&self, p: &Vec3) -> Vec3 {
        self.rotation.apply(&(p * self.scale)) + self.translation
    }

    pub fn apply_normal(&self, n: &Vec3) -> Vec3 {
        self.rotation.apply(n)
    }
}

impl From<&MtlMaterial> for Material {
    fn from(m: &MtlMaterial) -> Self {
        let kind = match m.illum {
            4 | 6 | 7 if m.ni > 1.0 => MaterialKind::Dielectric,
            3 | 5 => MaterialKind::Specular,
            _ => MaterialKind::Diffuse,
        };
        Material {
            k_e: m.ke,
            emission_strength: 1.0,
            k_a: m.ka,
            k_d: m.kd,
            k_s: m.ks,
            shininess: m.ns,
            albedo: m.kd.map(|c| c.clamp(0.0, 0.999)),
            ior: m.ni,
            kind,
            texture: None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Background {
    Constant(Rgb),
    Sky(Box<SkyMap>),
}

impl Background {
    pub fn radiance(&self, dir: &Vec3) -> Rgb {
        match self {
            Background::Constant(c) => *c,
            Background::Sky(sky) => sky.lookup(dir),
        }
    }
}

impl Default for Background {
    fn default() -> Self {
        Background::Constant(Rgb::zeros())
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    primitives: Vec<Primitive>,
    materials: Vec<Material>,
    textures: Vec<Texture>,
    lights: Vec<LightSource>,
    ambient: Rgb,
    background: Background,
    bvh: Option<Bvh>,
    epsilon: f64,
}

impl Scene {
    pub fn builder() -> SceneBuilder {
        SceneBuilder::default()
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    pub fn material(&self, id: usize) -> &Material {
        &self.materials[id]
    }

    pub fn texture(&self, id: usize) -> &Texture {
        &self.textures[id]
    }

    pub fn lights(&self) -> &[LightSource] {
        &self.lights
    }

    pub fn ambient(&self) -> Rgb {
        self.ambient
    }

    pub fn background(&self) -> &Background {
        &self.background
    }

    /// Offset applied to secondary rays: `1e-4 ×` the scene diagonal.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn bounds(&self) -> Option<Aabb> {
        self.bvh.as_ref().map(Bvh::root_bounds)
    }

    pub fn bvh(&self) -> Option<&Bvh> {
        self.bvh.as_ref()
    }

    /// Closest hit, with `primitive` set to the scene index.
    pub fn intersect(&self, ray: &Ray) -> Option<HitRecord> {
        let bvh = self.bvh.as_ref()?;
        let tr = bvh.first_hit(ray, |id, r| {
            self.primitives[id].intersect(r).map(|h| (h.t, h))
        });
        tr.hit.map(|(id, mut h)| {
            h.primitive = id;
            h
        })
    }

    /// Linear scan over every primitive, used as a reference for the BVH.
    pub fn intersect_brute_force(&self, ray: &Ray) -> Option<HitRecord> {
        let mut best: Option<HitRecord> = None;
        for (id, p) in self.primitives.iter().enumerate() {
            if let Some(mut h) = p.intersect(ray) {
                if best.as_ref().is_none_or(|b| h.t < b.t) {
                    h.primitive = id;
                    best = Some(h);
                }
            }
        }
        best
    }

    /// Surface albedo at a hit, modulated by any texture.
    pub fn albedo_at(&self, hit: &HitRecord) -> Rgb {
        let prim = &self.primitives[hit.primitive];
        let mat = &self.materials[prim.material()];
        match (prim.texture().or(mat.texture), hit.uv) {
            (Some(tex), Some((u, v))) => mat
                .albedo
                .component_mul(&self.textures[tex].lookup(u, v))
                .map(|c| c.min(0.999)),
            _ => mat.albedo,
        }
    }
}

impl Occluder for Scene {
    fn occluded(&self, ray: &Ray) -> bool {
        match &self.bvh {
            Some(bvh) => bvh.any_hit(ray, |id, r| self.primitives[id].intersect(r).is_some()),
            None => false,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SceneBuilder {
    primitives: Vec<Primitive>,
    materials: Vec<Material>,
    textures: Vec<Texture>,
    lights: Vec<LightSource>,
    ambient: Rgb,
    background: Background,
}

impl SceneBuilder {
    pub fn material(&mut self, m: Material) -> usize {
        self.materials.push(m);
        self.materials.len() - 1
    }

    pub fn texture(&mut self, t: Texture) -> usize {
        self.textures.push(t);
        self.textures.len() - 1
    }

    pub fn light(&mut self, l: LightSource) -> &mut Self {
        self.lights.push(l);
        self
    }

    pub fn ambient(&mut self, a: Rgb) -> &mut Self {
        self.ambient = a;
        self
    }

    pub fn background(&mut self, b: Background) -> &mut Self {
        self.background = b;
        self
    }

    pub fn sphere(&mut self, s: Sphere) -> usize {
        self.primitives.push(Primitive::Sphere(s));
        self.primitives.len() - 1
    }

    pub fn triangle(&mut self, t: Triangle) -> usize {
        self.primitives.push(Primitive::Triangle(t));
        self.primitives.len() - 1
    }

    /// Adds every face of `mesh`. Faces use the mesh's own MTL materials
    /// unless `material_override` is set; faces without a material get
    /// `fallback`. Zero-area faces are skipped.
    pub fn mesh(
        &mut self,
        mesh: &TriangleMesh,
        transform: &Transform,
        material_override: Option<usize>,
        fallback: usize,
        texture: Option<usize>,
    ) -> Result<usize> {
        mesh.validate()?;
        let base = self.materials.len();
        if material_override.is_none() {
            for m in &mesh.materials {
                self.materials.push(Material::from(m));
            }
        }
        let mut added = 0;
        for (k, f) in mesh.faces.iter().enumerate() {
            let corners = mesh.corners(f).map(|p| transform.apply_point(&p));
            let material = material_override
                .or(f.material.map(|m| base + m))
                .unwrap_or(fallback);
            let Ok(mut tri) = Triangle::new(corners[0], corners[1], corners[2], material) else {
                warn!("skipping degenerate face {k}");
                continue;
            };
            tri.normals =
                f.vn.map(|n| n.map(|i| transform.apply_normal(&mesh.normals[i]).normalize()));
            tri.uvs = f.vt.map(|t| t.map(|i| mesh.uvs[i]));
            tri.texture = texture;
            self.primitives.push(Primitive::Triangle(tri));
            added += 1;
        }
        Ok(added)
    }

    pub fn build(self) -> Result<Scene> {
        for p in &self.primitives {
            if p.material() >= self.materials.len() {
                return Err(Error::Config(format!(
                    "primitive references missing material {}",
                    p.material()
                )));
            }
            if let Some(t) = p.texture() {
                if t >= self.textures.len() {
                    return Err(Error::Config(format!(
                        "primitive references missing texture {t}"
                    )));
                }
            }
        }
        let bvh = if self.primitives.is_empty() {
            None
        } else {
            let boxes: Vec<Aabb> = self.primitives.iter().map(Primitive::bounds).collect();
            Some(Bvh::build(&boxes)?)
        };
        let diag = bvh
            .as_ref()
            .map_or(1.0, |b| b.root_bounds().extent().norm())
            .max(1.0);
        Ok(Scene {
            primitives: self.primitives,
            materials: self.materials,
            textures: self.textures,
            lights: self.lights,
            ambient: self.ambient,
            background: self.background,
            bvh,
            epsilon: 1e-4 * diag,
        })
    }
}
