//! TOML scene description.
//!
//! The full schema with defaults is [`SCHEMA`].

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::atmosphere::{build_shells, sun_direction, AtmosphereConfig, SkyMap};
use crate::error::{Error, Result};
use crate::geometry::{load_obj_file, Sphere};
use crate::math::{Rgb, Rotation3, Vec3};
use crate::render::{CameraModel, Lens, SamplerConfig, Texture};
use crate::scene::{Background, Scene, Transform};
use crate::shading::{LightSource, Material, MaterialKind};

/// Annotated scene file showing every key with its default.
pub const SCHEMA: &str = r#"[camera]                      # required
kind = "pinhole"              # or "thin_lens"
origin = [0.0, 0.0, 800.0]    # required
target = [0.0, 0.0, 0.0]      # required
up = [1.0, 0.0, 0.0]          # default [0, 1, 0]
fov = 40.0                    # vertical, degrees
resolution = [256, 256]
aperture = 0.0                # thin lens radius
focus_distance = 10.0
focal_length = 0.05
exposure_stops = 0.0

[sampler]
spp = 16
max_depth = 40
seed = 0

[background]
color = [0.0, 0.0, 0.0]
ambient = [0.0, 0.0, 0.0]

[[lights]]
kind = "point"                # or "directional"
position = [0.0, 5.0, 0.0]    # point lights
direction = [0.0, -1.0, 0.0]  # directional lights, direction of travel
intensity = [10.0, 10.0, 10.0]

[[objects]]
kind = "sphere"               # or "mesh"
center = [0.0, 0.0, 0.0]
radius = 1.0
path = "assets/station.obj"   # meshes, relative to the scene file
texture = "assets/rock.png"
translate = [0.0, 0.0, 0.0]
rotate_axis = [0.0, 0.0, 1.0]
rotate_deg = 0.0
scale = 1.0
[objects.material]            # overrides MTL materials for meshes
kind = "diffuse"              # "mirror", "glass"
albedo = [0.5, 0.5, 0.5]
k_a = [0.0, 0.0, 0.0]
k_s = [0.0, 0.0, 0.0]
shininess = 0.0
emission = [0.0, 0.0, 0.0]
emission_strength = 1.0
ior = 1.5

[atmosphere]
enabled = false
turbidity = 2.0
thickness = 60000.0           # metres
sun_azimuth = 0.0             # degrees
sun_elevation = 45.0          # degrees
shells = 64
"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CameraKind {
    #[default]
    Pinhole,
    ThinLens,
}

fn default_up() -> [f64; 3] {
    [0.0, 1.0, 0.0]
}
fn default_fov() -> f64 {
    40.0
}
fn default_resolution() -> [u32; 2] {
    [256, 256]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    #[serde(default)]
    pub kind: CameraKind,
    pub origin: [f64; 3],
    pub target: [f64; 3],
    #[serde(default = "default_up")]
    pub up: [f64; 3],
    #[serde(default = "default_fov")]
    pub fov: f64,
    #[serde(default = "default_resolution")]
    pub resolution: [u32; 2],
    #[serde(default)]
    pub aperture: f64,
    pub focus_distance: Option<f64>,
    pub focal_length: Option<f64>,
    #[serde(default)]
    pub exposure_stops: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSpec {
    pub spp: u32,
    pub max_depth: u32,
    pub seed: u64,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        let s = SamplerConfig::default();
        Self {
            spp: s.spp,
            max_depth: s.max_depth,
            seed: s.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct BackgroundSpec {
    pub color: [f64; 3],
    pub ambient: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LightKindSpec {
    Point,
    Directional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LightSpec {
    pub kind: LightKindSpec,
    pub position: Option<[f64; 3]>,
    pub direction: Option<[f64; 3]>,
    pub intensity: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MaterialKindSpec {
    #[default]
    Diffuse,
    Mirror,
    Glass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialSpec {
    pub kind: MaterialKindSpec,
    pub albedo: [f64; 3],
    pub k_a: [f64; 3],
    pub k_s: [f64; 3],
    pub shininess: f64,
    pub emission: [f64; 3],
    pub emission_strength: f64,
    pub ior: f64,
}

impl Default for MaterialSpec {
    fn default() -> Self {
        Self {
            kind: MaterialKindSpec::Diffuse,
            albedo: [0.5; 3],
            k_a: [0.0; 3],
            k_s: [0.0; 3],
            shininess: 0.0,
            emission: [0.0; 3],
            emission_strength: 1.0,
            ior: 1.5,
        }
    }
}

impl MaterialSpec {
    pub fn to_material(&self) -> Result<Material> {
        let albedo = Rgb::from(self.albedo);
        let m = Material {
            k_e: Rgb::from(self.emission),
            emission_strength: self.emission_strength,
            k_a: Rgb::from(self.k_a),
            k_d: albedo,
            k_s: Rgb::from(self.k_s),
            shininess: self.shininess,
            albedo,
            ior: self.ior,
            kind: match self.kind {
                MaterialKindSpec::Diffuse => MaterialKind::Diffuse,
                MaterialKindSpec::Mirror => MaterialKind::Specular,
                MaterialKindSpec::Glass => MaterialKind::Dielectric,
            },
            texture: None,
        };
        m.validate()
            .map_err(|e| Error::Config(format!("material: {e}")))?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Sphere,
    Mesh,
}

fn one() -> f64 {
    1.0
}
fn z_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub kind: ObjectKind,
    pub center: Option<[f64; 3]>,
    pub radius: Option<f64>,
    pub path: Option<PathBuf>,
    pub texture: Option<PathBuf>,
    pub material: Option<MaterialSpec>,
    #[serde(default)]
    pub translate: [f64; 3],
    #[serde(default = "z_axis")]
    pub rotate_axis: [f64; 3],
    #[serde(default)]
    pub rotate_deg: f64,
    #[serde(default = "one")]
    pub scale: f64,
}

impl ObjectSpec {
    pub fn transform(&self) -> Result<Transform> {
        let axis = Vec3::from(self.rotate_axis);
        if self.rotate_deg != 0.0 && axis.norm() < 1e-12 {
            return Err(Error::Config("object rotate_axis must be nonzero".into()));
        }
        if !(self.scale > 0.0) {
            return Err(Error::Config(format!(
                "object scale must be positive, got {}",
                self.scale
            )));
        }
        Ok(Transform {
            rotation: if self.rotate_deg == 0.0 {
                Rotation3::identity()
            } else {
                Rotation3::from_axis_angle(&axis.normalize(), self.rotate_deg.to_radians())
            },
            translation: Vec3::from(self.translate),
            scale: self.scale,
        })
    }
}

fn default_turbidity() -> f64 {
    2.0
}
fn default_thickness() -> f64 {
    60_000.0
}
fn default_elevation() -> f64 {
    45.0
}
fn default_shells() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtmosphereSpec {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_turbidity")]
    pub turbidity: f64,
    #[serde(default = "default_thickness")]
    pub thickness: f64,
    #[serde(default)]
    pub sun_azimuth: f64,
    #[serde(default = "default_elevation")]
    pub sun_elevation: f64,
    #[serde(default = "default_shells")]
    pub shells: usize,
}

impl AtmosphereSpec {
    pub fn to_config(&self) -> AtmosphereConfig {
        AtmosphereConfig {
            turbidity: self.turbidity,
            thickness: self.thickness,
            n_shells: self.shells,
            sun_direction: sun_direction(
                self.sun_azimuth.to_radians(),
                self.sun_elevation.to_radians(),
            ),
            ..AtmosphereConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub camera: CameraSpec,
    #[serde(default)]
    pub sampler: SamplerSpec,
    #[serde(default)]
    pub background: BackgroundSpec,
    #[serde(default)]
    pub lights: Vec<LightSpec>,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    pub atmosphere: Option<AtmosphereSpec>,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// A scene ready to render.
#[derive(Debug, Clone)]
pub struct LoadedScene {
    pub scene: Scene,
    pub camera: CameraModel,
    pub sampler: SamplerConfig,
    pub exposure_stops: f64,
}

fn finite3(name: &str, v: &[f64; 3]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be finite")))
    }
}

/// Parses and validates scene text. Relative paths resolve against
/// `base_dir` and must exist.
pub fn parse_scene(text: &str, base_dir: &Path) -> Result<SceneConfig> {
    let mut cfg: SceneConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim().replace('\n', " ")))?;
    cfg.base_dir = base_dir.to_path_buf();
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_scene_file(path: &Path) -> Result<SceneConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading scene {}", path.display()), e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_scene(&text, base).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

impl SceneConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.camera;
        finite3("camera.origin", &c.origin)?;
        finite3("camera.target", &c.target)?;
        finite3("camera.up", &c.up)?;
        if !(c.fov > 0.0 && c.fov < 180.0) {
            return Err(Error::Config(format!(
                "camera.fov must lie in (0, 180) degrees, got {}",
                c.fov
            )));
        }
        if c.resolution[0] == 0 || c.resolution[1] == 0 {
            return Err(Error::Config(
                "camera.resolution must be at least 1x1".into(),
            ));
        }
        if !(c.aperture >= 0.0) {
            return Err(Error::Config("camera.aperture must be non-negative".into()));
        }
        if c.kind == CameraKind::ThinLens
            && (c.focus_distance.is_none() || c.focal_length.is_none())
        {
            return Err(Error::Config(
                "thin_lens camera needs camera.focus_distance and camera.focal_length".into(),
            ));
        }
        if self.sampler.spp == 0 {
            return Err(Error::Config("sampler.spp must be at least 1".into()));
        }
        for (i, l) in self.lights.iter().enumerate() {
            let needed = match l.kind {
                LightKindSpec::Point => l.position.is_some(),
                LightKindSpec::Directional => {
                    l.direction.is_some_and(|d| Vec3::from(d).norm() > 0.0)
                }
            };
            if !needed {
                return Err(Error::Config(format!(
                    "lights[{i}] is missing its position or direction"
                )));
            }
        }
        for (i, o) in self.objects.iter().enumerate() {
            match o.kind {
                ObjectKind::Sphere => {
                    if o.center.is_none() || !o.radius.is_some_and(|r| r > 0.0) {
                        return Err(Error::Config(format!(
                            "objects[{i}] sphere needs center and a positive radius"
                        )));
                    }
                }
                ObjectKind::Mesh => {
                    let Some(p) = &o.path else {
                        return Err(Error::Config(format!("objects[{i}] mesh needs a path")));
                    };
                    let full = self.resolve(p);
                    if !full.is_file() {
                        return Err(Error::MissingFile(full));
                    }
                }
            }
            if let Some(t) = &o.texture {
                let full = self.resolve(t);
                if !full.is_file() {
                    return Err(Error::MissingFile(full));
                }
            }
            if let Some(m) = &o.material {
                m.to_material()
                    .map_err(|e| Error::Config(format!("objects[{i}]: {e}")))?;
            }
            o.transform()?;
        }
        if let Some(a) = &self.atmosphere {
            a.to_config().validate()?;
        }
        Ok(())
    }

    pub fn camera_model(&self) -> Result<CameraModel> {
        let c = &self.camera;
        let cam = CameraModel::look_at(
            Vec3::from(c.origin),
            Vec3::from(c.target),
            Vec3::from(c.up),
            c.fov.to_radians(),
            c.resolution[0],
            c.resolution[1],
        )?;
        match c.kind {
            CameraKind::Pinhole => Ok(cam),
            CameraKind::ThinLens => cam.with_lens(Lens::ThinLens {
                aperture_radius: c.aperture,
                focus_distance: c.focus_distance.unwrap_or(1.0),
                focal_length: c.focal_length.unwrap_or(0.0),
            }),
        }
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            spp: self.sampler.spp,
            max_depth: self.sampler.max_depth,
            seed: self.sampler.seed,
            record_hits: false,
        }
    }

    /// Stable fingerprint of everything except the camera and sampler, used
    /// to check that two views show the same world.
    pub fn world_hash(&self) -> Result<u64> {
        let mut hasher = DefaultHasher::new();
        let world = WorldView {
            background: &self.background,
            lights: &self.lights,
            objects: &self.objects,
            atmosphere: &self.atmosphere,
        };
        toml::to_string(&world)
            .map_err(|e| Error::Config(e.to_string()))?
            .hash(&mut hasher);
        for o in &self.objects {
            for p in [&o.path, &o.texture].into_iter().flatten() {
                let bytes = std::fs::read(self.resolve(p))
                    .map_err(|e| Error::io(format!("reading {}", p.display()), e))?;
                bytes.hash(&mut hasher);
            }
        }
        Ok(hasher.finish())
    }

    /// Builds the scene graph, loading meshes and textures.
    pub fn build(&self) -> Result<LoadedScene> {
        let mut b = Scene::builder();
        let bg = &self.background;
        b.ambient(Rgb::from(bg.ambient));
        match &self.atmosphere {
            Some(a) if a.enabled => {
                let grid = build_shells(&a.to_config())?;
                b.background(Background::Sky(Box::new(SkyMap::new(&grid, 48, 96))));
            }
            _ => {
                b.background(Background::Constant(Rgb::from(bg.color)));
            }
        }
        for l in &self.lights {
            let intensity = Rgb::from(l.intensity);
            b.light(match l.kind {
                LightKindSpec::Point => {
                    LightSource::point(Vec3::from(l.position.unwrap_or_default()), intensity)
                }
                LightKindSpec::Directional => LightSource::directional(
                    Vec3::from(l.direction.unwrap_or([0.0, 0.0, -1.0])),
                    intensity,
                ),
            });
        }
        let fallback = b.material(Material::default());
        for (i, o) in self.objects.iter().enumerate() {
            let ctx = |e: Error| match e {
                Error::Config(m) => Error::Config(format!("objects[{i}]: {m}")),
                other => other,
            };
            let texture = match &o.texture {
                Some(t) => Some(b.texture(Texture::load(&self.resolve(t))?)),
                None => None,
            };
            let material = match &o.material {
                Some(m) => Some(b.material(m.to_material().map_err(ctx)?)),
                None => None,
            };
            let transform = o.transform().map_err(ctx)?;
            match o.kind {
                ObjectKind::Sphere => {
                    let center = transform.apply_point(&Vec3::from(o.center.unwrap_or_default()));
                    let radius = o.radius.unwrap_or(1.0) * transform.scale;
                    let mut s =
                        Sphere::new(center, radius, material.unwrap_or(fallback)).map_err(ctx)?;
                    s.texture = texture;
                    b.sphere(s);
                }
                ObjectKind::Mesh => {
                    let path = self.resolve(o.path.as_deref().unwrap_or(Path::new("")));
                    let mesh = load_obj_file(&path)?;
                    b.mesh(&mesh, &transform, material, fallback, texture)
                        .map_err(ctx)?;
                }
            }
        }
        Ok(LoadedScene {
            scene: b.build()?,
            camera: self.camera_model()?,
            sampler: self.sampler_config(),
            exposure_stops: self.camera.exposure_stops,
        })
    }
}

#[derive(Serialize)]
struct WorldView<'a> {
    background: &'a BackgroundSpec,
    lights: &'a [LightSpec],
    objects: &'a [ObjectSpec],
    atmosphere: &'a Option<AtmosphereSpec>,
}
