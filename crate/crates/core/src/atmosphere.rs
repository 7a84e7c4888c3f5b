//! Layered Earth atmosphere: exponential density, empirical refractive
//! index, concentric shells, optical depth and single-scattering sky.
//!
//! Coordinates are planet-centred with `+z` as the local zenith of the
//! observer, who stands at `(0, 0, planet_radius)`.

use std::f64::consts::PI;

use log::{debug, warn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::{Rgb, Vec3};
use crate::shading::refract_dir;

const METERS_TO_FEET: f64 = 3.280_839_895;
/// Troposphere / upper-atmosphere switch of the refractive-index model.
pub const BRANCH_ALTITUDE: f64 = 12_000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AtmosphereConfig {
    /// Sea-level density in kg/m³.
    pub rho0: f64,
    pub scale_height: f64,
    pub thickness: f64,
    pub n_shells: usize,
    pub turbidity: f64,
    /// Unit vector toward the sun.
    pub sun_direction: Vec3,
    pub planet_radius: f64,
    /// Rayleigh scattering coefficients (1/m) at sea level for R, G, B.
    pub rayleigh_sea_level: Rgb,
    /// Aerosol scattering coefficient (1/m) at sea level per unit of
    /// `turbidity − 1`.
    pub mie_sea_level: f64,
    pub aerosol_scale_height: f64,
    /// Altitude above which aerosol density is zero.
    pub aerosol_ceiling: f64,
    pub mie_g: f64,
    /// Solar irradiance scale applied to sky radiance.
    pub sun_intensity: f64,
}

/// Rayleigh coefficient at `lambda_nm`, scaled from 13.5e-6 /m at 550 nm
/// with the λ⁻⁴ law.
pub fn rayleigh_coefficient(lambda_nm: f64) -> f64 {
    13.5e-6 * (550.0 / lambda_nm).powi(4)
}

/// Sun direction from azimuth (from +x toward +y) and elevation, radians.
pub fn sun_direction(azimuth: f64, elevation: f64) -> Vec3 {
    Vec3::new(
        elevation.cos() * azimuth.cos(),
        elevation.cos() * azimuth.sin(),
        elevation.sin(),
    )
}

impl Default for AtmosphereConfig {
    fn default() -> Self {
        Self {
            rho0: 1.225,
            scale_height: 8000.0,
            thickness: 60_000.0,
            n_shells: 64,
            turbidity: 2.0,
            sun_direction: sun_direction(0.0, 45f64.to_radians()),
            planet_radius: 6_371_000.0,
            rayleigh_sea_level: Rgb::new(
                rayleigh_coefficient(680.0),
                rayleigh_coefficient(550.0),
                rayleigh_coefficient(440.0),
            ),
            mie_sea_level: 21e-6,
            aerosol_scale_height: 1200.0,
            aerosol_ceiling: 10_000.0,
            mie_g: 0.76,
            sun_intensity: 20.0,
        }
    }
}

impl AtmosphereConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho0", self.rho0),
            ("scale height", self.scale_height),
            ("thickness", self.thickness),
            ("planet radius", self.planet_radius),
            ("aerosol scale height", self.aerosol_scale_height),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "atmosphere {name} must be positive, got {v}"
                )));
            }
        }
        if !(self.turbidity >= 1.0) {
            return Err(Error::Config(format!(
                "turbidity must be at least 1, got {}",
                self.turbidity
            )));
        }
        if self.n_shells < 2 {
            return Err(Error::Config("atmosphere needs at least 2 shells".into()));
        }
        if !(self.mie_g.abs() < 1.0) {
            return Err(Error::Config(
                "Henyey-Greenstein g must lie in (-1, 1)".into(),
            ));
        }
        if (self.sun_direction.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("sun direction must be a unit vector".into()));
        }
        Ok(())
    }

    /// `ρ0·exp(−h/H)`; negative altitudes are clamped to 0.
    pub fn air_density(&self, h: f64) -> f64 {
        let h = if h < 0.0 {
            warn!("negative altitude {h} clamped to 0");
            0.0
        } else {
            h
        };
        self.rho0 * (-h / self.scale_height).exp()
    }

    /// Aerosol density relative to sea level.
    pub fn aerosol_density(&self, h: f64) -> f64 {
        if h > self.aerosol_ceiling {
            0.0
        } else {
            (-h.max(0.0) / self.aerosol_scale_height).exp()
        }
    }

    /// Aerosol scattering coefficient at sea level, zero at turbidity 1.
    pub fn mie_coefficient(&self) -> f64 {
        self.mie_sea_level * (self.turbidity - 1.0)
    }

    /// Local extinction coefficient per colour band at altitude `h`.
    pub fn extinction(&self, h: f64) -> Rgb {
        let h = h.max(0.0);
        self.rayleigh_sea_level * (self.air_density(h) / self.rho0)
            + Rgb::repeat(self.mie_coefficient() * self.aerosol_density(h))
    }

    pub fn top_radius(&self) -> f64 {
        self.planet_radius + self.thickness
    }
}

/// Refractive index of dry air at altitude `h` metres.
pub fn refractive_index(h: f64) -> f64 {
    refractive_index_with_vapor(h, 0.0)
}

/// Empirical index with water-vapour pressure `e`. The formulas take feet,
/// degrees Fahrenheit and lb/ft²; temperature enters the refractivity in
/// Rankine.
pub fn refractive_index_with_vapor(h: f64, e: f64) -> f64 {
    let h_ft = h.max(0.0) * METERS_TO_FEET;
    let (t_f, p) = if h < BRANCH_ALTITUDE {
        let t = 59.0 - 0.00356 * h_ft;
        (t, 2116.0 * ((t + 459.7) / 518.6).powf(5.256))
    } else {
        (-70.0, 473.1 * (1.73 - 0.000048 * h_ft).exp())
    };
    let t_r = t_f + 459.7;
    1.0 + 79.0 * (p + 4800.0 * e / t_r) / t_r * 1e-6
}

/// Both branch values at the switch altitude, for reporting the jump.
pub fn refractive_index_branch_jump() -> (f64, f64) {
    let below = refractive_index(BRANCH_ALTITUDE - 1e-6);
    let above = refractive_index(BRANCH_ALTITUDE);
    debug!("refractive index jumps from {below} to {above} at {BRANCH_ALTITUDE} m");
    (below, above)
}

/// Concentric shells. Shell `k` spans `radii[k]..radii[k+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellGrid {
    pub radii: Vec<f64>,
    /// Mean air density over each shell's altitude range.
    pub mean_density: Vec<f64>,
    /// Mean relative aerosol density over each shell's altitude range.
    pub mean_aerosol: Vec<f64>,
    pub refractive_index: Vec<f64>,
    pub config: AtmosphereConfig,
}

/// Shell boundaries at equal increments of air mass:
/// `h_k = −H ln(1 − k/n·(1 − e^{−T/H}))`.
pub fn shell_altitudes(n: usize, scale_height: f64, thickness: f64) -> Vec<f64> {
    let total = -(-thickness / scale_height).exp_m1();
    let mut h: Vec<f64> = (0..=n)
        .map(|k| -scale_height * (-(k as f64) / n as f64 * total).ln_1p())
        .collect();
    h[n] = thickness;
    h
}

pub fn build_shells(config: &AtmosphereConfig) -> Result<ShellGrid> {
    config.validate()?;
    let alt = shell_altitudes(config.n_shells, config.scale_height, config.thickness);
    let hs = config.scale_height;
    let ha = config.aerosol_scale_height;
    let mut mean_density = Vec::with_capacity(config.n_shells);
    let mut mean_aerosol = Vec::with_capacity(config.n_shells);
    let mut index = Vec::with_capacity(config.n_shells);
    for w in alt.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        mean_density.push(config.rho0 * exp_mean(a, b, hs, len));
        let top = b.min(config.aerosol_ceiling);
        let aerosol = if top > a {
            exp_mean(a, top, ha, len)
        } else {
            0.0
        };
        mean_aerosol.push(aerosol);
        index.push(refractive_index(0.5 * (a + b)));
    }
    Ok(ShellGrid {
        radii: alt.iter().map(|h| config.planet_radius + h).collect(),
        mean_density,
        mean_aerosol,
        refractive_index: index,
        config: config.clone(),
    })
}

/// `∫_a^b e^{−h/H} dh / len`, stable when `H` dwarfs the interval.
fn exp_mean(a: f64, b: f64, scale: f64, len: f64) -> f64 {
    (-a / scale).exp() * -(-(b - a) / scale).exp_m1() * scale / len
}

/// Ray parameters where `o + s·d` (unit `d`) crosses the sphere of radius `r`.
fn sphere_crossings(o: &Vec3, d: &Vec3, r: f64) -> Option<(f64, f64)> {
    let b = o.dot(d);
    let c = o.norm_squared() - r * r;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Stable pair of roots.
    let q = if b > 0.0 { -b - sq } else { -b + sq };
    if q == 0.0 {
        return Some((0.0, 0.0));
    }
    let (s0, s1) = (q, c / q);
    Some(if s0 < s1 { (s0, s1) } else { (s1, s0) })
}

impl ShellGrid {
    pub fn n_shells(&self) -> usize {
        self.mean_density.len()
    }

    /// Shell containing radius `r`, if inside the atmosphere.
    pub fn shell_at(&self, r: f64) -> Option<usize> {
        if r < self.radii[0] || r > *self.radii.last().unwrap() {
            return None;
        }
        let k = self.radii.partition_point(|&x| x <= r);
        Some(k.saturating_sub(1).min(self.n_shells() - 1))
    }

    /// Extinction of shell `k` from its mean densities.
    pub fn shell_extinction(&self, k: usize) -> Rgb {
        let c = &self.config;
        c.rayleigh_sea_level * (self.mean_density[k] / c.rho0)
            + Rgb::repeat(c.mie_coefficient() * self.mean_aerosol[k])
    }

    /// Pieces `(s0, s1, shell)` of the segment `o + s·d`, `s ∈ [0, len]`,
    /// split at every shell boundary.
    pub fn segment_pieces(&self, o: &Vec3, d: &Vec3, len: f64) -> Vec<(f64, f64, usize)> {
        let d = d.normalize();
        let mut cuts = vec![0.0, len];
        for &r in &self.radii {
            if let Some((a, b)) = sphere_crossings(o, &d, r) {
                for s in [a, b] {
                    if s > 0.0 && s < len {
                        cuts.push(s);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .filter_map(|w| {
                let mid = o + d * (0.5 * (w[0] + w[1]));
                self.shell_at(mid.norm()).map(|k| (w[0], w[1], k))
            })
            .collect()
    }

    /// Optical depth per band between points `a` and `b`.
    pub fn optical_depth(&self, a: &Vec3, b: &Vec3) -> Rgb {
        let len = (b - a).norm();
        if len == 0.0 {
            return Rgb::zeros();
        }
        self.segment_pieces(a, &(b - a), len)
            .into_iter()
            .map(|(s0, s1, k)| self.shell_extinction(k) * (s1 - s0))
            .sum()
    }

    pub fn transmittance(&self, a: &Vec3, b: &Vec3) -> Rgb {
        self.optical_depth(a, b).map(|t| (-t).exp())
    }

    /// Distance from `o` along unit `d` to the top of the atmosphere, or
    /// `None` if the ray meets the ground first.
    pub fn exit_distance(&self, o: &Vec3, d: &Vec3) -> Option<f64> {
        if let Some((s0, s1)) = sphere_crossings(o, d, self.radii[0]) {
            if s1 > 1e-6 && s0 > 1e-6 {
                return None;
            }
        }
        sphere_crossings(o, d, *self.radii.last().unwrap()).map(|(_, s1)| s1.max(0.0))
    }

    pub fn observer(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, self.config.planet_radius + 1.0)
    }

    /// Transmittance of direct sunlight from the top of the atmosphere to
    /// the observer.
    pub fn sun_transmittance(&self, sun: &Vec3) -> Rgb {
        let o = self.observer();
        match self.exit_distance(&o, sun) {
            Some(l) => self.transmittance(&o, &(o + sun * l)),
            None => Rgb::zeros(),
        }
    }

    /// Single-scattered sky radiance seen by the observer along `view`.
    /// Directions below the horizon return black.
    pub fn sky_radiance(&self, view: &Vec3, sun: &Vec3) -> Rgb {
        let c = &self.config;
        let view = view.normalize();
        let sun = sun.normalize();
        let o = self.observer();
        if view.z < 0.0 {
            return Rgb::zeros();
        }
        let Some(len) = self.exit_distance(&o, &view) else {
            return Rgb::zeros();
        };
        let cos = view.dot(&sun);
        let phase_r = 3.0 / (16.0 * PI) * (1.0 + cos * cos);
        let phase_m = henyey_greenstein(cos, c.mie_g);
        let beta_m = c.mie_coefficient();
        let mut tau_view = Rgb::zeros();
        let mut l = Rgb::zeros();
        for (s0, s1, k) in self.segment_pieces(&o, &view, len) {
            let ext = self.shell_extinction(k);
            let ds = s1 - s0;
            let x = o + view * (0.5 * (s0 + s1));
            let t_sun = match self.exit_distance(&x, &sun) {
                Some(ls) => self.transmittance(&x, &(x + sun * ls)),
                None => Rgb::zeros(),
            };
            let t_view = (tau_view + ext * (0.5 * ds)).map(|t| (-t).exp());
            let scatter = c.rayleigh_sea_level * (self.mean_density[k] / c.rho0 * phase_r)
                + Rgb::repeat(beta_m * self.mean_aerosol[k] * phase_m);
            l += t_view.component_mul(&t_sun).component_mul(&scatter) * ds;
            tau_view += ext * ds;
        }
        l * c.sun_intensity
    }

    /// Traces a ray through the shells, bending it at each boundary by Snell's
    /// law with the per-shell refractive indices.
    pub fn refracted_path(&self, origin: &Vec3, dir: &Vec3) -> RefractedPath {
        let mut p = *origin;
        let mut d = dir.normalize();
        let mut points = vec![p];
        let top = *self.radii.last().unwrap();
        let max_steps = 4 * self.radii.len() + 8;
        for _ in 0..max_steps {
            let r = p.norm();
            let Some(k) = self.shell_at(r) else { break };
            let mut next: Option<(f64, f64)> = None;
            for &rb in &[self.radii[k], self.radii[k + 1]] {
                if let Some((a, b)) = sphere_crossings(&p, &d, rb) {
                    for s in [a, b] {
                        if s > 1e-6 && next.is_none_or(|(best, _)| s < best) {
                            next = Some((s, rb));
                        }
                    }
                }
            }
            let Some((s, rb)) = next else { break };
            p += d * s;
            points.push(p);
            if rb == self.radii[0] {
                return RefractedPath {
                    points,
                    direction: d,
                    hit_ground: true,
                };
            }
            if rb == top && d.dot(&p) > 0.0 {
                return RefractedPath {
                    points,
                    direction: d,
                    hit_ground: false,
                };
            }
            let outward = d.dot(&p) > 0.0;
            let k_next = if outward { k + 1 } else { k.wrapping_sub(1) };
            let n1 = self.refractive_index[k];
            let n2 = self.refractive_index.get(k_next).copied().unwrap_or(1.0);
            let radial = p / p.norm();
            let normal = if outward { -radial } else { radial };
            d = refract_dir(&d, &normal, n1, n2)
                .unwrap_or_else(|| crate::shading::reflect_dir(&d, &normal));
            // Step just past the boundary so the shell lookup is unambiguous.
            p += d * 1e-3;
        }
        RefractedPath {
            points,
            direction: d,
            hit_ground: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefractedPath {
    pub points: Vec<Vec3>,
    pub direction: Vec3,
    pub hit_ground: bool,
}

/// Henyey–Greenstein phase function.
pub fn henyey_greenstein(cos: f64, g: f64) -> f64 {
    let denom = (1.0 + g * g - 2.0 * g * cos).powf(1.5);
    (1.0 - g * g) / (4.0 * PI * denom)
}

pub fn rayleigh_phase(cos: f64) -> f64 {
    3.0 / (16.0 * PI) * (1.0 + cos * cos)
}

/// Precomputed sky radiance over the upper hemisphere, bilinear in
/// elevation and azimuth.
#[derive(Debug, Clone, PartialEq)]
pub struct SkyMap {
    n_elevation: usize,
    n_azimuth: usize,
    values: Vec<Rgb>,
}

impl SkyMap {
    pub fn new(grid: &ShellGrid, n_elevation: usize, n_azimuth: usize) -> Self {
        let n_elevation = n_elevation.max(2);
        let n_azimuth = n_azimuth.max(4);
        let sun = grid.config.sun_direction;
        let values = (0..n_elevation * n_azimuth)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n_azimuth, k % n_azimuth);
                let el = 0.5 * PI * i as f64 / (n_elevation - 1) as f64;
                let az = 2.0 * PI * j as f64 / n_azimuth as f64;
                grid.sky_radiance(&sun_direction(az, el.min(0.5 * PI - 1e-9)), &sun)
            })
            .collect();
        Self {
            n_elevation,
            n_azimuth,
            values,
        }
    }

    /// Radiance along `dir`; black below the horizon.
    pub fn lookup(&self, dir: &Vec3) -> Rgb {
        let d = dir.normalize();
        if d.z < 0.0 {
            return Rgb::zeros();
        }
        let el = d.z.clamp(0.0, 1.0).asin();
        let az = d.y.atan2(d.x).rem_euclid(2.0 * PI);
        let fi = el / (0.5 * PI) * (self.n_elevation - 1) as f64;
        let fj = az / (2.0 * PI) * self.n_azimuth as f64;
        let i0 = (fi.floor() as usize).min(self.n_elevation - 2);
        let ti = fi - i0 as f64;
        let j0 = fj.floor() as usize % self.n_azimuth;
        let j1 = (j0 + 1) % self.n_azimuth;
        let tj = fj - fj.floor();
        let at = |i: usize, j: usize| self.values[i * self.n_azimuth + j];
        let lo = at(i0, j0) * (1.0 - tj) + at(i0, j1) * tj;
        let hi = at(i0 + 1, j0) * (1.0 - tj) + at(i0 + 1, j1) * tj;
        lo * (1.0 - ti) + hi * ti
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid() -> ShellGrid {
        build_shells(&AtmosphereConfig::default()).unwrap()
    }

    #[test]
    fn density_examples() {
        let c = AtmosphereConfig::default();
        assert_eq!(c.air_density(0.0), c.rho0);
        assert_relative_eq!(
            c.air_density(c.scale_height),
            c.rho0 / std::f64::consts::E,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            c.air_density(2.0 * c.scale_height),
            c.rho0 / std::f64::consts::E.powi(2),
            max_relative = 1e-15
        );
        assert_eq!(c.air_density(-50.0), c.rho0);
    }

    #[test]
    fn sea_level_refractive_index() {
        let n = refractive_index(0.0);
        let p = 2116.0 * (518.7_f64 / 518.6).powf(5.256);
        assert!((n - (1.0 + 79.0 * p / 518.7 * 1e-6)).abs() < 1e-12);
        assert!((n - 1.000322).abs() < 1e-6);
    }

    #[test]
    fn refractive_index_decreases_with_altitude() {
        let mut prev = refractive_index(0.0);
        for k in 1..120 {
            let h = k as f64 * 100.0;
            if h >= BRANCH_ALTITUDE {
                break;
            }
            let n = refractive_index(h);
            assert!(n <= prev);
            prev = n;
        }
        let mut prev = refractive_index(BRANCH_ALTITUDE);
        for k in 1..480 {
            let n = refractive_index(BRANCH_ALTITUDE + k as f64 * 100.0);
            assert!(n <= prev && n > 1.0);
            prev = n;
        }
        let (below, above) = refractive_index_branch_jump();
        assert!(below.is_finite() && above.is_finite());
        assert!(refractive_index(60_000.0) - 1.0 < 1e-5);
    }

    #[test]
    fn two_shells_in_the_uniform_limit() {
        let h = shell_altitudes(2, 1e12, 60_000.0);
        assert!((h[1] - 30_000.0).abs() < 1e-3);
    }

    #[test]
    fn shells_equal_mass_and_widening() {
        let g = grid();
        let c = &g.config;
        let masses: Vec<f64> = g
            .radii
            .windows(2)
            .zip(&g.mean_density)
            .map(|(w, rho)| rho * (w[1] - w[0]))
            .collect();
        let expected =
            c.rho0 * c.scale_height * -(-c.thickness / c.scale_height).exp_m1() / c.n_shells as f64;
        for m in masses {
            assert!((m - expected).abs() / expected < 1e-9);
        }
        let widths: Vec<f64> = g.radii.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(widths.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_segment_has_unit_transmittance() {
        let g = grid();
        let p = g.observer();
        assert_eq!(g.optical_depth(&p, &p), Rgb::zeros());
        assert_eq!(g.transmittance(&p, &p), Rgb::repeat(1.0));
    }

    #[test]
    fn homogeneous_shell_is_exact() {
        let c = AtmosphereConfig {
            n_shells: 2,
            scale_height: 1e15,
            turbidity: 1.0,
            ..Default::default()
        };
        let g = build_shells(&c).unwrap();
        let a = Vec3::new(0.0, 0.0, c.planet_radius + 100.0);
        let b = Vec3::new(0.0, 0.0, c.planet_radius + 1100.0);
        let tau = g.optical_depth(&a, &b);
        assert_relative_eq!(tau, c.rayleigh_sea_level * 1000.0, max_relative = 1e-9);
    }

    #[test]
    fn vertical_column_is_total_mass() {
        let g = grid();
        let c = &g.config;
        let a = Vec3::new(0.0, 0.0, c.planet_radius);
        let b = Vec3::new(0.0, 0.0, c.top_radius());
        let tau = g.optical_depth(&a, &b);
        let col = c.scale_height * -(-c.thickness / c.scale_height).exp_m1();
        let aer = c.aerosol_scale_height * -(-c.aerosol_ceiling / c.aerosol_scale_height).exp_m1();
        let expected = c.rayleigh_sea_level * col + Rgb::repeat(c.mie_coefficient() * aer);
        assert_relative_eq!(tau, expected, max_relative = 1e-9);
    }

    #[test]
    fn zenith_sky_is_blue() {
        let g = grid();
        let l = g.sky_radiance(&Vec3::z(), &Vec3::z());
        assert!(l.z / l.x > 1.0, "{l:?}");
    }

    #[test]
    fn turbidity_one_has_no_mie() {
        let c = AtmosphereConfig {
            turbidity: 1.0,
            ..Default::default()
        };
        assert_eq!(c.mie_coefficient(), 0.0);
        let g = build_shells(&c).unwrap();
        let a = g.observer();
        let tau = g.optical_depth(&a, &(a + Vec3::z() * 5000.0));
        let r = g.config.rayleigh_sea_level;
        assert_relative_eq!(tau.x / r.x, tau.z / r.z, max_relative = 1e-12);
    }

    #[test]
    fn turbidity_reduces_direct_sun() {
        let sun = sun_direction(0.3, 0.4);
        let mut prev = Rgb::repeat(f64::INFINITY);
        for t in [1.0, 2.0, 4.0, 8.0] {
            let g = build_shells(&AtmosphereConfig {
                turbidity: t,
                ..Default::default()
            })
            .unwrap();
            let tr = g.sun_transmittance(&sun);
            assert!(tr.iter().zip(prev.iter()).all(|(a, b)| a < b));
            prev = tr;
        }
    }

    #[test]
    fn refraction_bends_toward_zenith() {
        let g = grid();
        let o = g.observer();
        let d = sun_direction(0.0, 5f64.to_radians());
        let path = g.refracted_path(&o, &d);
        assert!(!path.hit_ground);
        assert!(path.points.len() > 2);
        assert!((path.direction - d).norm() < 1e-2);
    }

    #[test]
    fn sky_map_matches_direct_evaluation_at_nodes() {
        let g = build_shells(&AtmosphereConfig {
            n_shells: 16,
            ..Default::default()
        })
        .unwrap();
        let map = SkyMap::new(&g, 9, 16);
        let d = sun_direction(2.0 * PI * 3.0 / 16.0, 0.5 * PI * 4.0 / 8.0);
        let direct = g.sky_radiance(&d, &g.config.sun_direction);
        assert_relative_eq!(map.lookup(&d), direct, max_relative = 1e-9);
        assert_eq!(map.lookup(&-Vec3::z()), Rgb::zeros());
    }

    #[test]
    fn invalid_config_rejected() {
        for c in [
            AtmosphereConfig {
                scale_height: 0.0,
                ..Default::default()
            },
            AtmosphereConfig {
                thickness: -1.0,
                ..Default::default()
            },
            AtmosphereConfig {
                turbidity: 0.5,
                ..Default::default()
            },
            AtmosphereConfig {
                n_shells: 1,
                ..Default::default()
            },
        ] {
            assert!(build_shells(&c).is_err());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn transmittance_is_multiplicative(h0 in 0.0f64..20_000.0, el in 0.05f64..1.5, az in 0.0f64..std::f64::consts::TAU, s1 in 1.0f64..30_000.0, s2 in 1.0f64..30_000.0) {
            let g = grid();
            let d = sun_direction(az, el);
            let a = Vec3::new(0.0, 0.0, g.config.planet_radius + h0);
            let b = a + d * s1;
            let c = b + d * s2;
            let whole = g.transmittance(&a, &c);
            let parts = g.transmittance(&a, &b).component_mul(&g.transmittance(&b, &c));
            for k in 0..3 {
                prop_assert!((whole[k] - parts[k]).abs() < 1e-12);
                prop_assert!(whole[k] > 0.0 && whole[k] <= 1.0);
            }
        }

        #[test]
        fn sky_is_nonnegative(vaz in 0.0f64..std::f64::consts::TAU, vel in -0.5f64..std::f64::consts::FRAC_PI_2, saz in 0.0f64..std::f64::consts::TAU, sel in -0.3f64..std::f64::consts::FRAC_PI_2) {
            let g = build_shells(&AtmosphereConfig { n_shells: 16, ..Default::default() }).unwrap();
            let l = g.sky_radiance(&sun_direction(vaz, vel), &sun_direction(saz, sel));
            prop_assert!(l.iter().all(|c| *c >= 0.0 && c.is_finite()));
        }
    }
}
