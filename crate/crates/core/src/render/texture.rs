use std::path::Path;

use crate::error::{Error, Result};
use crate::math::Rgb;

/// Texel grid, row 0 at the top (`v = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Texture {
    width: usize,
    height: usize,
    texels: Vec<Rgb>,
}

impl Texture {
    pub fn new(width: usize, height: usize, texels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 || texels.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "texture {width}x{height} needs {} texels, got {}",
                width * height,
                texels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            texels,
        })
    }

    pub fn constant(c: Rgb) -> Self {
        Self {
            width: 1,
            height: 1,
            texels: vec![c],
        }
    }

    /// Loads an 8-bit image and converts it to linear values (γ = 2.2).
    pub fn load(path: &Path) -> Result<Self> {
        let img = ::image::open(path)
            .map_err(|e| Error::Config(format!("cannot read texture {}: {e}", path.display())))?
            .to_rgb8();
        let (w, h) = img.dimensions();
        let texels = img
            .pixels()
            .map(|p| Rgb::new(p[0] as f64, p[1] as f64, p[2] as f64).map(|c| (c / 255.0).powf(2.2)))
            .collect();
        Self::new(w as usize, h as usize, texels)
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn texel(&self, x: i64, y: i64) -> Rgb {
        let x = x.rem_euclid(self.width as i64) as usize;
        let y = y.rem_euclid(self.height as i64) as usize;
        self.texels[y * self.width + x]
    }

    /// Bilinear lookup with repeat wrapping; texel centres sit at
    /// `((i + ½)/W, 1 − (j + ½)/H)`.
    pub fn lookup(&self, u: f64, v: f64) -> Rgb {
        let u = u.rem_euclid(1.0);
        let v = v.rem_euclid(1.0);
        let x = u * self.width as f64 - 0.5;
        let y = (1.0 - v) * self.height as f64 - 0.5;
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (x0, y0) = (x0 as i64, y0 as i64);
        let top = self.texel(x0, y0) * (1.0 - fx) + self.texel(x0 + 1, y0) * fx;
        let bottom = self.texel(x0, y0 + 1) * (1.0 - fx) + self.texel(x0 + 1, y0 + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}
