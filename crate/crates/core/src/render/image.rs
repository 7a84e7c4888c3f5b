//! Image buffers and on-disk formats.
//!
//! Flat float format: 4-byte magic (`RAD3` for RGB, `RAD1` for a single
//! channel), little-endian `u32` width and height, then `f32` samples in
//! row-major order, channels interleaved.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::math::Rgb;

use super::integrator::PixelHit;

pub const DISPLAY_GAMMA: f64 = 2.2;

/// Linear RGB radiance plus optional first-hit records.
#[derive(Debug, Clone, PartialEq)]
pub struct RadianceImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb>,
    pub hits: Option<Vec<Option<PixelHit>>>,
}

impl RadianceImage {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            pixels: vec![Rgb::zeros(); width as usize * height as usize],
            hits: None,
        }
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn mean(&self) -> Rgb {
        self.pixels.iter().sum::<Rgb>() / self.pixels.len() as f64
    }

    /// Gamma-encoded 8-bit RGB, row-major.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .flat_map(|p| p.iter().map(|&c| encode(c)).collect::<Vec<_>>())
            .collect()
    }

    /// Binary PPM (P6, maxval 255).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.to_rgb8());
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_ppm())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        ::image::save_buffer(
            path,
            &self.to_rgb8(),
            self.width,
            self.height,
            ::image::ColorType::Rgb8,
        )
        .map_err(|e| Error::Config(format!("writing {}: {e}", path.display())))
    }

    pub fn to_float_image(&self) -> FloatImage {
        FloatImage {
            width: self.width,
            height: self.height,
            channels: 3,
            data: self
                .pixels
                .iter()
                .flat_map(|p| [p.x as f32, p.y as f32, p.z as f32])
                .collect(),
        }
    }
}

fn encode(c: f64) -> u8 {
    let c = if c.is_finite() {
        c.clamp(0.0, 1.0)
    } else {
        0.0
    };
    (c.powf(1.0 / DISPLAY_GAMMA) * 255.0).round() as u8
}

/// Scales linear radiance by `2^stops`. Display encoding happens on write.
pub fn apply_exposure(image: &RadianceImage, stops: f64) -> RadianceImage {
    let k = stops.exp2();
    RadianceImage {
        pixels: image.pixels.iter().map(|p| p * k).collect(),
        ..image.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloatImage {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub data: Vec<f32>,
}

pub fn write_float_image(img: &FloatImage, mut w: impl Write) -> Result<()> {
    let magic: &[u8; 4] = match img.channels {
        1 => b"RAD1",
        3 => b"RAD3",
        c => {
            return Err(Error::InvalidInput(format!(
                "unsupported channel count {c}"
            )))
        }
    };
    let ctx = |e| Error::io("writing float image", e);
    w.write_all(magic).map_err(ctx)?;
    w.write_all(&img.width.to_le_bytes()).map_err(ctx)?;
    w.write_all(&img.height.to_le_bytes()).map_err(ctx)?;
    let mut buf = Vec::with_capacity(img.data.len() * 4);
    for v in &img.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf).map_err(ctx)
}

pub fn read_float_image(mut r: impl Read) -> Result<FloatImage> {
    let ctx = |e| Error::io("reading float image", e);
    let mut head = [0u8; 12];
    r.read_exact(&mut head).map_err(ctx)?;
    let channels = match &head[0..4] {
        b"RAD1" => 1,
        b"RAD3" => 3,
        other => {
            return Err(Error::InvalidInput(format!(
                "bad float image magic {other:?}"
            )))
        }
    };
    let width = u32::from_le_bytes(head[4..8].try_into().unwrap());
    let height = u32::from_le_bytes(head[8..12].try_into().unwrap());
    let n = width as usize * height as usize * channels as usize;
    let mut bytes = vec![0u8; n * 4];
    r.read_exact(&mut bytes).map_err(ctx)?;
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(FloatImage {
        width,
        height,
        channels,
        data,
    })
}

/// Binary PGM (P5) from 8-bit gray values.
pub(crate) fn pgm_bytes(width: u32, height: u32, gray: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(gray);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exposure_scales_by_powers_of_two() {
        let mut img = RadianceImage::new(2, 1);
        img.pixels = vec![Rgb::new(0.1, 0.2, 0.3), Rgb::new(1.0, 0.0, 4.0)];
        assert_eq!(apply_exposure(&img, 0.0), img);
        let one = apply_exposure(&img, 1.0);
        assert_eq!(one.pixels[1], Rgb::new(2.0, 0.0, 8.0));
        let three = apply_exposure(&img, 3.0);
        assert_eq!(three.pixels[0], img.pixels[0] * 8.0);
    }

    #[test]
    fn ppm_header_and_gamma() {
        let mut img = RadianceImage::new(1, 1);
        img.pixels[0] = Rgb::new(0.0, 1.0, 0.5);
        let ppm = img.to_ppm();
        assert!(ppm.starts_with(b"P6\n1 1\n255\n"));
        let body = &ppm[ppm.len() - 3..];
        assert_eq!(body[0], 0);
        assert_eq!(body[1], 255);
        assert_eq!(body[2], (0.5f64.powf(1.0 / 2.2) * 255.0).round() as u8);
    }

    #[test]
    fn bad_magic_rejected() {
        assert!(read_float_image(&b"NOPE\0\0\0\0\0\0\0\0"[..]).is_err());
    }

    proptest! {
        #[test]
        fn float_image_round_trip(w in 1u32..6, h in 1u32..6, rgb in any::<bool>(), seed in any::<u32>()) {
            let channels = if rgb { 3 } else { 1 };
            let n = (w * h) as usize * channels as usize;
            let data: Vec<f32> = (0..n).map(|i| (seed as f32) * 1e-3 + i as f32).collect();
            let img = FloatImage { width: w, height: h, channels, data };
            let mut buf = Vec::new();
            write_float_image(&img, &mut buf).unwrap();
            prop_assert_eq!(buf.len(), 12 + n * 4);
            prop_assert_eq!(read_float_image(&buf[..]).unwrap(), img);
        }
    }
}
