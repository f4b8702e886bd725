//! Scene color → key: dominant color by k-means, HSV conversion and the
//! color-range table.

mod hsv;
mod kmeans;
mod table;

use std::path::Path;

use thiserror::Error;

pub use hsv::{hsv_to_rgb, rgb_to_hsv, Hsv, Rgb};
pub use kmeans::{dominant_color, kmeans, Clustering, CONVERGENCE_SHIFT, MAX_ITERATIONS};
pub use table::{hsv_to_keyscale, lookup, Interval, MappingRow, TableMatch, TABLE};

pub use crate::key::{scale_set, KeyScale, Mode};

/// Frames are downsampled to at most this many pixels per side before
/// clustering.
pub const MAX_SAMPLE_SIDE: u32 = 64;

#[derive(Debug, Error)]
pub enum ColorError {
    #[error("image has no pixels")]
    Empty,
    #[error("frame of {width}x{height} needs {expected} bytes, got {got}")]
    FrameSize {
        width: u32,
        height: u32,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Image(#[from] image::ImageError),
}

/// Raw 8-bit RGB frame, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb>,
}

impl Frame {
    pub fn from_rgb_bytes(width: u32, height: u32, bytes: &[u8]) -> Result<Self, ColorError> {
        let expected = width as usize * height as usize * 3;
        if bytes.len() != expected {
            return Err(ColorError::FrameSize {
                width,
                height,
                expected,
                got: bytes.len(),
            });
        }
        if expected == 0 {
            return Err(ColorError::Empty);
        }
        Ok(Frame {
            width,
            height,
            pixels: bytes
                .chunks_exact(3)
                .map(|c| Rgb::new(c[0], c[1], c[2]))
                .collect(),
        })
    }

    pub fn solid(width: u32, height: u32, c: Rgb) -> Self {
        Frame {
            width,
            height,
            pixels: vec![c; (width * height) as usize],
        }
    }

    /// PNG or binary PPM, chosen by content.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ColorError> {
        let img = image::ImageReader::open(path)
            .map_err(image::ImageError::IoError)?
            .with_guessed_format()
            .map_err(image::ImageError::IoError)?
            .decode()?
            .to_rgb8();
        let (w, h) = img.dimensions();
        Frame::from_rgb_bytes(w, h, img.as_raw())
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ColorError> {
        let img = image::load_from_memory(bytes)?.to_rgb8();
        let (w, h) = img.dimensions();
        Frame::from_rgb_bytes(w, h, img.as_raw())
    }

    /// Nearest-neighbour sample on a uniform grid of at most
    /// `MAX_SAMPLE_SIDE` per side.
    pub fn downsample(&self) -> Vec<Rgb> {
        let sw = self.width.min(MAX_SAMPLE_SIDE);
        let sh = self.height.min(MAX_SAMPLE_SIDE);
        let mut out = Vec::with_capacity((sw * sh) as usize);
        for y in 0..sh {
            let sy = (y as u64 * self.height as u64 / sh as u64) as usize;
            for x in 0..sw {
                let sx = (x as u64 * self.width as u64 / sw as u64) as usize;
                out.push(self.pixels[sy * self.width as usize + sx]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneReading {
    pub dominant: Rgb,
    pub hsv: Hsv,
    pub key: KeyScale,
}

/// Full pipeline for one captured frame.
pub fn analyze_frame(frame: &Frame, k: usize, seed: u64) -> Result<SceneReading, ColorError> {
    let pixels = frame.downsample();
    if pixels.is_empty() {
        return Err(ColorError::Empty);
    }
    let dominant = dominant_color(&pixels, k, seed);
    let hsv = rgb_to_hsv(dominant);
    Ok(SceneReading {
        dominant,
        hsv,
        key: hsv_to_keyscale(hsv),
    })
}
