//! Salt-and-pepper noise synthesis, min/max detection and inpainting masks.
//!
//! Corruption draws one uniform sample `u` in `[0, 1)` per pixel, in raster
//! order, from a ChaCha8 stream seeded with [`NoiseSpec::seed`]: `u < P`
//! gives pepper (0), `P <= u < P + Q` gives salt (255), anything else keeps
//! the pixel. The same seed therefore reproduces the same noise on every
//! platform.

use crate::image::{ImageError, ImageGrid, PixelCoord, MAX_INTENSITY};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const PEPPER: u8 = 0;
pub const SALT: u8 = MAX_INTENSITY;

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("invalid noise probabilities P={p}, Q={q}: each must lie in [0, 1] with P + Q <= 1")]
    InvalidProbabilities { p: f64, q: f64 },
    #[error("invalid noise level {0}: must lie in [0, 1]")]
    InvalidLevel(f64),
    #[error("upsampling factor must be at least 2, got {0}")]
    InvalidFactor(usize),
    #[error("mask image may only contain 0 (known) and 255 (missing), found {0}")]
    BadMaskValue(u8),
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Impulse noise parameters: pepper probability `P`, salt probability `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub p_pepper: f64,
    pub q_salt: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(p_pepper: f64, q_salt: f64, seed: u64) -> Result<Self, NoiseError> {
        let ok = |x: f64| (0.0..=1.0).contains(&x);
        if !ok(p_pepper) || !ok(q_salt) || p_pepper + q_salt > 1.0 + 1e-12 {
            return Err(NoiseError::InvalidProbabilities {
                p: p_pepper,
                q: q_salt,
            });
        }
        Ok(Self {
            p_pepper,
            q_salt,
            seed,
        })
    }

    /// Symmetric split of a total noise level: `P = Q = R / 2`.
    pub fn symmetric(level: f64, seed: u64) -> Result<Self, NoiseError> {
        if !(0.0..=1.0).contains(&level) {
            return Err(NoiseError::InvalidLevel(level));
        }
        Self::new(level / 2.0, level / 2.0, seed)
    }

    /// Noise level `R = P + Q`.
    pub fn level(&self) -> f64 {
        self.p_pepper + self.q_salt
    }
}

/// Per-pixel flag, `true` = corrupted or missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    width: usize,
    height: usize,
    flags: Vec<bool>,
}

impl PixelMask {
    pub fn new(width: usize, height: usize, flags: Vec<bool>) -> Result<Self, NoiseError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyDimensions { width, height }.into());
        }
        if flags.len() != width * height {
            return Err(ImageError::BufferSize {
                width,
                height,
                expected: width * height,
                actual: flags.len(),
            }
            .into());
        }
        Ok(Self {
            width,
            height,
            flags,
        })
    }

    /// Mask with every flag set to `missing`.
    pub fn uniform(width: usize, height: usize, missing: bool) -> Result<Self, NoiseError> {
        Self::new(width, height, vec![missing; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn is_missing(&self, at: PixelCoord) -> bool {
        self.flags[at.row * self.width + at.col]
    }

    pub fn missing_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// Fraction of flagged pixels.
    pub fn density(&self) -> f64 {
        self.missing_count() as f64 / self.flags.len() as f64
    }

    /// True when every pixel flagged in `other` is also flagged here.
    pub fn covers(&self, other: &PixelMask) -> bool {
        self.flags.len() == other.flags.len()
            && self.flags.iter().zip(&other.flags).all(|(&a, &b)| a || !b)
    }

    /// Viewable form: 0 = known, 255 = missing.
    pub fn to_image(&self) -> ImageGrid {
        let px = self
            .flags
            .iter()
            .map(|&f| if f { 255 } else { 0 })
            .collect();
        ImageGrid::new(self.width, self.height, px).expect("mask shape is valid")
    }

    /// Inverse of [`PixelMask::to_image`].
    pub fn from_image(img: &ImageGrid) -> Result<Self, NoiseError> {
        let flags = img
            .pixels()
            .iter()
            .map(|&v| match v {
                0 => Ok(false),
                255 => Ok(true),
                other => Err(NoiseError::BadMaskValue(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(img.width(), img.height(), flags)
    }
}

/// Applies salt-and-pepper noise; the input is left untouched.
pub fn corrupt(image: &ImageGrid, spec: &NoiseSpec) -> Result<ImageGrid, NoiseError> {
    corrupt_recorded(image, spec).map(|(noisy, _)| noisy)
}

/// Like [`corrupt`], also returning the set of pixels hit by an impulse.
pub fn corrupt_recorded(
    image: &ImageGrid,
    spec: &NoiseSpec,
) -> Result<(ImageGrid, PixelMask), NoiseError> {
    let spec = NoiseSpec::new(spec.p_pepper, spec.q_salt, spec.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let salt_cut = spec.p_pepper + spec.q_salt;
    let mut hits = Vec::with_capacity(image.len());
    let pixels = image
        .pixels()
        .iter()
        .map(|&v| {
            let u: f64 = rng.random();
            if u < spec.p_pepper {
                hits.push(true);
                PEPPER
            } else if u < salt_cut {
                hits.push(true);
                SALT
            } else {
                hits.push(false);
                v
            }
        })
        .collect();
    let noisy = ImageGrid::new(image.width(), image.height(), pixels)?;
    let hits = PixelMask::new(image.width(), image.height(), hits)?;
    Ok((noisy, hits))
}

/// Flags every pixel at the extremes of the intensity range.
pub fn detect_min_max(image: &ImageGrid) -> PixelMask {
    let flags = image
        .pixels()
        .iter()
        .map(|&v| v == PEPPER || v == SALT)
        .collect();
    PixelMask::new(image.width(), image.height(), flags).expect("image shape is valid")
}

/// Places `low` on a `factor`-times finer grid: pixel (r, c) lands at
/// (r·factor, c·factor); all other pixels are 0 and flagged missing.
pub fn build_superres_problem(
    low: &ImageGrid,
    factor: usize,
) -> Result<(ImageGrid, PixelMask), NoiseError> {
    if factor < 2 {
        return Err(NoiseError::InvalidFactor(factor));
    }
    let (w, h) = (low.width() * factor, low.height() * factor);
    let mut pixels = vec![0u8; w * h];
    let mut flags = vec![true; w * h];
    for r in 0..low.height() {
        for c in 0..low.width() {
            let i = r * factor * w + c * factor;
            pixels[i] = low.at(r, c);
            flags[i] = false;
        }
    }
    Ok((ImageGrid::new(w, h, pixels)?, PixelMask::new(w, h, flags)?))
}

/// Plain decimation: keeps every `factor`-th pixel in both directions,
/// no anti-alias prefilter. The result is `floor(w/factor)×floor(h/factor)`.
pub fn decimate(high: &ImageGrid, factor: usize) -> Result<ImageGrid, NoiseError> {
    if factor < 2 {
        return Err(NoiseError::InvalidFactor(factor));
    }
    let (w, h) = (high.width() / factor, high.height() / factor);
    Ok(ImageGrid::from_fn(w, h, |r, c| {
        high.at(r * factor, c * factor)
    })?)
}
