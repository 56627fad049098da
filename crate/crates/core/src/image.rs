//! 8-bit grayscale image grid shared by every other module.

use thiserror::Error;

/// Largest representable intensity (8-bit data).
pub const MAX_INTENSITY: u8 = 255;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("pixel buffer holds {actual} values but {width}x{height} needs {expected}")]
    BufferSize {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
}

/// A pixel location, `row` in `[0, height)` and `col` in `[0, width)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelCoord {
    pub row: usize,
    pub col: usize,
}

impl PixelCoord {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Row-major 8-bit image, origin at the top-left corner.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyDimensions { width, height });
        }
        let expected = width
            .checked_mul(height)
            .ok_or(ImageError::EmptyDimensions { width, height })?;
        if pixels.len() != expected {
            return Err(ImageError::BufferSize {
                width,
                height,
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image with every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ImageError> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self, ImageError> {
        let mut pixels = Vec::with_capacity(width.saturating_mul(height));
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    /// Always false: a grid has at least one pixel.
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn index(&self, at: PixelCoord) -> usize {
        at.row * self.width + at.col
    }

    pub fn contains(&self, at: PixelCoord) -> bool {
        at.row < self.height && at.col < self.width
    }

    /// Pixel at `at`, or `None` when out of bounds.
    pub fn get(&self, at: PixelCoord) -> Option<u8> {
        self.contains(at).then(|| self.pixels[self.index(at)])
    }

    /// Panics when `at` is out of bounds.
    pub fn at(&self, row: usize, col: usize) -> u8 {
        assert!(
            row < self.height && col < self.width,
            "pixel ({row}, {col}) out of bounds"
        );
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        assert!(
            row < self.height && col < self.width,
            "pixel ({row}, {col}) out of bounds"
        );
        self.pixels[row * self.width + col] = value;
    }

    pub fn same_shape(&self, other: &ImageGrid) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_shape(&self, width: usize, height: usize) -> Result<(), ImageError> {
        if self.width == width && self.height == height {
            Ok(())
        } else {
            Err(ImageError::DimensionMismatch(
                self.width,
                self.height,
                width,
                height,
            ))
        }
    }

    /// Swaps rows and columns.
    pub fn transposed(&self) -> ImageGrid {
        ImageGrid::from_fn(self.height, self.width, |r, c| self.at(c, r))
            .expect("transpose keeps a valid shape")
    }

    /// Copy of the `width`×`height` window starting at (`row`, `col`), clipped to the image.
    pub fn crop(
        &self,
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    ) -> Result<ImageGrid, ImageError> {
        let h = height.min(self.height.saturating_sub(row));
        let w = width.min(self.width.saturating_sub(col));
        ImageGrid::from_fn(w, h, |r, c| self.at(row + r, col + c))
    }
}
