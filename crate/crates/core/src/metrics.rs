//! Restoration quality: MSE, PSNR and SSIM against a reference image.

use crate::image::ImageGrid;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Peak intensity used by PSNR and the SSIM constants.
pub const PEAK: f64 = 255.0;
const C1: f64 = (0.01 * PEAK) * (0.01 * PEAK);
const C2: f64 = (0.03 * PEAK) * (0.03 * PEAK);
/// Side of the blocks averaged by windowed SSIM.
pub const SSIM_BLOCK: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("images differ in size: {0}x{1} vs {2}x{3}")]
    Shape(usize, usize, usize, usize),
    #[error("unknown SSIM mode '{0}' (expected global or windowed)")]
    UnknownMode(String),
}

fn check(x: &ImageGrid, y: &ImageGrid) -> Result<(), MetricError> {
    if x.same_shape(y) {
        Ok(())
    } else {
        Err(MetricError::Shape(
            x.width(),
            x.height(),
            y.width(),
            y.height(),
        ))
    }
}

/// Mean squared intensity difference.
pub fn mse(x: &ImageGrid, y: &ImageGrid) -> Result<f64, MetricError> {
    check(x, y)?;
    let sum: u64 = x
        .pixels()
        .iter()
        .zip(y.pixels())
        .map(|(&a, &b)| u64::from(a.abs_diff(b)).pow(2))
        .sum();
    Ok(sum as f64 / x.len() as f64)
}

fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    }
}

/// Peak signal-to-noise ratio in dB; infinite for identical images.
pub fn psnr(x: &ImageGrid, y: &ImageGrid) -> Result<f64, MetricError> {
    mse(x, y).map(psnr_from_mse)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SsimMode {
    /// One evaluation over whole-image statistics.
    #[default]
    Global,
    /// Mean over non-overlapping 8x8 blocks; blocks at the right and bottom
    /// edges are clipped to the image.
    Windowed,
}

impl FromStr for SsimMode {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "global" => Ok(SsimMode::Global),
            "windowed" => Ok(SsimMode::Windowed),
            other => Err(MetricError::UnknownMode(other.to_string())),
        }
    }
}

impl fmt::Display for SsimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SsimMode::Global => "global",
            SsimMode::Windowed => "windowed",
        })
    }
}

/// SSIM over the rectangle `[r0, r1) x [c0, c1)`, population statistics.
fn ssim_region(x: &ImageGrid, y: &ImageGrid, r0: usize, r1: usize, c0: usize, c1: usize) -> f64 {
    let n = ((r1 - r0) * (c1 - c0)) as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for r in r0..r1 {
        for c in c0..c1 {
            sx += f64::from(x.at(r, c));
            sy += f64::from(y.at(r, c));
        }
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
    for r in r0..r1 {
        for c in c0..c1 {
            let dx = f64::from(x.at(r, c)) - mx;
            let dy = f64::from(y.at(r, c)) - my;
            vx += dx * dx;
            vy += dy * dy;
            cxy += dx * dy;
        }
    }
    let (vx, vy, cxy) = (vx / n, vy / n, cxy / n);
    ((2.0 * mx * my + C1) * (2.0 * cxy + C2)) / ((mx * mx + my * my + C1) * (vx + vy + C2))
}

/// Structural similarity with `c1 = (0.01 L)^2`, `c2 = (0.03 L)^2`.
pub fn ssim(x: &ImageGrid, y: &ImageGrid, mode: SsimMode) -> Result<f64, MetricError> {
    check(x, y)?;
    let (w, h) = (x.width(), x.height());
    Ok(match mode {
        SsimMode::Global => ssim_region(x, y, 0, h, 0, w),
        SsimMode::Windowed => {
            let mut total = 0.0;
            let mut blocks = 0usize;
            for r in (0..h).step_by(SSIM_BLOCK) {
                for c in (0..w).step_by(SSIM_BLOCK) {
                    total +=
                        ssim_region(x, y, r, (r + SSIM_BLOCK).min(h), c, (c + SSIM_BLOCK).min(w));
                    blocks += 1;
                }
            }
            total / blocks as f64
        }
    })
}

/// The three metrics for one restored image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub mse: f64,
    pub psnr: f64,
    pub ssim: f64,
}

impl MetricReport {
    pub fn evaluate(
        reference: &ImageGrid,
        restored: &ImageGrid,
        mode: SsimMode,
    ) -> Result<Self, MetricError> {
        let mse = mse(reference, restored)?;
        Ok(Self {
            mse,
            psnr: psnr_from_mse(mse),
            ssim: ssim(reference, restored, mode)?,
        })
    }

    /// `PSNR,SSIM` at two decimals, as used in benchmark tables.
    pub fn cell(&self) -> String {
        format!("{},{:.2}", format_psnr(self.psnr), self.ssim)
    }
}

/// Two decimals, or `inf`.
pub fn format_psnr(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.2}")
    }
}
