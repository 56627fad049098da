//! The inpainting MRF: label set, data term, truncated smoothness term on a
//! 4-connected grid, and total energy evaluation.
//!
//! All costs are integers. The data term is `(l - I_p)^2` on observed pixels
//! and zero on masked ones; the pairwise term is
//! `lambda * min(|l_p - l_q|^k, v_max)`, so with the default parameters the
//! largest neighbour penalty is 25.

use crate::image::{ImageError, ImageGrid, PixelCoord};
use crate::noise::PixelMask;
use thiserror::Error;

pub type Energy = i64;

pub const DEFAULT_LAMBDA: u32 = 5;
pub const DEFAULT_EXPONENT: u32 = 2;
pub const DEFAULT_V_MAX: u32 = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("label set is empty")]
    EmptyLabelSet,
    #[error("labels must be strictly increasing")]
    UnorderedLabels,
    #[error("label stride must be at least 1")]
    ZeroStride,
    #[error("smoothness exponent must be 1 or 2, got {0}")]
    BadExponent(u32),
    #[error("pixel ({}, {}) outside {width}x{height} model", .at.row, .at.col)]
    OutOfBounds {
        at: PixelCoord,
        width: usize,
        height: usize,
    },
    #[error("label {0} is not in the model's label set")]
    ForeignLabel(u8),
    #[error("label index {index} out of range for {count} labels")]
    LabelIndex { index: usize, count: usize },
    #[error("unary table has {actual} entries, expected {expected}")]
    TableSize { expected: usize, actual: usize },
    #[error(transparent)]
    Shape(#[from] ImageError),
}

/// Ordered set of candidate intensities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    values: Vec<u8>,
}

impl LabelSet {
    pub fn new(values: Vec<u8>) -> Result<Self, ModelError> {
        if values.is_empty() {
            return Err(ModelError::EmptyLabelSet);
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ModelError::UnorderedLabels);
        }
        Ok(Self { values })
    }

    /// All 256 intensities.
    pub fn full() -> Self {
        Self {
            values: (0..=255).collect(),
        }
    }

    /// Every `stride`-th intensity starting at 0; stride 1 is [`LabelSet::full`].
    pub fn strided(stride: usize) -> Result<Self, ModelError> {
        if stride == 0 {
            return Err(ModelError::ZeroStride);
        }
        Self::new((0..=255usize).step_by(stride).map(|v| v as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn value(&self, index: usize) -> u8 {
        self.values[index]
    }

    pub fn index_of(&self, value: u8) -> Option<usize> {
        self.values.binary_search(&value).ok()
    }

    /// Index of the label closest to `value`, ties toward the smaller label.
    pub fn nearest(&self, value: u8) -> usize {
        match self.values.binary_search(&value) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == self.values.len() => i - 1,
            Err(i) => {
                let below = value - self.values[i - 1];
                let above = self.values[i] - value;
                if below <= above {
                    i - 1
                } else {
                    i
                }
            }
        }
    }
}

/// Truncated power potential `lambda * min(|a - b|^k, v_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Smoothness {
    lambda: u32,
    exponent: u32,
    v_max: u32,
}

impl Smoothness {
    pub fn new(lambda: u32, exponent: u32, v_max: u32) -> Result<Self, ModelError> {
        if exponent != 1 && exponent != 2 {
            return Err(ModelError::BadExponent(exponent));
        }
        Ok(Self {
            lambda,
            exponent,
            v_max,
        })
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn v_max(&self) -> u32 {
        self.v_max
    }

    /// `min(|a - b|^k, v_max)`, without the weight.
    #[inline]
    pub fn unweighted(&self, a: u8, b: u8) -> Energy {
        let d = Energy::from(a.abs_diff(b));
        let p = if self.exponent == 1 { d } else { d * d };
        p.min(Energy::from(self.v_max))
    }

    /// `lambda * min(|a - b|^k, v_max)`.
    #[inline]
    pub fn weighted(&self, a: u8, b: u8) -> Energy {
        Energy::from(self.lambda) * self.unweighted(a, b)
    }

    /// Largest weighted penalty any pair can pay.
    pub fn ceiling(&self) -> Energy {
        Energy::from(self.lambda) * Energy::from(self.v_max)
    }
}

impl Default for Smoothness {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            exponent: DEFAULT_EXPONENT,
            v_max: DEFAULT_V_MAX,
        }
    }
}

/// A labeling problem on a 4-connected grid: one unary cost per pixel and
/// label, a shared truncated-power pairwise term over label values.
///
/// Pixels are addressed by raster index, labels by their index in
/// [`GridEnergy::labels`].
pub trait GridEnergy: Sync {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn labels(&self) -> &LabelSet;
    fn smoothness(&self) -> &Smoothness;
    fn unary(&self, pixel: usize, label: usize) -> Energy;

    fn pixel_count(&self) -> usize {
        self.width() * self.height()
    }

    fn label_count(&self) -> usize {
        self.labels().len()
    }

    /// Weighted pairwise cost between two label indices.
    #[inline]
    fn pairwise(&self, a: usize, b: usize) -> Energy {
        let labels = self.labels();
        self.smoothness().weighted(labels.value(a), labels.value(b))
    }
}

/// Parameters for [`MrfModel::build`]. `Default` gives lambda = 5, k = 2,
/// v_max = 5 over all 256 labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelParams {
    pub lambda: u32,
    pub exponent: u32,
    pub v_max: u32,
    pub labels: LabelSet,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            exponent: DEFAULT_EXPONENT,
            v_max: DEFAULT_V_MAX,
            labels: LabelSet::full(),
        }
    }
}

/// Inpainting model: observed image, missing-pixel mask and potentials.
#[derive(Debug, Clone)]
pub struct MrfModel {
    observed: ImageGrid,
    mask: PixelMask,
    labels: LabelSet,
    smoothness: Smoothness,
}

impl MrfModel {
    pub fn build(
        observed: ImageGrid,
        mask: PixelMask,
        params: ModelParams,
    ) -> Result<Self, ModelError> {
        observed.check_shape(mask.width(), mask.height())?;
        let smoothness = Smoothness::new(params.lambda, params.exponent, params.v_max)?;
        Ok(Self {
            observed,
            mask,
            labels: params.labels,
            smoothness,
        })
    }

    /// Model with default parameters.
    pub fn with_defaults(observed: ImageGrid, mask: PixelMask) -> Result<Self, ModelError> {
        Self::build(observed, mask, ModelParams::default())
    }

    pub fn observed(&self) -> &ImageGrid {
        &self.observed
    }

    pub fn mask(&self) -> &PixelMask {
        &self.mask
    }

    fn check_pixel(&self, p: PixelCoord) -> Result<usize, ModelError> {
        if self.observed.contains(p) {
            Ok(self.observed.index(p))
        } else {
            Err(ModelError::OutOfBounds {
                at: p,
                width: self.observed.width(),
                height: self.observed.height(),
            })
        }
    }

    /// Data cost of giving pixel `p` the intensity `label`.
    pub fn data_cost(&self, p: PixelCoord, label: u8) -> Result<Energy, ModelError> {
        let i = self.check_pixel(p)?;
        let l = self
            .labels
            .index_of(label)
            .ok_or(ModelError::ForeignLabel(label))?;
        Ok(self.unary(i, l))
    }

    /// Unweighted smoothness penalty between two labels of the set.
    pub fn smoothness_cost(&self, a: u8, b: u8) -> Result<Energy, ModelError> {
        for v in [a, b] {
            self.labels.index_of(v).ok_or(ModelError::ForeignLabel(v))?;
        }
        Ok(self.smoothness.unweighted(a, b))
    }
}

impl GridEnergy for MrfModel {
    fn width(&self) -> usize {
        self.observed.width()
    }

    fn height(&self) -> usize {
        self.observed.height()
    }

    fn labels(&self) -> &LabelSet {
        &self.labels
    }

    fn smoothness(&self) -> &Smoothness {
        &self.smoothness
    }

    #[inline]
    fn unary(&self, pixel: usize, label: usize) -> Energy {
        if self.mask.flags()[pixel] {
            0
        } else {
            let d = Energy::from(self.labels.value(label))
                - Energy::from(self.observed.pixels()[pixel]);
            d * d
        }
    }
}

/// Grid problem with an explicit unary table, `unary[pixel * m + label]`.
#[derive(Debug, Clone)]
pub struct TableModel {
    width: usize,
    height: usize,
    labels: LabelSet,
    smoothness: Smoothness,
    unary: Vec<Energy>,
}

impl TableModel {
    pub fn new(
        width: usize,
        height: usize,
        labels: LabelSet,
        smoothness: Smoothness,
        unary: Vec<Energy>,
    ) -> Result<Self, ModelError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyDimensions { width, height }.into());
        }
        let expected = width * height * labels.len();
        if unary.len() != expected {
            return Err(ModelError::TableSize {
                expected,
                actual: unary.len(),
            });
        }
        Ok(Self {
            width,
            height,
            labels,
            smoothness,
            unary,
        })
    }
}

impl GridEnergy for TableModel {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    fn labels(&self) -> &LabelSet {
        &self.labels
    }

    fn smoothness(&self) -> &Smoothness {
        &self.smoothness
    }

    #[inline]
    fn unary(&self, pixel: usize, label: usize) -> Energy {
        self.unary[pixel * self.labels.len() + label]
    }
}

/// One label index per pixel, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling {
    width: usize,
    height: usize,
    assignment: Vec<u16>,
}

impl Labeling {
    pub fn new(width: usize, height: usize, assignment: Vec<u16>) -> Result<Self, ModelError> {
        if assignment.len() != width * height || width == 0 || height == 0 {
            return Err(ImageError::BufferSize {
                width,
                height,
                expected: width * height,
                actual: assignment.len(),
            }
            .into());
        }
        Ok(Self {
            width,
            height,
            assignment,
        })
    }

    /// Every pixel takes label index `label`.
    pub fn constant(width: usize, height: usize, label: usize) -> Self {
        Self {
            width,
            height,
            assignment: vec![label as u16; width * height],
        }
    }

    /// Maps every pixel of `img` to the nearest label of `labels`.
    pub fn from_image(img: &ImageGrid, labels: &LabelSet) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            assignment: img
                .pixels()
                .iter()
                .map(|&v| labels.nearest(v) as u16)
                .collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    #[inline]
    pub fn get(&self, pixel: usize) -> usize {
        usize::from(self.assignment[pixel])
    }

    #[inline]
    pub fn set(&mut self, pixel: usize, label: usize) {
        self.assignment[pixel] = label as u16;
    }

    pub fn indices(&self) -> &[u16] {
        &self.assignment
    }

    /// Intensity image of the assigned label values.
    pub fn to_image(&self, labels: &LabelSet) -> ImageGrid {
        let px = self
            .assignment
            .iter()
            .map(|&l| labels.value(usize::from(l)))
            .collect();
        ImageGrid::new(self.width, self.height, px).expect("labeling shape is valid")
    }

    /// Checks shape and label range against `model`.
    pub fn validate(&self, model: &impl GridEnergy) -> Result<(), ModelError> {
        if self.width != model.width() || self.height != model.height() {
            return Err(ImageError::DimensionMismatch(
                self.width,
                self.height,
                model.width(),
                model.height(),
            )
            .into());
        }
        let count = model.label_count();
        match self.assignment.iter().find(|&&l| usize::from(l) >= count) {
            Some(&l) => Err(ModelError::LabelIndex {
                index: usize::from(l),
                count,
            }),
            None => Ok(()),
        }
    }

    pub fn transposed(&self) -> Labeling {
        let mut t = Vec::with_capacity(self.len());
        for c in 0..self.width {
            for r in 0..self.height {
                t.push(self.assignment[r * self.width + c]);
            }
        }
        Labeling {
            width: self.height,
            height: self.width,
            assignment: t,
        }
    }
}

/// Precomputed `m x m` table of weighted pairwise costs.
#[derive(Debug, Clone)]
pub struct PairTable {
    m: usize,
    costs: Vec<Energy>,
}

impl PairTable {
    pub fn new(model: &impl GridEnergy) -> Self {
        let m = model.label_count();
        let mut costs = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                costs.push(model.pairwise(a, b));
            }
        }
        Self { m, costs }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> Energy {
        self.costs[a * self.m + b]
    }
}

/// Unordered 4-connected neighbour pairs `(p, q)` with `p < q`, in raster
/// order of `p`, the right neighbour before the lower one.
pub fn neighbor_pairs(width: usize, height: usize) -> Vec<(usize, usize)> {
    let mut pairs =
        Vec::with_capacity(height * width.saturating_sub(1) + width * height.saturating_sub(1));
    for r in 0..height {
        for c in 0..width {
            let p = r * width + c;
            if c + 1 < width {
                pairs.push((p, p + 1));
            }
            if r + 1 < height {
                pairs.push((p, p + width));
            }
        }
    }
    pairs
}

/// Sum of data costs.
pub fn data_energy(model: &impl GridEnergy, labeling: &Labeling) -> Energy {
    (0..model.pixel_count())
        .map(|p| model.unary(p, labeling.get(p)))
        .sum()
}

/// Sum of weighted pairwise costs over every neighbour pair.
pub fn smooth_energy(model: &impl GridEnergy, labeling: &Labeling) -> Energy {
    let (w, h) = (model.width(), model.height());
    let mut total = 0;
    for r in 0..h {
        let row = r * w;
        for c in 0..w {
            let p = row + c;
            let lp = labeling.get(p);
            if c + 1 < w {
                total += model.pairwise(lp, labeling.get(p + 1));
            }
            if r + 1 < h {
                total += model.pairwise(lp, labeling.get(p + w));
            }
        }
    }
    total
}

/// Total energy; assumes `labeling` was validated against `model`.
pub fn energy_of(model: &impl GridEnergy, labeling: &Labeling) -> Energy {
    data_energy(model, labeling) + smooth_energy(model, labeling)
}

/// Total energy `E_data + lambda * E_smooth`.
pub fn total_energy(model: &impl GridEnergy, labeling: &Labeling) -> Result<Energy, ModelError> {
    labeling.validate(model)?;
    Ok(energy_of(model, labeling))
}
