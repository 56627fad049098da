//! Method selection, initial labelings and the detect / model / solve
//! pipeline.

use crate::energy::{GridEnergy, LabelSet, Labeling, ModelError, ModelParams, MrfModel};
use crate::image::{ImageGrid, PixelCoord};
use crate::message::{run_bp, run_trws, LowerBoundTrace, Schedule};
use crate::moves::{run_expansion, run_icm, run_swap, ConvergenceTrace, SolverConfig};
use crate::noise::{detect_min_max, PixelMask};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("unknown method '{0}' (expected icm, swap, bps, bpm, trws or expansion)")]
    UnknownMethod(String),
    #[error("unknown initialization '{0}' (expected observed, midgray or median)")]
    UnknownInit(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Icm,
    Swap,
    Bps,
    Bpm,
    Trws,
    Expansion,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Icm,
        Method::Swap,
        Method::Bps,
        Method::Bpm,
        Method::Trws,
        Method::Expansion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Icm => "icm",
            Method::Swap => "swap",
            Method::Bps => "bps",
            Method::Bpm => "bpm",
            Method::Trws => "trws",
            Method::Expansion => "expansion",
        }
    }

    /// Row label used in benchmark tables.
    pub fn title(self) -> &'static str {
        match self {
            Method::Icm => "ICM",
            Method::Swap => "Swap",
            Method::Bps => "BP-S",
            Method::Bpm => "BP-M",
            Method::Trws => "TRW-S",
            Method::Expansion => "Expansion",
        }
    }

    /// True for the move-making solvers, whose traces never increase.
    pub fn is_move_solver(self) -> bool {
        matches!(self, Method::Icm | Method::Swap | Method::Expansion)
    }

    /// Termination defaults: 10 cycles for move solvers, 50 passes with a
    /// relative tolerance of 1e-4 for message passing.
    pub fn default_config(self) -> SolverConfig {
        if self.is_move_solver() {
            SolverConfig::moves()
        } else {
            SolverConfig::message_passing()
        }
    }
}

impl FromStr for Method {
    type Err = SolveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| SolveError::UnknownMethod(s.to_string()))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Starting labeling for the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitStrategy {
    /// The noisy image itself, masked pixels included.
    #[default]
    Observed,
    /// Observed pixels as they are, masked ones at intensity 128.
    MidGray,
    /// Masked pixels take the median of the observed pixels in the smallest
    /// square window around them that contains any (128 if none exist).
    Median,
}

impl FromStr for InitStrategy {
    type Err = SolveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "observed" => Ok(InitStrategy::Observed),
            "midgray" => Ok(InitStrategy::MidGray),
            "median" => Ok(InitStrategy::Median),
            other => Err(SolveError::UnknownInit(other.to_string())),
        }
    }
}

impl fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitStrategy::Observed => "observed",
            InitStrategy::MidGray => "midgray",
            InitStrategy::Median => "median",
        })
    }
}

fn window_median(img: &ImageGrid, mask: &PixelMask, row: usize, col: usize) -> Option<u8> {
    let (w, h) = (img.width(), img.height());
    let mut seen = Vec::new();
    for radius in 1..w.max(h) {
        seen.clear();
        for r in row.saturating_sub(radius)..(row + radius + 1).min(h) {
            for c in col.saturating_sub(radius)..(col + radius + 1).min(w) {
                if !mask.is_missing(PixelCoord::new(r, c)) {
                    seen.push(img.at(r, c));
                }
            }
        }
        if !seen.is_empty() {
            seen.sort_unstable();
            return Some(seen[(seen.len() - 1) / 2]);
        }
    }
    None
}

/// The starting intensities for `strategy`, before snapping to labels.
pub fn initial_image(observed: &ImageGrid, mask: &PixelMask, strategy: InitStrategy) -> ImageGrid {
    match strategy {
        InitStrategy::Observed => observed.clone(),
        InitStrategy::MidGray => ImageGrid::from_fn(observed.width(), observed.height(), |r, c| {
            if mask.is_missing(PixelCoord::new(r, c)) {
                128
            } else {
                observed.at(r, c)
            }
        })
        .expect("same shape as the observation"),
        InitStrategy::Median => ImageGrid::from_fn(observed.width(), observed.height(), |r, c| {
            if mask.is_missing(PixelCoord::new(r, c)) {
                window_median(observed, mask, r, c).unwrap_or(128)
            } else {
                observed.at(r, c)
            }
        })
        .expect("same shape as the observation"),
    }
}

/// Initial labeling: each starting intensity snapped to the nearest label.
pub fn initial_labeling(model: &MrfModel, strategy: InitStrategy) -> Labeling {
    let img = initial_image(model.observed(), model.mask(), strategy);
    Labeling::from_image(&img, model.labels())
}

/// Result of one solver run.
#[derive(Debug, Clone)]
pub struct Solution {
    pub method: Method,
    pub labeling: Labeling,
    pub trace: ConvergenceTrace,
    /// Only produced by TRW-S.
    pub lower_bound: Option<LowerBoundTrace>,
}

impl Solution {
    pub fn energy(&self) -> crate::energy::Energy {
        self.trace
            .final_energy()
            .expect("traces start with the initial energy")
    }
}

/// Runs `method` from `init`.
pub fn solve<M: GridEnergy>(
    model: &M,
    method: Method,
    init: &Labeling,
    cfg: &SolverConfig,
) -> Result<Solution, SolveError> {
    init.validate(model)?;
    let (labeling, trace, lower_bound) = match method {
        Method::Icm => with_none(run_icm(model, init, cfg)),
        Method::Swap => with_none(run_swap(model, init, cfg)),
        Method::Expansion => with_none(run_expansion(model, init, cfg)),
        Method::Bps => with_none(run_bp(model, init, cfg, Schedule::Sequential)),
        Method::Bpm => with_none(run_bp(model, init, cfg, Schedule::Synchronous)),
        Method::Trws => {
            let (l, t, b) = run_trws(model, init, cfg);
            (l, t, Some(b))
        }
    };
    Ok(Solution {
        method,
        labeling,
        trace,
        lower_bound,
    })
}

fn with_none(
    r: (Labeling, ConvergenceTrace),
) -> (Labeling, ConvergenceTrace, Option<LowerBoundTrace>) {
    (r.0, r.1, None)
}

/// A restored image with the model it was solved on.
#[derive(Debug, Clone)]
pub struct Restoration {
    pub model: MrfModel,
    pub solution: Solution,
    pub image: ImageGrid,
}

/// Restores a noisy image given the missing-pixel mask.
pub fn restore_masked(
    observed: ImageGrid,
    mask: PixelMask,
    params: ModelParams,
    method: Method,
    init: InitStrategy,
    cfg: &SolverConfig,
) -> Result<Restoration, SolveError> {
    let model = MrfModel::build(observed, mask, params)?;
    let start = initial_labeling(&model, init);
    let solution = solve(&model, method, &start, cfg)?;
    let image = solution.labeling.to_image(model.labels());
    Ok(Restoration {
        model,
        solution,
        image,
    })
}

/// Detects salt and pepper pixels by their extreme values, then restores.
pub fn restore(
    noisy: &ImageGrid,
    params: ModelParams,
    method: Method,
    init: InitStrategy,
    cfg: &SolverConfig,
) -> Result<Restoration, SolveError> {
    restore_masked(
        noisy.clone(),
        detect_min_max(noisy),
        params,
        method,
        init,
        cfg,
    )
}

/// Label set with values `0, stride, 2 * stride, ...`.
pub fn label_set(stride: usize) -> Result<LabelSet, ModelError> {
    LabelSet::strided(stride)
}
