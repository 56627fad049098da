//! Restoration of images corrupted by salt-and-pepper impulse noise.
//!
//! Corrupted pixels are located by min/max detection and treated as missing
//! data; the image is then recovered by minimizing a grid MRF energy with a
//! squared data term and a truncated smoothness term. The crate provides the
//! graph-cut expansion solver together with ICM, swap moves, loopy belief
//! propagation (two schedules) and TRW-S for comparison, plus PSNR/SSIM.

pub mod energy;
pub mod image;
pub mod maxflow;
pub mod message;
pub mod metrics;
pub mod moves;
pub mod noise;
pub mod pgm;
pub mod solver;

pub use energy::{
    energy_of, neighbor_pairs, total_energy, Energy, GridEnergy, LabelSet, Labeling, ModelError,
    ModelParams, MrfModel, Smoothness, TableModel,
};
pub use image::{ImageError, ImageGrid, PixelCoord};
pub use maxflow::{CutResult, FlowError, FlowNetwork, Side};
pub use message::{
    message_update, run_bp, run_trws, LowerBoundTrace, MessageError, MessageField, Schedule,
};
pub use metrics::{format_psnr, mse, psnr, ssim, MetricError, MetricReport, SsimMode};
pub use moves::{
    expansion_graph, expansion_move, run_expansion, run_icm, run_swap, swap_move, ConvergenceTrace,
    ExpansionGraph, LabelOrder, SolverConfig, TraceSample,
};
pub use noise::{
    build_superres_problem, corrupt, decimate, detect_min_max, NoiseError, NoiseSpec, PixelMask,
};
pub use pgm::{read_pgm, write_pgm, PgmError, PgmMode};
pub use solver::{
    initial_image, initial_labeling, restore, restore_masked, solve, InitStrategy, Method,
    Restoration, Solution, SolveError,
};
