//! Move-making optimizers: ICM, alpha-beta swap and alpha-expansion.

mod expansion;
mod icm;
mod swap;

pub use expansion::{expansion_graph, expansion_move, run_expansion, ExpansionGraph};
pub use icm::run_icm;
pub use swap::{run_swap, swap_move};

use crate::energy::Energy;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::time::Instant;

/// Order in which labels (or label pairs) are visited inside a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelOrder {
    #[default]
    Ascending,
    /// A fresh permutation per cycle, drawn from ChaCha8 seeded with `seed`.
    Shuffled { seed: u64 },
}

impl LabelOrder {
    pub(crate) fn visit<T: Clone>(&self, items: &[T], rng: &mut Option<ChaCha8Rng>) -> Vec<T> {
        let mut v = items.to_vec();
        if let LabelOrder::Shuffled { seed } = self {
            let rng = rng.get_or_insert_with(|| ChaCha8Rng::seed_from_u64(*seed));
            v.shuffle(rng);
        }
        v
    }
}

/// Termination policy shared by every solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Cap on full passes (cycles over labels, sweeps, or message passes).
    pub max_cycles: usize,
    /// A move solver stops once a cycle lowers the energy by no more than this.
    pub improvement_epsilon: Energy,
    pub label_order: LabelOrder,
    /// Message passing stops once the decoded energy changes by less than this
    /// fraction between passes. Zero disables the check.
    pub relative_tolerance: f64,
}

impl SolverConfig {
    /// Defaults for the move solvers: 10 cycles, stop on no improvement.
    pub fn moves() -> Self {
        Self {
            max_cycles: 10,
            improvement_epsilon: 0,
            label_order: LabelOrder::Ascending,
            relative_tolerance: 0.0,
        }
    }

    /// Defaults for message passing: 50 passes or relative change below 1e-4.
    pub fn message_passing() -> Self {
        Self {
            max_cycles: 50,
            improvement_epsilon: 0,
            label_order: LabelOrder::Ascending,
            relative_tolerance: 1e-4,
        }
    }

    pub fn with_max_cycles(mut self, n: usize) -> Self {
        self.max_cycles = n.max(1);
        self
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::moves()
    }
}

/// One point of a convergence curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub cycle: usize,
    pub energy: Energy,
    pub seconds: f64,
}

/// Energy after each cycle; sample 0 is the initial labeling.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTrace {
    pub samples: Vec<TraceSample>,
}

impl ConvergenceTrace {
    pub(crate) fn start(energy: Energy) -> (Self, Instant) {
        let trace = Self {
            samples: vec![TraceSample {
                cycle: 0,
                energy,
                seconds: 0.0,
            }],
        };
        (trace, Instant::now())
    }

    pub(crate) fn record(&mut self, energy: Energy, clock: &Instant) {
        let cycle = self.samples.len();
        self.samples.push(TraceSample {
            cycle,
            energy,
            seconds: clock.elapsed().as_secs_f64(),
        });
    }

    pub fn initial_energy(&self) -> Option<Energy> {
        self.samples.first().map(|s| s.energy)
    }

    pub fn final_energy(&self) -> Option<Energy> {
        self.samples.last().map(|s| s.energy)
    }

    /// Number of cycles run (samples after the initial one).
    pub fn cycles(&self) -> usize {
        self.samples.len().saturating_sub(1)
    }

    pub fn is_non_increasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].energy <= w[0].energy)
    }

    /// `cycle,energy,seconds` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cycle,energy,seconds\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{:.6}", s.cycle, s.energy, s.seconds);
        }
        out
    }
}

/// The up-to-four 4-connected neighbours of pixel `p`.
#[inline]
pub(crate) fn neighbors(p: usize, width: usize, height: usize) -> impl Iterator<Item = usize> {
    let (r, c) = (p / width, p % width);
    let left = (c > 0).then(|| p - 1);
    let right = (c + 1 < width).then(|| p + 1);
    let up = (r > 0).then(|| p - width);
    let down = (r + 1 < height).then(|| p + width);
    [left, right, up, down].into_iter().flatten()
}

#[cfg(test)]
pub(crate) mod testutil {
    use crate::energy::{energy_of, GridEnergy, LabelSet, Labeling, Smoothness, TableModel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn random_table(
        rng: &mut ChaCha8Rng,
        w: usize,
        h: usize,
        m: usize,
        smoothness: Smoothness,
    ) -> TableModel {
        let labels = LabelSet::new((0..m as u8).collect()).unwrap();
        let unary = (0..w * h * m).map(|_| rng.random_range(0..40)).collect();
        TableModel::new(w, h, labels, smoothness, unary).unwrap()
    }

    pub fn random_labeling(rng: &mut ChaCha8Rng, model: &impl GridEnergy) -> Labeling {
        let n = model.pixel_count();
        let m = model.label_count();
        Labeling::new(
            model.width(),
            model.height(),
            (0..n).map(|_| rng.random_range(0..m) as u16).collect(),
        )
        .unwrap()
    }

    /// Exhaustive minimum over every labeling.
    pub fn global_minimum(model: &impl GridEnergy) -> i64 {
        let n = model.pixel_count();
        let m = model.label_count();
        let mut digits = vec![0u16; n];
        let mut best = i64::MAX;
        loop {
            let l = Labeling::new(model.width(), model.height(), digits.clone()).unwrap();
            best = best.min(energy_of(model, &l));
            let mut i = 0;
            loop {
                if i == n {
                    return best;
                }
                digits[i] += 1;
                if usize::from(digits[i]) < m {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }

    pub fn seeded(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }
}
