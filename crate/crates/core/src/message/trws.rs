use super::transform::DistanceTransform;
use super::{settled, MessageField, Sender, Side, Weighting};
use crate::energy::{energy_of, Energy, GridEnergy, Labeling};
use crate::moves::{ConvergenceTrace, SolverConfig};
use std::fmt::Write as _;

/// Lower bound on the minimum energy after each pass.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LowerBoundTrace {
    pub samples: Vec<(usize, Energy)>,
}

impl LowerBoundTrace {
    pub fn is_non_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].1 >= w[0].1)
    }

    pub fn final_bound(&self) -> Option<Energy> {
        self.samples.last().map(|s| s.1)
    }

    /// True when `energy` meets the final bound, which proves the labeling
    /// achieving it is a global minimum.
    pub fn certifies(&self, energy: Energy) -> bool {
        self.final_bound() == Some(energy)
    }

    /// `pass,lower_bound` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pass,lower_bound\n");
        for (pass, bound) in &self.samples {
            let _ = writeln!(out, "{pass},{bound}");
        }
        out
    }
}

struct ChainScratch {
    dt: DistanceTransform,
    theta: Vec<Energy>,
    acc: Vec<Energy>,
    h: Vec<Energy>,
    conv: Vec<Energy>,
}

impl ChainScratch {
    fn new<M: GridEnergy>(model: &M) -> Self {
        let m = model.label_count();
        Self {
            dt: DistanceTransform::new(model.labels(), model.smoothness()),
            theta: vec![0; m],
            acc: vec![0; m],
            h: vec![0; m],
            conv: vec![0; m],
        }
    }

    /// Minimum over one chain whose edges run toward `forward`.
    fn chain_min<M: GridEnergy>(
        &mut self,
        model: &M,
        field: &MessageField,
        weighting: Weighting,
        nodes: impl Iterator<Item = usize>,
        forward: Side,
    ) -> Energy {
        let rows = matches!(forward, Side::Right);
        let mut prev: Option<usize> = None;
        for t in nodes {
            field.belief(model, t, &mut self.theta);
            for x in self.theta.iter_mut() {
                let r = weighting.row_share(*x);
                *x = if rows { r } else { *x - r };
            }
            match prev {
                None => self.acc.copy_from_slice(&self.theta),
                Some(s) => {
                    let back = field.message(s, forward);
                    for ((h, &a), &b) in self.h.iter_mut().zip(&self.acc).zip(back) {
                        *h = a - Energy::from(b);
                    }
                    self.dt.apply(&self.h, &mut self.conv);
                    let fwd = field.message(t, forward.opposite());
                    for (l, a) in self.acc.iter_mut().enumerate() {
                        *a = self.conv[l] - Energy::from(fwd[l]) + self.theta[l];
                    }
                }
            }
            prev = Some(t);
        }
        *self.acc.iter().min().expect("label set is never empty")
    }
}

/// Sum over all row chains and all column chains of each chain's minimum,
/// under the split of node potentials used by the message updates.
///
/// For any messages the chains' energies add up to the model energy of
/// every labeling, so the result never exceeds the minimum energy.
fn chain_bound<M: GridEnergy>(
    scratch: &mut ChainScratch,
    model: &M,
    field: &MessageField,
    weighting: Weighting,
) -> Energy {
    let (w, h) = (field.width(), field.height());
    let mut total = 0;
    for r in 0..h {
        total += scratch.chain_min(model, field, weighting, r * w..(r + 1) * w, Side::Right);
    }
    for c in 0..w {
        total += scratch.chain_min(
            model,
            field,
            weighting,
            (0..h).map(|r| r * w + c),
            Side::Down,
        );
    }
    total
}

/// Sequential tree-reweighted message passing over the row and column
/// chains of the grid.
///
/// Each pass is a forward raster sweep (messages right and down) followed
/// by a backward sweep (left and up); a node's potential is split between
/// its row chain and its column chain. After every pass the labeling is
/// decoded as in BP and the chain lower bound is recorded.
pub fn run_trws<M: GridEnergy>(
    model: &M,
    init: &Labeling,
    cfg: &SolverConfig,
) -> (Labeling, ConvergenceTrace, LowerBoundTrace) {
    let (w, h, m) = (model.width(), model.height(), model.label_count());
    let weighting = Weighting::for_grid(w, h);
    let (mut trace, clock) = ConvergenceTrace::start(energy_of(model, init));
    let mut bounds = LowerBoundTrace::default();
    let mut sender = Sender::new(model, weighting);
    let mut scratch = ChainScratch::new(model);
    let mut field = MessageField::new(w, h, m);
    let mut best = init.clone();
    let mut previous = None;
    for pass in 1..=cfg.max_cycles.max(1) {
        sender.sequential_pass(&mut field);
        best = field.decode(model);
        let e = energy_of(model, &best);
        trace.record(e, &clock);
        let bound = chain_bound(&mut scratch, model, &field, weighting);
        bounds.samples.push((pass, bound));
        if bound >= e || previous.is_some_and(|prev| settled(prev, e, cfg.relative_tolerance)) {
            break;
        }
        previous = Some(e);
    }
    (best, trace, bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::Smoothness;
    use crate::message::testutil::chain_optimum;
    use crate::moves::testutil::*;
    use rand::Rng;

    fn long_run() -> SolverConfig {
        SolverConfig {
            relative_tolerance: 0.0,
            ..SolverConfig::message_passing().with_max_cycles(30)
        }
    }

    #[test]
    fn single_pixel_bound_is_tight() {
        let mut rng = seeded(51);
        let model = random_table(&mut rng, 1, 1, 5, Smoothness::default());
        let min = (0..5).map(|l| model.unary(0, l)).min().unwrap();
        let (l, trace, bounds) = run_trws(&model, &Labeling::constant(1, 1, 0), &long_run());
        assert_eq!(bounds.samples, vec![(1, min)]);
        assert_eq!(trace.final_energy(), Some(min));
        assert!(bounds.certifies(energy_of(&model, &l)));
    }

    #[test]
    fn bound_is_monotone_and_valid_on_small_grids() {
        let mut rng = seeded(52);
        for _ in 0..40 {
            let k = rng.random_range(1..=2);
            let s = Smoothness::new(rng.random_range(1..10), k, rng.random_range(1..20)).unwrap();
            let model = random_table(&mut rng, 3, 3, 3, s);
            let opt = global_minimum(&model);
            let (l, trace, bounds) = run_trws(&model, &Labeling::constant(3, 3, 0), &long_run());
            assert!(bounds.is_non_decreasing(), "{:?}", bounds.samples);
            for (i, &(_, b)) in bounds.samples.iter().enumerate() {
                assert!(b <= opt);
                assert!(b <= trace.samples[i + 1].energy);
            }
            let e = energy_of(&model, &l);
            if bounds.certifies(e) {
                assert_eq!(e, opt);
            }
        }
    }

    #[test]
    fn bound_is_monotone_on_larger_grids() {
        let mut rng = seeded(53);
        for _ in 0..10 {
            let (w, h) = (rng.random_range(2..9), rng.random_range(2..9));
            let model = random_table(&mut rng, w, h, 8, Smoothness::default());
            let (_, _, bounds) = run_trws(&model, &Labeling::constant(w, h, 0), &long_run());
            assert!(bounds.is_non_decreasing(), "{:?}", bounds.samples);
        }
    }

    #[test]
    fn chains_are_solved_exactly() {
        let mut rng = seeded(54);
        for i in 0..20 {
            let len = rng.random_range(2..8);
            let (w, h) = if i % 2 == 0 { (len, 1) } else { (1, len) };
            let model = random_table(&mut rng, w, h, 4, Smoothness::new(4, 1, 3).unwrap());
            let (_, _, bounds) = run_trws(&model, &Labeling::constant(w, h, 0), &long_run());
            assert_eq!(bounds.final_bound(), Some(chain_optimum(&model)));
        }
    }

    #[test]
    fn bound_csv_layout() {
        let t = LowerBoundTrace {
            samples: vec![(1, -4), (2, 10)],
        };
        assert_eq!(t.to_csv(), "pass,lower_bound\n1,-4\n2,10\n");
        assert!(t.is_non_decreasing());
        assert!(t.certifies(10));
        assert!(!t.certifies(11));
    }
}
