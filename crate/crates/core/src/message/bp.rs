use super::{settled, MessageField, Sender, Side, Weighting};
use crate::energy::{energy_of, GridEnergy, Labeling};
use crate::moves::{ConvergenceTrace, SolverConfig};

/// Message schedule for loopy belief propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// In-place raster sweeps: forward sending right and down, then
    /// backward sending left and up.
    Sequential,
    /// Every message recomputed from the previous pass's messages.
    Synchronous,
}

/// Min-sum loopy belief propagation from zero messages.
///
/// `init` only sets the first trace sample. Each pass is followed by a
/// decode whose energy is recorded; the run stops after `cfg.max_cycles`
/// passes or once the decoded energy changes by less than
/// `cfg.relative_tolerance` between passes.
pub fn run_bp<M: GridEnergy>(
    model: &M,
    init: &Labeling,
    cfg: &SolverConfig,
    schedule: Schedule,
) -> (Labeling, ConvergenceTrace) {
    let (w, h, m) = (model.width(), model.height(), model.label_count());
    let (mut trace, clock) = ConvergenceTrace::start(energy_of(model, init));
    let mut sender = Sender::new(model, Weighting::Full);
    let mut field = MessageField::new(w, h, m);
    let mut spare = match schedule {
        Schedule::Synchronous => Some(MessageField::new(w, h, m)),
        Schedule::Sequential => None,
    };
    let mut best = init.clone();
    let mut previous = None;
    for _ in 0..cfg.max_cycles.max(1) {
        match spare.as_mut() {
            None => sender.sequential_pass(&mut field),
            Some(next) => {
                for p in 0..w * h {
                    sender.load(&field, p);
                    for side in Side::ALL {
                        sender.send(&field, next, p, side);
                    }
                }
                std::mem::swap(&mut field, next);
            }
        }
        best = field.decode(model);
        let e = energy_of(model, &best);
        trace.record(e, &clock);
        if previous.is_some_and(|prev| settled(prev, e, cfg.relative_tolerance)) {
            break;
        }
        previous = Some(e);
    }
    (best, trace)
}
