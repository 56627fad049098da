use super::{neighbors, ConvergenceTrace, SolverConfig};
use crate::energy::{energy_of, Energy, GridEnergy, Labeling, PairTable};

/// Iterated conditional modes.
///
/// Raster-order sweeps; every pixel takes the label with the lowest local
/// energy (its data cost plus the pairwise cost against the current
/// neighbours), ties going to the smallest label. Stops after a sweep that
/// changes nothing, or after `cfg.max_cycles` sweeps.
pub fn run_icm<M: GridEnergy>(
    model: &M,
    init: &Labeling,
    cfg: &SolverConfig,
) -> (Labeling, ConvergenceTrace) {
    let (w, h) = (model.width(), model.height());
    let m = model.label_count();
    let pairs = PairTable::new(model);
    let mut labeling = init.clone();
    let mut energy = energy_of(model, &labeling);
    let (mut trace, clock) = ConvergenceTrace::start(energy);
    let mut nbr_labels = [0usize; 4];

    for _ in 0..cfg.max_cycles.max(1) {
        let mut changed = 0usize;
        for p in 0..w * h {
            let mut k = 0;
            for q in neighbors(p, w, h) {
                nbr_labels[k] = labeling.get(q);
                k += 1;
            }
            let local = |l: usize| -> Energy {
                model.unary(p, l)
                    + nbr_labels[..k]
                        .iter()
                        .map(|&lq| pairs.get(l, lq))
                        .sum::<Energy>()
            };
            let current = labeling.get(p);
            let mut best = 0;
            let mut best_cost = local(0);
            for l in 1..m {
                let c = local(l);
                if c < best_cost {
                    best = l;
                    best_cost = c;
                }
            }
            if best != current {
                energy += best_cost - local(current);
                labeling.set(p, best);
                changed += 1;
            }
        }
        trace.record(energy, &clock);
        if changed == 0 {
            break;
        }
    }
    debug_assert_eq!(energy, energy_of(model, &labeling));
    (labeling, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::MrfModel;
    use crate::image::ImageGrid;
    use crate::moves::testutil::*;
    use crate::noise::PixelMask;

    #[test]
    fn masked_chain_middle_pixel_joins_neighbours() {
        let img = ImageGrid::new(3, 1, vec![0, 0, 0]).unwrap();
        let model = MrfModel::with_defaults(img, PixelMask::uniform(3, 1, true).unwrap()).unwrap();
        let init = Labeling::new(3, 1, vec![5, 9, 5]).unwrap();
        let one = SolverConfig::moves().with_max_cycles(1);
        let (after_one, trace) = run_icm(&model, &init, &one);
        assert_eq!(after_one.get(1), 5);
        assert!(trace.is_non_increasing());
        let (done, _) = run_icm(&model, &init, &SolverConfig::moves());
        assert!(done.indices().iter().all(|&l| l == done.get(0) as u16));
    }

    #[test]
    fn fixed_point_is_kept() {
        let mut rng = seeded(8);
        let model = random_table(&mut rng, 4, 3, 5, Default::default());
        let start = random_labeling(&mut rng, &model);
        let (fixed, _) = run_icm(&model, &start, &SolverConfig::moves().with_max_cycles(100));
        let (again, trace) = run_icm(&model, &fixed, &SolverConfig::moves());
        assert_eq!(again, fixed);
        assert_eq!(trace.cycles(), 1);
    }

    #[test]
    fn energy_never_increases() {
        let mut rng = seeded(9);
        for _ in 0..30 {
            let model = random_table(&mut rng, 5, 4, 6, Default::default());
            let start = random_labeling(&mut rng, &model);
            let (out, trace) = run_icm(&model, &start, &SolverConfig::moves());
            assert!(trace.is_non_increasing());
            assert_eq!(trace.final_energy(), Some(energy_of(&model, &out)));
        }
    }
}
