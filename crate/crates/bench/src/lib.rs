//! Fixtures shared by the solver benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snpmrf::{
    corrupt, detect_min_max, FlowNetwork, GridEnergy, ImageGrid, LabelSet, Labeling, ModelParams,
    MrfModel, NoiseSpec,
};

/// Smooth shading with a few sharp steps, free of pure black and white.
pub fn test_pattern(size: usize) -> ImageGrid {
    ImageGrid::from_fn(size, size, |r, c| {
        let base = 30 + (r * 120) / size + (c * 60) / size;
        let step = if (r / 16 + c / 24) % 3 == 0 { 40 } else { 0 };
        (base + step).min(250) as u8
    })
    .expect("size is positive")
}

/// Restoration model for `test_pattern(size)` under salt-and-pepper noise.
pub fn noisy_model(size: usize, level: f64, stride: usize, seed: u64) -> (MrfModel, Labeling) {
    let spec = NoiseSpec::symmetric(level, seed).expect("level in [0, 1]");
    let noisy = corrupt(&test_pattern(size), &spec).expect("valid noise spec");
    let mask = detect_min_max(&noisy);
    let params = ModelParams {
        labels: LabelSet::strided(stride).expect("stride is positive"),
        ..ModelParams::default()
    };
    let model = MrfModel::build(noisy.clone(), mask, params).expect("mask matches image");
    let init = Labeling::from_image(&noisy, model.labels());
    (model, init)
}

/// 4-connected grid network with random terminal and edge capacities.
pub fn grid_network(width: usize, height: usize, seed: u64) -> FlowNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = FlowNetwork::with_capacity(width * height, 2 * width * height);
    net.add_nodes(width * height);
    for p in 0..width * height {
        net.add_terminal(p, rng.random_range(0..100), rng.random_range(0..100))
            .expect("node exists");
        if p % width + 1 < width {
            net.add_edge(p, p + 1, rng.random_range(0..50), rng.random_range(0..50))
                .expect("node exists");
        }
        if p + width < width * height {
            net.add_edge(
                p,
                p + width,
                rng.random_range(0..50),
                rng.random_range(0..50),
            )
            .expect("node exists");
        }
    }
    net
}
