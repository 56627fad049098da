use snpmrf::{
    corrupt, detect_min_max, psnr, read_pgm, restore, restore_masked, write_pgm, ImageGrid,
    InitStrategy, LabelSet, Method, ModelParams, NoiseSpec, PgmMode,
};

fn scene(w: usize, h: usize) -> ImageGrid {
    ImageGrid::from_fn(w, h, |r, c| {
        if c < w / 2 {
            60 + r as u8
        } else {
            170 + (r / 2) as u8
        }
    })
    .unwrap()
}

fn coarse() -> ModelParams {
    ModelParams {
        labels: LabelSet::strided(8).unwrap(),
        ..ModelParams::default()
    }
}

#[test]
fn every_method_improves_on_the_noisy_input() {
    let clean = scene(24, 20);
    let noisy = corrupt(&clean, &NoiseSpec::symmetric(0.4, 5).unwrap()).unwrap();
    let before = psnr(&clean, &noisy).unwrap();
    for method in Method::ALL {
        let r = restore(
            &noisy,
            coarse(),
            method,
            InitStrategy::Observed,
            &method.default_config(),
        )
        .unwrap();
        let after = psnr(&clean, &r.image).unwrap();
        assert!(after > before + 5.0, "{method}: {before:.2} -> {after:.2}");
        assert_eq!(r.solution.method, method);
        assert_eq!(r.solution.lower_bound.is_some(), method == Method::Trws);
    }
}

#[test]
fn detected_pixels_are_filled_in() {
    let clean = scene(16, 16);
    let noisy = corrupt(&clean, &NoiseSpec::symmetric(0.3, 2).unwrap()).unwrap();
    let mask = detect_min_max(&noisy);
    assert!(mask.flags().iter().any(|&m| m));
    let cfg = Method::Expansion.default_config();
    let r = restore_masked(
        noisy.clone(),
        mask.clone(),
        ModelParams::default(),
        Method::Expansion,
        InitStrategy::Median,
        &cfg,
    )
    .unwrap();
    for (&m, &v) in mask.flags().iter().zip(r.image.pixels()) {
        if m {
            assert!(v != 0 && v != 255);
        }
    }
    assert!(r.solution.trace.final_energy() < r.solution.trace.initial_energy());
}

#[test]
fn pgm_round_trip_of_a_restoration() {
    let noisy = corrupt(&scene(10, 7), &NoiseSpec::symmetric(0.2, 1).unwrap()).unwrap();
    let cfg = Method::Icm.default_config();
    let r = restore(&noisy, coarse(), Method::Icm, InitStrategy::MidGray, &cfg).unwrap();
    for mode in [PgmMode::Binary, PgmMode::Ascii] {
        assert_eq!(read_pgm(&write_pgm(&r.image, mode)).unwrap(), r.image);
    }
}
