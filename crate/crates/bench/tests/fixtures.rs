use snpmrf::{energy_of, run_expansion, GridEnergy, SolverConfig};
use snpmrf_bench::{grid_network, noisy_model, test_pattern};

#[test]
fn fixtures_are_deterministic() {
    assert_eq!(test_pattern(33), test_pattern(33));
    let (a, la) = noisy_model(32, 0.5, 8, 4);
    let (b, lb) = noisy_model(32, 0.5, 8, 4);
    assert_eq!(la, lb);
    assert_eq!(a.mask(), b.mask());
    assert_eq!(
        grid_network(10, 10, 3).min_cut().flow_value,
        grid_network(10, 10, 3).min_cut().flow_value
    );
}

#[test]
fn benchmark_model_is_solvable() {
    let (model, init) = noisy_model(24, 0.5, 8, 9);
    assert_eq!(model.label_count(), 32);
    let (l, trace) = run_expansion(&model, &init, &SolverConfig::moves().with_max_cycles(2));
    assert!(energy_of(&model, &l) < energy_of(&model, &init));
    assert!(trace.is_non_increasing());
}
