use hsi::ordering::{random_order, xy_order};
use hsi::sampler::{budget, calibrate_a, expected_count, probability, select, select_prefix};
use hsi::SpectralCoord;

fn direct_sum(a: f64, total: usize) -> f64 {
    (1..=total).map(|n| a.powf((n - 1) as f64 / total as f64)).sum()
}

#[test]
fn anchor_value() {
    let a = calibrate_a(0.10, 256, 256).unwrap();
    assert!(((a - 4.5386e-5) / 4.5386e-5).abs() < 1e-4, "a = {a:e}");
    assert!((direct_sum(a, 65536) - 6553.6).abs() < 1e-6 * 6553.6);
}

#[test]
fn half_ratio_satisfies_geometric_sum() {
    let total = 64 * 64;
    let a = calibrate_a(0.5, 64, 64).unwrap();
    let closed = (1.0 - a) / (1.0 - a.powf(1.0 / total as f64));
    assert!((closed - 2048.0).abs() < 1e-6);
    assert!((direct_sum(a, total) - 2048.0).abs() < 1e-6);
    assert!((expected_count(a.ln(), total) - 2048.0).abs() < 1e-6);
}

#[test]
fn full_ratio_is_certain() {
    assert_eq!(calibrate_a(1.0, 32, 32).unwrap(), 1.0);
    let order = xy_order(16, 16).unwrap();
    for seed in 0..5 {
        let s = select(&order, 1.0, seed).unwrap();
        assert_eq!(s.len(), 256);
        assert_eq!(s.selected(), order.sequence());
    }
}

#[test]
fn calibration_is_monotone_in_ratio() {
    let mut last = 0.0;
    for sr in [0.01, 0.05, 0.1, 0.2, 0.5, 0.9] {
        let a = calibrate_a(sr, 64, 64).unwrap();
        assert!(a > last);
        last = a;
    }
}

#[test]
fn probability_examples() {
    let a = 4.5386e-5;
    let total = 65536;
    assert_eq!(probability(1, a, total).unwrap(), 1.0);
    let mid = probability(32769, a, total).unwrap();
    assert!((mid - a.sqrt()).abs() < 1e-12);
    assert!((mid - 6.737e-3).abs() < 1e-6);
    let last = probability(total, a, total).unwrap();
    assert!((last - a.powf((total - 1) as f64 / total as f64)).abs() < 1e-15);
    assert!(probability(0, a, total).is_err());
    assert!(probability(total + 1, a, total).is_err());
    assert!(probability(1, 0.0, total).is_err());
    assert!(probability(1, 1.5, total).is_err());
}

#[test]
fn bad_ratios_rejected() {
    assert!(calibrate_a(0.0, 8, 8).is_err());
    assert!(calibrate_a(1.01, 8, 8).is_err());
    assert!(calibrate_a(f64::NAN, 8, 8).is_err());
    assert!(budget(1e-6, 64).is_err());
}

#[test]
fn exact_cardinality_and_head_retention() {
    let order = xy_order(32, 32).unwrap();
    for sr in [0.01, 0.05, 0.1, 0.33, 0.7] {
        let m = budget(sr, 1024).unwrap();
        for seed in 0..20 {
            let s = select(&order, sr, seed).unwrap();
            assert_eq!(s.len(), m);
            assert_eq!(s.selected()[0], order.first());
            assert!(s.positions().windows(2).all(|w| w[0] < w[1]));
        }
    }
}

#[test]
fn determinism() {
    let order = random_order(16, 16, 4).unwrap();
    assert_eq!(select(&order, 0.2, 77).unwrap(), select(&order, 0.2, 77).unwrap());
    assert_ne!(
        select(&order, 0.2, 77).unwrap().positions(),
        select(&order, 0.2, 78).unwrap().positions()
    );
}

#[test]
fn prefix_selection() {
    let order = xy_order(8, 8).unwrap();
    let s = select_prefix(&order, 0.25).unwrap();
    assert_eq!(s.selected(), order.prefix(16));
    assert!(s.pf().is_none());
}

#[test]
fn mask_concentrates_upper_left() {
    let order = xy_order(256, 256).unwrap();
    let s = select(&order, 0.10, 2023).unwrap();
    let mask = s.mask();
    let quad = |u0: usize, v0: usize| -> usize {
        (u0..u0 + 64)
            .flat_map(|u| (v0..v0 + 64).map(move |v| (u, v)))
            .filter(|&(u, v)| mask[u * 256 + v])
            .count()
    };
    assert!(quad(0, 0) > quad(192, 192));
    assert!(mask[0]);
    let _ = SpectralCoord::DC;
}
