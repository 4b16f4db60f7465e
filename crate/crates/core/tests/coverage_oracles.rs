//! Monte Carlo coverage against nearest-neighbour closed forms.

use mpt_core::devices::{builtin_catalog, DeviceProfile, TransmitterSpec};
use mpt_core::linkphys::beam_efficiency;
use mpt_core::netcov::{
    confidence, density_tradeoff, nearest_neighbour_coverage, sample_ppp, simulate_coverage,
    stream_rng, NetworkScenario,
};
use rand::Rng;

fn phone() -> DeviceProfile {
    builtin_catalog().remove(1)
}

fn scenario(power: f64, pb_density: f64) -> NetworkScenario {
    let mut s = NetworkScenario::new(TransmitterSpec::reference_beacon(power).unwrap(), phone());
    s.pb_density = pb_density;
    let r = s.pt_range().distance().unwrap();
    s.region_side = (10.0 * r).max(2.0 * s.it_range().unwrap()).ceil();
    s.seed = 2024;
    s
}

/// Radiated power that puts the phone's range at exactly `r` metres.
fn power_for_range(r: f64) -> f64 {
    let tx = TransmitterSpec::reference_beacon(1.0).unwrap();
    let dev = phone();
    let b = tx.aperture.area() * dev.aperture().area() / (tx.carrier.wavelength() * r).powi(2);
    dev.consumption() / (dev.rf_to_dc() * beam_efficiency(b).unwrap())
}

#[test]
fn ppp_count_statistics() {
    let draws = 1000;
    let mean = (0..draws)
        .map(|i| sample_ppp(1e-3, 1000.0, &mut stream_rng(3, i)).unwrap().len() as f64)
        .sum::<f64>()
        / draws as f64;
    // sd of the mean: sqrt(1000 / 1000) = 1
    assert!((mean - 1000.0).abs() < 3.0, "{mean}");
}

#[test]
fn ppp_points_uniform() {
    let pts = sample_ppp(1e-2, 200.0, &mut stream_rng(8, 0)).unwrap();
    let n = pts.len() as f64;
    let left = pts.iter().filter(|p| p.x < 0.0).count() as f64;
    let inner = pts.iter().filter(|p| p.x.abs() < 50.0 && p.y.abs() < 50.0).count() as f64;
    assert!((left / n - 0.5).abs() < 3.0 * (0.25 / n).sqrt());
    assert!((inner / n - 0.25).abs() < 3.0 * (0.1875 / n).sqrt());
}

#[test]
fn pt_coverage_at_ten_metres() {
    let mut s = scenario(power_for_range(10.0), 1e-3);
    assert!((s.pt_range().distance().unwrap() - 10.0).abs() < 1e-9);
    assert!((s.pt_coverage_closed_form() - 0.2695).abs() < 1e-4);
    s.replications = 25;
    s.samples_per_replication = 400;
    let r = simulate_coverage(&s, None).unwrap();
    let sigma = r.pt_coverage.std_error().unwrap();
    assert!((r.pt_coverage.mean - 0.2696).abs() < 3.0 * sigma, "{:?}", r.pt_coverage);
}

#[test]
fn pt_coverage_matches_closed_form() {
    for (power, density) in [(5.0, 2e-3), (10.0, 1e-3), (20.0, 5e-4), (50.0, 1e-3), (50.0, 3e-4)] {
        let s = scenario(power, density);
        let r = simulate_coverage(&s, None).unwrap();
        let sigma = r.pt_coverage.std_error().unwrap();
        let expected = s.pt_coverage_closed_form();
        assert!(
            (r.pt_coverage.mean - expected).abs() < 3.0 * sigma,
            "P={power} density={density}: {} vs {expected} (sigma {sigma})",
            r.pt_coverage.mean
        );
    }
}

#[test]
fn it_coverage_matches_closed_form() {
    for bs_density in [2e-5, 5e-5, 1e-4] {
        let s = NetworkScenario { bs_density, ..scenario(20.0, 1e-3) };
        let r = simulate_coverage(&s, None).unwrap();
        let expected = s.it_coverage_closed_form();
        let sigma = r.it_coverage.std_error().unwrap();
        assert!((r.it_coverage.mean - expected).abs() < 3.0 * sigma, "{} vs {expected}", r.it_coverage.mean);
    }
}

#[test]
fn coverage_monotone_in_density() {
    let mut last = (0.0, 0.0);
    for k in 0..6 {
        let d = 2e-4 * 2f64.powi(k);
        let s = NetworkScenario {
            pb_density: d,
            bs_density: d / 10.0,
            replications: 8,
            samples_per_replication: 250,
            ..scenario(20.0, d)
        };
        let r = simulate_coverage(&s, None).unwrap();
        assert!(r.pt_coverage.mean >= last.0 && r.it_coverage.mean >= last.1);
        assert!(r.joint_coverage.mean <= r.pt_coverage.mean.min(r.it_coverage.mean));
        last = (r.pt_coverage.mean, r.it_coverage.mean);
    }
}

#[test]
fn joint_equals_marginal_when_other_saturates() {
    let s = NetworkScenario {
        it_snr_threshold_db: f64::NEG_INFINITY,
        bs_density: 1e-3,
        replications: 8,
        samples_per_replication: 250,
        ..scenario(20.0, 1e-3)
    };
    let r = simulate_coverage(&s, None).unwrap();
    assert_eq!(r.it_coverage.mean, 1.0);
    assert_eq!(r.joint_coverage.mean, r.pt_coverage.mean);
}

#[test]
fn results_independent_of_thread_count() {
    let s = NetworkScenario { replications: 16, samples_per_replication: 200, ..scenario(20.0, 1e-3) };
    let a = simulate_coverage(&s, Some(1)).unwrap();
    let b = simulate_coverage(&s, Some(8)).unwrap();
    let c = simulate_coverage(&s, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let other = simulate_coverage(&NetworkScenario { seed: 99, ..s.clone() }, Some(4)).unwrap();
    assert_ne!(a, other);
}

#[test]
fn enlarging_window_changes_little() {
    let s = scenario(20.0, 1e-3);
    let base = simulate_coverage(&s, None).unwrap();
    let wide = simulate_coverage(&NetworkScenario { region_side: 2.0 * s.region_side, ..s.clone() }, None).unwrap();
    for (a, b) in [
        (base.pt_coverage, wide.pt_coverage),
        (base.it_coverage, wide.it_coverage),
    ] {
        let hw = a.half_width.unwrap().max(b.half_width.unwrap());
        assert!((a.mean - b.mean).abs() < hw, "{a:?} vs {b:?}");
    }
}

#[test]
fn multi_beacon_sum_only_helps() {
    let s = NetworkScenario { replications: 8, samples_per_replication: 250, ..scenario(20.0, 2e-3) };
    let nearest = simulate_coverage(&s, None).unwrap().pt_coverage.mean;
    let summed = simulate_coverage(&NetworkScenario { multi_pb: true, ..s.clone() }, None).unwrap().pt_coverage.mean;
    assert!(summed >= nearest);
}

#[test]
fn confidence_bernoulli_scaling() {
    let mut rng = stream_rng(17, 0);
    let mut rep = |n: usize| -> f64 {
        (0..n).filter(|_| rng.random::<f64>() < 0.5).count() as f64 / n as f64
    };
    let reps25: Vec<f64> = (0..25).map(|_| rep(400)).collect();
    let hw25 = confidence(&reps25).unwrap();
    // sqrt(0.25 / 400) / sqrt(25) * 1.96 = 0.0098
    assert!((hw25 - 0.0098).abs() < 0.003, "{hw25}");
    let reps: Vec<f64> = (0..2000).map(|_| rep(400)).collect();
    let ratio = confidence(&reps[..1000]).unwrap() / confidence(&reps).unwrap();
    assert!((ratio - 2f64.sqrt()).abs() < 0.1, "{ratio}");
}

fn tradeoff_scenario(bs_swipt: bool) -> NetworkScenario {
    NetworkScenario {
        it_snr_threshold_db: f64::NEG_INFINITY,
        bs_swipt,
        replications: 10,
        samples_per_replication: 200,
        ..scenario(50.0, 1e-3)
    }
}

const PB_GRID: [f64; 8] = [2.5e-4, 5e-4, 7.5e-4, 1e-3, 1.25e-3, 1.5e-3, 1.75e-3, 2e-3];
const BS_GRID: [f64; 3] = [1e-4, 5e-4, 1e-3];

#[test]
fn tradeoff_constant_without_bs_power() {
    let f = density_tradeoff(&tradeoff_scenario(false), 0.8, &BS_GRID, &PB_GRID, None).unwrap();
    let first = f[0].min_pb_density.unwrap();
    assert!(f.iter().all(|p| p.min_pb_density == Some(first)), "{f:?}");
    // 1 - exp(-lambda pi r^2) >= 0.8 needs lambda >= 1.33e-3 for r = 19.66 m
    assert!((1.25e-3..=1.5e-3).contains(&first));
}

#[test]
fn tradeoff_decreases_with_bs_swipt() {
    let f = density_tradeoff(&tradeoff_scenario(true), 0.8, &BS_GRID, &PB_GRID, None).unwrap();
    let needed: Vec<f64> = f.iter().map(|p| p.min_pb_density.unwrap()).collect();
    assert!(needed.windows(2).all(|w| w[1] <= w[0]), "{needed:?}");
    assert!(needed[2] < needed[0]);
    for p in &f {
        assert!(p.joint_coverage.unwrap() >= 0.8);
    }
}

#[test]
fn tradeoff_edge_cases() {
    let s = tradeoff_scenario(false);
    let zero = density_tradeoff(&s, 0.0, &BS_GRID, &PB_GRID, None).unwrap();
    assert!(zero.iter().all(|p| p.min_pb_density == Some(PB_GRID[0])));
    let unreachable = density_tradeoff(&s, 0.999, &BS_GRID[..1], &PB_GRID[..2], None).unwrap();
    assert_eq!(unreachable[0].min_pb_density, None);
    assert!((nearest_neighbour_coverage(1.33e-3, 19.656) - 0.8).abs() < 0.01);
}
