//! Retrodirective beamforming against brute-force and analytic oracles.

use std::f64::consts::PI;

use mpt_core::beamsim::{
    beacon_ring, contamination_split, contamination_split_channels, coordinated_beacons, field_at,
    received_power, retrodirective_weights, ArrayLayout, BeamWeights, PhasorChannel, PlaneGrid,
    Point3,
};
use mpt_core::linkphys::CarrierSpec;
use mpt_core::netcov::stream_rng;
use num_complex::Complex64;
use rand::Rng;

fn carrier() -> CarrierSpec {
    CarrierSpec::from_frequency(2.5e9).unwrap()
}

fn random_channel(rng: &mut impl Rng, n: usize) -> PhasorChannel {
    PhasorChannel::new(
        (0..n)
            .map(|_| Complex64::from_polar(0.2 + rng.random::<f64>(), 2.0 * PI * rng.random::<f64>()))
            .collect(),
    )
    .unwrap()
}

fn random_unit_weights(rng: &mut impl Rng, n: usize) -> BeamWeights {
    let raw: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = raw.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
    BeamWeights::new(raw.into_iter().map(|w| w / norm).collect())
}

#[test]
fn conjugate_weights_beat_random_search() {
    let mut rng = stream_rng(11, 0);
    let h = random_channel(&mut rng, 16);
    let best = received_power(&h, &retrodirective_weights(&h, 1.0).unwrap()).unwrap();
    assert!((best / h.norm_sqr() - 1.0).abs() < 1e-9);
    for _ in 0..20_000 {
        let w = random_unit_weights(&mut rng, 16);
        assert!(received_power(&h, &w).unwrap() <= best * (1.0 + 1e-12));
    }
}

#[test]
fn equal_amplitude_channel_gains_n() {
    let mut rng = stream_rng(12, 0);
    let n = 16;
    let h = PhasorChannel::new(
        (0..n)
            .map(|_| Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>()))
            .collect(),
    )
    .unwrap();
    let p = received_power(&h, &retrodirective_weights(&h, 1.0).unwrap()).unwrap();
    // Single element with all the power: |h|^2 P = 1.
    assert!((p - n as f64).abs() < 1e-9);
}

fn dft_channel(n: usize, bin: usize) -> PhasorChannel {
    PhasorChannel::new(
        (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * (bin * i) as f64 / n as f64))
            .collect(),
    )
    .unwrap()
}

#[test]
fn shared_pilot_halves_gain() {
    let n = 16;
    let chans = [dft_channel(n, 0), dft_channel(n, 3)];
    let shared = contamination_split_channels(&chans, true, 1.0).unwrap();
    for p in &shared {
        assert!((p - n as f64 / 2.0).abs() < 1e-9, "{p}");
    }
    let separate = contamination_split_channels(&chans, false, 1.0).unwrap();
    assert!((separate[0] - n as f64).abs() < 1e-9);
    assert!(separate[1].abs() < 1e-9);
}

#[test]
fn geometric_contamination_reduces_intended_power() {
    let c = carrier();
    let layout = ArrayLayout::uniform_grid(
        8,
        8,
        c.wavelength() / 2.0,
        Point3::ORIGIN,
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(0.0, 0.0, 1.0),
        c,
    )
    .unwrap();
    let mobiles = [Point3::new(-3.0, 8.0, 0.0), Point3::new(4.0, 6.0, 0.0)];
    let clean = contamination_split(&layout, &mobiles, false, 10.0).unwrap();
    let dirty = contamination_split(&layout, &mobiles, true, 10.0).unwrap();
    assert!((clean.fractions()[0] - 1.0).abs() < 1e-9);
    assert!(dirty.received[0] < clean.received[0]);
    assert!(dirty.received[1] > clean.received[1]);
    assert!(dirty.fractions()[1] > 0.2);
}

/// Monte Carlo integral of the density over a far sphere.
fn sphere_power(layout: &ArrayLayout, w: &BeamWeights, radius: f64, samples: usize) -> f64 {
    let mut rng = stream_rng(21, 0);
    let mut acc = 0.0;
    for _ in 0..samples {
        let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
        let phi = 2.0 * PI * rng.random::<f64>();
        let s = (1.0 - z * z).sqrt();
        let p = Point3::new(radius * s * phi.cos(), radius * s * phi.sin(), radius * z);
        acc += field_at(layout, w, &p).unwrap().density;
    }
    acc / samples as f64 * 4.0 * PI * radius * radius
}

#[test]
fn contamination_conserves_radiated_power() {
    // Half-wavelength linear array: the element radiation is orthogonal, so
    // the power through a far sphere equals sum |w|^2.
    let c = carrier();
    let layout = ArrayLayout::uniform_linear(8, c.wavelength() / 2.0, Point3::ORIGIN, Point3::new(1.0, 0.0, 0.0), c).unwrap();
    let mobiles = [Point3::new(2.0, 9.0, 0.0), Point3::new(-5.0, 6.0, 1.0)];
    let chans: Vec<_> = mobiles.iter().map(|m| PhasorChannel::free_space(&layout, m).unwrap()).collect();
    let w = retrodirective_weights(&PhasorChannel::superpose(&chans).unwrap(), 10.0).unwrap();
    let total = sphere_power(&layout, &w, 500.0, 200_000);
    assert!((total / 10.0 - 1.0).abs() < 0.05, "{total}");
}

#[test]
fn coherent_to_incoherent_ratio_is_k() {
    let c = carrier();
    for k in [2usize, 4, 8] {
        let ring = beacon_ring(k, 5.0, Point3::ORIGIN, 4, c.wavelength() / 2.0, c).unwrap();
        let sync = coordinated_beacons(&ring, &Point3::ORIGIN, true, 2.0).unwrap();
        let unsync = coordinated_beacons(&ring, &Point3::ORIGIN, false, 2.0).unwrap();
        let ratio = sync.power_at_mobile() / unsync.power_at_mobile();
        assert!((ratio - k as f64).abs() < 1e-9, "K={k}: {ratio}");
        assert!((sync.density_at(&Point3::ORIGIN).unwrap() / sync.coherent_power() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn random_phase_average_matches_incoherent_power() {
    let c = carrier();
    let ring = beacon_ring(4, 5.0, Point3::ORIGIN, 4, c.wavelength() / 2.0, c).unwrap();
    let beam = coordinated_beacons(&ring, &Point3::ORIGIN, false, 1.0).unwrap();
    let mut rng = stream_rng(5, 0);
    let trials = 20_000;
    let mean = (0..trials)
        .map(|_| {
            let offsets: Vec<f64> = (0..4).map(|_| 2.0 * PI * rng.random::<f64>()).collect();
            beam.density_with_offsets(&Point3::ORIGIN, &offsets).unwrap()
        })
        .sum::<f64>()
        / trials as f64;
    assert!((mean / beam.incoherent_power() - 1.0).abs() < 0.03, "{mean}");
}

#[test]
fn coordinated_focus_is_sharp() {
    let c = carrier();
    let ring = beacon_ring(4, 5.0, Point3::ORIGIN, 8, c.wavelength() / 2.0, c).unwrap();
    let beam = coordinated_beacons(&ring, &Point3::ORIGIN, true, 10.0).unwrap();
    let on = beam.density_at(&Point3::ORIGIN).unwrap();
    let mut rng = stream_rng(7, 0);
    let mut off: Vec<f64> = (0..1000)
        .map(|_| {
            let r = 3.0 * rng.random::<f64>().sqrt();
            let t = 2.0 * PI * rng.random::<f64>();
            beam.density_at(&Point3::new(r * t.cos(), r * t.sin(), 0.0)).unwrap()
        })
        .collect();
    off.sort_by(f64::total_cmp);
    assert!(off[500] <= 0.1 * on, "median {} vs {on}", off[500]);

    let grid = PlaneGrid::new(Point3::ORIGIN, 3.0, 0.05).unwrap();
    let map = beam.density_map(&grid.points()).unwrap();
    let argmax = map.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert_eq!(argmax, grid.center_index());
}
