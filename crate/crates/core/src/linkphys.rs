//! Free-space power-transfer link physics.
//!
//! The beam efficiency between two facing circular apertures is modelled as
//! `1 - exp(-beta)` with `beta = A_t * A_r / (lambda * d)^2`. The expression
//! holds from the near field (beta large, efficiency close to one) out to the
//! far field, where it collapses onto the Friis equation (efficiency ~ beta).
//!
//! All quantities are SI. Conversions to and from dBm live at the bottom of
//! this module and are meant for interface boundaries only.

use std::f64::consts::PI;

use crate::error::{non_negative, positive, unit_fraction, Error, Result};

/// Speed of light used throughout the crate (m/s).
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Carrier frequency together with its free-space wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierSpec {
    frequency: f64,
    wavelength: f64,
}

impl CarrierSpec {
    pub fn from_frequency(frequency_hz: f64) -> Result<Self> {
        let frequency = positive("frequency", frequency_hz)?;
        Ok(Self {
            frequency,
            wavelength: SPEED_OF_LIGHT / frequency,
        })
    }

    pub fn from_wavelength(wavelength_m: f64) -> Result<Self> {
        let wavelength = positive("wavelength", wavelength_m)?;
        Ok(Self {
            frequency: SPEED_OF_LIGHT / wavelength,
            wavelength,
        })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Free-space wavenumber `2 pi / lambda`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

/// Effective area of a transmit or receive antenna (array).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aperture {
    area: f64,
    radius: Option<f64>,
}

impl Aperture {
    pub fn from_area(area_m2: f64) -> Result<Self> {
        Ok(Self {
            area: positive("aperture area", area_m2)?,
            radius: None,
        })
    }

    /// Circular disk of the given radius.
    pub fn from_radius(radius_m: f64) -> Result<Self> {
        let radius = positive("aperture radius", radius_m)?;
        Ok(Self {
            area: PI * radius * radius,
            radius: Some(radius),
        })
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Disk radius, if the aperture was built from one.
    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    /// Radius of the disk with the same area.
    pub fn equivalent_radius(&self) -> f64 {
        self.radius.unwrap_or_else(|| (self.area / PI).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub transmit_aperture: Aperture,
    pub receive_aperture: Aperture,
    distance: f64,
}

impl LinkGeometry {
    pub fn new(transmit: Aperture, receive: Aperture, distance_m: f64) -> Result<Self> {
        Ok(Self {
            transmit_aperture: transmit,
            receive_aperture: receive,
            distance: positive("distance", distance_m)?,
        })
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn with_distance(&self, distance_m: f64) -> Result<Self> {
        Self::new(self.transmit_aperture, self.receive_aperture, distance_m)
    }

    pub fn swapped(&self) -> Self {
        Self {
            transmit_aperture: self.receive_aperture,
            receive_aperture: self.transmit_aperture,
            distance: self.distance,
        }
    }
}

/// DC-to-RF conversion at the transmitter and RF-to-DC conversion at the
/// receiver. The beam efficiency sits between the two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyChain {
    dc_to_rf: f64,
    rf_to_dc: f64,
}

impl EfficiencyChain {
    pub fn new(dc_to_rf: f64, rf_to_dc: f64) -> Result<Self> {
        Ok(Self {
            dc_to_rf: unit_fraction("dc_to_rf", dc_to_rf)?,
            rf_to_dc: unit_fraction("rf_to_dc", rf_to_dc)?,
        })
    }

    pub fn dc_to_rf(&self) -> f64 {
        self.dc_to_rf
    }

    pub fn rf_to_dc(&self) -> f64 {
        self.rf_to_dc
    }
}

impl Default for EfficiencyChain {
    /// Typical state-of-the-art generator and rectenna efficiencies.
    fn default() -> Self {
        Self {
            dc_to_rf: 0.8,
            rf_to_dc: 0.8,
        }
    }
}

/// Aperture-product parameter `A_t * A_r / (lambda * d)^2`.
pub fn beta(geom: &LinkGeometry, carrier: &CarrierSpec) -> f64 {
    let ld = carrier.wavelength() * geom.distance();
    geom.transmit_aperture.area() * geom.receive_aperture.area() / (ld * ld)
}

fn check_beta(beta: f64) -> Result<f64> {
    if beta >= 0.0 {
        Ok(beta)
    } else {
        Err(Error::domain("beta", beta, "must be non-negative"))
    }
}

/// Fraction of radiated power captured by the receive aperture.
pub fn beam_efficiency(beta: f64) -> Result<f64> {
    let beta = check_beta(beta)?;
    Ok(-(-beta).exp_m1())
}

/// Far-field linearisation of [`beam_efficiency`], clamped at one.
pub fn friis_efficiency(beta: f64) -> Result<f64> {
    Ok(check_beta(beta)?.min(1.0))
}

/// DC-in to DC-out efficiency of the whole chain.
pub fn end_to_end_efficiency(beta: f64, chain: &EfficiencyChain) -> Result<f64> {
    Ok(chain.dc_to_rf() * beam_efficiency(beta)? * chain.rf_to_dc())
}

/// Inverse of [`beam_efficiency`]: the `beta` needed for a target efficiency
/// in `[0, 1)`.
pub fn beta_for_efficiency(efficiency: f64) -> Result<f64> {
    if (0.0..1.0).contains(&efficiency) {
        Ok(-(-efficiency).ln_1p())
    } else {
        Err(Error::domain("beam efficiency", efficiency, "must lie in [0, 1)"))
    }
}

/// Distance at which the link reaches the given `beta`.
pub fn distance_for_beta(
    transmit: &Aperture,
    receive: &Aperture,
    carrier: &CarrierSpec,
    beta: f64,
) -> Result<f64> {
    let beta = positive("beta", beta)?;
    Ok((transmit.area() * receive.area() / beta).sqrt() / carrier.wavelength())
}

/// Factor by which the transfer distance grows when the carrier moves from
/// `f_old` to `f_new` with apertures and `beta` held fixed. `beta` depends
/// on `lambda * d` only, so the distance scales with frequency.
pub fn distance_scaling_factor(f_old_hz: f64, f_new_hz: f64) -> Result<f64> {
    let f_old = positive("f_old", f_old_hz)?;
    let f_new = positive("f_new", f_new_hz)?;
    Ok(f_new / f_old)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Area-density helper shared by the safety and scavenging code.
pub(crate) fn area_power(density_w_per_m2: f64, area_m2: f64) -> Result<f64> {
    Ok(non_negative("power density", density_w_per_m2)? * non_negative("area", area_m2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom(at: f64, ar: f64, d: f64) -> LinkGeometry {
        LinkGeometry::new(
            Aperture::from_area(at).unwrap(),
            Aperture::from_area(ar).unwrap(),
            d,
        )
        .unwrap()
    }

    #[test]
    fn carrier_wavelength() {
        let c = CarrierSpec::from_frequency(2.5e9).unwrap();
        assert!((c.wavelength() * c.frequency() / SPEED_OF_LIGHT - 1.0).abs() < 1e-12);
        assert!((c.wavelength() - 0.11992).abs() < 1e-12);
        assert!(CarrierSpec::from_frequency(0.0).is_err());
        assert!(CarrierSpec::from_frequency(-1.0).is_err());
        assert!(CarrierSpec::from_frequency(f64::NAN).is_err());
    }

    #[test]
    fn disk_aperture_area() {
        let a = Aperture::from_radius(3.0).unwrap();
        assert!((a.area() / (PI * 9.0) - 1.0).abs() < 1e-12);
        assert_eq!(a.radius(), Some(3.0));
        assert!(Aperture::from_area(0.0).is_err());
        assert!(Aperture::from_radius(-0.1).is_err());
    }

    #[test]
    fn beta_unit_apertures() {
        let c = CarrierSpec::from_wavelength(0.125).unwrap();
        let b = beta(&geom(1.0, 1.0, 10.0), &c);
        assert!((b - 0.64).abs() < 1e-12);
    }

    #[test]
    fn beta_inverse_square() {
        let c = CarrierSpec::from_wavelength(0.125).unwrap();
        let g = geom(2.0, 0.3, 7.0);
        let b1 = beta(&g, &c);
        let b2 = beta(&g.with_distance(14.0).unwrap(), &c);
        assert!((b1 / b2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn beta_smartphone_operating_point() {
        let c = CarrierSpec::from_wavelength(0.12).unwrap();
        let g = LinkGeometry::new(
            Aperture::from_radius(3.0).unwrap(),
            Aperture::from_radius(0.03).unwrap(),
            19.64,
        )
        .unwrap();
        assert!((beta(&g, &c) - 0.014389).abs() < 5e-6);
    }

    #[test]
    fn geometry_rejects_non_positive_distance() {
        let a = Aperture::from_area(1.0).unwrap();
        assert!(LinkGeometry::new(a, a, 0.0).is_err());
        assert!(LinkGeometry::new(a, a, -3.0).is_err());
    }

    #[test]
    fn beam_efficiency_values() {
        assert_eq!(beam_efficiency(0.0).unwrap(), 0.0);
        assert!((beam_efficiency(0.64).unwrap() - 0.4727).abs() < 1e-4);
        let small = beam_efficiency(0.01).unwrap();
        assert!((small - 0.00995).abs() < 1e-5);
        assert!((small - 0.01).abs() / 0.01 < 0.005);
        assert!(beam_efficiency(-1e-9).is_err());
    }

    #[test]
    fn friis_values() {
        assert_eq!(friis_efficiency(0.01).unwrap(), 0.01);
        assert_eq!(friis_efficiency(5.0).unwrap(), 1.0);
        let gap = (friis_efficiency(0.05).unwrap() - beam_efficiency(0.05).unwrap())
            / friis_efficiency(0.05).unwrap();
        assert!((beam_efficiency(0.05).unwrap() - 0.04877).abs() < 1e-5);
        assert!(gap < 0.025 && gap > 0.024);
        assert!(friis_efficiency(-0.1).is_err());
    }

    #[test]
    fn end_to_end_examples() {
        let identity = EfficiencyChain::new(1.0, 1.0).unwrap();
        assert!((end_to_end_efficiency(0.64, &identity).unwrap() - 0.4727).abs() < 1e-4);
        let typical = EfficiencyChain::default();
        assert!((end_to_end_efficiency(1e3, &typical).unwrap() - 0.64).abs() < 1e-12);
        let fig4 = EfficiencyChain::new(1.0, 0.7).unwrap();
        assert!((end_to_end_efficiency(0.014389, &fig4).unwrap() - 0.0100).abs() < 5e-5);
        assert!(EfficiencyChain::new(0.0, 0.5).is_err());
        assert!(EfficiencyChain::new(0.5, 1.2).is_err());
    }

    #[test]
    fn scaling_factor() {
        assert_eq!(distance_scaling_factor(2.4e9, 60e9).unwrap(), 25.0);
        assert_eq!(distance_scaling_factor(3e9, 3e9).unwrap(), 1.0);
        assert_eq!(distance_scaling_factor(2.4e9, 4.8e9).unwrap(), 2.0);
        assert!(distance_scaling_factor(0.0, 1.0).is_err());
        assert!(distance_scaling_factor(1.0, -1.0).is_err());
    }

    #[test]
    fn dbm_round_trip() {
        assert!((dbm_to_watts(-10.0) - 1e-4).abs() < 1e-18);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((watts_to_dbm(1e-15) + 120.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn efficiency_monotone_and_bounded(a in 0.0f64..30.0, b in 0.0f64..30.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (elo, ehi) = (beam_efficiency(lo).unwrap(), beam_efficiency(hi).unwrap());
            prop_assert!(elo <= ehi);
            // strictness is only resolvable in f64 away from saturation
            if hi < 20.0 && hi - lo > 1e-6 { prop_assert!(elo < ehi); }
            prop_assert!((0.0..1.0).contains(&ehi));
        }

        #[test]
        fn friis_agreement_far_field(b in 1e-9f64..=0.05) {
            let e = beam_efficiency(b).unwrap();
            prop_assert!((e - b).abs() / b <= 0.025);
        }

        #[test]
        fn beta_reciprocal(at in 1e-4f64..50.0, ar in 1e-4f64..50.0, d in 0.1f64..1e3, f in 1e8f64..1e11) {
            let c = CarrierSpec::from_frequency(f).unwrap();
            let g = geom(at, ar, d);
            prop_assert_eq!(beta(&g, &c), beta(&g.swapped(), &c));
        }

        #[test]
        fn distance_round_trip(at in 1e-3f64..50.0, ar in 1e-5f64..1.0, target in 1e-6f64..20.0, f in 1e8f64..1e11) {
            let c = CarrierSpec::from_frequency(f).unwrap();
            let (ta, ra) = (Aperture::from_area(at).unwrap(), Aperture::from_area(ar).unwrap());
            let d = distance_for_beta(&ta, &ra, &c, target).unwrap();
            let b = beta(&LinkGeometry::new(ta, ra, d).unwrap(), &c);
            prop_assert!((b / target - 1.0).abs() < 1e-9);
        }

        #[test]
        fn scaling_composes(f1 in 1e6f64..1e12, f2 in 1e6f64..1e12, f3 in 1e6f64..1e12) {
            let two_hop = distance_scaling_factor(f1, f2).unwrap() * distance_scaling_factor(f2, f3).unwrap();
            prop_assert!((two_hop / distance_scaling_factor(f1, f3).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn efficiency_inverse(e in 0.0f64..0.999) {
            let b = beta_for_efficiency(e).unwrap();
            prop_assert!((beam_efficiency(b).unwrap() - e).abs() < 1e-12);
        }
    }
}
