//! RF exposure: power-density profiles, unsafe beam-interception distance
//! (UBID) and duty-cycle limits under a time-averaged exposure cap.

use std::f64::consts::PI;

use crate::error::{positive, Error, Result};
use crate::linkphys::{Aperture, CarrierSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposureLimit {
    max_avg_density: f64,
    averaging_window: f64,
}

impl ExposureLimit {
    pub fn new(max_avg_density_w_per_m2: f64, averaging_window_s: f64) -> Result<Self> {
        Ok(Self {
            max_avg_density: positive("exposure limit", max_avg_density_w_per_m2)?,
            averaging_window: positive("averaging window", averaging_window_s)?,
        })
    }

    pub fn max_avg_density(&self) -> f64 {
        self.max_avg_density
    }

    pub fn averaging_window(&self) -> f64 {
        self.averaging_window
    }
}

impl Default for ExposureLimit {
    /// 10 W/m^2 averaged over half an hour.
    fn default() -> Self {
        Self {
            max_avg_density: 10.0,
            averaging_window: 1800.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmissionKind {
    Omnidirectional,
    Beamed,
}

impl EmissionKind {
    pub fn label(&self) -> &'static str {
        match self {
            EmissionKind::Omnidirectional => "omnidirectional",
            EmissionKind::Beamed => "beamed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Emission {
    Omnidirectional,
    Beamed {
        aperture: Aperture,
        carrier: CarrierSpec,
    },
}

impl Emission {
    /// Assembles an emission from loosely-typed parts; beamed emissions need
    /// both an aperture and a carrier.
    pub fn from_parts(
        kind: EmissionKind,
        aperture: Option<Aperture>,
        carrier: Option<CarrierSpec>,
    ) -> Result<Self> {
        match (kind, aperture, carrier) {
            (EmissionKind::Omnidirectional, _, _) => Ok(Emission::Omnidirectional),
            (EmissionKind::Beamed, Some(aperture), Some(carrier)) => {
                Ok(Emission::Beamed { aperture, carrier })
            }
            (EmissionKind::Beamed, a, c) => Err(Error::Argument(format!(
                "beamed emission needs{}{}",
                if a.is_none() { " an aperture" } else { "" },
                if c.is_none() { " a carrier" } else { "" }
            ))),
        }
    }

    pub fn kind(&self) -> EmissionKind {
        match self {
            Emission::Omnidirectional => EmissionKind::Omnidirectional,
            Emission::Beamed { .. } => EmissionKind::Beamed,
        }
    }

    /// Peak power density at distance `d` for radiated power `p`.
    pub fn density(&self, p: f64, d: f64) -> Result<f64> {
        match self {
            Emission::Omnidirectional => omni_density(p, d),
            Emission::Beamed { aperture, carrier } => beam_peak_density(p, aperture, carrier, d),
        }
    }
}

/// Isotropic density `P / (4 pi d^2)`.
pub fn omni_density(p: f64, d: f64) -> Result<f64> {
    let p = positive("radiated power", p)?;
    let d = positive("distance", d)?;
    Ok(p / (4.0 * PI * d * d))
}

/// On-axis beam density `P * A_t / (lambda d)^2`.
///
/// This is the vanishing-receiver limit of `P * (1 - exp(-beta)) / A_r`, and
/// bounds that quantity from above for every finite receive aperture.
pub fn beam_peak_density(p: f64, aperture: &Aperture, carrier: &CarrierSpec, d: f64) -> Result<f64> {
    let p = positive("radiated power", p)?;
    let d = positive("distance", d)?;
    let ld = carrier.wavelength() * d;
    Ok(p * aperture.area() / (ld * ld))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyReport {
    pub ubid: f64,
    pub emission: Emission,
    pub radiated_power: f64,
    pub limit: ExposureLimit,
}

impl SafetyReport {
    pub fn mode(&self) -> EmissionKind {
        self.emission.kind()
    }

    pub fn aperture(&self) -> Option<Aperture> {
        match self.emission {
            Emission::Beamed { aperture, .. } => Some(aperture),
            Emission::Omnidirectional => None,
        }
    }
}

/// Distance inside which the density exceeds the exposure limit.
pub fn ubid(p: f64, emission: Emission, limit: &ExposureLimit) -> Result<SafetyReport> {
    let p = positive("radiated power", p)?;
    let s = limit.max_avg_density();
    let ubid = match emission {
        Emission::Omnidirectional => (p / (4.0 * PI * s)).sqrt(),
        Emission::Beamed { aperture, carrier } => (p * aperture.area() / s).sqrt() / carrier.wavelength(),
    };
    Ok(SafetyReport {
        ubid,
        emission,
        radiated_power: p,
        limit: *limit,
    })
}

/// Largest on-fraction over the averaging window that keeps the average
/// density at `d` within the limit.
pub fn max_duty_cycle(p: f64, emission: Emission, d: f64, limit: &ExposureLimit) -> Result<f64> {
    let density = emission.density(p, d)?;
    Ok((limit.max_avg_density() / density).min(1.0))
}
