//! Mobile device profiles, power-transfer ranges, SWIPT budgets and ambient
//! RF scavenging.

use crate::error::{non_negative, positive, unit_fraction, Error, Result};
use crate::linkphys::{
    area_power, beam_efficiency, beta, beta_for_efficiency, dbm_to_watts, distance_for_beta,
    linear_to_db, Aperture, CarrierSpec, LinkGeometry,
};

/// Typical energy-harvester sensitivity, -10 dBm.
pub const DEFAULT_SENSITIVITY_W: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceProfile {
    pub name: String,
    consumption: f64,
    antenna_radius: f64,
    sensitivity: f64,
    rf_to_dc: f64,
    /// Published consumption span for the device class, kept as metadata.
    pub consumption_span: Option<(f64, f64)>,
}

impl DeviceProfile {
    pub fn new(
        name: impl Into<String>,
        consumption_w: f64,
        antenna_radius_m: f64,
        rf_to_dc: f64,
    ) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            consumption: positive("consumption", consumption_w)?,
            antenna_radius: positive("antenna radius", antenna_radius_m)?,
            sensitivity: DEFAULT_SENSITIVITY_W,
            rf_to_dc: unit_fraction("rf_to_dc", rf_to_dc)?,
            consumption_span: None,
        })
    }

    pub fn with_sensitivity(mut self, sensitivity_w: f64) -> Result<Self> {
        self.sensitivity = positive("sensitivity", sensitivity_w)?;
        Ok(self)
    }

    pub fn with_sensitivity_dbm(self, dbm: f64) -> Result<Self> {
        self.with_sensitivity(dbm_to_watts(dbm))
    }

    /// Adds a fixed power draw on top of the circuit consumption, e.g. for
    /// uplink transmission.
    pub fn with_extra_consumption(mut self, extra_w: f64) -> Result<Self> {
        self.consumption += non_negative("extra consumption", extra_w)?;
        Ok(self)
    }

    fn with_span(mut self, lo: f64, hi: f64) -> Self {
        self.consumption_span = Some((lo, hi));
        self
    }

    pub fn consumption(&self) -> f64 {
        self.consumption
    }

    pub fn antenna_radius(&self) -> f64 {
        self.antenna_radius
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn rf_to_dc(&self) -> f64 {
        self.rf_to_dc
    }

    pub fn aperture(&self) -> Aperture {
        // radius already validated
        Aperture::from_radius(self.antenna_radius).expect("validated radius")
    }
}

/// The four device classes used for the reference range computation.
pub fn builtin_catalog() -> Vec<DeviceProfile> {
    let entry = |name: &str, p, r, span: (f64, f64)| {
        DeviceProfile::new(name, p, r, 0.7)
            .expect("catalog values are valid")
            .with_span(span.0, span.1)
    };
    vec![
        entry("zigbee", 0.05, 0.01, (1e-3, 0.1)),
        entry("smartphone", 0.5, 0.03, (19e-3, 1.3)),
        entry("tablet", 5.0, 0.09, (1.0, 11.0)),
        entry("laptop", 25.0, 0.11, (19.0, 52.0)),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmitterSpec {
    radiated_power: f64,
    pub aperture: Aperture,
    pub carrier: CarrierSpec,
    dc_to_rf: f64,
}

impl TransmitterSpec {
    pub fn new(
        radiated_power_w: f64,
        aperture: Aperture,
        carrier: CarrierSpec,
        dc_to_rf: f64,
    ) -> Result<Self> {
        Ok(Self {
            radiated_power: positive("radiated power", radiated_power_w)?,
            aperture,
            carrier,
            dc_to_rf: unit_fraction("dc_to_rf", dc_to_rf)?,
        })
    }

    /// Power beacon with a 3 m radius disk aperture at 2.5 GHz.
    pub fn reference_beacon(radiated_power_w: f64) -> Result<Self> {
        Self::new(
            radiated_power_w,
            Aperture::from_radius(3.0)?,
            CarrierSpec::from_frequency(2.5e9)?,
            0.8,
        )
    }

    pub fn with_radiated_power(&self, radiated_power_w: f64) -> Result<Self> {
        Self::new(radiated_power_w, self.aperture, self.carrier, self.dc_to_rf)
    }

    pub fn radiated_power(&self) -> f64 {
        self.radiated_power
    }

    pub fn dc_to_rf(&self) -> f64 {
        self.dc_to_rf
    }

    /// DC power drawn by the transmitter.
    pub fn dc_input_power(&self) -> f64 {
        self.radiated_power / self.dc_to_rf
    }

    fn geometry(&self, dev: &DeviceProfile, d: f64) -> Result<LinkGeometry> {
        LinkGeometry::new(self.aperture, dev.aperture(), d)
    }

    /// Beam efficiency toward `dev` at distance `d`.
    pub fn beam_efficiency_to(&self, dev: &DeviceProfile, d: f64) -> Result<f64> {
        beam_efficiency(beta(&self.geometry(dev, d)?, &self.carrier))
    }

    /// RF power captured by the device antenna.
    pub fn received_rf(&self, dev: &DeviceProfile, d: f64) -> Result<f64> {
        Ok(self.radiated_power * self.beam_efficiency_to(dev, d)?)
    }

    /// DC power available to the device after rectification.
    pub fn harvested(&self, dev: &DeviceProfile, d: f64) -> Result<f64> {
        Ok(dev.rf_to_dc() * self.received_rf(dev, d)?)
    }

    /// Whether the device runs at distance `d`: harvested DC covers the
    /// consumption and the RF input clears the harvester sensitivity.
    pub fn powers(&self, dev: &DeviceProfile, d: f64) -> Result<bool> {
        let rf = self.received_rf(dev, d)?;
        Ok(dev.rf_to_dc() * rf >= dev.consumption() && rf >= dev.sensitivity())
    }
}

/// Which requirement limits a power-transfer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeLimit {
    Consumption,
    Sensitivity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PtRange {
    Feasible { distance: f64, limit: RangeLimit },
    /// The device cannot be powered at any distance; `required_efficiency`
    /// is the beam efficiency it would need (>= 1).
    Infeasible { required_efficiency: f64 },
}

impl PtRange {
    pub fn distance(&self) -> Option<f64> {
        match *self {
            PtRange::Feasible { distance, .. } => Some(distance),
            PtRange::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, PtRange::Feasible { .. })
    }
}

/// Largest distance at which `tx` keeps `dev` powered, by closed-form
/// inversion of the beam-efficiency model.
pub fn pt_range(tx: &TransmitterSpec, dev: &DeviceProfile) -> PtRange {
    let for_consumption = dev.consumption() / (dev.rf_to_dc() * tx.radiated_power());
    let for_sensitivity = dev.sensitivity() / tx.radiated_power();
    let (required, limit) = if for_consumption >= for_sensitivity {
        (for_consumption, RangeLimit::Consumption)
    } else {
        (for_sensitivity, RangeLimit::Sensitivity)
    };
    if required >= 1.0 {
        return PtRange::Infeasible {
            required_efficiency: required,
        };
    }
    // required in (0, 1), so both inversions are in-domain
    let b = beta_for_efficiency(required).expect("efficiency in [0, 1)");
    let distance = distance_for_beta(&tx.aperture, &dev.aperture(), &tx.carrier, b)
        .expect("positive beta");
    PtRange::Feasible { distance, limit }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwiptTopology {
    Integrated,
    ClosedLoop,
    Decoupled,
}

impl SwiptTopology {
    pub fn label(&self) -> &'static str {
        match self {
            SwiptTopology::Integrated => "integrated",
            SwiptTopology::ClosedLoop => "closed_loop",
            SwiptTopology::Decoupled => "decoupled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwiptBudget {
    pub topology: SwiptTopology,
    /// DC power available to the device (W).
    pub harvested_power: f64,
    /// Signal power at the information receiver (W).
    pub it_received_power: f64,
    pub snr_db: Option<f64>,
    pub feasible: bool,
}

fn snr_ok(snr_db: f64, threshold_db: Option<f64>) -> bool {
    threshold_db.is_none_or(|t| snr_db >= t)
}

/// Power and information ride on the same downlink signal, so both legs
/// share one distance.
pub fn integrated_swipt(
    tx: &TransmitterSpec,
    dev: &DeviceProfile,
    d: f64,
    noise_power: f64,
    snr_threshold_db: Option<f64>,
) -> Result<SwiptBudget> {
    let noise = positive("noise power", noise_power)?;
    let rf = tx.received_rf(dev, d)?;
    let snr_db = linear_to_db(rf / noise);
    Ok(SwiptBudget {
        topology: SwiptTopology::Integrated,
        harvested_power: dev.rf_to_dc() * rf,
        it_received_power: rf,
        snr_db: Some(snr_db),
        feasible: tx.powers(dev, d)? && snr_ok(snr_db, snr_threshold_db),
    })
}

/// Downlink power transfer, uplink information transfer funded by a
/// fraction of the harvested power. The uplink crosses the same free-space
/// link, so the base station sees the downlink beam efficiency twice.
///
/// The uplink transmit power is drawn from the harvested budget: the device
/// is powered only when what remains still covers its consumption.
pub fn closed_loop_swipt(
    tx: &TransmitterSpec,
    dev: &DeviceProfile,
    d: f64,
    uplink_fraction: f64,
    noise_power: f64,
    snr_threshold_db: Option<f64>,
) -> Result<SwiptBudget> {
    let fraction = unit_fraction("uplink fraction", uplink_fraction)?;
    let noise = positive("noise power", noise_power)?;
    let eta = tx.beam_efficiency_to(dev, d)?;
    let rf = tx.radiated_power() * eta;
    let harvested = dev.rf_to_dc() * rf;
    let uplink_tx = fraction * harvested;
    let bs_received = uplink_tx * eta;
    let snr_db = linear_to_db(bs_received / noise);
    let powered = harvested - uplink_tx >= dev.consumption() && rf >= dev.sensitivity();
    Ok(SwiptBudget {
        topology: SwiptTopology::ClosedLoop,
        harvested_power: harvested,
        it_received_power: bs_received,
        snr_db: Some(snr_db),
        feasible: powered && snr_ok(snr_db, snr_threshold_db),
    })
}

/// Power from a dedicated beacon, information from a base station on an
/// orthogonal band; the two distances are independent.
pub fn decoupled_swipt(
    beacon: &TransmitterSpec,
    base_station: &TransmitterSpec,
    dev: &DeviceProfile,
    beacon_distance: f64,
    bs_distance: f64,
    noise_power: f64,
    snr_threshold_db: Option<f64>,
) -> Result<SwiptBudget> {
    let noise = positive("noise power", noise_power)?;
    let it_rf = base_station.received_rf(dev, bs_distance)?;
    let snr_db = linear_to_db(it_rf / noise);
    Ok(SwiptBudget {
        topology: SwiptTopology::Decoupled,
        harvested_power: beacon.harvested(dev, beacon_distance)?,
        it_received_power: it_rf,
        snr_db: Some(snr_db),
        feasible: beacon.powers(dev, beacon_distance)? && snr_ok(snr_db, snr_threshold_db),
    })
}

/// Measured ambient RF power density band for one spectrum and environment.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientSource {
    pub spectrum_label: String,
    pub environment_label: String,
    density_low: f64,
    density_high: f64,
}

impl AmbientSource {
    pub fn new(
        spectrum: impl Into<String>,
        environment: impl Into<String>,
        density_low_w_per_m2: f64,
        density_high_w_per_m2: f64,
    ) -> Result<Self> {
        let low = positive("density_low", density_low_w_per_m2)?;
        let high = positive("density_high", density_high_w_per_m2)?;
        if low > high {
            return Err(Error::Argument(format!(
                "ambient density band inverted: low {low} > high {high}"
            )));
        }
        Ok(Self {
            spectrum_label: spectrum.into(),
            environment_label: environment.into(),
            density_low: low,
            density_high: high,
        })
    }

    /// Lower band edge (W/m^2).
    pub fn density_low(&self) -> f64 {
        self.density_low
    }

    /// Upper band edge (W/m^2).
    pub fn density_high(&self) -> f64 {
        self.density_high
    }
}

/// Published ambient GSM and WiFi power densities (W/m^2).
pub fn builtin_ambient_table() -> Vec<AmbientSource> {
    const GSM900: &str = "GSM (935 - 960 MHz)";
    const GSM1800: &str = "GSM (1805 - 1880 MHz)";
    const WIFI: &str = "WiFi";
    [
        (GSM900, "inner city, outdoor, on ground", 1e-6, 1e-4),
        (GSM900, "inner city, indoor, close to window", 1e-5, 1e-4),
        (GSM1800, "50 meters from base stations", 5e-6, 5e-3),
        (GSM1800, "200 meters from base stations", 1e-6, 5e-4),
        (GSM1800, "500 meters from base stations", 5e-7, 5e-5),
        (WIFI, "within 8 meters from access points", 1e-6, 5e-5),
        (WIFI, "12 meters from access points", 1e-7, 5e-7),
    ]
    .into_iter()
    .map(|(s, e, lo, hi)| AmbientSource::new(s, e, lo, hi).expect("table values are valid"))
    .collect()
}

/// Incident RF power band `(low, high)` for a device of the given area.
pub fn scavenged_power(source: &AmbientSource, device_area_m2: f64) -> Result<(f64, f64)> {
    Ok((
        area_power(source.density_low, device_area_m2)?,
        area_power(source.density_high, device_area_m2)?,
    ))
}
