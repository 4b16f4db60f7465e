//! Scenario file ingestion.
//!
//! A scenario is a TOML document with optional sections `carrier`,
//! `transmitter`, `devices`, `ambient`, `safety`, `beam` and `network`.
//! Absent sections fall back to the built-in reference setup. Keys carry
//! their unit as a suffix; `_dbm` keys are converted to watts on load.

use std::fmt::Display;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use mpt_core::beamsim::Point3;
use mpt_core::devices::{builtin_ambient_table, builtin_catalog, AmbientSource, DeviceProfile, TransmitterSpec};
use mpt_core::linkphys::{dbm_to_watts, Aperture, CarrierSpec};
use mpt_core::netcov::NetworkScenario;
use mpt_core::safety::{Emission, EmissionKind, ExposureLimit};
use serde::Deserialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    carrier: Option<RawCarrier>,
    transmitter: Option<RawTransmitter>,
    devices: Option<Vec<RawDevice>>,
    ambient: Option<Vec<RawAmbient>>,
    safety: Option<RawSafety>,
    beam: Option<RawBeam>,
    network: Option<RawNetwork>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCarrier {
    frequency_hz: Option<f64>,
    wavelength_m: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransmitter {
    radiated_power_w: Option<f64>,
    radiated_power_dbm: Option<f64>,
    aperture_radius_m: Option<f64>,
    aperture_area_m2: Option<f64>,
    dc_to_rf: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    name: String,
    consumption_w: f64,
    antenna_radius_m: f64,
    rf_to_dc: f64,
    sensitivity_dbm: Option<f64>,
    sensitivity_w: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAmbient {
    spectrum: String,
    environment: String,
    density_low_w_per_m2: f64,
    density_high_w_per_m2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSafety {
    exposure_limit_w_per_m2: Option<f64>,
    averaging_window_s: Option<f64>,
    distances_m: Option<Vec<f64>>,
    rows: Option<Vec<RawSafetyRow>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawMode {
    Omnidirectional,
    Beamed,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSafetyRow {
    mode: RawMode,
    radiated_power_w: Option<f64>,
    radiated_power_dbm: Option<f64>,
    aperture_area_m2: Option<f64>,
    aperture_radius_m: Option<f64>,
    frequency_hz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeam {
    beacons: Option<usize>,
    ring_radius_m: Option<f64>,
    elements_per_side: Option<usize>,
    element_spacing_m: Option<f64>,
    per_beacon_power_w: Option<f64>,
    synchronized: Option<bool>,
    target_m: Option<[f64; 3]>,
    grid_half_width_m: Option<f64>,
    grid_step_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    device: Option<String>,
    pb_density: Option<f64>,
    bs_density: Option<f64>,
    region_side_m: Option<f64>,
    snr_threshold_db: Option<f64>,
    pathloss_exponent: Option<f64>,
    reference_distance_m: Option<f64>,
    noise_dbm: Option<f64>,
    bs_power_dbm: Option<f64>,
    seed: Option<u64>,
    replications: Option<usize>,
    samples_per_replication: Option<usize>,
    multi_pb: Option<bool>,
    bs_swipt: Option<bool>,
    uplink_extra_power_w: Option<f64>,
    frontier: Option<RawFrontier>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrontier {
    target_coverage: Option<f64>,
    bs_densities: Option<Vec<f64>>,
    pb_densities: Option<Vec<f64>>,
}

/// One transmitter checked against the exposure limit.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyRow {
    pub radiated_power: f64,
    pub emission: Emission,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SafetyConfig {
    pub limit: ExposureLimit,
    pub rows: Vec<SafetyRow>,
    pub distances: Vec<f64>,
}

/// Coordinated beacons on a ring around the target, and the map grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamConfig {
    pub beacons: usize,
    pub ring_radius: f64,
    pub elements_per_side: usize,
    pub element_spacing: f64,
    pub per_beacon_power: f64,
    pub synchronized: bool,
    pub target: Point3,
    pub grid_half_width: f64,
    pub grid_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierConfig {
    pub target_coverage: f64,
    pub bs_densities: Vec<f64>,
    pub pb_densities: Vec<f64>,
}

/// A fully resolved scenario; every field is validated and in SI units.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// File path, or `builtin`.
    pub source: String,
    /// Hex SHA-256 of the file bytes, or `builtin`.
    pub hash: String,
    pub carrier: CarrierSpec,
    pub transmitter: TransmitterSpec,
    pub devices: Vec<DeviceProfile>,
    pub ambient: Vec<AmbientSource>,
    pub safety: SafetyConfig,
    pub beam: BeamConfig,
    pub network: NetworkScenario,
    pub frontier: FrontierConfig,
}

impl Scenario {
    /// The built-in reference setup.
    pub fn builtin() -> Self {
        Self::resolve(RawScenario::default(), "builtin".into(), "builtin".into())
            .expect("built-in scenario is valid")
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("{}: cannot read scenario", path.display()))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| anyhow!("{}: not UTF-8: {e}", path.display()))?;
        let hash = hex::encode(Sha256::digest(&bytes));
        Self::parse(text, &path.display().to_string(), hash)
    }

    /// Parses scenario text; `source` names the origin in diagnostics.
    pub fn parse(text: &str, source: &str, hash: String) -> anyhow::Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| anyhow!("{source}: {e}"))?;
        Self::resolve(raw, source.to_string(), hash).map_err(|e| anyhow!("{source}: {e:#}"))
    }

    pub fn device(&self, name: &str) -> anyhow::Result<&DeviceProfile> {
        self.devices.iter().find(|d| d.name == name).ok_or_else(|| {
            let known: Vec<_> = self.devices.iter().map(|d| d.name.as_str()).collect();
            anyhow!("unknown device `{name}`, expected one of {known:?}")
        })
    }

    fn resolve(raw: RawScenario, source: String, hash: String) -> anyhow::Result<Self> {
        let carrier = resolve_carrier(raw.carrier.as_ref())?;
        let transmitter = resolve_transmitter(raw.transmitter.as_ref(), carrier)?;
        let devices = match raw.devices {
            Some(list) => resolve_devices(list)?,
            None => builtin_catalog(),
        };
        let ambient = match raw.ambient {
            Some(list) => list
                .into_iter()
                .enumerate()
                .map(|(i, a)| {
                    at(
                        &format!("ambient[{i}]"),
                        AmbientSource::new(a.spectrum, a.environment, a.density_low_w_per_m2, a.density_high_w_per_m2),
                    )
                })
                .collect::<anyhow::Result<_>>()?,
            None => builtin_ambient_table(),
        };
        let safety = resolve_safety(raw.safety, carrier)?;
        let beam = resolve_beam(raw.beam.as_ref(), carrier)?;
        let (network, frontier) = resolve_network(raw.network, &transmitter, &devices)?;
        Ok(Self {
            source,
            hash,
            carrier,
            transmitter,
            devices,
            ambient,
            safety,
            beam,
            network,
            frontier,
        })
    }
}

fn at<T, E: Display>(path: &str, r: Result<T, E>) -> anyhow::Result<T> {
    r.map_err(|e| anyhow!("{path}: {e}"))
}

fn watts_from(path: &str, w: Option<f64>, dbm: Option<f64>) -> anyhow::Result<Option<f64>> {
    match (w, dbm) {
        (Some(_), Some(_)) => bail!("{path}: give either `{path}_w` or `{path}_dbm`, not both"),
        (Some(w), None) => Ok(Some(w)),
        (None, Some(dbm)) => Ok(Some(dbm_to_watts(dbm))),
        (None, None) => Ok(None),
    }
}

fn aperture_from(path: &str, radius: Option<f64>, area: Option<f64>) -> anyhow::Result<Option<Aperture>> {
    match (radius, area) {
        (Some(_), Some(_)) => bail!("{path}: give either `aperture_radius_m` or `aperture_area_m2`, not both"),
        (Some(r), None) => at(&format!("{path}.aperture_radius_m"), Aperture::from_radius(r)).map(Some),
        (None, Some(a)) => at(&format!("{path}.aperture_area_m2"), Aperture::from_area(a)).map(Some),
        (None, None) => Ok(None),
    }
}

fn resolve_carrier(raw: Option<&RawCarrier>) -> anyhow::Result<CarrierSpec> {
    match raw.map(|c| (c.frequency_hz, c.wavelength_m)) {
        None | Some((None, None)) => Ok(CarrierSpec::from_frequency(2.5e9)?),
        Some((Some(f), None)) => at("carrier.frequency_hz", CarrierSpec::from_frequency(f)),
        Some((None, Some(l))) => at("carrier.wavelength_m", CarrierSpec::from_wavelength(l)),
        Some((Some(_), Some(_))) => bail!("carrier: give either `frequency_hz` or `wavelength_m`, not both"),
    }
}

fn resolve_transmitter(raw: Option<&RawTransmitter>, carrier: CarrierSpec) -> anyhow::Result<TransmitterSpec> {
    let reference = TransmitterSpec::reference_beacon(50.0)?;
    let Some(t) = raw else {
        return Ok(TransmitterSpec::new(reference.radiated_power(), reference.aperture, carrier, reference.dc_to_rf())?);
    };
    let power = watts_from("transmitter.radiated_power", t.radiated_power_w, t.radiated_power_dbm)?
        .unwrap_or(reference.radiated_power());
    let aperture = aperture_from("transmitter", t.aperture_radius_m, t.aperture_area_m2)?.unwrap_or(reference.aperture);
    let dc_to_rf = t.dc_to_rf.unwrap_or(reference.dc_to_rf());
    at("transmitter", TransmitterSpec::new(power, aperture, carrier, dc_to_rf))
}

fn resolve_devices(list: Vec<RawDevice>) -> anyhow::Result<Vec<DeviceProfile>> {
    if list.is_empty() {
        bail!("devices: list is empty");
    }
    let mut out: Vec<DeviceProfile> = Vec::with_capacity(list.len());
    for (i, d) in list.into_iter().enumerate() {
        let path = format!("devices[{i}]");
        if out.iter().any(|o| o.name == d.name) {
            bail!("{path}.name: duplicate device `{}`", d.name);
        }
        let mut dev = at(&path, DeviceProfile::new(d.name, d.consumption_w, d.antenna_radius_m, d.rf_to_dc))?;
        if let Some(s) = watts_from(&format!("{path}.sensitivity"), d.sensitivity_w, d.sensitivity_dbm)? {
            dev = at(&format!("{path}.sensitivity"), dev.with_sensitivity(s))?;
        }
        out.push(dev);
    }
    Ok(out)
}

fn default_safety_rows(carrier: CarrierSpec) -> Vec<SafetyRow> {
    let beamed = Emission::Beamed {
        aperture: Aperture::from_area(3.0).expect("positive area"),
        carrier,
    };
    vec![
        SafetyRow { radiated_power: 50.0, emission: Emission::Omnidirectional },
        SafetyRow { radiated_power: 10.0, emission: beamed },
        SafetyRow { radiated_power: 50.0, emission: beamed },
    ]
}

fn resolve_safety(raw: Option<RawSafety>, carrier: CarrierSpec) -> anyhow::Result<SafetyConfig> {
    let default_limit = ExposureLimit::default();
    let Some(s) = raw else {
        return Ok(SafetyConfig { limit: default_limit, rows: default_safety_rows(carrier), distances: Vec::new() });
    };
    let limit = at(
        "safety",
        ExposureLimit::new(
            s.exposure_limit_w_per_m2.unwrap_or(default_limit.max_avg_density()),
            s.averaging_window_s.unwrap_or(default_limit.averaging_window()),
        ),
    )?;
    let rows = match s.rows {
        None => default_safety_rows(carrier),
        Some(rows) => rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| resolve_safety_row(&format!("safety.rows[{i}]"), r, carrier))
            .collect::<anyhow::Result<_>>()?,
    };
    let distances = s.distances_m.unwrap_or_default();
    for (i, d) in distances.iter().enumerate() {
        if !(d.is_finite() && *d > 0.0) {
            bail!("safety.distances_m[{i}]: distance must be positive, got {d}");
        }
    }
    Ok(SafetyConfig { limit, rows, distances })
}

fn resolve_safety_row(path: &str, r: RawSafetyRow, carrier: CarrierSpec) -> anyhow::Result<SafetyRow> {
    let power = watts_from(&format!("{path}.radiated_power"), r.radiated_power_w, r.radiated_power_dbm)?
        .ok_or_else(|| anyhow!("{path}: missing `radiated_power_w`"))?;
    if !(power.is_finite() && power > 0.0) {
        bail!("{path}.radiated_power_w: must be positive, got {power}");
    }
    let aperture = aperture_from(path, r.aperture_radius_m, r.aperture_area_m2)?;
    let row_carrier = match r.frequency_hz {
        Some(f) => Some(at(&format!("{path}.frequency_hz"), CarrierSpec::from_frequency(f))?),
        None => None,
    };
    let emission = match r.mode {
        RawMode::Omnidirectional => {
            if aperture.is_some() || row_carrier.is_some() {
                bail!("{path}: omnidirectional rows take no aperture or frequency");
            }
            Emission::Omnidirectional
        }
        RawMode::Beamed => at(
            path,
            Emission::from_parts(EmissionKind::Beamed, aperture, Some(row_carrier.unwrap_or(carrier))),
        )?,
    };
    Ok(SafetyRow { radiated_power: power, emission })
}

fn resolve_beam(raw: Option<&RawBeam>, carrier: CarrierSpec) -> anyhow::Result<BeamConfig> {
    let get = |f: fn(&RawBeam) -> Option<f64>, default: f64| raw.and_then(f).unwrap_or(default);
    let cfg = BeamConfig {
        beacons: raw.and_then(|b| b.beacons).unwrap_or(4),
        ring_radius: get(|b| b.ring_radius_m, 5.0),
        elements_per_side: raw.and_then(|b| b.elements_per_side).unwrap_or(8),
        element_spacing: get(|b| b.element_spacing_m, carrier.wavelength() / 2.0),
        per_beacon_power: get(|b| b.per_beacon_power_w, 10.0),
        synchronized: raw.and_then(|b| b.synchronized).unwrap_or(true),
        target: raw.and_then(|b| b.target_m).map_or(Point3::ORIGIN, |[x, y, z]| Point3::new(x, y, z)),
        grid_half_width: get(|b| b.grid_half_width_m, 3.0),
        grid_step: get(|b| b.grid_step_m, 0.1),
    };
    if cfg.beacons < 2 {
        bail!("beam.beacons: coordination needs at least two beacons, got {}", cfg.beacons);
    }
    if cfg.elements_per_side == 0 {
        bail!("beam.elements_per_side: must be at least 1");
    }
    for (key, v) in [
        ("ring_radius_m", cfg.ring_radius),
        ("element_spacing_m", cfg.element_spacing),
        ("per_beacon_power_w", cfg.per_beacon_power),
        ("grid_half_width_m", cfg.grid_half_width),
        ("grid_step_m", cfg.grid_step),
    ] {
        if !(v.is_finite() && v > 0.0) {
            bail!("beam.{key}: must be positive, got {v}");
        }
    }
    Ok(cfg)
}

fn resolve_network(
    raw: Option<RawNetwork>,
    transmitter: &TransmitterSpec,
    devices: &[DeviceProfile],
) -> anyhow::Result<(NetworkScenario, FrontierConfig)> {
    let raw = raw.unwrap_or_default();
    let name = raw.device.as_deref().unwrap_or("smartphone");
    let device = devices
        .iter()
        .find(|d| d.name == name)
        .cloned()
        .or_else(|| if raw.device.is_none() { devices.first().cloned() } else { None })
        .ok_or_else(|| anyhow!("network.device: unknown device `{name}`"))?;
    let mut n = NetworkScenario::new(*transmitter, device);
    macro_rules! set {
        ($field:ident, $raw:expr) => {
            if let Some(v) = $raw {
                n.$field = v;
            }
        };
    }
    set!(pb_density, raw.pb_density);
    set!(bs_density, raw.bs_density);
    set!(region_side, raw.region_side_m);
    set!(it_snr_threshold_db, raw.snr_threshold_db);
    set!(it_pathloss_exponent, raw.pathloss_exponent);
    set!(it_reference_distance, raw.reference_distance_m);
    set!(noise_power, raw.noise_dbm.map(dbm_to_watts));
    set!(bs_power, raw.bs_power_dbm.map(dbm_to_watts));
    set!(seed, raw.seed);
    set!(replications, raw.replications);
    set!(samples_per_replication, raw.samples_per_replication);
    set!(multi_pb, raw.multi_pb);
    set!(bs_swipt, raw.bs_swipt);
    set!(uplink_extra_power, raw.uplink_extra_power_w);
    at("network", n.validate())?;

    let f = raw.frontier.unwrap_or_default();
    let frontier = FrontierConfig {
        target_coverage: f.target_coverage.unwrap_or(0.8),
        bs_densities: f.bs_densities.unwrap_or_else(|| vec![1e-5, 2e-5, 5e-5, 1e-4, 2e-4]),
        pb_densities: f
            .pb_densities
            .unwrap_or_else(|| (1..=20).map(|k| 1e-4 * k as f64).collect()),
    };
    if !(0.0..=1.0).contains(&frontier.target_coverage) {
        bail!("network.frontier.target_coverage: must lie in [0, 1], got {}", frontier.target_coverage);
    }
    for (key, grid) in [("bs_densities", &frontier.bs_densities), ("pb_densities", &frontier.pb_densities)] {
        if grid.is_empty() || grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            bail!("network.frontier.{key}: needs non-negative finite densities");
        }
    }
    Ok((n, frontier))
}
