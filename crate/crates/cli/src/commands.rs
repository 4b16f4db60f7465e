//! One function per subcommand; each turns a resolved scenario into a table.

use anyhow::{anyhow, bail, Context};
use mpt_core::beamsim::{beacon_ring, coordinated_beacons, PlaneGrid};
use mpt_core::devices::{pt_range, scavenged_power, DeviceProfile, PtRange};
use mpt_core::linkphys::{beam_efficiency, beta, end_to_end_efficiency, friis_efficiency, EfficiencyChain, LinkGeometry};
use mpt_core::netcov::{density_tradeoff, simulate_coverage};
use mpt_core::safety::{max_duty_cycle, ubid as ubid_of, Emission};

use crate::scenario::Scenario;
use crate::table::{format_f64, Cell, Column, ResultTable};

const INFEASIBLE: &str = "infeasible";

fn selected_devices<'a>(s: &'a Scenario, name: Option<&str>) -> anyhow::Result<Vec<&'a DeviceProfile>> {
    match name {
        Some(n) => Ok(vec![s.device(n).context("--device")?]),
        None => Ok(s.devices.iter().collect()),
    }
}

/// Link budget of the scenario transmitter at each distance.
pub fn link(s: &Scenario, distances: &[f64], device: Option<&str>) -> anyhow::Result<ResultTable> {
    if distances.is_empty() {
        bail!("--distance: at least one distance is required");
    }
    let mut t = ResultTable::new(vec![
        Column::new("device", ""),
        Column::new("distance_m", "m"),
        Column::new("beta", ""),
        Column::new("beam_efficiency", ""),
        Column::new("friis_efficiency", ""),
        Column::new("end_to_end_efficiency", ""),
        Column::new("received_rf_w", "W"),
        Column::new("harvested_w", "W"),
        Column::new("powered", ""),
    ]);
    let tx = &s.transmitter;
    for dev in selected_devices(s, device)? {
        let chain = EfficiencyChain::new(tx.dc_to_rf(), dev.rf_to_dc())?;
        for &d in distances {
            let geom = LinkGeometry::new(tx.aperture, dev.aperture(), d).map_err(|e| anyhow!("--distance: {e}"))?;
            let b = beta(&geom, &tx.carrier);
            t.push(vec![
                Cell::text(&dev.name),
                Cell::Num(d),
                Cell::Num(b),
                Cell::Num(beam_efficiency(b)?),
                Cell::Num(friis_efficiency(b)?),
                Cell::Num(end_to_end_efficiency(b, &chain)?),
                Cell::Num(tx.received_rf(dev, d)?),
                Cell::Num(tx.harvested(dev, d)?),
                Cell::Bool(tx.powers(dev, d)?),
            ])?;
        }
    }
    Ok(t)
}

/// Power transfer range of every device at each radiated power, with the
/// ratio of each range to the reference device's.
pub fn fig4(s: &Scenario, powers: &[f64], reference: &str) -> anyhow::Result<ResultTable> {
    if powers.is_empty() {
        bail!("--powers: at least one power is required");
    }
    let reference = s.devices.iter().position(|d| d.name == reference);
    let mut columns = vec![Column::new("power_w", "W")];
    columns.extend(s.devices.iter().map(|d| Column::new(format!("{}_range_m", d.name), "m")));
    if let Some(r) = reference {
        let ref_name = &s.devices[r].name;
        columns.extend(
            s.devices
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != r)
                .map(|(_, d)| Column::new(format!("{}_to_{}_ratio", d.name, ref_name), "")),
        );
    }
    let mut t = ResultTable::new(columns);
    for &p in powers {
        let tx = s.transmitter.with_radiated_power(p).map_err(|e| anyhow!("--powers: {e}"))?;
        let ranges: Vec<Option<f64>> = s.devices.iter().map(|d| pt_range(&tx, d).distance()).collect();
        let mut row = vec![Cell::Num(p)];
        row.extend(ranges.iter().map(|r| r.map_or(Cell::text(INFEASIBLE), Cell::Num)));
        if let Some(r) = reference {
            for (i, range) in ranges.iter().enumerate() {
                if i != r {
                    row.push(Cell::opt(range.zip(ranges[r]).map(|(a, b)| a / b)));
                }
            }
        }
        t.push(row)?;
    }
    Ok(t)
}

/// Unsafe beam-interception distance per safety row, with the largest
/// admissible duty cycle at each distance.
pub fn ubid(s: &Scenario, distances: &[f64]) -> anyhow::Result<ResultTable> {
    let distances = if distances.is_empty() { &s.safety.distances } else { distances };
    for d in distances {
        if !(d.is_finite() && *d > 0.0) {
            bail!("--distances: distance must be positive, got {d}");
        }
    }
    let mut columns = vec![
        Column::new("mode", ""),
        Column::new("radiated_power_w", "W"),
        Column::new("aperture_area_m2", "m2"),
        Column::new("frequency_hz", "Hz"),
        Column::new("limit_w_per_m2", "W/m2"),
        Column::new("ubid_m", "m"),
    ];
    columns.extend(distances.iter().map(|d| Column::new(format!("duty_cycle_at_{}_m", format_f64(*d)), "")));
    let mut t = ResultTable::new(columns);
    let limit = &s.safety.limit;
    for row in &s.safety.rows {
        let report = ubid_of(row.radiated_power, row.emission, limit)?;
        let (area, freq) = match &row.emission {
            Emission::Omnidirectional => (None, None),
            Emission::Beamed { aperture, carrier } => (Some(aperture.area()), Some(carrier.frequency())),
        };
        let mut cells = vec![
            Cell::text(report.mode().label()),
            Cell::Num(row.radiated_power),
            Cell::opt(area),
            Cell::opt(freq),
            Cell::Num(limit.max_avg_density()),
            Cell::Num(report.ubid),
        ];
        for &d in distances {
            cells.push(Cell::Num(max_duty_cycle(row.radiated_power, row.emission, d, limit)?));
        }
        t.push(cells)?;
    }
    Ok(t)
}

/// Power a device of the given aperture area collects from each ambient band.
pub fn scavenge(s: &Scenario, area_m2: f64) -> anyhow::Result<ResultTable> {
    let mut t = ResultTable::new(vec![
        Column::new("spectrum", ""),
        Column::new("environment", ""),
        Column::new("density_low_w_per_m2", "W/m2"),
        Column::new("density_high_w_per_m2", "W/m2"),
        Column::new("area_m2", "m2"),
        Column::new("power_low_w", "W"),
        Column::new("power_high_w", "W"),
    ]);
    for src in &s.ambient {
        let (lo, hi) = scavenged_power(src, area_m2).map_err(|e| anyhow!("--area: {e}"))?;
        t.push(vec![
            Cell::text(&src.spectrum_label),
            Cell::text(&src.environment_label),
            Cell::Num(src.density_low()),
            Cell::Num(src.density_high()),
            Cell::Num(area_m2),
            Cell::Num(lo),
            Cell::Num(hi),
        ])?;
    }
    Ok(t)
}

/// Field map of coordinated beacons focused on the target, on a horizontal
/// grid through the target. `relative_power` is normalised to the target.
pub fn beam(s: &Scenario, synchronized: bool) -> anyhow::Result<ResultTable> {
    let b = &s.beam;
    let layouts = beacon_ring(b.beacons, b.ring_radius, b.target, b.elements_per_side, b.element_spacing, s.carrier)
        .context("beam")?;
    let field = coordinated_beacons(&layouts, &b.target, synchronized, b.per_beacon_power).context("beam")?;
    let grid = PlaneGrid::new(b.target, b.grid_half_width, b.grid_step).context("beam")?;
    let points = grid.points();
    let density = field.density_map(&points).context("beam")?;
    let on_target = density[grid.center_index()];
    let mut t = ResultTable::new(vec![
        Column::new("x_m", "m"),
        Column::new("y_m", "m"),
        Column::new("z_m", "m"),
        Column::new("density_w_per_m2", "W/m2"),
        Column::new("relative_power", ""),
    ]);
    for (p, d) in points.iter().zip(&density) {
        t.push(vec![Cell::Num(p.x), Cell::Num(p.y), Cell::Num(p.z), Cell::Num(*d), Cell::Num(d / on_target)])?;
    }
    Ok(t)
}

/// Monte Carlo coverage of the typical mobile, beside the nearest-neighbour
/// closed forms where they apply.
pub fn coverage(s: &Scenario, threads: Option<usize>) -> anyhow::Result<ResultTable> {
    let n = &s.network;
    let r = simulate_coverage(n, threads).context("coverage")?;
    let nearest_only = !n.multi_pb && !n.bs_swipt;
    let pt_closed = nearest_only.then(|| n.pt_coverage_closed_form());
    let it_closed = n.it_coverage_closed_form();
    let pt_range = match n.pt_range() {
        PtRange::Feasible { distance, .. } => Some(distance),
        PtRange::Infeasible { .. } => None,
    };
    let mut t = ResultTable::new(vec![
        Column::new("quantity", ""),
        Column::new("pb_density", "1/m2"),
        Column::new("bs_density", "1/m2"),
        Column::new("range_m", "m"),
        Column::new("coverage", ""),
        Column::new("half_width", ""),
        Column::new("closed_form", ""),
        Column::new("replications", ""),
        Column::new("samples", ""),
    ]);
    let rows = [
        ("power_transfer", Cell::opt(pt_range), r.pt_coverage, pt_closed),
        ("information_transfer", Cell::opt(n.it_range()), r.it_coverage, Some(it_closed)),
        ("joint", Cell::Empty, r.joint_coverage, pt_closed.map(|p| p * it_closed)),
    ];
    for (name, range, est, closed) in rows {
        t.push(vec![
            Cell::text(name),
            Cell::Num(n.pb_density),
            Cell::Num(n.bs_density),
            range,
            Cell::Num(est.mean),
            Cell::opt(est.half_width),
            Cell::opt(closed),
            Cell::Int(r.replications_used as u64),
            Cell::Int(r.samples as u64),
        ])?;
    }
    Ok(t)
}

/// Smallest PB density reaching the target joint coverage, per BS density.
pub fn frontier(s: &Scenario, threads: Option<usize>) -> anyhow::Result<ResultTable> {
    let f = &s.frontier;
    let points = density_tradeoff(&s.network, f.target_coverage, &f.bs_densities, &f.pb_densities, threads)
        .context("coverage --frontier")?;
    let mut t = ResultTable::new(vec![
        Column::new("bs_density", "1/m2"),
        Column::new("min_pb_density", "1/m2"),
        Column::new("joint_coverage", ""),
    ]);
    for p in points {
        t.push(vec![Cell::Num(p.bs_density), Cell::opt(p.min_pb_density), Cell::opt(p.joint_coverage)])?;
    }
    Ok(t)
}
