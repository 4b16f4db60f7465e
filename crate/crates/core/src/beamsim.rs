//! Phasor-domain retrodirective beam control.
//!
//! Elements are isotropic point radiators. The channel from element `n` to a
//! point at distance `d_n` is `exp(-j k d_n) / (sqrt(4 pi) d_n)`, so that
//! `|sum_n w_n h_n|^2` is a power density in W/m^2 when `sum |w_n|^2` is the
//! radiated power in watts. A single element radiating `P` gives the
//! isotropic density `P / (4 pi d^2)`.
//!
//! Near-field phases use exact per-element distances.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{non_negative, positive, Error, Result};
use crate::linkphys::CarrierSpec;

/// Elements closer than this to an evaluation point count as coincident.
const COINCIDENCE_TOLERANCE_M: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, o: &Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        (*self - *other).norm()
    }

    pub fn normalized(&self) -> Option<Point3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| *self * (1.0 / n))
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Element positions of a phased array plus its carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayLayout {
    elements: Vec<Point3>,
    carrier: CarrierSpec,
    /// Nearest-neighbour spacing, `None` for a single element.
    min_spacing: Option<f64>,
}

impl ArrayLayout {
    pub fn new(elements: Vec<Point3>, carrier: CarrierSpec) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Argument("array needs at least one element".into()));
        }
        if let Some(bad) = elements.iter().find(|p| !p.is_finite()) {
            return Err(Error::Geometry(format!("non-finite element position {bad:?}")));
        }
        let mut min_spacing: Option<f64> = None;
        for (i, a) in elements.iter().enumerate() {
            for b in &elements[i + 1..] {
                let d = a.distance(b);
                min_spacing = Some(min_spacing.map_or(d, |m| m.min(d)));
            }
        }
        if min_spacing.is_some_and(|s| s < COINCIDENCE_TOLERANCE_M) {
            return Err(Error::Geometry("two elements share a position".into()));
        }
        Ok(Self {
            elements,
            carrier,
            min_spacing,
        })
    }

    /// `n` elements along `axis`, centred on `center`.
    pub fn uniform_linear(
        n: usize,
        spacing_m: f64,
        center: Point3,
        axis: Point3,
        carrier: CarrierSpec,
    ) -> Result<Self> {
        let spacing = positive("element spacing", spacing_m)?;
        let axis = axis
            .normalized()
            .ok_or_else(|| Error::Geometry("array axis has zero length".into()))?;
        let offset = (n as f64 - 1.0) / 2.0;
        let elements = (0..n)
            .map(|i| center + axis * ((i as f64 - offset) * spacing))
            .collect();
        warn_grating_lobes(spacing, &carrier);
        Self::new(elements, carrier)
    }

    /// `rows x cols` planar grid spanned by the `u` and `v` directions.
    pub fn uniform_grid(
        rows: usize,
        cols: usize,
        spacing_m: f64,
        center: Point3,
        u: Point3,
        v: Point3,
        carrier: CarrierSpec,
    ) -> Result<Self> {
        let spacing = positive("element spacing", spacing_m)?;
        let u = u
            .normalized()
            .ok_or_else(|| Error::Geometry("grid axis has zero length".into()))?;
        let v = v
            .normalized()
            .ok_or_else(|| Error::Geometry("grid axis has zero length".into()))?;
        let (ro, co) = ((rows as f64 - 1.0) / 2.0, (cols as f64 - 1.0) / 2.0);
        let mut elements = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                elements.push(
                    center + u * ((c as f64 - co) * spacing) + v * ((r as f64 - ro) * spacing),
                );
            }
        }
        warn_grating_lobes(spacing, &carrier);
        Self::new(elements, carrier)
    }

    /// Square planar grid at `center` whose broadside points at `target`.
    pub fn facing(
        center: Point3,
        target: Point3,
        side: usize,
        spacing_m: f64,
        carrier: CarrierSpec,
    ) -> Result<Self> {
        let normal = (target - center)
            .normalized()
            .ok_or_else(|| Error::Geometry("array centre coincides with its target".into()))?;
        let up = Point3::new(0.0, 0.0, 1.0);
        let reference = if normal.cross(&up).norm() < 1e-6 {
            Point3::new(1.0, 0.0, 0.0)
        } else {
            up
        };
        let u = normal.cross(&reference);
        let v = normal.cross(&u);
        Self::uniform_grid(side, side, spacing_m, center, u, v, carrier)
    }

    pub fn elements(&self) -> &[Point3] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn carrier(&self) -> &CarrierSpec {
        &self.carrier
    }

    pub fn min_spacing(&self) -> Option<f64> {
        self.min_spacing
    }

    /// Element spacing no larger than half a wavelength.
    pub fn grating_lobe_free(&self) -> bool {
        self.min_spacing
            .is_none_or(|s| s <= self.carrier.wavelength() / 2.0 * (1.0 + 1e-12))
    }
}

fn warn_grating_lobes(spacing: f64, carrier: &CarrierSpec) {
    if spacing > carrier.wavelength() / 2.0 * (1.0 + 1e-12) {
        log::warn!(
            "element spacing {spacing} m exceeds half a wavelength ({} m); expect grating lobes",
            carrier.wavelength() / 2.0
        );
    }
}

/// Free-space gain from one radiator to a point.
fn element_gain(from: &Point3, to: &Point3, k: f64) -> Result<Complex64> {
    let d = from.distance(to);
    if d < COINCIDENCE_TOLERANCE_M {
        return Err(Error::Geometry(format!(
            "point {to:?} coincides with an element"
        )));
    }
    Ok(Complex64::from_polar(1.0 / ((4.0 * PI).sqrt() * d), -k * d))
}

/// Per-element complex gains between an array and one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasorChannel {
    gains: Vec<Complex64>,
}

impl PhasorChannel {
    pub fn new(gains: Vec<Complex64>) -> Result<Self> {
        if gains.iter().any(|g| !(g.re.is_finite() && g.im.is_finite())) {
            return Err(Error::Argument("channel gains must be finite".into()));
        }
        Ok(Self { gains })
    }

    /// Exact near-field free-space channel from `layout` to `point`.
    pub fn free_space(layout: &ArrayLayout, point: &Point3) -> Result<Self> {
        let k = layout.carrier().wavenumber();
        let gains = layout
            .elements()
            .iter()
            .map(|e| element_gain(e, point, k))
            .collect::<Result<_>>()?;
        Ok(Self { gains })
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.gains.iter().map(|g| g.norm_sqr()).sum()
    }

    /// Every gain multiplied by `exp(j theta)`.
    pub fn rotated(&self, theta: f64) -> Self {
        let r = Complex64::from_polar(1.0, theta);
        Self {
            gains: self.gains.iter().map(|g| g * r).collect(),
        }
    }

    /// Zeroes the gains of elements whose path is blocked, as happens when
    /// an object intercepts the beam and de-phases those elements.
    pub fn obstructed(&self, blocked: &[bool]) -> Result<Self> {
        if blocked.len() != self.gains.len() {
            return Err(Error::Argument(format!(
                "obstruction mask has {} entries for {} elements",
                blocked.len(),
                self.gains.len()
            )));
        }
        Ok(Self {
            gains: self
                .gains
                .iter()
                .zip(blocked)
                .map(|(g, &b)| if b { Complex64::new(0.0, 0.0) } else { *g })
                .collect(),
        })
    }

    /// Element-wise sum, i.e. the channel seen when several pilots overlap.
    pub fn superpose(channels: &[PhasorChannel]) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| Error::Argument("no channels to superpose".into()))?;
        let mut gains = first.gains.clone();
        for ch in &channels[1..] {
            if ch.len() != gains.len() {
                return Err(Error::Argument("channels differ in element count".into()));
            }
            for (acc, g) in gains.iter_mut().zip(&ch.gains) {
                *acc += g;
            }
        }
        Ok(Self { gains })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights {
    weights: Vec<Complex64>,
    total_power: f64,
}

impl BeamWeights {
    pub fn new(weights: Vec<Complex64>) -> Self {
        let total_power = weights.iter().map(|w| w.norm_sqr()).sum();
        Self {
            weights,
            total_power,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); n])
    }

    /// The same power split evenly over `n` in-phase elements.
    pub fn uniform(n: usize, total_power: f64) -> Self {
        let a = (total_power / n as f64).sqrt();
        Self::new(vec![Complex64::new(a, 0.0); n])
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Conjugates the measured pilot phases and scales to `total_power`.
pub fn retrodirective_weights(pilot: &PhasorChannel, total_power: f64) -> Result<BeamWeights> {
    let total_power = non_negative("total power", total_power)?;
    let norm = pilot.norm_sqr().sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let scale = total_power.sqrt() / norm;
    let weights = pilot.gains().iter().map(|h| h.conj() * scale).collect();
    Ok(BeamWeights {
        weights,
        total_power,
    })
}

fn combine(channel: &PhasorChannel, weights: &BeamWeights) -> Result<Complex64> {
    if channel.len() != weights.len() {
        return Err(Error::Argument(format!(
            "{} weights for a {}-element channel",
            weights.len(),
            channel.len()
        )));
    }
    Ok(channel
        .gains()
        .iter()
        .zip(weights.weights())
        .map(|(h, w)| h * w)
        .sum())
}

/// Power delivered through `channel` by `weights`.
pub fn received_power(channel: &PhasorChannel, weights: &BeamWeights) -> Result<f64> {
    Ok(combine(channel, weights)?.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub amplitude: Complex64,
    /// `|amplitude|^2`, W/m^2.
    pub density: f64,
}

/// Coherent superposition of all element contributions at `point`.
pub fn field_at(layout: &ArrayLayout, weights: &BeamWeights, point: &Point3) -> Result<FieldSample> {
    let amplitude = combine(&PhasorChannel::free_space(layout, point)?, weights)?;
    Ok(FieldSample {
        amplitude,
        density: amplitude.norm_sqr(),
    })
}

/// Received powers when the first channel's mobile is the intended target.
///
/// With a shared pilot the array measures the superposition of all channels
/// and reflects a beam toward every mobile; otherwise it beams at the
/// intended mobile alone.
pub fn contamination_split_channels(
    channels: &[PhasorChannel],
    shared_pilot: bool,
    total_power: f64,
) -> Result<Vec<f64>> {
    if channels.len() < 2 {
        return Err(Error::Argument("contamination needs at least two mobiles".into()));
    }
    let pilot = if shared_pilot {
        PhasorChannel::superpose(channels)?
    } else {
        channels[0].clone()
    };
    let weights = retrodirective_weights(&pilot, total_power)?;
    channels.iter().map(|h| received_power(h, &weights)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContaminationSplit {
    /// Power density delivered to each mobile; index 0 is the intended one.
    pub received: Vec<f64>,
    /// What each mobile would get from a beam dedicated to it alone.
    pub single_user: Vec<f64>,
}

impl ContaminationSplit {
    /// `received / single_user` per mobile.
    pub fn fractions(&self) -> Vec<f64> {
        self.received
            .iter()
            .zip(&self.single_user)
            .map(|(r, s)| r / s)
            .collect()
    }
}

pub fn contamination_split(
    layout: &ArrayLayout,
    mobiles: &[Point3],
    shared_pilot: bool,
    total_power: f64,
) -> Result<ContaminationSplit> {
    let channels = mobiles
        .iter()
        .map(|m| PhasorChannel::free_space(layout, m))
        .collect::<Result<Vec<_>>>()?;
    let received = contamination_split_channels(&channels, shared_pilot, total_power)?;
    let single_user = channels.iter().map(|h| total_power * h.norm_sqr()).collect();
    Ok(ContaminationSplit {
        received,
        single_user,
    })
}

/// Several beacons each retro-directing toward the same mobile.
#[derive(Debug, Clone)]
pub struct CoordinatedBeam {
    beams: Vec<(ArrayLayout, BeamWeights)>,
    amplitudes: Vec<f64>,
    synchronized: bool,
}

pub fn coordinated_beacons(
    beacons: &[ArrayLayout],
    mobile: &Point3,
    phase_synchronized: bool,
    per_beacon_power: f64,
) -> Result<CoordinatedBeam> {
    if beacons.len() < 2 {
        return Err(Error::Argument("coordination needs at least two beacons".into()));
    }
    let mut beams = Vec::with_capacity(beacons.len());
    let mut amplitudes = Vec::with_capacity(beacons.len());
    for layout in beacons {
        let h = PhasorChannel::free_space(layout, mobile)?;
        let w = retrodirective_weights(&h, per_beacon_power)?;
        // Conjugate weights make each beacon's contribution real and positive.
        amplitudes.push(combine(&h, &w)?.norm());
        beams.push((layout.clone(), w));
    }
    Ok(CoordinatedBeam {
        beams,
        amplitudes,
        synchronized: phase_synchronized,
    })
}

impl CoordinatedBeam {
    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn synchronized(&self) -> bool {
        self.synchronized
    }

    pub fn beacons(&self) -> impl Iterator<Item = &ArrayLayout> {
        self.beams.iter().map(|(l, _)| l)
    }

    /// `(sum a_k)^2`: all beacons add in phase at the mobile.
    pub fn coherent_power(&self) -> f64 {
        self.amplitudes.iter().sum::<f64>().powi(2)
    }

    /// `sum a_k^2`: expectation over independent uniform beacon phases.
    pub fn incoherent_power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    /// Density at the mobile for this beam's synchronisation mode.
    pub fn power_at_mobile(&self) -> f64 {
        if self.synchronized {
            self.coherent_power()
        } else {
            self.incoherent_power()
        }
    }

    fn contributions(&self, point: &Point3) -> Result<Vec<Complex64>> {
        self.beams
            .iter()
            .map(|(layout, w)| field_at(layout, w, point).map(|f| f.amplitude))
            .collect()
    }

    /// Density at `point`; coherent sum when synchronised, expected
    /// incoherent sum otherwise.
    pub fn density_at(&self, point: &Point3) -> Result<f64> {
        let parts = self.contributions(point)?;
        Ok(if self.synchronized {
            parts.iter().sum::<Complex64>().norm_sqr()
        } else {
            parts.iter().map(|c| c.norm_sqr()).sum()
        })
    }

    /// Density at `point` for one realisation of per-beacon phase offsets.
    pub fn density_with_offsets(&self, point: &Point3, offsets: &[f64]) -> Result<f64> {
        if offsets.len() != self.beams.len() {
            return Err(Error::Argument("one phase offset per beacon required".into()));
        }
        let parts = self.contributions(point)?;
        Ok(parts
            .iter()
            .zip(offsets)
            .map(|(c, &t)| c * Complex64::from_polar(1.0, t))
            .sum::<Complex64>()
            .norm_sqr())
    }

    /// Evaluates [`Self::density_at`] over many points in parallel; output
    /// order follows the input.
    pub fn density_map(&self, points: &[Point3]) -> Result<Vec<f64>> {
        points.par_iter().map(|p| self.density_at(p)).collect()
    }
}

/// `count` square arrays evenly spaced on a horizontal circle of `radius`
/// around `center`, each facing it.
pub fn beacon_ring(
    count: usize,
    radius_m: f64,
    center: Point3,
    side: usize,
    spacing_m: f64,
    carrier: CarrierSpec,
) -> Result<Vec<ArrayLayout>> {
    let radius = positive("ring radius", radius_m)?;
    (0..count)
        .map(|k| {
            let angle = 2.0 * PI * k as f64 / count as f64;
            let at = center + Point3::new(radius * angle.cos(), radius * angle.sin(), 0.0);
            ArrayLayout::facing(at, center, side, spacing_m, carrier)
        })
        .collect()
}

/// Regular square grid of points in a horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneGrid {
    pub center: Point3,
    pub half_width: f64,
    pub step: f64,
}

impl PlaneGrid {
    pub fn new(center: Point3, half_width_m: f64, step_m: f64) -> Result<Self> {
        Ok(Self {
            center,
            half_width: positive("map half width", half_width_m)?,
            step: positive("map step", step_m)?,
        })
    }

    /// Cells per side; the centre is always a grid point.
    pub fn cells_per_side(&self) -> usize {
        2 * (self.half_width / self.step + 1e-9).floor() as usize + 1
    }

    /// Row-major points, x fastest.
    pub fn points(&self) -> Vec<Point3> {
        let n = self.cells_per_side();
        let half = (n / 2) as f64;
        let mut pts = Vec::with_capacity(n * n);
        for iy in 0..n {
            for ix in 0..n {
                pts.push(
                    self.center
                        + Point3::new((ix as f64 - half) * self.step, (iy as f64 - half) * self.step, 0.0),
                );
            }
        }
        pts
    }

    /// Index of the centre point in [`Self::points`].
    pub fn center_index(&self) -> usize {
        let n = self.cells_per_side();
        (n / 2) * n + n / 2
    }
}
