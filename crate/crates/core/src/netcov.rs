//! Monte Carlo coverage of a wirelessly powered network.
//!
//! Base stations (BSs) and power beacons (PBs) form independent homogeneous
//! Poisson point processes on a square window. A typical mobile sits at the
//! window centre. It is covered for power transfer when the nearest PB (or
//! the sum over all PBs, see [`NetworkScenario::multi_pb`]) keeps it
//! powered under the free-space beam-efficiency model. It is covered for
//! information transfer when the nearest BS gives an SNR above threshold
//! under noise-limited power-law path loss.
//!
//! Every sample draws from its own ChaCha stream keyed by
//! `(seed, sample index, process)`, so results do not depend on how
//! replications are scheduled across threads. The point count is drawn by
//! inverting the Poisson CDF with one uniform, which makes realisations at
//! different densities nested for the same stream.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{DiscreteCDF, Poisson};
use statrs::function::factorial::ln_factorial;

use crate::devices::{pt_range, DeviceProfile, PtRange, TransmitterSpec};
use crate::error::{non_negative, positive, Error, Result};
use crate::linkphys::{db_to_linear, linear_to_db};

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Poisson point-count sampler that inverts a tabulated CDF.
///
/// The table spans `mean +- 12 sqrt(mean)` (plus a small margin), outside
/// which the probability mass is below double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonCount {
    first: u64,
    cdf: Vec<f64>,
}

impl PoissonCount {
    pub fn new(mean: f64) -> Result<Self> {
        let mean = non_negative("poisson mean", mean)?;
        if mean == 0.0 {
            return Ok(Self {
                first: 0,
                cdf: vec![1.0],
            });
        }
        let spread = 12.0 * mean.sqrt() + 20.0;
        let first = (mean - spread).max(0.0).floor() as u64;
        let last = (mean + spread).ceil() as u64;
        let dist = Poisson::new(mean)
            .map_err(|e| Error::Argument(format!("poisson mean {mean}: {e}")))?;
        let mut acc = if first == 0 { 0.0 } else { dist.cdf(first - 1) };
        let ln_mean = mean.ln();
        let cdf = (first..=last)
            .map(|k| {
                acc += (k as f64 * ln_mean - mean - ln_factorial(k)).exp();
                acc
            })
            .collect();
        Ok(Self { first, cdf })
    }

    /// Smallest count whose CDF reaches `u`.
    pub fn quantile(&self, u: f64) -> u64 {
        let idx = self.cdf.partition_point(|&c| c < u);
        self.first + idx.min(self.cdf.len() - 1) as u64
    }
}

/// Homogeneous Poisson point process on a `side x side` square centred at
/// the origin.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, side: f64, rng: &mut R) -> Result<Vec<Point2>> {
    let density = non_negative("density", density)?;
    let side = positive("window side", side)?;
    let counts = PoissonCount::new(density * side * side)?;
    Ok(sample_ppp_with(&counts, side, rng))
}

/// [`sample_ppp`] with a prebuilt count sampler for the window's mean.
pub fn sample_ppp_with<R: Rng + ?Sized>(counts: &PoissonCount, side: f64, rng: &mut R) -> Vec<Point2> {
    let u: f64 = rng.random();
    let count = counts.quantile(u);
    (0..count)
        .map(|_| {
            let x: f64 = rng.random();
            let y: f64 = rng.random();
            Point2 {
                x: (x - 0.5) * side,
                y: (y - 0.5) * side,
            }
        })
        .collect()
}

/// Deterministic RNG stream for one `(seed, index)` pair.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkScenario {
    /// PBs per m^2.
    pub pb_density: f64,
    /// BSs per m^2.
    pub bs_density: f64,
    /// Side of the square simulation window (m).
    pub region_side: f64,
    pub device: DeviceProfile,
    /// Per-PB transmitter.
    pub transmitter: TransmitterSpec,
    /// BS signal power received at the reference distance (W).
    pub bs_power: f64,
    pub it_snr_threshold_db: f64,
    pub it_pathloss_exponent: f64,
    pub it_reference_distance: f64,
    pub noise_power: f64,
    pub seed: u64,
    pub replications: usize,
    pub samples_per_replication: usize,
    /// Sum incoherent contributions of every PB instead of the nearest only.
    pub multi_pb: bool,
    /// BSs also transfer power (with the PB transmitter) to nearby mobiles.
    pub bs_swipt: bool,
    /// Extra power needed by transmitting mobiles (W).
    pub uplink_extra_power: f64,
}

impl NetworkScenario {
    /// Default network around the given PB transmitter and device.
    pub fn new(transmitter: TransmitterSpec, device: DeviceProfile) -> Self {
        Self {
            pb_density: 1e-3,
            bs_density: 1e-4,
            region_side: 400.0,
            device,
            transmitter,
            bs_power: 1e-6,
            it_snr_threshold_db: 10.0,
            it_pathloss_exponent: 4.0,
            it_reference_distance: 1.0,
            noise_power: 1e-15,
            seed: 0,
            replications: 25,
            samples_per_replication: 400,
            multi_pb: false,
            bs_swipt: false,
            uplink_extra_power: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("pb_density", self.pb_density)?;
        non_negative("bs_density", self.bs_density)?;
        positive("region_side", self.region_side)?;
        positive("bs_power", self.bs_power)?;
        positive("noise_power", self.noise_power)?;
        positive("it_reference_distance", self.it_reference_distance)?;
        non_negative("uplink_extra_power", self.uplink_extra_power)?;
        if self.it_snr_threshold_db.is_nan() {
            return Err(Error::domain("snr threshold", f64::NAN, "must be a number"));
        }
        if !(self.it_pathloss_exponent > 2.0 && self.it_pathloss_exponent.is_finite()) {
            return Err(Error::domain(
                "pathloss exponent",
                self.it_pathloss_exponent,
                "must exceed 2",
            ));
        }
        if self.replications < 1 || self.samples_per_replication < 1 {
            return Err(Error::Argument(
                "replications and samples per replication must be at least 1".into(),
            ));
        }
        if let Some(r) = self.pt_range().distance() {
            if self.region_side < 10.0 * r {
                return Err(Error::Argument(format!(
                    "region side {} m is under 10x the power-transfer range {r} m",
                    self.region_side
                )));
            }
        }
        if let Some(r) = self.it_range().filter(|r| r.is_finite()) {
            if self.region_side < 2.0 * r {
                log::warn!(
                    "region side {} m is under twice the IT range {r} m; edge effects bias IT coverage down",
                    self.region_side
                );
            }
        }
        Ok(())
    }

    /// Device with any uplink surcharge folded into its consumption.
    pub fn effective_device(&self) -> Result<DeviceProfile> {
        self.device.clone().with_extra_consumption(self.uplink_extra_power)
    }

    pub fn pt_range(&self) -> PtRange {
        match self.effective_device() {
            Ok(dev) => pt_range(&self.transmitter, &dev),
            Err(_) => pt_range(&self.transmitter, &self.device),
        }
    }

    /// Largest BS distance meeting the SNR threshold; `None` without a
    /// usable threshold, infinite for a threshold of minus infinity.
    pub fn it_range(&self) -> Option<f64> {
        if self.it_snr_threshold_db == f64::NEG_INFINITY {
            return Some(f64::INFINITY);
        }
        let gamma = db_to_linear(self.it_snr_threshold_db);
        let ratio = self.bs_power / (self.noise_power * gamma);
        (ratio.is_finite() && ratio > 0.0)
            .then(|| self.it_reference_distance * ratio.powf(1.0 / self.it_pathloss_exponent))
    }

    /// SNR (dB) from a BS at distance `d`.
    pub fn it_snr_db(&self, d: f64) -> f64 {
        let rx = self.bs_power * (d / self.it_reference_distance).powf(-self.it_pathloss_exponent);
        linear_to_db(rx / self.noise_power)
    }

    /// Nearest-neighbour closed form `1 - exp(-lambda pi r^2)` for PT
    /// coverage from the nearest PB alone.
    pub fn pt_coverage_closed_form(&self) -> f64 {
        nearest_neighbour_coverage(self.pb_density, self.pt_range().distance().unwrap_or(0.0))
    }

    pub fn it_coverage_closed_form(&self) -> f64 {
        nearest_neighbour_coverage(self.bs_density, self.it_range().unwrap_or(0.0))
    }

    fn total_samples(&self) -> usize {
        self.replications * self.samples_per_replication
    }
}

/// Probability that a PPP of the given density has a point within `r`.
pub fn nearest_neighbour_coverage(density: f64, r: f64) -> f64 {
    if r.is_infinite() {
        return if density > 0.0 { 1.0 } else { 0.0 };
    }
    -(-density * std::f64::consts::PI * r * r).exp_m1()
}

/// Coverage fraction with its 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// `None` with a single replication.
    pub half_width: Option<f64>,
}

impl Estimate {
    fn from_replications(values: &[f64]) -> Self {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Self {
            mean,
            half_width: confidence(values).ok(),
        }
    }

    /// Standard error implied by the half-width.
    pub fn std_error(&self) -> Option<f64> {
        self.half_width.map(|h| h / Z_95)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageResult {
    pub pt_coverage: Estimate,
    pub it_coverage: Estimate,
    pub joint_coverage: Estimate,
    pub replications_used: usize,
    pub samples: usize,
}

/// Normal-approximation 95% half-width `1.96 s / sqrt(n)` over
/// replication-level estimates.
pub fn confidence(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::UndefinedVariance(n));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    Ok(Z_95 * var.sqrt() / (n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    pt: usize,
    it: usize,
    joint: usize,
}

/// Pre-validated per-run state.
struct Evaluator<'a> {
    scn: &'a NetworkScenario,
    device: DeviceProfile,
    pt_possible: bool,
    pb_counts: PoissonCount,
    bs_counts: PoissonCount,
}

impl<'a> Evaluator<'a> {
    fn new(scn: &'a NetworkScenario) -> Result<Self> {
        scn.validate()?;
        let device = scn.effective_device()?;
        let feasible = pt_range(&scn.transmitter, &device).is_feasible();
        if !feasible && !scn.multi_pb {
            log::warn!(
                "device {} cannot be powered by a single {} W beacon at any distance; PT coverage is 0",
                device.name,
                scn.transmitter.radiated_power()
            );
        }
        let area = scn.region_side * scn.region_side;
        Ok(Self {
            scn,
            device,
            pt_possible: feasible || scn.multi_pb,
            pb_counts: PoissonCount::new(scn.pb_density * area)?,
            bs_counts: PoissonCount::new(scn.bs_density * area)?,
        })
    }

    fn sample(&self, index: u64) -> Result<(bool, bool)> {
        let scn = self.scn;
        let mut bs_rng = stream_rng(scn.seed, 2 * index + 1);
        let bss = sample_ppp_with(&self.bs_counts, scn.region_side, &mut bs_rng);
        let nearest_bs = nearest(&bss);
        let pt = if self.pt_possible {
            let mut pb_rng = stream_rng(scn.seed, 2 * index);
            let pbs = sample_ppp_with(&self.pb_counts, scn.region_side, &mut pb_rng);
            self.powered(&pbs, &bss, nearest_bs)?
        } else {
            false
        };
        let it = match nearest_bs {
            None => false,
            Some(d) => scn.it_snr_db(d) >= scn.it_snr_threshold_db,
        };
        Ok((pt, it))
    }

    fn powered(&self, pbs: &[Point2], bss: &[Point2], nearest_bs: Option<f64>) -> Result<bool> {
        let tx = &self.scn.transmitter;
        let dev = &self.device;
        if self.scn.multi_pb {
            let mut rf = 0.0;
            let sources = pbs
                .iter()
                .chain(bss.iter().filter(|_| self.scn.bs_swipt));
            for p in sources {
                rf += tx.received_rf(dev, clamp_distance(p.norm()))?;
            }
            return Ok(dev.rf_to_dc() * rf >= dev.consumption() && rf >= dev.sensitivity());
        }
        let mut best = nearest(pbs);
        if self.scn.bs_swipt {
            best = match (best, nearest_bs) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
        match best {
            None => Ok(false),
            Some(d) => tx.powers(dev, clamp_distance(d)),
        }
    }

    fn replication(&self, rep: usize) -> Result<Tally> {
        let n = self.scn.samples_per_replication;
        let mut t = Tally::default();
        for j in 0..n {
            let (pt, it) = self.sample((rep * n + j) as u64)?;
            t.pt += pt as usize;
            t.it += it as usize;
            t.joint += (pt && it) as usize;
        }
        Ok(t)
    }
}

fn nearest(points: &[Point2]) -> Option<f64> {
    points.iter().map(Point2::norm).min_by(f64::total_cmp)
}

// A point exactly at the mobile has probability zero but must not error.
fn clamp_distance(d: f64) -> f64 {
    d.max(1e-9)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Argument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every replication of `scn`; `threads` pins the worker count, `None`
/// uses the global pool. The result is the same for any thread count.
pub fn simulate_coverage(scn: &NetworkScenario, threads: Option<usize>) -> Result<CoverageResult> {
    let eval = Evaluator::new(scn)?;
    let tallies = with_threads(threads, || {
        (0..scn.replications)
            .into_par_iter()
            .map(|r| eval.replication(r))
            .collect::<Result<Vec<_>>>()
    })??;
    let n = scn.samples_per_replication as f64;
    let frac = |f: fn(&Tally) -> usize| -> Vec<f64> {
        tallies.iter().map(|t| f(t) as f64 / n).collect()
    };
    Ok(CoverageResult {
        pt_coverage: Estimate::from_replications(&frac(|t| t.pt)),
        it_coverage: Estimate::from_replications(&frac(|t| t.it)),
        joint_coverage: Estimate::from_replications(&frac(|t| t.joint)),
        replications_used: scn.replications,
        samples: scn.total_samples(),
    })
}

pub fn pt_coverage(scn: &NetworkScenario) -> Result<Estimate> {
    Ok(simulate_coverage(scn, None)?.pt_coverage)
}

pub fn it_coverage(scn: &NetworkScenario) -> Result<Estimate> {
    Ok(simulate_coverage(scn, None)?.it_coverage)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierPoint {
    pub bs_density: f64,
    /// Smallest grid PB density meeting the target; `None` if unreachable.
    pub min_pb_density: Option<f64>,
    /// Joint coverage at that density.
    pub joint_coverage: Option<f64>,
}

/// For each BS density, the smallest PB density on `pb_grid` whose
/// simulated joint coverage reaches `target`.
///
/// Grid points share random streams, so the PB (and BS) realisations are
/// nested across densities and coverage is monotone along each grid axis.
pub fn density_tradeoff(
    scn: &NetworkScenario,
    target: f64,
    bs_grid: &[f64],
    pb_grid: &[f64],
    threads: Option<usize>,
) -> Result<Vec<FrontierPoint>> {
    if bs_grid.is_empty() || pb_grid.is_empty() {
        return Err(Error::Argument("density grids must be non-empty".into()));
    }
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::domain("target coverage", target, "must lie in [0, 1]"));
    }
    let mut pbs = pb_grid.to_vec();
    pbs.sort_by(f64::total_cmp);
    bs_grid
        .iter()
        .map(|&bs| {
            let joint_at = |pb: f64| -> Result<f64> {
                let cell = NetworkScenario {
                    bs_density: bs,
                    pb_density: pb,
                    ..scn.clone()
                };
                Ok(simulate_coverage(&cell, threads)?.joint_coverage.mean)
            };
            // Joint coverage is monotone in PB density sample by sample, so
            // bisection over the sorted grid finds the same cell as a scan.
            let (mut lo, mut hi) = (0, pbs.len());
            let mut found = None;
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                let joint = joint_at(pbs[mid])?;
                if joint >= target {
                    found = Some((pbs[mid], joint));
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            Ok(FrontierPoint {
                bs_density: bs,
                min_pb_density: found.map(|f| f.0),
                joint_coverage: found.map(|f| f.1),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::builtin_catalog;

    fn scenario() -> NetworkScenario {
        let phone = builtin_catalog().remove(1);
        NetworkScenario {
            replications: 10,
            samples_per_replication: 200,
            ..NetworkScenario::new(TransmitterSpec::reference_beacon(50.0).unwrap(), phone)
        }
    }

    #[test]
    fn empty_process() {
        let mut rng = stream_rng(1, 0);
        assert!(sample_ppp(0.0, 100.0, &mut rng).unwrap().is_empty());
        assert!(sample_ppp(-1.0, 100.0, &mut rng).is_err());
    }

    #[test]
    fn ppp_is_replayable_and_inside_window() {
        let a = sample_ppp(1e-3, 500.0, &mut stream_rng(9, 3)).unwrap();
        let b = sample_ppp(1e-3, 500.0, &mut stream_rng(9, 3)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.x.abs() <= 250.0 && p.y.abs() <= 250.0));
    }

    #[test]
    fn ppp_nested_across_densities() {
        let lo = sample_ppp(5e-4, 300.0, &mut stream_rng(4, 8)).unwrap();
        let hi = sample_ppp(2e-3, 300.0, &mut stream_rng(4, 8)).unwrap();
        assert!(lo.len() <= hi.len());
        assert_eq!(&hi[..lo.len()], &lo[..]);
    }

    #[test]
    fn count_table_matches_statrs() {
        for mean in [0.5, 3.0, 40.0, 1000.0, 2.5e5] {
            let table = PoissonCount::new(mean).unwrap();
            let reference = Poisson::new(mean).unwrap();
            for u in [1e-6, 0.01, 0.3, 0.5, 0.77, 0.99, 1.0 - 1e-9] {
                let k = table.quantile(u);
                assert!(reference.cdf(k) >= u - 1e-9, "mean {mean} u {u} k {k}");
                if k > 0 {
                    assert!(reference.cdf(k - 1) < u + 1e-9, "mean {mean} u {u} k {k}");
                }
            }
        }
        assert_eq!(PoissonCount::new(0.0).unwrap().quantile(0.999), 0);
    }

    #[test]
    fn confidence_examples() {
        assert_eq!(confidence(&[0.3; 5]).unwrap(), 0.0);
        assert_eq!(confidence(&[0.5]), Err(Error::UndefinedVariance(1)));
        // sample sd 0.1 over 4 values -> 1.96 * s / 2
        let v = [0.4, 0.6, 0.4, 0.6];
        let s = (4.0 * 0.01 / 3.0f64).sqrt();
        assert!((confidence(&v).unwrap() - 1.96 * s / 2.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_example() {
        assert!((nearest_neighbour_coverage(1e-3, 10.0) - 0.2695).abs() < 1e-4);
        assert_eq!(nearest_neighbour_coverage(0.0, 10.0), 0.0);
        let a = -(1.0 - nearest_neighbour_coverage(1e-3, 10.0)).ln();
        let b = -(1.0 - nearest_neighbour_coverage(1e-3, 20.0)).ln();
        assert!((b / a - 4.0).abs() < 1e-9);
    }

    #[test]
    fn zero_density_gives_zero_coverage() {
        let scn = NetworkScenario {
            pb_density: 0.0,
            bs_density: 0.0,
            ..scenario()
        };
        let r = simulate_coverage(&scn, None).unwrap();
        assert_eq!(r.pt_coverage.mean, 0.0);
        assert_eq!(r.it_coverage.mean, 0.0);
    }

    #[test]
    fn unbounded_threshold_covers_everyone() {
        let scn = NetworkScenario {
            it_snr_threshold_db: f64::NEG_INFINITY,
            bs_density: 1e-3,
            ..scenario()
        };
        assert_eq!(it_coverage(&scn).unwrap().mean, 1.0);
    }

    #[test]
    fn infeasible_device_has_no_pt_coverage() {
        let laptop = builtin_catalog().pop().unwrap();
        let scn = NetworkScenario {
            device: laptop,
            transmitter: TransmitterSpec::reference_beacon(10.0).unwrap(),
            pb_density: 1e-2,
            ..scenario()
        };
        assert_eq!(pt_coverage(&scn).unwrap().mean, 0.0);
    }

    #[test]
    fn validation_errors() {
        assert!(simulate_coverage(&NetworkScenario { it_pathloss_exponent: 2.0, ..scenario() }, None).is_err());
        assert!(simulate_coverage(&NetworkScenario { replications: 0, ..scenario() }, None).is_err());
        assert!(simulate_coverage(&NetworkScenario { region_side: 50.0, ..scenario() }, None).is_err());
    }

    #[test]
    fn joint_bounded_by_marginals() {
        for (pb, bs) in [(1e-4, 1e-5), (1e-3, 1e-4), (5e-3, 1e-3)] {
            let r = simulate_coverage(&NetworkScenario { pb_density: pb, bs_density: bs, ..scenario() }, None).unwrap();
            assert!(r.joint_coverage.mean <= r.pt_coverage.mean.min(r.it_coverage.mean));
        }
    }

    #[test]
    fn uplink_surcharge_shrinks_range() {
        let base = scenario();
        let loaded = NetworkScenario { uplink_extra_power: 0.2, ..scenario() };
        assert!(loaded.pt_range().distance().unwrap() < base.pt_range().distance().unwrap());
    }

    #[test]
    fn tradeoff_rejects_empty_grid() {
        assert!(density_tradeoff(&scenario(), 0.5, &[], &[1e-3], None).is_err());
        assert!(density_tradeoff(&scenario(), 1.5, &[1e-4], &[1e-3], None).is_err());
    }
}
