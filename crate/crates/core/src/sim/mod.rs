//! Frame-level Monte Carlo simulation.
//!
//! Each replication simulates one frame end to end: Poisson arrivals,
//! uniform mini-slot choice, fading-gated grants, aggregation and the TCI
//! trunk. Replication `j` of point `i` under master seed `s` draws from its
//! own ChaCha8 stream seeded with [`substream_seed`]`(s, i, j)`, and results
//! are merged exactly, so the output is bit-identical for any worker count.

mod exact;
mod stats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::link::{aggregate_rate, instantaneous_power, rayleigh_sample, snr, tci_cutoff, TciPolicy};
use crate::params::{frame_layout, AccessMode, FrameLayout, SystemParams};

pub use exact::ExactSum;
pub use stats::{Estimate, SimStats, SimSummary, Z95};

/// What happened in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutcome {
    /// MTD arrivals.
    pub m: u32,
    /// Mini-slots chosen by exactly one MTD.
    pub singles: u32,
    /// Singles whose reservation token was decoded.
    pub granted: u32,
    /// Uplink power gain; `None` in baseline mode.
    pub trunk_gain: Option<f64>,
    pub trunk_outage: bool,
    pub trunk_rate: f64,
    pub trunk_power: f64,
    pub delivered_mtds: u32,
}

/// splitmix64 finaliser applied to `x + φ·2^64`.
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the random stream for replication `rep` of sweep point `point`:
/// `mix64(mix64(mix64(master) ^ point) ^ rep)`.
pub fn substream_seed(master: u64, point: u64, rep: u64) -> u64 {
    mix64(mix64(mix64(master) ^ point) ^ rep)
}

pub fn substream(master: u64, point: u64, rep: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(master, point, rep))
}

/// Per-point frame generator with the arrival law prebuilt.
#[derive(Debug, Clone)]
pub struct FrameSimulator<'a> {
    params: &'a SystemParams,
    layout: FrameLayout,
    policy: TciPolicy,
    mode: AccessMode,
    arrivals: Option<Poisson<f64>>,
}

impl<'a> FrameSimulator<'a> {
    pub fn new(params: &'a SystemParams, layout: FrameLayout, policy: TciPolicy, mode: AccessMode) -> Result<Self> {
        let arrivals = if layout.lambda_f > 0.0 {
            Some(Poisson::new(layout.lambda_f).map_err(|e| {
                Error::InvalidArgument(format!("lambda_f = {}: {e}", layout.lambda_f))
            })?)
        } else {
            None
        };
        Ok(FrameSimulator {
            params,
            layout,
            policy,
            mode,
            arrivals,
        })
    }

    pub fn layout(&self) -> &FrameLayout {
        &self.layout
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> FrameOutcome {
        let p = self.params;
        let m = self.arrivals.map_or(0, |d| d.sample(rng) as u32);

        let mut occupancy = vec![0u32; p.r as usize];
        for _ in 0..m {
            occupancy[rng.random_range(0..p.r as usize)] += 1;
        }
        let singles = occupancy.iter().filter(|&&c| c == 1).count() as u32;

        let power = self.mode.mtd_power(p);
        let distance = self.mode.mtd_distance(p);
        let granted = (0..singles)
            .filter(|_| snr(power, rayleigh_sample(rng, p.hbar), distance, p) >= p.gamma_m)
            .count() as u32;

        match self.mode {
            AccessMode::Baseline => FrameOutcome {
                m,
                singles,
                granted,
                trunk_gain: None,
                trunk_outage: false,
                trunk_rate: 0.0,
                trunk_power: 0.0,
                delivered_mtds: granted,
            },
            AccessMode::Trunked => {
                let rate = aggregate_rate(granted, &self.layout, p);
                let h = rayleigh_sample(rng, self.policy.hbar);
                let outage = h < self.policy.mu;
                let trunk_power = if outage || rate == 0.0 {
                    0.0
                } else {
                    instantaneous_power(rate, h, p)
                };
                FrameOutcome {
                    m,
                    singles,
                    granted,
                    trunk_gain: Some(h),
                    trunk_outage: outage,
                    trunk_rate: rate,
                    trunk_power,
                    delivered_mtds: if outage { 0 } else { granted },
                }
            }
        }
    }
}

/// Simulates one frame.
pub fn run_frame<R: Rng + ?Sized>(
    rng: &mut R,
    params: &SystemParams,
    layout: &FrameLayout,
    policy: &TciPolicy,
    mode: AccessMode,
) -> Result<FrameOutcome> {
    Ok(FrameSimulator::new(params, *layout, *policy, mode)?.run(rng))
}

/// Fingerprint shared by every [`SimStats`] of a point and mode.
pub fn point_fingerprint(params: &SystemParams, mode: AccessMode) -> u64 {
    mix64(params.fingerprint() ^ mode as u64)
}

/// Runs `iters` independent frames on `workers` threads.
pub fn run_replications(
    params: &SystemParams,
    mode: AccessMode,
    iters: u64,
    master_seed: u64,
    workers: usize,
    point_index: u64,
) -> Result<SimStats> {
    if iters == 0 {
        return Err(Error::InvalidArgument("iters must be >= 1".into()));
    }
    if workers == 0 {
        return Err(Error::InvalidArgument("workers must be >= 1".into()));
    }
    let layout = frame_layout(params);
    let policy = tci_cutoff(params.po, params.hbar)?;
    let sim = FrameSimulator::new(params, layout, policy, mode)?;
    let fingerprint = point_fingerprint(params, mode);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    let stats = pool.install(|| {
        (0..iters)
            .into_par_iter()
            .fold(
                || SimStats::new(fingerprint),
                |mut acc, j| {
                    let mut rng = substream(master_seed, point_index, j);
                    acc.record(&sim.run(&mut rng));
                    acc
                },
            )
            .reduce(
                || SimStats::new(fingerprint),
                |mut a, b| {
                    a.absorb(&b);
                    a
                },
            )
    });
    Ok(stats)
}
