//! Mergeable Monte Carlo accumulators and their confidence intervals.

use super::exact::ExactSum;
use super::FrameOutcome;
use crate::analytics::MetricsReport;
use crate::error::{Error, Result};
use crate::params::{AccessMode, FrameLayout, SystemParams};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Sums over replications of one parameter point.
///
/// Integer quantities are summed in `u64` and power quantities in
/// [`ExactSum`], so merging is exact: the result does not depend on how the
/// replications were split across workers.
#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    fingerprint: u64,
    count: u64,
    arrivals: u64,
    arrivals_sq: u64,
    singles: u64,
    granted: u64,
    granted_sq: u64,
    delivered: u64,
    delivered_sq: u64,
    delivered_arrivals: u64,
    trunk_outages: u64,
    power: ExactSum,
    power_sq: ExactSum,
    power_granted: ExactSum,
    per_mtd_frames: u64,
    per_mtd: ExactSum,
    per_mtd_sq: ExactSum,
}

/// A point estimate with its 95% confidence half-width, when defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: Option<f64>,
}

impl Estimate {
    fn exact(mean: f64) -> Self {
        Estimate {
            mean,
            half_width: Some(0.0),
        }
    }

    fn scaled(self, k: f64) -> Self {
        Estimate {
            mean: self.mean * k,
            half_width: self.half_width.map(|h| h * k.abs()),
        }
    }

    fn shifted(self, c: f64) -> Self {
        Estimate {
            mean: self.mean + c,
            ..self
        }
    }
}

/// Derived metrics for one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSummary {
    pub frames: u64,
    pub mean_arrivals: f64,
    pub mean_singles: f64,
    pub mean_granted: Estimate,
    pub e_n_aggregated: Estimate,
    pub e_n_delivered: Estimate,
    pub e_p_tr_total: Estimate,
    /// Ratio of means `E[P_tr]/E[A]`, comparable with the analytic value.
    pub e_p_tr_per_mtd: Estimate,
    /// Mean of per-frame `P_tr/a` over frames with `a ≥ 1`.
    pub e_p_tr_per_mtd_framewise: Estimate,
    pub e_p_m: Estimate,
    /// Fraction of arrived MTDs that were granted and delivered.
    pub p_s: Estimate,
    pub outage: Estimate,
    pub trunk_outage_rate: Estimate,
}

impl SimSummary {
    pub fn to_report(&self) -> MetricsReport {
        MetricsReport {
            e_n_aggregated: self.e_n_aggregated.mean,
            e_n_delivered: self.e_n_delivered.mean,
            e_p_tr_total: self.e_p_tr_total.mean,
            e_p_tr_per_mtd: self.e_p_tr_per_mtd.mean,
            e_p_m: self.e_p_m.mean,
            p_s: self.p_s.mean,
            outage: self.outage.mean,
        }
    }
}

fn mean_estimate(sum: f64, sum_sq: f64, n: u64) -> Estimate {
    let nf = n as f64;
    let mean = sum / nf;
    let half_width = (n >= 2).then(|| {
        let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
        Z95 * (var / nf).sqrt()
    });
    Estimate { mean, half_width }
}

/// Ratio-of-sums estimator `Σy / Σx` with a delta-method interval.
fn ratio_estimate(sx: f64, sy: f64, sxx: f64, syy: f64, sxy: f64, n: u64) -> Estimate {
    if sx == 0.0 {
        return Estimate {
            mean: if sy == 0.0 { 0.0 } else { f64::NAN },
            half_width: None,
        };
    }
    let nf = n as f64;
    let r = sy / sx;
    let half_width = (n >= 2).then(|| {
        let resid = ((syy - 2.0 * r * sxy + r * r * sxx) / (nf - 1.0)).max(0.0);
        Z95 * (resid / nf).sqrt() / (sx / nf)
    });
    Estimate { mean: r, half_width }
}

impl SimStats {
    pub fn new(fingerprint: u64) -> Self {
        SimStats {
            fingerprint,
            count: 0,
            arrivals: 0,
            arrivals_sq: 0,
            singles: 0,
            granted: 0,
            granted_sq: 0,
            delivered: 0,
            delivered_sq: 0,
            delivered_arrivals: 0,
            trunk_outages: 0,
            power: ExactSum::new(),
            power_sq: ExactSum::new(),
            power_granted: ExactSum::new(),
            per_mtd_frames: 0,
            per_mtd: ExactSum::new(),
            per_mtd_sq: ExactSum::new(),
        }
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn record(&mut self, f: &FrameOutcome) {
        let m = u64::from(f.m);
        let a = u64::from(f.granted);
        let d = u64::from(f.delivered_mtds);
        self.count += 1;
        self.arrivals += m;
        self.arrivals_sq += m * m;
        self.singles += u64::from(f.singles);
        self.granted += a;
        self.granted_sq += a * a;
        self.delivered += d;
        self.delivered_sq += d * d;
        self.delivered_arrivals += d * m;
        self.trunk_outages += u64::from(f.trunk_outage);
        self.power.add(f.trunk_power);
        self.power_sq.add(f.trunk_power * f.trunk_power);
        self.power_granted.add(f.trunk_power * a as f64);
        if a > 0 {
            let share = f.trunk_power / a as f64;
            self.per_mtd_frames += 1;
            self.per_mtd.add(share);
            self.per_mtd_sq.add(share * share);
        }
    }

    /// Combines two accumulators from the same parameter point.
    pub fn merge(mut self, other: &SimStats) -> Result<SimStats> {
        if self.fingerprint != other.fingerprint {
            return Err(Error::FingerprintMismatch);
        }
        self.absorb(other);
        Ok(self)
    }

    pub(crate) fn absorb(&mut self, o: &SimStats) {
        self.count += o.count;
        self.arrivals += o.arrivals;
        self.arrivals_sq += o.arrivals_sq;
        self.singles += o.singles;
        self.granted += o.granted;
        self.granted_sq += o.granted_sq;
        self.delivered += o.delivered;
        self.delivered_sq += o.delivered_sq;
        self.delivered_arrivals += o.delivered_arrivals;
        self.trunk_outages += o.trunk_outages;
        self.power.merge(&o.power);
        self.power_sq.merge(&o.power_sq);
        self.power_granted.merge(&o.power_granted);
        self.per_mtd_frames += o.per_mtd_frames;
        self.per_mtd.merge(&o.per_mtd);
        self.per_mtd_sq.merge(&o.per_mtd_sq);
    }

    /// Means and 95% intervals. Panics when no frames were recorded.
    pub fn summary(&self, p: &SystemParams, layout: &FrameLayout, mode: AccessMode) -> SimSummary {
        assert!(self.count > 0, "no replications recorded");
        let n = self.count;
        let nf = n as f64;
        let per_second = 1.0 / layout.frame_duration(p);

        let granted = mean_estimate(self.granted as f64, self.granted_sq as f64, n);
        let delivered = mean_estimate(self.delivered as f64, self.delivered_sq as f64, n);
        let e_p_tr_total = mean_estimate(self.power.value(), self.power_sq.value(), n);
        let e_p_tr_per_mtd = ratio_estimate(
            self.granted as f64,
            self.power.value(),
            self.granted_sq as f64,
            self.power_sq.value(),
            self.power_granted.value(),
            n,
        );
        let framewise = if self.per_mtd_frames > 0 {
            mean_estimate(self.per_mtd.value(), self.per_mtd_sq.value(), self.per_mtd_frames)
        } else {
            Estimate { mean: 0.0, half_width: None }
        };
        let p_s = ratio_estimate(
            self.arrivals as f64,
            self.delivered as f64,
            self.arrivals_sq as f64,
            self.delivered_sq as f64,
            self.delivered_arrivals as f64,
            n,
        );
        let trunk_outage_rate = match mode {
            AccessMode::Trunked => {
                let q = self.trunk_outages as f64 / nf;
                Estimate {
                    mean: q,
                    half_width: (n >= 2).then(|| Z95 * (q * (1.0 - q) / nf).sqrt()),
                }
            }
            AccessMode::Baseline => Estimate::exact(0.0),
        };
        let (e_p_tr_total, e_p_tr_per_mtd, framewise, e_p_m) = match mode {
            AccessMode::Trunked => (
                e_p_tr_total,
                e_p_tr_per_mtd,
                framewise,
                e_p_tr_per_mtd.shifted(2.0 * p.pm_u),
            ),
            AccessMode::Baseline => (
                Estimate::exact(0.0),
                Estimate::exact(0.0),
                Estimate::exact(0.0),
                Estimate::exact(2.0 * p.pm_b),
            ),
        };
        SimSummary {
            frames: n,
            mean_arrivals: self.arrivals as f64 / nf,
            mean_singles: self.singles as f64 / nf,
            mean_granted: granted,
            e_n_aggregated: granted.scaled(per_second),
            e_n_delivered: delivered.scaled(per_second),
            e_p_tr_total,
            e_p_tr_per_mtd,
            e_p_tr_per_mtd_framewise: framewise,
            e_p_m,
            p_s,
            outage: Estimate {
                mean: 1.0 - p_s.mean,
                half_width: p_s.half_width,
            },
            trunk_outage_rate,
        }
    }
}
