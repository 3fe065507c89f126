//! Closed-form protocol metrics for one parameter point.
//!
//! Conventions where the closed forms admit more than one reading:
//!
//! * served MTDs per second is the *mean* `E[A]/(LT)`; the bare sum of
//!   probabilities is available from [`printed_served_rate`] for comparison.
//! * trunk power per machine is `E[P_tr]/E[A]`, with the per-frame total
//!   `E[P_tr]` reported alongside.
//! * the service probability is evaluated for a tagged arrival, whose
//!   competitors are Poisson(`λ_f`), giving `(1 − P_O) p_d e^{−λ_f/R}`.

use crate::error::Result;
use crate::link::{
    aggregate_rate, decode_probability, expected_trunk_power, tci_cutoff, tci_outage, TciPolicy,
};
use crate::occupancy::{binomial_pmf, singles_distribution, singles_distribution_approx, DiscreteDist};
use crate::params::{frame_layout, AccessMode, FrameLayout, SystemParams};

/// Analytic (or simulated) metrics at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    /// MTDs granted a data slot per second.
    pub e_n_aggregated: f64,
    /// MTDs whose packets reach the base station per second.
    pub e_n_delivered: f64,
    /// Mean trunk power per frame (W).
    pub e_p_tr_total: f64,
    /// Trunk power share per served MTD (W).
    pub e_p_tr_per_mtd: f64,
    /// Mean power spent per served MTD (W).
    pub e_p_m: f64,
    /// Probability that an arriving MTD is served.
    pub p_s: f64,
    pub outage: f64,
}

/// Law of the number of granted mini-slots `A`: the singles law thinned by
/// independent decoding with probability `p_d`.
pub fn served_distribution(r: u32, lambda_f: f64, p_d: f64, exact: bool) -> Result<DiscreteDist> {
    let singles = if exact {
        singles_distribution(r, lambda_f)?
    } else {
        singles_distribution_approx(r, lambda_f)?
    };
    Ok(thin(&singles, p_d))
}

fn thin(singles: &DiscreteDist, p_d: f64) -> DiscreteDist {
    let mut probs = vec![0.0; singles.max_support() + 1];
    for (s, ps) in singles.iter() {
        if ps == 0.0 {
            continue;
        }
        for (a, pa) in binomial_pmf(s as u32, p_d).into_iter().enumerate() {
            probs[a] += pa * ps;
        }
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p = (*p / total).clamp(0.0, 1.0));
    DiscreteDist::new(0, probs).expect("thinning preserves normalisation")
}

/// The served-rate expression read literally as `Σ_a Pr(A = a) / (LT)`.
///
/// This is always `1/(LT)` up to rounding; it is reported next to the mean
/// reading so the two can be compared.
pub fn printed_served_rate(served: &DiscreteDist, layout: &FrameLayout, p: &SystemParams) -> f64 {
    served.total() / layout.frame_duration(p)
}

/// `(aggregated, delivered)` MTDs per second.
pub fn expected_served(
    p: &SystemParams,
    layout: &FrameLayout,
    mode: AccessMode,
    exact: bool,
) -> Result<(f64, f64)> {
    let served = served_distribution(p.r, layout.lambda_f, decode_probability(p, mode), exact)?;
    Ok(served_rates(&served, p, layout, mode))
}

fn served_rates(served: &DiscreteDist, p: &SystemParams, layout: &FrameLayout, mode: AccessMode) -> (f64, f64) {
    let aggregated = served.mean() / layout.frame_duration(p);
    let delivered = match mode {
        AccessMode::Trunked => aggregated * (1.0 - p.po),
        AccessMode::Baseline => aggregated,
    };
    (aggregated, delivered)
}

/// `(total, per_mtd)` mean trunk power: the total averages the TCI power
/// over the served law, the per-MTD share divides it by `E[A]` (zero when
/// nobody is served).
pub fn expected_trunk_power_avg(
    p: &SystemParams,
    layout: &FrameLayout,
    policy: &TciPolicy,
    exact: bool,
) -> Result<(f64, f64)> {
    let served = served_distribution(
        p.r,
        layout.lambda_f,
        decode_probability(p, AccessMode::Trunked),
        exact,
    )?;
    Ok(trunk_power_from(&served, p, layout, policy))
}

fn trunk_power_from(served: &DiscreteDist, p: &SystemParams, layout: &FrameLayout, policy: &TciPolicy) -> (f64, f64) {
    let total: f64 = served
        .iter()
        .map(|(a, pa)| expected_trunk_power(aggregate_rate(a as u32, layout, p), policy, p) * pa)
        .sum();
    let mean_served = served.mean();
    let per_mtd = if mean_served > 0.0 { total / mean_served } else { 0.0 };
    (total, per_mtd)
}

/// Mean power per served machine: reservation plus data transmission at the
/// MTD's fixed power, plus the trunk share in trunked mode.
pub fn expected_power_per_machine(
    p: &SystemParams,
    layout: &FrameLayout,
    policy: &TciPolicy,
    mode: AccessMode,
    exact: bool,
) -> Result<f64> {
    match mode {
        AccessMode::Trunked => {
            let (_, per_mtd) = expected_trunk_power_avg(p, layout, policy, exact)?;
            Ok(2.0 * p.pm_u + per_mtd)
        }
        AccessMode::Baseline => Ok(2.0 * p.pm_b),
    }
}

/// Probability that a tagged arriving MTD picks a mini-slot nobody else
/// picks, is decoded, and (in trunked mode) rides a trunk that is not in
/// outage.
pub fn service_probability(p: &SystemParams, layout: &FrameLayout, policy: &TciPolicy, mode: AccessMode) -> f64 {
    let alone = (-layout.lambda_f / f64::from(p.r)).exp();
    let decoded = decode_probability(p, mode);
    match mode {
        AccessMode::Trunked => (1.0 - tci_outage(policy)) * decoded * alone,
        AccessMode::Baseline => decoded * alone,
    }
}

/// Every metric at one point.
pub fn evaluate_point(p: &SystemParams, mode: AccessMode, exact: bool) -> Result<MetricsReport> {
    let layout = frame_layout(p);
    let policy = tci_cutoff(p.po, p.hbar)?;
    let served = served_distribution(p.r, layout.lambda_f, decode_probability(p, mode), exact)?;
    let (e_n_aggregated, e_n_delivered) = served_rates(&served, p, &layout, mode);
    let (e_p_tr_total, e_p_tr_per_mtd, e_p_m) = match mode {
        AccessMode::Trunked => {
            let (total, per_mtd) = trunk_power_from(&served, p, &layout, &policy);
            (total, per_mtd, 2.0 * p.pm_u + per_mtd)
        }
        AccessMode::Baseline => (0.0, 0.0, 2.0 * p.pm_b),
    };
    let p_s = service_probability(p, &layout, &policy, mode);
    Ok(MetricsReport {
        e_n_aggregated,
        e_n_delivered,
        e_p_tr_total,
        e_p_tr_per_mtd,
        e_p_m,
        p_s,
        outage: 1.0 - p_s,
    })
}
