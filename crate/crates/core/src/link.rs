//! Physical-layer model: block Rayleigh fading, SNR, reservation decoding,
//! the aggregated trunk rate, Shannon power inversion and truncated channel
//! inversion (TCI).
//!
//! The small-scale power gain `h` is exponential with mean `h̄` (Rayleigh
//! envelope). Links are noise-limited; there is no interference term.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::params::{AccessMode, FrameLayout, SystemParams};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this argument `E1` is summed as a power series, above it the
/// continued fraction is used.
pub const E1_CROSSOVER: f64 = 1.0;

/// Draws a channel power gain with mean `hbar`.
pub fn rayleigh_sample<R: Rng + ?Sized>(rng: &mut R, hbar: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    hbar * e
}

/// Large-scale receive gain `x^{−α} K_D`.
fn path_gain(x: f64, p: &SystemParams) -> f64 {
    x.powf(-p.alpha) * p.k_d
}

/// `γ = P h x^{−α} K_D / σ²`.
pub fn snr(power: f64, h: f64, x: f64, p: &SystemParams) -> f64 {
    power * h * path_gain(x, p) / p.sigma2
}

/// Probability that a lone reservation token clears `Γ_m` under Rayleigh
/// fading: `exp(−Γ_m σ² / (P_m h̄ x^{−α} K_D))`.
///
/// Trunked MTDs talk to the user at `x_m` with `P_{m,U}`; baseline MTDs talk
/// to the base station at `x_U` with `P_{m,B}`.
pub fn decode_probability(p: &SystemParams, mode: AccessMode) -> f64 {
    let mean_snr = snr(mode.mtd_power(p), p.hbar, mode.mtd_distance(p), p);
    (-p.gamma_m / mean_snr).exp()
}

/// Uplink rate needed to ship the user payload plus `a` MTD payloads in the
/// `K + R − a` slots left after aggregation.
pub fn aggregate_rate(a: u32, layout: &FrameLayout, p: &SystemParams) -> f64 {
    assert!(a <= p.r, "cannot grant {a} of {} mini-slots", p.r);
    let slots = f64::from(p.k + p.r - a);
    (layout.d_u + f64::from(a) * p.d_m) / (p.t * slots)
}

/// `σ² / (x_U^{−α} K_D)`: noise referred through the user's uplink path loss.
fn uplink_noise(p: &SystemParams) -> f64 {
    p.sigma2 / path_gain(p.x_u, p)
}

/// `2^{rate/W} − 1`
fn spectral_gap(rate: f64, p: &SystemParams) -> f64 {
    (rate / p.w * std::f64::consts::LN_2).exp_m1()
}

/// Power the user needs on gain `h` to sustain `rate` over the uplink.
pub fn instantaneous_power(rate: f64, h: f64, p: &SystemParams) -> f64 {
    spectral_gap(rate, p) * uplink_noise(p) / h
}

/// Shannon rate of the uplink at `power` on gain `h`.
pub fn shannon_rate(power: f64, h: f64, p: &SystemParams) -> f64 {
    p.w * (power * h / uplink_noise(p)).ln_1p() / std::f64::consts::LN_2
}

/// Truncated channel inversion: invert the fade when `h ≥ mu`, stay silent
/// otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TciPolicy {
    pub mu: f64,
    pub outage: f64,
    pub hbar: f64,
}

/// Cutoff that yields outage `po`: `μ = −h̄ ln(1 − P_O)`.
pub fn tci_cutoff(po: f64, hbar: f64) -> Result<TciPolicy> {
    if !(po > 0.0 && po < 1.0) {
        return Err(Error::InvalidArgument(format!("outage {po} must lie in (0, 1)")));
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidArgument(format!("hbar {hbar} must be positive")));
    }
    Ok(TciPolicy {
        mu: -hbar * (-po).ln_1p(),
        outage: po,
        hbar,
    })
}

/// Outage implied by the cutoff: `1 − exp(−μ/h̄)`.
pub fn tci_outage(policy: &TciPolicy) -> f64 {
    -(-policy.mu / policy.hbar).exp_m1()
}

/// Mean uplink power to sustain `rate` under TCI, counting silent frames as
/// zero power: `(2^{rate/W} − 1) σ² / (h̄ x_U^{−α} K_D) · E1(μ/h̄)`.
pub fn expected_trunk_power(rate: f64, policy: &TciPolicy, p: &SystemParams) -> f64 {
    if rate == 0.0 {
        return 0.0;
    }
    let e1 = exp_integral_e1(policy.mu / policy.hbar)
        .expect("TCI cutoff is strictly positive");
    spectral_gap(rate, p) * uplink_noise(p) / policy.hbar * e1
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{−t}/t dt` for `x > 0`.
///
/// Power series up to [`E1_CROSSOVER`], modified Lentz continued fraction
/// above it. Relative error stays below 1e-13 on `[1e-6, 50]`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::InvalidArgument(format!("E1 needs x > 0, got {x}")));
    }
    if x.is_infinite() {
        Ok(0.0)
    } else if x <= E1_CROSSOVER {
        Ok(e1_series(x))
    } else {
        Ok(e1_continued_fraction(x))
    }
}

fn e1_series(x: f64) -> f64 {
    // E1(x) = −γ − ln x − Σ_{k≥1} (−x)^k / (k·k!)
    let mut sum = 0.0;
    let mut term = 1.0; // (−x)^k / k!
    for k in 1..200 {
        term *= -x / k as f64;
        let contrib = term / k as f64;
        sum += contrib;
        if contrib.abs() < f64::EPSILON * sum.abs() * 1e-2 {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

fn e1_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}
