//! Singly occupied mini-slots under framed slotted ALOHA.
//!
//! `m` contenders each pick one of `R` mini-slots uniformly; a mini-slot is
//! *single* when exactly one contender picked it. This module provides the
//! conditional law of the number of singles given `m` (exact, in big-integer
//! arithmetic), its Poisson mixture, the binomial large-load approximation,
//! and two independent oracles: exhaustive enumeration for tiny instances and
//! a dynamic program over per-bin occupancy for larger ones.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Tail mass at which the Poisson mixture is truncated.
pub const POISSON_TAIL: f64 = 1e-12;
/// Largest total deviation from one that is silently renormalised.
pub const RENORM_TOLERANCE: f64 = 1e-9;
/// Largest `R^m` the enumeration oracle accepts.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// A finite distribution on the integers `min_support, min_support + 1, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    min_support: usize,
    probs: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(min_support: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > RENORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(DiscreteDist { min_support, probs })
    }

    /// All mass on `value`, supported on `0..=max`.
    pub fn point_mass(value: usize, max: usize) -> Self {
        let mut probs = vec![0.0; max + 1];
        probs[value] = 1.0;
        DiscreteDist {
            min_support: 0,
            probs,
        }
    }

    pub fn min_support(&self) -> usize {
        self.min_support
    }

    pub fn max_support(&self) -> usize {
        self.min_support + self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn pmf(&self, value: usize) -> f64 {
        value
            .checked_sub(self.min_support)
            .and_then(|i| self.probs.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.min_support + i, p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, p)| v as f64 * p).sum()
    }

    /// Total-variation distance `½ Σ |p − q|` over the union of supports.
    pub fn tv_distance(&self, other: &DiscreteDist) -> f64 {
        let lo = self.min_support.min(other.min_support);
        let hi = self.max_support().max(other.max_support());
        0.5 * (lo..=hi)
            .map(|v| (self.pmf(v) - other.pmf(v)).abs())
            .sum::<f64>()
    }
}

fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc *= n - j;
        acc /= j + 1;
    }
    acc
}

/// Falling factorial `m (m−1) … (m−s+1)`.
fn falling(m: u32, s: u32) -> BigUint {
    (0..s).fold(BigUint::one(), |acc, k| acc * (m - k))
}

/// Number of ways to drop `v` distinguishable balls into `u` distinguishable
/// bins so that no bin holds exactly one ball.
///
/// Inclusion–exclusion over the set of bins forced to be singles:
/// `G(u, v) = Σ_t (−1)^t · [v(v−1)…(v−t+1)]·[u(u−1)…(u−t+1)] / t! · (u−t)^(v−t)`,
/// where the `t = 0` term is `u^v` with `0^0 = 1`.
pub fn g_count(u: u32, v: u32) -> BigUint {
    let mut total = BigInt::from(BigUint::from(u).pow(v));
    let mut paired = BigUint::one();
    let mut fact = BigUint::one();
    for t in 1..=u.min(v) {
        paired *= (v - t + 1) * (u - t + 1);
        fact *= t;
        let term = BigInt::from(&paired / &fact * BigUint::from(u - t).pow(v - t));
        if t % 2 == 1 {
            total -= term;
        } else {
            total += term;
        }
    }
    debug_assert!(!total.is_negative());
    total.to_biguint().unwrap_or_default()
}

/// `Pr(S = s | m, R)` as an exact rational.
pub fn singles_given_arrivals_exact(s: u32, m: u32, r: u32) -> BigRational {
    assert!(r >= 1, "at least one mini-slot is required");
    if s > m || s > r {
        return BigRational::zero();
    }
    let num = binomial(r, s) * falling(m, s) * g_count(r - s, m - s);
    let den = BigUint::from(r).pow(m);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `Pr(S = s | m, R)`: probability that exactly `s` of `R` mini-slots are
/// singles when `m` contenders choose uniformly.
pub fn singles_given_arrivals(s: u32, m: u32, r: u32) -> f64 {
    singles_given_arrivals_exact(s, m, r).to_f64().unwrap_or(0.0)
}

/// Row `Pr(S = s | m, R)` for `s = 0..=R`.
pub fn singles_row(m: u32, r: u32) -> Vec<f64> {
    (0..=r).map(|s| singles_given_arrivals(s, m, r)).collect()
}

/// Enumerates all `R^m` assignments and counts, for each `s`, those with
/// exactly `s` singly occupied bins.
pub fn enumerate_singles_counts(m: u32, r: u32) -> Result<Vec<u64>> {
    assert!(r >= 1, "at least one mini-slot is required");
    let total = u64::from(r)
        .checked_pow(m)
        .filter(|&t| t <= ENUMERATION_LIMIT)
        .ok_or(Error::EnumerationTooLarge { r, m })?;
    let mut counts = vec![0u64; r as usize + 1];
    let mut choice = vec![0u32; m as usize];
    let mut occupancy = vec![0u32; r as usize];
    for _ in 0..total {
        occupancy.iter_mut().for_each(|o| *o = 0);
        for &c in &choice {
            occupancy[c as usize] += 1;
        }
        let singles = occupancy.iter().filter(|&&o| o == 1).count();
        counts[singles] += 1;
        // odometer increment
        for digit in choice.iter_mut() {
            *digit += 1;
            if *digit < r {
                break;
            }
            *digit = 0;
        }
    }
    Ok(counts)
}

/// Brute-force `Pr(S = s | m, R)` by exhaustive enumeration.
pub fn singles_given_arrivals_oracle(s: u32, m: u32, r: u32) -> Result<f64> {
    let counts = enumerate_singles_counts(m, r)?;
    let total: u64 = counts.iter().sum();
    Ok(counts.get(s as usize).map_or(0.0, |&c| c as f64 / total as f64))
}

/// Table `[m][s]` of `Pr(S = s | m, R)` for `m = 0..=m_max`, computed by a
/// dynamic program over bins in floating point.
///
/// Each bin's occupancy `c` is weighted `1/c!`; after all `R` bins, the
/// coefficient of `m` balls times `m!/R^m` is the probability. Only
/// non-negative terms are summed, so relative accuracy is near machine
/// precision. Limited to `m_max ≤ 150` to stay clear of factorial overflow.
pub fn singles_dp_table(m_max: u32, r: u32) -> Result<Vec<Vec<f64>>> {
    if r == 0 {
        return Err(Error::InvalidArgument("R must be >= 1".into()));
    }
    if m_max > 150 {
        return Err(Error::InvalidArgument("DP oracle supports m <= 150".into()));
    }
    let mm = m_max as usize;
    let rr = r as usize;
    let mut inv_fact = vec![1.0f64; mm + 1];
    for c in 1..=mm {
        inv_fact[c] = inv_fact[c - 1] / c as f64;
    }
    // dp[j][s]: weighted count using j balls with s singles so far
    let mut dp = vec![vec![0.0f64; rr + 1]; mm + 1];
    dp[0][0] = 1.0;
    for _bin in 0..rr {
        let mut next = vec![vec![0.0f64; rr + 1]; mm + 1];
        for j in 0..=mm {
            for s in 0..=rr {
                let w = dp[j][s];
                if w == 0.0 {
                    continue;
                }
                for c in 0..=(mm - j) {
                    let s2 = if c == 1 { s + 1 } else { s };
                    if s2 > rr {
                        continue;
                    }
                    next[j + c][s2] += w * inv_fact[c];
                }
            }
        }
        dp = next;
    }
    let mut table = Vec::with_capacity(mm + 1);
    let mut scale = 1.0f64; // m! / R^m
    for m in 0..=mm {
        if m > 0 {
            scale *= m as f64 / r as f64;
        }
        table.push(dp[m].iter().map(|&w| w * scale).collect());
    }
    Ok(table)
}

fn ln_factorial(m: u64) -> f64 {
    if m <= 170 {
        (2..=m).fold(1.0f64, |acc, k| acc * k as f64).ln()
    } else {
        // Stirling series; error below 1e-17 relative for m > 170
        let x = m as f64;
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
            + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
    }
}

/// Poisson probability `λ^m e^{−λ} / m!`, evaluated in the log domain.
pub fn poisson_pmf(m: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    (m as f64 * lambda.ln() - lambda - ln_factorial(m)).exp()
}

/// Largest `m` the Poisson mixture may reach before giving up.
pub fn truncation_cap(lambda_f: f64) -> u64 {
    (20.0 * lambda_f + 200.0).floor() as u64
}

/// Smallest `M` such that the Poisson mass above `M` is below
/// [`POISSON_TAIL`], together with the pmf values `0..=M`.
pub fn poisson_window(lambda_f: f64) -> Result<Vec<f64>> {
    let cap = truncation_cap(lambda_f);
    let mut weights = Vec::new();
    let mut cum = 0.0;
    for m in 0..=cap {
        let w = poisson_pmf(m, lambda_f);
        weights.push(w);
        cum += w;
        // past the mode the remaining tail is bounded by 1 − cum
        if 1.0 - cum < POISSON_TAIL && m as f64 >= lambda_f {
            return Ok(weights);
        }
    }
    Err(Error::NonConvergence(format!(
        "Poisson tail for lambda_f = {lambda_f} still above {POISSON_TAIL} at m = {cap}"
    )))
}

fn check_inputs(r: u32, lambda_f: f64) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument("R must be >= 1".into()));
    }
    if !(lambda_f >= 0.0 && lambda_f.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda_f = {lambda_f} must be finite and >= 0")));
    }
    Ok(())
}

/// `Pr(S = s | R)` with Poisson(`λ_f`) contenders, summing the exact
/// conditional law until the Poisson tail drops below [`POISSON_TAIL`].
pub fn singles_distribution(r: u32, lambda_f: f64) -> Result<DiscreteDist> {
    check_inputs(r, lambda_f)?;
    if lambda_f == 0.0 {
        return Ok(DiscreteDist::point_mass(0, r as usize));
    }
    let weights = poisson_window(lambda_f)?;
    let mut probs = vec![0.0; r as usize + 1];
    for (m, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let m = m as u32;
        for s in 0..=r.min(m) {
            probs[s as usize] += w * singles_given_arrivals(s, m, r);
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() >= RENORM_TOLERANCE {
        return Err(Error::NonConvergence(format!(
            "singles distribution mass {total} deviates from 1"
        )));
    }
    probs.iter_mut().for_each(|p| *p /= total);
    DiscreteDist::new(0, probs)
}

/// Binomial approximation to `Pr(S = s | R)`: each mini-slot is single
/// independently with probability `(λ_f/R) e^{−λ_f/R}`. With Poisson
/// arrivals the per-slot counts are independent, so this agrees with
/// [`singles_distribution`] up to rounding.
pub fn singles_distribution_approx(r: u32, lambda_f: f64) -> Result<DiscreteDist> {
    check_inputs(r, lambda_f)?;
    let load = lambda_f / r as f64;
    let p_single = load * (-load).exp();
    DiscreteDist::new(0, binomial_pmf(r, p_single))
}

/// `C(n, k) p^k (1−p)^(n−k)` for `k = 0..=n`.
pub fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut coeff = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            coeff = coeff * f64::from(n - k + 1) / f64::from(k);
        }
        out.push(coeff * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32));
    }
    out
}
