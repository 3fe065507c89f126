#![allow(dead_code)]

use m2m_trunk::link::{instantaneous_power, TciPolicy};
use m2m_trunk::{build_params, RawConfig, SystemParams};

pub fn reference() -> SystemParams {
    build_params(&RawConfig::default()).unwrap()
}

pub fn point(lambda: f64, r: u32, k: u32) -> SystemParams {
    reference().at_point(lambda, r, k)
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Adaptive Simpson with absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // split into panels first so the recursion starts from a sane estimate
    let panels = 64;
    let h = (b - a) / f64::from(panels);
    (0..panels)
        .map(|i| {
            let lo = a + h * f64::from(i);
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = simpson(lo, hi, fa, fm, fb);
            adapt(f, lo, hi, fa, fm, fb, whole, tol / f64::from(panels), 40)
        })
        .sum()
}

/// `E1(x) = ∫_{ln x}^{∞} exp(-e^y) dy`, cut where the tail is below `e^-40`
/// relative.
pub fn e1_quadrature(x: f64) -> f64 {
    let f = |y: f64| (-y.exp()).exp();
    let lo = x.ln();
    let hi = (x + 40.0).ln();
    // E1(x) ≥ e^-x/(x+1)/2 gives a safe scale for the absolute tolerance
    let scale = (-x).exp() / (x + 1.0) / 2.0;
    integrate(&f, lo, hi, 1e-14 * scale)
}

/// Mean trunk power at `rate`: the instantaneous power integrated against
/// the exponential gain density above the cutoff, with `h = e^y`.
pub fn trunk_power_quadrature(rate: f64, policy: &TciPolicy, p: &SystemParams) -> f64 {
    let hbar = policy.hbar;
    let f = |y: f64| {
        let h = y.exp();
        instantaneous_power(rate, h, p) * (-h / hbar).exp() / hbar * h
    };
    let lo = policy.mu.ln();
    let hi = (policy.mu + 45.0 * hbar).ln();
    let scale = instantaneous_power(rate, policy.mu, p) * policy.mu / hbar;
    integrate(&f, lo, hi, 1e-13 * scale)
}
