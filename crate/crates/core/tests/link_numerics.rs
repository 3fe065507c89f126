mod common;

use common::{e1_quadrature, point, rel, trunk_power_quadrature};
use m2m_trunk::link::{exp_integral_e1, expected_trunk_power, tci_cutoff, tci_outage};
use m2m_trunk::sim::{substream, FrameSimulator};
use m2m_trunk::{frame_layout, AccessMode};

#[test]
fn quadrature_oracle_reproduces_known_values() {
    assert!(rel(e1_quadrature(1.0), 0.219_383_934_395_520_27) < 1e-12);
    assert!(rel(e1_quadrature(10.0), 4.156_968_929_685_324_3e-6) < 1e-12);
}

#[test]
fn e1_matches_quadrature_on_log_grid() {
    let (lo, hi) = (1e-6f64.ln(), 50f64.ln());
    let mut worst = 0.0f64;
    for i in 0..200 {
        let x = (lo + (hi - lo) * f64::from(i) / 199.0).exp();
        let err = rel(exp_integral_e1(x).unwrap(), e1_quadrature(x));
        worst = worst.max(err);
        assert!(err < 1e-10, "x = {x}: rel err {err}");
    }
    eprintln!("worst E1 relative error {worst:e}");
}

#[test]
fn e1_is_continuous_at_crossover() {
    let below = exp_integral_e1(1.0 - 1e-12).unwrap();
    let above = exp_integral_e1(1.0 + 1e-12).unwrap();
    assert!(rel(below, above) < 1e-11);
}

#[test]
fn trunk_power_matches_direct_quadrature() {
    let p = point(250.0, 10, 1);
    let policy = tci_cutoff(p.po, p.hbar).unwrap();
    for i in 0..=16 {
        let rate = 10f64.powf(3.0 + 4.0 * f64::from(i) / 16.0);
        let closed = expected_trunk_power(rate, &policy, &p);
        let direct = trunk_power_quadrature(rate, &policy, &p);
        assert!(rel(closed, direct) < 1e-8, "rate {rate}: {closed} vs {direct}");
    }
}

#[test]
fn trunk_power_other_outage_targets() {
    let p = point(250.0, 10, 1);
    for po in [1e-4, 0.05, 0.3] {
        let policy = tci_cutoff(po, p.hbar).unwrap();
        assert!((tci_outage(&policy) - po).abs() < 1e-14);
        let closed = expected_trunk_power(1e5, &policy, &p);
        assert!(rel(closed, trunk_power_quadrature(1e5, &policy, &p)) < 1e-8);
    }
}

#[test]
fn empirical_trunk_outage() {
    let p = point(250.0, 10, 1);
    let layout = frame_layout(&p);
    let policy = tci_cutoff(p.po, p.hbar).unwrap();
    let sim = FrameSimulator::new(&p, layout, policy, AccessMode::Trunked).unwrap();
    let n = 100_000u64;
    let outages = (0..n).filter(|&j| sim.run(&mut substream(42, 0, j)).trunk_outage).count();
    let rate = outages as f64 / n as f64;
    let se = (p.po * (1.0 - p.po) / n as f64).sqrt();
    assert!((rate - p.po).abs() <= 3.0 * se, "{rate} vs {} ± {}", p.po, 3.0 * se);
}
