//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use sha2::{Digest, Sha256};

use common::{e1_quadrature, point, reference, rel, trunk_power_quadrature};
use m2m_trunk::analytics::evaluate_point;
use m2m_trunk::cli::csv::Table;
use m2m_trunk::cli::{cmd_analytic, cmd_simulate, cmd_validate, parse_grid, ModeSelection, SweepSpec};
use m2m_trunk::link::{exp_integral_e1, expected_trunk_power, tci_cutoff};
use m2m_trunk::occupancy::{
    enumerate_singles_counts, singles_distribution, singles_distribution_approx, singles_dp_table,
    singles_given_arrivals, singles_given_arrivals_exact,
};
use m2m_trunk::sim::{substream, FrameSimulator};
use m2m_trunk::{frame_layout, AccessMode, RawConfig};
use num_bigint::BigInt;
use num_rational::BigRational;

const ITERS: u64 = 100_000;
const SEED: u64 = 42;

type Outcome = Result<String, String>;

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn sweep(lambdas: &str, rs: &[u32], ks: &[u32], mode: ModeSelection) -> SweepSpec {
    SweepSpec {
        lambda_grid: parse_grid(lambdas).unwrap(),
        r_list: rs.to_vec(),
        k_list: ks.to_vec(),
        mode,
        iters: ITERS,
        seed: SEED,
        workers: workers(),
        exact: true,
    }
}

fn cfg() -> RawConfig {
    RawConfig::default()
}

/// `(lambda, value)` pairs of `metric` for the rows matching `r` and `k`.
fn series(csv: &str, metric: &str, r: u32, k: u32) -> Vec<(f64, f64)> {
    let t = Table::parse(csv).unwrap();
    let (cl, cm) = (t.column("lambda_per_s").unwrap(), t.column(metric).unwrap());
    let (cr, ck) = (t.column("R").unwrap(), t.column("K").unwrap());
    t.rows
        .iter()
        .filter(|row| row[cr] == r.to_string() && row[ck] == k.to_string())
        .map(|row| (row[cl].parse().unwrap(), row[cm].parse().unwrap()))
        .collect()
}

fn argmax(s: &[(f64, f64)]) -> (f64, f64) {
    *s.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap()
}

fn both<T>(a: T, s: T) -> [(&'static str, T); 2] {
    [("analytic", a), ("sim", s)]
}

fn peak_location() -> Outcome {
    let spec = sweep("100:1200:50", &[10], &[1], ModeSelection::Trunked);
    let a = cmd_analytic(&spec, &cfg()).map_err(|e| e.to_string())?;
    let s = cmd_simulate(&spec, &cfg()).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    let mut ok = true;
    for (src, csv) in both(&a, &s) {
        let (lambda, value) = argmax(&series(csv, "e_n_aggregated", 10, 1));
        ok &= (700.0..=900.0).contains(&lambda);
        detail.push(format!("{src} peak {value:.2}/s at lambda {lambda}"));
    }
    let detail = detail.join(", ");
    if ok { Ok(detail) } else { Err(detail) }
}

fn k_ordering() -> Outcome {
    let spec = sweep("100:1200:50", &[10], &[1, 3, 5], ModeSelection::Trunked);
    let a = cmd_analytic(&spec, &cfg()).map_err(|e| e.to_string())?;
    let s = cmd_simulate(&spec, &cfg()).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    let mut ok = true;
    for (src, csv) in both(&a, &s) {
        let peaks: Vec<f64> = [1, 3, 5].iter().map(|&k| argmax(&series(csv, "e_n_aggregated", 10, k)).1).collect();
        ok &= peaks[0] > peaks[1] && peaks[1] > peaks[2];
        detail.push(format!("{src} peaks {:.2} > {:.2} > {:.2}", peaks[0], peaks[1], peaks[2]));
    }
    let detail = detail.join(", ");
    if ok { Ok(detail) } else { Err(detail) }
}

fn power_halving() -> Outcome {
    let spec = sweep("250", &[10, 20], &[1], ModeSelection::Trunked);
    let a = cmd_analytic(&spec, &cfg()).map_err(|e| e.to_string())?;
    let s = cmd_simulate(&spec, &cfg()).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    let mut ok = true;
    for (src, csv) in both(&a, &s) {
        let p10 = series(csv, "e_p_m_w", 10, 1)[0].1;
        let p20 = series(csv, "e_p_m_w", 20, 1)[0].1;
        let ratio = p20 / p10;
        ok &= (0.35..=0.65).contains(&ratio);
        detail.push(format!("{src} ratio {ratio:.4}"));
    }
    let detail = detail.join(", ");
    if ok { Ok(detail) } else { Err(detail) }
}

fn outage_bound() -> Outcome {
    let spec = sweep("10:100:10", &[10], &[1], ModeSelection::Trunked);
    let a = cmd_analytic(&spec, &cfg()).map_err(|e| e.to_string())?;
    let s = cmd_simulate(&spec, &cfg()).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    let mut ok = true;
    for (src, csv) in both(&a, &s) {
        let out = series(csv, "outage", 10, 1);
        let max = out.iter().map(|x| x.1).fold(0.0, f64::max);
        let monotone = out.windows(2).all(|w| w[1].1 > w[0].1);
        ok &= max < 0.2 && monotone;
        detail.push(format!("{src} max {max:.4} monotone {monotone}"));
    }
    let detail = detail.join(", ");
    if ok { Ok(detail) } else { Err(detail) }
}

fn baseline_gap() -> Outcome {
    let base = reference();
    let expect = 2.0 * base.pm_b;
    let mut failures = Vec::new();
    let mut constant = true;
    let mut worst = 0.0f64;
    for lambda in parse_grid("50:1000:50").unwrap() {
        let p = base.at_point(lambda, base.r, base.k);
        let b = evaluate_point(&p, AccessMode::Baseline, true).map_err(|e| e.to_string())?;
        let t = evaluate_point(&p, AccessMode::Trunked, true).map_err(|e| e.to_string())?;
        constant &= b.e_p_m == expect;
        let ratio = t.e_p_m / b.e_p_m;
        worst = worst.max(ratio);
        if ratio >= 0.05 {
            failures.push(format!("lambda {lambda}: trunked {:.4e} W = {ratio:.4} x baseline", t.e_p_m));
        }
    }
    let head = format!(
        "baseline {expect:.4} W constant {constant}, R={} K={}, worst trunked/baseline {worst:.4}",
        base.r, base.k
    );
    if constant && failures.is_empty() {
        Ok(head)
    } else {
        Err(format!("{head}; {}", failures.join("; ")))
    }
}

fn occupancy_oracles() -> Outcome {
    for r in 1..=4u32 {
        for m in 0..=6u32 {
            let counts = enumerate_singles_counts(m, r).map_err(|e| e.to_string())?;
            let total = BigInt::from(r).pow(m);
            for (s, &c) in counts.iter().enumerate() {
                let want = BigRational::new(BigInt::from(c), total.clone());
                if singles_given_arrivals_exact(s as u32, m, r) != want {
                    return Err(format!("R={r} m={m} s={s} differs from enumeration"));
                }
            }
        }
    }
    let mut worst = 0.0f64;
    for r in 1..=20u32 {
        let dp = singles_dp_table(100, r).map_err(|e| e.to_string())?;
        for m in 0..=100u32 {
            for s in 0..=r {
                let got = singles_given_arrivals(s, m, r);
                let want = dp[m as usize].get(s as usize).copied().unwrap_or(0.0);
                let err = rel(got, want);
                worst = worst.max(err);
                if err > 1e-12 {
                    return Err(format!("R={r} m={m} s={s}: {got:e} vs DP {want:e}"));
                }
            }
        }
    }
    Ok(format!("rational match for R<=4 m<=6, worst DP relative error {worst:.2e}"))
}

fn approximation_tightening() -> Outcome {
    let tv = |lf: f64| -> Result<f64, String> {
        let e = singles_distribution(10, lf).map_err(|e| e.to_string())?;
        let a = singles_distribution_approx(10, lf).map_err(|e| e.to_string())?;
        Ok(e.tv_distance(&a))
    };
    let (high, low) = (tv(50.0)?, tv(2.0)?);
    let detail = format!("TV at lambda_f=50 {high:.4e}, at lambda_f=2 {low:.4e}");
    if high < low { Ok(detail) } else { Err(detail) }
}

fn tci_numerics() -> Outcome {
    let (lo, hi) = (1e-6f64.ln(), 50f64.ln());
    let mut worst_e1 = 0.0f64;
    for i in 0..200 {
        let x = (lo + (hi - lo) * f64::from(i) / 199.0).exp();
        worst_e1 = worst_e1.max(rel(exp_integral_e1(x).map_err(|e| e.to_string())?, e1_quadrature(x)));
    }

    let p = point(250.0, 10, 1);
    let policy = tci_cutoff(p.po, p.hbar).map_err(|e| e.to_string())?;
    let mut worst_p = 0.0f64;
    for i in 0..=16 {
        let rate = 10f64.powf(3.0 + 4.0 * f64::from(i) / 16.0);
        worst_p = worst_p.max(rel(expected_trunk_power(rate, &policy, &p), trunk_power_quadrature(rate, &policy, &p)));
    }

    let sim = FrameSimulator::new(&p, frame_layout(&p), policy, AccessMode::Trunked).map_err(|e| e.to_string())?;
    let outages = (0..ITERS).filter(|&j| sim.run(&mut substream(SEED, 0, j)).trunk_outage).count();
    let rate = outages as f64 / ITERS as f64;
    let se = (p.po * (1.0 - p.po) / ITERS as f64).sqrt();
    let z = (rate - p.po) / se;

    let detail = format!(
        "E1 worst rel {worst_e1:.2e}, trunk power worst rel {worst_p:.2e}, outage {rate:.5} ({z:+.2} SE)"
    );
    if worst_e1 < 1e-10 && worst_p < 1e-8 && z.abs() <= 3.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn validation_gate() -> Outcome {
    let spec = sweep("100,250,500,800", &[10, 20], &[1, 5], ModeSelection::Trunked);
    let v = cmd_validate(&spec, &cfg(), 0.05).map_err(|e| e.to_string())?;
    let failed: Vec<String> = v
        .points
        .iter()
        .filter(|p| !p.passed())
        .map(|p| format!("lambda {} R={} K={}", p.point.lambda, p.point.r, p.point.k))
        .collect();
    if failed.is_empty() {
        Ok(format!("{} points within 5% or CI", v.points.len()))
    } else {
        eprint!("{}", v.report);
        Err(format!("failing points: {}", failed.join("; ")))
    }
}

fn determinism() -> Outcome {
    let mut digests = Vec::new();
    for w in [1usize, 4, 8] {
        let spec = SweepSpec {
            workers: w,
            ..sweep("100,500,900", &[10, 20], &[1], ModeSelection::Both)
        };
        let csv = cmd_simulate(&spec, &cfg()).map_err(|e| e.to_string())?;
        let hex: String = Sha256::digest(csv.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        digests.push(hex);
    }
    let detail = format!("sha256 {}", &digests[0][..16]);
    if digests.iter().all(|d| *d == digests[0]) {
        Ok(detail)
    } else {
        Err(format!("digests differ: {digests:?}"))
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("AC1 peak location", peak_location),
        ("AC2 K ordering", k_ordering),
        ("AC3 power halving", power_halving),
        ("AC4 outage bound", outage_bound),
        ("AC5 baseline gap", baseline_gap),
        ("AC6 occupancy oracles", occupancy_oracles),
        ("AC7 approximation tightening", approximation_tightening),
        ("AC8 TCI numerics", tci_numerics),
        ("AC9 validation gate", validation_gate),
        ("AC10 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{name:<30} PASS  {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("{name:<30} FAIL  {detail} [{secs:.1}s]");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
