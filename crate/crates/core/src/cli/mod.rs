//! Sweep orchestration behind the `m2m-trunk` binary.
//!
//! Every command is a plain function of its inputs that returns the text to
//! write, so it can be driven from tests without spawning a process.

pub mod csv;
pub mod plot;

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytics::{evaluate_point, printed_served_rate, served_distribution, MetricsReport};
use crate::error::{Error, Result};
use crate::link::decode_probability;
use crate::params::{build_params, frame_layout, AccessMode, RawConfig, SystemParams};
use crate::sim::{run_replications, Estimate, SimSummary};

pub use csv::{fmt_sig9, CsvRow, Source, HEADER, METRICS};

/// Which schemes a sweep covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelection {
    Trunked,
    Baseline,
    Both,
}

impl ModeSelection {
    /// Modes in output order.
    pub fn modes(self) -> Vec<AccessMode> {
        match self {
            ModeSelection::Trunked => vec![AccessMode::Trunked],
            ModeSelection::Baseline => vec![AccessMode::Baseline],
            // alphabetical, matching the row sort
            ModeSelection::Both => vec![AccessMode::Baseline, AccessMode::Trunked],
        }
    }
}

impl FromStr for ModeSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trunked" => Ok(ModeSelection::Trunked),
            "baseline" => Ok(ModeSelection::Baseline),
            "both" => Ok(ModeSelection::Both),
            other => Err(Error::InvalidArgument(format!(
                "mode must be trunked, baseline or both, got `{other}`"
            ))),
        }
    }
}

/// Axes and settings of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub lambda_grid: Vec<f64>,
    pub r_list: Vec<u32>,
    pub k_list: Vec<u32>,
    pub mode: ModeSelection,
    pub iters: u64,
    pub seed: u64,
    pub workers: usize,
    pub exact: bool,
}

impl SweepSpec {
    /// A sweep over the single point named in `cfg`.
    pub fn from_config(cfg: &RawConfig) -> Self {
        SweepSpec {
            lambda_grid: vec![cfg.lambda_per_s],
            r_list: vec![cfg.r],
            k_list: vec![cfg.k],
            mode: ModeSelection::Trunked,
            iters: 100_000,
            seed: 42,
            workers: 1,
            exact: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda_grid.is_empty() {
            return Err(Error::InvalidArgument("empty lambda grid".into()));
        }
        if self.r_list.is_empty() || self.k_list.is_empty() {
            return Err(Error::InvalidArgument("empty R or K list".into()));
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::InvalidArgument(format!("lambda {l} must be finite and >= 0")));
        }
        if self.r_list.contains(&0) || self.k_list.contains(&0) {
            return Err(Error::InvalidArgument("R and K must be >= 1".into()));
        }
        if self.iters == 0 {
            return Err(Error::InvalidArgument("iters must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be >= 1".into()));
        }
        Ok(())
    }

    /// Grid points sorted by `(mode, R, K, λ)`; the position is the point
    /// index used to derive random streams.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut lambdas = self.lambda_grid.clone();
        lambdas.sort_by(f64::total_cmp);
        lambdas.dedup();
        let mut rs = self.r_list.clone();
        rs.sort_unstable();
        rs.dedup();
        let mut ks = self.k_list.clone();
        ks.sort_unstable();
        ks.dedup();

        let mut out = Vec::new();
        for mode in self.mode.modes() {
            for &r in &rs {
                for &k in &ks {
                    for &lambda in &lambdas {
                        out.push(SweepPoint {
                            index: out.len() as u64,
                            mode,
                            lambda,
                            r,
                            k,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: u64,
    pub mode: AccessMode,
    pub lambda: f64,
    pub r: u32,
    pub k: u32,
}

impl SweepPoint {
    pub fn params(&self, base: &SystemParams) -> SystemParams {
        base.at_point(self.lambda, self.r, self.k)
    }
}

/// Parses `start:stop:step` (stop included when it lies on the grid) or a
/// comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("`{s}` is not a number")))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(Error::InvalidArgument(format!("range `{text}` must be start:stop:step")));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidArgument("range step must be positive".into()));
        }
        if stop < start {
            return Ok(Vec::new());
        }
        let count = ((stop - start) / step + 1e-9).floor() as u64 + 1;
        Ok((0..count).map(|i| start + i as f64 * step).collect())
    } else {
        text.split(',').map(num).collect()
    }
}

pub fn parse_int_list(text: &str) -> Result<Vec<u32>> {
    parse_grid(text)?
        .into_iter()
        .map(|v| {
            if v.fract() == 0.0 && v >= 0.0 && v <= f64::from(u32::MAX) {
                Ok(v as u32)
            } else {
                Err(Error::InvalidArgument(format!("{v} is not a non-negative integer")))
            }
        })
        .collect()
}

fn analytic_rows(spec: &SweepSpec, base: &SystemParams) -> Result<Vec<CsvRow>> {
    spec.points()
        .par_iter()
        .map(|pt| {
            let p = pt.params(base);
            let layout = frame_layout(&p);
            let report = evaluate_point(&p, pt.mode, spec.exact)?;
            Ok(CsvRow::analytic(pt.mode, pt.lambda, pt.r, pt.k, &layout, report))
        })
        .collect()
}

/// One analytic row per grid point.
pub fn cmd_analytic(spec: &SweepSpec, cfg: &RawConfig) -> Result<String> {
    spec.validate()?;
    let base = build_params(cfg)?;
    Ok(csv::render(&analytic_rows(spec, &base)?))
}

fn simulate_point(spec: &SweepSpec, base: &SystemParams, pt: &SweepPoint) -> Result<SimSummary> {
    let p = pt.params(base);
    let stats = run_replications(&p, pt.mode, spec.iters, spec.seed, spec.workers, pt.index)?;
    Ok(stats.summary(&p, &frame_layout(&p), pt.mode))
}

/// One simulated row per grid point, with 95% intervals.
pub fn cmd_simulate(spec: &SweepSpec, cfg: &RawConfig) -> Result<String> {
    spec.validate()?;
    let base = build_params(cfg)?;
    let mut rows = Vec::new();
    for pt in spec.points() {
        let summary = simulate_point(spec, &base, &pt)?;
        let layout = frame_layout(&pt.params(&base));
        rows.push(CsvRow::simulated(pt.mode, pt.lambda, pt.r, pt.k, &layout, &summary, spec.iters, spec.seed));
    }
    Ok(csv::render(&rows))
}

/// Outcome of one analytic-versus-simulated comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub metric: &'static str,
    pub analytic: f64,
    pub simulated: f64,
    pub half_width: Option<f64>,
    pub passed: Option<bool>,
}

impl Check {
    fn new(metric: &'static str, analytic: f64, sim: Estimate, tolerance: f64) -> Self {
        let passed = sim.mean.is_finite().then(|| {
            let allowed = (tolerance * analytic.abs()).max(sim.half_width.unwrap_or(0.0));
            (analytic - sim.mean).abs() <= allowed
        });
        Check {
            metric,
            analytic,
            simulated: sim.mean,
            half_width: sim.half_width,
            passed,
        }
    }

    fn exact(metric: &'static str, analytic: f64, simulated: f64) -> Self {
        Check {
            metric,
            analytic,
            simulated,
            half_width: Some(0.0),
            passed: Some(analytic == simulated),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PointValidation {
    pub point: SweepPoint,
    pub analytic: MetricsReport,
    pub simulated: SimSummary,
    pub checks: Vec<Check>,
}

impl PointValidation {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed != Some(false))
    }
}

#[derive(Debug, Clone)]
pub struct Validation {
    pub points: Vec<PointValidation>,
    /// Human-readable report.
    pub report: String,
    /// Analytic and simulated rows for every point.
    pub csv: String,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.points.iter().all(PointValidation::passed)
    }
}

/// Compares analytic and simulated metrics at every grid point.
///
/// A metric passes when `|analytic − sim| ≤ max(tolerance·|analytic|, CI)`.
/// In baseline mode the per-machine power must match `2·P_{m,B}` exactly.
pub fn cmd_validate(spec: &SweepSpec, cfg: &RawConfig, tolerance: f64) -> Result<Validation> {
    spec.validate()?;
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance {tolerance} must be >= 0")));
    }
    let base = build_params(cfg)?;
    let analytic = analytic_rows(spec, &base)?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut report = String::new();

    for (pt, arow) in spec.points().into_iter().zip(analytic) {
        let p = pt.params(&base);
        let layout = frame_layout(&p);
        let sim = simulate_point(spec, &base, &pt)?;
        let a = arow.metrics;

        let mut checks = vec![
            Check::new("e_n_aggregated", a.e_n_aggregated, sim.e_n_aggregated, tolerance),
            Check::new("p_s", a.p_s, sim.p_s, tolerance),
        ];
        match pt.mode {
            AccessMode::Trunked => {
                checks.push(Check::new("e_p_tr_per_mtd", a.e_p_tr_per_mtd, sim.e_p_tr_per_mtd, tolerance))
            }
            AccessMode::Baseline => checks.push(Check::exact("e_p_m", a.e_p_m, sim.e_p_m.mean)),
        }

        let served = served_distribution(p.r, layout.lambda_f, decode_probability(&p, pt.mode), spec.exact)?;
        let _ = writeln!(
            report,
            "point {} mode={} R={} K={} lambda={} (n={}, L={}, lambda_f={})",
            pt.index,
            pt.mode,
            pt.r,
            pt.k,
            fmt_sig9(pt.lambda),
            layout.n,
            layout.l,
            fmt_sig9(layout.lambda_f)
        );
        let _ = writeln!(
            report,
            "  served/s: mean reading {}  printed-sum reading {}",
            fmt_sig9(a.e_n_aggregated),
            fmt_sig9(printed_served_rate(&served, &layout, &p))
        );
        let _ = writeln!(
            report,
            "  trunk power: per-frame total {} W  per-MTD share {} W  (sim per-frame mean {} W, sim per-MTD framewise {} W)",
            fmt_sig9(a.e_p_tr_total),
            fmt_sig9(a.e_p_tr_per_mtd),
            fmt_sig9(sim.e_p_tr_total.mean),
            fmt_sig9(sim.e_p_tr_per_mtd_framewise.mean)
        );
        for c in &checks {
            let verdict = match c.passed {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "SKIP",
            };
            let _ = writeln!(
                report,
                "  {:<16} analytic {:<16} sim {:<16} ci {:<16} {}",
                c.metric,
                fmt_sig9(c.analytic),
                fmt_sig9(c.simulated),
                c.half_width.map(fmt_sig9).unwrap_or_else(|| "n/a".into()),
                verdict
            );
        }

        rows.push(arow.clone());
        rows.push(CsvRow::simulated(pt.mode, pt.lambda, pt.r, pt.k, &layout, &sim, spec.iters, spec.seed));
        points.push(PointValidation {
            point: pt,
            analytic: a,
            simulated: sim,
            checks,
        });
    }

    let failed = points.iter().filter(|p| !p.passed()).count();
    let _ = writeln!(
        report,
        "{} of {} points passed at tolerance {}: {}",
        points.len() - failed,
        points.len(),
        fmt_sig9(tolerance),
        if failed == 0 { "PASS" } else { "FAIL" }
    );
    Ok(Validation {
        points,
        report,
        csv: csv::render(&rows),
    })
}

/// Renders one metric of a sweep CSV as an SVG line chart.
pub fn cmd_plot(csv_text: &str, metric: &str) -> Result<String> {
    plot::render_svg(&csv::Table::parse(csv_text)?, metric)
}
