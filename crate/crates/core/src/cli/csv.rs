//! Fixed-layout CSV rows and number formatting.

use std::fmt::Write as _;

use crate::analytics::MetricsReport;
use crate::error::{Error, Result};
use crate::params::{AccessMode, FrameLayout};
use crate::sim::SimSummary;

pub const HEADER: [&str; 19] = [
    "mode",
    "lambda_per_s",
    "R",
    "K",
    "n",
    "L",
    "lambda_f",
    "source",
    "e_n_aggregated",
    "e_n_delivered",
    "e_p_tr_total_w",
    "e_p_tr_per_mtd_w",
    "e_p_m_w",
    "p_s",
    "outage",
    "iters",
    "seed",
    "ci_e_n",
    "ci_p_m",
];

/// Numeric columns that can be plotted.
pub const METRICS: [&str; 7] = [
    "e_n_aggregated",
    "e_n_delivered",
    "e_p_tr_total_w",
    "e_p_tr_per_mtd_w",
    "e_p_m_w",
    "p_s",
    "outage",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Source {
    Analytic,
    Sim,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::Sim => "sim",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub mode: AccessMode,
    pub lambda_per_s: f64,
    pub r: u32,
    pub k: u32,
    pub n: u32,
    pub l: u32,
    pub lambda_f: f64,
    pub source: Source,
    pub metrics: MetricsReport,
    pub iters: Option<u64>,
    pub seed: Option<u64>,
    pub ci_e_n: Option<f64>,
    pub ci_p_m: Option<f64>,
}

impl CsvRow {
    pub fn analytic(mode: AccessMode, lambda: f64, r: u32, k: u32, layout: &FrameLayout, metrics: MetricsReport) -> Self {
        CsvRow {
            mode,
            lambda_per_s: lambda,
            r,
            k,
            n: layout.n,
            l: layout.l,
            lambda_f: layout.lambda_f,
            source: Source::Analytic,
            metrics,
            iters: None,
            seed: None,
            ci_e_n: None,
            ci_p_m: None,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn simulated(
        mode: AccessMode,
        lambda: f64,
        r: u32,
        k: u32,
        layout: &FrameLayout,
        summary: &SimSummary,
        iters: u64,
        seed: u64,
    ) -> Self {
        CsvRow {
            mode,
            lambda_per_s: lambda,
            r,
            k,
            n: layout.n,
            l: layout.l,
            lambda_f: layout.lambda_f,
            source: Source::Sim,
            metrics: summary.to_report(),
            iters: Some(iters),
            seed: Some(seed),
            ci_e_n: summary.e_n_aggregated.half_width,
            ci_p_m: summary.e_p_m.half_width,
        }
    }

    pub fn to_line(&self) -> String {
        let m = &self.metrics;
        let opt_int = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_f = |v: Option<f64>| v.map(fmt_sig9).unwrap_or_default();
        let fields = [
            self.mode.as_str().to_string(),
            fmt_sig9(self.lambda_per_s),
            self.r.to_string(),
            self.k.to_string(),
            self.n.to_string(),
            self.l.to_string(),
            fmt_sig9(self.lambda_f),
            self.source.as_str().to_string(),
            fmt_sig9(m.e_n_aggregated),
            fmt_sig9(m.e_n_delivered),
            fmt_sig9(m.e_p_tr_total),
            fmt_sig9(m.e_p_tr_per_mtd),
            fmt_sig9(m.e_p_m),
            fmt_sig9(m.p_s),
            fmt_sig9(m.outage),
            opt_int(self.iters),
            opt_int(self.seed),
            opt_f(self.ci_e_n),
            opt_f(self.ci_p_m),
        ];
        fields.join(",")
    }
}

pub fn render(rows: &[CsvRow]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.to_line());
    }
    out
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Nine significant digits in the style of C's `%.9g`; empty for non-finite
/// values.
pub fn fmt_sig9(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{}", trim_fraction(mantissa), exp)
    }
}

/// A parsed CSV file: header plus string cells.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Table> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Csv("empty file".into()))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let cells: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
            if cells.len() != header.len() {
                return Err(Error::Csv(format!(
                    "row {} has {} fields, header has {}",
                    i + 2,
                    cells.len(),
                    header.len()
                )));
            }
            rows.push(cells);
        }
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(-0.0), "0");
        assert_eq!(fmt_sig9(250.0), "250");
        assert_eq!(fmt_sig9(10.4), "10.4");
        assert_eq!(fmt_sig9(0.013), "0.013");
        assert_eq!(fmt_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig9(2.0 / 3.0 * 1e-7), "6.66666667e-8");
        assert_eq!(fmt_sig9(123_456_789_012.0), "1.23456789e11");
        assert_eq!(fmt_sig9(999_999_999.6), "1e9");
        assert_eq!(fmt_sig9(0.000_012_5), "1.25e-5");
        assert_eq!(fmt_sig9(0.000_125), "0.000125");
        assert_eq!(fmt_sig9(-3.5), "-3.5");
        assert_eq!(fmt_sig9(f64::NAN), "");
    }

    #[test]
    fn table_parse() {
        let t = Table::parse("a,b\n1,2\n\n3,4\n").unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.column("b"), Some(1));
        assert!(Table::parse("a,b\n1\n").is_err());
        assert!(Table::parse("").is_err());
    }
}
