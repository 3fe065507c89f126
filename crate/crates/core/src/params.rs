//! System parameters, dB/linear conversion and the derived frame layout.
//!
//! Configuration is accepted in the engineering units people quote (dBm, dB,
//! kHz, ms). Everything past [`build_params`] is linear SI.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Which access scheme the MTDs use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AccessMode {
    /// MTDs reserve and deliver to the nearby user, who trunks to the BS.
    Trunked,
    /// MTDs contend and transmit directly to the BS at fixed power.
    Baseline,
}

impl AccessMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AccessMode::Trunked => "trunked",
            AccessMode::Baseline => "baseline",
        }
    }

    /// MTD transmit power toward its receiver in this mode (W).
    pub fn mtd_power(self, p: &SystemParams) -> f64 {
        match self {
            AccessMode::Trunked => p.pm_u,
            AccessMode::Baseline => p.pm_b,
        }
    }

    /// Distance from an MTD to its receiver in this mode (m).
    pub fn mtd_distance(self, p: &SystemParams) -> f64 {
        match self {
            AccessMode::Trunked => p.x_m,
            AccessMode::Baseline => p.x_u,
        }
    }
}

impl fmt::Display for AccessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AccessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trunked" => Ok(AccessMode::Trunked),
            "baseline" => Ok(AccessMode::Baseline),
            other => Err(Error::InvalidArgument(format!("unknown mode `{other}`"))),
        }
    }
}

/// Parameters as written in a config file, in engineering units.
///
/// Field names map one-to-one onto config keys (see [`RawConfig::KEYS`]).
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    pub lambda_per_s: f64,
    pub r: u32,
    pub k: u32,
    pub t_ms: f64,
    pub ts_ms: f64,
    pub ru_kbps: f64,
    pub dm_bits: f64,
    pub w_khz: f64,
    pub sigma2_dbm: f64,
    pub kd_db: f64,
    pub alpha: f64,
    pub xm_m: f64,
    pub xu_m: f64,
    pub pmu_dbm: f64,
    pub pmb_dbm: f64,
    pub gamma_m_db: f64,
    pub po: f64,
    pub hbar: f64,
}

impl Default for RawConfig {
    /// Reference scenario: 100 kbit/s user, 180 kHz, 200 m uplink, 10 m D2D.
    fn default() -> Self {
        RawConfig {
            lambda_per_s: 250.0,
            r: 10,
            k: 1,
            t_ms: 1.0,
            ts_ms: 0.1,
            ru_kbps: 100.0,
            dm_bits: 100.0,
            w_khz: 180.0,
            sigma2_dbm: -97.0,
            kd_db: -30.0,
            alpha: 3.0,
            xm_m: 10.0,
            xu_m: 200.0,
            pmu_dbm: -20.0,
            pmb_dbm: 18.0,
            gamma_m_db: -3.0,
            po: 0.01,
            hbar: 1.0,
        }
    }
}

impl RawConfig {
    /// Recognised config keys, in canonical order.
    pub const KEYS: [&'static str; 18] = [
        "lambda_per_s",
        "R",
        "K",
        "T_ms",
        "Ts_ms",
        "Ru_kbps",
        "Dm_bits",
        "W_khz",
        "sigma2_dbm",
        "KD_db",
        "alpha",
        "xm_m",
        "xu_m",
        "PmU_dbm",
        "PmB_dbm",
        "Gamma_m_db",
        "PO",
        "hbar",
    ];

    /// Parses `key = value` lines on top of the defaults.
    ///
    /// `#` starts a comment, blank lines are ignored, and unknown or
    /// repeated keys are rejected.
    pub fn parse(text: &str) -> Result<RawConfig> {
        let mut cfg = RawConfig::default();
        let mut seen = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigSyntax {
                line: idx + 1,
                reason: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(Error::ConfigSyntax {
                    line: idx + 1,
                    reason: format!("duplicate key `{key}`"),
                });
            }
            cfg.set(key, value)?;
            seen.push(key.to_string());
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num(key: &str, v: &str) -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| invalid(key, format!("`{v}` is not a number")))
        }
        fn int(key: &str, v: &str) -> Result<u32> {
            v.parse::<u32>()
                .map_err(|_| invalid(key, format!("`{v}` is not a non-negative integer")))
        }
        match key {
            "lambda_per_s" => self.lambda_per_s = num(key, value)?,
            "R" => self.r = int(key, value)?,
            "K" => self.k = int(key, value)?,
            "T_ms" => self.t_ms = num(key, value)?,
            "Ts_ms" => self.ts_ms = num(key, value)?,
            "Ru_kbps" => self.ru_kbps = num(key, value)?,
            "Dm_bits" => self.dm_bits = num(key, value)?,
            "W_khz" => self.w_khz = num(key, value)?,
            "sigma2_dbm" => self.sigma2_dbm = num(key, value)?,
            "KD_db" => self.kd_db = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "xm_m" => self.xm_m = num(key, value)?,
            "xu_m" => self.xu_m = num(key, value)?,
            "PmU_dbm" => self.pmu_dbm = num(key, value)?,
            "PmB_dbm" => self.pmb_dbm = num(key, value)?,
            "Gamma_m_db" => self.gamma_m_db = num(key, value)?,
            "PO" => self.po = num(key, value)?,
            "hbar" => self.hbar = num(key, value)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Renders the config in the file format accepted by [`RawConfig::parse`].
    pub fn to_config_string(&self) -> String {
        let vals: [String; 18] = [
            self.lambda_per_s.to_string(),
            self.r.to_string(),
            self.k.to_string(),
            self.t_ms.to_string(),
            self.ts_ms.to_string(),
            self.ru_kbps.to_string(),
            self.dm_bits.to_string(),
            self.w_khz.to_string(),
            self.sigma2_dbm.to_string(),
            self.kd_db.to_string(),
            self.alpha.to_string(),
            self.xm_m.to_string(),
            self.xu_m.to_string(),
            self.pmu_dbm.to_string(),
            self.pmb_dbm.to_string(),
            self.gamma_m_db.to_string(),
            self.po.to_string(),
            self.hbar.to_string(),
        ];
        Self::KEYS
            .iter()
            .zip(vals.iter())
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// All protocol and physical constants in linear SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// MTD packet arrival rate (1/s).
    pub lambda: f64,
    /// Reservation mini-slots per frame.
    pub r: u32,
    /// Reserved trunking slots per frame.
    pub k: u32,
    /// Slot duration (s).
    pub t: f64,
    /// Mini-slot duration (s).
    pub t_s: f64,
    /// User bit rate (bit/s).
    pub r_u: f64,
    /// MTD payload (bits).
    pub d_m: f64,
    /// Bandwidth (Hz).
    pub w: f64,
    /// Noise power (W).
    pub sigma2: f64,
    /// Path-loss constant (linear).
    pub k_d: f64,
    pub alpha: f64,
    /// MTD to user distance (m).
    pub x_m: f64,
    /// User to base station distance (m).
    pub x_u: f64,
    /// MTD power toward the user (W).
    pub pm_u: f64,
    /// MTD power toward the base station (W).
    pub pm_b: f64,
    /// Reservation decode SNR threshold (linear).
    pub gamma_m: f64,
    /// Target trunk outage probability.
    pub po: f64,
    /// Mean small-scale power gain.
    pub hbar: f64,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Validates a raw config and converts it to linear SI units.
pub fn build_params(cfg: &RawConfig) -> Result<SystemParams> {
    let finite = [
        ("lambda_per_s", cfg.lambda_per_s),
        ("T_ms", cfg.t_ms),
        ("Ts_ms", cfg.ts_ms),
        ("Ru_kbps", cfg.ru_kbps),
        ("Dm_bits", cfg.dm_bits),
        ("W_khz", cfg.w_khz),
        ("sigma2_dbm", cfg.sigma2_dbm),
        ("KD_db", cfg.kd_db),
        ("alpha", cfg.alpha),
        ("xm_m", cfg.xm_m),
        ("xu_m", cfg.xu_m),
        ("PmU_dbm", cfg.pmu_dbm),
        ("PmB_dbm", cfg.pmb_dbm),
        ("Gamma_m_db", cfg.gamma_m_db),
        ("PO", cfg.po),
        ("hbar", cfg.hbar),
    ];
    for (name, v) in finite {
        if !v.is_finite() {
            return Err(invalid(name, "must be finite"));
        }
    }
    let positive = [
        ("T_ms", cfg.t_ms),
        ("Ts_ms", cfg.ts_ms),
        ("W_khz", cfg.w_khz),
        ("alpha", cfg.alpha),
        ("xm_m", cfg.xm_m),
        ("xu_m", cfg.xu_m),
        ("hbar", cfg.hbar),
    ];
    for (name, v) in positive {
        if v <= 0.0 {
            return Err(invalid(name, "must be > 0"));
        }
    }
    let non_negative = [
        ("lambda_per_s", cfg.lambda_per_s),
        ("Ru_kbps", cfg.ru_kbps),
        ("Dm_bits", cfg.dm_bits),
    ];
    for (name, v) in non_negative {
        if v < 0.0 {
            return Err(invalid(name, "must be >= 0"));
        }
    }
    if cfg.r < 1 {
        return Err(invalid("R", "must be >= 1"));
    }
    if cfg.k < 1 {
        return Err(invalid("K", "must be >= 1"));
    }
    if !(cfg.po > 0.0 && cfg.po < 1.0) {
        return Err(invalid("PO", "must lie strictly between 0 and 1"));
    }
    if duration_ns(cfg.t_ms * 1e-3) == 0 {
        return Err(invalid("T_ms", "shorter than 1 ns"));
    }
    if duration_ns(cfg.ts_ms * 1e-3) == 0 {
        return Err(invalid("Ts_ms", "shorter than 1 ns"));
    }

    Ok(SystemParams {
        lambda: cfg.lambda_per_s,
        r: cfg.r,
        k: cfg.k,
        t: cfg.t_ms * 1e-3,
        t_s: cfg.ts_ms * 1e-3,
        r_u: cfg.ru_kbps * 1e3,
        d_m: cfg.dm_bits,
        w: cfg.w_khz * 1e3,
        sigma2: dbm_to_watts(cfg.sigma2_dbm),
        k_d: db_to_linear(cfg.kd_db),
        alpha: cfg.alpha,
        x_m: cfg.xm_m,
        x_u: cfg.xu_m,
        pm_u: dbm_to_watts(cfg.pmu_dbm),
        pm_b: dbm_to_watts(cfg.pmb_dbm),
        gamma_m: db_to_linear(cfg.gamma_m_db),
        po: cfg.po,
        hbar: cfg.hbar,
    })
}

impl SystemParams {
    /// Inverse of [`build_params`].
    pub fn to_raw(&self) -> RawConfig {
        RawConfig {
            lambda_per_s: self.lambda,
            r: self.r,
            k: self.k,
            t_ms: self.t * 1e3,
            ts_ms: self.t_s * 1e3,
            ru_kbps: self.r_u * 1e-3,
            dm_bits: self.d_m,
            w_khz: self.w * 1e-3,
            sigma2_dbm: watts_to_dbm(self.sigma2),
            kd_db: linear_to_db(self.k_d),
            alpha: self.alpha,
            xm_m: self.x_m,
            xu_m: self.x_u,
            pmu_dbm: watts_to_dbm(self.pm_u),
            pmb_dbm: watts_to_dbm(self.pm_b),
            gamma_m_db: linear_to_db(self.gamma_m),
            po: self.po,
            hbar: self.hbar,
        }
    }

    /// Same parameters at a different sweep point.
    pub fn at_point(&self, lambda: f64, r: u32, k: u32) -> SystemParams {
        SystemParams {
            lambda,
            r,
            k,
            ..self.clone()
        }
    }

    /// Stable 64-bit digest of every field, used to tag simulation results.
    pub fn fingerprint(&self) -> u64 {
        let words = [
            self.lambda.to_bits(),
            u64::from(self.r),
            u64::from(self.k),
            self.t.to_bits(),
            self.t_s.to_bits(),
            self.r_u.to_bits(),
            self.d_m.to_bits(),
            self.w.to_bits(),
            self.sigma2.to_bits(),
            self.k_d.to_bits(),
            self.alpha.to_bits(),
            self.x_m.to_bits(),
            self.x_u.to_bits(),
            self.pm_u.to_bits(),
            self.pm_b.to_bits(),
            self.gamma_m.to_bits(),
            self.po.to_bits(),
            self.hbar.to_bits(),
        ];
        words
            .iter()
            .fold(0x6a09_e667_f3bc_c908, |acc, &w| crate::sim::mix64(acc ^ w))
    }
}

/// Quantities derived from the frame structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameLayout {
    /// Slots spent on reservation mini-slots.
    pub n: u32,
    /// Total slots per frame: reservation, feedback, data and trunk.
    pub l: u32,
    /// Mean MTD arrivals per frame.
    pub lambda_f: f64,
    /// User payload generated per frame (bits).
    pub d_u: f64,
}

impl FrameLayout {
    /// Frame duration `L·T` in seconds.
    pub fn frame_duration(&self, p: &SystemParams) -> f64 {
        f64::from(self.l) * p.t
    }
}

fn duration_ns(seconds: f64) -> u64 {
    (seconds * 1e9).round() as u64
}

/// Derives the frame layout. The reservation slot count is an integer
/// ceiling on nanosecond-rounded durations, so `10 × 0.1 ms / 1 ms` is
/// exactly one slot.
pub fn frame_layout(p: &SystemParams) -> FrameLayout {
    let t_ns = duration_ns(p.t).max(1);
    let ts_ns = duration_ns(p.t_s);
    let n = (u64::from(p.r) * ts_ns).div_ceil(t_ns) as u32;
    let l = n + p.r + p.k + 1;
    let frame = f64::from(l) * p.t;
    FrameLayout {
        n,
        l,
        lambda_f: p.lambda * frame,
        d_u: frame * p.r_u,
    }
}
