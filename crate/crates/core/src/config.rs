//! TOML run configuration.
//!
//! Values are given in user units (kHz, dBm, dBW, dB) and converted to watts
//! and hertz when the scenario is built. Unspecified keys take the default
//! scenario values. Top-level `waveform`, `power_budget_dbm`,
//! `interference_threshold_dbw` and `num_users` apply to both systems unless
//! a `[system_a]` or `[system_b]` section overrides them. The full key list
//! is in `docs/config.md`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::psd::{FbmcParams, OfdmParams, PsdError, UfmcParams, Waveform, WaveformKind, PHYDYAS_K4};
use crate::scenario::{
    self, Assignment, ChannelModel, GridSpec, Scenario, SystemSpec, DEFAULT_FFT_SIZE, DEFAULT_NOISE_DBM_PER_HZ,
    DEFAULT_NUM_USERS, DEFAULT_POWER_BUDGET_DBM, DEFAULT_RB_SIZE, DEFAULT_TOTAL_SUBCARRIERS,
    DEFAULT_UFMC_ALPHA_DB, DEFAULT_UFMC_LENGTH, DEFAULT_UFMC_OVERSAMPLING,
};
use crate::units::{dbm_to_watts, dbw_to_watts};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid value for `{field}`: {constraint}")]
    Validation { field: String, constraint: String },
    #[error("unit error in `{field}`: {message}")]
    Unit { field: String, message: String },
}

fn validation<T>(field: &str, constraint: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Validation { field: field.into(), constraint: constraint.into() })
}

fn unit<T>(field: &str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Unit { field: field.into(), message: message.into() })
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    waveform: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    power_budget_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    interference_threshold_dbw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_users: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_dbm_per_hz: Option<f64>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    system_a: RawSystem,
    #[serde(default)]
    system_b: RawSystem,
    #[serde(default)]
    channel: RawChannel,
    #[serde(default)]
    fbmc: RawFbmc,
    #[serde(default)]
    ufmc: RawUfmc,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    psd: RawPsd,
    #[serde(default)]
    alloc: RawAlloc,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(skip_serializing_if = "Option::is_none")]
    total_subcarriers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    subcarrier_spacing_khz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rb_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fft_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    system_a_subcarriers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    guard_subcarriers: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(skip_serializing_if = "Option::is_none")]
    waveform: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    power_budget_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    interference_threshold_dbw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_users: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    channel: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    taps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay_taps: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawFbmc {
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficients: Option<Vec<f64>>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawUfmc {
    #[serde(skip_serializing_if = "Option::is_none")]
    filter_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sidelobe_attenuation_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    psd_oversampling: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    #[serde(skip_serializing_if = "Option::is_none")]
    waveforms: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold_min_dbw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold_max_dbw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawPsd {
    #[serde(skip_serializing_if = "Option::is_none")]
    waveforms: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_subcarriers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    span_subcarriers: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    window_out: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawAlloc {
    #[serde(skip_serializing_if = "Option::is_none")]
    profile_out: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelConfig {
    Flat,
    Multipath { taps: usize, decay_taps: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub total_subcarriers: usize,
    pub subcarrier_spacing_khz: f64,
    pub rb_size: usize,
    pub fft_size: usize,
    pub system_a_subcarriers: usize,
    pub guard_subcarriers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub waveform: WaveformKind,
    pub power_budget_dbm: f64,
    pub interference_threshold_dbw: f64,
    pub num_users: usize,
    pub channel: ChannelConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UfmcConfig {
    pub filter_length: usize,
    pub sidelobe_attenuation_db: f64,
    pub psd_oversampling: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub waveforms: Vec<WaveformKind>,
    pub threshold_min_dbw: f64,
    pub threshold_max_dbw: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdConfig {
    pub waveforms: Vec<WaveformKind>,
    pub num_subcarriers: usize,
    /// Half-width of the sampled range, in subcarrier spacings.
    pub span_subcarriers: f64,
    pub num_points: usize,
    pub window_out: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocConfig {
    pub profile_out: Option<String>,
}

/// Validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub noise_dbm_per_hz: f64,
    pub grid: GridConfig,
    pub system_a: SystemConfig,
    pub system_b: SystemConfig,
    pub fbmc_coefficients: Vec<f64>,
    pub ufmc: UfmcConfig,
    pub sweep: SweepConfig,
    pub psd: PsdConfig,
    pub alloc: AllocConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("empty configuration is valid")
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn parse_kind(field: &str, name: &str) -> Result<WaveformKind, ConfigError> {
    WaveformKind::parse(name).map_or_else(
        || validation(field, format!("unknown waveform \"{name}\"; expected one of ofdm, fbmc, ufmc")),
        Ok,
    )
}

fn parse_kinds(field: &str, names: &[String]) -> Result<Vec<WaveformKind>, ConfigError> {
    if names.is_empty() {
        return validation(field, "needs at least one waveform");
    }
    let mut out = Vec::new();
    for n in names {
        let k = parse_kind(field, n)?;
        if out.contains(&k) {
            return validation(field, format!("waveform {k} listed twice"));
        }
        out.push(k);
    }
    Ok(out)
}

fn finite(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        unit(field, format!("{v} is not a finite quantity"))
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        ConfigError::Syntax { line, column, message: e.message().trim().to_string() }
    })?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let shared_kind = match &raw.waveform {
        Some(w) => parse_kind("waveform", w)?,
        None => WaveformKind::Ofdm,
    };
    let shared_budget = finite("power_budget_dbm", raw.power_budget_dbm.unwrap_or(DEFAULT_POWER_BUDGET_DBM))?;
    let shared_threshold =
        finite("interference_threshold_dbw", raw.interference_threshold_dbw.unwrap_or(-30.0))?;
    let shared_users = raw.num_users.unwrap_or(DEFAULT_NUM_USERS);
    if shared_users == 0 {
        return validation("num_users", "must be >= 1");
    }

    let channel = match raw.channel.model.as_deref().unwrap_or("flat") {
        "flat" => ChannelConfig::Flat,
        "multipath" => {
            let taps = raw.channel.taps.unwrap_or(6);
            let decay_taps = finite("channel.decay_taps", raw.channel.decay_taps.unwrap_or(2.0))?;
            if taps == 0 {
                return validation("channel.taps", "must be >= 1");
            }
            if decay_taps <= 0.0 {
                return unit("channel.decay_taps", "decay constant must be > 0 taps");
            }
            ChannelConfig::Multipath { taps, decay_taps }
        }
        other => {
            return validation("channel.model", format!("unknown model \"{other}\"; expected flat or multipath"))
        }
    };

    let system = |name: &str, s: &RawSystem| -> Result<SystemConfig, ConfigError> {
        let field = |k: &str| format!("{name}.{k}");
        let waveform = match &s.waveform {
            Some(w) => parse_kind(&field("waveform"), w)?,
            None => shared_kind,
        };
        let power_budget_dbm = match s.power_budget_dbm {
            Some(v) => finite(&field("power_budget_dbm"), v)?,
            None => shared_budget,
        };
        let interference_threshold_dbw = match s.interference_threshold_dbw {
            Some(v) => finite(&field("interference_threshold_dbw"), v)?,
            None => shared_threshold,
        };
        let num_users = s.num_users.unwrap_or(shared_users);
        if num_users == 0 {
            return validation(&field("num_users"), "must be >= 1");
        }
        let channel = match s.channel.as_deref() {
            None => channel,
            Some("flat") => ChannelConfig::Flat,
            Some("multipath") => match channel {
                ChannelConfig::Multipath { .. } => channel,
                ChannelConfig::Flat => ChannelConfig::Multipath {
                    taps: raw.channel.taps.unwrap_or(6),
                    decay_taps: raw.channel.decay_taps.unwrap_or(2.0),
                },
            },
            Some(other) => {
                return validation(&field("channel"), format!("unknown model \"{other}\"; expected flat or multipath"))
            }
        };
        Ok(SystemConfig { waveform, power_budget_dbm, interference_threshold_dbw, num_users, channel })
    };

    let g = &raw.grid;
    let total = g.total_subcarriers.unwrap_or(DEFAULT_TOTAL_SUBCARRIERS);
    let grid = GridConfig {
        total_subcarriers: total,
        subcarrier_spacing_khz: finite("grid.subcarrier_spacing_khz", g.subcarrier_spacing_khz.unwrap_or(15.0))?,
        rb_size: g.rb_size.unwrap_or(DEFAULT_RB_SIZE),
        fft_size: g.fft_size.unwrap_or(DEFAULT_FFT_SIZE),
        system_a_subcarriers: g.system_a_subcarriers.unwrap_or(total / 2),
        guard_subcarriers: g.guard_subcarriers.unwrap_or(0),
    };

    let cfg = RunConfig {
        seed: raw.seed.unwrap_or(0),
        noise_dbm_per_hz: finite("noise_dbm_per_hz", raw.noise_dbm_per_hz.unwrap_or(DEFAULT_NOISE_DBM_PER_HZ))?,
        grid,
        system_a: system("system_a", &raw.system_a)?,
        system_b: system("system_b", &raw.system_b)?,
        fbmc_coefficients: raw.fbmc.coefficients.clone().unwrap_or_else(|| PHYDYAS_K4.to_vec()),
        ufmc: UfmcConfig {
            filter_length: raw.ufmc.filter_length.unwrap_or(DEFAULT_UFMC_LENGTH),
            sidelobe_attenuation_db: finite(
                "ufmc.sidelobe_attenuation_db",
                raw.ufmc.sidelobe_attenuation_db.unwrap_or(DEFAULT_UFMC_ALPHA_DB),
            )?,
            psd_oversampling: raw.ufmc.psd_oversampling.unwrap_or(DEFAULT_UFMC_OVERSAMPLING),
        },
        sweep: SweepConfig {
            waveforms: match &raw.sweep.waveforms {
                Some(w) => parse_kinds("sweep.waveforms", w)?,
                None => WaveformKind::ALL.to_vec(),
            },
            threshold_min_dbw: finite("sweep.threshold_min_dbw", raw.sweep.threshold_min_dbw.unwrap_or(-60.0))?,
            threshold_max_dbw: finite("sweep.threshold_max_dbw", raw.sweep.threshold_max_dbw.unwrap_or(-10.0))?,
            points: raw.sweep.points.unwrap_or(25),
        },
        psd: PsdConfig {
            waveforms: match &raw.psd.waveforms {
                Some(w) => parse_kinds("psd.waveforms", w)?,
                None => WaveformKind::ALL.to_vec(),
            },
            num_subcarriers: raw.psd.num_subcarriers.unwrap_or(60),
            span_subcarriers: finite("psd.span_subcarriers", raw.psd.span_subcarriers.unwrap_or(100.0))?,
            num_points: raw.psd.num_points.unwrap_or(2000),
            window_out: raw.psd.window_out.clone(),
        },
        alloc: AllocConfig { profile_out: raw.alloc.profile_out.clone() },
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        if g.subcarrier_spacing_khz <= 0.0 {
            return unit("grid.subcarrier_spacing_khz", "spacing must be > 0 kHz");
        }
        if g.rb_size == 0 {
            return validation("grid.rb_size", "must be >= 1");
        }
        if g.total_subcarriers < 2 {
            return validation("grid.total_subcarriers", "must be >= 2");
        }
        if g.fft_size < g.total_subcarriers {
            return validation(
                "grid.fft_size",
                format!("must be >= grid.total_subcarriers ({})", g.total_subcarriers),
            );
        }
        if g.system_a_subcarriers == 0 || g.system_a_subcarriers + g.guard_subcarriers >= g.total_subcarriers {
            return validation(
                "grid.system_a_subcarriers",
                "must be >= 1 and leave room for the guard and system B",
            );
        }
        if g.guard_subcarriers == 0 && !g.total_subcarriers.is_multiple_of(g.rb_size) {
            return validation(
                "grid.total_subcarriers",
                format!("a fully partitioned grid must be a multiple of rb_size ({})", g.rb_size),
            );
        }
        for (name, s) in [("system_a", &self.system_a), ("system_b", &self.system_b)] {
            if dbw_to_watts(s.interference_threshold_dbw) <= 0.0 {
                return unit(&format!("{name}.interference_threshold_dbw"), "converts to 0 W");
            }
            if !(dbm_to_watts(s.power_budget_dbm) > 0.0 && dbm_to_watts(s.power_budget_dbm).is_finite()) {
                return unit(&format!("{name}.power_budget_dbm"), "does not convert to a finite positive power");
            }
        }
        if self.ufmc.sidelobe_attenuation_db <= 0.0 {
            return unit("ufmc.sidelobe_attenuation_db", "attenuation must be > 0 dB");
        }
        if self.ufmc.filter_length < 2 {
            return validation("ufmc.filter_length", "must be >= 2");
        }
        if self.ufmc.filter_length > g.fft_size {
            return validation("ufmc.filter_length", format!("must be <= grid.fft_size ({})", g.fft_size));
        }
        if self.ufmc.psd_oversampling == 0 {
            return validation("ufmc.psd_oversampling", "must be >= 1");
        }
        if let Err(e) = FbmcParams::new(
            self.fbmc_coefficients.len(),
            g.fft_size,
            self.fbmc_coefficients.clone(),
            g.subcarrier_spacing_khz * 1e3,
        ) {
            return validation("fbmc.coefficients", e.to_string());
        }
        let s = &self.sweep;
        if s.points == 0 {
            return validation("sweep.points", "must be >= 1");
        }
        let (lo, hi) = (dbw_to_watts(s.threshold_min_dbw), dbw_to_watts(s.threshold_max_dbw));
        if !(lo >= 1e-7 && hi <= 1.0) {
            return validation("sweep.threshold_min_dbw", "thresholds must lie within [-70, 0] dBW");
        }
        if s.points > 1 && s.threshold_max_dbw <= s.threshold_min_dbw {
            return validation("sweep.threshold_max_dbw", "must exceed sweep.threshold_min_dbw");
        }
        let p = &self.psd;
        if p.num_points < 2 {
            return validation("psd.num_points", "must be >= 2");
        }
        if p.num_subcarriers == 0 {
            return validation("psd.num_subcarriers", "must be >= 1");
        }
        if p.span_subcarriers <= 0.0 {
            return validation("psd.span_subcarriers", "must be > 0");
        }
        if p.num_subcarriers > g.fft_size {
            return validation("psd.num_subcarriers", format!("must be <= grid.fft_size ({})", g.fft_size));
        }
        // UFMC spectra are defined over the Nyquist band of the raster.
        if p.span_subcarriers >= (g.fft_size / 2) as f64 {
            return validation("psd.span_subcarriers", format!("must be < grid.fft_size / 2 ({})", g.fft_size / 2));
        }
        Ok(())
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.grid.subcarrier_spacing_khz * 1e3
    }

    /// Waveform of `kind` with the configured parameters.
    pub fn waveform(&self, kind: WaveformKind) -> Result<Waveform, PsdError> {
        let df = self.subcarrier_spacing_hz();
        Ok(match kind {
            WaveformKind::Ofdm => Waveform::Ofdm(OfdmParams::new(df)?),
            WaveformKind::Fbmc => Waveform::Fbmc(FbmcParams::new(
                self.fbmc_coefficients.len(),
                self.grid.fft_size,
                self.fbmc_coefficients.clone(),
                df,
            )?),
            WaveformKind::Ufmc => Waveform::Ufmc(UfmcParams::new(
                self.ufmc.filter_length,
                self.ufmc.sidelobe_attenuation_db,
                self.grid.fft_size,
                self.ufmc.psd_oversampling,
                df,
            )?),
        })
    }

    /// Scenario in internal units.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let g = &self.grid;
        let a_len = g.system_a_subcarriers;
        let b_start = a_len + g.guard_subcarriers;
        let grid = GridSpec {
            total_subcarriers: g.total_subcarriers,
            subcarrier_spacing_hz: self.subcarrier_spacing_hz(),
            rb_size: g.rb_size,
            assignments: vec![
                Assignment { system: "A".into(), start: 0, len: a_len },
                Assignment { system: "B".into(), start: b_start, len: g.total_subcarriers - b_start },
            ],
        };
        let system = |id: &str, s: &SystemConfig| -> Result<SystemSpec, ConfigError> {
            let waveform = self.waveform(s.waveform).map_err(|e| ConfigError::Validation {
                field: format!("system_{}.waveform", id.to_lowercase()),
                constraint: e.to_string(),
            })?;
            Ok(SystemSpec {
                id: id.into(),
                waveform,
                power_budget_w: dbm_to_watts(s.power_budget_dbm),
                interference_threshold_w: dbw_to_watts(s.interference_threshold_dbw),
                num_users: s.num_users,
                channel: match s.channel {
                    ChannelConfig::Flat => ChannelModel::Flat,
                    ChannelConfig::Multipath { taps, decay_taps } => ChannelModel::Multipath { taps, decay_taps },
                },
            })
        };
        let sc = Scenario {
            grid,
            systems: [system("A", &self.system_a)?, system("B", &self.system_b)?],
            noise_psd_w_per_hz: dbm_to_watts(self.noise_dbm_per_hz),
            fft_size: g.fft_size,
            seed: self.seed,
        };
        sc.validate()
            .map_err(|e| ConfigError::Validation { field: "grid".into(), constraint: e.to_string() })?;
        Ok(sc)
    }

    /// Sweep thresholds in watts.
    pub fn thresholds_w(&self) -> Vec<f64> {
        scenario::log_spaced_thresholds(self.sweep.threshold_min_dbw, self.sweep.threshold_max_dbw, self.sweep.points)
    }

    /// Serialises every resolved value; parsing the result yields `self`.
    pub fn to_toml(&self) -> String {
        let names = |ks: &[WaveformKind]| Some(ks.iter().map(|k| k.name().to_string()).collect());
        let system = |s: &SystemConfig| RawSystem {
            waveform: Some(s.waveform.name().into()),
            power_budget_dbm: Some(s.power_budget_dbm),
            interference_threshold_dbw: Some(s.interference_threshold_dbw),
            num_users: Some(s.num_users),
            channel: Some(match s.channel {
                ChannelConfig::Flat => "flat".into(),
                ChannelConfig::Multipath { .. } => "multipath".into(),
            }),
        };
        // Per-system channel sections share one [channel] table; multipath
        // parameters come from whichever system uses them.
        let multipath = [self.system_a.channel, self.system_b.channel].into_iter().find_map(|c| match c {
            ChannelConfig::Multipath { taps, decay_taps } => Some((taps, decay_taps)),
            ChannelConfig::Flat => None,
        });
        let raw = RawConfig {
            seed: Some(self.seed),
            noise_dbm_per_hz: Some(self.noise_dbm_per_hz),
            grid: RawGrid {
                total_subcarriers: Some(self.grid.total_subcarriers),
                subcarrier_spacing_khz: Some(self.grid.subcarrier_spacing_khz),
                rb_size: Some(self.grid.rb_size),
                fft_size: Some(self.grid.fft_size),
                system_a_subcarriers: Some(self.grid.system_a_subcarriers),
                guard_subcarriers: Some(self.grid.guard_subcarriers),
            },
            system_a: system(&self.system_a),
            system_b: system(&self.system_b),
            channel: RawChannel {
                model: Some("flat".into()),
                taps: multipath.map(|m| m.0),
                decay_taps: multipath.map(|m| m.1),
            },
            fbmc: RawFbmc { coefficients: Some(self.fbmc_coefficients.clone()) },
            ufmc: RawUfmc {
                filter_length: Some(self.ufmc.filter_length),
                sidelobe_attenuation_db: Some(self.ufmc.sidelobe_attenuation_db),
                psd_oversampling: Some(self.ufmc.psd_oversampling),
            },
            sweep: RawSweep {
                waveforms: names(&self.sweep.waveforms),
                threshold_min_dbw: Some(self.sweep.threshold_min_dbw),
                threshold_max_dbw: Some(self.sweep.threshold_max_dbw),
                points: Some(self.sweep.points),
            },
            psd: RawPsd {
                waveforms: names(&self.psd.waveforms),
                num_subcarriers: Some(self.psd.num_subcarriers),
                span_subcarriers: Some(self.psd.span_subcarriers),
                num_points: Some(self.psd.num_points),
                window_out: self.psd.window_out.clone(),
            },
            alloc: RawAlloc { profile_out: self.alloc.profile_out.clone() },
            ..RawConfig::default()
        };
        toml::to_string(&raw).expect("configuration serialises")
    }
}
