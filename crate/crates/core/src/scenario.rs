//! Two-system shared-band scenario: a common subcarrier grid split into
//! contiguous fragments, one per system, and the interference-threshold sweep.

use std::io::{self, Write};
use std::ops::Range;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

use crate::allocation::{
    power_loss_percent, solve_power_allocation, AllocationError, AllocationProblem, SolverOptions,
};
use crate::interference::{global_profile_cache, BandSpec, InterferenceError, RasterLayout};
use crate::psd::{
    FbmcParams, OfdmParams, PsdCurve, PsdError, SubcarrierPlacement, UfmcParams, Waveform, WaveformKind,
};
use crate::units::{dbm_to_watts, ratio_to_db, watts_to_dbw};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Interference(#[from] InterferenceError),
    #[error(transparent)]
    Psd(#[from] PsdError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError::Invalid(msg.into()))
}

/// Contiguous range of grid indices held by one system.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub system: String,
    pub start: usize,
    pub len: usize,
}

impl Assignment {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub total_subcarriers: usize,
    pub subcarrier_spacing_hz: f64,
    pub rb_size: usize,
    pub assignments: Vec<Assignment>,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.total_subcarriers == 0 || self.rb_size == 0 {
            return invalid("grid needs at least one subcarrier and rb_size > 0");
        }
        if !(self.subcarrier_spacing_hz.is_finite() && self.subcarrier_spacing_hz > 0.0) {
            return invalid(format!("subcarrier spacing must be > 0, got {}", self.subcarrier_spacing_hz));
        }
        let mut covered = 0;
        for (k, a) in self.assignments.iter().enumerate() {
            if a.len == 0 {
                return invalid(format!("assignment of {} is empty", a.system));
            }
            if a.range().end > self.total_subcarriers {
                return invalid(format!(
                    "assignment of {} ({:?}) exceeds the {}-subcarrier grid",
                    a.system,
                    a.range(),
                    self.total_subcarriers
                ));
            }
            for b in &self.assignments[k + 1..] {
                if a.range().start < b.range().end && b.range().start < a.range().end {
                    return invalid(format!("assignments of {} and {} overlap", a.system, b.system));
                }
                if a.system == b.system {
                    return invalid(format!("system {} assigned twice", a.system));
                }
            }
            covered += a.len;
        }
        if covered == self.total_subcarriers && !self.total_subcarriers.is_multiple_of(self.rb_size) {
            return invalid(format!(
                "fully partitioned grid of {} subcarriers is not a whole number of {}-subcarrier RBs",
                self.total_subcarriers, self.rb_size
            ));
        }
        Ok(())
    }

    pub fn num_rbs(&self) -> usize {
        self.total_subcarriers / self.rb_size
    }

    pub fn layout(&self) -> RasterLayout {
        RasterLayout {
            total_subcarriers: self.total_subcarriers,
            rb_size: self.rb_size,
            subcarrier_spacing_hz: self.subcarrier_spacing_hz,
        }
    }

    pub fn assignment(&self, system: &str) -> Option<&Assignment> {
        self.assignments.iter().find(|a| a.system == system)
    }

    /// Edge-to-edge band of a system's fragment.
    pub fn band(&self, system: &str) -> Option<BandSpec> {
        self.assignment(system).map(|a| self.layout().band_of(a.start, a.len))
    }
}

/// Channel gains across a system's subcarriers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    Flat,
    /// Per-user random multipath with an exponential power-delay profile,
    /// `taps` taps and decay constant `decay_taps`, unit mean gain.
    Multipath { taps: usize, decay_taps: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub id: String,
    pub waveform: Waveform,
    pub power_budget_w: f64,
    pub interference_threshold_w: f64,
    pub num_users: usize,
    pub channel: ChannelModel,
}

impl SystemSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.power_budget_w.is_finite() && self.power_budget_w > 0.0) {
            return invalid(format!("{}: power budget must be > 0", self.id));
        }
        if !(self.interference_threshold_w > 0.0) {
            return invalid(format!("{}: interference threshold must be > 0", self.id));
        }
        if self.num_users == 0 {
            return invalid(format!("{}: needs at least one user", self.id));
        }
        if let ChannelModel::Multipath { taps, decay_taps } = self.channel {
            if taps == 0 || !(decay_taps.is_finite() && decay_taps > 0.0) {
                return invalid(format!("{}: multipath needs taps > 0 and decay > 0", self.id));
            }
        }
        Ok(())
    }
}

/// Grid, the two coexisting systems and the shared noise floor.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid: GridSpec,
    pub systems: [SystemSpec; 2],
    pub noise_psd_w_per_hz: f64,
    /// FFT size of the raster, used by multipath channel synthesis.
    pub fft_size: usize,
    pub seed: u64,
}

pub const DEFAULT_TOTAL_SUBCARRIERS: usize = 1200;
pub const DEFAULT_SPACING_HZ: f64 = 15e3;
pub const DEFAULT_RB_SIZE: usize = 12;
pub const DEFAULT_FFT_SIZE: usize = 2048;
pub const DEFAULT_POWER_BUDGET_DBM: f64 = 43.0;
pub const DEFAULT_NUM_USERS: usize = 10;
pub const DEFAULT_NOISE_DBM_PER_HZ: f64 = -174.0;
pub const DEFAULT_UFMC_LENGTH: usize = 74;
pub const DEFAULT_UFMC_ALPHA_DB: f64 = 40.0;
pub const DEFAULT_UFMC_OVERSAMPLING: usize = 16;

/// Waveform of the given kind with the default parameters: PHYDYAS K = 4
/// for FBMC, a length-74, 40 dB Dolph-Chebyshev filter for UFMC.
pub fn default_waveform(kind: WaveformKind, spacing_hz: f64, fft_size: usize) -> Result<Waveform, PsdError> {
    Ok(match kind {
        WaveformKind::Ofdm => Waveform::Ofdm(OfdmParams::new(spacing_hz)?),
        WaveformKind::Fbmc => Waveform::Fbmc(FbmcParams::phydyas(fft_size, spacing_hz)?),
        WaveformKind::Ufmc => Waveform::Ufmc(UfmcParams::new(
            DEFAULT_UFMC_LENGTH,
            DEFAULT_UFMC_ALPHA_DB,
            fft_size,
            DEFAULT_UFMC_OVERSAMPLING,
            spacing_hz,
        )?),
    })
}

/// 1200 subcarriers at 15 kHz (18 MHz of a 20 MHz channel) in 100 RBs of
/// 12, split into two adjacent 600-subcarrier halves. Each system has a
/// 43 dBm budget and 10 users; both use OFDM.
pub fn build_default_scenario() -> Scenario {
    let half = DEFAULT_TOTAL_SUBCARRIERS / 2;
    let grid = GridSpec {
        total_subcarriers: DEFAULT_TOTAL_SUBCARRIERS,
        subcarrier_spacing_hz: DEFAULT_SPACING_HZ,
        rb_size: DEFAULT_RB_SIZE,
        assignments: vec![
            Assignment { system: "A".into(), start: 0, len: half },
            Assignment { system: "B".into(), start: half, len: half },
        ],
    };
    let waveform = default_waveform(WaveformKind::Ofdm, DEFAULT_SPACING_HZ, DEFAULT_FFT_SIZE)
        .expect("default OFDM parameters are valid");
    let system = |id: &str| SystemSpec {
        id: id.into(),
        waveform: waveform.clone(),
        power_budget_w: dbm_to_watts(DEFAULT_POWER_BUDGET_DBM),
        interference_threshold_w: 1e-3,
        num_users: DEFAULT_NUM_USERS,
        channel: ChannelModel::Flat,
    };
    Scenario {
        grid,
        systems: [system("A"), system("B")],
        noise_psd_w_per_hz: dbm_to_watts(DEFAULT_NOISE_DBM_PER_HZ),
        fft_size: DEFAULT_FFT_SIZE,
        seed: 0,
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.grid.validate()?;
        for s in &self.systems {
            s.validate()?;
            if self.grid.assignment(&s.id).is_none() {
                return invalid(format!("system {} has no assignment on the grid", s.id));
            }
            let df = s.waveform.subcarrier_spacing_hz();
            if (df - self.grid.subcarrier_spacing_hz).abs() > 1e-9 * df {
                return invalid(format!(
                    "system {} waveform spacing {df} Hz differs from the grid spacing {} Hz",
                    s.id, self.grid.subcarrier_spacing_hz
                ));
            }
        }
        if self.systems[0].id == self.systems[1].id {
            return invalid("the two systems need distinct ids");
        }
        if !(self.noise_psd_w_per_hz.is_finite() && self.noise_psd_w_per_hz >= 0.0) {
            return invalid("noise density must be >= 0");
        }
        Ok(())
    }

    /// Copy with both systems switched to `waveform`.
    pub fn with_waveform(&self, waveform: &Waveform) -> Scenario {
        let mut s = self.clone();
        for sys in &mut s.systems {
            sys.waveform = waveform.clone();
        }
        s
    }

    /// Channel gains over the fragment of system `index`. RBs are handed to
    /// users round-robin; each subcarrier takes its user's gain.
    pub fn channel_gains(&self, index: usize) -> Vec<f64> {
        let sys = &self.systems[index];
        let a = self.grid.assignment(&sys.id).expect("validated scenario");
        match sys.channel {
            ChannelModel::Flat => vec![1.0; a.len],
            ChannelModel::Multipath { taps, decay_taps } => {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    self.seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                );
                let profile: Vec<f64> = (0..taps).map(|k| (-(k as f64) / decay_taps).exp()).collect();
                let norm: f64 = profile.iter().sum();
                let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("unit normal");
                let users: Vec<Vec<Complex64>> = (0..sys.num_users)
                    .map(|_| {
                        profile
                            .iter()
                            .map(|p| {
                                let s = (p / norm).sqrt();
                                Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)) * s
                            })
                            .collect()
                    })
                    .collect();
                let half = (self.grid.total_subcarriers / 2) as f64;
                a.range()
                    .map(|j| {
                        let user = ((j - a.start) / self.grid.rb_size) % sys.num_users;
                        let bin = j as f64 - half;
                        let h: Complex64 = users[user]
                            .iter()
                            .enumerate()
                            .map(|(k, t)| {
                                t * Complex64::from_polar(
                                    1.0,
                                    -2.0 * std::f64::consts::PI * k as f64 * bin / self.fft_size as f64,
                                )
                            })
                            .sum();
                        h.norm_sqr().max(1e-12)
                    })
                    .collect()
            }
        }
    }

    /// Allocation problem of system `index` under threshold `threshold_w`
    /// toward the other system's fragment.
    pub fn allocation_problem(&self, index: usize, threshold_w: f64) -> Result<AllocationProblem, ScenarioError> {
        let sys = &self.systems[index];
        let other = &self.systems[1 - index];
        let own = self.grid.assignment(&sys.id).expect("validated scenario");
        let victim = self.grid.band(&other.id).expect("validated scenario");
        let own_idx: Vec<usize> = own.range().collect();
        let profile =
            global_profile_cache().get_or_compute(&sys.waveform, &self.grid.layout(), &own_idx, &victim)?;
        Ok(AllocationProblem {
            gains: self.channel_gains(index),
            interference_coeffs: profile.coefficients.clone(),
            subcarrier_spacing_hz: self.grid.subcarrier_spacing_hz,
            noise_psd_w_per_hz: self.noise_psd_w_per_hz,
            power_budget_w: sys.power_budget_w,
            interference_threshold_w: threshold_w,
            incoming_interference_w: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Ok,
    /// The solver stopped at its iteration cap; values are its best iterate.
    NoConvergence,
    Failed(String),
}

impl PointStatus {
    pub fn label(&self) -> String {
        match self {
            PointStatus::Ok => "ok".into(),
            PointStatus::NoConvergence => "no_convergence".into(),
            PointStatus::Failed(m) => format!("error: {}", m.replace([',', '\n'], ";")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub throughput_bps: f64,
    pub power_used_w: f64,
    pub power_loss_percent: f64,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemCurve {
    pub system: String,
    pub waveform: WaveformKind,
    pub points: Vec<SweepPoint>,
}

impl SystemCurve {
    pub fn throughput_bps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.throughput_bps).collect()
    }

    pub fn power_used_w(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.power_used_w).collect()
    }

    pub fn power_loss_percent(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.power_loss_percent).collect()
    }
}

/// Frequency samples of normalised multicarrier spectra, one column per
/// waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdTable {
    pub freqs_hz: Vec<f64>,
    pub kinds: Vec<WaveformKind>,
    /// `db[w][k]`: waveform `w` at frequency `k`, 0 dB at its sampled peak.
    pub db: Vec<Vec<f64>>,
}

impl PsdTable {
    pub fn column(&self, kind: WaveformKind) -> Option<&[f64]> {
        self.kinds.iter().position(|k| *k == kind).map(|i| self.db[i].as_slice())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "freq_hz")?;
        for k in &self.kinds {
            write!(out, ",{}_db", k.name())?;
        }
        writeln!(out)?;
        for (i, f) in self.freqs_hz.iter().enumerate() {
            write!(out, "{f:.16e}")?;
            for col in &self.db {
                write!(out, ",{:.16e}", col[i])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub thresholds_w: Vec<f64>,
    pub curves: Vec<SystemCurve>,
    pub psd_samples: Option<PsdTable>,
}

impl SweepResult {
    pub fn curve(&self, system: &str, waveform: WaveformKind) -> Option<&SystemCurve> {
        self.curves.iter().find(|c| c.system == system && c.waveform == waveform)
    }

    /// Appends the curves of another sweep over the same thresholds.
    pub fn merge(&mut self, other: SweepResult) -> Result<(), ScenarioError> {
        if other.thresholds_w != self.thresholds_w {
            return invalid("cannot merge sweeps over different thresholds");
        }
        self.curves.extend(other.curves);
        Ok(())
    }

    /// Violations of the expected trends: throughput non-decreasing and
    /// power loss non-increasing in the threshold. Throughput may dip by
    /// `rel_tol` of its value, power loss by `loss_tol_pct` points.
    pub fn monotonicity_violations(&self, rel_tol: f64, loss_tol_pct: f64) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.curves {
            for k in 1..c.points.len() {
                let (a, b) = (&c.points[k - 1], &c.points[k]);
                if b.throughput_bps < a.throughput_bps - rel_tol * a.throughput_bps.abs() {
                    out.push(format!(
                        "{}/{}: throughput drops from {} to {} bit/s at threshold {} W",
                        c.system, c.waveform, a.throughput_bps, b.throughput_bps, self.thresholds_w[k]
                    ));
                }
                if b.power_loss_percent > a.power_loss_percent + loss_tol_pct {
                    out.push(format!(
                        "{}/{}: power loss rises from {}% to {}% at threshold {} W",
                        c.system, c.waveform, a.power_loss_percent, b.power_loss_percent, self.thresholds_w[k]
                    ));
                }
            }
        }
        out
    }

    /// CSV with one row per threshold, system and waveform.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "threshold_w,threshold_dbw,system,waveform,throughput_bps,power_used_w,power_loss_pct,status"
        )?;
        for c in &self.curves {
            for (t, p) in self.thresholds_w.iter().zip(&c.points) {
                writeln!(
                    out,
                    "{:.16e},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{}",
                    t,
                    watts_to_dbw(*t),
                    c.system,
                    c.waveform,
                    p.throughput_bps,
                    p.power_used_w,
                    p.power_loss_percent,
                    p.status.label()
                )?;
            }
        }
        Ok(())
    }
}

/// `count` log-spaced thresholds from `min_dbw` to `max_dbw`, in watts.
pub fn log_spaced_thresholds(min_dbw: f64, max_dbw: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![crate::units::dbw_to_watts(min_dbw)];
    }
    (0..count)
        .map(|k| {
            let dbw = min_dbw + (max_dbw - min_dbw) * k as f64 / (count - 1) as f64;
            crate::units::dbw_to_watts(dbw)
        })
        .collect()
}

fn solve_point(problem: &AllocationProblem) -> SweepPoint {
    let failed = |m: String| SweepPoint {
        throughput_bps: f64::NAN,
        power_used_w: f64::NAN,
        power_loss_percent: f64::NAN,
        status: PointStatus::Failed(m),
    };
    let (result, status) = match solve_power_allocation(problem, SolverOptions::default()) {
        Ok(r) => (r, PointStatus::Ok),
        Err(AllocationError::NoConvergence { best, .. }) => (*best, PointStatus::NoConvergence),
        Err(e) => return failed(e.to_string()),
    };
    match power_loss_percent(result.power_used_w, problem.power_budget_w) {
        Ok(loss) => SweepPoint {
            throughput_bps: result.throughput_bps,
            power_used_w: result.power_used_w,
            power_loss_percent: loss,
            status,
        },
        Err(e) => failed(e.to_string()),
    }
}

/// Solves both systems' allocations at every threshold. Both systems use
/// the same threshold toward each other. Solver failures are recorded per
/// point; invalid thresholds and geometry errors abort.
pub fn run_threshold_sweep(scenario: &Scenario, thresholds_w: &[f64]) -> Result<SweepResult, ScenarioError> {
    scenario.validate()?;
    if thresholds_w.is_empty() {
        return invalid("threshold list is empty");
    }
    if let Some(t) = thresholds_w.iter().find(|t| !(**t >= 1e-7 && **t <= 1.0)) {
        return invalid(format!("threshold {t} W outside [1e-7, 1] W"));
    }
    if thresholds_w.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("thresholds must be strictly increasing");
    }
    let mut curves = Vec::with_capacity(2);
    for index in 0..2 {
        // Interference profiles do not depend on the threshold; build once.
        let base = scenario.allocation_problem(index, thresholds_w[0])?;
        let points: Vec<SweepPoint> = thresholds_w
            .par_iter()
            .map(|&t| {
                let problem = AllocationProblem { interference_threshold_w: t, ..base.clone() };
                solve_point(&problem)
            })
            .collect();
        let sys = &scenario.systems[index];
        curves.push(SystemCurve { system: sys.id.clone(), waveform: sys.waveform.kind(), points });
    }
    Ok(SweepResult { thresholds_w: thresholds_w.to_vec(), curves, psd_samples: None })
}

/// Multicarrier spectra of `num_subcarriers` unit-power subcarriers, sampled
/// at `num_points` uniform frequencies over `f_range_hz` and normalised to
/// 0 dB at each curve's sampled peak. When every sample sits on a null the
/// curve's value at the subcarrier centres is the reference instead.
///
/// Subcarrier `n` sits at baseband bin `n - num_subcarriers / 2` and
/// frequency `bin * df`; UFMC filters each `rb_size` block around its centre.
pub fn sample_psd_comparison(
    waveforms: &[Waveform],
    num_subcarriers: usize,
    rb_size: usize,
    f_range_hz: (f64, f64),
    num_points: usize,
) -> Result<PsdTable, ScenarioError> {
    if num_points < 2 {
        return invalid(format!("num_points must be >= 2, got {num_points}"));
    }
    if num_subcarriers == 0 || rb_size == 0 {
        return invalid("num_subcarriers and rb_size must be > 0");
    }
    let (lo, hi) = f_range_hz;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return invalid(format!("frequency range [{lo}, {hi}] is empty or not finite"));
    }
    let freqs: Vec<f64> =
        (0..num_points).map(|k| lo + (hi - lo) * k as f64 / (num_points - 1) as f64).collect();
    let half = (num_subcarriers / 2) as f64;
    let bins: Vec<f64> = (0..num_subcarriers).map(|n| n as f64 - half).collect();
    let placements: Vec<SubcarrierPlacement> = (0..num_subcarriers)
        .map(|n| {
            let rb_start = (n / rb_size) * rb_size;
            let rb_len = rb_size.min(num_subcarriers - rb_start);
            SubcarrierPlacement::new(bins[n], rb_start as f64 + (rb_len as f64 - 1.0) / 2.0 - half)
        })
        .collect();

    let mut kinds = Vec::with_capacity(waveforms.len());
    let mut db = Vec::with_capacity(waveforms.len());
    for wf in waveforms {
        if kinds.contains(&wf.kind()) {
            return invalid(format!("waveform {} listed twice", wf.kind()));
        }
        let df = wf.subcarrier_spacing_hz();
        let curves = wf.subcarrier_curves(&placements, 1.0);
        let density: Vec<f64> = freqs
            .par_iter()
            .map(|&f| curves.iter().zip(&bins).map(|(c, b)| c.density(f - b * df)).sum())
            .collect();
        let mut peak = density.iter().cloned().fold(0.0, f64::max);
        if peak == 0.0 {
            peak = bins
                .iter()
                .map(|&c| curves.iter().zip(&bins).map(|(cv, b)| cv.density((c - b) * df)).sum::<f64>())
                .fold(0.0, f64::max);
        }
        if !(peak > 0.0) {
            return invalid(format!("{} spectrum vanishes on the sampled range", wf.kind()));
        }
        kinds.push(wf.kind());
        db.push(density.iter().map(|d| ratio_to_db(d / peak)).collect());
    }
    Ok(PsdTable { freqs_hz: freqs, kinds, db })
}
