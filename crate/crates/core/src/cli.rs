//! Command-line front end: `psd`, `alloc` and `sweep`.
//!
//! Every command reads an optional TOML configuration, writes one CSV file
//! atomically (temporary file in the target directory, then rename) and
//! prints a short summary to standard output.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::allocation::{power_loss_percent, solve_power_allocation, AllocationError, SolverOptions};
use crate::config::{parse_config, ConfigError, RunConfig};
use crate::interference::global_profile_cache;
use crate::psd::{write_window_csv, PsdError, WaveformKind};
use crate::scenario::{run_threshold_sweep, sample_psd_comparison, PointStatus, PsdTable, ScenarioError, SweepResult};
use crate::units::watts_to_dbm;

pub const THREADS_ENV: &str = "WAVECOEX_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 1 for usage and configuration errors, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Runtime(_) | CliError::Io { .. } => 2,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<PsdError> for CliError {
    fn from(e: PsdError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "wavecoex", version, about = "OFDM/FBMC/UFMC coexistence in a shared band")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalised multicarrier spectra of the configured waveforms.
    Psd(CommonArgs),
    /// Power allocation of both systems at the configured threshold.
    Alloc(CommonArgs),
    /// Throughput and power loss across interference thresholds.
    Sweep(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Overrides the configuration seed.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
}

/// Reads and validates the configuration, applying a seed override.
pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Writes `path` through a temporary file in the same directory, so readers
/// never observe a partial file.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let io_err = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        write(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn waveforms(cfg: &RunConfig, kinds: &[WaveformKind]) -> Result<Vec<crate::psd::Waveform>, CliError> {
    kinds.iter().map(|k| cfg.waveform(*k).map_err(CliError::from)).collect()
}

/// Samples the configured spectra and writes `freq_hz,<kind>_db...`.
pub fn cmd_psd(cfg: &RunConfig, out: &Path) -> Result<PsdTable, CliError> {
    let df = cfg.subcarrier_spacing_hz();
    let span = cfg.psd.span_subcarriers * df;
    let table = sample_psd_comparison(
        &waveforms(cfg, &cfg.psd.waveforms)?,
        cfg.psd.num_subcarriers,
        cfg.grid.rb_size,
        (-span, span),
        cfg.psd.num_points,
    )?;
    if let Some(path) = &cfg.psd.window_out {
        let window = crate::psd::chebyshev_window(cfg.ufmc.filter_length, cfg.ufmc.sidelobe_attenuation_db)?;
        write_atomic(Path::new(path), |w| write_window_csv(&window, w))?;
    }
    write_atomic(out, |w| table.write_csv(w))?;
    Ok(table)
}

/// Outcome of one system's allocation in `cmd_alloc`.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocSummary {
    pub system: String,
    pub waveform: WaveformKind,
    pub throughput_bps: f64,
    pub power_used_w: f64,
    pub power_loss_percent: f64,
    pub interference_w: f64,
    pub lambda: f64,
    pub mu: f64,
}

/// Solves both systems at their configured thresholds and writes
/// `system,subcarrier_index,d_n,coefficient,gain,power_w`.
pub fn cmd_alloc(cfg: &RunConfig, out: &Path) -> Result<Vec<AllocSummary>, CliError> {
    let scenario = cfg.scenario()?;
    let layout = scenario.grid.layout();
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for index in 0..2 {
        let sys = &scenario.systems[index];
        let problem = scenario.allocation_problem(index, sys.interference_threshold_w)?;
        let result = solve_power_allocation(&problem, SolverOptions::default()).map_err(|e| match e {
            AllocationError::InvalidProblem(m) => CliError::Runtime(format!("system {}: {m}", sys.id)),
            other => CliError::Runtime(format!("system {}: {other}", sys.id)),
        })?;
        let own: Vec<usize> = scenario.grid.assignment(&sys.id).expect("validated").range().collect();
        let victim = scenario.grid.band(&scenario.systems[1 - index].id).expect("validated");
        let profile = global_profile_cache()
            .get_or_compute(&sys.waveform, &layout, &own, &victim)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        if index == 0 {
            if let Some(path) = &cfg.alloc.profile_out {
                write_atomic(Path::new(path), |w| profile.write_csv(w))?;
            }
        }
        for n in 0..own.len() {
            rows.push((
                sys.id.clone(),
                own[n],
                profile.spectral_distances[n],
                profile.coefficients[n],
                problem.gains[n],
                result.powers_w[n],
            ));
        }
        summaries.push(AllocSummary {
            system: sys.id.clone(),
            waveform: sys.waveform.kind(),
            throughput_bps: result.throughput_bps,
            power_used_w: result.power_used_w,
            power_loss_percent: power_loss_percent(result.power_used_w, problem.power_budget_w)
                .map_err(|e| CliError::Runtime(e.to_string()))?,
            interference_w: result.interference_w,
            lambda: result.lambda,
            mu: result.mu,
        });
    }
    write_atomic(out, |w| {
        writeln!(w, "system,subcarrier_index,d_n,coefficient,gain,power_w")?;
        for (s, j, d, c, g, p) in &rows {
            writeln!(w, "{s},{j},{d:.16e},{c:.16e},{g:.16e},{p:.16e}")?;
        }
        Ok(())
    })?;
    Ok(summaries)
}

/// Runs the threshold sweep once per configured waveform (both systems on
/// the same waveform) and writes the combined CSV.
pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<SweepResult, CliError> {
    let scenario = cfg.scenario()?;
    let thresholds = cfg.thresholds_w();
    let mut combined: Option<SweepResult> = None;
    for wf in waveforms(cfg, &cfg.sweep.waveforms)? {
        let r = run_threshold_sweep(&scenario.with_waveform(&wf), &thresholds)?;
        match &mut combined {
            None => combined = Some(r),
            Some(c) => c.merge(r)?,
        }
    }
    let result = combined.expect("at least one waveform is configured");
    write_atomic(out, |w| result.write_csv(w))?;
    Ok(result)
}

/// Orderings expected across waveforms: throughput FBMC >= UFMC >= OFDM at
/// the smallest threshold and power loss OFDM >= UFMC >= FBMC everywhere.
pub fn ordering_violations(result: &SweepResult) -> Vec<String> {
    let mut out = Vec::new();
    let order = [WaveformKind::Fbmc, WaveformKind::Ufmc, WaveformKind::Ofdm];
    let systems: Vec<&str> = {
        let mut s: Vec<&str> = result.curves.iter().map(|c| c.system.as_str()).collect();
        s.dedup();
        s
    };
    for sys in systems {
        let curves: Vec<_> = order.iter().filter_map(|k| result.curve(sys, *k)).collect();
        for pair in curves.windows(2) {
            let (hi, lo) = (pair[0], pair[1]);
            let (a, b) = (&hi.points[0], &lo.points[0]);
            if a.throughput_bps < b.throughput_bps {
                out.push(format!(
                    "{sys}: throughput {} < {} at the smallest threshold",
                    hi.waveform, lo.waveform
                ));
            }
            for (k, (a, b)) in hi.points.iter().zip(&lo.points).enumerate() {
                if a.power_loss_percent > b.power_loss_percent + 1e-6 {
                    out.push(format!(
                        "{sys}: power loss {} > {} at threshold {} W",
                        hi.waveform, lo.waveform, result.thresholds_w[k]
                    ));
                }
            }
        }
    }
    out
}

fn print_sweep_summary(result: &SweepResult) {
    println!("{:<6} {:<5} {:>16} {:>16} {:>12} {:>12}", "system", "wave", "tput_min_bps", "tput_max_bps", "loss_max_%", "loss_min_%");
    for c in &result.curves {
        let t = c.throughput_bps();
        let l = c.power_loss_percent();
        println!(
            "{:<6} {:<5} {:>16.6e} {:>16.6e} {:>12.6} {:>12.6}",
            c.system,
            c.waveform,
            t.first().copied().unwrap_or(f64::NAN),
            t.last().copied().unwrap_or(f64::NAN),
            l.first().copied().unwrap_or(f64::NAN),
            l.last().copied().unwrap_or(f64::NAN),
        );
    }
    let mut issues = result.monotonicity_violations(1e-9, 1e-6);
    issues.extend(ordering_violations(result));
    if issues.is_empty() {
        println!("orderings: ok");
    } else {
        for i in issues {
            println!("orderings: {i}");
        }
    }
}

/// Applies `WAVECOEX_THREADS` (0 or unset: one worker per core).
pub fn configure_threads() -> Result<(), CliError> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got \"{v}\"")))?,
        Err(_) => 0,
    };
    // A pool that already exists (e.g. in tests) is kept as is.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Psd(a) => {
            let cfg = load_config(a.config.as_deref(), a.seed)?;
            let table = cmd_psd(&cfg, &a.out)?;
            println!("wrote {} rows x {} waveforms to {}", table.freqs_hz.len(), table.kinds.len(), a.out.display());
        }
        Command::Alloc(a) => {
            let cfg = load_config(a.config.as_deref(), a.seed)?;
            for s in cmd_alloc(&cfg, &a.out)? {
                println!(
                    "system {} ({}): throughput {:.6e} bit/s, used {:.4} dBm, loss {:.6}%, interference {:.6e} W, lambda {:.6e}, mu {:.6e}",
                    s.system,
                    s.waveform,
                    s.throughput_bps,
                    watts_to_dbm(s.power_used_w),
                    s.power_loss_percent,
                    s.interference_w,
                    s.lambda,
                    s.mu
                );
            }
            println!("wrote {}", a.out.display());
        }
        Command::Sweep(a) => {
            let cfg = load_config(a.config.as_deref(), a.seed)?;
            let result = cmd_sweep(&cfg, &a.out)?;
            print_sweep_summary(&result);
            println!("wrote {}", a.out.display());
            let failed = result
                .curves
                .iter()
                .flat_map(|c| &c.points)
                .filter(|p| matches!(p.status, PointStatus::Failed(_)))
                .count();
            if failed > 0 {
                return Err(CliError::Runtime(format!("{failed} sweep points failed; see the status column")));
            }
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
