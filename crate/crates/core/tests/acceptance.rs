//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.

use std::process::{Command, ExitCode};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use wavecoex::config::{parse_config, RunConfig};
use wavecoex::psd::{PsdCurve, SubcarrierPlacement};
use wavecoex::scenario::default_waveform;
use wavecoex::units::watts_to_dbw;
use wavecoex::{
    chebyshev_window, integrate_psd, psd_ofdm_subcarrier, solve_power_allocation, AllocationProblem, BandSpec,
    OfdmParams, SolverOptions, WaveformKind,
};

mod common;

use common::grid_oracle;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

/// Window 74 / 40 dB: sidelobes of the 64x zero-padded response.
fn criterion_1() -> Outcome {
    let w = chebyshev_window(74, 40.0).map_err(|e| e.to_string())?;
    let n = 64 * w.len();
    let mut buf: Vec<Complex64> = w.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf[..=n / 2].iter().map(|c| c.norm()).collect();
    let peak = mag[0];
    let first_min = (1..mag.len() - 1).find(|&k| mag[k] <= mag[k - 1] && mag[k] <= mag[k + 1]).ok_or("no main-lobe null")?;
    let lobes: Vec<f64> = (first_min + 1..mag.len() - 1)
        .filter(|&k| mag[k] >= mag[k - 1] && mag[k] > mag[k + 1])
        .map(|k| 20.0 * (mag[k] / peak).log10())
        .collect();
    check(lobes.len() > 10, format!("only {} sidelobes found", lobes.len()))?;
    let max = lobes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = lobes.iter().cloned().fold(f64::INFINITY, f64::min);
    check((max + 40.0).abs() <= 0.5, format!("peak sidelobe {max:.4} dB"))?;
    check(min >= -40.5 && max <= -39.5, format!("sidelobes span [{min:.4}, {max:.4}] dB"))?;
    Ok(format!("{} sidelobes within [{min:.4}, {max:.4}] dB", lobes.len()))
}

/// OFDM nulls and peak.
fn criterion_2() -> Outcome {
    let params = OfdmParams::new(15e3).map_err(|e| e.to_string())?;
    let ts = params.symbol_duration_s();
    let p = 0.8;
    let peak = psd_ofdm_subcarrier(0.0, p, &params);
    check(peak == p * ts, format!("peak {peak} != P*Ts {}", p * ts))?;
    let mut worst: f64 = 0.0;
    for m in 1..=20 {
        for sign in [-1.0, 1.0] {
            worst = worst.max(psd_ofdm_subcarrier(sign * m as f64 / ts, p, &params) / peak);
        }
    }
    check(worst < 1e-12, format!("null/peak ratio {worst:e}"))?;
    Ok(format!("peak = P*Ts exactly, worst null/peak {worst:e}"))
}

/// Normalised 60-subcarrier spectra: ordering beyond the band edge.
fn criterion_3() -> Outcome {
    let cfg = RunConfig::default();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let table = wavecoex::cli::cmd_psd(&cfg, &dir.path().join("psd.csv")).map_err(|e| e.to_string())?;
    let df = cfg.subcarrier_spacing_hz();
    let n = cfg.psd.num_subcarriers as f64;
    // Subcarriers occupy bins -n/2 .. n/2 - 1.
    let upper_edge = (n / 2.0 - 0.5) * df;
    let lower_edge = (-n / 2.0 - 0.5) * df;
    let col = |k| table.column(k).expect("all waveforms sampled");
    let (o, f, u) = (col(WaveformKind::Ofdm), col(WaveformKind::Fbmc), col(WaveformKind::Ufmc));
    let mut checked = 0;
    let mut fbmc_worst = f64::NEG_INFINITY;
    for (i, &freq) in table.freqs_hz.iter().enumerate() {
        let beyond = if freq > upper_edge { (freq - upper_edge) / df } else { (lower_edge - freq) / df };
        if !(2.0..=20.0).contains(&beyond) {
            continue;
        }
        checked += 1;
        check(f[i] < u[i] && u[i] < o[i], format!("at {freq} Hz: fbmc {} ufmc {} ofdm {}", f[i], u[i], o[i]))?;
        if beyond >= 10.0 {
            fbmc_worst = fbmc_worst.max(f[i]);
        }
    }
    check(checked > 300, format!("only {checked} samples in the checked range"))?;
    check(fbmc_worst < -60.0, format!("FBMC at >= 10 df reaches {fbmc_worst} dB"))?;
    Ok(format!("{checked} samples ordered; FBMC beyond 10 df <= {fbmc_worst:.1} dB"))
}

fn midpoint_riemann(curve: &dyn PsdCurve, band: &BandSpec, points: usize) -> f64 {
    let h = band.width_hz / points as f64;
    (0..points).map(|k| curve.density(band.start_hz + (k as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Adaptive quadrature against a 10^6-point midpoint sum.
fn criterion_4() -> Outcome {
    let df = 15e3;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for case in 0..10 {
        let kind = WaveformKind::ALL[case % 3];
        let wf = default_waveform(kind, df, 2048).map_err(|e| e.to_string())?;
        let placement = SubcarrierPlacement::new(rng.random_range(-5..=5) as f64, rng.random_range(-2..=2) as f64 + 0.5);
        let curve = wf.subcarrier_curve(placement, rng.random_range(0.1..3.0));
        let band = BandSpec { start_hz: rng.random_range(-3.0..8.0) * df, width_hz: rng.random_range(0.5..24.0) * df };
        let got = integrate_psd(&curve, &band, 1e-9).map_err(|e| e.to_string())?;
        let oracle = midpoint_riemann(&curve, &band, 1_000_000);
        let rel = (got - oracle).abs() / oracle.abs();
        check(rel <= 1e-6, format!("case {case} ({kind}, {band:?}): {got} vs {oracle}, rel {rel:e}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("10 cases, worst relative gap {worst:e}"))
}

/// Allocation against the grid oracle, plus KKT residuals.
fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_gap: f64 = 0.0;
    let mut worst_kkt: f64 = 0.0;
    let mut binding = 0;
    for case in 0..20 {
        let n = rng.random_range(2..=5);
        let gains: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        let coeffs: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-3.0..-0.7))).collect();
        let noise = rng.random_range(0.05..0.2);
        let p_max = rng.random_range(0.5..2.0);
        let i_th = p_max * 10f64.powf(rng.random_range(-2.5..-1.0));
        let problem = AllocationProblem {
            gains: gains.clone(),
            interference_coeffs: coeffs.clone(),
            subcarrier_spacing_hz: 1.0,
            noise_psd_w_per_hz: noise,
            power_budget_w: p_max,
            interference_threshold_w: i_th,
            incoming_interference_w: None,
        };
        let r = solve_power_allocation(&problem, SolverOptions::default()).map_err(|e| e.to_string())?;
        let floors: Vec<f64> = gains.iter().map(|g| noise / g).collect();
        let oracle = grid_oracle(&floors, &coeffs, p_max, i_th);
        let gap = (r.throughput_bps - oracle).abs();
        check(gap <= 1e-3, format!("case {case}: solver {} vs grid {oracle}", r.throughput_bps))?;
        worst_gap = worst_gap.max(gap);

        // KKT: stationarity, dual feasibility, complementary slackness.
        for k in 0..n {
            let level = 1.0 / (r.lambda + r.mu * coeffs[k]);
            let res = if r.powers_w[k] > 0.0 {
                (level - (r.powers_w[k] + floors[k])).abs() / (r.powers_w[k] + floors[k])
            } else {
                ((level - floors[k]) / floors[k]).max(0.0)
            };
            worst_kkt = worst_kkt.max(res);
        }
        check(r.lambda >= 0.0 && r.mu >= 0.0, format!("case {case}: negative multiplier"))?;
        let used: f64 = r.powers_w.iter().sum();
        let interf: f64 = r.powers_w.iter().zip(&coeffs).map(|(p, i)| p * i).sum();
        check(used <= p_max * (1.0 + 1e-9) && interf <= i_th * (1.0 + 1e-9), format!("case {case}: infeasible"))?;
        if r.lambda > 0.0 {
            worst_kkt = worst_kkt.max((used - p_max).abs() / p_max);
        }
        if r.mu > 0.0 {
            worst_kkt = worst_kkt.max((interf - i_th).abs() / i_th);
            binding += 1;
        }
        check(worst_kkt <= 1e-6, format!("case {case}: KKT residual {worst_kkt:e}"))?;
    }
    Ok(format!("20 problems ({binding} with the cap binding), worst gap {worst_gap:e}, worst KKT residual {worst_kkt:e}"))
}

struct Sweeps {
    result: wavecoex::SweepResult,
}

fn default_sweep() -> Result<Sweeps, String> {
    let mut cfg = RunConfig::default();
    cfg.sweep.threshold_min_dbw = -60.0;
    cfg.sweep.threshold_max_dbw = -10.0;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let result = wavecoex::cli::cmd_sweep(&cfg, &dir.path().join("sweep.csv")).map_err(|e| e.to_string())?;
    Ok(Sweeps { result })
}

/// Throughput versus threshold.
fn criterion_6(s: &Sweeps) -> Outcome {
    let r = &s.result;
    for c in &r.curves {
        for k in 1..c.points.len() {
            let (a, b) = (c.points[k - 1].throughput_bps, c.points[k].throughput_bps);
            check(b >= a * (1.0 - 1e-12), format!("{}/{}: throughput {a} -> {b} at point {k}", c.system, c.waveform))?;
        }
    }
    check((r.thresholds_w[0] - 1e-6).abs() < 1e-15, "first threshold is not 1e-6 W".into())?;
    let last = r.thresholds_w.len() - 1;
    check((r.thresholds_w[last] - 0.1).abs() < 1e-12, "last threshold is not 0.1 W".into())?;
    let mut spread = 0.0;
    for sys in ["A", "B"] {
        let t = |k| r.curve(sys, k).expect("curve present").points.clone();
        let (o, f, u) = (t(WaveformKind::Ofdm), t(WaveformKind::Fbmc), t(WaveformKind::Ufmc));
        check(
            f[0].throughput_bps > u[0].throughput_bps && u[0].throughput_bps > o[0].throughput_bps,
            format!("{sys}: at 1e-6 W fbmc {} ufmc {} ofdm {}", f[0].throughput_bps, u[0].throughput_bps, o[0].throughput_bps),
        )?;
        let rel = (f[last].throughput_bps - u[last].throughput_bps).abs() / f[last].throughput_bps;
        check(rel <= 0.01, format!("{sys}: FBMC/UFMC differ by {rel:e} at 0.1 W"))?;
        spread = f64::max(spread, rel);
    }
    let a = |k| r.curve("A", k).unwrap().points[0].throughput_bps / 1e6;
    Ok(format!(
        "non-decreasing; at 1e-6 W FBMC {:.2} > UFMC {:.2} > OFDM {:.2} Mbit/s; FBMC/UFMC gap at 0.1 W {spread:.2e}",
        a(WaveformKind::Fbmc),
        a(WaveformKind::Ufmc),
        a(WaveformKind::Ofdm)
    ))
}

/// Resolution of power-loss comparisons, in percentage points: the same
/// tolerance the criterion grants to a zero loss. Below it, differences are
/// rounding in `100 - 100 * used / budget`.
const LOSS_RESOLUTION_PCT: f64 = 1e-6;

/// Power loss versus threshold.
fn criterion_7(s: &Sweeps) -> Outcome {
    let r = &s.result;
    let mut ufmc_window_points = 0;
    for sys in ["A", "B"] {
        let loss = |k| r.curve(sys, k).expect("curve present").power_loss_percent();
        let (o, f, u) = (loss(WaveformKind::Ofdm), loss(WaveformKind::Fbmc), loss(WaveformKind::Ufmc));
        for k in 0..r.thresholds_w.len() {
            check(f[k].abs() <= 1e-6, format!("{sys}: FBMC loss {}% at point {k}", f[k]))?;
            check(o[k] >= u[k] - LOSS_RESOLUTION_PCT && u[k] >= f[k] - LOSS_RESOLUTION_PCT, format!("{sys}: loss ofdm {} ufmc {} fbmc {} at point {k}", o[k], u[k], f[k]))?;
            let dbw = watts_to_dbw(r.thresholds_w[k]);
            if (-30.0..=-20.0).contains(&dbw) {
                check(u[k].abs() <= 1e-6, format!("{sys}: UFMC loss {}% at {dbw} dBW", u[k]))?;
                ufmc_window_points += 1;
            }
        }
        for curve in [&o, &f, &u] {
            for k in 1..curve.len() {
                check(curve[k] <= curve[k - 1] + LOSS_RESOLUTION_PCT, format!("{sys}: loss rises {} -> {} at point {k}", curve[k - 1], curve[k]))?;
            }
        }
    }
    check(ufmc_window_points > 0, "no sweep point in [-30, -20] dBW".into())?;
    let o = r.curve("A", WaveformKind::Ofdm).unwrap().power_loss_percent();
    Ok(format!("FBMC 0%, UFMC 0% on [-30, -20] dBW, OFDM from {:.2}% down to {:.2e}%", o[0], o[o.len() - 1]))
}

/// Two independent processes, same configuration and seed.
fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "num_users = 3\n[grid]\ntotal_subcarriers = 240\nfft_size = 512\n[channel]\nmodel = \"multipath\"\n\
         [sweep]\npoints = 6\nthreshold_min_dbw = -50\nthreshold_max_dbw = -20\n",
    )
    .map_err(|e| e.to_string())?;
    parse_config(&std::fs::read_to_string(&config).unwrap()).map_err(|e| e.to_string())?;
    let run = |name: &str, seed: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_wavecoex"))
            .args(["sweep", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--seed", seed])
            .output()
            .map_err(|e| e.to_string())?;
        check(status.status.success(), format!("sweep exited with {:?}", status.status.code()))?;
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let a = run("a.csv", "11")?;
    let b = run("b.csv", "11")?;
    check(a == b, "outputs differ".into())?;
    let c = run("c.csv", "12")?;
    check(a != c, "seed has no effect on the multipath scenario".into())?;
    Ok(format!("{} bytes identical across runs", a.len()))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("criterion {n} [{name}]: PASS - {detail}"),
        Err(detail) => {
            failed += 1;
            println!("criterion {n} [{name}]: FAIL - {detail}");
        }
    };
    report(1, "chebyshev window sidelobes", criterion_1());
    report(2, "ofdm nulls and peak", criterion_2());
    report(3, "psd ordering beyond band edge", criterion_3());
    report(4, "quadrature vs riemann", criterion_4());
    report(5, "allocation vs grid search", criterion_5());
    match default_sweep() {
        Ok(s) => {
            report(6, "throughput vs threshold", criterion_6(&s));
            report(7, "power loss vs threshold", criterion_7(&s));
        }
        Err(e) => {
            report(6, "throughput vs threshold", Err(format!("sweep failed: {e}")));
            report(7, "power loss vs threshold", Err(format!("sweep failed: {e}")));
        }
    }
    report(8, "sweep determinism", criterion_8());
    if failed == 0 {
        println!("acceptance: all 8 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
