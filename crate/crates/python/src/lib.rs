//! Python bindings: waveforms and their spectra, interference integrals,
//! power allocation and the threshold sweep.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wavecoex::config::{parse_config, ConfigError};
use wavecoex::psd::PsdCurve;
use wavecoex::{
    AllocationProblem, BandSpec, FbmcParams, OfdmParams, SolverOptions, SubcarrierPlacement, UfmcParams,
    WaveformKind,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// A waveform with its spectral parameters.
#[pyclass(name = "Waveform", module = "wavecoex", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWaveform {
    inner: wavecoex::Waveform,
}

#[pymethods]
impl PyWaveform {
    #[staticmethod]
    #[pyo3(signature = (subcarrier_spacing_hz = 15e3))]
    fn ofdm(subcarrier_spacing_hz: f64) -> PyResult<Self> {
        Ok(PyWaveform { inner: wavecoex::Waveform::Ofdm(OfdmParams::new(subcarrier_spacing_hz).map_err(value_err)?) })
    }

    /// FBMC; `coefficients` defaults to the PHYDYAS K = 4 set.
    #[staticmethod]
    #[pyo3(signature = (subcarrier_spacing_hz = 15e3, fft_size = 2048, coefficients = None))]
    fn fbmc(subcarrier_spacing_hz: f64, fft_size: usize, coefficients: Option<Vec<f64>>) -> PyResult<Self> {
        let params = match coefficients {
            Some(c) => FbmcParams::new(c.len(), fft_size, c, subcarrier_spacing_hz),
            None => FbmcParams::phydyas(fft_size, subcarrier_spacing_hz),
        }
        .map_err(value_err)?;
        Ok(PyWaveform { inner: wavecoex::Waveform::Fbmc(params) })
    }

    #[staticmethod]
    #[pyo3(signature = (subcarrier_spacing_hz = 15e3, fft_size = 2048, filter_length = 74, alpha_db = 40.0, psd_oversampling = 16))]
    fn ufmc(
        subcarrier_spacing_hz: f64,
        fft_size: usize,
        filter_length: usize,
        alpha_db: f64,
        psd_oversampling: usize,
    ) -> PyResult<Self> {
        let params = UfmcParams::new(filter_length, alpha_db, fft_size, psd_oversampling, subcarrier_spacing_hz)
            .map_err(value_err)?;
        Ok(PyWaveform { inner: wavecoex::Waveform::Ufmc(params) })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().name()
    }

    #[getter]
    fn subcarrier_spacing_hz(&self) -> f64 {
        self.inner.subcarrier_spacing_hz()
    }

    /// Subcarrier PSD (W/Hz) at `offset_hz` from the subcarrier centre.
    #[pyo3(signature = (offset_hz, power_w = 1.0, subcarrier_bin = 0.0, rb_center_bin = 0.0))]
    fn psd(&self, offset_hz: f64, power_w: f64, subcarrier_bin: f64, rb_center_bin: f64) -> f64 {
        let pl = SubcarrierPlacement::new(subcarrier_bin, rb_center_bin);
        self.inner.subcarrier_curve(pl, power_w).density(offset_hz)
    }

    /// Power of a unit subcarrier inside `[start_hz, start_hz + width_hz]`,
    /// offsets relative to the subcarrier centre.
    #[pyo3(signature = (start_hz, width_hz, subcarrier_bin = 0.0, rb_center_bin = 0.0, rel_tol = 1e-9))]
    fn band_power(
        &self,
        start_hz: f64,
        width_hz: f64,
        subcarrier_bin: f64,
        rb_center_bin: f64,
        rel_tol: f64,
    ) -> PyResult<f64> {
        let pl = SubcarrierPlacement::new(subcarrier_bin, rb_center_bin);
        let band = BandSpec::new(start_hz, width_hz).map_err(value_err)?;
        wavecoex::integrate_psd(&self.inner.subcarrier_curve(pl, 1.0), &band, rel_tol).map_err(runtime_err)
    }

    fn __repr__(&self) -> String {
        format!("Waveform.{}(subcarrier_spacing_hz={})", self.kind(), self.subcarrier_spacing_hz())
    }
}

#[pyfunction]
fn chebyshev_window(filter_length: usize, alpha_db: f64) -> PyResult<Vec<f64>> {
    wavecoex::chebyshev_window(filter_length, alpha_db).map_err(value_err)
}

/// Unit-power interference of one subcarrier into a band starting
/// `d_n - 1/2` spacings above it.
#[pyfunction]
#[pyo3(signature = (waveform, d_n, band_width_hz, subcarrier_bin = 0.0, rb_center_bin = 0.0))]
fn interference_coefficient(
    waveform: &PyWaveform,
    d_n: f64,
    band_width_hz: f64,
    subcarrier_bin: f64,
    rb_center_bin: f64,
) -> PyResult<f64> {
    let pl = SubcarrierPlacement::new(subcarrier_bin, rb_center_bin);
    wavecoex::interference_coefficient(&waveform.inner, pl, d_n, band_width_hz).map_err(value_err)
}

/// Solves the allocation; returns a dict with powers, multipliers and totals.
#[pyfunction]
#[pyo3(signature = (gains, interference_coeffs, subcarrier_spacing_hz, noise_psd_w_per_hz, power_budget_w, interference_threshold_w, incoming_interference_w = None))]
#[allow(clippy::too_many_arguments)]
fn solve_power_allocation<'py>(
    py: Python<'py>,
    gains: Vec<f64>,
    interference_coeffs: Vec<f64>,
    subcarrier_spacing_hz: f64,
    noise_psd_w_per_hz: f64,
    power_budget_w: f64,
    interference_threshold_w: f64,
    incoming_interference_w: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let problem = AllocationProblem {
        gains,
        interference_coeffs,
        subcarrier_spacing_hz,
        noise_psd_w_per_hz,
        power_budget_w,
        interference_threshold_w,
        incoming_interference_w,
    };
    let r = py
        .detach(|| wavecoex::solve_power_allocation(&problem, SolverOptions::default()))
        .map_err(|e| match e {
            wavecoex::AllocationError::InvalidProblem(_) => value_err(e),
            other => runtime_err(other),
        })?;
    let d = PyDict::new(py);
    d.set_item("powers_w", r.powers_w)?;
    d.set_item("lambda", r.lambda)?;
    d.set_item("mu", r.mu)?;
    d.set_item("throughput_bps", r.throughput_bps)?;
    d.set_item("power_used_w", r.power_used_w)?;
    d.set_item("interference_w", r.interference_w)?;
    d.set_item("power_binding", r.power_binding)?;
    d.set_item("interference_binding", r.interference_binding)?;
    Ok(d)
}

#[pyfunction]
fn power_loss_percent(power_used_w: f64, power_budget_w: f64) -> PyResult<f64> {
    wavecoex::power_loss_percent(power_used_w, power_budget_w).map_err(value_err)
}

/// Normalised multicarrier spectra; returns `{"freq_hz": [...], "<kind>_db": [...]}`.
#[pyfunction]
#[pyo3(signature = (waveforms, num_subcarriers = 60, rb_size = 12, f_lo_hz = -1.5e6, f_hi_hz = 1.5e6, num_points = 2000))]
fn psd_comparison<'py>(
    py: Python<'py>,
    waveforms: Vec<PyRef<'py, PyWaveform>>,
    num_subcarriers: usize,
    rb_size: usize,
    f_lo_hz: f64,
    f_hi_hz: f64,
    num_points: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let wfs: Vec<wavecoex::Waveform> = waveforms.iter().map(|w| w.inner.clone()).collect();
    let t = py
        .detach(|| wavecoex::sample_psd_comparison(&wfs, num_subcarriers, rb_size, (f_lo_hz, f_hi_hz), num_points))
        .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("freq_hz", t.freqs_hz)?;
    for (k, col) in t.kinds.iter().zip(t.db) {
        d.set_item(format!("{}_db", k.name()), col)?;
    }
    Ok(d)
}

fn config_err(e: ConfigError) -> PyErr {
    value_err(e)
}

/// Runs the threshold sweep described by a TOML configuration (empty for
/// the default scenario). Returns `{"threshold_w": [...], "curves": [...]}`
/// with one dict per system and waveform.
#[pyfunction]
#[pyo3(signature = (config_toml = "", seed = None))]
fn sweep<'py>(py: Python<'py>, config_toml: &str, seed: Option<u64>) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = parse_config(config_toml).map_err(config_err)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let scenario = cfg.scenario().map_err(config_err)?;
    let thresholds = cfg.thresholds_w();
    let mut runs = Vec::new();
    for kind in &cfg.sweep.waveforms {
        runs.push(cfg.waveform(*kind).map_err(value_err)?);
    }
    let results = py.detach(|| {
        runs.iter()
            .map(|wf| wavecoex::run_threshold_sweep(&scenario.with_waveform(wf), &thresholds))
            .collect::<Result<Vec<_>, _>>()
    });
    let results = results.map_err(runtime_err)?;
    let curves = pyo3::types::PyList::empty(py);
    for r in &results {
        for c in &r.curves {
            let d = PyDict::new(py);
            d.set_item("system", &c.system)?;
            d.set_item("waveform", c.waveform.name())?;
            d.set_item("throughput_bps", c.throughput_bps())?;
            d.set_item("power_used_w", c.power_used_w())?;
            d.set_item("power_loss_pct", c.power_loss_percent())?;
            d.set_item("status", c.points.iter().map(|p| p.status.label()).collect::<Vec<_>>())?;
            curves.append(d)?;
        }
    }
    let out = PyDict::new(py);
    out.set_item("threshold_w", thresholds)?;
    out.set_item("curves", curves)?;
    Ok(out)
}

/// The fully resolved configuration for `config_toml`, as TOML.
#[pyfunction]
#[pyo3(signature = (config_toml = ""))]
fn resolve_config(config_toml: &str) -> PyResult<String> {
    Ok(parse_config(config_toml).map_err(config_err)?.to_toml())
}

#[pyfunction]
fn waveform_kinds() -> Vec<&'static str> {
    WaveformKind::ALL.iter().map(|k| k.name()).collect()
}

#[pymodule]
#[pyo3(name = "wavecoex")]
fn wavecoex_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWaveform>()?;
    m.add_function(wrap_pyfunction!(chebyshev_window, m)?)?;
    m.add_function(wrap_pyfunction!(interference_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(solve_power_allocation, m)?)?;
    m.add_function(wrap_pyfunction!(power_loss_percent, m)?)?;
    m.add_function(wrap_pyfunction!(psd_comparison, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(resolve_config, m)?)?;
    m.add_function(wrap_pyfunction!(waveform_kinds, m)?)?;
    Ok(())
}
