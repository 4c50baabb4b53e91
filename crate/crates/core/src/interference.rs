//! Interference integrals: how much of a subcarrier's power lands in a
//! neighbouring system's band.
//!
//! For a subcarrier centred at `f_n` and a victim band `[a, a + B]` the
//! coefficient is `integral_{a - f_n}^{a - f_n + B} psd(f) df` for a unit-power
//! PSD. With `d_n` the spectral distance in subcarrier spacings, the lower
//! limit is `(d_n - 1/2) df`, so `d_n = 1` puts the victim band edge half a
//! spacing beyond the subcarrier centre.

use std::collections::HashMap;
use std::io::{self, Write};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use thiserror::Error;

use crate::psd::{PsdCurve, SubcarrierPlacement, Waveform};
use crate::quadrature::{self, QuadratureError, QuadratureOptions, DEFAULT_MAX_DEPTH};

pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Absolute floor on band integrals, as a fraction of the curve's total
/// power. Far sidelobes of filtered waveforms are formed by heavy
/// cancellation and carry rounding noise around this level.
pub const NOISE_FLOOR_FRACTION: f64 = 1e-22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterferenceError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("relative tolerance {0} outside (1e-14, 1e-2)")]
    InvalidTolerance(f64),
    #[error("band [{lo_hz}, {hi_hz}] Hz is outside the curve's support [{support_lo}, {support_hi}] Hz")]
    OutsideSupport { lo_hz: f64, hi_hz: f64, support_lo: f64, support_hi: f64 },
    #[error("geometry error: {0}")]
    Geometry(String),
}

/// Victim band `[start_hz, start_hz + width_hz]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub start_hz: f64,
    pub width_hz: f64,
}

impl BandSpec {
    pub fn new(start_hz: f64, width_hz: f64) -> Result<Self, InterferenceError> {
        if !(width_hz > 0.0 && width_hz.is_finite() && start_hz.is_finite()) {
            return Err(InterferenceError::Geometry(format!(
                "band width must be finite and > 0, got {width_hz}"
            )));
        }
        Ok(BandSpec { start_hz, width_hz })
    }

    pub fn end_hz(&self) -> f64 {
        self.start_hz + self.width_hz
    }

    pub fn shifted(&self, offset_hz: f64) -> BandSpec {
        BandSpec { start_hz: self.start_hz + offset_hz, width_hz: self.width_hz }
    }
}

/// Integrates `curve` over `band` with adaptive Simpson quadrature.
pub fn integrate_psd(
    curve: &(impl PsdCurve + ?Sized),
    band: &BandSpec,
    rel_tol: f64,
) -> Result<f64, InterferenceError> {
    if !(rel_tol > 1e-14 && rel_tol < 1e-2) {
        return Err(InterferenceError::InvalidTolerance(rel_tol));
    }
    let support = curve.support();
    if !support.contains(band.start_hz, band.end_hz()) {
        return Err(InterferenceError::OutsideSupport {
            lo_hz: band.start_hz,
            hi_hz: band.end_hz(),
            support_lo: support.lo_hz,
            support_hi: support.hi_hz,
        });
    }
    let abs_tol = curve.total_power_w().map_or(0.0, |p| p.abs() * NOISE_FLOOR_FRACTION);
    let opts = QuadratureOptions { rel_tol, abs_tol, max_depth: DEFAULT_MAX_DEPTH };
    let v = quadrature::integrate(
        &|f| curve.density(f),
        band.start_hz,
        band.end_hz(),
        curve.breakpoint_grid(),
        opts,
    )?;
    Ok(v.max(0.0))
}

/// Unit-power interference of one subcarrier into a band starting
/// `(d_n - 1/2)` spacings above its centre and `band_width_hz` wide.
pub fn interference_coefficient(
    waveform: &Waveform,
    placement: SubcarrierPlacement,
    d_n: f64,
    band_width_hz: f64,
) -> Result<f64, InterferenceError> {
    if !(d_n >= 0.5) {
        return Err(InterferenceError::Geometry(format!(
            "spectral distance {d_n} < 1/2 overlaps the subcarrier centre"
        )));
    }
    let df = waveform.subcarrier_spacing_hz();
    let band = BandSpec::new((d_n - 0.5) * df, band_width_hz)?;
    let curve = waveform.subcarrier_curve(placement, 1.0);
    integrate_psd(&curve, &band, DEFAULT_REL_TOL)
}

/// Subcarrier raster: grid index `j` sits at `j * spacing` Hz, at baseband
/// bin `j - total/2`, inside resource block `j / rb_size`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterLayout {
    pub total_subcarriers: usize,
    pub rb_size: usize,
    pub subcarrier_spacing_hz: f64,
}

impl RasterLayout {
    pub fn center_hz(&self, index: usize) -> f64 {
        index as f64 * self.subcarrier_spacing_hz
    }

    pub fn placement(&self, index: usize) -> SubcarrierPlacement {
        let half = (self.total_subcarriers / 2) as f64;
        let rb_start = (index / self.rb_size) * self.rb_size;
        let rb_center = rb_start as f64 + (self.rb_size as f64 - 1.0) / 2.0;
        SubcarrierPlacement::new(index as f64 - half, rb_center - half)
    }

    /// Band covering grid indices `[start, start + len)` edge to edge.
    pub fn band_of(&self, start: usize, len: usize) -> BandSpec {
        let df = self.subcarrier_spacing_hz;
        BandSpec { start_hz: (start as f64 - 0.5) * df, width_hz: len as f64 * df }
    }
}

/// Per-subcarrier unit-power interference coefficients into one victim band.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceProfile {
    pub subcarriers: Vec<usize>,
    pub spectral_distances: Vec<f64>,
    pub coefficients: Vec<f64>,
}

impl InterferenceProfile {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Aggregate interference `sum_n p_n i_n` for a power vector.
    pub fn total(&self, powers_w: &[f64]) -> f64 {
        powers_w.iter().zip(&self.coefficients).map(|(p, i)| p * i).sum()
    }

    /// CSV with columns `subcarrier_index,d_n,coefficient`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "subcarrier_index,d_n,coefficient")?;
        for ((j, d), c) in self.subcarriers.iter().zip(&self.spectral_distances).zip(&self.coefficients) {
            writeln!(out, "{j},{d:.16e},{c:.16e}")?;
        }
        Ok(())
    }
}

/// Interference profile of `own` subcarriers toward `victim`.
///
/// Coefficients are computed independently per subcarrier (in parallel) and
/// returned in the order of `own`.
pub fn interference_profile(
    waveform: &Waveform,
    layout: &RasterLayout,
    own: &[usize],
    victim: &BandSpec,
) -> Result<InterferenceProfile, InterferenceError> {
    let df = layout.subcarrier_spacing_hz;
    let mut distances = Vec::with_capacity(own.len());
    for &j in own {
        let c = layout.center_hz(j);
        let d = if c < victim.start_hz {
            (victim.start_hz - c) / df + 0.5
        } else if c > victim.end_hz() {
            (c - victim.end_hz()) / df + 0.5
        } else {
            return Err(InterferenceError::Geometry(format!(
                "subcarrier {j} at {c} Hz lies inside the victim band [{}, {}] Hz",
                victim.start_hz,
                victim.end_hz()
            )));
        };
        distances.push(d);
    }

    let placements: Vec<SubcarrierPlacement> = own.iter().map(|&j| layout.placement(j)).collect();
    let curves = waveform.subcarrier_curves(&placements, 1.0);
    let coefficients = own
        .par_iter()
        .zip(curves.par_iter())
        .map(|(&j, curve)| integrate_psd(curve, &victim.shifted(-layout.center_hz(j)), DEFAULT_REL_TOL))
        .collect::<Result<Vec<f64>, _>>()?;

    Ok(InterferenceProfile { subcarriers: own.to_vec(), spectral_distances: distances, coefficients })
}

/// Write-once, read-many cache of interference profiles keyed by waveform,
/// raster and geometry. Profiles do not depend on power, so threshold sweeps
/// reuse them.
#[derive(Debug, Default)]
pub struct ProfileCache {
    entries: Mutex<HashMap<Vec<u64>, Arc<InterferenceProfile>>>,
}

impl ProfileCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("profile cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_or_compute(
        &self,
        waveform: &Waveform,
        layout: &RasterLayout,
        own: &[usize],
        victim: &BandSpec,
    ) -> Result<Arc<InterferenceProfile>, InterferenceError> {
        let key = Self::key(waveform, layout, own, victim);
        if let Some(p) = self.entries.lock().expect("profile cache poisoned").get(&key) {
            return Ok(Arc::clone(p));
        }
        // Computed outside the lock; a concurrent duplicate computes the same
        // values and the first insertion wins.
        let profile = Arc::new(interference_profile(waveform, layout, own, victim)?);
        let mut entries = self.entries.lock().expect("profile cache poisoned");
        Ok(Arc::clone(entries.entry(key).or_insert(profile)))
    }

    fn key(waveform: &Waveform, layout: &RasterLayout, own: &[usize], victim: &BandSpec) -> Vec<u64> {
        let mut key = waveform.fingerprint();
        key.extend([
            layout.total_subcarriers as u64,
            layout.rb_size as u64,
            layout.subcarrier_spacing_hz.to_bits(),
            victim.start_hz.to_bits(),
            victim.width_hz.to_bits(),
            own.len() as u64,
        ]);
        key.extend(own.iter().map(|&j| j as u64));
        key
    }
}

/// Process-wide profile cache.
pub fn global_profile_cache() -> &'static ProfileCache {
    static CACHE: OnceLock<ProfileCache> = OnceLock::new();
    CACHE.get_or_init(ProfileCache::new)
}
