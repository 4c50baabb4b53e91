//! Power spectral density models for OFDM, FBMC and UFMC subcarriers.
//!
//! Every per-subcarrier curve is normalised to carry its nominal power: the
//! integral of the density over all frequency (one Nyquist period for UFMC)
//! equals the subcarrier power. Frequencies passed to a curve are offsets in
//! Hz from the subcarrier's own centre.

mod fbmc;
mod ofdm;
mod ufmc;
mod window;

use thiserror::Error;

pub use fbmc::{psd_fbmc_subcarrier, FbmcParams, FbmcSubcarrierPsd, PHYDYAS_K4};
pub use ofdm::{psd_ofdm_subcarrier, OfdmParams, OfdmSubcarrierPsd};
pub use ufmc::{
    build_ufmc_subband_filter, psd_ufmc_subcarrier, UfmcParams, UfmcSampledSpectrum,
    UfmcSubcarrierPsd,
};
pub use window::{chebyshev_poly, chebyshev_window, dolph_kappa, write_window_csv};

/// Denominators below this magnitude are treated as removable singularities.
pub(crate) const SINGULARITY_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PsdError {
    #[error("parameter `{name}` out of range: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("offset {offset_hz} Hz outside the computed span [{lo_hz}, {hi_hz}) Hz")]
    OutOfSpan { offset_hz: f64, lo_hz: f64, hi_hz: f64 },
    #[error("waveform kind {expected} does not match parameters for {found}")]
    KindMismatch { expected: WaveformKind, found: WaveformKind },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> PsdError {
    PsdError::InvalidParameter { name, reason: reason.into() }
}

/// `sin(pi x)` with argument reduction, exactly zero at integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let s = (std::f64::consts::PI * (x - n)).sin();
    if n.rem_euclid(2.0) == 0.0 {
        s
    } else {
        -s
    }
}

/// `cos(pi x)` with argument reduction.
pub(crate) fn cos_pi(x: f64) -> f64 {
    let n = x.round();
    let c = (std::f64::consts::PI * (x - n)).cos();
    if n.rem_euclid(2.0) == 0.0 {
        c
    } else {
        -c
    }
}

/// Normalised sinc, `sin(pi x) / (pi x)`.
pub(crate) fn sinc(x: f64) -> f64 {
    let px = std::f64::consts::PI * x;
    if px.abs() < SINGULARITY_EPS {
        1.0
    } else {
        sin_pi(x) / px
    }
}

/// Frequency interval on which a curve is defined. Bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl Support {
    pub const UNBOUNDED: Support = Support { lo_hz: f64::NEG_INFINITY, hi_hz: f64::INFINITY };

    pub fn contains(&self, lo: f64, hi: f64) -> bool {
        lo >= self.lo_hz && hi <= self.hi_hz
    }
}

/// A power spectral density evaluable at any frequency offset (W/Hz).
pub trait PsdCurve: Send + Sync {
    fn density(&self, offset_hz: f64) -> f64;

    fn support(&self) -> Support {
        Support::UNBOUNDED
    }

    /// Regular grid `(origin, step)` of points where the curve has nulls or
    /// kinks. Quadrature splits its interval there.
    fn breakpoint_grid(&self) -> Option<(f64, f64)> {
        None
    }

    /// Total power carried by the curve, when known. Integration uses it to
    /// set an absolute floor below which rounding noise dominates.
    fn total_power_w(&self) -> Option<f64> {
        None
    }
}

impl<F> PsdCurve for F
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn density(&self, offset_hz: f64) -> f64 {
        self(offset_hz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WaveformKind {
    Ofdm,
    Fbmc,
    Ufmc,
}

impl WaveformKind {
    pub const ALL: [WaveformKind; 3] = [WaveformKind::Ofdm, WaveformKind::Fbmc, WaveformKind::Ufmc];

    pub fn name(&self) -> &'static str {
        match self {
            WaveformKind::Ofdm => "ofdm",
            WaveformKind::Fbmc => "fbmc",
            WaveformKind::Ufmc => "ufmc",
        }
    }

    pub fn parse(name: &str) -> Option<WaveformKind> {
        match name.to_ascii_lowercase().as_str() {
            "ofdm" => Some(WaveformKind::Ofdm),
            "fbmc" => Some(WaveformKind::Fbmc),
            "ufmc" => Some(WaveformKind::Ufmc),
            _ => None,
        }
    }
}

impl std::fmt::Display for WaveformKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Position of a subcarrier in the FFT raster.
///
/// Only UFMC depends on it: its filter is centred on the resource block, and
/// its spectrum is evaluated over the Nyquist band of the raster. Bins are
/// signed baseband indices (DC = 0).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SubcarrierPlacement {
    pub subcarrier_bin: f64,
    pub rb_center_bin: f64,
}

impl SubcarrierPlacement {
    pub fn new(subcarrier_bin: f64, rb_center_bin: f64) -> Self {
        SubcarrierPlacement { subcarrier_bin, rb_center_bin }
    }
}

/// Waveform together with its spectral parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    Ofdm(OfdmParams),
    Fbmc(FbmcParams),
    Ufmc(UfmcParams),
}

impl Waveform {
    pub fn kind(&self) -> WaveformKind {
        match self {
            Waveform::Ofdm(_) => WaveformKind::Ofdm,
            Waveform::Fbmc(_) => WaveformKind::Fbmc,
            Waveform::Ufmc(_) => WaveformKind::Ufmc,
        }
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        match self {
            Waveform::Ofdm(p) => p.subcarrier_spacing_hz(),
            Waveform::Fbmc(p) => p.subcarrier_spacing_hz(),
            Waveform::Ufmc(p) => p.subcarrier_spacing_hz(),
        }
    }

    /// Spectrum of one subcarrier carrying `power_w`.
    pub fn subcarrier_curve(&self, placement: SubcarrierPlacement, power_w: f64) -> SubcarrierPsd {
        match self {
            Waveform::Ofdm(p) => SubcarrierPsd::Ofdm(OfdmSubcarrierPsd::new(p.clone(), power_w)),
            Waveform::Fbmc(p) => SubcarrierPsd::Fbmc(FbmcSubcarrierPsd::new(p.clone(), power_w)),
            Waveform::Ufmc(p) => {
                SubcarrierPsd::Ufmc(UfmcSubcarrierPsd::new(p.clone(), placement, power_w))
            }
        }
    }

    /// Curves for many subcarriers at once. UFMC normalisations are shared
    /// between subcarriers at the same position relative to their RB centre.
    pub fn subcarrier_curves(
        &self,
        placements: &[SubcarrierPlacement],
        power_w: f64,
    ) -> Vec<SubcarrierPsd> {
        match self {
            Waveform::Ufmc(p) => {
                let mut energies: Vec<(f64, f64)> = Vec::new();
                placements
                    .iter()
                    .map(|pl| {
                        let delta = pl.subcarrier_bin - pl.rb_center_bin;
                        let energy = match energies.iter().find(|(d, _)| *d == delta) {
                            Some(&(_, e)) => e,
                            None => {
                                let e = p.subcarrier_energy(delta);
                                energies.push((delta, e));
                                e
                            }
                        };
                        SubcarrierPsd::Ufmc(UfmcSubcarrierPsd::with_energy(
                            p.clone(),
                            *pl,
                            power_w,
                            energy,
                        ))
                    })
                    .collect()
            }
            _ => placements.iter().map(|pl| self.subcarrier_curve(*pl, power_w)).collect(),
        }
    }

    /// Stable bit-level fingerprint, used as a cache key.
    pub fn fingerprint(&self) -> Vec<u64> {
        match self {
            Waveform::Ofdm(p) => {
                vec![0, p.symbol_duration_s().to_bits(), p.subcarrier_spacing_hz().to_bits()]
            }
            Waveform::Fbmc(p) => {
                let mut v = vec![
                    1,
                    p.overlap_factor() as u64,
                    p.fft_size() as u64,
                    p.subcarrier_spacing_hz().to_bits(),
                ];
                v.extend(p.polyphase_coeffs().iter().map(|c| c.to_bits()));
                v
            }
            Waveform::Ufmc(p) => vec![
                2,
                p.filter_length() as u64,
                p.sidelobe_attenuation_db().to_bits(),
                p.fft_size() as u64,
                p.psd_oversampling() as u64,
                p.subcarrier_spacing_hz().to_bits(),
            ],
        }
    }
}

/// Concrete per-subcarrier curve for any waveform.
#[derive(Debug, Clone)]
pub enum SubcarrierPsd {
    Ofdm(OfdmSubcarrierPsd),
    Fbmc(FbmcSubcarrierPsd),
    Ufmc(UfmcSubcarrierPsd),
}

impl PsdCurve for SubcarrierPsd {
    fn density(&self, offset_hz: f64) -> f64 {
        match self {
            SubcarrierPsd::Ofdm(c) => c.density(offset_hz),
            SubcarrierPsd::Fbmc(c) => c.density(offset_hz),
            SubcarrierPsd::Ufmc(c) => c.density(offset_hz),
        }
    }

    fn support(&self) -> Support {
        match self {
            SubcarrierPsd::Ofdm(c) => c.support(),
            SubcarrierPsd::Fbmc(c) => c.support(),
            SubcarrierPsd::Ufmc(c) => c.support(),
        }
    }

    fn breakpoint_grid(&self) -> Option<(f64, f64)> {
        match self {
            SubcarrierPsd::Ofdm(c) => c.breakpoint_grid(),
            SubcarrierPsd::Fbmc(c) => c.breakpoint_grid(),
            SubcarrierPsd::Ufmc(c) => c.breakpoint_grid(),
        }
    }

    fn total_power_w(&self) -> Option<f64> {
        Some(match self {
            SubcarrierPsd::Ofdm(c) => c.power_w(),
            SubcarrierPsd::Fbmc(c) => c.power_w(),
            SubcarrierPsd::Ufmc(c) => c.power_w(),
        })
    }
}

/// Contiguous group of subcarriers with per-subcarrier power loadings.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceBlockSpec {
    pub start_subcarrier: usize,
    powers_w: Vec<f64>,
}

impl ResourceBlockSpec {
    pub fn new(start_subcarrier: usize, powers_w: Vec<f64>) -> Result<Self, PsdError> {
        if powers_w.is_empty() {
            return Err(invalid("powers_w", "resource block needs at least one subcarrier"));
        }
        if let Some(p) = powers_w.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(invalid("powers_w", format!("powers must be finite and >= 0, got {p}")));
        }
        Ok(ResourceBlockSpec { start_subcarrier, powers_w })
    }

    pub fn uniform(start_subcarrier: usize, num_subcarriers: usize, power_w: f64) -> Result<Self, PsdError> {
        Self::new(start_subcarrier, vec![power_w; num_subcarriers])
    }

    pub fn num_subcarriers(&self) -> usize {
        self.powers_w.len()
    }

    pub fn powers_w(&self) -> &[f64] {
        &self.powers_w
    }

    /// Placements with the RB centred on DC, as used for RB-level spectra.
    pub fn centered_placements(&self) -> Vec<SubcarrierPlacement> {
        let n = self.num_subcarriers();
        let center = (n as f64 - 1.0) / 2.0;
        (0..n)
            .map(|i| SubcarrierPlacement::new(i as f64 - center, 0.0))
            .collect()
    }
}

/// Resource-block spectrum: per-subcarrier spectra shifted to each
/// subcarrier's centre and weighted by its power.
///
/// `f_offset_hz` is measured from the centre of the RB's first subcarrier.
/// UFMC blocks are evaluated with the RB centred on DC of the raster.
pub fn psd_resource_block(
    kind: WaveformKind,
    rb: &ResourceBlockSpec,
    waveform: &Waveform,
    f_offset_hz: f64,
) -> Result<f64, PsdError> {
    if kind != waveform.kind() {
        return Err(PsdError::KindMismatch { expected: kind, found: waveform.kind() });
    }
    Ok(ResourceBlockPsd::new(waveform, rb).density(f_offset_hz))
}

/// Reusable resource-block spectrum. Offsets are relative to the centre of
/// the first subcarrier.
#[derive(Debug, Clone)]
pub struct ResourceBlockPsd {
    spacing_hz: f64,
    curves: Vec<SubcarrierPsd>,
}

impl ResourceBlockPsd {
    pub fn new(waveform: &Waveform, rb: &ResourceBlockSpec) -> Self {
        let placements = rb.centered_placements();
        let unit = waveform.subcarrier_curves(&placements, 1.0);
        let curves = unit
            .into_iter()
            .zip(rb.powers_w())
            .map(|(c, &p)| with_power(c, p))
            .collect();
        ResourceBlockPsd { spacing_hz: waveform.subcarrier_spacing_hz(), curves }
    }
}

fn with_power(curve: SubcarrierPsd, power_w: f64) -> SubcarrierPsd {
    match curve {
        SubcarrierPsd::Ofdm(c) => SubcarrierPsd::Ofdm(c.scaled(power_w)),
        SubcarrierPsd::Fbmc(c) => SubcarrierPsd::Fbmc(c.scaled(power_w)),
        SubcarrierPsd::Ufmc(c) => SubcarrierPsd::Ufmc(c.scaled(power_w)),
    }
}

impl PsdCurve for ResourceBlockPsd {
    fn density(&self, offset_hz: f64) -> f64 {
        self.curves
            .iter()
            .enumerate()
            .map(|(n, c)| c.density(offset_hz - n as f64 * self.spacing_hz))
            .sum()
    }

    fn total_power_w(&self) -> Option<f64> {
        self.curves.iter().map(|c| c.total_power_w()).sum()
    }
}
