use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::window::{chebyshev_poly, chebyshev_window, dolph_kappa};
use super::{cos_pi, invalid, sin_pi, PsdCurve, PsdError, SubcarrierPlacement, Support, SINGULARITY_EPS};

/// UFMC sub-band filter and raster parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct UfmcParams {
    filter_length: usize,
    sidelobe_attenuation_db: f64,
    fft_size: usize,
    psd_oversampling: usize,
    subcarrier_spacing_hz: f64,
    kappa: f64,
    ripple: f64,
}

impl UfmcParams {
    pub fn new(
        filter_length: usize,
        sidelobe_attenuation_db: f64,
        fft_size: usize,
        psd_oversampling: usize,
        subcarrier_spacing_hz: f64,
    ) -> Result<Self, PsdError> {
        let kappa = dolph_kappa(filter_length, sidelobe_attenuation_db)?;
        if fft_size < filter_length {
            return Err(invalid(
                "fft_size",
                format!("must be >= filter_length ({filter_length}), got {fft_size}"),
            ));
        }
        if psd_oversampling == 0 {
            return Err(invalid("psd_oversampling", "must be >= 1"));
        }
        if !(subcarrier_spacing_hz.is_finite() && subcarrier_spacing_hz > 0.0) {
            return Err(invalid("subcarrier_spacing_hz", "must be finite and > 0"));
        }
        Ok(UfmcParams {
            filter_length,
            sidelobe_attenuation_db,
            fft_size,
            psd_oversampling,
            subcarrier_spacing_hz,
            kappa,
            ripple: 10f64.powf(-sidelobe_attenuation_db / 20.0),
        })
    }

    pub fn filter_length(&self) -> usize {
        self.filter_length
    }

    pub fn sidelobe_attenuation_db(&self) -> f64 {
        self.sidelobe_attenuation_db
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn psd_oversampling(&self) -> usize {
        self.psd_oversampling
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.subcarrier_spacing_hz
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn window(&self) -> Vec<f64> {
        chebyshev_window(self.filter_length, self.sidelobe_attenuation_db)
            .expect("parameters validated at construction")
    }

    /// Squared magnitude of the sub-band filter at `y` FFT bins from its
    /// centre. The DTFT of the Dolph-Chebyshev window is the Chebyshev
    /// polynomial itself, for odd and even lengths alike.
    pub fn filter_gain_sq(&self, y_bins: f64) -> f64 {
        let a = self.ripple
            * chebyshev_poly(self.filter_length - 1, self.kappa * cos_pi(y_bins / self.fft_size as f64));
        a * a
    }

    /// Squared magnitude of an `N`-sample tone's spectrum `x` bins from the
    /// tone, normalised to one at the tone.
    pub fn tone_gain_sq(&self, x_bins: f64) -> f64 {
        let n = self.fft_size as f64;
        let den = n * sin_pi(x_bins / n);
        if den.abs() < SINGULARITY_EPS {
            return 1.0;
        }
        let d = sin_pi(x_bins) / den;
        d * d
    }

    /// Integral over one spectral period (in bins) of the unnormalised
    /// filtered-tone spectrum, for a tone `delta_bins` away from the filter
    /// centre. Computed in the time domain by Parseval over the
    /// `N + L - 1` convolution output.
    pub fn subcarrier_energy(&self, delta_bins: f64) -> f64 {
        let n = self.fft_size;
        let l = self.filter_length;
        let w = self.window();
        let mut prefix = Vec::with_capacity(l);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, wi) in w.iter().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * delta_bins * i as f64 / n as f64;
            acc += Complex64::from_polar(*wi, phase);
            prefix.push(acc);
        }
        let full = prefix[l - 1];
        let head: f64 = prefix[..l - 1].iter().map(|s| s.norm_sqr()).sum();
        let tail: f64 = prefix[..l - 1].iter().map(|s| (full - s).norm_sqr()).sum();
        let body = (n - l + 1) as f64 * full.norm_sqr();
        let nf = n as f64;
        (head + body + tail) / nf
    }
}

/// Sub-band filter shifted to the RB centre: tap `l` (zero-based) of the
/// Chebyshev window times `exp(i 2 pi l f_c / N)`.
pub fn build_ufmc_subband_filter(
    params: &UfmcParams,
    rb_center_bin: f64,
) -> Result<Vec<Complex64>, PsdError> {
    let w = chebyshev_window(params.filter_length, params.sidelobe_attenuation_db)?;
    let n = params.fft_size as f64;
    Ok(w.iter()
        .enumerate()
        .map(|(l, wl)| {
            let turns = l as f64 * rb_center_bin / n;
            Complex64::new(cos_pi(2.0 * turns), sin_pi(2.0 * turns)) * wl
        })
        .collect())
}

/// UFMC subcarrier spectrum: the tone's Dirichlet response times the
/// sub-band filter response, normalised to the subcarrier power over one
/// Nyquist period. Evaluated in closed form; [`UfmcSampledSpectrum`] builds
/// the same curve by explicit convolution and zero-padded FFT.
#[derive(Debug, Clone)]
pub struct UfmcSubcarrierPsd {
    params: UfmcParams,
    placement: SubcarrierPlacement,
    power_w: f64,
    period_energy: f64,
}

impl UfmcSubcarrierPsd {
    pub fn new(params: UfmcParams, placement: SubcarrierPlacement, power_w: f64) -> Self {
        let energy = params.subcarrier_energy(placement.subcarrier_bin - placement.rb_center_bin);
        Self::with_energy(params, placement, power_w, energy)
    }

    pub(crate) fn with_energy(
        params: UfmcParams,
        placement: SubcarrierPlacement,
        power_w: f64,
        period_energy: f64,
    ) -> Self {
        UfmcSubcarrierPsd { params, placement, power_w, period_energy }
    }

    pub fn power_w(&self) -> f64 {
        self.power_w
    }

    pub(crate) fn scaled(self, power_w: f64) -> Self {
        UfmcSubcarrierPsd { power_w: self.power_w * power_w, ..self }
    }

    /// Offsets (Hz) covered by the Nyquist band of the raster.
    pub fn span(&self) -> Support {
        nyquist_span(&self.params, self.placement.subcarrier_bin)
    }
}

fn nyquist_span(params: &UfmcParams, subcarrier_bin: f64) -> Support {
    let half = params.fft_size as f64 / 2.0;
    let df = params.subcarrier_spacing_hz;
    Support { lo_hz: (-half - subcarrier_bin) * df, hi_hz: (half - subcarrier_bin) * df }
}

impl PsdCurve for UfmcSubcarrierPsd {
    fn density(&self, offset_hz: f64) -> f64 {
        let p = &self.params;
        let x = offset_hz / p.subcarrier_spacing_hz;
        let y = self.placement.subcarrier_bin + x - self.placement.rb_center_bin;
        self.power_w * p.tone_gain_sq(x) * p.filter_gain_sq(y)
            / (p.subcarrier_spacing_hz * self.period_energy)
    }

    fn support(&self) -> Support {
        self.span()
    }

    fn breakpoint_grid(&self) -> Option<(f64, f64)> {
        Some((0.0, self.params.subcarrier_spacing_hz))
    }
}

/// Density of a UFMC subcarrier at `f_offset_hz` from its centre.
///
/// Offsets outside the raster's Nyquist band are rejected.
pub fn psd_ufmc_subcarrier(
    f_offset_hz: f64,
    power_w: f64,
    params: &UfmcParams,
    placement: SubcarrierPlacement,
) -> Result<f64, PsdError> {
    let span = nyquist_span(params, placement.subcarrier_bin);
    if !(f_offset_hz >= span.lo_hz && f_offset_hz < span.hi_hz) {
        return Err(PsdError::OutOfSpan { offset_hz: f_offset_hz, lo_hz: span.lo_hz, hi_hz: span.hi_hz });
    }
    Ok(UfmcSubcarrierPsd::new(params.clone(), placement, power_w).density(f_offset_hz))
}

/// UFMC subcarrier spectrum built sample by sample:
///
/// 1. an `N`-sample complex exponential at the subcarrier's bin,
/// 2. convolved with the RB-centred sub-band filter,
/// 3. zero-padded to `oversampling * (N + L - 1)` and transformed,
/// 4. bins mapped to Hz through the subcarrier spacing,
/// 5. linearly interpolated between bins,
/// 6. normalised so one Nyquist period carries unit power.
#[derive(Debug, Clone)]
pub struct UfmcSampledSpectrum {
    samples: Arc<[f64]>,
    fft_size: usize,
    subcarrier_bin: f64,
    subcarrier_spacing_hz: f64,
    power_w: f64,
}

impl UfmcSampledSpectrum {
    pub fn compute(params: &UfmcParams, placement: SubcarrierPlacement) -> Result<Self, PsdError> {
        let n = params.fft_size;
        let l = params.filter_length;
        let filter = build_ufmc_subband_filter(params, placement.rb_center_bin)?;
        let tone: Vec<Complex64> = (0..n)
            .map(|t| {
                let turns = 2.0 * placement.subcarrier_bin * t as f64 / n as f64;
                Complex64::new(cos_pi(turns), sin_pi(turns)) / n as f64
            })
            .collect();

        let m = params.psd_oversampling * (n + l - 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (t, s) in tone.iter().enumerate() {
            for (k, h) in filter.iter().enumerate() {
                buf[t + k] += s * h;
            }
        }
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);

        let bin_width = n as f64 / m as f64;
        let total: f64 = buf.iter().map(|c| c.norm_sqr()).sum::<f64>() * bin_width;
        let samples: Arc<[f64]> = buf.iter().map(|c| c.norm_sqr() / total).collect();
        Ok(UfmcSampledSpectrum {
            samples,
            fft_size: n,
            subcarrier_bin: placement.subcarrier_bin,
            subcarrier_spacing_hz: params.subcarrier_spacing_hz,
            power_w: 1.0,
        })
    }

    pub fn with_power(mut self, power_w: f64) -> Self {
        self.power_w = power_w;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Width of one oversampled bin in Hz.
    pub fn bin_width_hz(&self) -> f64 {
        self.fft_size as f64 / self.samples.len() as f64 * self.subcarrier_spacing_hz
    }

    pub fn span(&self) -> Support {
        let half = self.fft_size as f64 / 2.0;
        let df = self.subcarrier_spacing_hz;
        Support { lo_hz: (-half - self.subcarrier_bin) * df, hi_hz: (half - self.subcarrier_bin) * df }
    }

    /// Interpolated density; errors outside the computed span.
    pub fn eval(&self, offset_hz: f64) -> Result<f64, PsdError> {
        let span = self.span();
        if !(offset_hz >= span.lo_hz && offset_hz < span.hi_hz) {
            return Err(PsdError::OutOfSpan { offset_hz, lo_hz: span.lo_hz, hi_hz: span.hi_hz });
        }
        Ok(self.density(offset_hz))
    }

    /// Total power over the span: exact integral of the interpolant.
    pub fn span_power(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.bin_width_hz() / self.subcarrier_spacing_hz
            * self.power_w
    }
}

impl PsdCurve for UfmcSampledSpectrum {
    fn density(&self, offset_hz: f64) -> f64 {
        let m = self.samples.len();
        let abs_bin = self.subcarrier_bin + offset_hz / self.subcarrier_spacing_hz;
        let pos = (abs_bin / self.fft_size as f64 * m as f64).rem_euclid(m as f64);
        let j0 = (pos.floor() as usize).min(m - 1);
        let frac = pos - j0 as f64;
        let j1 = (j0 + 1) % m;
        let unit = self.samples[j0] * (1.0 - frac) + self.samples[j1] * frac;
        self.power_w * unit / self.subcarrier_spacing_hz
    }

    fn support(&self) -> Support {
        self.span()
    }

    fn breakpoint_grid(&self) -> Option<(f64, f64)> {
        let w = self.bin_width_hz();
        let origin = -self.subcarrier_bin * self.subcarrier_spacing_hz;
        Some((origin, w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> UfmcParams {
        UfmcParams::new(74, 40.0, 2048, 16, 15e3).unwrap()
    }

    #[test]
    fn unshifted_filter_is_the_window() {
        let p = params();
        let h = build_ufmc_subband_filter(&p, 0.0).unwrap();
        let w = p.window();
        for (a, b) in h.iter().zip(&w) {
            assert_eq!(a.re, *b);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn shift_preserves_tap_magnitudes() {
        let p = params();
        let w = p.window();
        for fc in [3.5, 100.0, -617.25] {
            let h = build_ufmc_subband_filter(&p, fc).unwrap();
            for (a, b) in h.iter().zip(&w) {
                assert!((a.norm() - b.abs()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn half_band_shift_alternates_sign() {
        let p = UfmcParams::new(4, 30.0, 16, 4, 15e3).unwrap();
        let w = p.window();
        let h = build_ufmc_subband_filter(&p, 8.0).unwrap();
        for (l, (a, b)) in h.iter().zip(&w).enumerate() {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            assert!((a.re - sign * b).abs() < 1e-15);
            assert!(a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn filter_gain_matches_window_dtft() {
        let p = params();
        let w = p.window();
        let n = p.fft_size() as f64;
        for i in 0..60 {
            let y = i as f64 * 7.3;
            let theta = 2.0 * std::f64::consts::PI * y / n;
            let (re, im) = w.iter().enumerate().fold((0.0, 0.0), |(re, im), (l, v)| {
                (re + v * (theta * l as f64).cos(), im - v * (theta * l as f64).sin())
            });
            let direct = re * re + im * im;
            let closed = p.filter_gain_sq(y);
            assert!((direct - closed).abs() < 1e-12 + 1e-9 * closed, "y = {y}: {direct} vs {closed}");
        }
    }

    #[test]
    fn closed_form_matches_sampled_construction_at_bins() {
        let p = UfmcParams::new(74, 40.0, 256, 4, 15e3).unwrap();
        let placement = SubcarrierPlacement::new(10.0, 5.5);
        let closed = UfmcSubcarrierPsd::new(p.clone(), placement, 1.0);
        let sampled = UfmcSampledSpectrum::compute(&p, placement).unwrap();
        let m = sampled.len();
        let df = p.subcarrier_spacing_hz();
        let peak = closed.density(0.0);
        for j in (0..m).step_by(3) {
            // Sample j sits at absolute bin j N / m; evaluate both there.
            let abs_bin = j as f64 * 256.0 / m as f64;
            let abs_bin = if abs_bin >= 128.0 { abs_bin - 256.0 } else { abs_bin };
            let offset = (abs_bin - placement.subcarrier_bin) * df;
            let a = closed.density(offset);
            let b = sampled.density(offset);
            assert!((a - b).abs() <= 1e-9 * peak, "bin {j}: {a} vs {b}");
        }
    }

    #[test]
    fn sampled_span_carries_unit_power() {
        let p = params();
        let s = UfmcSampledSpectrum::compute(&p, SubcarrierPlacement::new(0.0, 0.0))
            .unwrap()
            .with_power(2.5);
        assert!((s.span_power() - 2.5).abs() < 1e-6 * 2.5);
    }

    #[test]
    fn sampled_peak_is_at_the_subcarrier() {
        let p = params();
        let s = UfmcSampledSpectrum::compute(&p, SubcarrierPlacement::new(3.0, 5.5)).unwrap();
        let bw = s.bin_width_hz();
        let span = s.span();
        let mut best = (f64::MIN, 0.0);
        let mut f = span.lo_hz;
        while f < span.hi_hz {
            let v = s.eval(f).unwrap();
            if v > best.0 {
                best = (v, f);
            }
            f += bw;
        }
        assert!(best.1.abs() <= bw, "peak at {} Hz", best.1);
    }

    #[test]
    fn out_of_span_is_an_error() {
        let p = params();
        let pl = SubcarrierPlacement::new(0.0, 0.0);
        assert!(psd_ufmc_subcarrier(1024.0 * 15e3, 1.0, &p, pl).is_err());
        assert!(psd_ufmc_subcarrier(-1024.0 * 15e3, 1.0, &p, pl).is_ok());
        let s = UfmcSampledSpectrum::compute(&p, pl).unwrap();
        assert!(matches!(s.eval(2e7), Err(PsdError::OutOfSpan { .. })));
    }

    #[test]
    fn far_sidelobes_sit_below_ofdm() {
        // Ten RB widths beyond the RB edge; the subcarrier is the RB's last.
        let p = params();
        let placement = SubcarrierPlacement::new(5.0, -0.5);
        let ofdm = super::super::OfdmParams::new(15e3).unwrap();
        let offset = (0.5 + 120.0) * 15e3;
        let u = psd_ufmc_subcarrier(offset, 1.0, &p, placement).unwrap();
        let o = super::super::psd_ofdm_subcarrier(offset, 1.0, &ofdm);
        assert!(u < o * 1e-3, "ufmc {u} ofdm {o}");
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(UfmcParams::new(1, 40.0, 2048, 16, 15e3).is_err());
        assert!(UfmcParams::new(74, -1.0, 2048, 16, 15e3).is_err());
        assert!(UfmcParams::new(74, 40.0, 64, 16, 15e3).is_err());
        assert!(UfmcParams::new(74, 40.0, 2048, 0, 15e3).is_err());
    }
}
