use super::{invalid, sinc, PsdCurve, PsdError};

/// Frequency samples `H_0..H_3` of the PHYDYAS prototype for overlap factor 4.
pub const PHYDYAS_K4: [f64; 4] = [1.0, 0.971960, std::f64::consts::FRAC_1_SQRT_2, 0.235147];

/// FBMC prototype described by its overlap factor `K` and the positive-index
/// frequency samples `H_0..H_{K-1}` (with `H_{-k} = H_k`).
#[derive(Debug, Clone, PartialEq)]
pub struct FbmcParams {
    overlap_factor: usize,
    fft_size: usize,
    polyphase: Vec<f64>,
    subcarrier_spacing_hz: f64,
    energy: f64,
}

impl FbmcParams {
    pub fn new(
        overlap_factor: usize,
        fft_size: usize,
        polyphase_coeffs: Vec<f64>,
        subcarrier_spacing_hz: f64,
    ) -> Result<Self, PsdError> {
        if overlap_factor == 0 {
            return Err(invalid("overlap_factor", "must be >= 1"));
        }
        if fft_size == 0 {
            return Err(invalid("fft_size", "must be >= 1"));
        }
        if polyphase_coeffs.len() != overlap_factor {
            return Err(invalid(
                "polyphase_coeffs",
                format!(
                    "expected {overlap_factor} coefficients, got {}",
                    polyphase_coeffs.len()
                ),
            ));
        }
        if polyphase_coeffs[0] != 1.0 {
            return Err(invalid("polyphase_coeffs", "H_0 must be exactly 1"));
        }
        if let Some(h) = polyphase_coeffs.iter().find(|h| !(**h > 0.0 && **h <= 1.0)) {
            return Err(invalid("polyphase_coeffs", format!("{h} is outside (0, 1]")));
        }
        if !(subcarrier_spacing_hz.is_finite() && subcarrier_spacing_hz > 0.0) {
            return Err(invalid("subcarrier_spacing_hz", "must be finite and > 0"));
        }
        let sum_sq: f64 = polyphase_coeffs[0].powi(2)
            + 2.0 * polyphase_coeffs[1..].iter().map(|h| h * h).sum::<f64>();
        let energy = sum_sq / overlap_factor as f64;
        Ok(FbmcParams {
            overlap_factor,
            fft_size,
            polyphase: polyphase_coeffs,
            subcarrier_spacing_hz,
            energy,
        })
    }

    /// PHYDYAS prototype, `K = 4`.
    pub fn phydyas(fft_size: usize, subcarrier_spacing_hz: f64) -> Result<Self, PsdError> {
        Self::new(4, fft_size, PHYDYAS_K4.to_vec(), subcarrier_spacing_hz)
    }

    pub fn overlap_factor(&self) -> usize {
        self.overlap_factor
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn polyphase_coeffs(&self) -> &[f64] {
        &self.polyphase
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.subcarrier_spacing_hz
    }

    /// Unnormalised amplitude response at `x` subcarrier spacings from the
    /// centre: `sum_k H_k sinc(K x - k)`, `k = -(K-1)..=K-1`.
    ///
    /// With `nu = x / N` the generic term
    /// `sin(pi (nu - k/(NK)) NK) / (pi (nu - k/(NK)) NK)` reduces to
    /// `sinc(K x - k)`, so the FFT size drops out.
    pub fn amplitude(&self, x: f64) -> f64 {
        let t = self.overlap_factor as f64 * x;
        let mut acc = self.polyphase[0] * sinc(t);
        for (k, h) in self.polyphase.iter().enumerate().skip(1) {
            let k = k as f64;
            acc += h * (sinc(t - k) + sinc(t + k));
        }
        acc
    }

    /// Density scale so that a unit-power subcarrier integrates to one.
    pub fn density_scale(&self) -> f64 {
        1.0 / (self.subcarrier_spacing_hz * self.energy)
    }

    /// Time-domain prototype `h[l]`, `l = 0..=K*M`, with `M` the FFT size.
    /// Even-symmetric about `K*M/2`.
    pub fn prototype_filter(&self) -> Vec<f64> {
        let km = (self.overlap_factor * self.fft_size) as f64;
        (0..=self.overlap_factor * self.fft_size)
            .map(|l| {
                let mut v = self.polyphase[0];
                for (k, h) in self.polyphase.iter().enumerate().skip(1) {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    v += 2.0 * sign * h * super::cos_pi(2.0 * k as f64 * l as f64 / km);
                }
                v
            })
            .collect()
    }
}

/// `P * (sum_k H_k sinc(K f/df - k))^2`, rescaled to integrate to `P`.
pub fn psd_fbmc_subcarrier(f_offset_hz: f64, power_w: f64, params: &FbmcParams) -> f64 {
    let a = params.amplitude(f_offset_hz / params.subcarrier_spacing_hz);
    power_w * a * a * params.density_scale()
}

#[derive(Debug, Clone)]
pub struct FbmcSubcarrierPsd {
    params: FbmcParams,
    power_w: f64,
}

impl FbmcSubcarrierPsd {
    pub fn new(params: FbmcParams, power_w: f64) -> Self {
        FbmcSubcarrierPsd { params, power_w }
    }

    pub fn power_w(&self) -> f64 {
        self.power_w
    }

    pub(crate) fn scaled(self, power_w: f64) -> Self {
        FbmcSubcarrierPsd { power_w: self.power_w * power_w, ..self }
    }
}

impl PsdCurve for FbmcSubcarrierPsd {
    fn density(&self, offset_hz: f64) -> f64 {
        psd_fbmc_subcarrier(offset_hz, self.power_w, &self.params)
    }

    fn breakpoint_grid(&self) -> Option<(f64, f64)> {
        Some((0.0, self.params.subcarrier_spacing_hz / self.params.overlap_factor as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> FbmcParams {
        FbmcParams::phydyas(2048, 15e3).unwrap()
    }

    #[test]
    fn peak_is_the_density_scale() {
        let p = params();
        let peak = psd_fbmc_subcarrier(0.0, 1.0, &p);
        assert!((peak - p.density_scale()).abs() <= 1e-15 * peak);
    }

    #[test]
    fn first_polyphase_offset_hits_h1() {
        let p = params();
        let f = 15e3 / 4.0;
        let got = psd_fbmc_subcarrier(f, 1.0, &p);
        let expected = PHYDYAS_K4[1].powi(2) * p.density_scale();
        assert!((got - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn phydyas_samples_have_unit_energy() {
        // 1 + 2 (H1^2 + H2^2 + H3^2) = K for the PHYDYAS design.
        assert!((params().energy - 1.0).abs() < 1e-5);
    }

    #[test]
    fn prototype_is_even_symmetric() {
        let p = FbmcParams::phydyas(64, 15e3).unwrap();
        let h = p.prototype_filter();
        assert_eq!(h.len(), 4 * 64 + 1);
        let km = 4 * 64;
        for l in 0..=km {
            assert!((h[l] - h[km - l]).abs() < 1e-12, "l = {l}");
        }
        // Centre tap: every cosine term is +1 there.
        let centre = 1.0 + 2.0 * (0.971960 + std::f64::consts::FRAC_1_SQRT_2 + 0.235147);
        assert!((h[km / 2] - centre).abs() < 1e-12);
    }

    #[test]
    fn prototype_response_matches_sinc_model() {
        // Independent route: DTFT of the time-domain prototype. At frequency
        // offset x subcarriers the normalised response should follow the
        // shifted-sinc amplitude (Dirichlet vs sinc: large M).
        let m = 512;
        let p = FbmcParams::phydyas(m, 15e3).unwrap();
        let h = p.prototype_filter();
        let centre = (h.len() - 1) as f64 / 2.0;
        let dtft = |x: f64| -> f64 {
            let theta = 2.0 * std::f64::consts::PI * x / m as f64;
            h.iter()
                .enumerate()
                .map(|(l, v)| v * (theta * (l as f64 - centre)).cos())
                .sum::<f64>()
        };
        let dc = dtft(0.0);
        for i in 0..=40 {
            let x = i as f64 * 0.05;
            let model = p.amplitude(x);
            let direct = dtft(x) / dc;
            assert!((model - direct).abs() < 2e-3, "x = {x}: {model} vs {direct}");
        }
    }

    #[test]
    fn rejects_invalid_coefficients() {
        assert!(FbmcParams::new(4, 64, vec![0.9, 0.8, 0.7, 0.2], 15e3).is_err());
        assert!(FbmcParams::new(4, 64, vec![1.0, 0.8, 0.7], 15e3).is_err());
        assert!(FbmcParams::new(3, 64, vec![1.0, 1.2, 0.3], 15e3).is_err());
        assert!(FbmcParams::new(2, 64, vec![1.0, 0.0], 15e3).is_err());
    }

    proptest! {
        #[test]
        fn non_negative_and_even(f in -45e3f64..45e3) {
            let p = params();
            let a = psd_fbmc_subcarrier(f, 1.0, &p);
            prop_assert!(a >= 0.0);
            let b = psd_fbmc_subcarrier(-f, 1.0, &p);
            prop_assert!((a - b).abs() <= 1e-15 * p.density_scale());
        }
    }
}
