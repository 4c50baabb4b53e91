use super::{invalid, sinc, PsdCurve, PsdError};

/// OFDM spectral parameters. Construction enforces `spacing * T_s == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmParams {
    symbol_duration_s: f64,
    subcarrier_spacing_hz: f64,
}

impl OfdmParams {
    pub fn new(subcarrier_spacing_hz: f64) -> Result<Self, PsdError> {
        if !(subcarrier_spacing_hz.is_finite() && subcarrier_spacing_hz > 0.0) {
            return Err(invalid(
                "subcarrier_spacing_hz",
                format!("must be finite and > 0, got {subcarrier_spacing_hz}"),
            ));
        }
        Ok(OfdmParams { symbol_duration_s: 1.0 / subcarrier_spacing_hz, subcarrier_spacing_hz })
    }

    pub fn with_symbol_duration(
        symbol_duration_s: f64,
        subcarrier_spacing_hz: f64,
    ) -> Result<Self, PsdError> {
        let p = Self::new(subcarrier_spacing_hz)?;
        if !(symbol_duration_s > 0.0)
            || (symbol_duration_s * subcarrier_spacing_hz - 1.0).abs() > 1e-12
        {
            return Err(invalid(
                "symbol_duration_s",
                format!(
                    "{symbol_duration_s} s is not the reciprocal of {subcarrier_spacing_hz} Hz"
                ),
            ));
        }
        Ok(OfdmParams { symbol_duration_s, ..p })
    }

    pub fn symbol_duration_s(&self) -> f64 {
        self.symbol_duration_s
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.subcarrier_spacing_hz
    }
}

/// `P * T_s * sinc^2(f * T_s)`; integrates to `P` over all frequency.
pub fn psd_ofdm_subcarrier(f_offset_hz: f64, power_w: f64, params: &OfdmParams) -> f64 {
    let ts = params.symbol_duration_s;
    let s = sinc(f_offset_hz * ts);
    power_w * ts * s * s
}

#[derive(Debug, Clone)]
pub struct OfdmSubcarrierPsd {
    params: OfdmParams,
    power_w: f64,
}

impl OfdmSubcarrierPsd {
    pub fn new(params: OfdmParams, power_w: f64) -> Self {
        OfdmSubcarrierPsd { params, power_w }
    }

    pub fn power_w(&self) -> f64 {
        self.power_w
    }

    pub(crate) fn scaled(self, power_w: f64) -> Self {
        OfdmSubcarrierPsd { power_w: self.power_w * power_w, ..self }
    }
}

impl PsdCurve for OfdmSubcarrierPsd {
    fn density(&self, offset_hz: f64) -> f64 {
        psd_ofdm_subcarrier(offset_hz, self.power_w, &self.params)
    }

    fn breakpoint_grid(&self) -> Option<(f64, f64)> {
        Some((0.0, self.params.subcarrier_spacing_hz))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lte() -> OfdmParams {
        OfdmParams::new(15e3).unwrap()
    }

    #[test]
    fn peak_is_power_times_symbol_duration() {
        for p in [1.0, 2.5] {
            let v = psd_ofdm_subcarrier(0.0, p, &lte());
            assert!((v - p / 15e3).abs() <= 1e-15 * v);
        }
    }

    #[test]
    fn first_null_and_half_spacing() {
        assert!(psd_ofdm_subcarrier(15e3, 1.0, &lte()).abs() < 1e-30);
        let half = psd_ofdm_subcarrier(7500.0, 1.0, &lte());
        let expected = (1.0 / 15e3) * (2.0 / std::f64::consts::PI).powi(2);
        assert!((half - expected).abs() < 1e-18);
        assert!((half - 2.7019e-5).abs() < 1e-9);
    }

    #[test]
    fn nulls_at_integer_multiples() {
        let p = lte();
        let peak = psd_ofdm_subcarrier(0.0, 1.0, &p);
        for m in 1..=20 {
            let f = m as f64 / p.symbol_duration_s();
            assert!(psd_ofdm_subcarrier(f, 1.0, &p) < 1e-12 * peak);
            assert!(psd_ofdm_subcarrier(-f, 1.0, &p) < 1e-12 * peak);
        }
    }

    #[test]
    fn symbol_duration_must_match_spacing() {
        assert!(OfdmParams::with_symbol_duration(1.0 / 15e3, 15e3).is_ok());
        assert!(OfdmParams::with_symbol_duration(1.0 / 14e3, 15e3).is_err());
        assert!(OfdmParams::new(0.0).is_err());
        assert!(OfdmParams::new(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn non_negative_and_even(f in -2.0e6f64..2.0e6, p in 0.0f64..50.0) {
            let a = psd_ofdm_subcarrier(f, p, &lte());
            prop_assert!(a >= 0.0);
            prop_assert_eq!(a, psd_ofdm_subcarrier(-f, p, &lte()));
        }
    }
}
