//! dB conversions used at the configuration boundary. Everything else works
//! in watts and hertz.

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn dbw_to_watts(dbw: f64) -> f64 {
    10f64.powf(dbw / 10.0)
}

pub fn watts_to_dbw(watts: f64) -> f64 {
    10.0 * watts.log10()
}

/// Power ratio in dB, floored at -400 dB so exact spectral nulls stay finite.
pub fn ratio_to_db(ratio: f64) -> f64 {
    10.0 * ratio.max(1e-40).log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_of_43_dbm() {
        assert!((dbm_to_watts(43.0) - 19.952_623_149_688_8).abs() < 1e-9);
        assert!((watts_to_dbm(dbm_to_watts(43.0)) - 43.0).abs() < 1e-12);
    }

    #[test]
    fn dbw_round_trip() {
        assert!((dbw_to_watts(-30.0) - 1e-3).abs() < 1e-18);
        assert!((watts_to_dbw(0.1) + 10.0).abs() < 1e-12);
    }
}
