use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use wavecoex::psd::{PsdCurve, SubcarrierPlacement};
use wavecoex::{chebyshev_window, FbmcParams, OfdmParams, Waveform};

/// Sidelobe peaks in dB relative to the main lobe, from a zero-padded FFT.
fn sidelobes_db(w: &[f64]) -> Vec<f64> {
    let n = 64 * w.len();
    let mut buf: Vec<Complex64> = w.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf[..=n / 2].iter().map(|c| c.norm()).collect();
    let first_min = (1..mag.len() - 1).find(|&k| mag[k] <= mag[k - 1] && mag[k] <= mag[k + 1]).unwrap();
    (first_min + 1..mag.len() - 1)
        .filter(|&k| mag[k] >= mag[k - 1] && mag[k] > mag[k + 1])
        .map(|k| 20.0 * (mag[k] / mag[0]).log10())
        .collect()
}

#[test]
fn chebyshev_sidelobes_are_equiripple() {
    for alpha in [30.0, 40.0, 50.0] {
        for len in [73, 74] {
            let lobes = sidelobes_db(&chebyshev_window(len, alpha).unwrap());
            assert!(lobes.len() > 10, "alpha {alpha} len {len}");
            for l in lobes {
                assert!((l + alpha).abs() <= 0.5, "alpha {alpha} len {len}: sidelobe {l} dB");
            }
        }
    }
}

#[test]
fn ofdm_and_fbmc_subcarriers_are_symmetric() {
    let df = 15e3;
    let curves = [
        Waveform::Ofdm(OfdmParams::new(df).unwrap()),
        Waveform::Fbmc(FbmcParams::phydyas(2048, df).unwrap()),
    ]
    .map(|w| w.subcarrier_curve(SubcarrierPlacement::new(0.0, 0.0), 1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let f = rng.random_range(0.0..50.0 * df);
        for c in &curves {
            let (a, b) = (c.density(f), c.density(-f));
            assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-30 / df), "f {f}: {a} vs {b}");
        }
    }
}
