//! Dolph-Chebyshev window synthesis.

use std::io::{self, Write};

use super::{cos_pi, invalid, PsdError};

/// Chebyshev polynomial of the first kind, `T_order(x)`, for any real `x`.
pub fn chebyshev_poly(order: usize, x: f64) -> f64 {
    let n = order as f64;
    if x.abs() <= 1.0 {
        (n * x.acos()).cos()
    } else if x > 1.0 {
        (n * x.acosh()).cosh()
    } else {
        let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * (n * (-x).acosh()).cosh()
    }
}

/// Dolph-Chebyshev shape parameter `kappa0 = cosh(acosh(10^(alpha/20)) / (len - 1))`.
pub fn dolph_kappa(filter_length: usize, alpha_db: f64) -> Result<f64, PsdError> {
    if filter_length < 2 {
        return Err(invalid("filter_length", format!("must be >= 2, got {filter_length}")));
    }
    if !(alpha_db.is_finite() && alpha_db > 0.0) {
        return Err(invalid("alpha_db", format!("must be finite and > 0, got {alpha_db}")));
    }
    let ripple_inv = 10f64.powf(alpha_db / 20.0);
    let kappa = (ripple_inv.acosh() / (filter_length - 1) as f64).cosh();
    if !(ripple_inv.is_finite() && kappa.is_finite() && kappa > 1.0) {
        return Err(invalid(
            "alpha_db",
            format!("{alpha_db} dB gives a non-finite Chebyshev parameter"),
        ));
    }
    Ok(kappa)
}

/// Dolph-Chebyshev window of `filter_length` taps with equiripple sidelobes
/// `alpha_db` below the main lobe. Normalised to unit gain at DC.
///
/// Odd lengths `2M+1` use the closed-form cosine series over `n = -M..M`.
/// Even lengths sample the same Chebyshev amplitude on the DFT grid and apply
/// a half-sample phase before the inverse transform.
pub fn chebyshev_window(filter_length: usize, alpha_db: f64) -> Result<Vec<f64>, PsdError> {
    let kappa = dolph_kappa(filter_length, alpha_db)?;
    let ripple = 10f64.powf(-alpha_db / 20.0);
    let len = filter_length;
    let order = len - 1;
    let n_f = len as f64;

    let w: Vec<f64> = if len % 2 == 1 {
        let m_half = (len - 1) / 2;
        let spectrum: Vec<f64> = (1..=m_half)
            .map(|m| chebyshev_poly(order, kappa * cos_pi(m as f64 / n_f)))
            .collect();
        (0..len)
            .map(|i| {
                let n = i as f64 - m_half as f64;
                let series: f64 = spectrum
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * cos_pi(2.0 * (j + 1) as f64 * n / n_f))
                    .sum();
                1.0 / n_f + ripple / n_f * 2.0 * series
            })
            .collect()
    } else {
        let amplitude: Vec<f64> = (0..len)
            .map(|k| ripple * chebyshev_poly(order, kappa * cos_pi(k as f64 / n_f)))
            .collect();
        let center = (n_f - 1.0) / 2.0;
        (0..len)
            .map(|i| {
                let shift = i as f64 - center;
                amplitude
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a * cos_pi(2.0 * k as f64 * shift / n_f))
                    .sum::<f64>()
                    / n_f
            })
            .collect()
    };

    if w.iter().any(|v: &f64| !v.is_finite()) {
        return Err(invalid("alpha_db", "window synthesis produced non-finite taps"));
    }
    Ok(w)
}

/// Header `coefficient`, then one coefficient per line, 17 significant digits.
pub fn write_window_csv<W: Write>(window: &[f64], mut out: W) -> io::Result<()> {
    writeln!(out, "coefficient")?;
    for w in window {
        writeln!(out, "{w:.16e}")?;
    }
    Ok(())
}
