//! Brute-force oracles shared by integration tests.
#![allow(dead_code)]

pub fn objective(floors: &[f64], p: &[f64]) -> f64 {
    floors.iter().zip(p).map(|(s, x)| (1.0 + x / s).log2()).sum()
}

/// Best objective over grid points at `step` inside the box `lo..=hi`; the
/// last power takes the largest value both constraints still allow, since
/// the objective increases in every coordinate.
fn grid_best(
    floors: &[f64],
    coeffs: &[f64],
    p_max: f64,
    i_th: f64,
    lo: &[f64],
    hi: &[f64],
    step: f64,
) -> (f64, Vec<f64>) {
    let n = floors.len();
    let free = n - 1;
    let counts: Vec<usize> = (0..free).map(|k| ((hi[k] - lo[k]) / step).floor() as usize + 1).collect();
    let mut idx = vec![0usize; free];
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let mut p = vec![0.0; n];
    loop {
        let mut used = 0.0;
        let mut interf = 0.0;
        for k in 0..free {
            p[k] = lo[k] + idx[k] as f64 * step;
            used += p[k];
            interf += p[k] * coeffs[k];
        }
        if used <= p_max && interf <= i_th {
            let last = (p_max - used).min((i_th - interf) / coeffs[free]).max(0.0);
            p[free] = last;
            let v = objective(floors, &p);
            if v > best.0 {
                best = (v, p.clone());
            }
        }
        let mut k = 0;
        loop {
            if k == free {
                return best;
            }
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Grid-search oracle: exhaustive at a coarse step over the whole feasible
/// box, then exhaustive on shrinking boxes around the incumbent down to a
/// 1e-3 step.
pub fn grid_oracle(floors: &[f64], coeffs: &[f64], p_max: f64, i_th: f64) -> f64 {
    let n = floors.len();
    let caps: Vec<f64> = coeffs.iter().map(|i| p_max.min(i_th / i)).collect();
    let mut step = (caps.iter().cloned().fold(0.0, f64::max) / 40.0).max(1e-3);
    let mut lo = vec![0.0; n];
    let mut hi = caps.clone();
    loop {
        let (v, p) = grid_best(floors, coeffs, p_max, i_th, &lo, &hi, step);
        if step <= 1e-3 {
            return v;
        }
        let next = (step / 5.0).max(1e-3);
        for k in 0..n {
            lo[k] = (p[k] - 3.0 * step).max(0.0);
            hi[k] = (p[k] + 3.0 * step).min(caps[k]);
            // Keep the box on the 1e-3 lattice.
            lo[k] = (lo[k] / 1e-3).floor() * 1e-3;
        }
        step = next;
    }
}
