//! Adaptive Simpson quadrature.
//!
//! The interval is first split on an optional regular breakpoint grid (nulls
//! or kinks of the integrand), then each piece is bisected recursively until
//! the Richardson error estimate meets its share of the tolerance.

use thiserror::Error;

pub const DEFAULT_MAX_DEPTH: u32 = 40;

/// Hard cap on integrand evaluations for a single call.
const MAX_EVALUATIONS: usize = 200_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("quadrature did not converge on [{lo}, {hi}] (partial estimate {partial_estimate})")]
pub struct QuadratureError {
    pub partial_estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    /// Absolute error accepted regardless of the size of the result.
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { rel_tol: 1e-9, abs_tol: 0.0, max_depth: DEFAULT_MAX_DEPTH }
    }
}

struct Integrator<'a, F: Fn(f64) -> f64> {
    f: &'a F,
    max_depth: u32,
    evaluations: usize,
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

impl<F: Fn(f64) -> f64> Integrator<'_, F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evaluations += 1;
        (self.f)(x)
    }

    fn panel(&mut self, a: f64, b: f64) -> Panel {
        let fa = self.eval(a);
        let fb = self.eval(b);
        let fm = self.eval(0.5 * (a + b));
        Panel { a, b, fa, fm, fb, whole: (b - a) / 6.0 * (fa + 4.0 * fm + fb) }
    }

    fn refine(&mut self, p: Panel, tol: f64, depth: u32) -> Result<f64, f64> {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
        let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
        let delta = left + right - p.whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth >= self.max_depth || self.evaluations > MAX_EVALUATIONS || m <= p.a || m >= p.b {
            return Err(left + right);
        }
        let lp = Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left };
        let rp = Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right };
        let l = self.refine(lp, tol / 2.0, depth + 1).map_err(|e| e + right)?;
        let r = self.refine(rp, tol / 2.0, depth + 1).map_err(|e| l + e)?;
        Ok(l + r)
    }
}

fn pieces(lo: f64, hi: f64, grid: Option<(f64, f64)>) -> Vec<f64> {
    let mut cuts = vec![lo];
    if let Some((origin, step)) = grid {
        if step > 0.0 && step.is_finite() {
            let first = ((lo - origin) / step).floor() + 1.0;
            let last = ((hi - origin) / step).ceil() - 1.0;
            if last - first < 1e7 {
                let mut k = first;
                while k <= last {
                    let x = origin + k * step;
                    if x > lo && x < hi {
                        cuts.push(x);
                    }
                    k += 1.0;
                }
            }
        }
    }
    cuts.push(hi);
    cuts
}

/// Integrates `f` over `[lo, hi]` to relative tolerance `opts.rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    grid: Option<(f64, f64)>,
    opts: QuadratureOptions,
) -> Result<f64, QuadratureError> {
    if hi <= lo {
        return Ok(0.0);
    }
    let cuts = pieces(lo, hi, grid);
    let mut integ = Integrator { f, max_depth: opts.max_depth, evaluations: 0 };
    let panels: Vec<Panel> = cuts.windows(2).map(|w| integ.panel(w[0], w[1])).collect();

    // Coarse estimate from one refinement level sets the absolute target.
    let mut scale: f64 = panels
        .iter()
        .map(|p| {
            let m = 0.5 * (p.a + p.b);
            let l = integ.panel(p.a, m).whole;
            let r = integ.panel(m, p.b).whole;
            (l + r).abs()
        })
        .sum();

    for _ in 0..2 {
        let width = hi - lo;
        let abs_tol = (opts.rel_tol * scale).max(opts.abs_tol);
        let mut total = 0.0;
        for (i, p) in panels.iter().enumerate() {
            let share = abs_tol * (p.b - p.a) / width;
            match integ.refine(*p, share, 0) {
                Ok(v) => total += v,
                Err(partial) => {
                    let rest: f64 = panels[i + 1..].iter().map(|q| q.whole).sum();
                    return Err(QuadratureError { partial_estimate: total + partial + rest, lo, hi });
                }
            }
        }
        // Accept when the coarse scale did not badly underestimate the result.
        if total.abs() <= 2.0 * scale || total == 0.0 {
            return Ok(total);
        }
        scale = total.abs();
    }
    Err(QuadratureError { partial_estimate: scale, lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_exact() {
        let v = integrate(&|_| 3.0, -2.0, 5.0, None, QuadratureOptions::default()).unwrap();
        assert!((v - 21.0).abs() < 1e-12);
    }

    #[test]
    fn zero_function() {
        let v = integrate(&|_| 0.0, 0.0, 1e6, Some((0.0, 1.0)), QuadratureOptions::default()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn smooth_integrand_meets_tolerance() {
        let v = integrate(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, None, QuadratureOptions::default())
            .unwrap();
        assert!((v - 2.0).abs() < 2e-9);
    }

    #[test]
    fn breakpoints_split_the_interval() {
        let cuts = pieces(0.25, 3.75, Some((0.0, 1.0)));
        assert_eq!(cuts, vec![0.25, 1.0, 2.0, 3.0, 3.75]);
    }

    #[test]
    fn divergent_integrand_reports_partial_estimate() {
        let opts = QuadratureOptions { rel_tol: 1e-12, abs_tol: 0.0, max_depth: 8 };
        let err = integrate(&|x: f64| 1.0 / x.abs().sqrt().max(1e-300), 0.0, 1.0, None, opts).unwrap_err();
        assert!(err.partial_estimate > 0.0);
        assert_eq!((err.lo, err.hi), (0.0, 1.0));
    }
}
