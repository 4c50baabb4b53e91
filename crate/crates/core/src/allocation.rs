//! Throughput-maximising power allocation with a total power budget and an
//! interference cap toward a neighbouring system.
//!
//! Maximises `sum_n df * log2(1 + p_n / s_n)` subject to `sum_n p_n <= P_max`,
//! `sum_n p_n i_n <= I_th` and `p_n >= 0`, where `s_n = (N0 df + J_n) / g_n` is
//! the noise-plus-interference floor of subcarrier `n` referred to its input.
//! The optimum has the form `p_n = max(0, 1 / (lambda + mu i_n) - s_n)`; the
//! multipliers are found by nested bisection, `lambda` inside `mu`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AllocationError {
    #[error("invalid allocation problem: {0}")]
    InvalidProblem(String),
    #[error("multiplier search did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize, best: Box<AllocationResult> },
    #[error("contract violation: {0}")]
    ContractViolation(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProblem {
    /// Channel power gains `g_n`.
    pub gains: Vec<f64>,
    /// Interference coefficients `i_n` toward the protected band.
    pub interference_coeffs: Vec<f64>,
    pub subcarrier_spacing_hz: f64,
    /// One-sided noise density N0 (W/Hz).
    pub noise_psd_w_per_hz: f64,
    pub power_budget_w: f64,
    pub interference_threshold_w: f64,
    /// Interference received on each subcarrier from the other system (W).
    pub incoming_interference_w: Option<Vec<f64>>,
}

impl AllocationProblem {
    pub fn num_subcarriers(&self) -> usize {
        self.gains.len()
    }

    pub fn validate(&self) -> Result<(), AllocationError> {
        let bad = |m: String| Err(AllocationError::InvalidProblem(m));
        let n = self.gains.len();
        if n == 0 {
            return bad("no subcarriers".into());
        }
        if self.interference_coeffs.len() != n {
            return bad(format!(
                "{} interference coefficients for {n} subcarriers",
                self.interference_coeffs.len()
            ));
        }
        if let Some(j) = &self.incoming_interference_w {
            if j.len() != n {
                return bad(format!("{} incoming interference values for {n} subcarriers", j.len()));
            }
            if j.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return bad("incoming interference must be finite and >= 0".into());
            }
        }
        if self.gains.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return bad("gains must be finite and > 0".into());
        }
        if self.interference_coeffs.iter().any(|i| !(i.is_finite() && *i >= 0.0)) {
            return bad("interference coefficients must be finite and >= 0".into());
        }
        if !(self.subcarrier_spacing_hz.is_finite() && self.subcarrier_spacing_hz > 0.0) {
            return bad(format!("subcarrier spacing must be > 0, got {}", self.subcarrier_spacing_hz));
        }
        if !(self.noise_psd_w_per_hz.is_finite() && self.noise_psd_w_per_hz >= 0.0) {
            return bad(format!("noise density must be >= 0, got {}", self.noise_psd_w_per_hz));
        }
        if !(self.power_budget_w.is_finite() && self.power_budget_w > 0.0) {
            return bad(format!("power budget must be finite and > 0, got {}", self.power_budget_w));
        }
        if !(self.interference_threshold_w > 0.0) {
            return bad(format!(
                "interference threshold must be > 0, got {}",
                self.interference_threshold_w
            ));
        }
        let floors = self.floors();
        if floors.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return bad("noise-plus-interference floor must be > 0 on every subcarrier".into());
        }
        Ok(())
    }

    /// Floors `s_n = (N0 df + J_n) / g_n`.
    pub fn floors(&self) -> Vec<f64> {
        let base = self.noise_psd_w_per_hz * self.subcarrier_spacing_hz;
        (0..self.gains.len())
            .map(|n| {
                let j = self.incoming_interference_w.as_ref().map_or(0.0, |j| j[n]);
                (base + j) / self.gains[n]
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Iteration cap for each bisection.
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iterations: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub powers_w: Vec<f64>,
    /// Multiplier of the power budget, in water-level form.
    pub lambda: f64,
    /// Multiplier of the interference cap, in water-level form.
    pub mu: f64,
    pub throughput_bps: f64,
    pub power_used_w: f64,
    pub interference_w: f64,
    /// Budget constraint active (`lambda > 0`).
    pub power_binding: bool,
    /// Interference cap active (`mu > 0`).
    pub interference_binding: bool,
    pub iterations: usize,
}

/// Shannon sum rate of `powers_w` on `problem`.
pub fn throughput(problem: &AllocationProblem, powers_w: &[f64]) -> f64 {
    problem
        .floors()
        .iter()
        .zip(powers_w)
        .map(|(s, p)| problem.subcarrier_spacing_hz * (p / s).ln_1p() / std::f64::consts::LN_2)
        .sum()
}

/// Share of the power budget left unused, in percent.
pub fn power_loss_percent(power_used_w: f64, power_budget_w: f64) -> Result<f64, AllocationError> {
    if !(power_budget_w > 0.0 && power_budget_w.is_finite()) {
        return Err(AllocationError::ContractViolation(format!(
            "power budget must be finite and > 0, got {power_budget_w}"
        )));
    }
    if !(power_used_w >= 0.0) || power_used_w > power_budget_w * (1.0 + 1e-9) {
        return Err(AllocationError::ContractViolation(format!(
            "used power {power_used_w} W outside [0, {power_budget_w}] W"
        )));
    }
    Ok((100.0 - power_used_w / power_budget_w * 100.0).clamp(0.0, 100.0))
}

struct Solver<'a> {
    floors: Vec<f64>,
    coeffs: &'a [f64],
    budget: f64,
    max_iterations: usize,
    iterations: usize,
}

/// True once `lo` and `hi` are adjacent up to a few ulps.
fn collapsed(lo: f64, hi: f64) -> bool {
    hi - lo <= 4.0 * f64::EPSILON * hi
}

impl Solver<'_> {
    fn power(&self, n: usize, lambda: f64, mu: f64) -> f64 {
        let level = 1.0 / (lambda + mu * self.coeffs[n]);
        (level - self.floors[n]).max(0.0)
    }

    fn sums(&self, lambda: f64, mu: f64) -> (f64, f64) {
        let mut p_sum = 0.0;
        let mut i_sum = 0.0;
        for n in 0..self.floors.len() {
            let p = self.power(n, lambda, mu);
            p_sum += p;
            i_sum += p * self.coeffs[n];
        }
        (p_sum, i_sum)
    }

    /// Smallest `lambda >= 0` meeting the budget for a given `mu`.
    fn lambda_for(&mut self, mu: f64) -> Result<f64, usize> {
        if mu > 0.0 {
            let (p, _) = self.sums(0.0, mu);
            if p.is_finite() && p <= self.budget {
                return Ok(0.0);
            }
        }
        // At lambda = N / P_max every power is below P_max / N.
        let mut hi = self.floors.len() as f64 / self.budget;
        let mut lo = hi;
        let mut k = 0;
        loop {
            lo *= 0.5;
            k += 1;
            if self.sums(lo, mu).0 > self.budget {
                break;
            }
            hi = lo;
            if k > 2100 {
                return Ok(hi);
            }
        }
        let mut it = 0;
        while !collapsed(lo, hi) {
            if it >= self.max_iterations {
                return Err(it);
            }
            let mid = 0.5 * (lo + hi);
            if self.sums(mid, mu).0 > self.budget {
                lo = mid;
            } else {
                hi = mid;
            }
            it += 1;
        }
        self.iterations += it;
        Ok(hi)
    }
}

/// Solves the allocation. Interference and power are met on the feasible
/// side of each bisection, so both constraints hold to rounding.
pub fn solve_power_allocation(
    problem: &AllocationProblem,
    options: SolverOptions,
) -> Result<AllocationResult, AllocationError> {
    problem.validate()?;
    if options.max_iterations == 0 {
        return Err(AllocationError::InvalidProblem("max_iterations must be > 0".into()));
    }
    let threshold = problem.interference_threshold_w;
    let mut s = Solver {
        floors: problem.floors(),
        coeffs: &problem.interference_coeffs,
        budget: problem.power_budget_w,
        max_iterations: options.max_iterations,
        iterations: 0,
    };

    let finish = |s: &Solver, lambda: f64, mu: f64| {
        let powers: Vec<f64> = (0..s.floors.len()).map(|n| s.power(n, lambda, mu)).collect();
        let power_used_w = powers.iter().sum();
        let interference_w = powers.iter().zip(s.coeffs).map(|(p, i)| p * i).sum();
        AllocationResult {
            throughput_bps: throughput(problem, &powers),
            powers_w: powers,
            lambda,
            mu,
            power_used_w,
            interference_w,
            power_binding: lambda > 0.0,
            interference_binding: mu > 0.0,
            iterations: s.iterations,
        }
    };
    let no_conv = |s: &Solver, it: usize, lambda: f64, mu: f64| AllocationError::NoConvergence {
        iterations: it,
        best: Box::new(finish(s, lambda, mu)),
    };

    let lambda0 = s.lambda_for(0.0).map_err(|it| no_conv(&s, it, s.floors.len() as f64 / s.budget, 0.0))?;
    if s.sums(lambda0, 0.0).1 <= threshold {
        return Ok(finish(&s, lambda0, 0.0));
    }

    // At mu = N / I_th every p_n i_n is below I_th / N.
    let n = s.floors.len() as f64;
    let interference_at = |s: &mut Solver, mu: f64| -> Result<(f64, f64), usize> {
        let lambda = s.lambda_for(mu)?;
        Ok((lambda, s.sums(lambda, mu).1))
    };
    let mut hi = n / threshold;
    let (mut hi_lambda, i_hi) = interference_at(&mut s, hi).map_err(|it| no_conv(&s, it, 0.0, hi))?;
    if i_hi > threshold {
        // Only reachable through rounding; walk up until feasible.
        let mut k = 0;
        loop {
            hi *= 2.0;
            let (l, i) = interference_at(&mut s, hi).map_err(|it| no_conv(&s, it, 0.0, hi))?;
            hi_lambda = l;
            k += 1;
            if i <= threshold {
                break;
            }
            if k > 2100 {
                return Err(no_conv(&s, k, hi_lambda, hi));
            }
        }
    }
    let mut lo = hi;
    let mut k = 0;
    loop {
        lo *= 0.5;
        k += 1;
        let (l, i) = interference_at(&mut s, lo).map_err(|it| no_conv(&s, it, hi_lambda, hi))?;
        if i > threshold {
            break;
        }
        hi = lo;
        hi_lambda = l;
        if k > 2100 {
            return Ok(finish(&s, hi_lambda, hi));
        }
    }
    let mut it = 0;
    while !collapsed(lo, hi) {
        if it >= options.max_iterations {
            return Err(no_conv(&s, it, hi_lambda, hi));
        }
        let mid = 0.5 * (lo + hi);
        let (l, i) = interference_at(&mut s, mid).map_err(|it| no_conv(&s, it, hi_lambda, hi))?;
        if i > threshold {
            lo = mid;
        } else {
            hi = mid;
            hi_lambda = l;
        }
        it += 1;
    }
    s.iterations += it;
    Ok(finish(&s, hi_lambda, hi))
}
