//! Stroboscopic observables: population imbalance P(n), its Fourier
//! spectrum S(ν), the binary order parameter Q(n), the critical cycle count
//! n_c, and closed-form predictors for the beating period.

use ndarray::Array1;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{CoreError, Result};
use crate::params::ModelParams;

/// Dead band for the sign of P: below this the previous sign is carried.
pub const SIGN_DEAD_BAND: f64 = 1e-12;

/// Everything recorded over one stroboscopic run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: ModelParams,
    /// P(0) … P(n_f).
    pub p: Vec<f64>,
    /// Q(1) … Q(n_f), each ±1.
    pub q: Vec<i8>,
    /// Cycles completed before the first sign breakdown of Q.
    pub n_c: usize,
    /// True when Q never flipped within the run.
    pub censored: bool,
    pub n_f: usize,
    /// State norm after each cycle (index-aligned with `p`).
    pub norms: Vec<f64>,
    /// True when a requested eigenbasis evolution silently fell back to
    /// iteration because the decomposition missed its tolerance.
    pub spectral_fallback: bool,
}

/// Fourier transform of a P sequence on the frequency grid ν_k = k/grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub nu: Vec<f64>,
    pub values: Vec<Complex64>,
    pub magnitude: Vec<f64>,
}

impl Spectrum {
    /// Local maxima of |S| ranked by height, at most `count` of them.
    pub fn top_peaks(&self, count: usize) -> Vec<(f64, f64)> {
        let m = &self.magnitude;
        let mut peaks: Vec<(f64, f64)> = (0..m.len())
            .filter(|&k| {
                let left_ok = k == 0 || m[k] >= m[k - 1];
                let right_ok = k == m.len() - 1 || m[k] > m[k + 1];
                left_ok && right_ok
            })
            .map(|k| (self.nu[k], m[k]))
            .collect();
        peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
        peaks.truncate(count);
        peaks
    }
}

/// Expectation of the population-difference operator: Σ_i diag[i]·|ψ_i|².
pub fn population_imbalance(state: &Array1<Complex64>, diag: &Array1<f64>) -> Result<f64> {
    if state.len() != diag.len() {
        return Err(CoreError::DimMismatch { expected: diag.len(), got: state.len() });
    }
    Ok(state.iter().zip(diag.iter()).map(|(a, &d)| d * a.norm_sqr()).sum())
}

/// S(ν_k) = (1/n_f) Σ_{n=1}^{n_f} P(n) e^{2πinν_k} on the grid ν_k = k/grid.
///
/// `p` is the full recorded sequence including P(0), which the transform
/// skips. With `grid = None` the grid size defaults to n_f (a plain DFT,
/// evaluated by FFT); any other grid size is evaluated directly, which
/// permits oversampling.
pub fn fourier_spectrum(p: &[f64], grid: Option<usize>) -> Result<Spectrum> {
    if p.len() < 3 {
        return Err(CoreError::InvalidParams(format!(
            "need at least two cycles of data for a spectrum, got {}",
            p.len().saturating_sub(1)
        )));
    }
    let n_f = p.len() - 1;
    let grid_size = grid.unwrap_or(n_f);
    if grid_size == 0 {
        return Err(CoreError::InvalidParams("spectrum grid size must be positive".into()));
    }
    let values: Vec<Complex64> = if grid_size == n_f {
        // Shift the sum to start at n = 0 and absorb the offset into a
        // per-bin twiddle: S_k = e^{2πik/N}·(Σ_m P(m+1) e^{2πimk/N})/N.
        let mut buf: Vec<Complex64> = p[1..].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        FftPlanner::new().plan_fft_inverse(n_f).process(&mut buf);
        let n = n_f as f64;
        buf.iter()
            .enumerate()
            .map(|(k, x)| x * Complex64::from_polar(1.0 / n, 2.0 * std::f64::consts::PI * k as f64 / n))
            .collect()
    } else {
        (0..grid_size)
            .map(|k| {
                let nu = k as f64 / grid_size as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for (n, &x) in p.iter().enumerate().skip(1) {
                    acc += x * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * n as f64 * nu);
                }
                acc / n_f as f64
            })
            .collect()
    };
    let nu = (0..grid_size).map(|k| k as f64 / grid_size as f64).collect();
    let magnitude = values.iter().map(|z| z.norm()).collect();
    Ok(Spectrum { nu, values, magnitude })
}

/// Residual of the Parseval identity Σ_k |S(ν_k)|² = (1/n_f) Σ_n P(n)²;
/// meaningful on the default (non-oversampled) grid.
pub fn parseval_residual(p: &[f64], spectrum: &Spectrum) -> f64 {
    let n_f = p.len() - 1;
    let lhs: f64 = spectrum.magnitude.iter().map(|m| m * m).sum();
    let rhs: f64 = p[1..].iter().map(|x| x * x).sum::<f64>() / n_f as f64;
    (lhs - rhs).abs()
}

/// Binary order parameter Q(n) = sgn[(−1)ⁿ P(n)] for n = 1…n_f.
///
/// Inside the dead band |P| ≤ 1e−12 the previous sign is carried, with
/// Q(0) ≔ −1; this keeps symmetric zero crossings from registering as flips.
pub fn order_parameter(p: &[f64]) -> Vec<i8> {
    let mut q = Vec::with_capacity(p.len().saturating_sub(1));
    let mut prev: i8 = -1;
    for (n, &x) in p.iter().enumerate().skip(1) {
        let signed = if n % 2 == 0 { x } else { -x };
        let s = if x.abs() <= SIGN_DEAD_BAND {
            prev
        } else if signed > 0.0 {
            1
        } else {
            -1
        };
        q.push(s);
        prev = s;
    }
    q
}

/// Cycles survived before the first +1 in the sign sequence: n_c is the last
/// cycle of the unbroken initial run. A sequence that never flips yields
/// n_c = n_f with the censored flag set.
pub fn critical_cycle_number(q: &[i8]) -> (usize, bool) {
    match q.iter().position(|&s| s == 1) {
        Some(i) => (i, false),
        None => (q.len(), true),
    }
}

/// Beating period (in cycles) induced by a drive-strength perturbation:
/// n_b = π/(2|ε|).
pub fn beating_period_epsilon(epsilon: f64) -> Result<f64> {
    if epsilon == 0.0 || !epsilon.is_finite() {
        return Err(CoreError::InvalidParams(
            "beating period is undefined for zero drive perturbation".into(),
        ));
    }
    Ok(std::f64::consts::PI / (2.0 * epsilon.abs()))
}

/// Beating period (in cycles) induced by detuning: n_b = 2π/[(Ω_e − Ω)T₁]
/// with the dressed frequency Ω_e = √(Ω² + Δ²).
pub fn beating_period_detuning(params: &ModelParams) -> Result<f64> {
    if params.delta == 0.0 || !params.delta.is_finite() {
        return Err(CoreError::InvalidParams(
            "beating period is undefined for zero detuning".into(),
        ));
    }
    let omega = params.omega();
    let omega_e = omega.hypot(params.delta);
    Ok(2.0 * std::f64::consts::PI / ((omega_e - omega) * params.t1))
}
