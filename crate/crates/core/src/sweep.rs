//! Parameter-sweep orchestration: n_c(Δ) curves, n_c(L) scaling with
//! log-linear fits, (L, ε) phase diagrams of δn_c, and the (Δ, V) sign
//! symmetry audit.
//!
//! Grid points are embarrassingly parallel and every point compiles its own
//! propagator — no state is shared across points, so results are identical
//! for any worker count and ordering.

use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

use crate::basis::basis_state;
use crate::error::Result;
use crate::floquet::{compile_cycle, evolve_with_budget, EvolveMode};
use crate::observables::SIGN_DEAD_BAND;
use crate::params::ModelParams;

/// Default per-point cycle budget; large enough to cover the long scaling
/// horizons while keeping censoring explicit rather than silent.
pub const DEFAULT_SWEEP_BUDGET: usize = 20_000;

/// One measured grid point.
#[derive(Debug, Clone, Serialize)]
pub struct NcPoint {
    pub params: ModelParams,
    pub n_c: usize,
    pub censored: bool,
    pub wall_ms: f64,
    /// Populated when this point failed; the sweep continues regardless.
    pub error: Option<String>,
}

/// Count cycles until the first sign breakdown, stopping early at the flip.
///
/// Equivalent to a full evolve followed by the order-parameter scan, but a
/// sweep point that flips at cycle 20 pays for 20 cycles, not the budget.
pub fn critical_cycles(params: &ModelParams, budget: usize) -> Result<(usize, bool)> {
    let prop = compile_cycle(params)?;
    let diag = crate::basis::population_difference_diagonal(params.sites);
    let mut psi = basis_state(0, prop.dim());
    let mut prev: i8 = -1;
    for n in 1..=budget {
        psi = prop.apply_cycle(&psi);
        let p = crate::observables::population_imbalance(&psi, &diag)?;
        let signed = if n % 2 == 0 { p } else { -p };
        let s = if p.abs() <= SIGN_DEAD_BAND {
            prev
        } else if signed > 0.0 {
            1
        } else {
            -1
        };
        if s == 1 {
            return Ok((n - 1, false));
        }
        prev = s;
    }
    Ok((budget, true))
}

fn measure_point(params: ModelParams, budget: usize) -> NcPoint {
    let start = Instant::now();
    match critical_cycles(&params, budget) {
        Ok((n_c, censored)) => NcPoint {
            params,
            n_c,
            censored,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            error: None,
        },
        Err(e) => NcPoint {
            params,
            n_c: 0,
            censored: true,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            error: Some(e.to_string()),
        },
    }
}

/// n_c across a detuning grid, one independently compiled point per Δ.
pub fn scan_detuning(template: &ModelParams, deltas: &[f64], budget: usize) -> Vec<NcPoint> {
    deltas
        .par_iter()
        .map(|&delta| {
            let mut p = template.clone();
            p.delta = delta;
            measure_point(p, budget)
        })
        .collect()
}

/// Ordinary least-squares fit of log n_c against L.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub n_points: usize,
}

/// n_c against chain size, with a log-linear fit over usable points.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingScan {
    pub points: Vec<NcPoint>,
    /// Present when at least 3 points are non-censored (and nonzero, so the
    /// logarithm exists).
    pub fit: Option<LogFit>,
}

/// Measure n_c(L) over `l_values` and fit log n_c ~ slope·L + intercept.
/// Censored points never enter the fit.
pub fn scaling_nc_vs_l(template: &ModelParams, l_values: &[usize], budget: usize) -> ScalingScan {
    let points: Vec<NcPoint> = l_values
        .par_iter()
        .map(|&l| {
            let mut p = template.clone();
            p.sites = l;
            measure_point(p, budget)
        })
        .collect();
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|pt| !pt.censored && pt.error.is_none() && pt.n_c >= 1)
        .map(|pt| (pt.params.sites as f64, (pt.n_c as f64).ln()))
        .collect();
    let fit = ols(&usable).filter(|_| usable.len() >= 3).map(|(slope, intercept)| LogFit {
        slope,
        intercept,
        n_points: usable.len(),
    });
    ScalingScan { points, fit }
}

fn ols(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|(x, _)| x).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < f64::EPSILON {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    Some((slope, (sy - slope * sx) / n))
}

/// Sign classification of δn_c.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseClass {
    Growing,
    Flat,
    Shrinking,
}

impl std::fmt::Display for PhaseClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhaseClass::Growing => write!(f, "growing"),
            PhaseClass::Flat => write!(f, "flat"),
            PhaseClass::Shrinking => write!(f, "shrinking"),
        }
    }
}

/// One cell of the (L, ε) phase diagram: δn_c = n_c(L) − n_c(L−1).
#[derive(Debug, Clone, Serialize)]
pub struct PhaseCell {
    pub l: usize,
    pub epsilon: f64,
    pub delta_n_c: i64,
    /// Set when either endpoint hit the budget, in which case δn_c is a
    /// lower-bound artifact rather than a measurement.
    pub censored: bool,
    pub class: PhaseClass,
}

impl PhaseCell {
    fn classify(delta_n_c: i64) -> PhaseClass {
        match delta_n_c.signum() {
            1 => PhaseClass::Growing,
            0 => PhaseClass::Flat,
            _ => PhaseClass::Shrinking,
        }
    }
}

/// δn_c over an (ε, L) grid. `l_values` must be consecutive ascending chain
/// sizes; each cell sits at the larger of the pair it differences.
pub fn phase_diagram(
    template: &ModelParams,
    epsilons: &[f64],
    l_values: &[usize],
    budget: usize,
) -> Vec<PhaseCell> {
    // Flat parallel map over all (ε, L) points, then difference per ε row.
    let grid: Vec<(usize, usize)> = (0..epsilons.len())
        .flat_map(|ei| (0..l_values.len()).map(move |li| (ei, li)))
        .collect();
    let measured: Vec<NcPoint> = grid
        .par_iter()
        .map(|&(ei, li)| {
            let mut p = template.clone();
            p.epsilon = epsilons[ei];
            p.sites = l_values[li];
            measure_point(p, budget)
        })
        .collect();
    let mut cells = Vec::with_capacity(epsilons.len() * l_values.len().saturating_sub(1));
    for ei in 0..epsilons.len() {
        for li in 1..l_values.len() {
            let prev = &measured[ei * l_values.len() + li - 1];
            let here = &measured[ei * l_values.len() + li];
            let delta_n_c = here.n_c as i64 - prev.n_c as i64;
            cells.push(PhaseCell {
                l: l_values[li],
                epsilon: epsilons[ei],
                delta_n_c,
                censored: here.censored || prev.censored,
                class: PhaseCell::classify(delta_n_c),
            });
        }
    }
    cells
}

/// First chain size at which growth stops for the given ε: the smallest L
/// with δn_c ≤ 0, if any.
pub fn critical_chain_size(cells: &[PhaseCell], epsilon: f64) -> Option<usize> {
    let mut row: Vec<&PhaseCell> = cells
        .iter()
        .filter(|c| c.epsilon == epsilon)
        .collect();
    row.sort_by_key(|c| c.l);
    row.iter().find(|c| c.delta_n_c <= 0).map(|c| c.l)
}

/// One confirmed breach of the (Δ, V) → (−Δ, −V) symmetry.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryViolation {
    pub delta: f64,
    pub v: f64,
    pub max_p_diff: f64,
    pub n_c_direct: usize,
    pub n_c_mirrored: usize,
}

/// Outcome of a symmetry audit over a (Δ, V) grid.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub checked: usize,
    pub n_f: usize,
    pub worst_p_diff: f64,
    pub violations: Vec<SymmetryViolation>,
}

/// For every (Δ, V) in the grid, evolve both the point and its sign-mirrored
/// twin and compare: P series within 1e−10, n_c exactly. Violations are
/// returned as data, never raised as errors.
pub fn symmetry_audit(template: &ModelParams, grid: &[(f64, f64)], n_f: usize) -> SymmetryReport {
    let results: Vec<Option<SymmetryViolation>> = grid
        .par_iter()
        .map(|&(delta, v)| {
            let mut a = template.clone();
            a.delta = delta;
            a.v = v;
            let mut b = template.clone();
            b.delta = -delta;
            b.v = -v;
            let run = |p: &ModelParams| -> Result<crate::observables::Trajectory> {
                let prop = compile_cycle(p)?;
                evolve_with_budget(&prop, &basis_state(0, prop.dim()), n_f, EvolveMode::Iterate, n_f)
            };
            match (run(&a), run(&b)) {
                (Ok(ta), Ok(tb)) => {
                    let max_p_diff = ta
                        .p
                        .iter()
                        .zip(tb.p.iter())
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max);
                    if max_p_diff > 1e-10 || ta.n_c != tb.n_c {
                        Some(SymmetryViolation {
                            delta,
                            v,
                            max_p_diff,
                            n_c_direct: ta.n_c,
                            n_c_mirrored: tb.n_c,
                        })
                    } else {
                        None
                    }
                }
                _ => Some(SymmetryViolation {
                    delta,
                    v,
                    max_p_diff: f64::NAN,
                    n_c_direct: 0,
                    n_c_mirrored: 0,
                }),
            }
        })
        .collect();
    let worst = results
        .iter()
        .flatten()
        .map(|v| v.max_p_diff)
        .fold(0.0, f64::max);
    SymmetryReport {
        checked: grid.len(),
        n_f,
        worst_p_diff: worst,
        violations: results.into_iter().flatten().collect(),
    }
}
