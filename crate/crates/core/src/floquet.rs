//! Cycle compilation and stroboscopic evolution.
//!
//! One drive cycle is U_F = U₂U₁: a dense driven-stage unitary followed by a
//! diagonal dark-stage phase map. Evolution over n cycles either iterates
//! U_F (with an online norm guard) or works in the eigenbasis of U_F, which
//! is preferred for long horizons because phases are advanced exactly.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::sync::OnceLock;

use crate::basis::population_difference_diagonal;
use crate::error::{CoreError, Result};
use crate::hamiltonian::{build_hamiltonian, StageHamiltonian};
use crate::linalg::{eigh_hermitian, scale_columns, unitary_eig, unitarity_residual};
use crate::observables::{critical_cycle_number, order_parameter, population_imbalance, Trajectory};
use crate::params::{ModelParams, Stage};

/// Largest number of cycles a single evolve call will accept.
pub const DEFAULT_CYCLE_BUDGET: usize = 1_000_000;

/// Tolerance for the norm of an iterated state before evolution aborts.
pub const NORM_DRIFT_TOL: f64 = 1e-6;

/// Reconstruction tolerance for the eigenbasis of the cycle unitary.
pub const SPECTRAL_RESIDUAL_TOL: f64 = 1e-8;

/// How to advance the state from cycle to cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolveMode {
    /// Repeated application of U₂U₁.
    Iterate,
    /// Diagonalize U₂U₁ once, then advance eigenphases.
    Spectral,
}

/// Eigendecomposition of the cycle unitary: U₂U₁ = basis·diag(e^{iφ})·basis†.
#[derive(Debug, Clone)]
pub struct SpectralForm {
    pub phases: Array1<f64>,
    pub basis: Array2<Complex64>,
    /// max |basis·diag(e^{iφ})·basis† − U₂U₁| achieved by the decomposition.
    pub residual: f64,
}

/// Compiled propagator for one drive cycle.
#[derive(Debug)]
pub struct FloquetPropagator {
    pub params: ModelParams,
    /// Driven-stage unitary exp(−iH₁T₁).
    pub u1: Array2<Complex64>,
    /// Diagonal of the dark-stage unitary exp(−iH₂T₂).
    pub u2_phases: Array1<Complex64>,
    spectral: OnceLock<Option<SpectralForm>>,
}

/// Build the cycle propagator: U₁ through the stage-one eigensystem, U₂
/// through elementwise phases of the stage-two diagonal.
pub fn compile_cycle(params: &ModelParams) -> Result<FloquetPropagator> {
    let StageHamiltonian::Dense(h1) = build_hamiltonian(params, Stage::One)? else {
        unreachable!("stage one is always dense");
    };
    let StageHamiltonian::Diagonal(d2) = build_hamiltonian(params, Stage::Two)? else {
        unreachable!("stage two is always diagonal");
    };
    let (vals, vecs) = eigh_hermitian(&h1)?;
    let lam = Array1::from_shape_fn(vals.len(), |k| Complex64::from_polar(1.0, -vals[k] * params.t1));
    let u1 = scale_columns(&vecs, &lam).dot(&vecs.t().mapv(|z| z.conj()));
    let u2_phases = d2.mapv(|x| Complex64::from_polar(1.0, -x * params.t2));
    Ok(FloquetPropagator {
        params: params.clone(),
        u1,
        u2_phases,
        spectral: OnceLock::new(),
    })
}

impl FloquetPropagator {
    pub fn dim(&self) -> usize {
        self.u1.nrows()
    }

    /// The full cycle unitary U₂U₁ (materialized; row-scales U₁).
    pub fn cycle_unitary(&self) -> Array2<Complex64> {
        let mut uf = self.u1.clone();
        for (i, mut row) in uf.rows_mut().into_iter().enumerate() {
            let ph = self.u2_phases[i];
            row.mapv_inplace(|z| z * ph);
        }
        uf
    }

    /// Apply one cycle in place: ψ ← U₂U₁ψ.
    pub fn apply_cycle(&self, psi: &Array1<Complex64>) -> Array1<Complex64> {
        let mut next = self.u1.dot(psi);
        next.zip_mut_with(&self.u2_phases, |a, &p| *a *= p);
        next
    }

    /// Eigenform of the cycle unitary, computed once on first request.
    /// Returns `None` when the decomposition misses its reconstruction
    /// tolerance; callers then fall back to iteration.
    pub fn spectral(&self) -> Option<&SpectralForm> {
        self.spectral
            .get_or_init(|| match unitary_eig(&self.cycle_unitary()) {
                Ok((phases, basis, residual)) if residual < SPECTRAL_RESIDUAL_TOL => {
                    Some(SpectralForm { phases, basis, residual })
                }
                _ => None,
            })
            .as_ref()
    }

    /// Expensive self-check: max |U₁†U₁ − I|. Exposed for tests and audits
    /// rather than run on every compile.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_residual(&self.u1)
    }
}

/// Evolve `psi0` over `n_f` cycles recording the population imbalance after
/// every cycle, then derive the sign sequence and its first breakdown.
pub fn evolve(
    prop: &FloquetPropagator,
    psi0: &Array1<Complex64>,
    n_f: usize,
    mode: EvolveMode,
) -> Result<Trajectory> {
    evolve_with_budget(prop, psi0, n_f, mode, DEFAULT_CYCLE_BUDGET)
}

/// As [`evolve`], with an explicit cycle budget.
pub fn evolve_with_budget(
    prop: &FloquetPropagator,
    psi0: &Array1<Complex64>,
    n_f: usize,
    mode: EvolveMode,
    budget: usize,
) -> Result<Trajectory> {
    if n_f == 0 {
        return Err(CoreError::InvalidParams("n_f must be at least 1".into()));
    }
    if n_f > budget {
        return Err(CoreError::BudgetExceeded { budget });
    }
    if psi0.len() != prop.dim() {
        return Err(CoreError::DimMismatch { expected: prop.dim(), got: psi0.len() });
    }
    let diag = population_difference_diagonal(prop.params.sites);
    let mut p = Vec::with_capacity(n_f + 1);
    let mut norms = Vec::with_capacity(n_f + 1);
    p.push(population_imbalance(psi0, &diag)?);
    norms.push(psi0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt());

    let mut spectral_fallback = false;
    let run_mode = match mode {
        EvolveMode::Spectral => {
            if prop.spectral().is_some() {
                EvolveMode::Spectral
            } else {
                spectral_fallback = true;
                EvolveMode::Iterate
            }
        }
        EvolveMode::Iterate => EvolveMode::Iterate,
    };

    match run_mode {
        EvolveMode::Iterate => {
            let mut psi = psi0.to_owned();
            for n in 1..=n_f {
                psi = prop.apply_cycle(&psi);
                let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                let drift = (norm - 1.0).abs();
                if drift > NORM_DRIFT_TOL {
                    return Err(CoreError::NormDrift { cycle: n, drift, tol: NORM_DRIFT_TOL });
                }
                p.push(population_imbalance(&psi, &diag)?);
                norms.push(norm);
            }
        }
        EvolveMode::Spectral => {
            let form = prop.spectral().expect("checked above");
            let basis_dag = form.basis.t().mapv(|z| z.conj());
            let step = form.phases.mapv(|ph| Complex64::from_polar(1.0, ph));
            let mut coeffs = basis_dag.dot(psi0);
            for _ in 1..=n_f {
                coeffs.zip_mut_with(&step, |c, &e| *c *= e);
                let psi = form.basis.dot(&coeffs);
                p.push(population_imbalance(&psi, &diag)?);
                norms.push(psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt());
            }
        }
    }

    let q = order_parameter(&p);
    let (n_c, censored) = critical_cycle_number(&q);
    Ok(Trajectory {
        params: prop.params.clone(),
        p,
        q,
        n_c,
        censored,
        n_f,
        norms,
        spectral_fallback,
    })
}

/// State after exactly `n` cycles, by the cheapest valid route: direct
/// iteration for short horizons, eigenphase advance for long ones.
pub fn stroboscopic_state(
    prop: &FloquetPropagator,
    psi0: &Array1<Complex64>,
    n: usize,
) -> Result<Array1<Complex64>> {
    if psi0.len() != prop.dim() {
        return Err(CoreError::DimMismatch { expected: prop.dim(), got: psi0.len() });
    }
    if n == 0 {
        return Ok(psi0.to_owned());
    }
    let iterate_threshold = 64;
    if n > iterate_threshold {
        if let Some(form) = prop.spectral() {
            let basis_dag = form.basis.t().mapv(|z| z.conj());
            let mut coeffs = basis_dag.dot(psi0);
            let advance = form.phases.mapv(|ph| Complex64::from_polar(1.0, ph * n as f64));
            coeffs.zip_mut_with(&advance, |c, &e| *c *= e);
            return Ok(form.basis.dot(&coeffs));
        }
    }
    let mut psi = psi0.to_owned();
    for _ in 0..n {
        psi = prop.apply_cycle(&psi);
    }
    Ok(psi)
}
