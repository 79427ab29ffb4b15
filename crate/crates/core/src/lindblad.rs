//! Open-system evolution with single-atom decay.
//!
//! The density matrix is vectorized row-major (entry ρ_ij lives at index
//! i·dim + j), turning each stage of the cycle into one dense superoperator
//! exponential. Per cycle the state costs two matrix–vector products; the
//! expensive part is compiling the two exponentials, done once.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::population_difference_diagonal;
use crate::error::{CoreError, Result};
use crate::hamiltonian::{build_hamiltonian, StageHamiltonian};
use crate::linalg::{cond_1, eig_general, eigh_hermitian, expm, max_abs_diff, scale_columns};
use crate::observables::{critical_cycle_number, order_parameter, Trajectory};
use crate::params::{ModelParams, Stage, DISSIPATIVE_SITE_CAP};

/// Per-cycle trace tolerance before evolution aborts.
pub const TRACE_DRIFT_TOL: f64 = 1e-6;

/// Negative-eigenvalue depth that flags (but does not abort) a run.
pub const NEGATIVITY_WARN_TOL: f64 = 1e-6;

/// A density matrix in vectorized form.
#[derive(Debug, Clone)]
pub struct DensityState {
    /// Row-major vec(ρ), length 4^L.
    pub rho_vec: Array1<Complex64>,
    pub sites: usize,
}

impl DensityState {
    /// ρ = |ψ⟩⟨ψ| for a pure state.
    pub fn pure(psi: &Array1<Complex64>, sites: usize) -> Result<Self> {
        let dim = 1usize << sites;
        if psi.len() != dim {
            return Err(CoreError::DimMismatch { expected: dim, got: psi.len() });
        }
        let mut rho_vec = Array1::zeros(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                rho_vec[i * dim + j] = psi[i] * psi[j].conj();
            }
        }
        Ok(DensityState { rho_vec, sites })
    }

    /// The all-ground product state |g…g⟩⟨g…g|.
    pub fn ground(sites: usize) -> Self {
        let dim = 1usize << sites;
        let mut rho_vec = Array1::zeros(dim * dim);
        rho_vec[0] = Complex64::new(1.0, 0.0);
        DensityState { rho_vec, sites }
    }

    /// A computational-basis projector |index⟩⟨index|.
    pub fn from_basis_index(index: usize, sites: usize) -> Self {
        let dim = 1usize << sites;
        let mut rho_vec = Array1::zeros(dim * dim);
        rho_vec[index * dim + index] = Complex64::new(1.0, 0.0);
        DensityState { rho_vec, sites }
    }

    pub fn dim(&self) -> usize {
        1usize << self.sites
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|i| self.rho_vec[i * dim + i]).sum()
    }

    /// Reshape into the dim×dim matrix form.
    pub fn matrix(&self) -> Array2<Complex64> {
        let dim = self.dim();
        Array2::from_shape_fn((dim, dim), |(i, j)| self.rho_vec[i * dim + j])
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let d = (self.rho_vec[i * dim + j] - self.rho_vec[j * dim + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part of ρ.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let m = self.matrix();
        let m_dag = m.t().mapv(|z| z.conj());
        let herm = (&m + &m_dag).mapv(|z| z / 2.0);
        let (vals, _) = eigh_hermitian(&herm)?;
        Ok(vals[0])
    }

    /// Check trace, Hermiticity, and positivity within their tolerances.
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(CoreError::InvalidParams(format!("density matrix trace is {tr}, expected 1")));
        }
        let herm = self.hermiticity_defect();
        if herm > 1e-8 {
            return Err(CoreError::InvalidParams(format!(
                "density matrix deviates from Hermiticity by {herm:.3e}"
            )));
        }
        let min_eig = self.min_eigenvalue()?;
        if min_eig < -1e-8 {
            return Err(CoreError::InvalidParams(format!(
                "density matrix has negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(())
    }

    /// P = Σ_i diag[i]·ρ_ii.
    pub fn imbalance(&self, diag: &Array1<f64>) -> f64 {
        let dim = self.dim();
        (0..dim).map(|i| diag[i] * self.rho_vec[i * dim + i].re).sum()
    }
}

/// Generator of one stage in vectorized form:
/// 𝓛 = −i(H⊗I − I⊗Hᵀ) + Γ Σ_j [σ⁻_j⊗(σ⁻_j)* − ½(σ⁺_jσ⁻_j⊗I + I⊗(σ⁺_jσ⁻_j)ᵀ)].
///
/// The Kronecker structure is filled in directly (the jump operators are
/// real 0/1 matrices in this basis, so conjugates and transposes cost
/// nothing), which avoids materializing dim²×dim² temporaries.
pub fn build_liouvillian(params: &ModelParams, stage: Stage) -> Result<Array2<Complex64>> {
    if params.sites > DISSIPATIVE_SITE_CAP {
        return Err(CoreError::SizeCap {
            l: params.sites,
            cap: DISSIPATIVE_SITE_CAP,
            context: "dense superoperator construction; use the pure-state engine for larger chains",
        });
    }
    let gamma = params.gamma.unwrap_or(0.0);
    let dim = params.dim();
    let sdim = dim * dim;
    let mut lv: Array2<Complex64> = Array2::zeros((sdim, sdim));
    let minus_i = Complex64::new(0.0, -1.0);

    match build_hamiltonian(params, stage)? {
        StageHamiltonian::Dense(h) => {
            // −i(H⊗I): rows (i,j) ← columns (k,j); +i(I⊗Hᵀ): rows (i,j) ← (i,l).
            for i in 0..dim {
                for k in 0..dim {
                    let hik = h[[i, k]];
                    if hik != Complex64::new(0.0, 0.0) {
                        let v = minus_i * hik;
                        for j in 0..dim {
                            lv[[i * dim + j, k * dim + j]] += v;
                        }
                    }
                }
            }
            for l in 0..dim {
                for j in 0..dim {
                    let hlj = h[[l, j]];
                    if hlj != Complex64::new(0.0, 0.0) {
                        let v = -minus_i * hlj;
                        for i in 0..dim {
                            lv[[i * dim + j, i * dim + l]] += v;
                        }
                    }
                }
            }
        }
        StageHamiltonian::Diagonal(d) => {
            for i in 0..dim {
                for j in 0..dim {
                    lv[[i * dim + j, i * dim + j]] += minus_i * (d[i] - d[j]);
                }
            }
        }
    }

    if gamma > 0.0 {
        for atom in 0..params.sites {
            let bit = 1usize << atom;
            // Gain: σ⁻ρσ⁺ maps the (k, k′) block with both atoms excited onto
            // (k∖bit, k′∖bit).
            for k in (0..dim).filter(|k| k & bit != 0) {
                for kp in (0..dim).filter(|kp| kp & bit != 0) {
                    lv[[(k ^ bit) * dim + (kp ^ bit), k * dim + kp]] += gamma;
                }
            }
            // Loss: −(Γ/2){σ⁺σ⁻, ρ} is diagonal in the vectorized basis.
            for i in 0..dim {
                for j in 0..dim {
                    let occ = ((i & bit != 0) as u32 + (j & bit != 0) as u32) as f64;
                    lv[[i * dim + j, i * dim + j]] -= 0.5 * gamma * occ;
                }
            }
        }
    }
    Ok(lv)
}

/// Dense exponential of one stage generator, with the route that produced it.
#[derive(Debug, Clone)]
pub struct StagePropagator {
    /// exp(𝓛·T_stage).
    pub matrix: Array2<Complex64>,
    /// True when the eigendecomposition route was used; false means the
    /// scaling-and-squaring fallback.
    pub via_eig: bool,
}

impl StagePropagator {
    /// How far the propagator is from preserving trace: with t = vec(I),
    /// max |(Pᵀt − t)|.
    pub fn trace_defect(&self, dim: usize) -> f64 {
        let mut worst = 0.0f64;
        for c in 0..dim * dim {
            let col_sum: Complex64 = (0..dim).map(|i| self.matrix[[i * dim + i, c]]).sum();
            let target = if c % dim == c / dim { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((col_sum - target).norm());
        }
        worst
    }
}

/// Both compiled stage propagators of one drive cycle.
#[derive(Debug, Clone)]
pub struct CyclePropagators {
    pub stage_one: StagePropagator,
    pub stage_two: StagePropagator,
}

fn compile_stage(params: &ModelParams, stage: Stage) -> Result<StagePropagator> {
    let lv = build_liouvillian(params, stage)?;
    let t = match stage {
        Stage::One => params.t1,
        Stage::Two => params.t2,
    };
    // Preferred route: diagonalize 𝓛 once, exponentiate eigenvalues. Guard
    // with a reconstruction residual and the conditioning of the eigenbasis;
    // on any failure fall back to the direct exponential.
    let via_eig = (|| -> Option<Array2<Complex64>> {
        let (vals, vecs) = eig_general(&lv).ok()?;
        let cond = cond_1(&vecs).ok()?;
        if cond > 1e8 {
            return None;
        }
        let inv = {
            use ndarray_linalg::Inverse;
            vecs.inv().ok()?
        };
        let reconstructed = scale_columns(&vecs, &vals).dot(&inv);
        if max_abs_diff(&reconstructed, &lv) >= 1e-8 {
            return None;
        }
        let exp_vals = vals.mapv(|l| (l * t).exp());
        Some(scale_columns(&vecs, &exp_vals).dot(&inv))
    })();
    let (matrix, via_eig) = match via_eig {
        Some(m) => (m, true),
        None => (expm(&lv.mapv(|z| z * t))?, false),
    };
    let prop = StagePropagator { matrix, via_eig };
    let defect = prop.trace_defect(params.dim());
    if defect > 1e-8 {
        return Err(CoreError::Linalg(format!(
            "compiled stage propagator drifts trace by {defect:.3e}"
        )));
    }
    Ok(prop)
}

/// Compile both stage superoperator exponentials.
pub fn compile_dissipative_cycle(params: &ModelParams) -> Result<CyclePropagators> {
    Ok(CyclePropagators {
        stage_one: compile_stage(params, Stage::One)?,
        stage_two: compile_stage(params, Stage::Two)?,
    })
}

/// Outcome of a density-matrix run: the trajectory (whose `norms` column
/// carries tr ρ after each cycle) plus numerical-health bookkeeping.
#[derive(Debug, Clone)]
pub struct DissipativeRun {
    pub trajectory: Trajectory,
    /// Worst per-cycle Hermiticity defect seen.
    pub herm_defect_max: f64,
    /// Most negative density-matrix eigenvalue seen.
    pub min_eigenvalue_seen: f64,
    /// Set when negativity exceeded its warning threshold (run continues).
    pub negativity_warning: bool,
    pub stage_one_via_eig: bool,
    pub stage_two_via_eig: bool,
}

/// Evolve a density matrix stroboscopically for `n_f` cycles, recording the
/// imbalance after every full cycle.
pub fn evolve_density(params: &ModelParams, rho0: &DensityState, n_f: usize) -> Result<DissipativeRun> {
    if n_f == 0 {
        return Err(CoreError::InvalidParams("n_f must be at least 1".into()));
    }
    if rho0.sites != params.sites {
        return Err(CoreError::DimMismatch { expected: params.dim(), got: rho0.dim() });
    }
    rho0.validate()?;
    let props = compile_dissipative_cycle(params)?;
    let diag = population_difference_diagonal(params.sites);

    let mut state = rho0.clone();
    let mut p = Vec::with_capacity(n_f + 1);
    let mut traces = Vec::with_capacity(n_f + 1);
    p.push(state.imbalance(&diag));
    traces.push(state.trace().re);
    let mut herm_defect_max = state.hermiticity_defect();
    let mut min_eig_seen = state.min_eigenvalue()?;

    for n in 1..=n_f {
        let mid = props.stage_one.matrix.dot(&state.rho_vec);
        state.rho_vec = props.stage_two.matrix.dot(&mid);
        let tr = state.trace();
        let drift = (tr.re - 1.0).abs().max(tr.im.abs());
        if drift > TRACE_DRIFT_TOL {
            return Err(CoreError::TraceDrift { cycle: n, drift, tol: TRACE_DRIFT_TOL });
        }
        p.push(state.imbalance(&diag));
        traces.push(tr.re);
        herm_defect_max = herm_defect_max.max(state.hermiticity_defect());
        min_eig_seen = min_eig_seen.min(state.min_eigenvalue()?);
    }

    let q = order_parameter(&p);
    let (n_c, censored) = critical_cycle_number(&q);
    Ok(DissipativeRun {
        trajectory: Trajectory {
            params: params.clone(),
            p,
            q,
            n_c,
            censored,
            n_f,
            norms: traces,
            spectral_fallback: false,
        },
        herm_defect_max,
        min_eigenvalue_seen: min_eig_seen,
        negativity_warning: min_eig_seen < -NEGATIVITY_WARN_TOL,
        stage_one_via_eig: props.stage_one.via_eig,
        stage_two_via_eig: props.stage_two.via_eig,
    })
}

/// Closed-form imbalance of a single undriven atom prepared in |r⟩:
/// P(t) = 2e^{−Γt} − 1.
pub fn single_atom_decay_imbalance(gamma: f64, t: f64) -> f64 {
    2.0 * (-gamma * t).exp() - 1.0
}

/// Result of an exponential envelope fit |P(n)| ~ e^{−αn}.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub alpha: f64,
    pub intercept: f64,
    pub n_points: usize,
    pub window: (usize, usize),
    /// Largest |log-envelope − fit| over the points used.
    pub residual: f64,
}

/// Fit the decay rate of the |P(n)| envelope by least squares on the log of
/// its local maxima within `window` (half-open, cycle indices). The default
/// window skips the first 10 cycles. A monotone envelope has no ripple to
/// ride, so when fewer than 5 maxima exist every above-threshold point in
/// the window is used instead.
pub fn fit_decay(p: &[f64], window: Option<(usize, usize)>) -> Result<DecayFit> {
    let (start, end) = window.unwrap_or((10, p.len().saturating_sub(1)));
    if start >= end || end > p.len() {
        return Err(CoreError::InvalidParams(format!(
            "fit window [{start}, {end}) does not fit a sequence of length {}",
            p.len()
        )));
    }
    let abs: Vec<f64> = p.iter().map(|x| x.abs()).collect();
    let lo = start.max(1);
    let hi = end.min(p.len() - 1);
    let floor = 1e-14;
    let mut pts: Vec<(f64, f64)> = (lo..hi)
        .filter(|&n| abs[n] >= abs[n - 1] && abs[n] >= abs[n + 1] && abs[n] > floor)
        .map(|n| (n as f64, abs[n].ln()))
        .collect();
    if pts.len() < 5 {
        pts = (lo..hi)
            .filter(|&n| abs[n] > floor)
            .map(|n| (n as f64, abs[n].ln()))
            .collect();
    }
    if pts.len() < 5 {
        return Err(CoreError::NoSignal { found: pts.len(), need: 5 });
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|(x, _)| x).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < f64::EPSILON {
        return Err(CoreError::NoSignal { found: pts.len(), need: 5 });
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let residual = pts
        .iter()
        .map(|(x, y)| (y - (intercept + slope * x)).abs())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        alpha: -slope,
        intercept,
        n_points: pts.len(),
        window: (start, end),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::basis_state;
    use crate::params::DriveVariant;
    use std::f64::consts::FRAC_PI_2;

    fn undriven(sites: usize, gamma: f64) -> ModelParams {
        let mut p = ModelParams::new(DriveVariant::Original, sites);
        // Ω = π/2 + ε = 0 switches the drive off entirely.
        p.epsilon = -FRAC_PI_2;
        p.t2 = 15.0;
        p.gamma = Some(gamma);
        p
    }

    #[test]
    fn single_atom_decay_matches_closed_form() {
        let params = undriven(1, 0.01);
        let rho0 = DensityState::from_basis_index(1, 1);
        let run = evolve_density(&params, &rho0, 40).unwrap();
        let cycle_t = params.t1 + params.t2;
        for n in 0..=40usize {
            let exact = single_atom_decay_imbalance(0.01, n as f64 * cycle_t);
            assert!(
                (run.trajectory.p[n] - exact).abs() < 1e-12,
                "P({n}) = {} vs {exact}",
                run.trajectory.p[n]
            );
        }
        assert!(run.herm_defect_max < 1e-12);
        assert!(!run.negativity_warning);
    }

    #[test]
    fn decay_free_run_matches_unitary_engine() {
        let mut params = ModelParams::new(DriveVariant::Original, 2);
        params.epsilon = 0.1;
        params.delta = 0.3;
        params.v = 0.1;
        params.gamma = Some(0.0);
        let run = evolve_density(&params, &DensityState::ground(2), 50).unwrap();

        let mut pure = params.clone();
        pure.gamma = None;
        let prop = crate::floquet::compile_cycle(&pure).unwrap();
        let traj = crate::floquet::evolve(&prop, &basis_state(0, 4), 50, crate::floquet::EvolveMode::Iterate).unwrap();
        for n in 0..=50usize {
            assert!(
                (run.trajectory.p[n] - traj.p[n]).abs() < 1e-8,
                "cycle {n}: {} vs {}",
                run.trajectory.p[n],
                traj.p[n]
            );
        }
    }

    #[test]
    fn liouvillian_annihilates_identity_from_the_left() {
        let mut params = ModelParams::new(DriveVariant::Original, 2);
        params.epsilon = 0.2;
        params.delta = -0.4;
        params.v = 0.15;
        params.gamma = Some(0.02);
        for stage in [Stage::One, Stage::Two] {
            let lv = build_liouvillian(&params, stage).unwrap();
            let dim = params.dim();
            // vec(I)ᵀ·𝓛 = row sums of 𝓛 over diagonal row indices.
            let mut worst = 0.0f64;
            for c in 0..dim * dim {
                let s: Complex64 = (0..dim).map(|i| lv[[i * dim + i, c]]).sum();
                worst = worst.max(s.norm());
            }
            assert!(worst < 1e-12, "left identity violated by {worst}");
        }
    }

    #[test]
    fn propagators_preserve_trace_and_match_direct_exponential() {
        let mut params = ModelParams::new(DriveVariant::Improved, 2);
        params.epsilon = -0.1;
        params.v = 0.1;
        params.gamma = Some(0.05);
        let props = compile_dissipative_cycle(&params).unwrap();
        assert!(props.stage_one.trace_defect(4) < 1e-10);
        assert!(props.stage_two.trace_defect(4) < 1e-10);
        // Whatever route compiled them, both must equal exp(𝓛T).
        for (stage, t, prop) in [
            (Stage::One, params.t1, &props.stage_one),
            (Stage::Two, params.t2, &props.stage_two),
        ] {
            let lv = build_liouvillian(&params, stage).unwrap();
            let direct = expm(&lv.mapv(|z| z * t)).unwrap();
            assert!(max_abs_diff(&direct, &prop.matrix) < 1e-9);
        }
    }

    #[test]
    fn rejects_oversize_and_mismatched_input() {
        let params = undriven(8, 0.01);
        assert!(matches!(
            build_liouvillian(&params, Stage::One),
            Err(CoreError::SizeCap { cap: 7, .. })
        ));
        let ok = undriven(2, 0.01);
        let rho_wrong = DensityState::ground(3);
        assert!(evolve_density(&ok, &rho_wrong, 5).is_err());
    }

    #[test]
    fn exact_exponential_fit() {
        let p: Vec<f64> = (0..=200)
            .map(|n| if n % 2 == 0 { -1.0 } else { 1.0 } * (-0.01 * n as f64).exp())
            .collect();
        let fit = fit_decay(&p, None).unwrap();
        assert!((fit.alpha - 0.01).abs() < 1e-6, "alpha = {}", fit.alpha);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn rippled_envelope_fit_rides_the_maxima() {
        // |P| alternates between 1.2·e^{−0.02n} and 0.8·e^{−0.02n}; the local
        // maxima lie exactly on the upper branch.
        let p: Vec<f64> = (0..=300)
            .map(|n| {
                let ripple = if n % 2 == 0 { 1.2 } else { 0.8 };
                let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
                sign * ripple * (-0.02 * n as f64).exp()
            })
            .collect();
        let fit = fit_decay(&p, Some((10, 200))).unwrap();
        assert!((fit.alpha - 0.02).abs() < 1e-9, "alpha = {}", fit.alpha);
    }

    #[test]
    fn fit_requires_signal() {
        let zeros = vec![0.0; 100];
        assert!(matches!(fit_decay(&zeros, None), Err(CoreError::NoSignal { .. })));
        let short = vec![1.0, 0.9, 0.8];
        assert!(fit_decay(&short, Some((0, 3))).is_err());
    }

    #[test]
    fn density_state_validation() {
        let good = DensityState::ground(2);
        assert!(good.validate().is_ok());
        let mut bad = DensityState::ground(2);
        bad.rho_vec[0] = Complex64::new(0.5, 0.0);
        assert!(bad.validate().is_err());
        let mut skew = DensityState::ground(2);
        skew.rho_vec[1] = Complex64::new(0.1, 0.0); // ρ_01 without ρ_10
        assert!(skew.validate().is_err());
    }
}
