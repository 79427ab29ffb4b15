//! Stage Hamiltonians for the two-part drive cycle.
//!
//! The driven stage couples every atom to the laser and is stored dense; the
//! dark stage is diagonal in the computational basis and stored as a vector.
//!
//! The per-atom drive term is defined through the single-atom propagator: we
//! take the exact closed form of the one-atom stage-one evolution (Rabi
//! coupling plus detuning, including the detuning-dependent phase split) and
//! use its principal matrix logarithm as the generator. This guarantees that
//! a chain without interactions evolves entrywise identically to the product
//! of single-atom propagators, which is the convention the few-atom closed
//! forms in [`crate::oracle`] are built on.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::basis::{bond_list, bond_occupancy_count, excitation_count};
use crate::error::Result;
use crate::params::{ModelParams, Stage};

/// A stage Hamiltonian in the computational basis (units of rad/µs, ħ = 1).
#[derive(Debug, Clone)]
pub enum StageHamiltonian {
    /// Driven stage: dense Hermitian matrix.
    Dense(Array2<Complex64>),
    /// Dark stage: real diagonal.
    Diagonal(Array1<f64>),
}

impl StageHamiltonian {
    pub fn dim(&self) -> usize {
        match self {
            StageHamiltonian::Dense(m) => m.nrows(),
            StageHamiltonian::Diagonal(d) => d.len(),
        }
    }

    /// Materialize as a dense matrix (copies the diagonal case).
    pub fn to_dense(&self) -> Array2<Complex64> {
        match self {
            StageHamiltonian::Dense(m) => m.clone(),
            StageHamiltonian::Diagonal(d) => {
                let mut m = Array2::zeros((d.len(), d.len()));
                for (i, &x) in d.iter().enumerate() {
                    m[[i, i]] = Complex64::new(x, 0.0);
                }
                m
            }
        }
    }

    /// Largest deviation from Hermiticity, max |H − H†|.
    pub fn hermiticity_residual(&self) -> f64 {
        match self {
            StageHamiltonian::Diagonal(_) => 0.0,
            StageHamiltonian::Dense(m) => {
                let n = m.nrows();
                let mut worst = 0.0f64;
                for i in 0..n {
                    for j in i..n {
                        let d = (m[[i, j]] - m[[j, i]].conj()).norm();
                        if d > worst {
                            worst = d;
                        }
                    }
                }
                worst
            }
        }
    }
}

/// Exact single-atom propagator of the driven stage.
///
/// Rows/columns are ordered (|g⟩, |r⟩). With Ω_e = √(Ω² + Δ²),
/// X± = cos(Ω_e T₁) ± i(Δ/Ω_e) sin(Ω_e T₁), Y = (Ω/Ω_e) sin(Ω_e T₁) and
/// θ₁ = ΔT₁/2, the matrix is
/// [[X₊ e^{iθ₁}, iY e^{iθ₁}], [iY e^{−iθ₁}, X₋ e^{−iθ₁}]]; its determinant
/// is exactly 1 because X₊X₋ + Y² = 1.
pub fn single_atom_propagator(omega: f64, delta: f64, t1: f64) -> Array2<Complex64> {
    let om_e = omega.hypot(delta);
    let theta1 = delta * t1 / 2.0;
    let (x_plus, x_minus, y) = if om_e < 1e-300 {
        (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), 0.0)
    } else {
        let (s, c) = (om_e * t1).sin_cos();
        let r = delta / om_e;
        (Complex64::new(c, r * s), Complex64::new(c, -r * s), (omega / om_e) * s)
    };
    let e1 = Complex64::from_polar(1.0, theta1);
    let iy = Complex64::new(0.0, y);
    ndarray::array![[x_plus * e1, iy * e1], [iy * e1.conj(), x_minus * e1.conj()]]
}

/// Hermitian generator of the driven stage for one atom: the principal
/// logarithm of [`single_atom_propagator`] divided by T₁, so that
/// exp(−i·h·T₁) reproduces the propagator to machine precision.
pub fn drive_generator(omega: f64, delta: f64, t1: f64) -> Array2<Complex64> {
    let u = single_atom_propagator(omega, delta, t1);
    // u ∈ SU(2): u = cosφ·I − i sinφ n̂·σ. Then i(u − cosφ·I) = sinφ n̂·σ is
    // Hermitian and exposes the rotation axis and angle.
    let cos_phi = ((u[[0, 0]] + u[[1, 1]]).re / 2.0).clamp(-1.0, 1.0);
    let i = Complex64::i();
    let az = (i * (u[[0, 0]] - cos_phi)).re;
    let m01 = i * u[[0, 1]];
    let (ax, ay) = (m01.re, -m01.im);
    let s = (ax * ax + ay * ay + az * az).sqrt();
    if s < 1e-14 {
        if cos_phi > 0.0 {
            // u ≈ +I: no rotation.
            return Array2::zeros((2, 2));
        }
        // u ≈ −I: a full π rotation; every axis reproduces −I, pick x.
        let w = Complex64::new(std::f64::consts::PI / t1, 0.0);
        return ndarray::array![[Complex64::new(0.0, 0.0), w], [w, Complex64::new(0.0, 0.0)]];
    }
    let phi = s.atan2(cos_phi);
    let scale = phi / (s * t1);
    ndarray::array![
        [
            Complex64::new(scale * az, 0.0),
            Complex64::new(scale * ax, -scale * ay)
        ],
        [
            Complex64::new(scale * ax, scale * ay),
            Complex64::new(-scale * az, 0.0)
        ]
    ]
}

/// Build the Hamiltonian of one drive stage for the given parameters.
pub fn build_hamiltonian(params: &ModelParams, stage: Stage) -> Result<StageHamiltonian> {
    params.validate()?;
    let dim = params.dim();
    let bonds = bond_list(params.sites, params.boundary);
    match stage {
        Stage::One => {
            let h_atom = drive_generator(params.omega(), params.delta, params.t1);
            let mut h: Array2<Complex64> = Array2::zeros((dim, dim));
            for i in 0..dim {
                for j in 0..params.sites {
                    let b = i >> j & 1;
                    h[[i, i]] += h_atom[[b, b]];
                    h[[i ^ (1 << j), i]] += h_atom[[1 - b, b]];
                }
            }
            if params.variant.stage_one_has_interaction() && params.v != 0.0 {
                for i in 0..dim {
                    h[[i, i]] += params.v * f64::from(bond_occupancy_count(i, &bonds));
                }
            }
            Ok(StageHamiltonian::Dense(h))
        }
        Stage::Two => {
            let with_detuning = params.variant.stage_two_has_detuning();
            let d = Array1::from_shape_fn(dim, |i| {
                let mut x = params.v * f64::from(bond_occupancy_count(i, &bonds));
                if with_detuning {
                    x += params.delta * f64::from(excitation_count(i));
                }
                x
            });
            Ok(StageHamiltonian::Diagonal(d))
        }
    }
}
