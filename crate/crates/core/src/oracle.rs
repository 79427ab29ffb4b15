//! Closed-form few-atom checks used as an independent correctness oracle.
//!
//! For the variant whose driven stage has no interaction, the cycle unitary
//! of two or three atoms factors into single-atom rotations plus diagonal
//! dark-stage phases, and the imbalance after two or three cycles collapses
//! to a short harmonic sum: P = const + Σ 2·Re[poly(X₊, X₋, Y)·e^{i(mφ₁ + kθ₃)}].
//! The tables below hold those polynomials with exact integer coefficients;
//! they are transcribed independently of the dense engine, so any
//! disagreement between the two localizes a bug. Conjugate pairs enter as
//! 2·Re(term), which keeps the result structurally real.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::params::ModelParams;

/// Amplitudes and phases of the factored cycle: X± and Y describe the
/// single-atom driven-stage rotation, θ₂/θ₃ the dark-stage detuning and
/// interaction phases, and φ₁ = 2θ₁ + θ₂ the per-cycle phase an excited atom
/// accumulates relative to a ground one.
#[derive(Debug, Clone)]
pub struct OracleFactors {
    pub x_plus: Complex64,
    pub x_minus: Complex64,
    /// X = √(X₊X₋), real because X₊X₋ = cos² + (Δ/Ω_e)²sin² ≥ 0.
    pub x: f64,
    pub y: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub phi1: f64,
}

/// Compute the factored-cycle amplitudes for the given parameters. The
/// driven stage is taken interaction-free (the factorization requires it);
/// `v` enters only through the dark-stage phase θ₃.
pub fn factors(params: &ModelParams) -> OracleFactors {
    let omega = params.omega();
    let omega_e = omega.hypot(params.delta);
    let (x_plus, x_minus, y) = if omega_e < 1e-300 {
        (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), 0.0)
    } else {
        let (s, c) = (omega_e * params.t1).sin_cos();
        let r = params.delta / omega_e;
        (Complex64::new(c, r * s), Complex64::new(c, -r * s), (omega / omega_e) * s)
    };
    let theta1 = params.delta * params.t1 / 2.0;
    let theta2 = params.delta * params.t2;
    let theta3 = params.v * params.t2;
    OracleFactors {
        x_plus,
        x_minus,
        x: (x_plus * x_minus).re.max(0.0).sqrt(),
        y,
        theta1,
        theta2,
        theta3,
        phi1: 2.0 * theta1 + theta2,
    }
}

impl OracleFactors {
    /// Deviation from the unitarity identity X₊X₋ + Y² = 1.
    pub fn identity_residual(&self) -> f64 {
        (self.x_plus * self.x_minus + self.y * self.y - 1.0).norm()
    }
}

/// Two-atom driven-stage unitary in the ordered basis (gg, gr, rg, rr),
/// written out entry by entry as a transcription check target.
pub fn two_atom_u1(f: &OracleFactors) -> Array2<Complex64> {
    let e1 = Complex64::from_polar(1.0, f.theta1);
    let e1c = e1.conj();
    let (xp, xm) = (f.x_plus, f.x_minus);
    let iy = Complex64::new(0.0, f.y);
    let y2 = Complex64::new(f.y * f.y, 0.0);
    ndarray::array![
        [xp * xp * e1 * e1, iy * xp * e1 * e1, iy * xp * e1 * e1, -y2 * e1 * e1],
        [iy * xp, xp * xm, -y2, iy * xm],
        [iy * xp, -y2, xp * xm, iy * xm],
        [-y2 * e1c * e1c, iy * xm * e1c * e1c, iy * xm * e1c * e1c, xm * xm * e1c * e1c]
    ]
}

/// Two-atom dark-stage unitary: diag(1, e^{−iθ₂}, e^{−iθ₂}, e^{−i(2θ₂+θ₃)}).
pub fn two_atom_u2(f: &OracleFactors) -> Array2<Complex64> {
    let mut u = Array2::zeros((4, 4));
    u[[0, 0]] = Complex64::new(1.0, 0.0);
    u[[1, 1]] = Complex64::from_polar(1.0, -f.theta2);
    u[[2, 2]] = Complex64::from_polar(1.0, -f.theta2);
    u[[3, 3]] = Complex64::from_polar(1.0, -(2.0 * f.theta2 + f.theta3));
    u
}

/// One monomial c·X₊^a·X₋^b·Y^k of a harmonic coefficient.
type Monomial = (f64, u32, u32, u32);

/// One oscillating harmonic: multiples (m, k) of (φ₁, θ₃) and the polynomial
/// coefficient of e^{i(mφ₁ + kθ₃)}.
type Harmonic = (i32, i32, &'static [Monomial]);

// Two atoms, second cycle.
const L2_N2_CONST: &[Monomial] = &[(-1.0, 4, 4, 0), (2.0, 2, 2, 4), (-1.0, 0, 0, 8)];
const L2_N2_OSC: &[Harmonic] = &[
    (1, 1, &[(2.0, 3, 1, 4), (2.0, 2, 0, 6)]),
    (1, 0, &[(2.0, 4, 2, 2), (2.0, 3, 1, 4)]),
];

// Two atoms, third cycle.
const L2_N3_CONST: &[Monomial] = &[
    (-1.0, 6, 6, 0),
    (-5.0, 4, 4, 4),
    (-16.0, 3, 3, 6),
    (-11.0, 2, 2, 8),
    (1.0, 0, 0, 12),
];
const L2_N3_OSC: &[Harmonic] = &[
    (3, 2, &[(2.0, 7, 1, 4), (2.0, 6, 0, 6)]),
    (3, 1, &[(-2.0, 7, 1, 4), (-2.0, 6, 0, 6)]),
    (2, 2, &[(2.0, 6, 2, 4), (-2.0, 4, 0, 8)]),
    (2, 1, &[(4.0, 6, 2, 4), (8.0, 5, 1, 6), (4.0, 4, 0, 8)]),
    (2, 0, &[(2.0, 7, 3, 2), (-2.0, 5, 1, 6)]),
    (1, 1, &[(8.0, 5, 3, 4), (4.0, 4, 2, 6), (-6.0, 3, 1, 8), (-2.0, 2, 0, 10)]),
    (1, 0, &[(4.0, 6, 4, 2), (-4.0, 4, 2, 6), (-2.0, 3, 1, 8), (-2.0, 2, 0, 10)]),
    (0, 1, &[(2.0, 4, 4, 4), (2.0, 3, 3, 6), (-2.0, 2, 2, 8), (-2.0, 1, 1, 10)]),
];

// Three atoms on a ring, second cycle.
const L3_N2_CONST: &[Monomial] = &[
    (-1.0, 6, 6, 0),
    (-2.0, 5, 5, 2),
    (1.0, 4, 4, 4),
    (4.0, 3, 3, 6),
    (1.0, 2, 2, 8),
    (-2.0, 1, 1, 10),
    (-1.0, 0, 0, 12),
];
const L3_N2_OSC: &[Harmonic] = &[
    (1, 2, &[(2.0, 4, 2, 6), (4.0, 3, 1, 8), (2.0, 2, 0, 10)]),
    (1, 1, &[(4.0, 5, 3, 4), (8.0, 4, 2, 6), (4.0, 3, 1, 8)]),
    (1, 0, &[(2.0, 6, 4, 2), (4.0, 5, 3, 4), (2.0, 4, 2, 6)]),
];

fn poly(terms: &[Monomial], f: &OracleFactors) -> Complex64 {
    let y = Complex64::new(f.y, 0.0);
    terms
        .iter()
        .map(|&(c, a, b, k)| f.x_plus.powu(a) * f.x_minus.powu(b) * y.powu(k) * c)
        .sum()
}

fn evaluate(constant: &[Monomial], oscillating: &[Harmonic], f: &OracleFactors) -> Result<f64> {
    let mut total = poly(constant, f);
    for &(m, k, terms) in oscillating {
        let phase = Complex64::from_polar(1.0, f64::from(m) * f.phi1 + f64::from(k) * f.theta3);
        let term = poly(terms, f) * phase;
        total += term + term.conj();
    }
    if total.im.abs() > 1e-9 {
        return Err(CoreError::ImaginaryResidue { imag: total.im });
    }
    Ok(total.re)
}

/// Imbalance of two atoms after the second cycle, from the all-ground state.
pub fn two_atom_p2(f: &OracleFactors) -> Result<f64> {
    evaluate(L2_N2_CONST, L2_N2_OSC, f)
}

/// Imbalance of two atoms after the third cycle.
pub fn two_atom_p3(f: &OracleFactors) -> Result<f64> {
    evaluate(L2_N3_CONST, L2_N3_OSC, f)
}

/// Imbalance of a three-atom ring after the second cycle.
pub fn three_atom_p2(f: &OracleFactors) -> Result<f64> {
    evaluate(L3_N2_CONST, L3_N2_OSC, f)
}

/// Number of distinct phase combinations in the cycle-n, L-atom expansion:
/// 2^{L−1}·4^{n−2}.
pub fn phase_combination_count(l: u32, n: u32) -> Result<u64> {
    if l < 2 || n < 2 {
        return Err(CoreError::InvalidParams(format!(
            "phase combinations are defined for at least two atoms and two cycles, got L={l}, n={n}"
        )));
    }
    1u64.checked_shl(l - 1)
        .and_then(|base| 4u64.checked_pow(n - 2).and_then(|f| base.checked_mul(f)))
        .ok_or_else(|| CoreError::InvalidParams(format!("phase combination count overflows for L={l}, n={n}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::DriveVariant;
    use ndarray::Array1;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn draw(rng: &mut ChaCha8Rng) -> ModelParams {
        let mut p = ModelParams::new(DriveVariant::Simplified, 2);
        p.epsilon = rng.gen_range(-1.0..1.0);
        p.delta = rng.gen_range(-1.0..1.0);
        p.v = rng.gen_range(-0.3..0.3);
        p.t2 = rng.gen_range(1.0..20.0);
        p
    }

    #[test]
    fn factor_limits() {
        let p = ModelParams::new(DriveVariant::Simplified, 2);
        let f = factors(&p);
        assert!(f.x_plus.norm() < 1e-15);
        assert!(f.x_minus.norm() < 1e-15);
        assert!((f.y - 1.0).abs() < 1e-15);
        assert!(f.x < 1e-7);

        let mut q = p.clone();
        q.epsilon = 0.2;
        let g = factors(&q);
        let angle = std::f64::consts::FRAC_PI_2 + 0.2;
        assert!((g.x_plus.re - angle.cos()).abs() < 1e-15);
        assert!(g.x_plus.im.abs() < 1e-15);
        assert!((g.y - angle.sin()).abs() < 1e-15);
    }

    #[test]
    fn unitarity_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let f = factors(&draw(&mut rng));
            assert!(f.identity_residual() < 1e-12);
        }
    }

    #[test]
    fn pair_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let f = factors(&draw(&mut rng));
            let u1 = two_atom_u1(&f);
            assert!(crate::linalg::unitarity_residual(&u1) < 1e-10);
            let u2 = two_atom_u2(&f);
            assert!(crate::linalg::unitarity_residual(&u2) < 1e-12);
        }
        // Perfect flips: the driven stage sends |gg⟩ to −|rr⟩.
        let f0 = factors(&ModelParams::new(DriveVariant::Simplified, 2));
        let u1 = two_atom_u1(&f0);
        assert!((u1[[3, 0]] + Complex64::new(1.0, 0.0)).norm() < 1e-14);
        // Interaction off: the dark stage is detuning phases only.
        let mut p = ModelParams::new(DriveVariant::Simplified, 2);
        p.delta = 0.7;
        p.t2 = 3.0;
        let f = factors(&p);
        let u2 = two_atom_u2(&f);
        assert!((u2[[3, 3]] - Complex64::from_polar(1.0, -2.0 * f.theta2)).norm() < 1e-14);
    }

    #[test]
    fn perfect_flip_values() {
        for v in [0.0, 0.1, -0.25] {
            let mut p = ModelParams::new(DriveVariant::Simplified, 2);
            p.v = v;
            let f = factors(&p);
            assert!((two_atom_p2(&f).unwrap() + 1.0).abs() < 1e-12);
            assert!((two_atom_p3(&f).unwrap() - 1.0).abs() < 1e-12);
            assert!((three_atom_p2(&f).unwrap() + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_flip_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = draw(&mut rng);
            let mut flipped = p.clone();
            flipped.delta = -p.delta;
            flipped.v = -p.v;
            let (f, g) = (factors(&p), factors(&flipped));
            assert!((two_atom_p2(&f).unwrap() - two_atom_p2(&g).unwrap()).abs() < 1e-12);
            assert!((two_atom_p3(&f).unwrap() - two_atom_p3(&g).unwrap()).abs() < 1e-12);
            assert!((three_atom_p2(&f).unwrap() - three_atom_p2(&g).unwrap()).abs() < 1e-12);
        }
    }

    /// The polynomial tables must agree with brute-force iteration of the
    /// printed matrices themselves — this isolates the tables from both the
    /// matrices and the dense engine.
    #[test]
    fn tables_match_matrix_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let diag2 = crate::basis::population_difference_diagonal(2);
        for _ in 0..100 {
            let p = draw(&mut rng);
            let f = factors(&p);
            let step = two_atom_u2(&f).dot(&two_atom_u1(&f));
            let mut psi: Array1<Complex64> = crate::basis::basis_state(0, 4);
            psi = step.dot(&psi);
            psi = step.dot(&psi);
            let p2: f64 = psi.iter().zip(diag2.iter()).map(|(a, d)| d * a.norm_sqr()).sum();
            assert!((two_atom_p2(&f).unwrap() - p2).abs() < 1e-12);
            psi = step.dot(&psi);
            let p3: f64 = psi.iter().zip(diag2.iter()).map(|(a, d)| d * a.norm_sqr()).sum();
            assert!((two_atom_p3(&f).unwrap() - p3).abs() < 1e-12);
        }
    }

    /// Same isolation for the three-atom table, against an explicitly built
    /// product of single-atom rotations and ring phases.
    #[test]
    fn three_atom_table_matches_product_construction() {
        use crate::basis::{bond_list, bond_occupancy_count, excitation_count};
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let diag3 = crate::basis::population_difference_diagonal(3);
        let bonds = bond_list(3, crate::params::Boundary::Ring);
        for _ in 0..100 {
            let mut p = draw(&mut rng);
            p.sites = 3;
            let f = factors(&p);
            let ua = crate::hamiltonian::single_atom_propagator(p.omega(), p.delta, p.t1);
            // U₁ = u ⊗ u ⊗ u over the bit-per-atom basis.
            let mut u1: Array2<Complex64> = Array2::zeros((8, 8));
            for row in 0..8usize {
                for col in 0..8usize {
                    let mut amp = Complex64::new(1.0, 0.0);
                    for j in 0..3 {
                        amp *= ua[[row >> j & 1, col >> j & 1]];
                    }
                    u1[[row, col]] = amp;
                }
            }
            let mut psi: Array1<Complex64> = crate::basis::basis_state(0, 8);
            for _ in 0..2 {
                psi = u1.dot(&psi);
                for (i, a) in psi.iter_mut().enumerate() {
                    let phase = p.delta * f64::from(excitation_count(i))
                        + p.v * f64::from(bond_occupancy_count(i, &bonds));
                    *a *= Complex64::from_polar(1.0, -phase * p.t2);
                }
            }
            let p2: f64 = psi.iter().zip(diag3.iter()).map(|(a, d)| d * a.norm_sqr()).sum();
            assert!(
                (three_atom_p2(&f).unwrap() - p2).abs() < 1e-12,
                "table vs product: {} vs {}",
                three_atom_p2(&f).unwrap(),
                p2
            );
        }
    }

    #[test]
    fn outputs_stay_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..300 {
            let f = factors(&draw(&mut rng));
            for value in [two_atom_p2(&f), two_atom_p3(&f), three_atom_p2(&f)] {
                let v = value.unwrap();
                assert!(v.abs() <= 1.0 + 1e-9, "out of range: {v}");
            }
        }
    }

    #[test]
    fn combination_counts() {
        assert_eq!(phase_combination_count(2, 2).unwrap(), 2);
        assert_eq!(phase_combination_count(3, 2).unwrap(), 4);
        assert_eq!(phase_combination_count(2, 3).unwrap(), 8);
        assert!(phase_combination_count(1, 2).is_err());
        assert!(phase_combination_count(2, 1).is_err());
        assert!(phase_combination_count(40, 40).is_err());
    }
}
