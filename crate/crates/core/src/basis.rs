//! Computational-basis conventions.
//!
//! Basis states are product states over the chain; bit `j` of a basis index
//! is atom `j`, with `1` meaning the Rydberg state |r⟩. Index 0 is therefore
//! |g…g⟩ and index 2^L − 1 is |r…r⟩.

use ndarray::Array1;
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::params::Boundary;

/// Nearest-neighbour pairs for a chain of `sites` atoms.
///
/// A ring of two atoms shares only one bond (the "wrap-around" pair is the
/// same pair), and a single atom has none.
pub fn bond_list(sites: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    if sites < 2 {
        return Vec::new();
    }
    let mut bonds: Vec<(usize, usize)> = (0..sites - 1).map(|j| (j, j + 1)).collect();
    if boundary == Boundary::Ring && sites > 2 {
        bonds.push((sites - 1, 0));
    }
    bonds
}

/// Number of excited atoms in basis state `index`.
pub fn excitation_count(index: usize) -> u32 {
    index.count_ones()
}

/// Number of bonds whose two atoms are both excited in basis state `index`.
pub fn bond_occupancy_count(index: usize, bonds: &[(usize, usize)]) -> u32 {
    bonds
        .iter()
        .filter(|&&(a, b)| index >> a & 1 == 1 && index >> b & 1 == 1)
        .count() as u32
}

/// Diagonal of the population-imbalance operator (1/L) Σ_j (|r⟩⟨r| − |g⟩⟨g|)_j.
///
/// Entry `i` is (2·excitations − L)/L, so |g…g⟩ maps to −1 and |r…r⟩ to +1.
pub fn population_difference_diagonal(sites: usize) -> Array1<f64> {
    let l = sites as f64;
    Array1::from_shape_fn(1 << sites, |i| (2.0 * f64::from(excitation_count(i)) - l) / l)
}

/// Parse a product-state label such as `"grr"` or `"011"` into a basis index.
///
/// Character `j` of the label is atom `j`; `r`/`1` mark excitation.
pub fn parse_state_label(label: &str, sites: usize) -> Result<usize> {
    if label.chars().count() != sites {
        return Err(CoreError::InvalidParams(format!(
            "state label `{label}` has {} characters, expected {sites}",
            label.chars().count()
        )));
    }
    let mut index = 0usize;
    for (j, c) in label.chars().enumerate() {
        match c {
            'r' | 'R' | '1' => index |= 1 << j,
            'g' | 'G' | '0' => {}
            other => {
                return Err(CoreError::InvalidParams(format!(
                    "state label `{label}` contains `{other}`; use g/r or 0/1"
                )))
            }
        }
    }
    Ok(index)
}

/// One-hot state vector for basis state `index` in a space of dimension `dim`.
pub fn basis_state(index: usize, dim: usize) -> Array1<Complex64> {
    let mut psi = Array1::zeros(dim);
    psi[index] = Complex64::new(1.0, 0.0);
    psi
}
