//! Dense linear algebra on complex matrices: thin LAPACK wrappers plus the
//! two numerical kernels the engine needs beyond stock routines — an
//! eigendecomposition specialized to unitary matrices and a scaling-and-
//! squaring matrix exponential.

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Eig, Eigh, Inverse, Solve, UPLO};
use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal column eigenvectors, so that `h = V·Λ·V†`.
pub fn eigh_hermitian(h: &Array2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>)> {
    let (vals, vecs) = h.eigh(UPLO::Lower)?;
    // The backend returns a matrix satisfying h = conj(V)·Λ·Vᵀ — its
    // conjugate holds the eigenvector columns. Normalize to the standard
    // convention here so no caller has to know. (Real-symmetric inputs are
    // unaffected, which is why only complex matrices expose the difference.)
    Ok((vals, vecs.mapv(|z| z.conj())))
}

/// General (non-Hermitian) eigendecomposition.
pub fn eig_general(m: &Array2<Complex64>) -> Result<(Array1<Complex64>, Array2<Complex64>)> {
    let (vals, vecs) = m.eig()?;
    Ok((vals, vecs))
}

/// Largest absolute entry of `a − b`.
pub fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest deviation of `u` from unitarity, max |u†u − I|.
pub fn unitarity_residual(u: &Array2<Complex64>) -> f64 {
    let gram = u.t().mapv(|z| z.conj()).dot(u);
    let n = gram.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((gram[[i, j]] - target).norm());
        }
    }
    worst
}

/// Matrix 1-norm (maximum absolute column sum).
pub fn norm_1(m: &Array2<Complex64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 1-norm condition number, computed from an explicit inverse.
pub fn cond_1(m: &Array2<Complex64>) -> Result<f64> {
    let inv = m.inv()?;
    Ok(norm_1(m) * norm_1(&inv))
}

/// Eigendecomposition of a unitary matrix into eigenphases and an orthonormal
/// eigenbasis, so that `u = w · diag(e^{iφ}) · w†`.
///
/// A unitary is normal, so its Hermitian part A = (u + u†)/2 and
/// anti-Hermitian part B = (u − u†)/(2i) commute and share an eigenbasis.
/// We diagonalize A, then re-diagonalize B inside each (near-)degenerate
/// eigenvalue cluster of A — this separates conjugate phase pairs ±φ, which
/// A alone cannot distinguish. Returns `(phases, w, residual)` with the
/// reconstruction residual max |w·diag(e^{iφ})·w† − u|.
pub fn unitary_eig(u: &Array2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>, f64)> {
    let n = u.nrows();
    let u_dag = u.t().mapv(|z| z.conj());
    let a = (u + &u_dag).mapv(|z| z / 2.0);
    let b = (u - &u_dag).mapv(|z| z / Complex64::new(0.0, 2.0));
    let (a_vals, mut w) = eigh_hermitian(&a)?;

    // Walk the ascending A-eigenvalues and rotate each degenerate cluster
    // into B's eigenbasis.
    let mut b_vals = Array1::zeros(n);
    let cluster_tol = 1e-8;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && a_vals[end] - a_vals[end - 1] < cluster_tol {
            end += 1;
        }
        if end - start == 1 {
            let col = w.column(start);
            let b_col = b.dot(&col);
            b_vals[start] = col.iter().zip(b_col.iter()).map(|(x, y)| x.conj() * y).sum::<Complex64>().re;
        } else {
            let block = w.slice(s![.., start..end]).to_owned();
            let b_sub = block.t().mapv(|z| z.conj()).dot(&b).dot(&block);
            // Symmetrize away the O(machine-ε) Hermiticity defect before eigh.
            let b_sub_h = (&b_sub + &b_sub.t().mapv(|z| z.conj())).mapv(|z| z / 2.0);
            let (sub_vals, sub_vecs) = eigh_hermitian(&b_sub_h)?;
            let rotated = block.dot(&sub_vecs);
            w.slice_mut(s![.., start..end]).assign(&rotated);
            for (k, &v) in sub_vals.iter().enumerate() {
                b_vals[start + k] = v;
            }
        }
        start = end;
    }

    let phases = Array1::from_shape_fn(n, |k| f64::atan2(b_vals[k], a_vals[k]));
    let lam = Array1::from_shape_fn(n, |k| Complex64::from_polar(1.0, phases[k]));
    let reconstructed = scale_columns(&w, &lam).dot(&w.t().mapv(|z| z.conj()));
    let residual = max_abs_diff(&reconstructed, u);
    Ok((phases, w, residual))
}

/// Multiply column `k` of `m` by `scales[k]` (i.e. `m · diag(scales)`).
pub fn scale_columns(m: &Array2<Complex64>, scales: &Array1<Complex64>) -> Array2<Complex64> {
    let mut out = m.clone();
    for (k, mut col) in out.columns_mut().into_iter().enumerate() {
        let s = scales[k];
        col.mapv_inplace(|z| z * s);
    }
    out
}

/// Matrix exponential e^M by scaling and squaring with a degree-13 Padé
/// approximant (Higham's method, as in standard `expm` implementations).
pub fn expm(m: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    const THETA_13: f64 = 5.371_920_351_148_152;
    #[rustfmt::skip]
    const B: [f64; 14] = [
        64_764_752_532_480_000.0, 32_382_376_266_240_000.0, 7_771_770_303_897_600.0,
        1_187_353_796_428_800.0, 129_060_195_264_000.0, 10_559_470_521_600.0,
        670_442_572_800.0, 33_522_128_640.0, 1_323_241_920.0, 40_840_800.0,
        960_960.0, 16_380.0, 182.0, 1.0,
    ];
    let n = m.nrows();
    if n != m.ncols() {
        return Err(CoreError::DimMismatch { expected: n, got: m.ncols() });
    }
    let norm = norm_1(m);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let a = m.mapv(|z| z / 2f64.powi(squarings as i32));

    let eye: Array2<Complex64> = Array2::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> Array2<Complex64> {
        let mut acc = &a6 * Complex64::new(c6, 0.0);
        acc = acc + &a4 * Complex64::new(c4, 0.0);
        acc = acc + &a2 * Complex64::new(c2, 0.0);
        acc + &eye * Complex64::new(c0, 0.0)
    };

    // U = A·[A6·(b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I]
    let inner_u = &a6 * Complex64::new(B[13], 0.0)
        + &a4 * Complex64::new(B[11], 0.0)
        + &a2 * Complex64::new(B[9], 0.0);
    let u = a.dot(&(a6.dot(&inner_u) + lin(B[7], B[5], B[3], B[1])));
    // V = A6·(b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let inner_v = &a6 * Complex64::new(B[12], 0.0)
        + &a4 * Complex64::new(B[10], 0.0)
        + &a2 * Complex64::new(B[8], 0.0);
    let v = a6.dot(&inner_v) + lin(B[6], B[4], B[2], B[0]);

    // r = (V − U)⁻¹ (V + U), then undo the scaling by repeated squaring.
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut r = solve_multi(&lhs, &rhs)?;
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Solve A·X = B column by column.
fn solve_multi(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    use ndarray_linalg::Factorize;
    let f = a.factorize()?;
    let mut x = Array2::zeros(b.raw_dim());
    for (j, col) in b.columns().into_iter().enumerate() {
        let sol = f.solve(&col.to_owned())?;
        x.column_mut(j).assign(&sol);
    }
    Ok(x)
}
