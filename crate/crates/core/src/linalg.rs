//! Dense complex matrix helpers shared by the collective engine and the
//! full-space oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest absolute entry of `a - a^dagger`.
pub fn hermiticity_defect(a: &Mat) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for col in r..n {
            worst = worst.max((a[(r, col)] - a[(col, r)].conj()).norm());
        }
    }
    worst
}

pub fn is_diagonal(a: &Mat) -> bool {
    let n = a.nrows();
    (0..n).all(|r| (0..n).all(|col| r == col || a[(r, col)] == Complex64::new(0.0, 0.0)))
}

/// Hermitian part `(a + a^dagger)/2`, used to scrub rounding asymmetry before
/// an eigendecomposition.
pub fn hermitize(a: &Mat) -> Mat {
    (a + a.adjoint()).scale(0.5)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn eigh(a: &Mat) -> Result<(Vec<f64>, Mat)> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("non-finite entry in Hermitian eigensolve".into()));
    }
    let eig = hermitize(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Mat::from_fn(a.nrows(), a.ncols(), |r, col| eig.eigenvectors[(r, order[col])]);
    Ok((values, vectors))
}

pub fn min_eigenvalue(a: &Mat) -> Result<f64> {
    Ok(eigh(a)?.0.first().copied().unwrap_or(0.0))
}

/// `exp(-i angle g)` for Hermitian `g` via `V exp(-i angle L) V^dagger`.
pub fn expm_hermitian(g: &Mat, angle: f64) -> Result<Mat> {
    if is_diagonal(g) {
        let n = g.nrows();
        let mut out = Mat::zeros(n, n);
        for k in 0..n {
            out[(k, k)] = (-I * angle * g[(k, k)].re).exp();
        }
        return Ok(out);
    }
    let (values, vectors) = eigh(g)?;
    let phases: Vec<Complex64> = values.iter().map(|&l| (-I * angle * l).exp()).collect();
    let mut scaled = vectors.clone();
    for (col, phase) in phases.iter().enumerate() {
        let mut column = scaled.column_mut(col);
        column *= *phase;
    }
    Ok(&scaled * vectors.adjoint())
}

/// `exp(-i angle g)` for arbitrary square `g` (scaling-and-squaring Padé).
pub fn expm_general(g: &Mat, angle: f64) -> Result<Mat> {
    let arg = g * (-I * angle);
    if arg.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("non-finite generator".into()));
    }
    let out = arg.exp();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("matrix exponential overflowed".into()));
    }
    Ok(out)
}

/// Largest entry modulus.
pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()))
}

/// `u rho u^dagger` for Hermitian `rho`, symmetrized so rounding in the
/// products cannot accumulate into a non-Hermitian state.
pub fn conjugate(u: &Mat, rho: &Mat) -> Mat {
    hermitize(&(u * rho * u.adjoint()))
}

pub fn trace(a: &Mat) -> Complex64 {
    a.diagonal().iter().sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &Mat, b: &Mat) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..n {
        for k in 0..n {
            acc += a[(r, k)] * b[(k, r)];
        }
    }
    acc
}
