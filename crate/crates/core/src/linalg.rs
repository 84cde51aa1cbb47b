//! Dense linear-algebra helpers shared by the geometric modules.
//!
//! Everything works on `nalgebra` dynamic matrices in double precision.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result};

/// Eigenvalues below this floor are clamped when forming matrix square roots.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `‖a − b‖_max`. Panics on shape mismatch, callers check shapes first.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

pub fn vec_max_abs_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch in vec_max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// `max |m − mᵀ|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    max_abs_diff(m, &m.transpose())
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn require_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Checks symmetry within `tol` scaled by `max(1, ‖m‖_max)`.
pub fn require_symmetric(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    require_square(m)?;
    let asym = asymmetry(m);
    if asym > tol * max_abs(m).max(1.0) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// Eigen-decomposition of the symmetric part of `m`, eigenvalues ascending.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigen(m).0[0]
}

/// Fails unless `m` is symmetric (within `tol`) and positive definite.
pub fn require_spd(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    require_symmetric(m, tol)?;
    let lo = min_eigenvalue(m);
    if lo <= 0.0 || !lo.is_finite() {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
    }
    Ok(())
}

fn spectral_map(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen(m);
    let mapped = DMatrix::from_diagonal(&values.map(|v| f(v.max(EIGEN_FLOOR))));
    symmetrize(&(&vectors * mapped * vectors.transpose()))
}

/// Symmetric square root with eigenvalue floor [`EIGEN_FLOOR`].
pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    spectral_map(m, f64::sqrt)
}

/// Symmetric inverse square root with eigenvalue floor [`EIGEN_FLOOR`].
pub fn sym_inv_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    spectral_map(m, |v| 1.0 / v.sqrt())
}

/// Inverse of a symmetric positive-definite matrix, symmetrised.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = nalgebra::Cholesky::new(symmetrize(m)).ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: min_eigenvalue(m),
    })?;
    Ok(symmetrize(&chol.inverse()))
}

/// General inverse via LU; near-singular input is rejected.
pub fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    require_square(m)?;
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let sigma = min_singular_value(m);
    if sigma <= 1e-14 * max_abs(m).max(1.0) {
        return Err(Error::Singular);
    }
    m.clone().try_inverse().ok_or(Error::Singular)
}

pub fn solve(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    require_square(m)?;
    m.clone().lu().solve(rhs).ok_or(Error::Singular)
}

pub fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    m.clone().svd(false, false).singular_values
}

pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    singular_values(m).iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Spectral condition number `σ_max / σ_min`.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = singular_values(m);
    let hi = s.iter().cloned().fold(0.0, f64::max);
    let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

/// Thin QR of a full-column-rank matrix with `R` having a positive diagonal.
pub fn orthonormalize_columns(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let k = m.ncols();
    let sigma = min_singular_value(m);
    if !(sigma > 1e-10 * max_abs(m).max(1.0)) {
        return Err(Error::RankDeficient { sigma_min: sigma });
    }
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
            r.row_mut(j).neg_mut();
        }
    }
    Ok((q, r))
}

/// Orthogonal projector `Q Qᵀ` onto the span of orthonormal columns.
pub fn projector(q: &DMatrix<f64>) -> DMatrix<f64> {
    q * q.transpose()
}

/// Assembles `[[a, b], [c, d]]`.
pub fn from_blocks(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> DMatrix<f64> {
    let (r0, c0) = a.shape();
    let (r1, c1) = d.shape();
    let mut m = DMatrix::zeros(r0 + r1, c0 + c1);
    m.view_mut((0, 0), (r0, c0)).copy_from(a);
    m.view_mut((0, c0), (r0, c1)).copy_from(b);
    m.view_mut((r0, 0), (r1, c0)).copy_from(c);
    m.view_mut((r0, c0), (r1, c1)).copy_from(d);
    m
}

/// Block-diagonal matrix `a ⊕ b`.
pub fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    from_blocks(
        a,
        &DMatrix::zeros(a.nrows(), b.ncols()),
        &DMatrix::zeros(b.nrows(), a.ncols()),
        b,
    )
}

/// Copy of the `rows x cols` block starting at `(r, c)`.
pub fn block(m: &DMatrix<f64>, r: usize, c: usize, rows: usize, cols: usize) -> DMatrix<f64> {
    m.view((r, c), (rows, cols)).into_owned()
}

/// Concatenates matrices with equal row counts side by side.
pub fn hstack(parts: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = parts.first().map_or(0, |p| p.nrows());
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut m = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        m.view_mut((0, at), (rows, p.ncols())).copy_from(*p);
        at += p.ncols();
    }
    m
}

/// Volume of the unit ball in `ℝᵈ`: `κ₀ = 1`, `κ₁ = 2`, `κ_d = 2π/d · κ_{d−2}`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}
