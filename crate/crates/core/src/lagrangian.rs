//! Lagrangian planes and frames.
//!
//! A plane is stored through an orthonormal `2n × n` column basis. Two planes
//! are compared through their orthogonal projectors, which makes equality
//! independent of the chosen basis.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{self, max_abs, max_abs_diff};
use crate::symplectic::{
    j_matrix, symplectic_basis_extension, PhaseVector, SymplecticMap, SymplecticRotation,
};
use crate::{Error, Result};

/// Default tolerance for `max |ω(colᵢ, colⱼ)|`.
pub const TOL_LAGRANGIAN: f64 = 1e-10;
/// Smallest admissible singular value of `[Q | Q′]` for a frame.
pub const TOL_TRANSVERSAL: f64 = 1e-10;
/// Default tolerance for subspace equality, `‖P₁ − P₂‖_max`.
pub const TOL_SUBSPACE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianCheck {
    pub is_lagrangian: bool,
    pub max_omega: f64,
}

/// `Bᵀ J B`, whose `(i, j)` entry is `ω(colⱼ, colᵢ)`.
fn omega_gram(b: &DMatrix<f64>) -> DMatrix<f64> {
    b.transpose() * j_matrix(b.nrows() / 2) * b
}

fn check_shape(basis: &DMatrix<f64>) -> Result<usize> {
    let (rows, cols) = basis.shape();
    if rows == 0 || rows % 2 != 0 || cols != rows / 2 {
        return Err(Error::DimensionMismatch {
            expected: rows / 2,
            found: cols,
        });
    }
    Ok(cols)
}

/// `max |ω(colᵢ, colⱼ)|` over the columns of a full-rank `2n × n` basis.
pub fn is_lagrangian(basis: &DMatrix<f64>, tol: f64) -> Result<LagrangianCheck> {
    check_shape(basis)?;
    // Rank is judged on the orthonormalised basis; ω is reported on the input.
    linalg::orthonormalize_columns(basis)?;
    let max_omega = max_abs(&omega_gram(basis));
    Ok(LagrangianCheck {
        is_lagrangian: max_omega <= tol,
        max_omega,
    })
}

/// An `n`-dimensional subspace of `ℝ²ⁿ` on which `ω` vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianPlane {
    basis: DMatrix<f64>,
}

impl LagrangianPlane {
    /// Orthonormalises `basis` and checks the Lagrangian condition on the
    /// orthonormal columns.
    pub fn new(basis: &DMatrix<f64>, tol: f64) -> Result<Self> {
        check_shape(basis)?;
        let (q, _) = linalg::orthonormalize_columns(basis)?;
        let max_omega = max_abs(&omega_gram(&q));
        if max_omega > tol {
            return Err(Error::NotLagrangian { max_omega });
        }
        Ok(Self { basis: q })
    }

    pub(crate) fn from_orthonormal(q: DMatrix<f64>) -> Self {
        Self { basis: q }
    }

    /// `ℓ_X = ℝⁿ_x × 0`.
    pub fn x_plane(n: usize) -> Self {
        let mut q = DMatrix::zeros(2 * n, n);
        q.view_mut((0, 0), (n, n)).fill_with_identity();
        Self { basis: q }
    }

    /// `ℓ_P = 0 × ℝⁿ_p`.
    pub fn p_plane(n: usize) -> Self {
        let mut q = DMatrix::zeros(2 * n, n);
        q.view_mut((n, 0), (n, n)).fill_with_identity();
        Self { basis: q }
    }

    /// The plane `{Ax + Bp = 0}`, for `A, B` of size `n × n` with `[A B]` of
    /// full rank and `ABᵀ` symmetric. No normalisation of `(A, B)` is needed.
    pub fn from_equation(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = linalg::require_square(a)?;
        if b.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.nrows(),
            });
        }
        let ab = a * b.transpose();
        let scale = max_abs(a).max(max_abs(b)).max(1.0);
        if linalg::asymmetry(&ab) > tol * scale * scale {
            let rows = linalg::hstack(&[a, b]);
            return Err(Error::NotLagrangian {
                max_omega: max_abs(&(&rows * j_matrix(n) * rows.transpose())),
            });
        }
        let rows = linalg::hstack(&[a, b]);
        let sigma = linalg::min_singular_value(&rows);
        if !(sigma > 1e-10 * scale) {
            return Err(Error::RankDeficient { sigma_min: sigma });
        }
        // Kernel of [A B]: eigenvectors of its Gram matrix for the n zero eigenvalues.
        let (_, vectors) = linalg::sym_eigen(&(rows.transpose() * &rows));
        Self::new(&vectors.columns(0, n).into_owned(), tol.max(TOL_LAGRANGIAN))
    }

    pub fn n(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthonormal column basis.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn projector(&self) -> DMatrix<f64> {
        linalg::projector(&self.basis)
    }

    /// Distance from `z` to the plane.
    pub fn distance(&self, z: &DVector<f64>) -> f64 {
        (z - &self.basis * (self.basis.transpose() * z)).norm()
    }

    /// `‖P₁ − P₂‖_max` on the orthogonal projectors.
    pub fn subspace_distance(&self, other: &LagrangianPlane) -> Result<f64> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(max_abs_diff(&self.projector(), &other.projector()))
    }

    pub fn same_subspace(&self, other: &LagrangianPlane, tol: f64) -> bool {
        self.subspace_distance(other).is_ok_and(|d| d <= tol)
    }

    pub fn max_omega(&self) -> f64 {
        max_abs(&omega_gram(&self.basis))
    }

    /// The image `Sℓ`, re-orthonormalised.
    pub fn image(&self, s: &SymplecticMap) -> Result<Self> {
        if s.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: s.n(),
            });
        }
        let (q, _) = linalg::orthonormalize_columns(&(s.matrix() * &self.basis))?;
        Ok(Self { basis: q })
    }
}

/// The graph `{(x, Ax)}` of a symmetric matrix.
pub fn graph_lagrangian(a: &DMatrix<f64>) -> Result<LagrangianPlane> {
    linalg::require_symmetric(a, 1e-12)?;
    let n = a.nrows();
    let mut b = DMatrix::zeros(2 * n, n);
    b.view_mut((0, 0), (n, n)).fill_with_identity();
    b.view_mut((n, 0), (n, n)).copy_from(&linalg::symmetrize(a));
    let (q, _) = linalg::orthonormalize_columns(&b)?;
    Ok(LagrangianPlane { basis: q })
}

/// A pair of transversal Lagrangian planes `(ℓ, ℓ′)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame {
    pub ell: LagrangianPlane,
    pub ell_prime: LagrangianPlane,
}

/// Smallest singular value of `[Q | Q′]`.
pub fn transversality(ell: &LagrangianPlane, ell_prime: &LagrangianPlane) -> f64 {
    linalg::min_singular_value(&linalg::hstack(&[ell.basis(), ell_prime.basis()]))
}

pub fn is_frame(ell: &LagrangianPlane, ell_prime: &LagrangianPlane) -> bool {
    ell.n() == ell_prime.n() && transversality(ell, ell_prime) >= TOL_TRANSVERSAL
}

impl LagrangianFrame {
    pub fn new(ell: LagrangianPlane, ell_prime: LagrangianPlane) -> Result<Self> {
        if ell.n() != ell_prime.n() {
            return Err(Error::DimensionMismatch {
                expected: ell.n(),
                found: ell_prime.n(),
            });
        }
        let sigma_min = transversality(&ell, &ell_prime);
        if sigma_min < TOL_TRANSVERSAL {
            return Err(Error::NotTransversal { sigma_min });
        }
        Ok(Self { ell, ell_prime })
    }

    pub fn n(&self) -> usize {
        self.ell.n()
    }

    /// `K = QᵀJQ′`, with `K_{ji} = ω(q′ᵢ, qⱼ)`; invertible for a frame.
    pub fn pairing(&self) -> DMatrix<f64> {
        self.ell.basis().transpose() * j_matrix(self.n()) * self.ell_prime.basis()
    }

    /// The symplectic map `[Q | Q′K⁻¹]` taking `(ℓ_X, ℓ_P)` onto this frame.
    ///
    /// Its columns form a symplectic basis with `eᵢ ∈ ℓ`, `fᵢ ∈ ℓ′` and
    /// `ω(fᵢ, eⱼ) = δᵢⱼ`.
    pub fn from_canonical(&self) -> Result<SymplecticMap> {
        let k_inv = linalg::inverse(&self.pairing())?;
        let f = self.ell_prime.basis() * k_inv;
        let m = linalg::hstack(&[self.ell.basis(), &f]);
        // Symplectic by construction; the check guards against loss of precision.
        SymplecticMap::new(m, 1e-8)
    }

    /// `(Sℓ, Sℓ′)`.
    pub fn image(&self, s: &SymplecticMap) -> Result<Self> {
        Self::new(self.ell.image(s)?, self.ell_prime.image(s)?)
    }

    /// Largest projector deviation of the two planes from `other`'s.
    pub fn subspace_distance(&self, other: &LagrangianFrame) -> Result<f64> {
        Ok(self
            .ell
            .subspace_distance(&other.ell)?
            .max(self.ell_prime.subspace_distance(&other.ell_prime)?))
    }
}

/// `(ℓ_X, ℓ_P)`.
pub fn canonical_frame(n: usize) -> Result<LagrangianFrame> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    Ok(LagrangianFrame {
        ell: LagrangianPlane::x_plane(n),
        ell_prime: LagrangianPlane::p_plane(n),
    })
}

/// `[B | −JB]` for an orthonormal Lagrangian basis `B`: orthogonal and
/// symplectic, and maps `ℓ_X` onto `span B`.
fn unitary_frame(b: &DMatrix<f64>) -> DMatrix<f64> {
    let jb = j_matrix(b.ncols()) * b;
    linalg::hstack(&[b, &(-jb)])
}

/// A symplectic rotation `U` with `Uℓ₁ = ℓ₂`.
///
/// Orthonormal bases `B₁, B₂` are extended to orthonormal symplectic bases
/// `B ∪ (−JB)`; `U` maps one onto the other.
pub fn rotation_between(l1: &LagrangianPlane, l2: &LagrangianPlane) -> Result<SymplecticRotation> {
    if l1.n() != l2.n() {
        return Err(Error::DimensionMismatch {
            expected: l1.n(),
            found: l2.n(),
        });
    }
    for l in [l1, l2] {
        let max_omega = l.max_omega();
        if max_omega > TOL_LAGRANGIAN {
            return Err(Error::NotLagrangian { max_omega });
        }
    }
    let m1 = unitary_frame(l1.basis());
    let m2 = unitary_frame(l2.basis());
    Ok(SymplecticRotation::unchecked(m2 * m1.transpose()))
}

/// A symplectic `S` with `(Sℓ₁, Sℓ₁′) = (ℓ₂, ℓ₂′)`.
pub fn frame_mapping(f1: &LagrangianFrame, f2: &LagrangianFrame) -> Result<SymplecticMap> {
    if f1.n() != f2.n() {
        return Err(Error::DimensionMismatch {
            expected: f1.n(),
            found: f2.n(),
        });
    }
    let m1 = f1.from_canonical()?;
    let m2 = f2.from_canonical()?;
    m2.compose(&m1.inverse())
}

/// A Lagrangian plane containing `z₀ ≠ 0`: the span of the `e`-half of a
/// symplectic basis whose first vector is `z₀/|z₀|`.
pub fn plane_through(z0: &PhaseVector) -> Result<LagrangianPlane> {
    let basis = symplectic_basis_extension(z0)?;
    let (q, _) = linalg::orthonormalize_columns(&basis.e)?;
    Ok(LagrangianPlane { basis: q })
}
