use nalgebra::{DMatrix, DVector};

use crate::linalg::{self, max_abs_diff, vec_max_abs_diff};
use crate::{Error, Result};

/// Symmetry tolerance for shape matrices.
pub const TOL_SHAPE_SYMMETRY: f64 = 1e-12;

/// `{u : M(u − c)·(u − c) ≤ ℏ}` with `M` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    center: DVector<f64>,
    shape: DMatrix<f64>,
    hbar: f64,
}

fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
    }
    Ok(())
}

impl Ellipsoid {
    pub fn new(center: DVector<f64>, shape: DMatrix<f64>, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        let d = linalg::require_square(&shape)?;
        if center.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: center.len(),
            });
        }
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        linalg::require_spd(&shape, TOL_SHAPE_SYMMETRY)?;
        Ok(Self {
            center,
            shape: linalg::symmetrize(&shape),
            hbar,
        })
    }

    pub fn centered(shape: DMatrix<f64>, hbar: f64) -> Result<Self> {
        let d = shape.nrows();
        Self::new(DVector::zeros(d), shape, hbar)
    }

    /// The Euclidean ball of radius `r` about `center`, stored with the given `ℏ`.
    pub fn ball(center: DVector<f64>, radius: f64, hbar: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        check_hbar(hbar)?;
        let d = center.len();
        Self::new(center, DMatrix::identity(d, d) * (hbar / (radius * radius)), hbar)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `M/ℏ`: the body is `{Q(u − c)·(u − c) ≤ 1}`.
    pub fn normalized_shape(&self) -> DMatrix<f64> {
        &self.shape / self.hbar
    }

    /// `ℏ M⁻¹`, the matrix `E` with body `{c + E^{1/2} w : |w| ≤ 1}` squared.
    pub fn dispersion(&self) -> DMatrix<f64> {
        linalg::spd_inverse(&self.shape).expect("shape is positive definite") * self.hbar
    }

    /// Same set, re-expressed with another `ℏ`.
    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        Ok(Self {
            center: self.center.clone(),
            shape: &self.shape * (hbar / self.hbar),
            hbar,
        })
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// `h(u) = u·c + √(ℏ u·M⁻¹u)`.
    pub fn support(&self, u: &DVector<f64>) -> Result<f64> {
        self.check_dim(u)?;
        if u.norm() == 0.0 {
            return Err(Error::ZeroVector);
        }
        let q = u.dot(&(self.dispersion() * u));
        Ok(u.dot(&self.center) + q.max(0.0).sqrt())
    }

    /// The boundary point where `u` is an outer normal.
    pub fn support_point(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(u)?;
        if u.norm() == 0.0 {
            return Err(Error::ZeroVector);
        }
        let eu = self.dispersion() * u;
        let q = u.dot(&eu).max(f64::MIN_POSITIVE);
        Ok(&self.center + eu / q.sqrt())
    }

    /// `√(M(x − c)·(x − c)/ℏ)`, the gauge about the center.
    pub fn gauge(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        let y = x - &self.center;
        Ok((y.dot(&(&self.shape * &y)) / self.hbar).max(0.0).sqrt())
    }

    /// `M(x − c)·(x − c) ≤ ℏ + tol`.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let y = x - &self.center;
        y.dot(&(&self.shape * &y)) <= self.hbar + tol
    }

    /// `κ_d ℏ^{d/2} / √det M`.
    pub fn volume(&self) -> f64 {
        let d = self.dim();
        linalg::unit_ball_volume(d) * self.hbar.powf(d as f64 / 2.0) / self.shape.determinant().sqrt()
    }

    /// `A(X)`: shape `A⁻ᵀMA⁻¹`, center `Ac`.
    pub fn linear_image(&self, a: &DMatrix<f64>) -> Result<Self> {
        if a.shape() != (self.dim(), self.dim()) {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.nrows(),
            });
        }
        let a_inv = linalg::inverse(a)?;
        let shape = linalg::symmetrize(&(a_inv.transpose() * &self.shape * &a_inv));
        Ok(Self {
            center: a * &self.center,
            shape,
            hbar: self.hbar,
        })
    }

    pub fn translate(&self, v: &DVector<f64>) -> Result<Self> {
        self.check_dim(v)?;
        Ok(Self {
            center: &self.center + v,
            shape: self.shape.clone(),
            hbar: self.hbar,
        })
    }

    pub fn recentered(&self, center: DVector<f64>) -> Result<Self> {
        self.check_dim(&center)?;
        Ok(Self {
            center,
            shape: self.shape.clone(),
            hbar: self.hbar,
        })
    }

    /// `c + (ℏM⁻¹)^{1/2} w` for a unit vector `w`.
    pub fn boundary_point(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(w)?;
        let n = w.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(&self.center + linalg::sym_sqrt(&self.dispersion()) * (w / n))
    }

    /// Deviation between two ellipsoids as sets: the larger of the max-norm
    /// differences of `M/ℏ` and of the centers.
    pub fn deviation(&self, other: &Ellipsoid) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(max_abs_diff(&self.normalized_shape(), &other.normalized_shape())
            .max(vec_max_abs_diff(&self.center, &other.center)))
    }
}
