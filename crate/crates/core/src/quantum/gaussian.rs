use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::convex::Ellipsoid;
use crate::linalg::{self, block, from_blocks};
use crate::symplectic::{is_symplectic, j_matrix, AffineSymplecticMap, PhaseVector, SymplecticMap};
use crate::{Error, Result};

/// Symmetry tolerance for `A` and `B`.
pub const TOL_WIDTH_SYMMETRY: f64 = 1e-12;
/// Tolerance of the blob checks `‖GᵀJG − J‖` and `|det G − 1|`.
pub const TOL_BLOB: f64 = 1e-9;

fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
    }
    Ok(())
}

/// `T̂(z₀)ψ_{AB}` with `ψ_{AB}(x) = (πℏ)^{−n/4}(det A)^{1/4} e^{−(A+iB)x·x/2ℏ}`.
///
/// The global phase is not tracked.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianWavepacket {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    z0: PhaseVector,
    hbar: f64,
}

impl GaussianWavepacket {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, z0: PhaseVector, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        let n = linalg::require_square(&a)?;
        if b.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.nrows(),
            });
        }
        if z0.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: z0.n(),
            });
        }
        linalg::require_spd(&a, TOL_WIDTH_SYMMETRY)?;
        linalg::require_symmetric(&b, TOL_WIDTH_SYMMETRY)?;
        Ok(Self {
            a: linalg::symmetrize(&a),
            b: linalg::symmetrize(&b),
            z0,
            hbar,
        })
    }

    pub fn centered(a: DMatrix<f64>, b: DMatrix<f64>, hbar: f64) -> Result<Self> {
        let n = a.nrows();
        Self::new(a, b, PhaseVector::zeros(n), hbar)
    }

    /// The fiducial coherent state `φ₀`: `A = I`, `B = 0`.
    pub fn fiducial(n: usize, hbar: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        Self::centered(DMatrix::identity(n, n), DMatrix::zeros(n, n), hbar)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn z0(&self) -> &PhaseVector {
        &self.z0
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Always 0: the phase is not recoverable from the blob.
    pub fn phase(&self) -> f64 {
        0.0
    }

    /// `S_{AB} = [[A^{−1/2}, 0], [−BA^{−1/2}, A^{1/2}]]`.
    pub fn s_ab(&self) -> SymplecticMap {
        let inv_sqrt = linalg::sym_inv_sqrt(&self.a);
        let sqrt = linalg::sym_sqrt(&self.a);
        let n = self.n();
        let m = from_blocks(&inv_sqrt, &DMatrix::zeros(n, n), &(-(&self.b * &inv_sqrt)), &sqrt);
        SymplecticMap::unchecked(m)
    }

    /// `G = (S_{AB}S_{AB}ᵀ)⁻¹`, formed as `S⁻ᵀS⁻¹` with the exact symplectic inverse.
    pub fn g_matrix(&self) -> DMatrix<f64> {
        let s_inv = self.s_ab().inverse().into_matrix();
        linalg::symmetrize(&(s_inv.transpose() * &s_inv))
    }

    pub fn wigner_function(&self) -> WignerGaussian {
        WignerGaussian {
            g: self.g_matrix(),
            z0: self.z0.clone(),
            hbar: self.hbar,
        }
    }

    /// `ψ(x)` including the displacement phase `e^{i(p₀·x − p₀·x₀/2)/ℏ}`.
    pub fn psi(&self, x: &DVector<f64>) -> Result<Complex64> {
        let n = self.n();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        let (x0, p0) = (self.z0.x(), self.z0.p());
        let y = x - &x0;
        let h = self.hbar;
        let norm = (PI * h).powf(-(n as f64) / 4.0) * self.a.determinant().powf(0.25);
        let quad_re = y.dot(&(&self.a * &y));
        let quad_im = y.dot(&(&self.b * &y));
        let phase = (p0.dot(x) - 0.5 * p0.dot(&x0)) / h - quad_im / (2.0 * h);
        Ok(Complex64::from_polar(norm * (-quad_re / (2.0 * h)).exp(), phase))
    }
}

/// `{z : G(z − z₀)·(z − z₀) ≤ ℏ}` with `G` symmetric, positive definite and
/// symplectic: the image of `B^{2n}(z₀, √ℏ)` under a symplectic map.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumBlob {
    g: DMatrix<f64>,
    z0: PhaseVector,
    hbar: f64,
}

impl QuantumBlob {
    pub fn new(g: DMatrix<f64>, z0: PhaseVector, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        let d = linalg::require_square(&g)?;
        if d != 2 * z0.n() {
            return Err(Error::DimensionMismatch {
                expected: 2 * z0.n(),
                found: d,
            });
        }
        linalg::require_spd(&g, TOL_BLOB)?;
        let check = is_symplectic(&g, TOL_BLOB)?;
        if !check.is_symplectic {
            return Err(Error::NotABlob(format!(
                "G is not symplectic (residual {:e})",
                check.residual
            )));
        }
        let det = g.determinant();
        if (det - 1.0).abs() > TOL_BLOB {
            return Err(Error::NotABlob(format!("det G = {det}")));
        }
        Ok(Self {
            g: linalg::symmetrize(&g),
            z0,
            hbar,
        })
    }

    /// `S(B^{2n}(z₀, √ℏ))`.
    pub fn from_symplectic(s: &SymplecticMap, z0: PhaseVector, hbar: f64) -> Result<Self> {
        let s_inv = s.inverse().into_matrix();
        Self::new(linalg::symmetrize(&(s_inv.transpose() * &s_inv)), z0, hbar)
    }

    pub fn n(&self) -> usize {
        self.z0.n()
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn z0(&self) -> &PhaseVector {
        &self.z0
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn ellipsoid(&self) -> Ellipsoid {
        Ellipsoid::new(self.z0.as_vector().clone(), self.g.clone(), self.hbar).expect("blob invariants")
    }

    /// `(G_XX, G_XP, G_PX, G_PP)`.
    pub fn blocks(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let n = self.n();
        (
            block(&self.g, 0, 0, n, n),
            block(&self.g, 0, n, n, n),
            block(&self.g, n, 0, n, n),
            block(&self.g, n, n, n, n),
        )
    }

    /// `G_XX · (G_PP − G_PX G_XX⁻¹ G_XP)`, the identity for every blob: the
    /// polar dual of the section `Q ∩ ℓ_X` is the projection of `Q` onto `ℓ_P`.
    pub fn section_projection_product(&self) -> Result<DMatrix<f64>> {
        let (xx, xp, px, pp) = self.blocks();
        let xx_inv = linalg::spd_inverse(&xx)?;
        Ok(&xx * (pp - px * xx_inv * xp))
    }
}

/// `Wψ(z) = (πℏ)^{−n} e^{−G(z − z₀)·(z − z₀)/ℏ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGaussian {
    pub g: DMatrix<f64>,
    pub z0: PhaseVector,
    pub hbar: f64,
}

impl WignerGaussian {
    pub fn normalization(&self) -> f64 {
        (PI * self.hbar).powi(-(self.z0.n() as i32))
    }

    pub fn eval(&self, z: &PhaseVector) -> Result<f64> {
        if z.n() != self.z0.n() {
            return Err(Error::DimensionMismatch {
                expected: self.z0.n(),
                found: z.n(),
            });
        }
        let d = z.as_vector() - self.z0.as_vector();
        Ok(self.normalization() * (-d.dot(&(&self.g * &d)) / self.hbar).exp())
    }
}

pub fn gaussian_to_blob(psi: &GaussianWavepacket) -> Result<QuantumBlob> {
    QuantumBlob::new(psi.g_matrix(), psi.z0.clone(), psi.hbar)
}

/// Inverts `G(A, B) = [[A + BA⁻¹B, BA⁻¹], [A⁻¹B, A⁻¹]]`: `A = G_PP⁻¹`,
/// `B = G_XP A`.
pub fn blob_to_gaussian(q: &QuantumBlob) -> Result<GaussianWavepacket> {
    let (_, xp, _, pp) = q.blocks();
    let a = linalg::symmetrize(&linalg::spd_inverse(&pp)?);
    let b = linalg::symmetrize(&(xp * &a));
    GaussianWavepacket::new(a, b, q.z0.clone(), q.hbar)
}

pub fn wigner(psi: &GaussianWavepacket, z: &PhaseVector) -> Result<f64> {
    psi.wigner_function().eval(z)
}

/// Generators of the inhomogeneous metaplectic group.
#[derive(Debug, Clone, PartialEq)]
pub enum Metaplectic {
    /// `Ĵψ(x) = (2πiℏ)^{−n/2} ∫ e^{−ix·x′/ℏ} ψ(x′) dx′`.
    J,
    /// `V̂_Pψ(x) = e^{−iPx·x/2ℏ} ψ(x)`.
    Shear(DMatrix<f64>),
    /// `M̂_Lψ(x) = √|det L| ψ(Lx)`.
    Dilation(DMatrix<f64>),
    /// The Heisenberg–Weyl operator `T̂(z₁)`.
    Displace(PhaseVector),
}

impl Metaplectic {
    /// The projection onto the inhomogeneous symplectic group.
    pub fn projection(&self, n: usize) -> Result<AffineSymplecticMap> {
        let check = |k: usize| {
            if k != n {
                Err(Error::DimensionMismatch { expected: n, found: k })
            } else {
                Ok(())
            }
        };
        match self {
            Metaplectic::J => Ok(AffineSymplecticMap::linear(SymplecticMap::unchecked(j_matrix(n)))),
            Metaplectic::Shear(p) => {
                check(p.nrows())?;
                Ok(AffineSymplecticMap::linear(SymplecticMap::shear(p)?))
            }
            Metaplectic::Dilation(l) => {
                check(l.nrows())?;
                Ok(AffineSymplecticMap::linear(SymplecticMap::dilation(l)?))
            }
            Metaplectic::Displace(z1) => {
                check(z1.n())?;
                Ok(AffineSymplecticMap::translation(z1.clone()))
            }
        }
    }
}

/// `Ŝψ` in closed form. With `Z = A + iB`: `V̂_P` sends `Z ↦ Z + iP`, `M̂_L`
/// sends `Z ↦ LᵀZL`, `Ĵ` sends `Z ↦ Z⁻¹`; the center moves to `Sz₀ + z₁`.
pub fn metaplectic_apply(generator: &Metaplectic, psi: &GaussianWavepacket) -> Result<GaussianWavepacket> {
    let n = psi.n();
    let t = generator.projection(n)?;
    let z0 = t.apply(&psi.z0)?;
    let (a, b) = match generator {
        Metaplectic::J => {
            // (A + iB)⁻¹ = C⁻¹ − iA⁻¹BC⁻¹ with C = A + BA⁻¹B.
            let a_inv = linalg::spd_inverse(&psi.a)?;
            let c_inv = linalg::spd_inverse(&linalg::symmetrize(&(&psi.a + &psi.b * &a_inv * &psi.b)))?;
            let b_new = -(&a_inv * &psi.b * &c_inv);
            (c_inv, b_new)
        }
        Metaplectic::Shear(p) => (psi.a.clone(), &psi.b + p),
        Metaplectic::Dilation(l) => (l.transpose() * &psi.a * l, l.transpose() * &psi.b * l),
        Metaplectic::Displace(_) => (psi.a.clone(), psi.b.clone()),
    };
    GaussianWavepacket::new(linalg::symmetrize(&a), linalg::symmetrize(&b), z0, psi.hbar)
}
