//! Symplectic linear algebra on `ℝ²ⁿ = ℝⁿ_x × ℝⁿ_p`.
//!
//! Phase-space vectors are stored as `z = (x, p)`. The symplectic form is
//! `ω(z, z′) = p·x′ − p′·x`, which equals `z′ᵀ J z` for the standard matrix
//! `J = [[0, I], [−I, 0]]`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, block, from_blocks, max_abs_diff};
use crate::{Error, Result, TOL_SYM};

/// A point `z = (x, p)` of phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    z: DVector<f64>,
}

impl PhaseVector {
    pub fn new(x: &DVector<f64>, p: &DVector<f64>) -> Result<Self> {
        if x.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: p.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::InvalidParameter("phase space needs n >= 1".into()));
        }
        let n = x.len();
        let mut z = DVector::zeros(2 * n);
        z.rows_mut(0, n).copy_from(x);
        z.rows_mut(n, n).copy_from(p);
        Ok(Self { z })
    }

    /// Wraps a stacked vector `(x₁..xₙ, p₁..pₙ)`.
    pub fn from_vector(z: DVector<f64>) -> Result<Self> {
        if z.is_empty() || z.len() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "phase vector needs even positive length, got {}",
                z.len()
            )));
        }
        Ok(Self { z })
    }

    pub fn from_slice(z: &[f64]) -> Result<Self> {
        Self::from_vector(DVector::from_column_slice(z))
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            z: DVector::zeros(2 * n),
        }
    }

    pub fn n(&self) -> usize {
        self.z.len() / 2
    }

    pub fn x(&self) -> DVector<f64> {
        self.z.rows(0, self.n()).into_owned()
    }

    pub fn p(&self) -> DVector<f64> {
        self.z.rows(self.n(), self.n()).into_owned()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.z
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.z
    }

    pub fn norm(&self) -> f64 {
        self.z.norm()
    }
}

/// `ω(z, z′) = p·x′ − p′·x`.
pub fn symplectic_form(z: &PhaseVector, z_prime: &PhaseVector) -> Result<f64> {
    if z.n() != z_prime.n() {
        return Err(Error::DimensionMismatch {
            expected: z.n(),
            found: z_prime.n(),
        });
    }
    Ok(z.p().dot(&z_prime.x()) - z_prime.p().dot(&z.x()))
}

/// `ω` on raw stacked vectors of equal even length.
pub(crate) fn omega(z: &DVector<f64>, w: &DVector<f64>) -> f64 {
    let n = z.len() / 2;
    let mut acc = 0.0;
    for i in 0..n {
        acc += z[n + i] * w[i] - w[n + i] * z[i];
    }
    acc
}

/// The matrix `J = [[0, I], [−I, 0]]` of size `2n`.
pub fn j_matrix(n: usize) -> DMatrix<f64> {
    let id = DMatrix::identity(n, n);
    from_blocks(&DMatrix::zeros(n, n), &id, &(-&id), &DMatrix::zeros(n, n))
}

/// `J` as a certified symplectic map.
pub fn standard_symplectic_matrix(n: usize) -> Result<SymplecticMap> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    Ok(SymplecticMap::unchecked(j_matrix(n)))
}

/// Which of the equivalent block characterisations fail.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    /// Residual of "AᵀC, BᵀD symmetric and AᵀD − CᵀB = I".
    pub cond1: f64,
    /// Residual of "ABᵀ, CDᵀ symmetric and ADᵀ − BCᵀ = I".
    pub cond2: f64,
    pub failing: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticCheck {
    pub is_symplectic: bool,
    /// `‖SᵀJS − J‖_max`.
    pub residual: f64,
    pub blocks: BlockReport,
}

fn split_blocks(m: &DMatrix<f64>) -> [DMatrix<f64>; 4] {
    let n = m.nrows() / 2;
    [
        block(m, 0, 0, n, n),
        block(m, 0, n, n, n),
        block(m, n, 0, n, n),
        block(m, n, n, n, n),
    ]
}

fn even_square(m: &DMatrix<f64>) -> Result<usize> {
    let (rows, cols) = m.shape();
    if rows != cols || rows == 0 || rows % 2 != 0 {
        return Err(Error::NotEvenSquare { rows, cols });
    }
    Ok(rows / 2)
}

/// Residual of `SᵀJS = J` together with the block-condition report.
pub fn is_symplectic(m: &DMatrix<f64>, tol: f64) -> Result<SymplecticCheck> {
    let n = even_square(m)?;
    let j = j_matrix(n);
    let residual = max_abs_diff(&(m.transpose() * &j * m), &j);

    let [a, b, c, d] = split_blocks(m);
    let id = DMatrix::<f64>::identity(n, n);
    let cond1 = linalg::asymmetry(&(a.transpose() * &c))
        .max(linalg::asymmetry(&(b.transpose() * &d)))
        .max(max_abs_diff(&(a.transpose() * &d - c.transpose() * &b), &id));
    let cond2 = linalg::asymmetry(&(&a * b.transpose()))
        .max(linalg::asymmetry(&(&c * d.transpose())))
        .max(max_abs_diff(&(&a * d.transpose() - &b * c.transpose()), &id));

    let mut failing = Vec::new();
    if cond1 > tol {
        failing.push("cond1");
    }
    if cond2 > tol {
        failing.push("cond2");
    }
    Ok(SymplecticCheck {
        is_symplectic: residual <= tol,
        residual,
        blocks: BlockReport {
            cond1,
            cond2,
            failing,
        },
    })
}

/// A `2n × 2n` matrix certified to satisfy `SᵀJS = J` within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    m: DMatrix<f64>,
}

impl SymplecticMap {
    pub fn new(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        let check = is_symplectic(&m, tol)?;
        if !check.is_symplectic {
            return Err(Error::NotSymplectic {
                residual: check.residual,
            });
        }
        Ok(Self { m })
    }

    /// Wraps a matrix that is symplectic by construction.
    pub(crate) fn unchecked(m: DMatrix<f64>) -> Self {
        debug_assert!(m.nrows() == m.ncols() && m.nrows() % 2 == 0);
        Self { m }
    }

    pub fn identity(n: usize) -> Self {
        Self::unchecked(DMatrix::identity(2 * n, 2 * n))
    }

    /// `V_P = [[I, 0], [−P, I]]` for symmetric `P`.
    pub fn shear(p: &DMatrix<f64>) -> Result<Self> {
        linalg::require_symmetric(p, 1e-12)?;
        let n = p.nrows();
        let id = DMatrix::identity(n, n);
        Ok(Self::unchecked(from_blocks(
            &id,
            &DMatrix::zeros(n, n),
            &(-linalg::symmetrize(p)),
            &id,
        )))
    }

    /// `M_L = [[L⁻¹, 0], [0, Lᵀ]]` for invertible `L`.
    pub fn dilation(l: &DMatrix<f64>) -> Result<Self> {
        let inv = linalg::inverse(l)?;
        Ok(Self::unchecked(linalg::block_diag(&inv, &l.transpose())))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn n(&self) -> usize {
        self.m.nrows() / 2
    }

    /// The blocks `(A, B, C, D)` of `S = [[A, B], [C, D]]`.
    pub fn blocks(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let [a, b, c, d] = split_blocks(&self.m);
        (a, b, c, d)
    }

    /// `S⁻¹ = [[Dᵀ, −Bᵀ], [−Cᵀ, Aᵀ]]`.
    pub fn inverse(&self) -> Self {
        let (a, b, c, d) = self.blocks();
        Self::unchecked(from_blocks(
            &d.transpose(),
            &(-b.transpose()),
            &(-c.transpose()),
            &a.transpose(),
        ))
    }

    pub fn transpose(&self) -> Self {
        Self::unchecked(self.m.transpose())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SymplecticMap) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(Self::unchecked(&self.m * &other.m))
    }

    pub fn apply(&self, z: &PhaseVector) -> Result<PhaseVector> {
        if z.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: z.n(),
            });
        }
        PhaseVector::from_vector(&self.m * z.as_vector())
    }

    pub fn check(&self, tol: f64) -> SymplecticCheck {
        is_symplectic(&self.m, tol).expect("certified maps have even square shape")
    }
}

/// Inverts a matrix via the block formula after certifying it is symplectic.
pub fn symplectic_inverse(m: &DMatrix<f64>, tol: f64) -> Result<SymplecticMap> {
    Ok(SymplecticMap::new(m.clone(), tol)?.inverse())
}

/// A map that is both symplectic and orthogonal: an element of `U(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticRotation {
    map: SymplecticMap,
}

impl SymplecticRotation {
    /// Certifies `UᵀU = I` and `UᵀJU = J` within `tol`.
    pub fn new(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        let n2 = m.nrows();
        let orth = max_abs_diff(&(m.transpose() * &m), &DMatrix::identity(n2, n2));
        let map = SymplecticMap::new(m, tol)?;
        if orth > tol {
            return Err(Error::NotUnitary { residual: orth });
        }
        Ok(Self { map })
    }

    pub(crate) fn unchecked(m: DMatrix<f64>) -> Self {
        Self {
            map: SymplecticMap::unchecked(m),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: SymplecticMap::identity(n),
        }
    }

    pub fn as_map(&self) -> &SymplecticMap {
        &self.map
    }

    pub fn into_map(self) -> SymplecticMap {
        self.map
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.map.matrix()
    }

    pub fn inverse(&self) -> Self {
        Self {
            map: self.map.transpose(),
        }
    }
}

/// The embedding `A + iB ↦ [[A, B], [−B, A]]` of `U(n, ℂ)` into `Sp(n)`.
pub fn embed_unitary(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> Result<SymplecticRotation> {
    let n = linalg::require_square(a)?;
    if b.shape() != a.shape() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.nrows(),
        });
    }
    let id = DMatrix::<f64>::identity(n, n);
    let at_b = a.transpose() * b;
    let ab_t = a * b.transpose();
    let residual = max_abs_diff(&at_b, &at_b.transpose())
        .max(max_abs_diff(&(a.transpose() * a + b.transpose() * b), &id))
        .max(max_abs_diff(&ab_t, &ab_t.transpose()))
        .max(max_abs_diff(&(a * a.transpose() + b * b.transpose()), &id));
    if residual > tol {
        return Err(Error::NotUnitary { residual });
    }
    Ok(SymplecticRotation::unchecked(from_blocks(a, b, &(-b), a)))
}

/// Generator settings for [`random_symplectic`].
///
/// Samples are products of shears `V_P` (symmetric `P` with entries in
/// `(−1, 1)`), dilations `M_L` (`L = I + E`, `|E_ij| < perturbation`) and
/// occasional `J` factors. Samples whose condition number exceeds
/// `condition_cap` are rejected and redrawn.
#[derive(Debug, Clone)]
pub struct RandomSymplectic {
    pub min_factors: usize,
    pub max_factors: usize,
    pub perturbation: f64,
    pub j_probability: f64,
    pub condition_cap: f64,
}

impl Default for RandomSymplectic {
    fn default() -> Self {
        Self {
            min_factors: 5,
            max_factors: 10,
            perturbation: 0.3,
            j_probability: 0.3,
            condition_cap: 1e6,
        }
    }
}

impl RandomSymplectic {
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> SymplecticMap {
        loop {
            let factors = rng.random_range(self.min_factors..=self.max_factors);
            let mut s = DMatrix::identity(2 * n, 2 * n);
            for _ in 0..factors {
                let g = match rng.random_range(0..3) {
                    0 => random_shear(n, rng),
                    1 => self.random_dilation(n, rng),
                    _ if rng.random_bool(self.j_probability) => j_matrix(n),
                    _ => random_shear(n, rng).transpose(),
                };
                s = s * g;
            }
            if linalg::condition_number(&s) <= self.condition_cap {
                return SymplecticMap::unchecked(s);
            }
        }
    }

    fn random_dilation<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> DMatrix<f64> {
        loop {
            let l = DMatrix::from_fn(n, n, |i, j| {
                let e = rng.random_range(-self.perturbation..self.perturbation);
                if i == j {
                    1.0 + e
                } else {
                    e
                }
            });
            if linalg::min_singular_value(&l) > 0.2 {
                if let Ok(s) = SymplecticMap::dilation(&l) {
                    return s.into_matrix();
                }
            }
        }
    }
}

pub(crate) fn random_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    linalg::symmetrize(&m)
}

fn random_shear<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    SymplecticMap::shear(&random_symmetric(n, rng))
        .expect("symmetric by construction")
        .into_matrix()
}

/// Deterministic random symplectic matrix for a given seed.
pub fn random_symplectic(n: usize, seed: u64) -> SymplecticMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RandomSymplectic::default().sample(n, &mut rng)
}

/// A random element of `U(n)`: the orthogonal polar factor `S (SᵀS)^{-1/2}`
/// of a random symplectic `S`.
pub fn random_symplectic_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SymplecticRotation {
    let s = RandomSymplectic::default().sample(n, rng);
    let m = s.matrix();
    let u = m * linalg::sym_inv_sqrt(&(m.transpose() * m));
    SymplecticRotation::unchecked(u)
}

/// A symplectic basis `{e₁..eₙ, f₁..fₙ}` stored as column blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticBasis {
    pub e: DMatrix<f64>,
    pub f: DMatrix<f64>,
}

impl SymplecticBasis {
    /// `[e₁ … eₙ f₁ … fₙ]`, a symplectic matrix mapping the canonical basis
    /// onto this one.
    pub fn matrix(&self) -> DMatrix<f64> {
        linalg::hstack(&[&self.e, &self.f])
    }

    /// Largest deviation from `ω(eᵢ,eⱼ) = ω(fᵢ,fⱼ) = 0`, `ω(fᵢ,eⱼ) = δᵢⱼ`.
    pub fn omega_residual(&self) -> f64 {
        let n = self.e.ncols();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let ei = self.e.column(i).into_owned();
                let ej = self.e.column(j).into_owned();
                let fi = self.f.column(i).into_owned();
                let fj = self.f.column(j).into_owned();
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst
                    .max(omega(&ei, &ej).abs())
                    .max(omega(&fi, &fj).abs())
                    .max((omega(&fi, &ej) - delta).abs());
            }
        }
        worst
    }
}

const PIVOT_FLOOR: f64 = 1e-12;

/// Projects `w` onto the symplectic complement of the partial basis.
fn symplectic_complement(w: &DVector<f64>, e: &[DVector<f64>], f: &[DVector<f64>]) -> DVector<f64> {
    let mut out = w.clone();
    // Two passes to clean up rounding.
    for _ in 0..2 {
        let mut next = out.clone();
        for (ej, fj) in e.iter().zip(f) {
            next += ej * omega(&out, fj) - fj * omega(&out, ej);
        }
        out = next;
    }
    out
}

/// Completes `v / |v|` to a symplectic basis by a pivoted symplectic
/// Gram–Schmidt process.
///
/// Continuation vectors are drawn from the coordinate axes and `J eₖ`,
/// projected onto the symplectic complement of the partial basis. Each `eₖ`
/// is the projected candidate of largest norm; each `fₖ` the candidate of
/// largest `|ω(·, eₖ)|`. Candidates below `1e-12` are rejected.
pub fn symplectic_basis_extension(v: &PhaseVector) -> Result<SymplecticBasis> {
    let n = v.n();
    let norm = v.norm();
    if !(norm > PIVOT_FLOOR) {
        return Err(Error::ZeroVector);
    }
    let j = j_matrix(n);
    let axes: Vec<DVector<f64>> = (0..2 * n)
        .map(|i| {
            let mut u = DVector::zeros(2 * n);
            u[i] = 1.0;
            u
        })
        .collect();

    let mut es: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut fs: Vec<DVector<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let e = if k == 0 {
            v.as_vector() / norm
        } else {
            let best = axes
                .iter()
                .map(|c| symplectic_complement(c, &es, &fs))
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .expect("non-empty candidate set");
            let nb = best.norm();
            if nb < PIVOT_FLOOR {
                return Err(Error::Degenerate("symplectic Gram-Schmidt stalled".into()));
            }
            best / nb
        };

        let mut candidates: Vec<DVector<f64>> = axes
            .iter()
            .map(|c| symplectic_complement(c, &es, &fs))
            .collect();
        candidates.push(symplectic_complement(&(&j * &e), &es, &fs));
        let (c, w) = candidates
            .into_iter()
            .map(|c| {
                let w = omega(&c, &e);
                (c, w)
            })
            .fold(None::<(DVector<f64>, f64)>, |acc, (c, w)| match acc {
                Some((_, bw)) if bw.abs() >= w.abs() => acc,
                _ => Some((c, w)),
            })
            .expect("non-empty candidate set");
        if w.abs() < PIVOT_FLOOR {
            return Err(Error::Degenerate("no symplectic partner found".into()));
        }
        let mut f = c / w;
        // Removing the e-component keeps every ω relation intact.
        f -= &e * f.dot(&e);
        es.push(e);
        fs.push(f);
    }
    Ok(SymplecticBasis {
        e: DMatrix::from_columns(&es),
        f: DMatrix::from_columns(&fs),
    })
}

/// `z ↦ S z + shift`, an element of the inhomogeneous symplectic group.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSymplecticMap {
    pub linear: SymplecticMap,
    pub shift: PhaseVector,
}

impl AffineSymplecticMap {
    pub fn new(linear: SymplecticMap, shift: PhaseVector) -> Result<Self> {
        if linear.n() != shift.n() {
            return Err(Error::DimensionMismatch {
                expected: linear.n(),
                found: shift.n(),
            });
        }
        Ok(Self { linear, shift })
    }

    pub fn linear(linear: SymplecticMap) -> Self {
        let n = linear.n();
        Self {
            linear,
            shift: PhaseVector::zeros(n),
        }
    }

    /// The translation `T(z₀)`.
    pub fn translation(z0: PhaseVector) -> Self {
        Self {
            linear: SymplecticMap::identity(z0.n()),
            shift: z0,
        }
    }

    pub fn n(&self) -> usize {
        self.linear.n()
    }

    pub fn apply(&self, z: &PhaseVector) -> Result<PhaseVector> {
        let sz = self.linear.apply(z)?;
        PhaseVector::from_vector(sz.as_vector() + self.shift.as_vector())
    }

    /// `self ∘ other`: `z ↦ S₁(S₂z + s₂) + s₁`.
    pub fn compose(&self, other: &AffineSymplecticMap) -> Result<Self> {
        let linear = self.linear.compose(&other.linear)?;
        let shift = self.apply(&other.shift)?;
        Ok(Self { linear, shift })
    }

    pub fn inverse(&self) -> Self {
        let inv = self.linear.inverse();
        let shift = PhaseVector::from_vector(-(inv.matrix() * self.shift.as_vector()))
            .expect("same dimension");
        Self { linear: inv, shift }
    }
}

pub fn affine_apply(t: &AffineSymplecticMap, z: &PhaseVector) -> Result<PhaseVector> {
    t.apply(z)
}

pub fn affine_compose(t1: &AffineSymplecticMap, t2: &AffineSymplecticMap) -> Result<AffineSymplecticMap> {
    t1.compose(t2)
}

/// Default-tolerance membership test, convenient in assertions.
pub fn is_symplectic_default(m: &DMatrix<f64>) -> bool {
    is_symplectic(m, TOL_SYM).map(|c| c.is_symplectic).unwrap_or(false)
}
