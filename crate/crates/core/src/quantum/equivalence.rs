use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::state::{apply_symplectic, standard_form, state_to_blob, LagrangianQuantumState};
use crate::linalg::{self, block, block_diag};
use crate::symplectic::{j_matrix, AffineSymplecticMap, SymplecticMap, SymplecticRotation};
use crate::{Error, Result};

/// Set deviation below which `U·s₂` counts as equal to `s₁`.
pub const TOL_EQUIVALENCE: f64 = 1e-8;
/// Attempts of the randomized witness search for degenerate spectra.
pub const WITNESS_TRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
    /// Equal `G` spectra, degenerate alignment, and no witness found.
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equivalence {
    pub verdict: Verdict,
    /// A symplectic rotation `U` with `s₁ = U·s₂`, when one was found.
    pub witness: Option<SymplecticRotation>,
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        self.verdict == Verdict::Equivalent
    }
}

/// Weights of the fixed combination `N_XX + a N_PP + b sym(N_XP)` whose
/// eigenvectors are aligned in the deterministic pass.
const COMBINATION: (f64, f64) = (0.754_877_666_246_692_7, 0.569_840_290_998_053_3);

fn combination(n_mat: &DMatrix<f64>, n: usize, weights: (f64, f64)) -> DMatrix<f64> {
    let xx = block(n_mat, 0, 0, n, n);
    let xp = block(n_mat, 0, n, n, n);
    let pp = block(n_mat, n, n, n, n);
    linalg::symmetrize(&(xx + pp * weights.0 + (&xp + xp.transpose()) * (0.5 * weights.1)))
}

/// Index ranges of (numerically) equal eigenvalues in an ascending list.
fn clusters(values: &DVector<f64>, tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            out.push((start, i - start));
            start = i;
        }
    }
    out
}

fn spectra_match(a: &DVector<f64>, b: &DVector<f64>, tol: f64) -> bool {
    let scale = 1.0 + a.amax().max(b.amax());
    linalg::vec_max_abs_diff(a, b) <= tol * scale
}

struct Search<'a> {
    s1: &'a LagrangianQuantumState,
    s2: &'a LagrangianQuantumState,
    sf1: DMatrix<f64>,
    sf2_inv: DMatrix<f64>,
}

impl Search<'_> {
    /// `U = S₁ K₀ diag(H, H) S₂⁻¹`, accepted if it is a symplectic rotation
    /// and carries `s₂` onto `s₁`.
    fn try_candidate(&self, k0: &DMatrix<f64>, h: &DMatrix<f64>) -> Option<SymplecticRotation> {
        let u = &self.sf1 * k0 * block_diag(h, h) * &self.sf2_inv;
        self.verify(u)
    }

    fn verify(&self, u: DMatrix<f64>) -> Option<SymplecticRotation> {
        let rot = SymplecticRotation::new(u, 1e-7).ok()?;
        let moved = apply_symplectic(self.s2, &AffineSymplecticMap::linear(rot.as_map().clone())).ok()?;
        (moved.set_deviation(self.s1).ok()? <= TOL_EQUIVALENCE).then_some(rot)
    }
}

/// Decides whether `s₁ = U·s₂` for a symplectic rotation `U`.
///
/// With standard forms `sᵢ = Sᵢ(B_X × B_P)` any such `U` has the form
/// `S₁ K S₂⁻¹` where `K` preserves `B_X × B_P` (so `K = diag(H, H)` or
/// `J·diag(H, H)` with `H` orthogonal), and `U` is orthogonal exactly when
/// `K N₂ Kᵀ = N₁` for `Nᵢ = SᵢᵀSᵢ`. Equal `G` spectra are checked first;
/// `H` is then recovered by aligning eigenvectors of a fixed combination of
/// the blocks of `N`. When that combination has repeated eigenvalues a seeded
/// randomized search is run instead.
pub fn equivalent_states(
    s1: &LagrangianQuantumState,
    s2: &LagrangianQuantumState,
    seed: u64,
) -> Result<Equivalence> {
    if s1.n() != s2.n() {
        return Err(Error::DimensionMismatch {
            expected: s1.n(),
            found: s2.n(),
        });
    }
    if !s1.is_centered() || !s2.is_centered() {
        return Err(Error::OffCenter);
    }
    let n = s1.n();
    let not_equivalent = Equivalence {
        verdict: Verdict::NotEquivalent,
        witness: None,
    };

    let (g1, _) = linalg::sym_eigen(state_to_blob(s1)?.g());
    let (g2, _) = linalg::sym_eigen(state_to_blob(s2)?.g());
    if !spectra_match(&g1, &g2, TOL_EQUIVALENCE) {
        return Ok(not_equivalent);
    }

    let sf1 = standard_form(s1)?.s;
    let sf2 = standard_form(s2)?.s;
    let search = Search {
        s1,
        s2,
        sf1: sf1.matrix().clone(),
        sf2_inv: sf2.inverse().into_matrix(),
    };
    let found = |witness| {
        Ok(Equivalence {
            verdict: Verdict::Equivalent,
            witness: Some(witness),
        })
    };
    if let Some(w) = search.verify(DMatrix::identity(2 * n, 2 * n)) {
        return found(w);
    }

    let n1 = sf1.matrix().transpose() * sf1.matrix();
    let n2 = sf2.matrix().transpose() * sf2.matrix();
    let j = j_matrix(n);
    let branches = [DMatrix::identity(2 * n, 2 * n), j];
    let scale = 1.0 + linalg::max_abs(&n1).max(linalg::max_abs(&n2));
    let cluster_tol = 1e-7 * scale;

    let mut degenerate = false;
    for k0 in &branches {
        let target = k0.transpose() * &n1 * k0;
        let (l1, v1) = linalg::sym_eigen(&combination(&target, n, COMBINATION));
        let (l2, v2) = linalg::sym_eigen(&combination(&n2, n, COMBINATION));
        if !spectra_match(&l1, &l2, 1e-7) {
            continue;
        }
        if clusters(&l1, cluster_tol).len() < n {
            degenerate = true;
            continue;
        }
        for signs in 0..(1usize << n) {
            let d = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| if signs >> i & 1 == 1 { -1.0 } else { 1.0 }));
            let h = &v1 * d * v2.transpose();
            if let Some(w) = search.try_candidate(k0, &h) {
                return found(w);
            }
        }
    }
    if !degenerate {
        return Ok(not_equivalent);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..WITNESS_TRIES {
        let weights = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        for k0 in &branches {
            let target = k0.transpose() * &n1 * k0;
            let (l1, v1) = linalg::sym_eigen(&combination(&target, n, weights));
            let (l2, v2) = linalg::sym_eigen(&combination(&n2, n, weights));
            if !spectra_match(&l1, &l2, 1e-7) {
                continue;
            }
            // A random orthogonal mixing inside every eigenspace.
            let mut mix = DMatrix::zeros(n, n);
            for (start, len) in clusters(&l1, cluster_tol) {
                mix.view_mut((start, start), (len, len)).copy_from(&random_orthogonal(len, &mut rng));
            }
            let h = &v1 * mix * v2.transpose();
            if let Some(w) = search.try_candidate(k0, &h) {
                return found(w);
            }
        }
    }
    Ok(Equivalence {
        verdict: Verdict::Undecided,
        witness: None,
    })
}

fn random_orthogonal(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    loop {
        let m = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
        if let Ok((mut q, _)) = linalg::orthonormalize_columns(&m) {
            if rng.random_bool(0.5) {
                let flipped = -q.column(0);
                q.set_column(0, &flipped);
            }
            return q;
        }
    }
}

/// `U·s` for a symplectic rotation.
pub fn rotate_state(state: &LagrangianQuantumState, u: &SymplecticRotation) -> Result<LagrangianQuantumState> {
    apply_symplectic(state, &AffineSymplecticMap::linear(u.as_map().clone()))
}

/// The image of the fiducial state under `S`.
pub fn state_from_map(s: &SymplecticMap, hbar: f64) -> Result<LagrangianQuantumState> {
    let fid = super::state::fiducial_state(s.n(), hbar)?;
    apply_symplectic(&fid, &AffineSymplecticMap::linear(s.clone()))
}
