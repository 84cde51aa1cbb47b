use nalgebra::{DMatrix, DVector};

use super::gaussian::{blob_to_gaussian, GaussianWavepacket, QuantumBlob};
use crate::convex::{ConvexBody, Ellipsoid, ProductBody};
use crate::lagrangian::{canonical_frame, LagrangianFrame, LagrangianPlane};
use crate::linalg::{self, max_abs_diff, vec_max_abs_diff};
use crate::polar::lagrangian_polar_dual;
use crate::symplectic::{AffineSymplecticMap, PhaseVector, SymplecticMap};
use crate::{Error, Result};

/// Residual allowed for `z₀ ∈ ℓ`, `z₀′ ∈ ℓ′`, relative to `max(1, |z|)`.
pub const TOL_ON_PLANE: f64 = 1e-10;
/// Tolerance for "centered" in [`LagrangianQuantumState::is_centered`].
pub const TOL_CENTERED: f64 = 1e-12;

/// `X_ℓ(z₀) × X^ℏ_{ℓ′}(z₀′)`: an ellipsoid carried by `ℓ`, translated by
/// `z₀ ∈ ℓ`, together with its Lagrangian polar dual on `ℓ′`, translated by
/// `z₀′ ∈ ℓ′`.
///
/// Bodies are stored centered, in the orthonormal bases of their planes.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianQuantumState {
    frame: LagrangianFrame,
    body: Ellipsoid,
    dual: Ellipsoid,
    z0: PhaseVector,
    z0_prime: PhaseVector,
    hbar: f64,
}

fn require_on_plane(plane: &LagrangianPlane, z: &PhaseVector) -> Result<()> {
    if z.n() != plane.n() {
        return Err(Error::DimensionMismatch {
            expected: plane.n(),
            found: z.n(),
        });
    }
    let residual = plane.distance(z.as_vector());
    if residual > TOL_ON_PLANE * z.norm().max(1.0) {
        return Err(Error::NotOnPlane { residual });
    }
    Ok(())
}

/// `ℏ Q M⁻¹ Qᵀ`: the dispersion of a body on a plane seen in `ℝ²ⁿ`, which
/// does not depend on the choice of basis.
fn ambient_dispersion(plane: &LagrangianPlane, body: &Ellipsoid) -> DMatrix<f64> {
    let q = plane.basis();
    q * body.dispersion() * q.transpose()
}

/// The position `x₀` of `B_X(x₀, √ℏ) × B_P(p₀, √ℏ)` and the symplectic map
/// taking it onto a state.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardForm {
    pub s: SymplecticMap,
    pub x0: DVector<f64>,
    pub p0: DVector<f64>,
}

impl LagrangianQuantumState {
    pub fn frame(&self) -> &LagrangianFrame {
        &self.frame
    }

    pub fn n(&self) -> usize {
        self.frame.n()
    }

    /// `X` in `ℓ`-coordinates, centered.
    pub fn body(&self) -> &Ellipsoid {
        &self.body
    }

    /// `X^ℏ_{ℓ′}` in `ℓ′`-coordinates, centered.
    pub fn dual(&self) -> &Ellipsoid {
        &self.dual
    }

    pub fn z0(&self) -> &PhaseVector {
        &self.z0
    }

    pub fn z0_prime(&self) -> &PhaseVector {
        &self.z0_prime
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `z₀ + z₀′`, the center of symmetry of the product.
    pub fn center(&self) -> PhaseVector {
        PhaseVector::from_vector(self.z0.as_vector() + self.z0_prime.as_vector()).expect("same dimension")
    }

    pub fn is_centered(&self) -> bool {
        self.z0.norm() <= TOL_CENTERED && self.z0_prime.norm() <= TOL_CENTERED
    }

    /// The product as a body of `ℝ²ⁿ`: `[Q | Q′](X × X^ℏ) + z₀ + z₀′`.
    pub fn product(&self) -> Result<ProductBody> {
        let t = linalg::hstack(&[self.frame.ell.basis(), self.frame.ell_prime.basis()]);
        ProductBody::with_map(
            vec![self.body.clone().into(), self.dual.clone().into()],
            t,
            self.center().into_vector(),
        )
    }

    /// Ambient dispersions of the two factors.
    fn factor_dispersions(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        (
            ambient_dispersion(&self.frame.ell, &self.body),
            ambient_dispersion(&self.frame.ell_prime, &self.dual),
        )
    }

    /// Max-norm distance to `other`, factor by factor: ambient dispersions of
    /// the bodies (which also pin down the planes) and the centers.
    pub fn deviation(&self, other: &LagrangianQuantumState) -> Result<f64> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        let (d1, d1p) = self.factor_dispersions();
        let (d2, d2p) = other.factor_dispersions();
        Ok(max_abs_diff(&d1, &d2)
            .max(max_abs_diff(&d1p, &d2p))
            .max(vec_max_abs_diff(self.z0.as_vector(), other.z0.as_vector()))
            .max(vec_max_abs_diff(self.z0_prime.as_vector(), other.z0_prime.as_vector())))
    }

    /// Like [`deviation`](Self::deviation) but for the products as sets, so
    /// the two factors may appear in either order.
    pub fn set_deviation(&self, other: &LagrangianQuantumState) -> Result<f64> {
        let ordered = self.deviation(other)?;
        let (d1, d1p) = self.factor_dispersions();
        let (d2, d2p) = other.factor_dispersions();
        let swapped = max_abs_diff(&d1, &d2p)
            .max(max_abs_diff(&d1p, &d2))
            .max(vec_max_abs_diff(self.z0.as_vector(), other.z0_prime.as_vector()))
            .max(vec_max_abs_diff(self.z0_prime.as_vector(), other.z0.as_vector()));
        Ok(ordered.min(swapped))
    }
}

/// The state `X_ℓ(z₀) × X^ℏ_{ℓ′}(z₀′)`. `body` is the ellipsoid `X` in the
/// orthonormal coordinates of `ℓ`, centered at the origin; `z₀` places it.
/// The dual factor is the Lagrangian polar dual of the centered body,
/// translated by `z₀′`.
pub fn make_state(
    frame: LagrangianFrame,
    body: Ellipsoid,
    z0: PhaseVector,
    z0_prime: PhaseVector,
    hbar: f64,
) -> Result<LagrangianQuantumState> {
    if body.dim() != frame.n() {
        return Err(Error::DimensionMismatch {
            expected: frame.n(),
            found: body.dim(),
        });
    }
    if body.center().amax() > TOL_CENTERED {
        return Err(Error::InvalidParameter(
            "the body must be centered at the origin of ℓ; its position is z0".into(),
        ));
    }
    require_on_plane(&frame.ell, &z0)?;
    require_on_plane(&frame.ell_prime, &z0_prime)?;
    let body = body.with_hbar(hbar)?;
    let dual = lagrangian_polar_dual(&ConvexBody::from(body.clone()), &frame, hbar, None)?;
    let dual = dual
        .as_ellipsoid()
        .cloned()
        .ok_or_else(|| Error::Unsupported("dual of an ellipsoid must be an ellipsoid".into()))?;
    Ok(LagrangianQuantumState {
        frame,
        body,
        dual,
        z0,
        z0_prime,
        hbar,
    })
}

/// `B_X^n(√ℏ) × B_P^n(√ℏ)` on the canonical frame.
pub fn fiducial_state(n: usize, hbar: f64) -> Result<LagrangianQuantumState> {
    let frame = canonical_frame(n)?;
    let body = Ellipsoid::ball(DVector::zeros(n), hbar.sqrt(), hbar)?;
    make_state(frame, body, PhaseVector::zeros(n), PhaseVector::zeros(n), hbar)
}

/// `T(S′z₀ + t_ℓ) S′X_ℓ × T(S′z₀′ + t_{ℓ′}) (S′X)^ℏ_{S′ℓ′}` for `T = (S′, t)`,
/// where `t = t_ℓ + t_{ℓ′}` is split along the new frame.
pub fn apply_symplectic(state: &LagrangianQuantumState, t: &AffineSymplecticMap) -> Result<LagrangianQuantumState> {
    if t.n() != state.n() {
        return Err(Error::DimensionMismatch {
            expected: state.n(),
            found: t.n(),
        });
    }
    let s = &t.linear;
    let (q, r) = linalg::orthonormalize_columns(&(s.matrix() * state.frame.ell.basis()))?;
    let body = state.body.linear_image(&r)?;
    let ell = LagrangianPlane::from_orthonormal(q);
    let frame = LagrangianFrame::new(ell, state.frame.ell_prime.image(s)?)?;

    let n = state.n();
    let split = linalg::solve(
        &linalg::hstack(&[frame.ell.basis(), frame.ell_prime.basis()]),
        t.shift.as_vector(),
    )?;
    let t_ell = frame.ell.basis() * split.rows(0, n);
    let t_ell_prime = frame.ell_prime.basis() * split.rows(n, n);
    let z0 = PhaseVector::from_vector(s.matrix() * state.z0.as_vector() + t_ell)?;
    let z0_prime = PhaseVector::from_vector(s.matrix() * state.z0_prime.as_vector() + t_ell_prime)?;
    make_state(frame, body, z0, z0_prime, state.hbar)
}

/// `S = [Q | Q′K⁻¹] · M_{A^{1/2}}` with `X = {Au·u ≤ ℏ}`, so that the state is
/// `S(B_X(x₀, √ℏ) × B_P(p₀, √ℏ))` with `(x₀, 0) = S⁻¹z₀`, `(0, p₀) = S⁻¹z₀′`.
pub fn standard_form(state: &LagrangianQuantumState) -> Result<StandardForm> {
    let n = state.n();
    let frame_map = state.frame.from_canonical()?;
    let a_sqrt = linalg::sym_sqrt(state.body.shape());
    let s = frame_map.compose(&SymplecticMap::dilation(&a_sqrt)?)?;
    let s_inv = s.inverse();
    let u = s_inv.matrix() * state.z0.as_vector();
    let v = s_inv.matrix() * state.z0_prime.as_vector();
    Ok(StandardForm {
        x0: u.rows(0, n).into_owned(),
        p0: v.rows(n, n).into_owned(),
        s,
    })
}

/// The John ellipsoid of the state, `S(B^{2n}(z₀ + z₀′, √ℏ))` with `S` from
/// [`standard_form`].
pub fn state_to_blob(state: &LagrangianQuantumState) -> Result<QuantumBlob> {
    let sf = standard_form(state)?;
    QuantumBlob::from_symplectic(&sf.s, state.center(), state.hbar)
}

/// The Gaussian wavepacket attached to a centered state through its John blob.
pub fn class_to_gaussian(state: &LagrangianQuantumState) -> Result<GaussianWavepacket> {
    if !state.is_centered() {
        return Err(Error::OffCenter);
    }
    blob_to_gaussian(&state_to_blob(state)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::john;
    use crate::lagrangian::{graph_lagrangian, LagrangianFrame};
    use crate::symplectic::{random_symplectic_rotation, RandomSymplectic};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn diag(x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(x))
    }

    fn pv(z: &[f64]) -> PhaseVector {
        PhaseVector::from_slice(z).unwrap()
    }

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let r = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &r * r.transpose() + DMatrix::identity(n, n) * 0.4
    }

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> LagrangianQuantumState {
        let s = RandomSymplectic::default().sample(n, rng);
        let fid = fiducial_state(n, 1.0).unwrap();
        let stretched = apply_symplectic(
            &fid,
            &AffineSymplecticMap::linear(SymplecticMap::dilation(&linalg::sym_sqrt(&random_spd(n, rng))).unwrap()),
        )
        .unwrap();
        let shift = PhaseVector::from_vector(DVector::from_fn(2 * n, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        apply_symplectic(&stretched, &AffineSymplecticMap::new(s, shift).unwrap()).unwrap()
    }

    #[test]
    fn fiducial_product_volume() {
        for (n, hbar) in [(1, 1.0), (2, 0.5), (3, 2.0)] {
            let s = fiducial_state(n, hbar).unwrap();
            let vol = ConvexBody::from(s.product().unwrap()).volume().unwrap();
            // Vol(B^n(√ℏ))² as a product of two balls.
            let ball = linalg::unit_ball_volume(n) * hbar.powf(n as f64 / 2.0);
            assert_abs_diff_eq!(vol, ball * ball, epsilon = 1e-12);
        }
        let square = ConvexBody::from(fiducial_state(1, 1.0).unwrap().product().unwrap());
        for corner in [[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0]] {
            assert!(square.contains(&DVector::from_column_slice(&corner), 1e-12));
        }
        assert!(!square.contains(&DVector::from_column_slice(&[1.01, 0.0]), 1e-12));
    }

    #[test]
    fn displaced_canonical_state() {
        let n = 2;
        let (x0, p0) = ([0.5, -1.0], [2.0, 0.25]);
        let s = make_state(
            canonical_frame(n).unwrap(),
            Ellipsoid::ball(DVector::zeros(n), 1.0, 1.0).unwrap(),
            pv(&[x0[0], x0[1], 0.0, 0.0]),
            pv(&[0.0, 0.0, p0[0], p0[1]]),
            1.0,
        )
        .unwrap();
        assert_abs_diff_eq!(s.dual().shape().clone(), DMatrix::identity(2, 2), epsilon = 1e-15);
        let sf = standard_form(&s).unwrap();
        assert_abs_diff_eq!(sf.x0, DVector::from_column_slice(&x0), epsilon = 1e-15);
        assert_abs_diff_eq!(sf.p0, DVector::from_column_slice(&p0), epsilon = 1e-15);
    }

    #[test]
    fn rejects_centers_off_their_planes() {
        let err = make_state(
            canonical_frame(1).unwrap(),
            Ellipsoid::ball(DVector::zeros(1), 1.0, 1.0).unwrap(),
            pv(&[0.0, 1.0]),
            pv(&[0.0, 0.0]),
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotOnPlane { .. }));
    }

    #[test]
    fn tilted_parallelogram_has_area_four_hbar() {
        for (a, hbar) in [(1.0, 1.0), (3.0, 0.5), (0.2, 2.0)] {
            let frame = LagrangianFrame::new(graph_lagrangian(&diag(&[0.7])).unwrap(), LagrangianPlane::new(
                &DMatrix::from_column_slice(2, 1, &[0.4, 1.0]),
                1e-12,
            )
            .unwrap())
            .unwrap();
            let body = Ellipsoid::centered(diag(&[a]), hbar).unwrap();
            let s = make_state(frame, body, PhaseVector::zeros(1), PhaseVector::zeros(1), hbar).unwrap();
            let area = ConvexBody::from(s.product().unwrap()).volume().unwrap();
            assert_abs_diff_eq!(area, 4.0 * hbar, epsilon = 1e-12);
            let blob = state_to_blob(&s).unwrap();
            assert_abs_diff_eq!(blob.ellipsoid().volume(), PI * hbar, epsilon = 1e-12);
        }
    }

    #[test]
    fn stretched_fiducial_is_x_times_its_polar() {
        let a = diag(&[2.0, 0.5]);
        let fid = fiducial_state(2, 1.0).unwrap();
        let m = SymplecticMap::dilation(&linalg::sym_sqrt(&a)).unwrap();
        let s = apply_symplectic(&fid, &AffineSymplecticMap::linear(m)).unwrap();
        let expected = make_state(
            canonical_frame(2).unwrap(),
            Ellipsoid::centered(a.clone(), 1.0).unwrap(),
            PhaseVector::zeros(2),
            PhaseVector::zeros(2),
            1.0,
        )
        .unwrap();
        assert!(s.deviation(&expected).unwrap() < 1e-14);
        assert_abs_diff_eq!(s.dual().shape().clone(), diag(&[0.5, 2.0]), epsilon = 1e-14);
    }

    #[test]
    fn identity_action_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            let s = random_state(n, &mut rng);
            let same = apply_symplectic(&s, &AffineSymplecticMap::linear(SymplecticMap::identity(n))).unwrap();
            assert!(s.deviation(&same).unwrap() < 1e-12);
            let t = AffineSymplecticMap::new(
                RandomSymplectic::default().sample(n, &mut rng),
                PhaseVector::from_vector(DVector::from_fn(2 * n, |_, _| rng.random_range(-1.0..1.0))).unwrap(),
            )
            .unwrap();
            let there = apply_symplectic(&s, &t).unwrap();
            let back = apply_symplectic(&there, &t.inverse()).unwrap();
            let dev = s.deviation(&back).unwrap();
            assert!(dev < 1e-9, "n = {n}: {dev}");
        }
    }

    #[test]
    fn transported_dual_equals_recomputed_dual() {
        // (S′X)^ℏ_{S′ℓ′} = S′(X^ℏ_{ℓ′}): push the old dual forward directly.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 1..=3 {
            let s = random_state(n, &mut rng);
            let map = RandomSymplectic::default().sample(n, &mut rng);
            let moved = apply_symplectic(&s, &AffineSymplecticMap::linear(map.clone())).unwrap();
            let q = s.frame().ell_prime.basis();
            let pushed = map.matrix() * q * s.dual().dispersion() * q.transpose() * map.matrix().transpose();
            let q2 = moved.frame().ell_prime.basis();
            let recomputed = q2 * moved.dual().dispersion() * q2.transpose();
            assert!(max_abs_diff(&pushed, &recomputed) < 1e-9 * (1.0 + linalg::max_abs(&pushed)));
        }
    }

    #[test]
    fn standard_form_reproduces_the_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=3 {
            let s = random_state(n, &mut rng);
            let sf = standard_form(&s).unwrap();
            let start = make_state(
                canonical_frame(n).unwrap(),
                Ellipsoid::ball(DVector::zeros(n), 1.0, 1.0).unwrap(),
                PhaseVector::new(&sf.x0, &DVector::zeros(n)).unwrap(),
                PhaseVector::new(&DVector::zeros(n), &sf.p0).unwrap(),
                1.0,
            )
            .unwrap();
            let rebuilt = apply_symplectic(&start, &AffineSymplecticMap::linear(sf.s.clone())).unwrap();
            assert!(s.deviation(&rebuilt).unwrap() < 1e-9, "n = {n}");
        }
        let fid = standard_form(&fiducial_state(2, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(fid.s.matrix().clone(), DMatrix::identity(4, 4), epsilon = 1e-15);
    }

    #[test]
    fn blob_examples() {
        let fid = fiducial_state(2, 1.0).unwrap();
        assert_abs_diff_eq!(state_to_blob(&fid).unwrap().g().clone(), DMatrix::identity(4, 4), epsilon = 1e-15);

        let m = SymplecticMap::dilation(&diag(&[2.0_f64.sqrt()])).unwrap();
        let s = apply_symplectic(&fiducial_state(1, 1.0).unwrap(), &AffineSymplecticMap::linear(m)).unwrap();
        assert_abs_diff_eq!(state_to_blob(&s).unwrap().g().clone(), diag(&[2.0, 0.5]), epsilon = 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 1..=3 {
            let u = random_symplectic_rotation(n, &mut rng);
            let rotated = apply_symplectic(&fiducial_state(n, 1.0).unwrap(), &AffineSymplecticMap::linear(u.into_map()))
                .unwrap();
            let g = state_to_blob(&rotated).unwrap().g().clone();
            assert!(max_abs_diff(&g, &DMatrix::identity(2 * n, 2 * n)) < 1e-12);
        }
    }

    #[test]
    fn blob_is_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..=3 {
            let s = random_state(n, &mut rng);
            let sf = standard_form(&s).unwrap();
            let map = RandomSymplectic::default().sample(n, &mut rng);
            let moved = apply_symplectic(&s, &AffineSymplecticMap::linear(map.clone())).unwrap();
            let ss = map.matrix() * sf.s.matrix();
            let expected = (&ss * ss.transpose()).try_inverse().unwrap();
            let g = state_to_blob(&moved).unwrap().g().clone();
            assert!(max_abs_diff(&g, &expected) < 1e-8 * (1.0 + linalg::max_abs(&expected)));
        }
    }

    #[test]
    fn blob_agrees_with_generic_john_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 1..=2 {
            let s = random_state(n, &mut rng);
            let blob = state_to_blob(&s).unwrap();
            let generic = john(&ConvexBody::from(s.product().unwrap())).unwrap().ellipsoid;
            let dev = generic.deviation(&blob.ellipsoid()).unwrap();
            assert!(dev < 1e-6 * (1.0 + linalg::max_abs(blob.g())), "n = {n}: {dev}");
        }
    }

    #[test]
    fn class_of_a_squeezed_state() {
        let a = diag(&[2.0, 0.3]);
        let s = make_state(
            canonical_frame(2).unwrap(),
            Ellipsoid::centered(a.clone(), 1.0).unwrap(),
            PhaseVector::zeros(2),
            PhaseVector::zeros(2),
            1.0,
        )
        .unwrap();
        let psi = class_to_gaussian(&s).unwrap();
        assert_abs_diff_eq!(psi.a().clone(), a, epsilon = 1e-14);
        assert_abs_diff_eq!(psi.b().clone(), DMatrix::zeros(2, 2), epsilon = 1e-14);

        let phi0 = class_to_gaussian(&fiducial_state(3, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(phi0.a().clone(), DMatrix::identity(3, 3), epsilon = 1e-15);

        let off = make_state(
            canonical_frame(1).unwrap(),
            Ellipsoid::centered(diag(&[1.0]), 1.0).unwrap(),
            pv(&[1.0, 0.0]),
            PhaseVector::zeros(1),
            1.0,
        )
        .unwrap();
        assert!(matches!(class_to_gaussian(&off).unwrap_err(), Error::OffCenter));
    }
}
