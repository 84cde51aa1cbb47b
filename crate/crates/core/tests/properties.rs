use lagpolar::convex::{ConvexBody, Ellipsoid, Polytope};
use lagpolar::lagrangian::{canonical_frame, is_lagrangian, LagrangianPlane};
use lagpolar::linalg::{max_abs, max_abs_diff};
use lagpolar::polar::{dual_transform, polar_about, polar_dual, support_deviation, CenterPolicy};
use lagpolar::quantum::{
    blob_to_gaussian, gaussian_to_blob, metaplectic_apply, wigner, GaussianWavepacket, Metaplectic, QuantumBlob,
};
use lagpolar::symplectic::{is_symplectic, j_matrix, random_symplectic, symplectic_inverse, PhaseVector};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn spd(n: usize, entries: &[f64]) -> DMatrix<f64> {
    let r = DMatrix::from_fn(n, n, |i, j| entries[i * n + j]);
    &r * r.transpose() + DMatrix::identity(n, n) * 0.2
}

fn sym(n: usize, entries: &[f64]) -> DMatrix<f64> {
    let r = DMatrix::from_fn(n, n, |i, j| entries[i * n + j]);
    (&r + r.transpose()) * 0.5
}

fn directions(d: usize) -> Vec<DVector<f64>> {
    (0..64)
        .map(|k| {
            let t = k as f64 * 0.618_033_988_749_895;
            DVector::from_fn(d, |i, _| (t * (i + 1) as f64 * 2.399_963).sin() + 0.1)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_maps_are_symplectic(n in 1usize..=3, seed in any::<u64>()) {
        let s = random_symplectic(n, seed);
        let check = is_symplectic(s.matrix(), 1e-9).unwrap();
        prop_assert!(check.is_symplectic, "residual {}", check.residual);
        let inv = symplectic_inverse(s.matrix(), 1e-9).unwrap();
        let prod = s.matrix() * inv.matrix();
        prop_assert!(max_abs_diff(&prod, &DMatrix::identity(2 * n, 2 * n)) < 1e-9);
        prop_assert!((s.matrix().determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn symplectic_maps_preserve_the_form(n in 1usize..=3, seed in any::<u64>(), z in prop::collection::vec(-2.0..2.0f64, 12)) {
        let s = random_symplectic(n, seed);
        let a = DVector::from_column_slice(&z[..2 * n]);
        let b = DVector::from_column_slice(&z[6..6 + 2 * n]);
        let j = j_matrix(n);
        let before = b.dot(&(&j * &a));
        let (sa, sb) = (s.matrix() * &a, s.matrix() * &b);
        let after = sb.dot(&(&j * &sa));
        prop_assert!((before - after).abs() < 1e-8 * (1.0 + max_abs(s.matrix()).powi(2)));
    }

    #[test]
    fn images_of_lagrangian_planes_are_lagrangian(n in 1usize..=3, seed in any::<u64>()) {
        let s = random_symplectic(n, seed);
        let image = LagrangianPlane::x_plane(n).image(&s).unwrap();
        prop_assert!(is_lagrangian(image.basis(), 1e-9).unwrap().is_lagrangian);
    }

    #[test]
    fn ellipsoid_bipolarity(n in 1usize..=3, entries in prop::collection::vec(-1.0..1.0f64, 9), hbar in 0.2..3.0f64) {
        let e = ConvexBody::from(Ellipsoid::centered(spd(n, &entries), hbar).unwrap());
        let twice = polar_dual(&polar_dual(&e, hbar, &CenterPolicy::Origin).unwrap(), hbar, &CenterPolicy::Origin).unwrap();
        let dev = twice.as_ellipsoid().unwrap().deviation(e.as_ellipsoid().unwrap()).unwrap();
        prop_assert!(dev < 1e-9 * (1.0 + max_abs(&e.as_ellipsoid().unwrap().normalized_shape())));
    }

    #[test]
    fn polar_scaling_law(entries in prop::collection::vec(-1.0..1.0f64, 4), seed in 0u64..1000) {
        // (AX)^ℏ = A⁻ᵀX^ℏ on a random symmetric polygon.
        let k = 3 + (seed % 4) as usize;
        let mut pts = Vec::new();
        for i in 0..k {
            let t = std::f64::consts::PI * (i as f64 + 0.3 * ((seed + i as u64) % 7) as f64 / 7.0) / k as f64;
            let r = 1.0 + 0.5 * (((seed * 31 + i as u64) % 11) as f64 / 11.0);
            let v = DVector::from_column_slice(&[r * t.cos(), r * t.sin()]);
            pts.push(-&v);
            pts.push(v);
        }
        let x = ConvexBody::from(Polytope::from_vertices(pts).unwrap());
        let a = DMatrix::from_fn(2, 2, |i, j| entries[2 * i + j]) + DMatrix::identity(2, 2) * 2.5;
        let origin = DVector::zeros(2);
        let lhs = polar_about(&x.linear_image(&a).unwrap(), &origin, 1.0).unwrap();
        let rhs = polar_about(&x, &origin, 1.0).unwrap().linear_image(&dual_transform(&a).unwrap()).unwrap();
        prop_assert!(support_deviation(&lhs, &rhs, &directions(2)).unwrap() < 1e-9);
    }

    #[test]
    fn gaussian_blob_round_trip(
        n in 1usize..=3,
        a in prop::collection::vec(-1.0..1.0f64, 9),
        b in prop::collection::vec(-1.0..1.0f64, 9),
        z in prop::collection::vec(-3.0..3.0f64, 6),
    ) {
        let z0 = PhaseVector::from_slice(&z[..2 * n]).unwrap();
        let psi = GaussianWavepacket::new(spd(n, &a), sym(n, &b), z0, 1.0).unwrap();
        let q = gaussian_to_blob(&psi).unwrap();
        prop_assert!(is_symplectic(q.g(), 1e-9).unwrap().is_symplectic);
        let back = blob_to_gaussian(&q).unwrap();
        prop_assert!(max_abs_diff(back.a(), psi.a()) < 1e-10);
        prop_assert!(max_abs_diff(back.b(), psi.b()) < 1e-10);
    }

    #[test]
    fn blob_section_and_projection_are_dual(n in 1usize..=3, seed in any::<u64>()) {
        let s = random_symplectic(n, seed);
        let q = QuantumBlob::from_symplectic(&s, PhaseVector::zeros(n), 1.0).unwrap();
        let prod = q.section_projection_product().unwrap();
        prop_assert!(max_abs_diff(&prod, &DMatrix::identity(n, n)) < 1e-9 * (1.0 + max_abs(q.g())));
    }

    #[test]
    fn shears_compose_additively(p1 in -2.0..2.0f64, p2 in -2.0..2.0f64, x in -2.0..2.0f64, p in -2.0..2.0f64) {
        let phi0 = GaussianWavepacket::fiducial(1, 1.0).unwrap();
        let m = |v: f64| Metaplectic::Shear(DMatrix::from_element(1, 1, v));
        let two = metaplectic_apply(&m(p2), &metaplectic_apply(&m(p1), &phi0).unwrap()).unwrap();
        let one = metaplectic_apply(&m(p1 + p2), &phi0).unwrap();
        let z = PhaseVector::from_slice(&[x, p]).unwrap();
        prop_assert!((wigner(&two, &z).unwrap() - wigner(&one, &z).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn canonical_frame_pairing_is_identity() {
    for n in 1..=3 {
        let f = canonical_frame(n).unwrap();
        assert_eq!(f.pairing(), DMatrix::identity(n, n));
    }
}
