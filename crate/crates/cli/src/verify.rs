//! The `verify` runner: randomized invariant suites with a machine-readable
//! report. Suites run in parallel, each on its own ChaCha stream of the
//! run seed, and the report keeps a fixed order.

use std::f64::consts::PI;

use lagpolar::convex::{ConvexBody, Ellipsoid, Polytope, ProductBody};
use lagpolar::extremal::{john, john_of_polytope, loewner};
use lagpolar::lagrangian::{
    canonical_frame, frame_mapping, is_lagrangian, plane_through, rotation_between, LagrangianFrame,
    LagrangianPlane,
};
use lagpolar::linalg::{self, max_abs_diff};
use lagpolar::polar::{
    blaschke_santalo_product, dual_transform, lagrangian_polar_dual, polar_about, polar_dual, santalo_bound, santalo_point,
    support_deviation, CenterPolicy,
};
use lagpolar::quantum::{
    apply_symplectic, blob_to_gaussian, gaussian_to_blob, make_state, metaplectic_apply, standard_form,
    state_to_blob, GaussianWavepacket, Metaplectic, QuantumBlob,
};
use lagpolar::symplectic::{
    j_matrix, symplectic_form, symplectic_inverse, AffineSymplecticMap, PhaseVector, RandomSymplectic,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;

pub const SUITES: [&str; 7] = ["symplectic", "lagrangian", "polar", "santalo", "extremal", "quantum", "wigner"];

/// Size of the perturbation added to `J` by `--inject-fault`.
pub const FAULT_SIZE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    /// `None` when a case could not be evaluated (see `error`).
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: usize,
    pub passed_checks: usize,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub hbar: f64,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub hbar: f64,
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            hbar: 1.0,
            inject_fault: false,
        }
    }
}

/// Worst residual over the cases of one check.
struct Check {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    worst: f64,
    error: Option<String>,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            cases: 0,
            worst: 0.0,
            error: None,
        }
    }

    fn record(&mut self, residual: lagpolar::Result<f64>) {
        self.cases += 1;
        match residual {
            Ok(r) if r.is_nan() => self.worst = f64::INFINITY,
            Ok(r) => self.worst = self.worst.max(r),
            Err(e) => {
                self.worst = f64::INFINITY;
                self.error.get_or_insert(e.to_string());
            }
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name.into(),
            cases: self.cases,
            max_residual: self.worst.is_finite().then_some(self.worst),
            tolerance: self.tolerance,
            passed: self.worst <= self.tolerance,
            error: self.error,
        }
    }
}

pub fn run(selected: &[String], opts: &VerifyOptions) -> Result<VerifyReport, CliError> {
    for s in selected {
        if !SUITES.contains(&s.as_str()) {
            return Err(CliError::Schema {
                path: "--suite".into(),
                message: format!("unknown suite `{s}` (expected one of {})", SUITES.join(", ")),
            });
        }
    }
    let chosen: Vec<(usize, &str)> = SUITES
        .iter()
        .enumerate()
        .filter(|(_, s)| selected.is_empty() || selected.iter().any(|t| t == *s))
        .map(|(i, s)| (i, *s))
        .collect();
    let suites: Vec<SuiteReport> = chosen
        .par_iter()
        .map(|&(stream, name)| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(stream as u64);
            let checks: Vec<CheckResult> = run_suite(name, &mut rng, opts).into_iter().map(Check::finish).collect();
            SuiteReport {
                suite: name.into(),
                cases: checks.iter().map(|c| c.cases).sum(),
                passed_checks: checks.iter().filter(|c| c.passed).count(),
                passed: checks.iter().all(|c| c.passed),
                checks,
            }
        })
        .collect();
    Ok(VerifyReport {
        seed: opts.seed,
        hbar: opts.hbar,
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

fn run_suite(name: &str, rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Vec<Check> {
    match name {
        "symplectic" => symplectic_suite(rng, opts),
        "lagrangian" => lagrangian_suite(rng),
        "polar" => polar_suite(rng, opts.hbar),
        "santalo" => santalo_suite(rng, opts.hbar),
        "extremal" => extremal_suite(rng),
        "quantum" => quantum_suite(rng, opts.hbar),
        "wigner" => wigner_suite(rng, opts.hbar),
        _ => unreachable!("suite names are validated"),
    }
}

// Random inputs.

pub fn random_spd<R: Rng>(n: usize, rng: &mut R, lo: f64, hi: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)) + DMatrix::identity(n, n) * 0.1;
    let q = g.qr().q();
    let d = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| rng.random_range(lo..hi)));
    linalg::symmetrize(&(&q * d * q.transpose()))
}

pub fn random_symmetric<R: Rng>(n: usize, rng: &mut R, r: f64) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-r..r));
    linalg::symmetrize(&m)
}

pub fn random_vector<R: Rng>(d: usize, rng: &mut R, r: f64) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.random_range(-r..r))
}

/// A centrally symmetric polygon with `2k` vertices, `k ∈ [2, 6]`, about `c`.
pub fn random_symmetric_polygon<R: Rng>(rng: &mut R, c: &DVector<f64>) -> lagpolar::Result<Polytope> {
    let k = rng.random_range(2..=6);
    let mut angles: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..PI)).collect();
    angles.sort_by(f64::total_cmp);
    let mut pts = Vec::with_capacity(2 * k);
    for t in angles {
        let r = rng.random_range(0.5..1.5);
        let v = DVector::from_column_slice(&[r * t.cos(), r * t.sin()]);
        pts.push(c + &v);
        pts.push(c - v);
    }
    Polytope::from_vertices(pts)
}

fn random_gaussian<R: Rng>(n: usize, rng: &mut R, hbar: f64) -> lagpolar::Result<GaussianWavepacket> {
    let a = random_spd(n, rng, 0.5, 2.0);
    let b = random_symmetric(n, rng, 0.5);
    let z0 = PhaseVector::from_vector(random_vector(2 * n, rng, 1.0))?;
    GaussianWavepacket::new(a, b, z0, hbar)
}

fn random_frame<R: Rng>(n: usize, rng: &mut R) -> lagpolar::Result<LagrangianFrame> {
    let s = RandomSymplectic::default().sample(n, rng);
    canonical_frame(n)?.image(&s)
}

fn directions(d: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    (0..k).map(|_| random_vector(d, rng, 1.0)).collect()
}

fn dims(i: usize) -> usize {
    1 + i % 3
}

// Suites.

fn symplectic_suite(rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Vec<Check> {
    let mut identity = Check::new("SᵀJS = J", 1e-9);
    let mut transposed = Check::new("SJSᵀ = J", 1e-9);
    let mut inverse = Check::new("block inverse satisfies S⁻¹S = I", 1e-9);
    let mut det = Check::new("det S = 1", 1e-9);
    let mut form = Check::new("ω(Sz, Sz′) = ω(z, z′)", 1e-9);
    let mut affine = Check::new("S·T(z₀) = T(Sz₀)·S", 1e-12);
    let gen = RandomSymplectic::default();
    for i in 0..200 {
        let n = dims(i);
        let s = gen.sample(n, rng);
        let m = s.matrix();
        let mut j = j_matrix(n);
        if opts.inject_fault {
            j[(0, 0)] += FAULT_SIZE;
        }
        identity.record(Ok(max_abs_diff(&(m.transpose() * &j * m), &j)));
        transposed.record(Ok(max_abs_diff(&(m * &j * m.transpose()), &j)));
        inverse.record(
            symplectic_inverse(m, 1e-9).map(|inv| max_abs_diff(&(inv.matrix() * m), &DMatrix::identity(2 * n, 2 * n))),
        );
        det.record(Ok((m.determinant() - 1.0).abs()));

        let z = PhaseVector::from_vector(random_vector(2 * n, rng, 1.0)).expect("even length");
        let w = PhaseVector::from_vector(random_vector(2 * n, rng, 1.0)).expect("even length");
        form.record((|| {
            let before = symplectic_form(&z, &w)?;
            let after = symplectic_form(&s.apply(&z)?, &s.apply(&w)?)?;
            // Relative to the size of the images.
            Ok((before - after).abs() / (1.0 + linalg::max_abs(m).powi(2)))
        })());
        affine.record((|| {
            let lhs = AffineSymplecticMap::linear(s.clone()).compose(&AffineSymplecticMap::translation(z.clone()))?;
            let rhs = AffineSymplecticMap::translation(s.apply(&z)?).compose(&AffineSymplecticMap::linear(s.clone()))?;
            let (a, b) = (lhs.apply(&w)?, rhs.apply(&w)?);
            Ok(linalg::vec_max_abs_diff(a.as_vector(), b.as_vector()) / (1.0 + linalg::max_abs(m)))
        })());
    }
    vec![identity, transposed, inverse, det, form, affine]
}

fn lagrangian_suite(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut images = Check::new("images of ℓ_X are Lagrangian", 1e-9);
    let mut rotation = Check::new("rotation_between maps ℓ₁ onto ℓ₂", 1e-9);
    let mut unitary = Check::new("rotation_between is orthogonal and symplectic", 1e-9);
    let mut frames = Check::new("frame_mapping maps frame onto frame", 1e-9);
    let mut through = Check::new("plane_through contains z₀", 1e-10);
    let mut pairing = Check::new("dual boundary attains ω = ℏ", 1e-9);
    for i in 0..50 {
        let n = dims(i);
        let gen = RandomSymplectic::default();
        let (s1, s2) = (gen.sample(n, rng), gen.sample(n, rng));
        images.record((|| Ok(is_lagrangian(LagrangianPlane::x_plane(n).image(&s1)?.basis(), 1e-9)?.max_omega))());
        rotation.record((|| {
            let l1 = LagrangianPlane::x_plane(n).image(&s1)?;
            let l2 = LagrangianPlane::p_plane(n).image(&s2)?;
            let u = rotation_between(&l1, &l2)?;
            l1.image(u.as_map())?.subspace_distance(&l2)
        })());
        unitary.record((|| {
            let l1 = LagrangianPlane::x_plane(n).image(&s1)?;
            let l2 = LagrangianPlane::x_plane(n).image(&s2)?;
            let u = rotation_between(&l1, &l2)?;
            let m = u.matrix();
            let i2 = DMatrix::identity(2 * n, 2 * n);
            let j = j_matrix(n);
            Ok(max_abs_diff(&(m.transpose() * m), &i2).max(max_abs_diff(&(m.transpose() * &j * m), &j)))
        })());
        frames.record((|| {
            let f1 = random_frame(n, rng)?;
            let f2 = random_frame(n, rng)?;
            let s = frame_mapping(&f1, &f2)?;
            f1.image(&s)?.subspace_distance(&f2)
        })());
        through.record((|| {
            let z0 = PhaseVector::from_vector(random_vector(2 * n, rng, 2.0))?;
            let l = plane_through(&z0)?;
            Ok(l.distance(z0.as_vector()).max(l.max_omega()))
        })());
        pairing.record((|| {
            // sup over X of ω(z′, z) for boundary points z′ of the dual.
            let frame = random_frame(n, rng)?;
            let body = ConvexBody::from(Ellipsoid::centered(random_spd(n, rng, 0.5, 2.0), 1.0)?);
            let dual = lagrangian_polar_dual(&body, &frame, 1.0, None)?;
            let dual = dual.as_ellipsoid().expect("ellipsoids dualize to ellipsoids");
            let (q, qp) = (frame.ell.basis(), frame.ell_prime.basis());
            let j = j_matrix(n);
            let mut worst = 0.0_f64;
            for w in directions(n, 10, rng) {
                let zp: DVector<f64> = qp * dual.boundary_point(&w)?;
                let u: DVector<f64> = q.transpose() * &j * &zp;
                let sup = body.support(&u)?;
                worst = worst.max((sup - 1.0).abs());
            }
            Ok(worst)
        })());
    }
    vec![images, rotation, unitary, frames, through, pairing]
}

fn polar_suite(rng: &mut ChaCha8Rng, hbar: f64) -> Vec<Check> {
    let mut bipolar_e = Check::new("ellipsoid bipolarity (shape deviation)", 1e-9);
    let mut bipolar_p = Check::new("polygon bipolarity (vertex Hausdorff)", 1e-8);
    let mut scaling = Check::new("(AX)^ℏ = A⁻ᵀX^ℏ", 1e-9);
    let mut covariance = Check::new("S(X^ℏ_ℓ′) = (SX_ℓ)^ℏ_Sℓ′", 1e-9);
    let mut ellipsoids = Check::new("ellipsoid volume product = (Vol B(√ℏ))² (relative)", 1e-6);
    let mut square = Check::new("square volume product = 8ℏ²", 1e-12);
    let mut polygons = Check::new("symmetric polygon product ≤ (Vol B(√ℏ))² (relative excess)", 1e-6);
    let origin = |d| CenterPolicy::Point(DVector::zeros(d));
    for i in 0..100 {
        let n = dims(i);
        bipolar_e.record((|| {
            let e = ConvexBody::from(Ellipsoid::centered(random_spd(n, rng, 0.5, 2.0), hbar)?);
            let twice = polar_dual(&polar_dual(&e, hbar, &origin(n))?, hbar, &origin(n))?;
            twice.as_ellipsoid().expect("ellipsoid").deviation(e.as_ellipsoid().expect("ellipsoid"))
        })());
    }
    for _ in 0..50 {
        let zero = DVector::zeros(2);
        bipolar_p.record((|| {
            let p = random_symmetric_polygon(rng, &zero)?;
            let x = ConvexBody::from(p.clone());
            let twice = polar_dual(&polar_dual(&x, hbar, &origin(2))?, hbar, &origin(2))?;
            Ok(twice.as_polytope().expect("polytope").vertex_hausdorff(&p))
        })());
        scaling.record((|| {
            let x = ConvexBody::from(random_symmetric_polygon(rng, &zero)?);
            let a = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0)) + DMatrix::identity(2, 2) * 2.0;
            let lhs = polar_about(&x.linear_image(&a)?, &zero, hbar)?;
            let rhs = polar_about(&x, &zero, hbar)?.linear_image(&dual_transform(&a)?)?;
            support_deviation(&lhs, &rhs, &directions(2, 32, rng))
        })());
        covariance.record((|| {
            // Dual of the image body on the image frame, compared with the image of
            // the dual, both as sets in phase space through their support functions.
            let n = 2;
            let frame = random_frame(n, rng)?;
            let s = RandomSymplectic::default().sample(n, rng);
            let body = ConvexBody::from(random_symmetric_polygon(rng, &zero)?);
            let pair = lagpolar::polar::DualPair::new(body, frame.clone(), hbar)?;
            let moved_dual = pair.x_dual.image(&s)?;
            let moved_body = pair.x.image(&s)?;
            let moved_frame = LagrangianFrame::new(moved_body.plane.clone(), moved_dual.plane.clone())?;
            let redual = lagrangian_polar_dual(&moved_body.body, &moved_frame, hbar, None)?;
            let redual = lagpolar::polar::PlaneBody::new(moved_frame.ell_prime.clone(), redual)?;
            let mut worst = moved_dual.plane.subspace_distance(&redual.plane)?;
            for w in directions(2 * n, 32, rng) {
                let scale = 1.0 + w.norm() * linalg::max_abs(s.matrix());
                worst = worst.max((moved_dual.support_ambient(&w)? - redual.support_ambient(&w)?).abs() / scale);
            }
            Ok(worst)
        })());
        ellipsoids.record((|| {
            let e = ConvexBody::from(Ellipsoid::centered(random_spd(2, rng, 0.3, 3.0), hbar)?);
            let v = blaschke_santalo_product(&e, hbar, &CenterPolicy::Centroid)?;
            Ok((v.product / santalo_bound(2, hbar) - 1.0).abs())
        })());
        polygons.record((|| {
            let c = random_vector(2, rng, 1.0);
            let x = ConvexBody::from(random_symmetric_polygon(rng, &c)?);
            let v = blaschke_santalo_product(&x, hbar, &CenterPolicy::Centroid)?;
            Ok((v.product / santalo_bound(2, hbar) - 1.0).max(0.0))
        })());
    }
    square.record((|| {
        let x = ConvexBody::from(Polytope::cube(2, 1.0)?);
        let v = blaschke_santalo_product(&x, hbar, &CenterPolicy::Centroid)?;
        Ok((v.product - 8.0 * hbar * hbar).abs())
    })());
    vec![bipolar_e, bipolar_p, scaling, covariance, ellipsoids, square, polygons]
}

fn santalo_suite(rng: &mut ChaCha8Rng, hbar: f64) -> Vec<Check> {
    let mut symmetric = Check::new("symmetric bodies: Santaló point is the center", 1e-4);
    let mut triangles = Check::new("triangles: Santaló point is the centroid", 2e-3);
    let mut minimal = Check::new("no nearby point has a smaller polar (relative)", 1e-8);
    for _ in 0..10 {
        let c = random_vector(2, rng, 2.0);
        symmetric.record((|| {
            let x = ConvexBody::from(random_symmetric_polygon(rng, &c)?);
            Ok((santalo_point(&x, hbar)?.point - &c).amax())
        })());
        symmetric.record((|| {
            let e = ConvexBody::from(Ellipsoid::new(c.clone(), random_spd(2, rng, 0.5, 2.0), hbar)?);
            Ok((santalo_point(&e, hbar)?.point - &c).amax())
        })());
    }
    let unit = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    for k in 0..6 {
        triangles.record((|| {
            // The reference triangle first, then random affine images of it.
            let a = if k == 0 {
                DMatrix::identity(2, 2)
            } else {
                DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0)) + DMatrix::identity(2, 2) * 1.5
            };
            let shift = if k == 0 { DVector::zeros(2) } else { random_vector(2, rng, 1.0) };
            let verts: Vec<DVector<f64>> = unit
                .iter()
                .map(|v| &a * DVector::from_column_slice(v) + &shift)
                .collect();
            let centroid = (&verts[0] + &verts[1] + &verts[2]) / 3.0;
            let size = verts.iter().map(|v| (v - &centroid).norm()).fold(0.0, f64::max);
            let x = ConvexBody::from(Polytope::from_vertices(verts)?);
            let sp = santalo_point(&x, hbar)?;
            minimal.record((|| {
                let p = x.as_polytope().expect("polytope");
                let mut worst = 0.0_f64;
                for w in directions(2, 8, rng) {
                    let nearby = &sp.point + w * (1e-3 * size);
                    let v = lagpolar::polar::polytope_polar_about(p, &nearby, hbar)?;
                    let vol = ConvexBody::from(v).volume()?;
                    worst = worst.max((sp.polar_volume - vol) / sp.polar_volume);
                }
                Ok(worst.max(0.0))
            })());
            Ok((sp.point - centroid).amax() / size.max(1.0))
        })());
    }
    vec![symmetric, triangles, minimal]
}

fn extremal_suite(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut product = Check::new("John(B²(1) × B²(1)) = B⁴(1)", 1e-5);
    let mut square = Check::new("John of [−1,1]² is the unit disk", 1e-6);
    let mut sandwich = Check::new("John ⊆ X ⊆ Löwner (inclusion residual)", 1e-7);
    let mut duality = Check::new("polar(John(X)) = Löwner(polar X)", 1e-6);
    let mut equivariance = Check::new("John(AX) = A·John(X) and Löwner(AX) = A·Löwner(X)", 1e-6);
    let mut steiner = Check::new("triangle John area = π·area/(3√3) (relative)", 1e-6);
    product.record((|| {
        let ball = || ConvexBody::from(Ellipsoid::centered(DMatrix::identity(2, 2), 1.0).expect("spd"));
        let x = ConvexBody::from(ProductBody::new(vec![ball(), ball()])?);
        let r = john(&x)?;
        Ok(max_abs_diff(&r.ellipsoid.normalized_shape(), &DMatrix::identity(4, 4))
            .max(r.ellipsoid.center().amax()))
    })());
    square.record((|| {
        let r = john(&ConvexBody::from(Polytope::cube(2, 1.0)?))?;
        Ok(max_abs_diff(&r.ellipsoid.normalized_shape(), &DMatrix::identity(2, 2)))
    })());
    for _ in 0..10 {
        let zero = DVector::zeros(2);
        let p = match random_symmetric_polygon(rng, &zero) {
            Ok(p) => p,
            Err(e) => {
                sandwich.record(Err(e));
                continue;
            }
        };
        let x = ConvexBody::from(p.clone());
        sandwich.record((|| {
            let (j, l) = (john(&x)?, loewner(&x)?);
            let jp = john_of_polytope(&p)?;
            Ok(j.certificate
                .inclusion_residual
                .max(l.certificate.inclusion_residual)
                .max(jp.certificate.inclusion_residual))
        })());
        duality.record((|| {
            let origin = CenterPolicy::Point(zero.clone());
            let lhs = polar_dual(&ConvexBody::from(john(&x)?.ellipsoid), 1.0, &origin)?;
            let rhs = loewner(&polar_dual(&x, 1.0, &origin)?)?.ellipsoid;
            lhs.as_ellipsoid().expect("ellipsoid").deviation(&rhs)
        })());
        equivariance.record((|| {
            let a = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0)) + DMatrix::identity(2, 2) * 2.0;
            let ax = x.linear_image(&a)?;
            let dj = john(&ax)?.ellipsoid.deviation(&john(&x)?.ellipsoid.linear_image(&a)?)?;
            let dl = loewner(&ax)?.ellipsoid.deviation(&loewner(&x)?.ellipsoid.linear_image(&a)?)?;
            Ok(dj.max(dl))
        })());
        steiner.record((|| {
            let verts: Vec<DVector<f64>> = (0..3).map(|_| random_vector(2, rng, 2.0)).collect();
            let (u, v) = (&verts[1] - &verts[0], &verts[2] - &verts[0]);
            let area = 0.5 * (u[0] * v[1] - u[1] * v[0]).abs();
            if area < 0.1 {
                return Ok(0.0);
            }
            let e = john(&ConvexBody::from(Polytope::from_vertices(verts)?))?.ellipsoid;
            Ok((e.volume() / (PI * area / (3.0 * 3f64.sqrt())) - 1.0).abs())
        })());
    }
    vec![product, square, sandwich, duality, equivariance, steiner]
}

fn quantum_suite(rng: &mut ChaCha8Rng, hbar: f64) -> Vec<Check> {
    let mut round_trip = Check::new("ψ → blob → ψ recovers (A, B, z₀)", 1e-10);
    let mut blob = Check::new("G symmetric, symplectic, det G = 1", 1e-9);
    let mut schur = Check::new("G_XX·(G/G_XX) = I", 1e-9);
    let mut state_round_trip = Check::new("S then S⁻¹ restores the state", 1e-9);
    let mut standard = Check::new("standard form reproduces the state", 1e-9);
    let mut blob_cov = Check::new("blob of S·state is S·blob", 1e-8);
    for i in 0..100 {
        let n = dims(i);
        let psi = random_gaussian(n, rng, hbar);
        round_trip.record((|| {
            let psi = psi.clone()?;
            let back = blob_to_gaussian(&gaussian_to_blob(&psi)?)?;
            Ok(max_abs_diff(back.a(), psi.a())
                .max(max_abs_diff(back.b(), psi.b()))
                .max(linalg::vec_max_abs_diff(back.z0().as_vector(), psi.z0().as_vector())))
        })());
        blob.record((|| {
            let g = psi.clone()?.g_matrix();
            let j = j_matrix(n);
            Ok(linalg::asymmetry(&g)
                .max(max_abs_diff(&(g.transpose() * &j * &g), &j))
                .max((g.determinant() - 1.0).abs()))
        })());
        schur.record((|| {
            let q = gaussian_to_blob(&psi.clone()?)?;
            Ok(max_abs_diff(&q.section_projection_product()?, &DMatrix::identity(n, n)))
        })());
    }
    for i in 0..30 {
        let n = dims(i);
        let gen = RandomSymplectic::default();
        let state = (|| {
            let frame = random_frame(n, rng)?;
            let body = Ellipsoid::centered(random_spd(n, rng, 0.5, 2.0), hbar)?;
            let z0 = frame.ell.basis() * random_vector(n, rng, 1.0);
            let z0p = frame.ell_prime.basis() * random_vector(n, rng, 1.0);
            make_state(
                frame,
                body,
                PhaseVector::from_vector(z0)?,
                PhaseVector::from_vector(z0p)?,
                hbar,
            )
        })();
        let state = match state {
            Ok(s) => s,
            Err(e) => {
                for c in [&mut state_round_trip, &mut standard, &mut blob_cov] {
                    c.record(Err(e.clone()));
                }
                continue;
            }
        };
        let s = gen.sample(n, rng);
        let t = AffineSymplecticMap::new(s.clone(), PhaseVector::from_vector(random_vector(2 * n, rng, 1.0)).expect("even"))
            .expect("dimensions agree");
        state_round_trip.record((|| {
            let back = apply_symplectic(&apply_symplectic(&state, &t)?, &t.inverse())?;
            back.deviation(&state)
        })());
        standard.record((|| {
            let sf = standard_form(&state)?;
            let fid = lagpolar::quantum::fiducial_state(n, hbar)?;
            let shift = sf.s.apply(&PhaseVector::new(&sf.x0, &sf.p0)?)?;
            let rebuilt = apply_symplectic(&fid, &AffineSymplecticMap::new(sf.s.clone(), shift)?)?;
            rebuilt.set_deviation(&state)
        })());
        blob_cov.record((|| {
            let moved = state_to_blob(&apply_symplectic(&state, &t)?)?;
            let q = state_to_blob(&state)?;
            let s_inv = s.inverse();
            let g = s_inv.matrix().transpose() * q.g() * s_inv.matrix();
            let z0 = t.apply(q.z0())?;
            let expected = QuantumBlob::new(linalg::symmetrize(&g), z0, hbar)?;
            let scale = 1.0 + linalg::max_abs(expected.g());
            Ok((max_abs_diff(moved.g(), expected.g()) / scale)
                .max(linalg::vec_max_abs_diff(moved.z0().as_vector(), expected.z0().as_vector()) / scale))
        })());
    }
    vec![round_trip, blob, schur, state_round_trip, standard, blob_cov]
}

/// Trapezoid nodes on `[−L, L]`; the integrands decay to round-off well
/// inside the window, so the rule converges spectrally.
fn nodes(half_width: f64, count: usize) -> (Vec<f64>, f64) {
    let h = 2.0 * half_width / (count - 1) as f64;
    ((0..count).map(|k| -half_width + k as f64 * h).collect(), h)
}

pub const WIGNER_WINDOW: f64 = 12.0;
const WIGNER_NODES: usize = 321;

fn wigner_suite(rng: &mut ChaCha8Rng, hbar: f64) -> Vec<Check> {
    let mut norm = Check::new("∫W dz = 1 (quadrature)", 1e-8);
    let mut marg_x = Check::new("∫W dp = |ψ(x)|² (quadrature)", 1e-8);
    let mut marg_p = Check::new("∫W dx = |Fψ(p)|² (quadrature)", 1e-8);
    let mut cov: Vec<Check> = [
        "Ĵ: W(Ĵψ)(z) = Wψ(J⁻¹z)",
        "V̂_P: W(V̂ψ)(z) = Wψ(V⁻¹z)",
        "M̂_L: W(M̂ψ)(z) = Wψ(M⁻¹z)",
        "T̂: W(T̂ψ)(z) = Wψ(z − z₁)",
    ]
    .into_iter()
    .map(|name| Check::new(name, 1e-10))
    .collect();
    let (grid, h) = nodes(WIGNER_WINDOW * hbar.sqrt(), WIGNER_NODES);
    for _ in 0..4 {
        let psi = match random_gaussian(1, rng, hbar) {
            Ok(p) => p,
            Err(e) => {
                norm.record(Err(e));
                continue;
            }
        };
        let w = psi.wigner_function();
        let at = |x: f64, p: f64| w.eval(&PhaseVector::from_slice(&[x, p]).expect("two entries")).expect("n = 1");
        norm.record(Ok((grid.iter().map(|&x| grid.iter().map(|&p| at(x, p)).sum::<f64>()).sum::<f64>() * h * h - 1.0).abs()));
        for _ in 0..10 {
            let x = rng.random_range(-2.0..2.0) * hbar.sqrt();
            marg_x.record((|| {
                let integral: f64 = grid.iter().map(|&p| at(x, p)).sum::<f64>() * h;
                Ok((integral - psi.psi(&DVector::from_element(1, x))?.norm_sqr()).abs())
            })());
            let p = rng.random_range(-2.0..2.0) * hbar.sqrt();
            marg_p.record((|| {
                let integral: f64 = grid.iter().map(|&x| at(x, p)).sum::<f64>() * h;
                // Fψ(p) = (2πℏ)^{-1/2} ∫ e^{−ipx/ℏ} ψ(x) dx.
                let (mut re, mut im) = (0.0, 0.0);
                for &x in &grid {
                    let v = psi.psi(&DVector::from_element(1, x))?;
                    let (c, s) = ((p * x / hbar).cos(), -(p * x / hbar).sin());
                    re += v.re * c - v.im * s;
                    im += v.re * s + v.im * c;
                }
                let f2 = (re * re + im * im) * h * h / (2.0 * PI * hbar);
                Ok((integral - f2).abs())
            })());
        }
        let generators = [
            Metaplectic::J,
            Metaplectic::Shear(DMatrix::from_element(1, 1, rng.random_range(-1.0..1.0))),
            Metaplectic::Dilation(DMatrix::from_element(1, 1, rng.random_range(0.5..2.0))),
            Metaplectic::Displace(PhaseVector::from_vector(random_vector(2, rng, 1.0)).expect("even")),
        ];
        for (g, check) in generators.iter().zip(cov.iter_mut()) {
            let points: Vec<DVector<f64>> = (0..25).map(|_| random_vector(2, rng, 3.0)).collect();
            let images = metaplectic_apply(g, &psi)
                .map(|m| m.wigner_function())
                .and_then(|m| Ok((m, g.projection(1)?.inverse())));
            let (moved, t_inv) = match images {
                Ok(v) => v,
                Err(e) => {
                    check.record(Err(e));
                    continue;
                }
            };
            for z in points {
                check.record((|| {
                    let z = PhaseVector::from_vector(z)?;
                    Ok((moved.eval(&z)? - w.eval(&t_inv.apply(&z)?)?).abs())
                })());
            }
        }
    }
    let mut out = vec![norm, marg_x, marg_p];
    out.append(&mut cov);
    out
}
