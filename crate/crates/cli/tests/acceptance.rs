//! Acceptance run: one PASS/FAIL line per criterion, with the measured
//! residual next to its pinned tolerance. Values that have a closed form or a
//! brute-force oracle are recomputed here, independently of the library.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use lagpolar::convex::{ConvexBody, Ellipsoid, Polytope, ProductBody};
use lagpolar::extremal::{john, john_of_polytope};
use lagpolar::polar::{blaschke_santalo_product, polar_about, polar_dual, santalo_point, CenterPolicy};
use lagpolar::quantum::{
    blob_to_gaussian, gaussian_to_blob, make_state, metaplectic_apply, state_to_blob, wigner,
    GaussianWavepacket, Metaplectic, QuantumBlob,
};
use lagpolar::lagrangian::canonical_frame;
use lagpolar::symplectic::{symplectic_inverse, PhaseVector, RandomSymplectic};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One measured quantity against its tolerance.
struct Sub {
    what: String,
    value: f64,
    tol: f64,
}

impl Sub {
    fn new(what: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            what: what.into(),
            value,
            tol,
        }
    }

    fn ok(&self) -> bool {
        self.value <= self.tol
    }
}

struct Report {
    failures: usize,
}

impl Report {
    fn criterion(&mut self, id: usize, title: &str, subs: Vec<Sub>) {
        let pass = subs.iter().all(Sub::ok);
        if !pass {
            self.failures += 1;
        }
        println!("{} [{id:>2}] {title}", if pass { "PASS" } else { "FAIL" });
        for s in subs {
            println!(
                "         {} {}: {:.3e} (tol {:.0e})",
                if s.ok() { "ok  " } else { "FAIL" },
                s.what,
                s.value,
                s.tol
            );
        }
    }
}

// Independent helpers.

fn j(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, n + i)] = 1.0;
        m[(n + i, i)] = -1.0;
    }
    m
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn vmax(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn spd(n: usize, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> DMatrix<f64> {
    let q = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)).qr().q();
    let d = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| rng.random_range(lo..hi)));
    let m = &q * d * q.transpose();
    (&m + m.transpose()) * 0.5
}

fn sym(n: usize, rng: &mut ChaCha8Rng, r: f64) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-r..r));
    (&m + m.transpose()) * 0.5
}

fn vector(d: usize, rng: &mut ChaCha8Rng, r: f64) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.random_range(-r..r))
}

fn shoelace(pts: &[[f64; 2]]) -> f64 {
    let k = pts.len();
    (0..k)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % k]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

/// Symmetric polygon: `±v_i` at sorted angles in `[0, π)`, in boundary order.
fn symmetric_polygon(rng: &mut ChaCha8Rng, c: [f64; 2]) -> Vec<[f64; 2]> {
    let k = rng.random_range(2..=6);
    let mut t: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..PI)).collect();
    t.sort_by(f64::total_cmp);
    let r: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..1.5)).collect();
    let half: Vec<[f64; 2]> = t.iter().zip(&r).map(|(t, r)| [r * t.cos(), r * t.sin()]).collect();
    let mut ring: Vec<[f64; 2]> = half.iter().map(|v| [c[0] + v[0], c[1] + v[1]]).collect();
    ring.extend(half.iter().map(|v| [c[0] - v[0], c[1] - v[1]]));
    // Drop points that are not extreme (a vertex inside the hull of the others).
    let convex = |ring: &Vec<[f64; 2]>| {
        let k = ring.len();
        (0..k)
            .filter(|&i| {
                let (a, b, c) = (ring[(i + k - 1) % k], ring[i], ring[(i + 1) % k]);
                (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > 1e-12
            })
            .map(|i| ring[i])
            .collect::<Vec<_>>()
    };
    let mut ring = ring;
    loop {
        let next = convex(&ring);
        if next.len() == ring.len() {
            return ring;
        }
        ring = next;
    }
}

/// Polar about the origin of a convex polygon containing it, in boundary
/// order: each edge `[a, b]` gives the vertex `y` with `y·a = y·b = ℏ`.
fn polygon_polar(ring: &[[f64; 2]], hbar: f64) -> Vec<[f64; 2]> {
    let k = ring.len();
    (0..k)
        .map(|i| {
            let (a, b) = (ring[i], ring[(i + 1) % k]);
            let det = a[0] * b[1] - a[1] * b[0];
            [hbar * (b[1] - a[1]) / det, hbar * (a[0] - b[0]) / det]
        })
        .collect()
}

fn to_polytope(ring: &[[f64; 2]]) -> Polytope {
    Polytope::from_vertices(ring.iter().map(|v| DVector::from_column_slice(v)).collect()).unwrap()
}

/// Gaussian with width `A + iB` centered at `(x₀, p₀)`, as `(re, im)`.
fn psi(a: f64, b: f64, x0: f64, p0: f64, hbar: f64, x: f64) -> (f64, f64) {
    let y = x - x0;
    let modulus = (a / (PI * hbar)).powf(0.25) * (-a * y * y / (2.0 * hbar)).exp();
    let phase = -b * y * y / (2.0 * hbar) + p0 * (x - x0 / 2.0) / hbar;
    (modulus * phase.cos(), modulus * phase.sin())
}

fn nodes(half: f64, count: usize) -> (Vec<f64>, f64) {
    let h = 2.0 * half / (count - 1) as f64;
    ((0..count).map(|k| -half + k as f64 * h).collect(), h)
}

// Criteria.

fn symplectic_algebra(r: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let gen = RandomSymplectic::default();
    let (mut ident, mut inv, mut det) = (0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..200 {
        let n = 1 + i % 3;
        let s = gen.sample(n, &mut rng);
        let m = s.matrix();
        let jn = j(n);
        ident = ident.max(max_abs(&(m.transpose() * &jn * m - &jn)));
        // [[Dᵀ, −Bᵀ], [−Cᵀ, Aᵀ]] from the blocks.
        let blk = |r0, c0| m.view((r0, c0), (n, n)).transpose();
        let mut expected = DMatrix::zeros(2 * n, 2 * n);
        expected.view_mut((0, 0), (n, n)).copy_from(&blk(n, n));
        expected.view_mut((0, n), (n, n)).copy_from(&(-blk(0, n)));
        expected.view_mut((n, 0), (n, n)).copy_from(&(-blk(n, 0)));
        expected.view_mut((n, n), (n, n)).copy_from(&blk(0, 0));
        let lib = symplectic_inverse(m, 1e-9).unwrap();
        let eye = DMatrix::identity(2 * n, 2 * n);
        inv = inv
            .max(max_abs(&(lib.matrix() - &expected)))
            .max(max_abs(&(&expected * m - &eye)));
        det = det.max((m.clone().lu().determinant() - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    r.criterion(
        1,
        "200 random symplectic matrices (n = 1, 2, 3)",
        vec![
            Sub::new("max ‖SᵀJS − J‖", ident, 1e-9),
            Sub::new("max inverse-formula residual", inv, 1e-9),
            Sub::new("max |det S − 1|", det, 1e-9),
            Sub::new("runtime in seconds", secs, 5.0),
        ],
    );
}

fn worked_example(r: &mut Report) {
    let (hbar, a) = (1.0, 1.0);
    let frame = canonical_frame(1).unwrap();
    let body = Ellipsoid::centered(DMatrix::from_element(1, 1, a), hbar).unwrap();
    let state = make_state(frame, body, PhaseVector::zeros(1), PhaseVector::zeros(1), hbar).unwrap();
    // Corners of the product from its support points.
    let prod = state.product().unwrap();
    let corners: Vec<[f64; 2]> = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]
        .iter()
        .map(|d| {
            let p = prod.support_point(&DVector::from_column_slice(d)).unwrap();
            [p[0], p[1]]
        })
        .collect();
    let area = shoelace(&corners);
    let blob = state_to_blob(&state).unwrap();
    let closed = PI * hbar / blob.g().determinant().sqrt();
    let generic = john_of_polytope(&to_polytope(&corners)).unwrap().ellipsoid.volume();
    r.criterion(
        2,
        "n = 1 worked example (ℏ = 1, a = 1)",
        vec![
            Sub::new(format!("|parallelogram area − 4| (area {area})"), (area - 4.0).abs(), 0.0),
            Sub::new("|closed-form John area − π|", (closed - PI).abs(), 1e-9),
            Sub::new("|generic 2D John area − π|", (generic - PI).abs(), 1e-5),
        ],
    );
}

fn john_of_ball_product(r: &mut Report) {
    let ball = || ConvexBody::from(Ellipsoid::centered(DMatrix::identity(2, 2), 1.0).unwrap());
    let x = ConvexBody::from(ProductBody::new(vec![ball(), ball()]).unwrap());
    let e = john(&x).unwrap().ellipsoid;
    let dev = max_abs(&(e.normalized_shape() - DMatrix::<f64>::identity(4, 4))).max(vmax(e.center()));
    r.criterion(
        3,
        "John(B²_X(1) × B²_P(1)) = B⁴(1)",
        vec![Sub::new("shape-matrix deviation", dev, 1e-5)],
    );
}

fn shifted_disk_polar(r: &mut Report) {
    let a: f64 = 0.5;
    let k = 1.0 - a * a;
    let disk = ConvexBody::from(Ellipsoid::ball(DVector::from_column_slice(&[a, 0.0]), 1.0, 1.0).unwrap());
    let polar = polar_about(&disk, &DVector::zeros(2), 1.0).unwrap();
    let e = polar.as_ellipsoid().unwrap();
    // (1 − a²)²(p_x + a/(1 − a²))² + (1 − a²)p_y² ≤ 1.
    let shape = DMatrix::from_diagonal(&DVector::from_column_slice(&[k * k, k]));
    let center = DVector::from_column_slice(&[-a / k, 0.0]);
    let coeff = max_abs(&(e.normalized_shape() - shape)).max(vmax(&(e.center() - center)));
    let area = e.volume();
    // The ellipse with these coefficients has semi-axes 1/k and 1/√k.
    let area_of_coefficients = PI / k.powf(1.5);
    let claimed = PI / k;
    r.criterion(
        4,
        "origin-centered polar of B²((1/2, 0), 1)",
        vec![
            Sub::new("coefficient deviation", coeff, 1e-9),
            Sub::new(
                format!("|area − π/(1 − a²)| (area {area:.6}, π/(1 − a²) = {claimed:.6})"),
                (area - claimed).abs(),
                1e-6,
            ),
            Sub::new(
                format!("|area − area implied by the coefficients| ({area_of_coefficients:.6})"),
                (area - area_of_coefficients).abs(),
                1e-9,
            ),
        ],
    );
}

fn blaschke_santalo(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pi2 = PI * PI;
    let mut ell = 0.0_f64;
    for _ in 0..50 {
        let e = ConvexBody::from(Ellipsoid::centered(spd(2, &mut rng, 0.2, 5.0), 1.0).unwrap());
        let p = blaschke_santalo_product(&e, 1.0, &CenterPolicy::Centroid).unwrap().product;
        ell = ell.max((p / pi2 - 1.0).abs());
    }
    let square = ConvexBody::from(Polytope::cube(2, 1.0).unwrap());
    let sq = blaschke_santalo_product(&square, 1.0, &CenterPolicy::Centroid).unwrap().product;
    let (mut excess, mut oracle) = (0.0_f64, 0.0_f64);
    for _ in 0..50 {
        let ring = symmetric_polygon(&mut rng, [0.0, 0.0]);
        let expected = shoelace(&ring) * shoelace(&polygon_polar(&ring, 1.0));
        let x = ConvexBody::from(to_polytope(&ring));
        let p = blaschke_santalo_product(&x, 1.0, &CenterPolicy::Centroid).unwrap().product;
        oracle = oracle.max((p - expected).abs() / expected);
        excess = excess.max((p / pi2 - 1.0).max(0.0));
    }
    r.criterion(
        5,
        "Blaschke–Santaló products",
        vec![
            Sub::new("50 ellipsoids: max |product/π² − 1|", ell, 1e-6),
            Sub::new(format!("square: |product − 8| (product {sq})"), (sq - 8.0).abs(), 0.0),
            Sub::new("50 symmetric polygons: max excess of product/π² over 1", excess, 1e-6),
            Sub::new("50 symmetric polygons: relative gap to shoelace oracle", oracle, 1e-9),
        ],
    );
}

fn bipolarity(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let origin = |d| CenterPolicy::Point(DVector::zeros(d));
    let mut ell = 0.0_f64;
    for i in 0..100 {
        let n = 1 + i % 3;
        let e = Ellipsoid::centered(spd(n, &mut rng, 0.2, 5.0), 1.0).unwrap();
        let x = ConvexBody::from(e.clone());
        let twice = polar_dual(&polar_dual(&x, 1.0, &origin(n)).unwrap(), 1.0, &origin(n)).unwrap();
        ell = ell.max(max_abs(&(twice.as_ellipsoid().unwrap().normalized_shape() - e.normalized_shape())));
    }
    let mut poly = 0.0_f64;
    for _ in 0..50 {
        let ring = symmetric_polygon(&mut rng, [0.0, 0.0]);
        let p = to_polytope(&ring);
        let x = ConvexBody::from(p.clone());
        let twice = polar_dual(&polar_dual(&x, 1.0, &origin(2)).unwrap(), 1.0, &origin(2)).unwrap();
        poly = poly.max(twice.as_polytope().unwrap().vertex_hausdorff(&p));
    }
    r.criterion(
        6,
        "bipolarity (X^ℏ)^ℏ = X",
        vec![
            Sub::new("100 ellipsoids: shape deviation", ell, 1e-9),
            Sub::new("50 polygons: vertex Hausdorff distance", poly, 1e-8),
        ],
    );
}

fn gaussian_round_trip(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut trip, mut symp, mut det, mut formula) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..100 {
        let n = 1 + i % 3;
        let (a, b) = (spd(n, &mut rng, 0.3, 3.0), sym(n, &mut rng, 1.0));
        let z0 = PhaseVector::from_vector(vector(2 * n, &mut rng, 2.0)).unwrap();
        let psi = GaussianWavepacket::new(a.clone(), b.clone(), z0.clone(), 1.0).unwrap();
        let q = gaussian_to_blob(&psi).unwrap();
        let g = q.g();
        let jn = j(n);
        symp = symp.max(max_abs(&(g.transpose() * &jn * g - &jn)));
        det = det.max((g.clone().lu().determinant() - 1.0).abs());
        // G = [[A + BA⁻¹B, BA⁻¹], [A⁻¹B, A⁻¹]].
        let ai = a.clone().try_inverse().unwrap();
        let mut expected = DMatrix::zeros(2 * n, 2 * n);
        expected.view_mut((0, 0), (n, n)).copy_from(&(&a + &b * &ai * &b));
        expected.view_mut((0, n), (n, n)).copy_from(&(&b * &ai));
        expected.view_mut((n, 0), (n, n)).copy_from(&(&ai * &b));
        expected.view_mut((n, n), (n, n)).copy_from(&ai);
        formula = formula.max(max_abs(&(g - &expected)) / (1.0 + max_abs(&expected)));
        let back = blob_to_gaussian(&q).unwrap();
        trip = trip
            .max(max_abs(&(back.a() - &a)))
            .max(max_abs(&(back.b() - &b)))
            .max(vmax(&(back.z0().as_vector() - z0.as_vector())));
    }
    r.criterion(
        7,
        "Gaussian ↔ blob round trip (100 instances, n = 1, 2, 3)",
        vec![
            Sub::new("max deviation of recovered (A, B, z₀)", trip, 1e-10),
            Sub::new("max ‖GᵀJG − J‖", symp, 1e-9),
            Sub::new("max |det G − 1|", det, 1e-9),
            Sub::new("max relative gap to the block formula for G", formula, 1e-12),
        ],
    );
}

fn wigner_checks(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut norm, mut mx, mut mp) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut cov = [0.0_f64; 4];
    for &hbar in &[1.0, 0.5] {
        let (grid, h) = nodes(12.0 * f64::sqrt(hbar), 481);
        for _ in 0..3 {
            let a = rng.random_range(0.5..2.0);
            let b = rng.random_range(-0.5..0.5);
            let (x0, p0) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let g = GaussianWavepacket::new(
                DMatrix::from_element(1, 1, a),
                DMatrix::from_element(1, 1, b),
                PhaseVector::from_slice(&[x0, p0]).unwrap(),
                hbar,
            )
            .unwrap();
            let w = |x: f64, p: f64| wigner(&g, &PhaseVector::from_slice(&[x, p]).unwrap()).unwrap();
            let rows: Vec<Vec<f64>> = grid.iter().map(|&x| grid.iter().map(|&p| w(x, p)).collect()).collect();
            let total: f64 = rows.iter().flatten().sum::<f64>() * h * h;
            norm = norm.max((total - 1.0).abs());
            for (ix, &x) in grid.iter().enumerate().step_by(24) {
                let (re, im) = psi(a, b, x0, p0, hbar, x);
                let marginal: f64 = rows[ix].iter().sum::<f64>() * h;
                mx = mx.max((marginal - (re * re + im * im)).abs());
            }
            for (ip, &p) in grid.iter().enumerate().step_by(24) {
                let marginal: f64 = rows.iter().map(|row| row[ip]).sum::<f64>() * h;
                // |Fψ(p)|² with Fψ(p) = (2πℏ)^{-1/2} ∫ e^{−ipx/ℏ} ψ(x) dx.
                let (mut fr, mut fi) = (0.0, 0.0);
                for &x in &grid {
                    let (re, im) = psi(a, b, x0, p0, hbar, x);
                    let (c, s) = ((p * x / hbar).cos(), -(p * x / hbar).sin());
                    fr += re * c - im * s;
                    fi += re * s + im * c;
                }
                let density = (fr * fr + fi * fi) * h * h / (2.0 * PI * hbar);
                mp = mp.max((marginal - density).abs());
            }
            // S⁻¹ for each generator, written out by hand.
            let (pv, lv) = (rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0));
            let (z1x, z1p) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let generators: [(Metaplectic, Box<dyn Fn(f64, f64) -> (f64, f64)>); 4] = [
                (Metaplectic::J, Box::new(|x, p| (-p, x))),
                (Metaplectic::Shear(DMatrix::from_element(1, 1, pv)), Box::new(move |x, p| (x, p + pv * x))),
                (Metaplectic::Dilation(DMatrix::from_element(1, 1, lv)), Box::new(move |x, p| (lv * x, p / lv))),
                (
                    Metaplectic::Displace(PhaseVector::from_slice(&[z1x, z1p]).unwrap()),
                    Box::new(move |x, p| (x - z1x, p - z1p)),
                ),
            ];
            for (k, (m, inverse)) in generators.iter().enumerate() {
                let moved = metaplectic_apply(m, &g).unwrap();
                for _ in 0..17 {
                    let (x, p) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
                    let (u, v) = inverse(x, p);
                    let lhs = wigner(&moved, &PhaseVector::from_slice(&[x, p]).unwrap()).unwrap();
                    cov[k] = cov[k].max((lhs - w(u, v)).abs());
                }
            }
        }
    }
    r.criterion(
        8,
        "Wigner function (n = 1, quadrature on [−12√ℏ, 12√ℏ]², ℏ = 1 and 1/2)",
        vec![
            Sub::new("|∫W dz − 1|", norm, 1e-8),
            Sub::new("max |∫W dp − |ψ(x)|²|", mx, 1e-8),
            Sub::new("max |∫W dx − |Fψ(p)|²|", mp, 1e-8),
            Sub::new("Ĵ: max |W(Ĵψ)(z) − Wψ(J⁻¹z)| over 102 points", cov[0], 1e-10),
            Sub::new("V̂_P: max |W(V̂ψ)(z) − Wψ(V⁻¹z)| over 102 points", cov[1], 1e-10),
            Sub::new("M̂_L: max |W(M̂ψ)(z) − Wψ(M⁻¹z)| over 102 points", cov[2], 1e-10),
            Sub::new("T̂: max |W(T̂ψ)(z) − Wψ(z − z₁)| over 102 points", cov[3], 1e-10),
        ],
    );
}

fn schur_complement(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let gen = RandomSymplectic::default();
    let (mut schur, mut sets) = (0.0_f64, 0.0_f64);
    for i in 0..100 {
        let n = 1 + i % 3;
        let s = gen.sample(n, &mut rng);
        let q = QuantumBlob::from_symplectic(&s, PhaseVector::zeros(n), 1.0).unwrap();
        let g = q.g();
        let xx = g.view((0, 0), (n, n)).into_owned();
        let xp = g.view((0, n), (n, n)).into_owned();
        let px = g.view((n, 0), (n, n)).into_owned();
        let pp = g.view((n, n), (n, n)).into_owned();
        let xx_inv = xx.clone().try_inverse().unwrap();
        let prod = &xx * (&pp - &px * &xx_inv * &xp);
        schur = schur.max(max_abs(&(prod - DMatrix::<f64>::identity(n, n))));
        // polar(Q ∩ ℓ_X) has shape G_XX⁻¹; Π_{ℓ_P}Q has dispersion (G⁻¹)_PP.
        let section = ConvexBody::from(Ellipsoid::centered(xx.clone(), 1.0).unwrap());
        let polar = polar_about(&section, &DVector::zeros(n), 1.0).unwrap();
        let g_inv = g.clone().try_inverse().unwrap();
        let projection_shape = g_inv.view((n, n), (n, n)).into_owned().try_inverse().unwrap();
        let scale = 1.0 + max_abs(&projection_shape);
        sets = sets.max(max_abs(&(polar.as_ellipsoid().unwrap().normalized_shape() - projection_shape)) / scale);
    }
    r.criterion(
        9,
        "blob section/projection duality (100 random blobs)",
        vec![
            Sub::new("max ‖G_XX·(G/G_XX) − I‖", schur, 1e-9),
            Sub::new("max relative gap polar(Q ∩ ℓ_X) vs Π_{ℓ_P}Q", sets, 1e-9),
        ],
    );
}

fn santalo_points(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut sym = 0.0_f64;
    for _ in 0..10 {
        let c = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let ring = symmetric_polygon(&mut rng, c);
        let sp = santalo_point(&ConvexBody::from(to_polytope(&ring)), 1.0).unwrap();
        sym = sym.max((sp.point[0] - c[0]).abs().max((sp.point[1] - c[1]).abs()));
        let e = Ellipsoid::new(DVector::from_column_slice(&c), spd(2, &mut rng, 0.5, 2.0), 1.0).unwrap();
        let sp = santalo_point(&ConvexBody::from(e), 1.0).unwrap();
        sym = sym.max((sp.point[0] - c[0]).abs().max((sp.point[1] - c[1]).abs()));
    }
    // Brute force over the 1e-3 grid: the polar about y of {x ≥ 0, y ≥ 0,
    // x + y ≤ 1} has vertices a_i/(b_i − a_i·y).
    let polar_area = |x: f64, y: f64| {
        let v = [[-1.0 / x, 0.0], [0.0, -1.0 / y], [1.0 / (1.0 - x - y), 1.0 / (1.0 - x - y)]];
        shoelace(&v)
    };
    let step = 1e-3;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 1..1000 {
        for k in 1..(1000 - i) {
            let (x, y) = (i as f64 * step, k as f64 * step);
            let v = polar_area(x, y);
            if v < best.0 {
                best = (v, x, y);
            }
        }
    }
    let tri = Polytope::from_vertices(vec![
        DVector::from_column_slice(&[0.0, 0.0]),
        DVector::from_column_slice(&[1.0, 0.0]),
        DVector::from_column_slice(&[0.0, 1.0]),
    ])
    .unwrap();
    let sp = santalo_point(&ConvexBody::from(tri), 1.0).unwrap();
    let gap = (sp.point[0] - best.1).abs().max((sp.point[1] - best.2).abs());
    r.criterion(
        10,
        "Santaló point",
        vec![
            Sub::new("symmetric bodies: max distance to the center", sym, 1e-4),
            Sub::new(
                format!("triangle: gap to 1e-3 grid minimiser ({:.3}, {:.3})", best.1, best.2),
                gap,
                2e-3,
            ),
        ],
    );
}

fn full_verify(r: &mut Report) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_lagpolar")).arg("verify").output().unwrap();
    let secs = start.elapsed();
    let code = out.status.code().unwrap_or(-1);
    r.criterion(
        11,
        "full `lagpolar verify` run",
        vec![
            Sub::new(format!("exit code ({code})"), code.unsigned_abs() as f64, 0.0),
            Sub::new("runtime in seconds", secs.as_secs_f64(), Duration::from_secs(60).as_secs_f64()),
        ],
    );
}

fn main() {
    let mut r = Report { failures: 0 };
    symplectic_algebra(&mut r);
    worked_example(&mut r);
    john_of_ball_product(&mut r);
    shifted_disk_polar(&mut r);
    blaschke_santalo(&mut r);
    bipolarity(&mut r);
    gaussian_round_trip(&mut r);
    wigner_checks(&mut r);
    schur_complement(&mut r);
    santalo_points(&mut r);
    full_verify(&mut r);
    println!("{} of 11 criteria passed", 11 - r.failures);
    if r.failures > 0 {
        std::process::exit(1);
    }
}
