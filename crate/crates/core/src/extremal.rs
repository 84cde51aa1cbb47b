//! John (maximum-volume inscribed) and Löwner (minimum-volume enclosing)
//! ellipsoids.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convex::{ConvexBody, Ellipsoid, Polytope, ProductBody};
use crate::linalg;
use crate::polar::{polytope_polar_about, TOL_SYMMETRY};
use crate::{Error, Result};

/// Optimality gap at which the Löwner iteration stops; the volume of the
/// returned ellipsoid exceeds the optimum by a factor at most `(1 + gap)^{d/2}`.
pub const LOEWNER_GAP: f64 = 1e-10;
pub const LOEWNER_MAX_ITERATIONS: usize = 100_000;
/// Directions sampled when an inclusion can only be checked pointwise.
pub const CERTIFICATE_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremalKind {
    John,
    Loewner,
}

impl ExtremalKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExtremalKind::John => "john",
            ExtremalKind::Loewner => "loewner",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub volume: f64,
    /// John: `max gauge_X(y) − 1` over boundary points `y` of the ellipsoid.
    /// Löwner: `max gauge_E(x) − 1` over extreme points `x` of the body.
    /// Non-positive values mean the inclusion holds.
    pub inclusion_residual: f64,
    /// Whether the residual was computed exactly or from sampled points.
    pub sampled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalResult {
    pub ellipsoid: Ellipsoid,
    pub kind: ExtremalKind,
    pub certificate: Certificate,
    pub iterations: usize,
}

fn ellipsoid_from_quadric(center: DVector<f64>, q: DMatrix<f64>) -> Result<Ellipsoid> {
    Ellipsoid::new(center, linalg::symmetrize(&q), 1.0)
}

/// Minimum-volume ellipsoid enclosing `points`.
///
/// Khachiyan's multiplicative reweighting with Wolfe–Atwood away steps. With
/// `centered = true` the points must be symmetric about the origin (the
/// caller passes `±p`) and the ellipsoid is centered there.
pub fn loewner_of_points(points: &[DVector<f64>], centered: bool) -> Result<(Ellipsoid, usize)> {
    let d = points.first().ok_or(Error::Degenerate("no points".into()))?.len();
    let lift: Vec<DVector<f64>> = if centered {
        points.to_vec()
    } else {
        points
            .iter()
            .map(|p| {
                let mut q = DVector::zeros(d + 1);
                q.rows_mut(0, d).copy_from(p);
                q[d] = 1.0;
                q
            })
            .collect()
    };
    let k = lift[0].len() as f64;
    let m = lift.len();
    let mut u = vec![1.0 / m as f64; m];

    let moment = |u: &[f64]| {
        let mut x = DMatrix::zeros(lift[0].len(), lift[0].len());
        for (w, q) in u.iter().zip(&lift) {
            x += q * q.transpose() * *w;
        }
        x
    };

    let mut iterations = 0;
    loop {
        let x = moment(&u);
        let x_inv = linalg::spd_inverse(&x).map_err(|_| Error::Degenerate("points lie in a hyperplane".into()))?;
        let scores: Vec<f64> = lift.iter().map(|q| q.dot(&(&x_inv * q))).collect();
        let (j, &mj) = scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        let (a, &ma) = scores
            .iter()
            .enumerate()
            .filter(|(i, _)| u[*i] > 0.0)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("some weight is positive");
        let gap = (mj / k - 1.0).max(1.0 - ma / k);
        if gap <= LOEWNER_GAP {
            break;
        }
        if iterations >= LOEWNER_MAX_ITERATIONS {
            if gap > 1e-6 {
                return Err(Error::NoConvergence {
                    solver: "loewner",
                    iterations,
                });
            }
            break;
        }
        iterations += 1;
        if mj - k >= k - ma {
            let beta = (mj - k) / (k * (mj - 1.0));
            for w in u.iter_mut() {
                *w *= 1.0 - beta;
            }
            u[j] += beta;
        } else {
            // Away step: move weight off the least active point.
            let drop_all = u[a] / (1.0 - u[a]).max(f64::EPSILON);
            let beta = if ma > 1.0 { ((k - ma) / (k * (ma - 1.0))).min(drop_all) } else { drop_all };
            for w in u.iter_mut() {
                *w *= 1.0 + beta;
            }
            u[a] -= beta;
            u[a] = u[a].max(0.0);
        }
    }

    let dd = d as f64;
    if centered {
        let x = moment(&u);
        let q = linalg::spd_inverse(&(x * dd))?;
        Ok((ellipsoid_from_quadric(DVector::zeros(d), q)?, iterations))
    } else {
        let c = points.iter().zip(&u).fold(DVector::zeros(d), |acc, (p, w)| acc + p * *w);
        let mut s = DMatrix::zeros(d, d);
        for (p, w) in points.iter().zip(&u) {
            s += p * p.transpose() * *w;
        }
        s -= &c * c.transpose();
        let q = linalg::spd_inverse(&(s * dd)).map_err(|_| Error::Degenerate("flat point set".into()))?;
        Ok((ellipsoid_from_quadric(c, q)?, iterations))
    }
}

fn product_vertices(p: &ProductBody) -> Result<Vec<DVector<f64>>> {
    let mut combos: Vec<Vec<DVector<f64>>> = vec![Vec::new()];
    for f in p.factors() {
        let verts = match f {
            ConvexBody::Polytope(q) => q.vertices().to_vec(),
            _ => {
                return Err(Error::Unsupported(
                    "Loewner ellipsoid of a product with non-polytope factors".into(),
                ))
            }
        };
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                verts.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect();
    }
    Ok(combos
        .into_iter()
        .map(|parts| {
            let stacked = DVector::from_iterator(p.dim(), parts.iter().flat_map(|v| v.iter().cloned()));
            p.transform() * stacked + p.offset()
        })
        .collect())
}

fn extreme_points(x: &ConvexBody) -> Result<Vec<DVector<f64>>> {
    match x {
        ConvexBody::Polytope(p) => Ok(p.vertices().to_vec()),
        ConvexBody::Product(p) => product_vertices(p),
        ConvexBody::Ellipsoid(_) => unreachable!("handled by the caller"),
    }
}

/// Minimum-volume enclosing ellipsoid.
pub fn loewner(x: &ConvexBody) -> Result<ExtremalResult> {
    if let ConvexBody::Ellipsoid(e) = x {
        return Ok(ExtremalResult {
            certificate: Certificate {
                volume: e.volume(),
                inclusion_residual: 0.0,
                sampled: false,
            },
            ellipsoid: e.clone(),
            kind: ExtremalKind::Loewner,
            iterations: 0,
        });
    }
    let points = extreme_points(x)?;
    let (ellipsoid, iterations) = match x.symmetry_center(TOL_SYMMETRY) {
        Some(c) => {
            let shifted: Vec<DVector<f64>> = points.iter().map(|p| p - &c).collect();
            let (e, it) = loewner_of_points(&shifted, true)?;
            (e.translate(&c)?, it)
        }
        None => loewner_of_points(&points, false)?,
    };
    let mut residual = f64::NEG_INFINITY;
    for p in &points {
        residual = residual.max(ellipsoid.gauge(p)? - 1.0);
    }
    Ok(ExtremalResult {
        certificate: Certificate {
            volume: ellipsoid.volume(),
            inclusion_residual: residual,
            sampled: false,
        },
        ellipsoid,
        kind: ExtremalKind::Loewner,
        iterations,
    })
}

/// Points whose convex hull is `(X − c)°` (polar with `ℏ = 1`), for a body
/// centrally symmetric about `c`.
///
/// For a product `T(X₁ × … × X_k) + o` the polar is `T⁻ᵀ conv(∪ Xᵢ°)`, each
/// `Xᵢ°` embedded in its own block. Ellipsoidal `Xᵢ°` contribute the images
/// of `±e₁, …, ±e_{dᵢ}` under `(Xᵢ° dispersion)^{1/2}`: this finite set has
/// the same Löwner ellipsoid as the full factor, because the blockwise
/// signed-permutation symmetry forces the enclosing quadric to be a multiple
/// of the identity on each ball block.
fn polar_generators(x: &ConvexBody, c: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    match x {
        ConvexBody::Ellipsoid(e) => {
            let r = linalg::sym_sqrt(&linalg::spd_inverse(&e.dispersion())?);
            let d = e.dim();
            let mut pts = Vec::with_capacity(2 * d);
            for i in 0..d {
                let col = r.column(i).into_owned();
                pts.push(col.clone());
                pts.push(-col);
            }
            Ok(pts)
        }
        ConvexBody::Polytope(p) => Ok(polytope_polar_about(p, c, 1.0)?.vertices().to_vec()),
        ConvexBody::Product(p) => {
            let t_inv = linalg::inverse(p.transform())?;
            let pulled = &t_inv * (c - p.offset());
            let t_inv_t = t_inv.transpose();
            let mut pts = Vec::new();
            let mut at = 0;
            for f in p.factors() {
                let fd = f.dim();
                let fc = pulled.rows(at, fd).into_owned();
                for g in polar_generators(f, &fc)? {
                    let mut full = DVector::zeros(p.dim());
                    full.rows_mut(at, fd).copy_from(&g);
                    pts.push(&t_inv_t * full);
                }
                at += fd;
            }
            Ok(pts)
        }
    }
}

fn boundary_directions(d: usize, count: usize) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x10_4e);
    let mut dirs = Vec::with_capacity(count + 2 * d);
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(d);
            e[i] = s;
            dirs.push(e);
        }
    }
    while dirs.len() < count + 2 * d {
        let w = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let n = w.norm();
        if n > 1e-3 && n <= 1.0 {
            dirs.push(w / n);
        }
    }
    dirs
}

/// `max gauge_X(y) − 1` for `y` on the boundary of `e`; exact for polytopes.
fn inscribed_residual(x: &ConvexBody, e: &Ellipsoid) -> Result<(f64, bool)> {
    match x {
        ConvexBody::Polytope(p) => {
            let mut worst = f64::NEG_INFINITY;
            for h in p.halfspaces() {
                worst = worst.max(e.support(&h.a)? - h.b);
            }
            Ok((worst, false))
        }
        ConvexBody::Ellipsoid(outer) => {
            // Exact: largest generalized eigenvalue of the outer quadric on e.
            let r = linalg::sym_sqrt(&e.dispersion());
            let mut worst = f64::NEG_INFINITY;
            for w in boundary_directions(e.dim(), CERTIFICATE_SAMPLES) {
                worst = worst.max(outer.gauge(&(e.center() + &r * w))? - 1.0);
            }
            Ok((worst, true))
        }
        ConvexBody::Product(_) => {
            let r = linalg::sym_sqrt(&e.dispersion());
            let mut worst = f64::NEG_INFINITY;
            for w in boundary_directions(e.dim(), CERTIFICATE_SAMPLES) {
                worst = worst.max(x.gauge_about(&(e.center() + &r * w), e.center())? - 1.0);
            }
            Ok((worst, true))
        }
    }
}

/// Maximum-volume inscribed ellipsoid.
///
/// Ellipsoids return themselves. Centrally symmetric bodies use the duality
/// `John(X) = (Löwner(X°))°` about the center of symmetry. Other polytopes of
/// dimension `≤ 3` use [`john_of_polytope`].
pub fn john(x: &ConvexBody) -> Result<ExtremalResult> {
    let (ellipsoid, iterations) = match (x, x.symmetry_center(TOL_SYMMETRY)) {
        (ConvexBody::Ellipsoid(e), _) => (e.clone(), 0),
        (_, Some(c)) => {
            let generators = polar_generators(x, &c)?;
            let (l, it) = loewner_of_points(&generators, true)?;
            // The polar of {yᵀQy ≤ 1} is {xᵀQ⁻¹x ≤ 1}.
            let q = linalg::spd_inverse(l.shape())?;
            (Ellipsoid::new(c, q, 1.0)?, it)
        }
        (ConvexBody::Polytope(p), None) => {
            let r = john_of_polytope(p)?;
            return Ok(r);
        }
        (ConvexBody::Product(_), None) => {
            return Err(Error::Unsupported(
                "John ellipsoid of a product without a center of symmetry".into(),
            ))
        }
    };
    let (residual, sampled) = inscribed_residual(x, &ellipsoid)?;
    Ok(ExtremalResult {
        certificate: Certificate {
            volume: ellipsoid.volume(),
            inclusion_residual: residual,
            sampled,
        },
        ellipsoid,
        kind: ExtremalKind::John,
        iterations,
    })
}

/// Symmetric `d × d` matrix from its upper triangle, row by row.
fn unpack_sym(theta: &[f64], d: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        for j in i..d {
            b[(i, j)] = theta[k];
            b[(j, i)] = theta[k];
            k += 1;
        }
    }
    b
}

/// The barrier `t·log det B + Σ log(bᵢ − aᵢ·c − |Baᵢ|)` over `(B, c)`, with
/// `B` symmetric and parametrised by its upper triangle.
struct Barrier<'a> {
    p: &'a Polytope,
    d: usize,
    /// Unit symmetric matrices spanning the `B` coordinates.
    units: Vec<DMatrix<f64>>,
}

impl<'a> Barrier<'a> {
    fn new(p: &'a Polytope) -> Self {
        let d = p.dim();
        let k = d * (d + 1) / 2;
        let units = (0..k)
            .map(|i| {
                let mut theta = vec![0.0; k];
                theta[i] = 1.0;
                unpack_sym(&theta, d)
            })
            .collect();
        Self { p, d, units }
    }

    fn nvars(&self) -> usize {
        self.units.len() + self.d
    }

    fn split(&self, z: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
        let k = self.units.len();
        (unpack_sym(&z.as_slice()[..k], self.d), z.rows(k, self.d).into_owned())
    }

    /// `None` outside the domain.
    fn value(&self, z: &DVector<f64>, t: f64) -> Option<f64> {
        let (b, c) = self.split(z);
        let chol = nalgebra::Cholesky::new(b.clone())?;
        let logdet = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
        let mut total = t * logdet;
        for h in self.p.halfspaces() {
            let g = h.b - h.a.dot(&c) - (&b * &h.a).norm();
            if g <= 0.0 {
                return None;
            }
            total += g.ln();
        }
        Some(total)
    }

    /// Gradient and Hessian, both analytic.
    fn derivatives(&self, z: &DVector<f64>, t: f64) -> (DVector<f64>, DMatrix<f64>) {
        let (b, c) = self.split(z);
        let nb = self.units.len();
        let n = self.nvars();
        let b_inv = linalg::inverse(&b).expect("interior point");
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);

        let be: Vec<DMatrix<f64>> = self.units.iter().map(|e| &b_inv * e).collect();
        for k in 0..nb {
            grad[k] = t * be[k].trace();
            for l in 0..nb {
                hess[(k, l)] = -t * (&be[k] * &be[l]).trace();
            }
        }

        for h in self.p.halfspaces() {
            let s = &b * &h.a;
            let norm = s.norm();
            let g = h.b - h.a.dot(&c) - norm;
            // First derivatives of g and second derivatives of |Ba|.
            let w: Vec<DVector<f64>> = self.units.iter().map(|e| e * &h.a).collect();
            let dn: Vec<f64> = w.iter().map(|wk| s.dot(wk) / norm).collect();
            let mut dg = DVector::zeros(n);
            for k in 0..nb {
                dg[k] = -dn[k];
            }
            dg.rows_mut(nb, self.d).copy_from(&(-&h.a));
            grad += &dg / g;
            hess -= (&dg * dg.transpose()) / (g * g);
            for k in 0..nb {
                for l in 0..nb {
                    let d2n = (w[k].dot(&w[l]) - dn[k] * dn[l]) / norm;
                    hess[(k, l)] -= d2n / g;
                }
            }
        }
        (grad, linalg::symmetrize(&hess))
    }
}

/// Maximum-volume ellipsoid `{Bu + c : |u| ≤ 1}` inside a polytope of
/// dimension `≤ 3`, by a log-barrier method with Newton steps.
pub fn john_of_polytope(p: &Polytope) -> Result<ExtremalResult> {
    let d = p.dim();
    if d > 3 {
        return Err(Error::Unsupported(format!(
            "inscribed-ellipsoid solver handles dimension <= 3, got {d}"
        )));
    }
    let barrier = Barrier::new(p);
    let c0 = p.vertex_mean();
    let r0 = p
        .halfspaces()
        .iter()
        .map(|h| h.b - h.a.dot(&c0))
        .fold(f64::INFINITY, f64::min)
        * 0.5;
    let mut z = DVector::zeros(barrier.nvars());
    let mut k = 0;
    for i in 0..d {
        for j in i..d {
            z[k] = if i == j { r0 } else { 0.0 };
            k += 1;
        }
    }
    z.rows_mut(k, d).copy_from(&c0);

    let m = p.halfspaces().len() as f64;
    let mut t = 1.0;
    let mut iterations = 0;
    loop {
        for _ in 0..100 {
            let (g, h) = barrier.derivatives(&z, t);
            let step = nalgebra::Cholesky::new(-&h)
                .ok_or(Error::Degenerate("barrier Hessian lost definiteness".into()))?
                .solve(&g);
            let decrement = g.dot(&step);
            iterations += 1;
            if decrement < 1e-22 {
                break;
            }
            // Inside the quadratic-convergence region take full steps; the
            // barrier values are too flat there to support a sufficient-increase test.
            let mut alpha = 1.0;
            if decrement > 0.05 {
                let f0 = barrier.value(&z, t).expect("iterate is interior");
                while barrier
                    .value(&(&z + &step * alpha), t)
                    .is_none_or(|f| f < f0 + 0.25 * alpha * decrement)
                {
                    alpha *= 0.5;
                    if alpha < 1e-12 {
                        return Err(Error::NoConvergence {
                            solver: "john-barrier",
                            iterations,
                        });
                    }
                }
            } else {
                while barrier.value(&(&z + &step * alpha), t).is_none() {
                    alpha *= 0.5;
                }
            }
            z += &step * alpha;
            if (&step * alpha).amax() <= 1e-16 * (1.0 + z.amax()) {
                break;
            }
        }
        if m / t < 1e-13 {
            break;
        }
        t *= 10.0;
    }

    let (b, c) = barrier.split(&z);
    // {Bu + c : |u| ≤ 1} = {(x − c)ᵀB⁻²(x − c) ≤ 1}.
    let b_inv = linalg::inverse(&b)?;
    let ellipsoid = Ellipsoid::new(c, linalg::symmetrize(&(&b_inv * &b_inv)), 1.0)?;
    let (residual, sampled) = inscribed_residual(&ConvexBody::Polytope(p.clone()), &ellipsoid)?;
    Ok(ExtremalResult {
        certificate: Certificate {
            volume: ellipsoid.volume(),
            inclusion_residual: residual,
            sampled,
        },
        ellipsoid,
        kind: ExtremalKind::John,
        iterations,
    })
}
