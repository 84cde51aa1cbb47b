//! Polar duality `X^ℏ = {p : sup_{x∈X} p·x ≤ ℏ}`, its Lagrangian version
//! through a frame, volume products and Santaló points.

use nalgebra::{DMatrix, DVector};

use crate::convex::{ConvexBody, Ellipsoid, Estimate, Halfspace, MonteCarlo, Polytope};
use crate::lagrangian::{LagrangianFrame, LagrangianPlane};
use crate::linalg;
use crate::optimize::NelderMead;
use crate::symplectic::SymplecticMap;
use crate::{Error, Result};

/// Tolerance used when deciding whether a body is centrally symmetric.
pub const TOL_SYMMETRY: f64 = 1e-9;

/// Where a body is centred before taking its polar.
#[derive(Debug, Clone, PartialEq)]
pub enum CenterPolicy {
    Origin,
    Centroid,
    Santalo,
    Point(DVector<f64>),
}

impl CenterPolicy {
    /// Centroid for centrally symmetric bodies, Santaló point otherwise.
    pub fn default_for(x: &ConvexBody) -> Self {
        if x.symmetry_center(TOL_SYMMETRY).is_some() {
            CenterPolicy::Centroid
        } else {
            CenterPolicy::Santalo
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CenterPolicy::Origin => "origin",
            CenterPolicy::Centroid => "centroid",
            CenterPolicy::Santalo => "santalo",
            CenterPolicy::Point(_) => "point",
        }
    }
}

pub fn resolve_center(x: &ConvexBody, hbar: f64, policy: &CenterPolicy) -> Result<DVector<f64>> {
    match policy {
        CenterPolicy::Origin => Ok(DVector::zeros(x.dim())),
        CenterPolicy::Centroid => x.centroid(),
        CenterPolicy::Santalo => Ok(santalo_point(x, hbar)?.point),
        CenterPolicy::Point(c) => {
            if c.len() != x.dim() {
                return Err(Error::DimensionMismatch {
                    expected: x.dim(),
                    found: c.len(),
                });
            }
            Ok(c.clone())
        }
    }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
    }
    Ok(())
}

/// Polar of an ellipsoid about `c`: `{p : sup_{x∈X} p·(x − c) ≤ ℏ}`.
///
/// With `d = center − c` and `K = h_X M⁻¹ − ddᵀ` the dual is the ellipsoid
/// `(p + ℏK⁻¹d)ᵀK(p + ℏK⁻¹d) ≤ ℏ²(1 + dᵀK⁻¹d)`; for `d = 0` this is
/// `{(h_X/ℏ)M⁻¹p·p ≤ ℏ}`.
pub fn ellipsoid_polar_about(e: &Ellipsoid, c: &DVector<f64>, hbar: f64) -> Result<Ellipsoid> {
    check_hbar(hbar)?;
    let d = e.center() - c;
    let gauge2 = d.dot(&(e.shape() * &d)) / e.hbar();
    if gauge2 >= 1.0 {
        return Err(Error::NotInterior { gauge: gauge2.sqrt() });
    }
    let disp = e.dispersion();
    if d.amax() == 0.0 {
        return Ellipsoid::centered(disp / hbar, hbar);
    }
    let k = linalg::symmetrize(&(disp - &d * d.transpose()));
    let k_inv_d = linalg::spd_inverse(&k)?.clone() * &d;
    let level = 1.0 + d.dot(&k_inv_d);
    Ellipsoid::new(-k_inv_d * hbar, k / (hbar * level), hbar)
}

/// Polar of a polytope about an interior point `c`.
///
/// Vertices `v` become facets `(v − c)·p ≤ ℏ` and facets `a·x ≤ b` become
/// vertices `ℏa/(b − a·c)`; both descriptions are mapped exactly.
pub fn polytope_polar_about(p: &Polytope, c: &DVector<f64>, hbar: f64) -> Result<Polytope> {
    check_hbar(hbar)?;
    if c.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: c.len(),
        });
    }
    let scale = p.vertices().iter().map(|v| (v - c).norm()).fold(0.0, f64::max);
    let mut vertices = Vec::with_capacity(p.halfspaces().len());
    for h in p.halfspaces() {
        let slack = h.b - h.a.dot(c);
        if slack <= 1e-12 * scale {
            return Err(Error::NotInterior {
                gauge: if slack > 0.0 { scale / slack } else { f64::INFINITY },
            });
        }
        vertices.push(&h.a * (hbar / slack));
    }
    let halfspaces = p
        .vertices()
        .iter()
        .map(|v| Halfspace::new(v - c, hbar).normalized())
        .collect::<Result<Vec<_>>>()?;
    Ok(Polytope::from_parts(vertices, halfspaces))
}

/// `(X − c)^ℏ` for the explicit point `c`.
pub fn polar_about(x: &ConvexBody, c: &DVector<f64>, hbar: f64) -> Result<ConvexBody> {
    if c.len() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: c.len(),
        });
    }
    match x {
        ConvexBody::Ellipsoid(e) => Ok(ellipsoid_polar_about(e, c, hbar)?.into()),
        ConvexBody::Polytope(p) => Ok(polytope_polar_about(p, c, hbar)?.into()),
        ConvexBody::Product(_) => Err(Error::Unsupported(
            "the polar of a product body is not a product; dualize the factors instead".into(),
        )),
    }
}

/// `(X − c)^ℏ` with `c` chosen by `policy`. The result contains the origin in
/// its interior.
pub fn polar_dual(x: &ConvexBody, hbar: f64, policy: &CenterPolicy) -> Result<ConvexBody> {
    let c = resolve_center(x, hbar, policy)?;
    polar_about(x, &c, hbar)
}

/// Volume of `(X − c)^ℏ`.
pub fn polar_volume(x: &ConvexBody, c: &DVector<f64>, hbar: f64, mc: &MonteCarlo) -> Result<Estimate> {
    polar_about(x, c, hbar)?.volume_estimate(mc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeProduct {
    pub center: DVector<f64>,
    pub volume: Estimate,
    pub polar_volume: Estimate,
    pub product: f64,
}

/// `Vol(X)·Vol((X − c)^ℏ)`. Bodies without a center of symmetry must use
/// [`CenterPolicy::Santalo`].
pub fn blaschke_santalo_product(x: &ConvexBody, hbar: f64, policy: &CenterPolicy) -> Result<VolumeProduct> {
    if *policy != CenterPolicy::Santalo && x.symmetry_center(TOL_SYMMETRY).is_none() {
        return Err(Error::NotCentrallySymmetric);
    }
    let mc = MonteCarlo::default();
    let center = resolve_center(x, hbar, policy)?;
    let volume = x.volume_estimate(&mc)?;
    let polar_volume = polar_volume(x, &center, hbar, &mc)?;
    Ok(VolumeProduct {
        product: volume.value * polar_volume.value,
        center,
        volume,
        polar_volume,
    })
}

/// `(Vol Bⁿ(√ℏ))²`, the upper bound of the volume product for symmetric bodies.
pub fn santalo_bound(n: usize, hbar: f64) -> f64 {
    let v = linalg::unit_ball_volume(n) * hbar.powf(n as f64 / 2.0);
    v * v
}

#[derive(Debug, Clone, PartialEq)]
pub struct SantaloPoint {
    pub point: DVector<f64>,
    pub polar_volume: f64,
    pub iterations: usize,
}

/// The interior point minimising `Vol((X − x)^ℏ)`.
///
/// Ellipsoids use the closed form (their center). Polytopes of dimension
/// `≤ 3` run a Nelder–Mead search over the interior from the centroid and
/// four perturbations of it, evaluating the polar volume exactly.
pub fn santalo_point(x: &ConvexBody, hbar: f64) -> Result<SantaloPoint> {
    check_hbar(hbar)?;
    match x {
        ConvexBody::Ellipsoid(e) => Ok(SantaloPoint {
            point: e.center().clone(),
            polar_volume: ellipsoid_polar_about(e, e.center(), hbar)?.volume(),
            iterations: 0,
        }),
        ConvexBody::Product(p) => Err(Error::Unsupported(format!(
            "Santalo point of a {}-dimensional product body",
            p.dim()
        ))),
        ConvexBody::Polytope(p) => polytope_santalo_point(p, hbar),
    }
}

fn polytope_santalo_point(p: &Polytope, hbar: f64) -> Result<SantaloPoint> {
    let d = p.dim();
    if d > 3 {
        return Err(Error::Unsupported(format!(
            "Santalo point needs exact polar volumes, available up to dimension 3, got {d}"
        )));
    }
    let mc = MonteCarlo::default();
    let (_, centroid) = p.moments(&mc)?;
    let scale = p.vertices().iter().map(|v| (v - &centroid).norm()).fold(0.0, f64::max);

    // Work in coordinates y = (x − centroid)/scale so tolerances are relative.
    let objective = |y: &DVector<f64>| {
        let c = &centroid + y * scale;
        match polytope_polar_about(p, &c, hbar) {
            Ok(q) => q.moments(&mc).map(|(v, _)| v.value).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };

    let mut starts = vec![DVector::zeros(d)];
    for k in 0..4 {
        let mut y = DVector::zeros(d);
        y[k % d] = if k < 2 * d.min(2) && k % 2 == 0 { 0.1 } else { -0.1 };
        if k >= d {
            y[(k + 1) % d] = 0.05;
        }
        while !objective(&y).is_finite() {
            y *= 0.5;
        }
        starts.push(y);
    }

    let nm = NelderMead::default();
    let mut best: Option<(DVector<f64>, f64)> = None;
    let mut iterations = 0;
    for s in &starts {
        let m = nm.minimize(objective, s)?;
        iterations += m.iterations;
        if best.as_ref().is_none_or(|b| m.value < b.1) {
            best = Some((m.x, m.value));
        }
    }
    let (y, value) = best.expect("at least one start");
    Ok(SantaloPoint {
        point: &centroid + y * scale,
        polar_volume: value,
        iterations,
    })
}

/// A convex body carried by a Lagrangian plane, in the coordinates of the
/// plane's orthonormal basis `Q`: the set is `{Qu : u ∈ body}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneBody {
    pub plane: LagrangianPlane,
    pub body: ConvexBody,
}

impl PlaneBody {
    pub fn new(plane: LagrangianPlane, body: ConvexBody) -> Result<Self> {
        if plane.n() != body.dim() {
            return Err(Error::DimensionMismatch {
                expected: plane.n(),
                found: body.dim(),
            });
        }
        Ok(Self { plane, body })
    }

    /// Support function of the set as a subset of `ℝ²ⁿ`: `h(Qᵀw)`.
    pub fn support_ambient(&self, w: &DVector<f64>) -> Result<f64> {
        let u = self.plane.basis().transpose() * w;
        if u.norm() == 0.0 {
            // The set is orthogonal to w; every point gives w·z = 0.
            return Ok(0.0);
        }
        self.body.support(&u)
    }

    pub fn contains_ambient(&self, z: &DVector<f64>, tol: f64) -> bool {
        self.plane.distance(z) <= tol && self.body.contains(&(self.plane.basis().transpose() * z), tol)
    }

    /// `SX_ℓ`, carried by `Sℓ`. With `SQ = Q̃R` the new coordinates are `R u`.
    pub fn image(&self, s: &SymplecticMap) -> Result<Self> {
        let (q, r) = linalg::orthonormalize_columns(&(s.matrix() * self.plane.basis()))?;
        Ok(Self {
            plane: LagrangianPlane::from_orthonormal(q),
            body: self.body.linear_image(&r)?,
        })
    }
}

/// The Lagrangian polar dual `{z′ ∈ ℓ′ : ω(z′, z) ≤ ℏ for all z ∈ X_ℓ}` of a
/// body given in `ℓ`-coordinates, returned in `ℓ′`-coordinates.
///
/// `center` is the point of the body (in `ℓ`-coordinates) that is moved to
/// the origin first; `None` uses the center of symmetry and fails for bodies
/// without one.
///
/// With `S = [Q | Q′K⁻¹]`, `K = QᵀJQ′`, mapping `(ℓ_X, ℓ_P)` onto the frame,
/// the body pulls back to `X × 0`, its ordinary polar lives on `ℓ_P`, and the
/// push-forward by `S` has `ℓ′`-coordinates `K⁻¹X^ℏ`. In the canonical frame
/// `K = I`.
pub fn lagrangian_polar_dual(
    x: &ConvexBody,
    frame: &LagrangianFrame,
    hbar: f64,
    center: Option<&DVector<f64>>,
) -> Result<ConvexBody> {
    if x.dim() != frame.n() {
        return Err(Error::DimensionMismatch {
            expected: frame.n(),
            found: x.dim(),
        });
    }
    let c = match center {
        Some(c) => c.clone(),
        None => x.symmetry_center(TOL_SYMMETRY).ok_or(Error::NotCentrallySymmetric)?,
    };
    // S sends ℓ_P-coordinates w to z′ = Q′K⁻¹w, so the dual's ℓ′-coordinates
    // are K⁻¹ applied to the ordinary polar.
    let k_inv = linalg::inverse(&frame.pairing())?;
    polar_about(x, &c, hbar)?.linear_image(&k_inv)
}

/// A body on `ℓ` together with its Lagrangian polar dual on `ℓ′`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPair {
    pub x: PlaneBody,
    pub x_dual: PlaneBody,
    pub frame: LagrangianFrame,
    pub hbar: f64,
}

impl DualPair {
    pub fn new(body: ConvexBody, frame: LagrangianFrame, hbar: f64) -> Result<Self> {
        let dual = lagrangian_polar_dual(&body, &frame, hbar, None)?;
        Ok(Self {
            x: PlaneBody::new(frame.ell.clone(), body)?,
            x_dual: PlaneBody::new(frame.ell_prime.clone(), dual)?,
            frame,
            hbar,
        })
    }
}

/// `max |h₁(w) − h₂(w)|` over the given directions.
pub fn support_deviation(a: &ConvexBody, b: &ConvexBody, directions: &[DVector<f64>]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for w in directions {
        worst = worst.max((a.support(w)? - b.support(w)?).abs());
    }
    Ok(worst)
}

/// `A⁻ᵀ`, used for the scaling law `(AX)^ℏ = A⁻ᵀX^ℏ`.
pub fn dual_transform(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(linalg::inverse(a)?.transpose())
}
