//! Convex bodies: ellipsoids, polytopes and affine images of products.

mod ellipsoid;
mod hull;
mod polytope;
mod product;

pub use ellipsoid::{Ellipsoid, TOL_SHAPE_SYMMETRY};
pub use polytope::{Halfspace, Polytope, MAX_POLYTOPE_DIM};
pub use product::ProductBody;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

/// A value with a standard error; exact values carry `stderr = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }

    pub fn is_exact(&self) -> bool {
        self.stderr == 0.0
    }
}

/// Settings for Monte Carlo integration over a bounding box.
///
/// Samples are drawn in fixed-size chunks; chunk `k` uses stream `k` of a
/// ChaCha8 generator keyed by `seed`, so results do not depend on how chunks
/// are scheduled across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        Self {
            samples: 1 << 19,
            seed: 0,
        }
    }
}

const MC_CHUNK: usize = 8192;

impl MonteCarlo {
    /// Returns `(hits, sum of hit points, samples drawn)`.
    pub(crate) fn sample_box(
        &self,
        lo: &DVector<f64>,
        hi: &DVector<f64>,
        inside: impl Fn(&DVector<f64>) -> bool + Sync,
    ) -> (usize, DVector<f64>, usize) {
        let d = lo.len();
        let chunks = self.samples.div_ceil(MC_CHUNK).max(1);
        let per_chunk: Vec<(usize, DVector<f64>)> = (0..chunks)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(k as u64);
                let mut hits = 0;
                let mut sum = DVector::zeros(d);
                let mut x = DVector::zeros(d);
                for _ in 0..MC_CHUNK {
                    for i in 0..d {
                        x[i] = lo[i] + (hi[i] - lo[i]) * rng.random::<f64>();
                    }
                    if inside(&x) {
                        hits += 1;
                        sum += &x;
                    }
                }
                (hits, sum)
            })
            .collect();
        let mut hits = 0;
        let mut sum = DVector::zeros(d);
        for (h, s) in per_chunk {
            hits += h;
            sum += s;
        }
        (hits, sum, chunks * MC_CHUNK)
    }
}

/// The bodies handled by the duality and extremal-ellipsoid layers.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    Ellipsoid(Ellipsoid),
    Polytope(Polytope),
    Product(ProductBody),
}

impl From<Ellipsoid> for ConvexBody {
    fn from(e: Ellipsoid) -> Self {
        ConvexBody::Ellipsoid(e)
    }
}

impl From<Polytope> for ConvexBody {
    fn from(p: Polytope) -> Self {
        ConvexBody::Polytope(p)
    }
}

impl From<ProductBody> for ConvexBody {
    fn from(p: ProductBody) -> Self {
        ConvexBody::Product(p)
    }
}

/// Gauge of an ellipsoid about an arbitrary interior point `c`.
fn ellipsoid_gauge_about(e: &Ellipsoid, x: &DVector<f64>, c: &DVector<f64>) -> Result<f64> {
    let y = x - c;
    let d = c - e.center();
    let m = e.shape();
    let my = m * &y;
    let a = y.dot(&my);
    let b = d.dot(&my);
    let k = d.dot(&(m * &d)) - e.hbar();
    if k >= 0.0 {
        return Err(Error::NotInterior {
            gauge: (1.0 + k / e.hbar()).max(0.0).sqrt(),
        });
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    // Largest s with (d + s y)ᵀM(d + s y) = ℏ; the gauge is 1/s.
    let s = (-b + (b * b - a * k).sqrt()) / a;
    Ok(1.0 / s)
}

impl ConvexBody {
    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ellipsoid(e) => e.dim(),
            ConvexBody::Polytope(p) => p.dim(),
            ConvexBody::Product(p) => p.dim(),
        }
    }

    /// `h(u) = sup_{x ∈ X} x·u`.
    pub fn support(&self, u: &DVector<f64>) -> Result<f64> {
        match self {
            ConvexBody::Ellipsoid(e) => e.support(u),
            ConvexBody::Polytope(p) => p.support(u),
            ConvexBody::Product(p) => p.support(u),
        }
    }

    /// A point of the body attaining the support value.
    pub fn support_point(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            ConvexBody::Ellipsoid(e) => e.support_point(u),
            ConvexBody::Polytope(p) => p.support_point(u),
            ConvexBody::Product(p) => p.support_point(u),
        }
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        match self {
            ConvexBody::Ellipsoid(e) => e.contains(x, tol),
            ConvexBody::Polytope(p) => p.contains(x, tol),
            ConvexBody::Product(p) => p.contains(x, tol),
        }
    }

    /// Minkowski gauge of `x` about the interior point `c`; `≤ 1` inside.
    pub fn gauge_about(&self, x: &DVector<f64>, c: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim() || c.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: if x.len() != self.dim() { x.len() } else { c.len() },
            });
        }
        match self {
            ConvexBody::Ellipsoid(e) => ellipsoid_gauge_about(e, x, c),
            ConvexBody::Polytope(p) => p.gauge_about(x, c),
            ConvexBody::Product(p) => p.gauge_about(x, c),
        }
    }

    /// Volume and centroid. Exact except for polytopes of dimension 4.
    pub fn moments(&self, mc: &MonteCarlo) -> Result<(Estimate, DVector<f64>)> {
        match self {
            ConvexBody::Ellipsoid(e) => Ok((Estimate::exact(e.volume()), e.center().clone())),
            ConvexBody::Polytope(p) => p.moments(mc),
            ConvexBody::Product(p) => p.moments(mc),
        }
    }

    pub fn volume_estimate(&self, mc: &MonteCarlo) -> Result<Estimate> {
        Ok(self.moments(mc)?.0)
    }

    /// Volume with default Monte Carlo settings where needed.
    pub fn volume(&self) -> Result<f64> {
        Ok(self.volume_estimate(&MonteCarlo::default())?.value)
    }

    pub fn centroid(&self) -> Result<DVector<f64>> {
        Ok(self.moments(&MonteCarlo::default())?.1)
    }

    /// Center of central symmetry, if the body has one.
    pub fn symmetry_center(&self, tol: f64) -> Option<DVector<f64>> {
        match self {
            ConvexBody::Ellipsoid(e) => Some(e.center().clone()),
            ConvexBody::Polytope(p) => p.symmetry_center(tol),
            ConvexBody::Product(p) => p.symmetry_center(tol),
        }
    }

    pub fn linear_image(&self, a: &DMatrix<f64>) -> Result<Self> {
        Ok(match self {
            ConvexBody::Ellipsoid(e) => e.linear_image(a)?.into(),
            ConvexBody::Polytope(p) => p.linear_image(a)?.into(),
            ConvexBody::Product(p) => p.linear_image(a)?.into(),
        })
    }

    pub fn translate(&self, v: &DVector<f64>) -> Result<Self> {
        Ok(match self {
            ConvexBody::Ellipsoid(e) => e.translate(v)?.into(),
            ConvexBody::Polytope(p) => p.translate(v)?.into(),
            ConvexBody::Product(p) => p.translate(v)?.into(),
        })
    }

    pub fn as_ellipsoid(&self) -> Option<&Ellipsoid> {
        match self {
            ConvexBody::Ellipsoid(e) => Some(e),
            _ => None,
        }
    }

    pub fn as_polytope(&self) -> Option<&Polytope> {
        match self {
            ConvexBody::Polytope(p) => Some(p),
            _ => None,
        }
    }
}
