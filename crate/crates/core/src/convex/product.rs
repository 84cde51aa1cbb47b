use nalgebra::{DMatrix, DVector};

use super::{ConvexBody, Estimate, MonteCarlo};
use crate::linalg;
use crate::{Error, Result};

/// `T(X₁ × … × X_k) + o`: an affine image of a Cartesian product.
///
/// Products of a body with its polar dual are the central objects of the
/// quantum-state layer; keeping them factored makes support, membership and
/// volume exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductBody {
    factors: Vec<ConvexBody>,
    transform: DMatrix<f64>,
    transform_inv: DMatrix<f64>,
    offset: DVector<f64>,
}

impl ProductBody {
    pub fn new(factors: Vec<ConvexBody>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParameter("a product needs at least one factor".into()));
        }
        let d: usize = factors.iter().map(|f| f.dim()).sum();
        Ok(Self {
            factors,
            transform: DMatrix::identity(d, d),
            transform_inv: DMatrix::identity(d, d),
            offset: DVector::zeros(d),
        })
    }

    /// `transform · (X₁ × … × X_k) + offset`.
    pub fn with_map(factors: Vec<ConvexBody>, transform: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        let p = Self::new(factors)?;
        p.linear_image(&transform)?.translate(&offset)
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn factors(&self) -> &[ConvexBody] {
        &self.factors
    }

    pub fn transform(&self) -> &DMatrix<f64> {
        &self.transform
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    fn check(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Splits a vector of the product space into factor blocks.
    fn blocks(&self, v: &DVector<f64>) -> Vec<DVector<f64>> {
        let mut at = 0;
        self.factors
            .iter()
            .map(|f| {
                let b = v.rows(at, f.dim()).into_owned();
                at += f.dim();
                b
            })
            .collect()
    }

    fn stack(&self, parts: &[DVector<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        let mut at = 0;
        for p in parts {
            out.rows_mut(at, p.len()).copy_from(p);
            at += p.len();
        }
        out
    }

    /// Coordinates of `x` before the affine map.
    fn pull_back(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.transform_inv * (x - &self.offset)
    }

    fn push_forward(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.transform * y + &self.offset
    }

    /// `h(w) = w·o + Σ hᵢ((Tᵀw)ᵢ)`.
    pub fn support(&self, w: &DVector<f64>) -> Result<f64> {
        self.check(w)?;
        if w.norm() == 0.0 {
            return Err(Error::ZeroVector);
        }
        let v = self.transform.transpose() * w;
        let mut h = w.dot(&self.offset);
        for (f, b) in self.factors.iter().zip(self.blocks(&v)) {
            if b.norm() > 0.0 {
                h += f.support(&b)?;
            }
        }
        Ok(h)
    }

    pub fn support_point(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(w)?;
        if w.norm() == 0.0 {
            return Err(Error::ZeroVector);
        }
        let v = self.transform.transpose() * w;
        let parts = self
            .factors
            .iter()
            .zip(self.blocks(&v))
            .map(|(f, b)| if b.norm() > 0.0 { f.support_point(&b) } else { f.centroid() })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.push_forward(&self.stack(&parts)))
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let y = self.pull_back(x);
        self.factors.iter().zip(self.blocks(&y)).all(|(f, b)| f.contains(&b, tol))
    }

    /// The largest factor gauge, each about the matching block of `c`.
    pub fn gauge_about(&self, x: &DVector<f64>, c: &DVector<f64>) -> Result<f64> {
        self.check(x)?;
        self.check(c)?;
        let (y, yc) = (self.pull_back(x), self.pull_back(c));
        let mut g = 0.0_f64;
        for ((f, b), bc) in self.factors.iter().zip(self.blocks(&y)).zip(self.blocks(&yc)) {
            g = g.max(f.gauge_about(&b, &bc)?);
        }
        Ok(g)
    }

    /// `|det T| ∏ Vol(Xᵢ)`; standard errors combine in relative terms.
    pub fn moments(&self, mc: &MonteCarlo) -> Result<(Estimate, DVector<f64>)> {
        let mut value = self.transform.determinant().abs();
        let mut rel_var = 0.0;
        let mut centroids = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            let (v, c) = f.moments(mc)?;
            value *= v.value;
            rel_var += (v.stderr / v.value).powi(2);
            centroids.push(c);
        }
        Ok((
            Estimate {
                value,
                stderr: value * rel_var.sqrt(),
            },
            self.push_forward(&self.stack(&centroids)),
        ))
    }

    pub fn symmetry_center(&self, tol: f64) -> Option<DVector<f64>> {
        let centers = self
            .factors
            .iter()
            .map(|f| f.symmetry_center(tol))
            .collect::<Option<Vec<_>>>()?;
        Some(self.push_forward(&self.stack(&centers)))
    }

    pub fn linear_image(&self, a: &DMatrix<f64>) -> Result<Self> {
        if a.shape() != (self.dim(), self.dim()) {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.nrows(),
            });
        }
        let a_inv = linalg::inverse(a)?;
        Ok(Self {
            factors: self.factors.clone(),
            transform: a * &self.transform,
            transform_inv: &self.transform_inv * a_inv,
            offset: a * &self.offset,
        })
    }

    pub fn translate(&self, t: &DVector<f64>) -> Result<Self> {
        self.check(t)?;
        Ok(Self {
            offset: &self.offset + t,
            ..self.clone()
        })
    }
}
