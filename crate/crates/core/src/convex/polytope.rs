use nalgebra::{DMatrix, DVector};

use super::hull;
use super::{Estimate, MonteCarlo};
use crate::linalg;
use crate::{Error, Result};

/// Largest dimension for which vertex/halfspace conversion is supported.
pub const MAX_POLYTOPE_DIM: usize = 4;

/// The closed halfspace `a·u ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub a: DVector<f64>,
    pub b: f64,
}

impl Halfspace {
    pub fn new(a: DVector<f64>, b: f64) -> Self {
        Self { a, b }
    }

    /// Same halfspace with `|a| = 1`.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.a.norm();
        if !(n > 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            a: &self.a / n,
            b: self.b / n,
        })
    }
}

/// A bounded convex polytope with non-empty interior.
///
/// Both descriptions are materialised at construction and kept in sync:
/// `vertices` holds exactly the extreme points and `halfspaces` the facets,
/// with unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<DVector<f64>>,
    halfspaces: Vec<Halfspace>,
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if d > MAX_POLYTOPE_DIM {
        return Err(Error::Unsupported(format!(
            "polytopes are supported up to dimension {MAX_POLYTOPE_DIM}, got {d}"
        )));
    }
    Ok(())
}

impl Polytope {
    /// Convex hull of a point set; interior points are discarded.
    pub fn from_vertices(points: Vec<DVector<f64>>) -> Result<Self> {
        let d = points.first().ok_or(Error::Degenerate("no points".into()))?.len();
        check_dim(d)?;
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: points.iter().map(|p| p.len()).find(|&l| l != d).unwrap_or(d),
            });
        }
        if points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidParameter("non-finite coordinate".into()));
        }
        let (halfspaces, vertices) = hull::facets_of(&points)?;
        Ok(Self {
            vertices,
            halfspaces,
        })
    }

    /// Intersection of halfspaces; must be bounded with non-empty interior.
    pub fn from_halfspaces(halfspaces: Vec<Halfspace>) -> Result<Self> {
        let d = halfspaces.first().ok_or(Error::Unbounded)?.a.len();
        check_dim(d)?;
        let mut hs = Vec::with_capacity(halfspaces.len());
        for h in &halfspaces {
            if h.a.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: h.a.len(),
                });
            }
            hs.push(h.normalized()?);
        }
        let verts = hull::vertices_of(&hs, d)?;
        // Re-deriving the facets drops redundant constraints.
        Self::from_vertices(verts)
    }

    pub(crate) fn from_parts(vertices: Vec<DVector<f64>>, halfspaces: Vec<Halfspace>) -> Self {
        Self {
            vertices,
            halfspaces,
        }
    }

    /// The box `∏[loᵢ, hiᵢ]`.
    pub fn axis_box(lo: &DVector<f64>, hi: &DVector<f64>) -> Result<Self> {
        let d = lo.len();
        if hi.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: hi.len(),
            });
        }
        check_dim(d)?;
        if (0..d).any(|i| !(hi[i] > lo[i])) {
            return Err(Error::Degenerate("box with empty interior".into()));
        }
        let mut halfspaces = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut a = DVector::zeros(d);
            a[i] = 1.0;
            halfspaces.push(Halfspace::new(a.clone(), hi[i]));
            halfspaces.push(Halfspace::new(-a, -lo[i]));
        }
        let vertices = (0..1usize << d)
            .map(|mask| DVector::from_fn(d, |i, _| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }))
            .collect();
        Ok(Self {
            vertices,
            halfspaces,
        })
    }

    /// `[−r, r]^d`.
    pub fn cube(d: usize, r: f64) -> Result<Self> {
        Self::axis_box(&DVector::from_element(d, -r), &DVector::from_element(d, r))
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
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

    /// `max_v u·v` over the vertices.
    pub fn support(&self, u: &DVector<f64>) -> Result<f64> {
        Ok(self.support_point(u)?.dot(u))
    }

    pub fn support_point(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(u)?;
        if u.norm() == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self
            .vertices
            .iter()
            .max_by(|a, b| a.dot(u).total_cmp(&b.dot(u)))
            .expect("non-empty vertex set")
            .clone())
    }

    /// Support value computed from the facets alone, by linear programming
    /// over the facet description (enumerating vertices of `{a·x ≤ b}`).
    pub fn support_from_halfspaces(&self, u: &DVector<f64>) -> Result<f64> {
        self.check(u)?;
        let verts = hull::vertices_of(&self.halfspaces, self.dim())?;
        Ok(verts.iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        x.len() == self.dim() && self.halfspaces.iter().all(|h| h.a.dot(x) - h.b <= tol)
    }

    /// Minkowski gauge about an interior point `c`: `max a·(x − c)/(b − a·c)`.
    pub fn gauge_about(&self, x: &DVector<f64>, c: &DVector<f64>) -> Result<f64> {
        self.check(x)?;
        self.check(c)?;
        let mut g = 0.0_f64;
        for h in &self.halfspaces {
            let slack = h.b - h.a.dot(c);
            if slack <= 0.0 {
                return Err(Error::NotInterior {
                    gauge: f64::INFINITY,
                });
            }
            g = g.max(h.a.dot(&(x - c)) / slack);
        }
        Ok(g)
    }

    pub fn vertex_mean(&self) -> DVector<f64> {
        self.vertices
            .iter()
            .fold(DVector::zeros(self.dim()), |acc, v| acc + v)
            / self.vertices.len() as f64
    }

    /// Center of symmetry, if the vertex set is symmetric about its mean.
    pub fn symmetry_center(&self, tol: f64) -> Option<DVector<f64>> {
        let c = self.vertex_mean();
        let scale = self.vertices.iter().map(|v| (v - &c).amax()).fold(1.0, f64::max);
        let symmetric = self.vertices.iter().all(|v| {
            let mirror = &c * 2.0 - v;
            self.vertices.iter().any(|w| (w - &mirror).amax() <= tol * scale)
        });
        symmetric.then_some(c)
    }

    /// Volume and centroid: exact for `d ≤ 3`, Monte Carlo otherwise.
    pub fn moments(&self, mc: &MonteCarlo) -> Result<(Estimate, DVector<f64>)> {
        match self.dim() {
            1..=3 => {
                let (v, c) = self.exact_moments();
                Ok((Estimate::exact(v), c))
            }
            _ => self.monte_carlo_moments(mc),
        }
    }

    fn exact_moments(&self) -> (f64, DVector<f64>) {
        let d = self.dim();
        let m = self.vertex_mean();
        match d {
            1 => {
                let lo = self.vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
                let hi = self.vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
                (hi - lo, DVector::from_element(1, 0.5 * (lo + hi)))
            }
            2 => {
                let ring = self.polygon_ring();
                let mut area = 0.0;
                let mut moment = DVector::zeros(2);
                for i in 0..ring.len() {
                    let a = &ring[i] - &m;
                    let b = &ring[(i + 1) % ring.len()] - &m;
                    let t = 0.5 * (a[0] * b[1] - a[1] * b[0]);
                    area += t;
                    moment += (a + b) * (t / 3.0);
                }
                (area, &m + moment / area)
            }
            _ => {
                let mut vol = 0.0;
                let mut moment = DVector::zeros(3);
                for face in self.facet_rings() {
                    for k in 1..face.len() - 1 {
                        let a = &face[0] - &m;
                        let b = &face[k] - &m;
                        let c = &face[k + 1] - &m;
                        let t = DMatrix::from_columns(&[a.clone(), b.clone(), c.clone()])
                            .determinant()
                            .abs()
                            / 6.0;
                        vol += t;
                        moment += (a + b + c) * (t / 4.0);
                    }
                }
                (vol, &m + moment / vol)
            }
        }
    }

    /// Vertices of a polygon in counter-clockwise order.
    pub fn polygon_ring(&self) -> Vec<DVector<f64>> {
        let m = self.vertex_mean();
        let mut ring = self.vertices.clone();
        ring.sort_by(|a, b| {
            let ta = (a[1] - m[1]).atan2(a[0] - m[0]);
            let tb = (b[1] - m[1]).atan2(b[0] - m[0]);
            ta.total_cmp(&tb)
        });
        ring
    }

    /// For `d = 3`: each facet's vertices in cyclic order.
    fn facet_rings(&self) -> Vec<Vec<DVector<f64>>> {
        let scale = self.vertices.iter().map(|v| v.amax()).fold(1.0, f64::max);
        self.halfspaces
            .iter()
            .map(|h| {
                let face: Vec<DVector<f64>> = self
                    .vertices
                    .iter()
                    .filter(|v| (h.a.dot(v) - h.b).abs() <= 1e-9 * scale)
                    .cloned()
                    .collect();
                let fc = face.iter().fold(DVector::zeros(3), |acc, v| acc + v) / face.len() as f64;
                let mut u1 = &face[0] - &fc;
                u1 /= u1.norm();
                let u2 = h.a.cross(&u1);
                let mut face = face;
                face.sort_by(|a, b| {
                    let (pa, pb) = (a - &fc, b - &fc);
                    pa.dot(&u2).atan2(pa.dot(&u1)).total_cmp(&pb.dot(&u2).atan2(pb.dot(&u1)))
                });
                face
            })
            .collect()
    }

    fn monte_carlo_moments(&self, mc: &MonteCarlo) -> Result<(Estimate, DVector<f64>)> {
        let d = self.dim();
        let lo = DVector::from_fn(d, |i, _| self.vertices.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min));
        let hi = DVector::from_fn(d, |i, _| self.vertices.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max));
        let box_volume: f64 = (0..d).map(|i| hi[i] - lo[i]).product();
        let (hits, sum, n) = mc.sample_box(&lo, &hi, |x| self.contains(x, 0.0));
        if hits == 0 {
            return Err(Error::Degenerate("Monte Carlo sampling found no interior points".into()));
        }
        let f = hits as f64 / n as f64;
        let estimate = Estimate {
            value: box_volume * f,
            stderr: box_volume * (f * (1.0 - f) / n as f64).sqrt(),
        };
        Ok((estimate, sum / hits as f64))
    }

    pub fn linear_image(&self, a: &DMatrix<f64>) -> Result<Self> {
        let d = self.dim();
        if a.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: a.nrows(),
            });
        }
        let a_inv_t = linalg::inverse(a)?.transpose();
        let vertices = self.vertices.iter().map(|v| a * v).collect();
        let halfspaces = self
            .halfspaces
            .iter()
            .map(|h| Halfspace::new(&a_inv_t * &h.a, h.b).normalized())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            vertices,
            halfspaces,
        })
    }

    pub fn translate(&self, t: &DVector<f64>) -> Result<Self> {
        self.check(t)?;
        Ok(Self {
            vertices: self.vertices.iter().map(|v| v + t).collect(),
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| Halfspace::new(h.a.clone(), h.b + h.a.dot(t)))
                .collect(),
        })
    }

    /// Hausdorff distance between the two vertex sets.
    pub fn vertex_hausdorff(&self, other: &Polytope) -> f64 {
        let one_way = |p: &[DVector<f64>], q: &[DVector<f64>]| {
            p.iter()
                .map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        one_way(&self.vertices, &other.vertices).max(one_way(&other.vertices, &self.vertices))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn triangle() -> Polytope {
        Polytope::from_vertices(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap()
    }

    #[test]
    fn support_examples() {
        let sq = Polytope::cube(2, 1.0).unwrap();
        assert_eq!(sq.support(&v(&[1.0, 1.0])).unwrap(), 2.0);
        assert_eq!(sq.support(&v(&[0.0, 0.0])), Err(Error::ZeroVector));
        assert_abs_diff_eq!(sq.support_from_halfspaces(&v(&[1.0, 1.0])).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn volume_and_centroid_examples() {
        let mc = MonteCarlo::default();
        let (vol, c) = Polytope::cube(2, 1.0).unwrap().moments(&mc).unwrap();
        assert_abs_diff_eq!(vol.value, 4.0, epsilon = 1e-14);
        assert!(c.amax() < 1e-15);
        let (vol, c) = triangle().moments(&mc).unwrap();
        assert_abs_diff_eq!(vol.value, 0.5, epsilon = 1e-15);
        // Simplex oracle: centroid is the vertex average.
        assert_abs_diff_eq!(c[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1], 1.0 / 3.0, epsilon = 1e-15);
        let unit = Polytope::axis_box(&v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap();
        let (_, c) = unit.moments(&mc).unwrap();
        assert_abs_diff_eq!(c[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn tetrahedron_moments_match_simplex_formula() {
        let pts = vec![v(&[0.0, 0.0, 0.0]), v(&[2.0, 0.0, 0.0]), v(&[0.0, 3.0, 0.0]), v(&[0.0, 0.0, 1.0])];
        let t = Polytope::from_vertices(pts.clone()).unwrap();
        let (vol, c) = t.moments(&MonteCarlo::default()).unwrap();
        assert_abs_diff_eq!(vol.value, 1.0, epsilon = 1e-14);
        let mean = pts.iter().fold(DVector::zeros(3), |a, p| a + p) / 4.0;
        assert!((c - mean).amax() < 1e-14);
        let (vol, _) = Polytope::cube(3, 0.5).unwrap().moments(&MonteCarlo::default()).unwrap();
        assert_abs_diff_eq!(vol.value, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn monte_carlo_in_four_dimensions() {
        let mc = MonteCarlo::default();
        let (vol, c) = Polytope::cube(4, 1.0).unwrap().moments(&mc).unwrap();
        // The bounding box is the cube itself.
        assert_eq!(vol.value, 16.0);
        assert!(c.amax() < 0.01);
        let simplex = Polytope::from_vertices(vec![
            v(&[0.0, 0.0, 0.0, 0.0]),
            v(&[1.0, 0.0, 0.0, 0.0]),
            v(&[0.0, 1.0, 0.0, 0.0]),
            v(&[0.0, 0.0, 1.0, 0.0]),
            v(&[0.0, 0.0, 0.0, 1.0]),
        ])
        .unwrap();
        let (vol, _) = simplex.moments(&mc).unwrap();
        assert!((vol.value - 1.0 / 24.0).abs() < 4.0 * vol.stderr);
        let again = simplex.moments(&mc).unwrap().0;
        assert_eq!(vol, again);
    }

    #[test]
    fn halfspace_and_vertex_forms_agree() {
        let hs = vec![
            Halfspace::new(v(&[1.0, 0.0]), 1.0),
            Halfspace::new(v(&[-1.0, 0.0]), 1.0),
            Halfspace::new(v(&[0.0, 2.0]), 2.0),
            Halfspace::new(v(&[0.0, -1.0]), 1.0),
            Halfspace::new(v(&[1.0, 1.0]), 5.0),
        ];
        let p = Polytope::from_halfspaces(hs).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.halfspaces().len(), 4);
        for k in 0..100 {
            let t = k as f64 * 0.37;
            let u = v(&[t.cos(), t.sin()]);
            assert_abs_diff_eq!(p.support(&u).unwrap(), p.support_from_halfspaces(&u).unwrap(), epsilon = 1e-9);
        }
    }

    #[test]
    fn membership_and_images() {
        let sq = Polytope::cube(2, 1.0).unwrap();
        assert!(sq.contains(&v(&[0.0, 0.0]), 0.0));
        assert!(!sq.contains(&v(&[1.5, 0.0]), 1e-9));
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let img = sq.linear_image(&a).unwrap();
        let (vol, _) = img.moments(&MonteCarlo::default()).unwrap();
        assert_abs_diff_eq!(vol.value, 8.0, epsilon = 1e-12);
        for w in img.vertices() {
            assert!(img.contains(w, 1e-12));
        }
        let moved = sq.translate(&v(&[3.0, 0.0])).unwrap();
        assert!(moved.contains(&v(&[3.9, 0.9]), 0.0));
        assert!(sq.linear_image(&DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn symmetry_detection() {
        assert!(Polytope::cube(3, 1.0).unwrap().symmetry_center(1e-12).is_some());
        assert!(triangle().symmetry_center(1e-9).is_none());
        let g = triangle().gauge_about(&v(&[1.0, 0.0]), &v(&[0.25, 0.25])).unwrap();
        assert_abs_diff_eq!(g, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dimension_limits() {
        let p5 = vec![DVector::zeros(5); 6];
        assert!(matches!(Polytope::from_vertices(p5), Err(Error::Unsupported(_))));
    }
}
