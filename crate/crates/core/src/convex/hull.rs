//! Double-description conversion between vertex and halfspace descriptions
//! for low-dimensional polytopes.

use nalgebra::{DMatrix, DVector};

use super::polytope::Halfspace;
use crate::linalg;
use crate::{Error, Result};

/// Sign tolerance on unit rows against unit rays.
const TOL_DD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(bits: usize) -> Self {
        Self(vec![0; bits.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_superset(&self, other: &BitSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == *b)
    }
}

struct Ray {
    y: DVector<f64>,
    zeros: BitSet,
}

/// Rows of largest independent residual, chosen greedily.
fn independent_rows(rows: &[DVector<f64>], dim: usize) -> Option<Vec<usize>> {
    let mut chosen = Vec::with_capacity(dim);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for (i, r) in rows.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let mut res = r.clone();
            for q in &basis {
                res -= q * q.dot(&res);
            }
            let n = res.norm();
            if best.as_ref().is_none_or(|b| n > b.2) {
                best = Some((i, res, n));
            }
        }
        let (i, res, n) = best?;
        if n < 1e-9 {
            return None;
        }
        chosen.push(i);
        basis.push(res / n);
    }
    Some(chosen)
}

/// Extreme rays of the pointed cone `{y : rᵢ·y ≤ 0}`; `None` when the cone
/// contains a line.
fn extreme_rays(rows: &[DVector<f64>]) -> Option<Vec<DVector<f64>>> {
    let dim = rows.first()?.len();
    let m = rows.len();
    let init = independent_rows(rows, dim)?;

    let r0 = DMatrix::from_fn(dim, dim, |i, j| rows[init[i]][j]);
    let r0_inv = r0.try_inverse()?;
    let mut rays: Vec<Ray> = (0..dim)
        .map(|j| {
            let y = -r0_inv.column(j).into_owned();
            let mut zeros = BitSet::new(m);
            for (k, &row) in init.iter().enumerate() {
                if k != j {
                    zeros.insert(row);
                }
            }
            Ray { y: &y / y.norm(), zeros }
        })
        .collect();

    for (i, row) in rows.iter().enumerate() {
        if init.contains(&i) {
            continue;
        }
        let vals: Vec<f64> = rays.iter().map(|r| row.dot(&r.y)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k] > TOL_DD).collect();
        if pos.is_empty() {
            for (k, r) in rays.iter_mut().enumerate() {
                if vals[k] >= -TOL_DD {
                    r.zeros.insert(i);
                }
            }
            continue;
        }
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k] < -TOL_DD).collect();

        let mut created = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].zeros.and(&rays[q].zeros);
                if common.len() + 2 < dim {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(k, r)| k != p && k != q && r.zeros.is_superset(&common));
                if blocked {
                    continue;
                }
                let y = &rays[p].y * (-vals[q]) + &rays[q].y * vals[p];
                let norm = y.norm();
                if norm < 1e-14 {
                    continue;
                }
                let mut zeros = common;
                zeros.insert(i);
                created.push(Ray { y: y / norm, zeros });
            }
        }

        let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + created.len());
        for (k, mut r) in rays.into_iter().enumerate() {
            if vals[k] > TOL_DD {
                continue;
            }
            if vals[k] >= -TOL_DD {
                r.zeros.insert(i);
            }
            next.push(r);
        }
        next.extend(created);
        rays = next;
    }
    Some(rays.into_iter().map(|r| r.y).collect())
}

fn dedup(points: Vec<DVector<f64>>, tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| (q - &p).amax() <= tol) {
            out.push(p);
        }
    }
    out
}

/// Vertices of `{x : aᵢ·x ≤ bᵢ}`.
pub(crate) fn vertices_of(halfspaces: &[Halfspace], d: usize) -> Result<Vec<DVector<f64>>> {
    if halfspaces.len() <= d {
        return Err(Error::Unbounded);
    }
    let mut rows: Vec<DVector<f64>> = halfspaces
        .iter()
        .map(|h| {
            let mut r = DVector::zeros(d + 1);
            r.rows_mut(0, d).copy_from(&h.a);
            r[d] = -h.b;
            let n = r.norm();
            r / n
        })
        .collect();
    let mut t_row = DVector::zeros(d + 1);
    t_row[d] = -1.0;
    rows.push(t_row);

    let rays = extreme_rays(&rows).ok_or(Error::Unbounded)?;
    let mut verts = Vec::new();
    for y in rays {
        if y[d] <= 1e-12 {
            return Err(Error::Unbounded);
        }
        verts.push(y.rows(0, d).into_owned() / y[d]);
    }
    if verts.is_empty() {
        return Err(Error::Degenerate("empty polytope".into()));
    }
    let scale = verts.iter().map(|v| v.amax()).fold(1.0, f64::max);
    Ok(dedup(verts, 1e-9 * scale))
}

/// Facets of the convex hull of `points`, together with its extreme points.
pub(crate) fn facets_of(points: &[DVector<f64>]) -> Result<(Vec<Halfspace>, Vec<DVector<f64>>)> {
    let d = points.first().ok_or(Error::Degenerate("no points".into()))?.len();
    let scale = points.iter().map(|p| p.amax()).fold(0.0, f64::max).max(1e-300);
    let pts = dedup(points.to_vec(), 1e-12 * scale);
    if pts.len() <= d {
        return Err(Error::Degenerate("too few points for a full-dimensional hull".into()));
    }
    let c = pts.iter().fold(DVector::zeros(d), |acc, p| acc + p) / pts.len() as f64;
    let spread = pts.iter().map(|p| (p - &c).norm()).fold(0.0, f64::max);
    let centered = DMatrix::from_columns(&pts.iter().map(|p| (p - &c) / spread).collect::<Vec<_>>());
    if linalg::singular_values(&centered).iter().cloned().fold(f64::INFINITY, f64::min) < 1e-9 {
        return Err(Error::Degenerate("points do not span a full-dimensional hull".into()));
    }

    // Facets of the hull are the vertices of the polar of (hull − c).
    let polar: Vec<Halfspace> = (0..pts.len())
        .map(|i| Halfspace {
            a: centered.column(i).into_owned(),
            b: 1.0,
        })
        .collect();
    let normals = vertices_of(&polar, d).map_err(|_| Error::Degenerate("mean point is not interior".into()))?;

    let facets: Vec<Halfspace> = normals
        .into_iter()
        .map(|y| {
            // y·(x − c)/spread ≤ 1
            let a = y / spread;
            let b = 1.0 + a.dot(&c);
            let n = a.norm();
            Halfspace { a: a / n, b: b / n }
        })
        .collect();

    let extreme: Vec<DVector<f64>> = pts
        .into_iter()
        .filter(|p| {
            let tight: Vec<DVector<f64>> = facets
                .iter()
                .filter(|h| (h.a.dot(p) - h.b).abs() <= 1e-9 * spread)
                .map(|h| h.a.clone())
                .collect();
            tight.len() >= d && {
                let m = DMatrix::from_columns(&tight);
                let rank = linalg::singular_values(&m).iter().filter(|&&s| s > 1e-9).count();
                rank == d
            }
        })
        .collect();
    Ok((facets, extreme))
}
