//! Phase-plane figures for `n = 1` states and planar bodies, emitted as
//! JSON, CSV (one row per boundary sample) or static SVG.

use std::f64::consts::PI;
use std::fmt::Write as _;

use lagpolar::convex::{ConvexBody, Ellipsoid, Polytope};
use lagpolar::linalg;
use lagpolar::polar::{polar_dual, CenterPolicy};
use lagpolar::quantum::{state_to_blob, LagrangianQuantumState};
use nalgebra::DVector;
use serde::Serialize;

use crate::error::CliError;

/// Boundary samples per curve.
pub const SAMPLES_PER_CURVE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Parallelogram,
    Ellipse,
    Polygon,
}

impl CurveKind {
    fn name(self) -> &'static str {
        match self {
            CurveKind::Parallelogram => "parallelogram",
            CurveKind::Ellipse => "ellipse",
            CurveKind::Polygon => "polygon",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub label: String,
    pub kind: CurveKind,
    /// Closed boundary; the last point connects back to the first.
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Annotation {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure {
    pub title: String,
    pub curves: Vec<Curve>,
    pub annotations: Vec<Annotation>,
}

fn ellipse_samples(e: &Ellipsoid) -> Vec<[f64; 2]> {
    let l = linalg::sym_sqrt(&e.dispersion());
    (0..SAMPLES_PER_CURVE)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / SAMPLES_PER_CURVE as f64;
            let p = e.center() + &l * DVector::from_column_slice(&[t.cos(), t.sin()]);
            [p[0], p[1]]
        })
        .collect()
}

/// Samples along a closed polygon, spread over the edges in proportion to
/// their length (largest remainder) so that every vertex is a sample.
fn polygon_samples(ring: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let k = ring.len();
    let len = |i: usize| {
        let (a, b) = (ring[i], ring[(i + 1) % k]);
        (b[0] - a[0]).hypot(b[1] - a[1])
    };
    let total: f64 = (0..k).map(len).sum();
    let spare = SAMPLES_PER_CURVE - k;
    let exact: Vec<f64> = (0..k).map(|i| spare as f64 * len(i) / total).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let missing = spare - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    let mut out = Vec::with_capacity(SAMPLES_PER_CURVE);
    for i in 0..k {
        let (a, b) = (ring[i], ring[(i + 1) % k]);
        let steps = counts[i] + 1;
        for s in 0..steps {
            let t = s as f64 / steps as f64;
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

fn polytope_ring(p: &Polytope) -> Vec<[f64; 2]> {
    p.polygon_ring().iter().map(|v| [v[0], v[1]]).collect()
}

fn ellipse_area(e: &Ellipsoid) -> f64 {
    PI * e.hbar() / e.shape().determinant().sqrt()
}

/// The parallelogram `X_ℓ × X^ℏ_{ℓ′}` of an `n = 1` state and its John ellipse.
pub fn state_figure(state: &LagrangianQuantumState) -> Result<Figure, CliError> {
    if state.n() != 1 {
        return Err(CliError::Unsupported(format!(
            "figures are drawn for n = 1 states, found n = {}",
            state.n()
        )));
    }
    let q = state.frame().ell.basis().column(0).into_owned();
    let qp = state.frame().ell_prime.basis().column(0).into_owned();
    let half = (state.hbar() / state.body().shape()[(0, 0)]).sqrt();
    let half_dual = (state.hbar() / state.dual().shape()[(0, 0)]).sqrt();
    let c = state.center().into_vector();
    let corner = |s: f64, t: f64| {
        let v = &c + &q * (s * half) + &qp * (t * half_dual);
        [v[0], v[1]]
    };
    let ring = [corner(1.0, 1.0), corner(-1.0, 1.0), corner(-1.0, -1.0), corner(1.0, -1.0)];
    let parallelogram_area = 4.0 * half * half_dual * (q[0] * qp[1] - q[1] * qp[0]).abs();

    let blob = state_to_blob(state)?.ellipsoid();
    Ok(Figure {
        title: "Lagrangian quantum state and its John ellipse".into(),
        curves: vec![
            Curve {
                label: "state".into(),
                kind: CurveKind::Parallelogram,
                points: polygon_samples(&ring),
            },
            Curve {
                label: "john".into(),
                kind: CurveKind::Ellipse,
                points: ellipse_samples(&blob),
            },
        ],
        annotations: vec![
            Annotation {
                label: "parallelogram area".into(),
                value: parallelogram_area,
            },
            Annotation {
                label: "ellipse area".into(),
                value: ellipse_area(&blob),
            },
        ],
    })
}

/// A planar body and its polar dual about its center (or Santaló point).
pub fn body_figure(body: &ConvexBody, hbar: f64) -> Result<Figure, CliError> {
    if body.dim() != 2 {
        return Err(CliError::Unsupported(format!(
            "figures are drawn for planar bodies, found dimension {}",
            body.dim()
        )));
    }
    let dual = polar_dual(body, hbar, &CenterPolicy::default_for(body))?;
    let curve = |label: &str, b: &ConvexBody| -> Result<(Curve, f64), CliError> {
        match b {
            ConvexBody::Ellipsoid(e) => Ok((
                Curve {
                    label: label.into(),
                    kind: CurveKind::Ellipse,
                    points: ellipse_samples(e),
                },
                ellipse_area(e),
            )),
            ConvexBody::Polytope(p) => Ok((
                Curve {
                    label: label.into(),
                    kind: CurveKind::Polygon,
                    points: polygon_samples(&polytope_ring(p)),
                },
                b.volume()?,
            )),
            ConvexBody::Product(_) => Err(CliError::Unsupported("product bodies cannot be drawn".into())),
        }
    };
    let (c1, a1) = curve("body", body)?;
    let (c2, a2) = curve("polar", &dual)?;
    Ok(Figure {
        title: "Convex body and its polar dual".into(),
        curves: vec![c1, c2],
        annotations: vec![
            Annotation {
                label: "body area".into(),
                value: a1,
            },
            Annotation {
                label: "polar area".into(),
                value: a2,
            },
            Annotation {
                label: "volume product".into(),
                value: a1 * a2,
            },
        ],
    })
}

impl Figure {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("curve,kind,index,x,y\n");
        for c in &self.curves {
            for (i, p) in c.points.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{},{}", c.label, c.kind.name(), i, p[0], p[1]);
            }
        }
        out
    }

    pub fn to_svg(&self) -> String {
        const SIZE: f64 = 480.0;
        const MARGIN: f64 = 0.08;
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in self.curves.iter().flat_map(|c| &c.points) {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12) * (1.0 + 2.0 * MARGIN);
        let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        // Phase-plane y axis points up.
        let to_px = |p: &[f64; 2]| {
            (
                SIZE / 2.0 + (p[0] - mid[0]) / span * SIZE,
                SIZE / 2.0 - (p[1] - mid[1]) / span * SIZE,
            )
        };
        let colours = ["#1f4e79", "#b03a2e", "#1e8449", "#7d3c98"];
        let text_height = 18.0 * (self.annotations.len() + 1) as f64;
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{}" viewBox="0 0 {SIZE} {}">"#,
            SIZE + text_height,
            SIZE + text_height
        );
        let _ = writeln!(out, "  <title>{}</title>", self.title);
        let _ = writeln!(out, r#"  <rect width="100%" height="100%" fill="white"/>"#);
        for (i, c) in self.curves.iter().enumerate() {
            let mut d = String::new();
            for (k, p) in c.points.iter().enumerate() {
                let (x, y) = to_px(p);
                let _ = write!(d, "{}{x:.3},{y:.3} ", if k == 0 { "M" } else { "L" });
            }
            d.push('Z');
            let _ = writeln!(
                out,
                r#"  <path id="{}" class="{}" d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                c.label,
                c.kind.name(),
                d,
                colours[i % colours.len()]
            );
        }
        for (i, a) in self.annotations.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"  <text x="8" y="{:.1}" font-family="monospace" font-size="13" data-label="{}" data-value="{}">{} = {}</text>"#,
                SIZE + 18.0 * (i + 1) as f64,
                a.label,
                a.value,
                a.label,
                a.value
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lagpolar::quantum::fiducial_state;
    use nalgebra::DMatrix;

    #[test]
    fn fiducial_square_and_disk() {
        let fig = state_figure(&fiducial_state(1, 1.0).unwrap()).unwrap();
        assert_eq!(fig.curves.len(), 2);
        assert!(fig.curves.iter().all(|c| c.points.len() == SAMPLES_PER_CURVE));
        assert!((fig.annotations[0].value - 4.0).abs() < 1e-15);
        assert!((fig.annotations[1].value - PI).abs() < 1e-15);
        let svg = fig.to_svg();
        assert!(svg.contains(r#"data-label="parallelogram area" data-value="4""#), "{svg}");
        assert!(svg.contains(&format!(r#"data-value="{}""#, PI)));
    }

    #[test]
    fn polygon_sampling_keeps_vertices() {
        let ring = [[0.0, 0.0], [3.0, 0.0], [0.0, 1.0]];
        let s = polygon_samples(&ring);
        assert_eq!(s.len(), SAMPLES_PER_CURVE);
        for v in ring {
            assert!(s.contains(&v));
        }
    }

    #[test]
    fn csv_has_one_row_per_sample() {
        let body = ConvexBody::from(Ellipsoid::centered(DMatrix::identity(2, 2) * 2.0, 1.0).unwrap());
        let fig = body_figure(&body, 1.0).unwrap();
        let csv = fig.to_csv();
        assert_eq!(csv.lines().count(), 1 + 2 * SAMPLES_PER_CURVE);
        assert!((fig.annotations[2].value - PI * PI).abs() < 1e-12);
    }
}
