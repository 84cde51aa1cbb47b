//! Derivative-free minimisation (Nelder–Mead simplex search).

use nalgebra::DVector;

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct NelderMead {
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Stop when every vertex lies within this distance of the best one...
    pub x_tol: f64,
    /// ...and the objective spread is below `f_tol · (1 + |f_best|)`.
    pub f_tol: f64,
    pub max_iterations: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            initial_step: 0.05,
            x_tol: 1e-10,
            f_tol: 1e-14,
            max_iterations: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: DVector<f64>,
    pub value: f64,
    pub iterations: usize,
}

impl NelderMead {
    /// Minimises `f` from `x0`. `f` may return `+∞` outside its domain; the
    /// starting point must be feasible.
    pub fn minimize(&self, f: impl Fn(&DVector<f64>) -> f64, x0: &DVector<f64>) -> Result<Minimum> {
        let d = x0.len();
        let f0 = f(x0);
        if !f0.is_finite() {
            return Err(Error::InvalidParameter("starting point outside the domain".into()));
        }
        let mut simplex: Vec<(DVector<f64>, f64)> = vec![(x0.clone(), f0)];
        for i in 0..d {
            // Shrink the step until the vertex is feasible.
            let mut step = self.initial_step;
            loop {
                let mut x = x0.clone();
                x[i] += step;
                let fx = f(&x);
                if fx.is_finite() {
                    simplex.push((x, fx));
                    break;
                }
                step *= -0.5;
                if step.abs() < 1e-14 {
                    return Err(Error::Degenerate("no feasible simplex around the start".into()));
                }
            }
        }

        for iteration in 0..self.max_iterations {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[d].1;
            let spread = simplex
                .iter()
                .map(|(x, _)| (x - &simplex[0].0).amax())
                .fold(0.0, f64::max);
            if spread <= self.x_tol && worst - best <= self.f_tol * (1.0 + best.abs()) {
                return Ok(Minimum {
                    x: simplex[0].0.clone(),
                    value: best,
                    iterations: iteration,
                });
            }

            let centroid = simplex[..d].iter().fold(DVector::zeros(d), |acc, (x, _)| acc + x) / d as f64;
            let xw = simplex[d].0.clone();
            let reflected = &centroid * 2.0 - &xw;
            let fr = f(&reflected);
            if fr < simplex[0].1 {
                let expanded = &centroid * 3.0 - &xw * 2.0;
                let fe = f(&expanded);
                simplex[d] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
                continue;
            }
            if fr < simplex[d - 1].1 {
                simplex[d] = (reflected, fr);
                continue;
            }
            let (contracted, fc) = if fr < worst {
                let c = (&centroid + &reflected) * 0.5;
                let fc = f(&c);
                (c, fc)
            } else {
                let c = (&centroid + &xw) * 0.5;
                let fc = f(&c);
                (c, fc)
            };
            if fc < worst.min(fr) {
                simplex[d] = (contracted, fc);
                continue;
            }
            let x0 = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x = (&x0 + &vertex.0) * 0.5;
                let fx = f(&x);
                *vertex = (x, fx);
            }
        }
        Err(Error::NoConvergence {
            solver: "nelder-mead",
            iterations: self.max_iterations,
        })
    }
}
