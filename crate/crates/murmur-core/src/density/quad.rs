//! Fixed-order Gauss-Legendre panels with adaptive bisection.
//!
//! Nodes and weights come from Newton iteration on the Legendre
//! recurrence; the adaptive driver splits a panel until the two-half
//! refinement agrees with the whole panel inside the local budget.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Gauss-Legendre rule of fixed order on [-1, 1].
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> GaussLegendre {
        assert!(order >= 2, "Gauss-Legendre order must be >= 2");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// One panel over [a, b].
    pub fn panel(&self, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Adaptive bisection to absolute tolerance `tol`.
    pub fn integrate(&self, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::domain(format!("quadrature tolerance must be positive, got {tol}")));
        }
        if a == b {
            return Ok(0.0);
        }
        let whole = self.panel(f, a, b);
        self.adapt(f, a, b, tol, whole, 0)
    }

    fn adapt(
        &self,
        f: &mut impl FnMut(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
        whole: f64,
        depth: u32,
    ) -> Result<f64> {
        let mid = 0.5 * (a + b);
        let left = self.panel(f, a, mid);
        let right = self.panel(f, mid, b);
        let refined = left + right;
        if (refined - whole).abs() <= tol {
            return Ok(refined);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::State(format!(
                "quadrature failed to reach tolerance {tol} on [{a}, {b}]"
            )));
        }
        let half_tol = 0.5 * tol;
        Ok(self.adapt(f, a, mid, half_tol, left, depth + 1)?
            + self.adapt(f, mid, b, half_tol, right, depth + 1)?)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
