//! The limiting murmuration density: for a window E = [alpha, beta],
//! even weight k and odd prime l,
//!
//!   density = (-1)^{k/2+1}/(k-1) * 2 pi/(1 - 1/l) * 1/|E|
//!             * int_E sum_{|t| < 2 l sqrt(v)} (1_{l|t} - 1/l) h(t)
//!               (prod_{p != 2, p ∤ lt} (p^2-p-1)/(p(p-1)))
//!               sqrt(v - t^2/(4 l^2)) U_{k-2}(t / (2 l sqrt(v))) dv,
//!
//! where h(t) is the 2-adic parity factor of the Euler constant
//! (1 for even t, 1/2 for odd t; see `lfunc::two_adic_factor`).
//!
//! Each per-t integrand vanishes like sqrt(v - t^2/4l^2) at the support
//! edge; the substitution v = t^2/(4 l^2) + w^2 removes the singularity
//! exactly and the smooth remainder goes to adaptive Gauss-Legendre panels.

mod quad;

pub use quad::GaussLegendre;

use rayon::prelude::*;

use crate::arith::chebyshev_u;
use crate::error::{Error, Result};
use crate::lfunc::{theorem_product, two_adic_factor, EulerProductCache, TZeroConvention};

const GL_ORDER: usize = 24;

/// Compact window `[alpha, beta]` with `0 < alpha < beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    alpha: f64,
    beta: f64,
}

impl Window {
    pub fn new(alpha: f64, beta: f64) -> Result<Window> {
        if !(alpha.is_finite() && beta.is_finite() && 0.0 < alpha && alpha < beta) {
            return Err(Error::domain(format!(
                "window needs 0 < alpha < beta, got [{alpha}, {beta}]"
            )));
        }
        Ok(Window { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn measure(&self) -> f64 {
        self.beta - self.alpha
    }
}

/// A sampled density curve over windows `E = [1, T]`.
#[derive(Clone, Debug)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Number of integer t with nonempty support at each grid point.
    pub t_counts: Vec<usize>,
}

/// The limiting density with its per-t decomposition (t >= 0; positive t
/// stand for the +-t pair).
#[derive(Clone, Debug)]
pub struct DensityValue {
    pub value: f64,
    pub prefactor: f64,
    /// `(t, per_t_integral(t))` for t >= 0 with nonempty support.
    pub per_t: Vec<(i64, f64)>,
}

/// The summand of the limiting density without the outer prefactor:
/// `(1_{l|t} - 1/l) * prod_p(...) * sqrt(v - t^2/4l^2) * U_{k-2}(t/(2 l sqrt(v)))`.
pub fn integrand_term(
    t: i64,
    v: f64,
    ell: u64,
    k: u32,
    cache: &EulerProductCache,
    convention: TZeroConvention,
) -> Result<f64> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::domain(format!("weight must be even and >= 2, got {k}")));
    }
    let lf = ell as f64;
    let tf = t as f64;
    if !(v > 0.0) || tf.abs() >= 2.0 * lf * v.sqrt() {
        return Err(Error::domain(format!(
            "integrand needs |t| < 2 l sqrt(v), got t={t}, v={v}"
        )));
    }
    let indicator = if t.rem_euclid(ell as i64) == 0 { 1.0 } else { 0.0 };
    let product = two_adic_factor(t) * theorem_product(t, ell, cache, convention)?;
    let root = (v - tf * tf / (4.0 * lf * lf)).sqrt();
    let cheb = chebyshev_u(k - 2, tf / (2.0 * lf * v.sqrt()))?;
    Ok((indicator - 1.0 / lf) * product * root * cheb)
}

/// `int over E ∩ (t^2/(4l^2), beta] of the per-t integrand`, with the edge
/// singularity removed by `v = t^2/(4l^2) + w^2`. Empty support returns
/// exactly zero.
pub fn per_t_integral(
    t: i64,
    window: &Window,
    ell: u64,
    k: u32,
    cache: &EulerProductCache,
    convention: TZeroConvention,
    tol: f64,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    if k < 2 || k % 2 == 1 {
        return Err(Error::domain(format!("weight must be even and >= 2, got {k}")));
    }
    let lf = ell as f64;
    let tf = t as f64;
    let edge = tf * tf / (4.0 * lf * lf);
    if edge >= window.beta {
        return Ok(0.0);
    }
    let indicator = if t.rem_euclid(ell as i64) == 0 { 1.0 } else { 0.0 };
    let coef =
        (indicator - 1.0 / lf) * two_adic_factor(t) * theorem_product(t, ell, cache, convention)?;
    let w_lo = (window.alpha - edge).max(0.0).sqrt();
    let w_hi = (window.beta - edge).sqrt();
    let k2 = k - 2;
    let gl = GaussLegendre::new(GL_ORDER);
    let mut f = |w: f64| {
        let v = edge + w * w;
        let x = (tf / (2.0 * lf * v.sqrt())).clamp(-1.0, 1.0);
        2.0 * w * w * chebyshev_u(k2, x).expect("clamped argument")
    };
    Ok(coef * gl.integrate(&mut f, w_lo, w_hi, tol)?)
}

/// Prefactor `(-1)^{k/2+1}/(k-1) * 2 pi/(1 - 1/l) * 1/|E|`.
pub fn density_prefactor(window: &Window, ell: u64, k: u32) -> f64 {
    let sign = if (k / 2 + 1) % 2 == 0 { 1.0 } else { -1.0 };
    sign / (k as f64 - 1.0) * 2.0 * std::f64::consts::PI / (1.0 - 1.0 / ell as f64)
        / window.measure()
}

/// The limiting density over `window`, folding the t-sum by parity
/// (the integrand is even in t).
pub fn limiting_density(
    window: &Window,
    ell: u64,
    k: u32,
    cache: &EulerProductCache,
    convention: TZeroConvention,
    tol: f64,
) -> Result<DensityValue> {
    let t_max = (2.0 * ell as f64 * window.beta.sqrt()).ceil() as i64;
    let per_t: Vec<(i64, f64)> = (0..=t_max)
        .into_par_iter()
        .map(|t| Ok((t, per_t_integral(t, window, ell, k, cache, convention, tol)?)))
        .collect::<Result<_>>()?;
    // deterministic fixed-order reduction, ascending t
    let mut sum = 0.0;
    for &(t, v) in &per_t {
        sum += if t == 0 { v } else { 2.0 * v };
    }
    let prefactor = density_prefactor(window, ell, k);
    Ok(DensityValue { value: prefactor * sum, prefactor, per_t })
}

/// Figure-style curve: the limiting density over `E = [1, T]` for each `T`
/// in an increasing grid. Points are evaluated independently, so inserting
/// a grid point cannot perturb its neighbours; the Euler products per t are
/// the only state shared across points (inside `cache`).
pub fn density_curve(
    t_grid: &[f64],
    ell: u64,
    k: u32,
    cache: &EulerProductCache,
    convention: TZeroConvention,
    tol: f64,
) -> Result<DensityCurve> {
    if t_grid.is_empty() {
        return Err(Error::domain("empty curve grid"));
    }
    if t_grid.iter().any(|&t| !(t > 1.0)) {
        return Err(Error::domain("curve grid values must exceed 1"));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("curve grid must be strictly increasing"));
    }
    let mut values = Vec::with_capacity(t_grid.len());
    let mut t_counts = Vec::with_capacity(t_grid.len());
    for &upper in t_grid {
        let window = Window::new(1.0, upper)?;
        let dv = limiting_density(&window, ell, k, cache, convention, tol)?;
        // signed t count: each t > 0 with nonempty support stands for +-t
        let active_pos = dv
            .per_t
            .iter()
            .filter(|&&(t, _)| t > 0 && ((t * t) as f64) < upper * 4.0 * (ell * ell) as f64)
            .count();
        t_counts.push(2 * active_pos + 1);
        values.push(dv.value);
    }
    Ok(DensityCurve { grid: t_grid.to_vec(), values, t_counts })
}
