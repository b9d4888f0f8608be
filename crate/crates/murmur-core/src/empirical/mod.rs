//! The finite murmuration average for a family (l, a, k) over a window E:
//!
//!   Sigma = 1/(pi sqrt(l)) sum_t c_{l^((a+1)/2)}(t)
//!           sum_{n in l^a E ∩ (t^2/(4l), inf), n prime}
//!             cos((k-1) phi_{t, ln}) L(1, psi_{t^2-4ln}) sqrt(n) log n,
//!
//! its normalization (asymptotic dimension count or user-supplied exact
//! dimension), the resulting density Sigma / #, prime-average convergence
//! checks, and prime-in-progression error statistics.

mod ap_stats;
mod fixture;

pub use ap_stats::{ap_error_stats, bv_average, ApStats, BvAverage};
pub use fixture::{
    fixture_crosscheck, ingest_fixture, ingest_fixture_path, CrosscheckReport, EigenFixture,
    FixtureForm,
};

use rayon::prelude::*;

use crate::arith::{ramanujan_sum, PrimeSieve};
use crate::density::{GaussLegendre, Window};
use crate::error::{Error, Result};
use crate::lfunc::{l1_psi_tilde_ellt, EulerProductCache, HurwitzTable, TZeroConvention};
use crate::trace::FamilyParams;

/// Fixed summation block so the reduction order is independent of the
/// number of worker threads.
const PRIME_CHUNK: usize = 4096;

/// One t-term of the finite sum.
#[derive(Clone, Copy, Debug)]
pub struct SigmaTerm {
    pub t: i64,
    /// `c_{l^((a+1)/2)}(t)`.
    pub coefficient: f64,
    /// `sum_n cos((k-1) phi_{t,ln}) L(1, psi_{t^2-4ln}) sqrt(n) log n`.
    pub inner_sum: f64,
}

/// The t-outer breakdown of Sigma.
#[derive(Clone, Debug)]
pub struct SigmaBreakdown {
    pub sigma: f64,
    pub n_count: u64,
    /// Sum of `log n` over the window primes (used by the exact-dimension
    /// normalization).
    pub log_sum: f64,
    pub per_t: Vec<SigmaTerm>,
    /// True when no prime lands in the window.
    pub empty_window: bool,
}

/// Finite density with its parts.
#[derive(Clone, Debug)]
pub struct EmpiricalResult {
    pub sigma: f64,
    pub normalization: f64,
    /// `sigma / normalization`; `None` when the window holds no prime or
    /// the normalization vanishes (undefined, never reported as 0).
    pub density: Option<f64>,
    pub n_count: u64,
    pub per_t: Vec<SigmaTerm>,
}

/// How the count `#` in the density denominator is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormalizationMode {
    /// `(k-1)/12 * l^{2a} (1 - 1/l)^2 (1 + 1/l) |E|`.
    Asymptotic,
    /// `(sum_{n in window, prime} log n) * dim` with a user-supplied
    /// newspace dimension.
    DimensionInput(f64),
}

/// Integer prime window `[n_lo, n_hi]` for `n / l^a in [alpha, beta]`,
/// both window endpoints included.
pub fn prime_window(params: &FamilyParams, window: &Window) -> Result<(u64, u64)> {
    let level = params.level()?;
    if (level as f64) * window.beta() >= 9.0e15 {
        return Err(Error::overflow(format!(
            "window upper end {} * {}",
            level,
            window.beta()
        )));
    }
    let n_lo = ((level as f64) * window.alpha()).ceil() as u64;
    let n_hi = ((level as f64) * window.beta()).floor() as u64;
    Ok((n_lo, n_hi))
}

fn check_capacity(params: &FamilyParams, n_hi: u64, table: &HurwitzTable, sieve: &PrimeSieve) -> Result<()> {
    if sieve.limit() < n_hi {
        return Err(Error::Capacity {
            what: "prime sieve for the window",
            required: n_hi,
            available: sieve.limit(),
        });
    }
    let required = 4u64
        .checked_mul(params.ell())
        .and_then(|x| x.checked_mul(n_hi))
        .ok_or_else(|| Error::overflow("4 l n_max"))?;
    if table.limit() < required {
        return Err(Error::Capacity {
            what: "Hurwitz table for the window",
            required,
            available: table.limit(),
        });
    }
    Ok(())
}

/// Compute Sigma in the t-outer order, restricted to the Ramanujan support
/// `t = 0 mod l^((a-1)/2)`; every other t contributes exactly zero.
pub fn finite_sigma(
    params: &FamilyParams,
    window: &Window,
    table: &HurwitzTable,
    sieve: &PrimeSieve,
) -> Result<SigmaBreakdown> {
    let ell = params.ell();
    let (n_lo, n_hi) = prime_window(params, window)?;
    check_capacity(params, n_hi, table, sieve)?;

    // window primes, excluding n = l (the trace formula hypothesis)
    let primes: Vec<u64> = sieve.primes_in(n_lo, n_hi).filter(|&n| n != ell).collect();
    let n_count = primes.len() as u64;
    let log_sum: f64 = primes.iter().map(|&n| (n as f64).ln()).sum();
    if primes.is_empty() {
        return Ok(SigmaBreakdown {
            sigma: 0.0,
            n_count: 0,
            log_sum: 0.0,
            per_t: Vec::new(),
            empty_window: true,
        });
    }

    let step = ell
        .checked_pow((params.exponent() - 1) / 2)
        .ok_or_else(|| Error::overflow("Ramanujan support step"))?;
    let q = step
        .checked_mul(ell)
        .ok_or_else(|| Error::overflow("Ramanujan modulus"))?;
    let four_ell = 4 * ell;
    let k1 = (params.weight() - 1) as f64;

    // |t| < 2 sqrt(l n_hi) on the support lattice
    let mut u_max = 0i64;
    loop {
        let t = (u_max + 1) * step as i64;
        if (t * t) as u64 >= four_ell * n_hi {
            break;
        }
        u_max += 1;
    }

    let inner_for = |t: i64| -> Result<f64> {
        // primes with 4 l n > t^2
        let start = primes.partition_point(|&n| four_ell * n <= (t * t) as u64);
        let chunks: Vec<f64> = primes[start..]
            .par_chunks(PRIME_CHUNK)
            .map(|chunk| {
                let mut acc = 0.0f64;
                for &n in chunk {
                    let disc = t * t - (four_ell * n) as i64;
                    let l_val = f64::from(table.twelve_h(disc.unsigned_abs()))
                        * std::f64::consts::PI
                        / (12.0 * ((-disc) as f64).sqrt());
                    let phi = (t as f64 / (2.0 * ((ell * n) as f64).sqrt())).asin();
                    let nf = n as f64;
                    acc += (k1 * phi).cos() * l_val * nf.sqrt() * nf.ln();
                }
                acc
            })
            .collect();
        Ok(chunks.iter().sum())
    };

    let mut per_t = Vec::new();
    let mut total = 0.0f64;
    for u in 0..=u_max {
        let t = u * step as i64;
        let coefficient = ramanujan_sum(q, t)? as f64;
        let inner = inner_for(t)?;
        if u == 0 {
            total += coefficient * inner;
            per_t.push(SigmaTerm { t, coefficient, inner_sum: inner });
        } else {
            total += 2.0 * coefficient * inner;
            per_t.push(SigmaTerm { t: -t, coefficient, inner_sum: inner });
            per_t.push(SigmaTerm { t, coefficient, inner_sum: inner });
        }
    }
    per_t.sort_by_key(|term| term.t);

    Ok(SigmaBreakdown {
        sigma: total / (std::f64::consts::PI * (ell as f64).sqrt()),
        n_count,
        log_sum,
        per_t,
        empty_window: false,
    })
}

/// The normalization `#`.
pub fn normalization(
    params: &FamilyParams,
    window: &Window,
    mode: NormalizationMode,
    sieve: &PrimeSieve,
) -> Result<f64> {
    match mode {
        NormalizationMode::Asymptotic => {
            let lf = params.ell() as f64;
            let level = params.level()? as f64;
            Ok((params.weight() as f64 - 1.0) / 12.0
                * level
                * level
                * (1.0 - 1.0 / lf).powi(2)
                * (1.0 + 1.0 / lf)
                * window.measure())
        }
        NormalizationMode::DimensionInput(dim) => {
            if !(dim >= 0.0) {
                return Err(Error::domain(format!("dimension must be >= 0, got {dim}")));
            }
            let (n_lo, n_hi) = prime_window(params, window)?;
            if sieve.limit() < n_hi {
                return Err(Error::Capacity {
                    what: "prime sieve for the normalization",
                    required: n_hi,
                    available: sieve.limit(),
                });
            }
            let log_sum: f64 = sieve
                .primes_in(n_lo, n_hi)
                .filter(|&n| n != params.ell())
                .map(|n| (n as f64).ln())
                .sum();
            Ok(log_sum * dim)
        }
    }
}

/// `Sigma / #`, flagged undefined when the window is empty or the
/// normalization vanishes.
pub fn finite_density(
    params: &FamilyParams,
    window: &Window,
    mode: NormalizationMode,
    table: &HurwitzTable,
    sieve: &PrimeSieve,
) -> Result<EmpiricalResult> {
    let sb = finite_sigma(params, window, table, sieve)?;
    let norm = normalization(params, window, mode, sieve)?;
    let density = if sb.empty_window || norm == 0.0 {
        None
    } else {
        Some(sb.sigma / norm)
    };
    Ok(EmpiricalResult {
        sigma: sb.sigma,
        normalization: norm,
        density,
        n_count: sb.n_count,
        per_t: sb.per_t,
    })
}

/// Test function for the prime-average convergence check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhiChoice {
    /// `Phi = 1`.
    One,
    /// `Phi(n) = cos((k-1) phi_{t, ln}) sqrt(n)`, the weight appearing in
    /// the density derivation.
    CosWeighted { k: u32 },
}

/// Both sides of the prime-average asymptotic
/// `sum_{n in (A,B] prime} Phi(n) L(1, psi_{t^2-4ln}) log n
///    ~  L(1, psi~_t^(l)) int_A^B Phi`.
#[derive(Clone, Copy, Debug)]
pub struct AverageCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    /// The constant `L(1, psi~_t^(l))`.
    pub constant: f64,
    pub integral: f64,
}

/// Evaluate the convergence check on `(A, B]` for `l | t`.
pub fn lemma45_check(
    t: i64,
    ell: u64,
    a_end: f64,
    b_end: f64,
    phi: PhiChoice,
    table: &HurwitzTable,
    sieve: &PrimeSieve,
    cache: &EulerProductCache,
    convention: TZeroConvention,
) -> Result<AverageCheck> {
    if ell < 3 || ell % 2 == 0 {
        return Err(Error::domain(format!("odd prime level required, got {ell}")));
    }
    if t.rem_euclid(ell as i64) != 0 {
        return Err(Error::domain(format!("need l | t, got t={t}, l={ell}")));
    }
    let tf = t as f64;
    if !(tf * tf / (4.0 * ell as f64) < a_end && a_end < b_end) {
        return Err(Error::domain(format!(
            "need t^2/(4l) < A < B, got t={t}, A={a_end}, B={b_end}"
        )));
    }
    let n_hi = b_end.floor() as u64;
    if sieve.limit() < n_hi {
        return Err(Error::Capacity {
            what: "prime sieve for the average check",
            required: n_hi,
            available: sieve.limit(),
        });
    }
    let required = 4 * ell * n_hi;
    if table.limit() < required {
        return Err(Error::Capacity {
            what: "Hurwitz table for the average check",
            required,
            available: table.limit(),
        });
    }

    let k1 = match phi {
        PhiChoice::One => 0.0,
        PhiChoice::CosWeighted { k } => {
            if k < 2 || k % 2 == 1 {
                return Err(Error::domain(format!("weight must be even >= 2, got {k}")));
            }
            (k - 1) as f64
        }
    };
    let phi_fn = |n: f64| -> f64 {
        match phi {
            PhiChoice::One => 1.0,
            PhiChoice::CosWeighted { .. } => {
                let ph = (tf / (2.0 * (ell as f64 * n).sqrt())).asin();
                (k1 * ph).cos() * n.sqrt()
            }
        }
    };

    // left side: exact-table L-values over primes in (A, B]
    let n_lo = a_end.floor() as u64 + 1;
    let chunks: Vec<f64> = sieve
        .primes_in(n_lo, n_hi)
        .collect::<Vec<_>>()
        .par_chunks(PRIME_CHUNK)
        .map(|chunk| {
            let mut acc = 0.0f64;
            for &n in chunk {
                let disc = t * t - (4 * ell * n) as i64;
                let l_val = f64::from(table.twelve_h(disc.unsigned_abs())) * std::f64::consts::PI
                    / (12.0 * ((-disc) as f64).sqrt());
                acc += phi_fn(n as f64) * l_val * (n as f64).ln();
            }
            acc
        })
        .collect();
    let lhs: f64 = chunks.iter().sum();

    // right side: Euler-product constant times the integral of Phi
    let constant = (1.0 - 1.0 / (ell * ell) as f64)
        * l1_psi_tilde_ellt(t / ell as i64, ell, cache, convention)?;
    let integral = match phi {
        PhiChoice::One => b_end - a_end,
        PhiChoice::CosWeighted { .. } => {
            let gl = GaussLegendre::new(24);
            let mut f = phi_fn;
            gl.integrate(&mut f, a_end, b_end, 1e-9 * (b_end - a_end))?
        }
    };
    let rhs = constant * integral;
    let rel_err = (lhs / rhs - 1.0).abs();
    Ok(AverageCheck { lhs, rhs, rel_err, constant, integral })
}
