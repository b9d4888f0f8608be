//! Prime-counting error statistics in arithmetic progressions to square
//! moduli:
//!
//!   theta(x; m^2, a) = sum_{p <= x, p = a mod m^2} log p,
//!   E_theta = theta - x/phi(m^2),
//!   E(x, q^2) = max_{(a,q)=1} |psi(x; q^2, a) - x/phi(q^2)|,
//!
//! and the dyadic block averages `sum_{Q < q^2 <= 2Q} max_{u <= x} E(u, q^2)`
//! that quantify the square-moduli Bombieri-Vinogradov behaviour.

use crate::arith::{euler_phi, gcd, PrimeSieve};
use crate::error::{Error, Result};

/// Per-residue Chebyshev statistics for one square modulus.
#[derive(Clone, Debug)]
pub struct ApStats {
    /// The modulus `m^2`.
    pub modulus: u64,
    pub x: f64,
    /// `(a, theta(x; m^2, a))` over reduced residues a, ascending.
    pub theta: Vec<(u64, f64)>,
    /// `max_a |theta(x; m^2, a) - x/phi(m^2)|`.
    pub e_theta_max: f64,
    /// `max_a |psi(x; m^2, a) - x/phi(m^2)|` (von Mangoldt weights).
    pub e_lambda_max: f64,
}

/// Exact sums by sieve over `p <= x` (theta) and prime powers (psi).
pub fn ap_error_stats(x: f64, m: u64, sieve: &PrimeSieve) -> Result<ApStats> {
    if m == 0 {
        return Err(Error::domain("modulus base must be >= 1"));
    }
    if !(x >= 2.0) {
        return Err(Error::domain(format!("x must be >= 2, got {x}")));
    }
    let x_floor = x.floor() as u64;
    if sieve.limit() < x_floor {
        return Err(Error::Capacity {
            what: "prime sieve for AP statistics",
            required: x_floor,
            available: sieve.limit(),
        });
    }
    let m2 = m
        .checked_mul(m)
        .ok_or_else(|| Error::overflow(format!("m^2 for m = {m}")))?;
    let phi = euler_phi(m2)? as f64;

    let mut theta = vec![0.0f64; m2 as usize];
    let mut psi = vec![0.0f64; m2 as usize];
    for p in sieve.primes_in(2, x_floor) {
        if gcd(p, m2) != 1 {
            continue;
        }
        let lp = (p as f64).ln();
        theta[(p % m2) as usize] += lp;
        let mut pe = p;
        loop {
            psi[(pe % m2) as usize] += lp;
            match pe.checked_mul(p) {
                Some(next) if next <= x_floor => pe = next,
                _ => break,
            }
        }
    }

    let expected = x / phi;
    let mut theta_rows = Vec::new();
    let mut e_theta_max = 0.0f64;
    let mut e_lambda_max = 0.0f64;
    for a in 0..m2 {
        if gcd(a, m2) != 1 {
            continue;
        }
        let th = theta[a as usize];
        theta_rows.push((a, th));
        e_theta_max = e_theta_max.max((th - expected).abs());
        e_lambda_max = e_lambda_max.max((psi[a as usize] - expected).abs());
    }
    Ok(ApStats { modulus: m2, x, theta: theta_rows, e_theta_max, e_lambda_max })
}

/// One dyadic block of square moduli.
#[derive(Clone, Debug)]
pub struct BvAverage {
    pub q_block: f64,
    pub x: f64,
    /// `(q, max_{u <= x} E(u, q^2))` for `Q < q^2 <= 2Q`.
    pub per_modulus: Vec<(u64, f64)>,
    /// The block sum; 0 for an empty block.
    pub total: f64,
}

/// `sum_{Q < q^2 <= 2Q} max_{u <= x} E(u, q^2)` with the maximum over u
/// evaluated at the jump points of `psi(u; q^2, a)` (prime powers) and at
/// `x`; between its own jumps each residue's deviation is monotone in u,
/// so the endpoints realize the maximum.
pub fn bv_average(q_block: f64, x: f64, sieve: &PrimeSieve) -> Result<BvAverage> {
    if !(q_block >= 1.0) {
        return Err(Error::domain(format!("block start must be >= 1, got {q_block}")));
    }
    if !(x >= 2.0) {
        return Err(Error::domain(format!("x must be >= 2, got {x}")));
    }
    let x_floor = x.floor() as u64;
    if sieve.limit() < x_floor {
        return Err(Error::Capacity {
            what: "prime sieve for the block average",
            required: x_floor,
            available: sieve.limit(),
        });
    }

    // prime powers <= x, ascending, with their von Mangoldt weight
    let mut jumps: Vec<(u64, f64, u64)> = Vec::new(); // (p^e, log p, p)
    for p in sieve.primes_in(2, x_floor) {
        let lp = (p as f64).ln();
        let mut pe = p;
        loop {
            jumps.push((pe, lp, p));
            match pe.checked_mul(p) {
                Some(next) if next <= x_floor => pe = next,
                _ => break,
            }
        }
    }
    jumps.sort_unstable_by_key(|&(v, _, _)| v);

    let q_lo = (q_block.sqrt()).floor() as u64;
    let q_hi = ((2.0 * q_block).sqrt()).ceil() as u64;
    let mut per_modulus = Vec::new();
    let mut total = 0.0f64;
    for q in q_lo..=q_hi {
        let q2f = (q * q) as f64;
        if !(q_block < q2f && q2f <= 2.0 * q_block) {
            continue;
        }
        let m2 = q * q;
        let phi = euler_phi(m2)? as f64;
        let mut psi = vec![0.0f64; m2 as usize];
        let mut best = 0.0f64;
        for &(u, lp, p) in &jumps {
            if p % q == 0 {
                continue;
            }
            let a = (u % m2) as usize;
            let drift = u as f64 / phi;
            best = best.max((psi[a] - drift).abs());
            psi[a] += lp;
            best = best.max((psi[a] - drift).abs());
        }
        for a in 0..m2 {
            if gcd(a, m2) == 1 {
                best = best.max((psi[a as usize] - x / phi).abs());
            }
        }
        per_modulus.push((q, best));
        total += best;
    }
    Ok(BvAverage { q_block, x, per_modulus, total })
}
