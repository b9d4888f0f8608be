//! Local averages of discriminant characters over residues modulo m^2:
//!
//!   psi~_t^(l)(m) = 1/phi(m^2) * sum_{n mod m^2, (n,m)=1} psi_{t^2-4ln}(m)
//!
//! with l = 1 giving the level-free average psi~_t. Values are exact
//! rationals; the average is multiplicative in m.

use super::discriminant::decompose_from_factorization;
use crate::arith::{euler_phi, gcd, is_prime_u64, Rational, SpfTable};
use crate::error::{Error, Result};

/// Exact evaluation of `psi~_t^(l)(m)` by direct enumeration of residues.
pub fn psi_tilde_local(t: i64, ell: u64, m: u64) -> Result<Rational> {
    if m == 0 {
        return Err(Error::domain("psi~ average needs m >= 1"));
    }
    if ell != 1 && !is_prime_u64(ell) {
        return Err(Error::domain(format!("psi~ level slot must be 1 or prime, got {ell}")));
    }
    if m == 1 {
        return Ok(Rational::ONE);
    }
    let m2 = m
        .checked_mul(m)
        .ok_or_else(|| Error::overflow(format!("m^2 for m = {m}")))?;
    let t2 = (t as i128) * (t as i128);
    let max_abs = t2 + 4 * (ell as i128) * (m2 as i128);
    if max_abs > i64::MAX as i128 {
        return Err(Error::overflow(format!("discriminants for t = {t}, l = {ell}, m = {m}")));
    }
    let spf = SpfTable::build(max_abs as u64);

    let mut sum: i64 = 0;
    for n in 1..m2 {
        if gcd(n, m) != 1 {
            continue;
        }
        let disc = (t2 - 4 * (ell as i128) * (n as i128)) as i64;
        let v = if disc == 0 {
            1
        } else {
            let f = spf.factorize(disc.unsigned_abs())?;
            decompose_from_factorization(disc, &f).eval(m)
        };
        sum += i64::from(v);
    }
    Rational::new(sum, euler_phi(m2)? as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_one_is_one() {
        assert_eq!(psi_tilde_local(7, 3, 1).unwrap(), Rational::ONE);
        assert_eq!(psi_tilde_local(0, 1, 1).unwrap(), Rational::ONE);
    }

    #[test]
    fn hand_computed_example() {
        // t = 0, l = 3, m = 2: residues n in {1, 3} mod 4;
        // psi_{-12}(2) = (-3/1) = 1 and psi_{-36}(2) = 0, so the mean is 1/2.
        assert_eq!(psi_tilde_local(0, 3, 2).unwrap(), Rational::new(1, 2).unwrap());
    }

    #[test]
    fn vanishes_at_ell_powers_when_ell_divides_t() {
        for (t, ell) in [(3i64, 3u64), (6, 3), (0, 3), (10, 5)] {
            for b in 1..=2u32 {
                let m = ell.pow(b);
                assert_eq!(
                    psi_tilde_local(t, ell, m).unwrap(),
                    Rational::ZERO,
                    "t={t} l={ell} m={m}"
                );
            }
        }
    }

    #[test]
    fn multiplicative_in_m() {
        for t in [0i64, 3, 6] {
            for m1 in 1u64..=36 {
                for m2 in 1..=36 / m1 {
                    if gcd(m1, m2) != 1 {
                        continue;
                    }
                    let lhs = psi_tilde_local(t, 3, m1 * m2).unwrap();
                    let rhs = psi_tilde_local(t, 3, m1)
                        .unwrap()
                        .checked_mul(&psi_tilde_local(t, 3, m2).unwrap())
                        .unwrap();
                    assert_eq!(lhs, rhs, "t={t} m1={m1} m2={m2}");
                }
            }
        }
    }

    #[test]
    fn level_slot_invisible_away_from_ell() {
        // psi~_t^(l)(p^b) = psi~_t(p^b) for p != l
        for p in [2u64, 5, 7] {
            for b in 1..=2u32 {
                let m = p.pow(b);
                for t in [1i64, 3, 4] {
                    assert_eq!(
                        psi_tilde_local(t, 3, m).unwrap(),
                        psi_tilde_local(t, 1, m).unwrap(),
                        "p={p} b={b} t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(psi_tilde_local(1, 4, 2).is_err());
        assert!(psi_tilde_local(1, 1, 0).is_err());
    }
}
