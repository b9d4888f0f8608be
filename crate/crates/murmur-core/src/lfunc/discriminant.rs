//! Discriminants D = d L^2 and the attached Kronecker character
//! psi_D(m) = (d / (m / (m, L))), with psi_0 identically 1.

use crate::arith::{gcd, kronecker, Factorization};
use crate::error::{Error, Result};

/// A discriminant `D = 0, 1 mod 4` split into its fundamental part `d` and
/// cofactor `L >= 0`, carrying the character `psi_D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscriminantChar {
    disc: i64,
    d: i64,
    l: u64,
}

impl DiscriminantChar {
    pub fn disc(&self) -> i64 {
        self.disc
    }

    /// Fundamental discriminant part (1 for nonzero perfect squares; by
    /// convention 1 with `L = 0` for `D = 0`).
    pub fn fundamental(&self) -> i64 {
        self.d
    }

    pub fn cofactor(&self) -> u64 {
        self.l
    }

    pub fn is_zero(&self) -> bool {
        self.disc == 0
    }

    /// Evaluate `psi_D(m) = (d / (m / (m, L)))`; `psi_0` is identically 1.
    pub fn eval(&self, m: u64) -> i32 {
        if self.disc == 0 {
            return 1;
        }
        kronecker(self.d, m / gcd(m, self.l))
    }
}

fn is_fundamental(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    if d == 0 {
        return false;
    }
    let a = d.unsigned_abs();
    match d.rem_euclid(4) {
        1 => squarefree(a),
        0 => {
            let m = d / 4;
            let r = m.rem_euclid(4);
            (r == 2 || r == 3) && squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

fn squarefree(n: u64) -> bool {
    crate::arith::factorize(n).map(|f| f.is_squarefree()).unwrap_or(false)
}

/// Split `D = d L^2` with `d` fundamental. Requires `D = 0, 1 mod 4`.
pub fn decompose_discriminant(disc: i64) -> Result<DiscriminantChar> {
    let r = disc.rem_euclid(4);
    if r == 2 || r == 3 {
        return Err(Error::domain(format!("{disc} is not a discriminant (2, 3 mod 4)")));
    }
    if disc == 0 {
        return Ok(DiscriminantChar { disc: 0, d: 1, l: 0 });
    }
    let f = crate::arith::factorize(disc.unsigned_abs())?;
    Ok(decompose_from_factorization(disc, &f))
}

/// As [`decompose_discriminant`] but reusing a precomputed factorization of
/// `|D|`; the hot loops in the character averages go through here.
pub(crate) fn decompose_from_factorization(disc: i64, f: &Factorization) -> DiscriminantChar {
    debug_assert_eq!(f.value(), disc.unsigned_abs());
    let mut sf: i64 = disc.signum();
    let mut l: u64 = 1;
    for &(p, e) in f.factors() {
        l *= p.pow(e / 2);
        if e % 2 == 1 {
            sf *= p as i64;
        }
    }
    // sf is the squarefree part with sign; promote to a fundamental d
    let (d, l) = if sf.rem_euclid(4) == 1 {
        (sf, l)
    } else {
        debug_assert_eq!(l % 2, 0, "D = 0,1 mod 4 forces an even cofactor here");
        (4 * sf, l / 2)
    };
    debug_assert!(is_fundamental(d), "{d} not fundamental (from {disc})");
    DiscriminantChar { disc, d, l }
}
