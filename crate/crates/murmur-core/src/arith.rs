//! Exact integer and rational primitives: prime sieves, factorization,
//! multiplicative functions, Kronecker symbols, Ramanujan sums and Chebyshev
//! polynomials of the second kind.
//!
//! Everything here is pure and reentrant; sieves and tables are immutable
//! after construction and can be shared freely across threads.

use crate::error::{Error, Result};

/// Greatest common divisor; `gcd(0, 0) = 0`.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Construction switches to segmented marking above this limit so the
/// working set of the base sieve stays bounded.
pub const DEFAULT_SEGMENT_THRESHOLD: u64 = 100_000_000;

const SEGMENT_LEN: u64 = 1 << 20;

/// Sieve of Eratosthenes with a complete primality bitmap over `[0, limit]`
/// and the ordered list of primes `<= limit`.
pub struct PrimeSieve {
    limit: u64,
    composite: Vec<u64>,
    primes: Vec<u64>,
}

impl PrimeSieve {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primality test for `n <= limit`.
    ///
    /// Panics if `n > limit`; querying past the sieve is a caller bug, not a
    /// recoverable condition.
    pub fn is_prime(&self, n: u64) -> bool {
        assert!(n <= self.limit, "is_prime({n}) beyond sieve limit {}", self.limit);
        n >= 2 && self.composite[(n >> 6) as usize] & (1 << (n & 63)) == 0
    }

    /// Iterator over primes in `[lo, hi]` (inclusive at both ends).
    pub fn primes_in(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> + '_ {
        let start = self.primes.partition_point(|&p| p < lo);
        self.primes[start..].iter().copied().take_while(move |&p| p <= hi)
    }
}

/// Build a [`PrimeSieve`] covering `[2, limit]`.
pub fn sieve_primes(limit: u64) -> Result<PrimeSieve> {
    sieve_primes_with_threshold(limit, DEFAULT_SEGMENT_THRESHOLD)
}

/// As [`sieve_primes`] with an explicit segmentation threshold.
pub fn sieve_primes_with_threshold(limit: u64, threshold: u64) -> Result<PrimeSieve> {
    if limit < 2 {
        return Err(Error::domain(format!("sieve limit must be >= 2, got {limit}")));
    }
    let words = ((limit >> 6) + 1) as usize;
    let mut composite = vec![0u64; words];
    let mark = |bits: &mut [u64], n: u64| bits[(n >> 6) as usize] |= 1 << (n & 63);

    if limit <= threshold {
        let mut p = 2u64;
        while p * p <= limit {
            if composite[(p >> 6) as usize] & (1 << (p & 63)) == 0 {
                let mut j = p * p;
                while j <= limit {
                    mark(&mut composite, j);
                    j += p;
                }
            }
            p += 1;
        }
    } else {
        // Base primes up to sqrt(limit), then strided marking per segment.
        let root = limit.isqrt();
        let base = sieve_primes_with_threshold(root.max(2), u64::MAX)?;
        let mut lo = root + 1;
        // replay the base marks so [0, root] is covered too
        for &q in base.primes() {
            let mut j = q * q;
            while j <= root {
                mark(&mut composite, j);
                j += q;
            }
        }
        while lo <= limit {
            let hi = (lo + SEGMENT_LEN - 1).min(limit);
            for &q in base.primes() {
                if q * q > hi {
                    break;
                }
                let mut j = lo.div_ceil(q) * q;
                if j < q * q {
                    j = q * q;
                }
                while j <= hi {
                    mark(&mut composite, j);
                    j += q;
                }
            }
            lo = hi + 1;
        }
    }

    mark(&mut composite, 0);
    mark(&mut composite, 1);
    let mut primes = Vec::with_capacity(est_prime_count(limit));
    for n in 2..=limit {
        if composite[(n >> 6) as usize] & (1 << (n & 63)) == 0 {
            primes.push(n);
        }
    }
    Ok(PrimeSieve { limit, composite, primes })
}

fn est_prime_count(limit: u64) -> usize {
    let x = limit as f64;
    (x / x.ln().max(1.0) * 1.15) as usize + 16
}

/// Deterministic primality by trial division; intended for small inputs
/// where no sieve is at hand.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization `n = prod p_i^{e_i}` with strictly increasing `p_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// All divisors, sorted ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let prev = divs.clone();
            let mut pe = 1u64;
            for _ in 0..e {
                pe *= p;
                divs.extend(prev.iter().map(|d| d * pe));
            }
        }
        divs.sort_unstable();
        divs
    }

    /// Moebius function; 0 when any exponent exceeds 1.
    pub fn mu(&self) -> i64 {
        if self.factors.iter().any(|&(_, e)| e > 1) {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e <= 1)
    }

    /// Greatest integer whose square divides `n`: `prod p^{floor(e/2)}`.
    pub fn square_part(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| p.pow(e / 2))
            .product()
    }
}

/// Factor `n >= 1` by trial division. `n = 1` yields an empty factor list.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::domain("factorize(0) is undefined"));
    }
    let mut m = n;
    let mut factors = Vec::new();
    let mut push = |p: u64, m: &mut u64| {
        let mut e = 0u32;
        while *m % p == 0 {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut m);
    push(3, &mut m);
    let mut d = 5u64;
    while d * d <= m {
        push(d, &mut m);
        push(d + 2, &mut m);
        d += 6;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(Factorization { n, factors })
}

/// Smallest-prime-factor table for fast repeated factorization of many
/// small integers (character averages hammer this).
pub struct SpfTable {
    spf: Vec<u32>,
}

impl SpfTable {
    pub fn build(limit: u64) -> SpfTable {
        let limit = limit.max(1) as usize;
        let mut spf = vec![0u32; limit + 1];
        let mut p = 2usize;
        while p <= limit {
            if spf[p] == 0 {
                let mut j = p;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = p as u32;
                    }
                    j += p;
                }
            }
            p += 1;
        }
        SpfTable { spf }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        if n == 0 {
            return Err(Error::domain("factorize(0) is undefined"));
        }
        assert!(n < self.spf.len() as u64, "SpfTable::factorize beyond table");
        let mut m = n as usize;
        let mut factors: Vec<(u64, u32)> = Vec::new();
        while m > 1 {
            let p = self.spf[m] as u64;
            let mut e = 0u32;
            while m as u64 % p == 0 {
                m /= p as usize;
                e += 1;
            }
            factors.push((p, e));
        }
        factors.sort_unstable();
        Ok(Factorization { n, factors })
    }
}

/// Kronecker symbol `(d / m)` for `m >= 0`, fully multiplicative in `m`,
/// with `(d/0) = 1` iff `|d| = 1` and the usual supplement at `m = 2`.
pub fn kronecker(d: i64, m: u64) -> i32 {
    if m == 0 {
        return if d.unsigned_abs() == 1 { 1 } else { 0 };
    }
    let mut n = m;
    let mut t: i32 = 1;
    let tz = n.trailing_zeros();
    if tz > 0 {
        if d & 1 == 0 {
            return 0;
        }
        if tz % 2 == 1 {
            // (d/2) = +1 for d = ±1 mod 8, −1 for d = ±3 mod 8
            let r = d.rem_euclid(8);
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        n >>= tz;
    }
    // Jacobi symbol (d/n) for odd n >= 1.
    if d < 0 && n % 4 == 3 {
        t = -t;
    }
    let mut a = d.unsigned_abs() % n;
    while a != 0 {
        let tz = a.trailing_zeros();
        if tz % 2 == 1 {
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        a >>= tz;
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Divisor count (`j = 0`) or divisor sum (`j = 1`).
pub fn sigma(j: u8, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::domain("sigma of 0 is undefined"));
    }
    if j > 1 {
        return Err(Error::domain(format!("sigma exponent must be 0 or 1, got {j}")));
    }
    let f = factorize(n)?;
    let mut acc: u64 = 1;
    for &(p, e) in f.factors() {
        let local = if j == 0 {
            u64::from(e) + 1
        } else {
            // 1 + p + ... + p^e
            let mut s: u64 = 1;
            let mut pe: u64 = 1;
            for _ in 0..e {
                pe = pe
                    .checked_mul(p)
                    .ok_or_else(|| Error::overflow(format!("sigma_1({n})")))?;
                s = s
                    .checked_add(pe)
                    .ok_or_else(|| Error::overflow(format!("sigma_1({n})")))?;
            }
            s
        };
        acc = acc
            .checked_mul(local)
            .ok_or_else(|| Error::overflow(format!("sigma_{j}({n})")))?;
    }
    Ok(acc)
}

/// Euler totient via factorization.
pub fn euler_phi(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::domain("euler_phi(0) is undefined"));
    }
    let f = factorize(n)?;
    let mut acc = n;
    for &(p, _) in f.factors() {
        acc = acc / p * (p - 1);
    }
    Ok(acc)
}

/// Ramanujan sum `c_q(m) = sum_{d | (q, m)} d mu(q/d)`.
///
/// The defining exponential sum over residues coprime to `q` is kept in the
/// test suite as an independent oracle; this closed form is the production
/// path.
pub fn ramanujan_sum(q: u64, m: i64) -> Result<i64> {
    if q == 0 {
        return Err(Error::domain("ramanujan_sum with modulus 0"));
    }
    let g = gcd(q, m.unsigned_abs());
    let g_divs = factorize(g)?.divisors();
    let mut acc: i64 = 0;
    for d in g_divs {
        let mu = factorize(q / d)?.mu();
        if mu != 0 {
            let term = (d as i64)
                .checked_mul(mu)
                .ok_or_else(|| Error::overflow(format!("c_{q}({m})")))?;
            acc = acc
                .checked_add(term)
                .ok_or_else(|| Error::overflow(format!("c_{q}({m})")))?;
        }
    }
    Ok(acc)
}

/// Tolerated excursion of the Chebyshev argument beyond `[-1, 1]` before the
/// input is rejected instead of clamped.
pub const CHEBYSHEV_CLAMP: f64 = 10.0 * f64::EPSILON;

/// Chebyshev polynomial of the second kind, `U_n(cos t) = sin((n+1)t)/sin t`,
/// evaluated by the three-term recurrence `U_{j+1} = 2x U_j - U_{j-1}`.
pub fn chebyshev_u(n: u32, x: f64) -> Result<f64> {
    if !(x.is_finite()) || x.abs() > 1.0 + CHEBYSHEV_CLAMP {
        return Err(Error::domain(format!("chebyshev_u argument {x} outside [-1, 1]")));
    }
    let x = x.clamp(-1.0, 1.0);
    let mut prev = 1.0; // U_0
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * x; // U_1
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Reduced fraction with 64-bit parts and overflow-checked arithmetic.
/// Denominator is always positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };

    pub fn new(num: i64, den: i64) -> Result<Rational> {
        if den == 0 {
            return Err(Error::domain("rational with zero denominator"));
        }
        let mut num = num as i128;
        let mut den = den as i128;
        if den < 0 {
            num = -num;
            den = -den;
        }
        let g = gcd(num.unsigned_abs() as u64, den as u64).max(1) as i128;
        num /= g;
        den /= g;
        Self::from_i128(num, den)
    }

    fn from_i128(num: i128, den: i128) -> Result<Rational> {
        if num > i64::MAX as i128 || num < i64::MIN as i128 || den > i64::MAX as i128 {
            return Err(Error::overflow(format!("rational {num}/{den}")));
        }
        Ok(Rational { num: num as i64, den: den as i64 })
    }

    pub fn from_integer(n: i64) -> Rational {
        Rational { num: n, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn checked_add(&self, rhs: &Rational) -> Result<Rational> {
        let num = self.num as i128 * rhs.den as i128 + rhs.num as i128 * self.den as i128;
        let den = self.den as i128 * rhs.den as i128;
        Self::reduce_i128(num, den)
    }

    pub fn checked_sub(&self, rhs: &Rational) -> Result<Rational> {
        let num = self.num as i128 * rhs.den as i128 - rhs.num as i128 * self.den as i128;
        let den = self.den as i128 * rhs.den as i128;
        Self::reduce_i128(num, den)
    }

    pub fn checked_mul(&self, rhs: &Rational) -> Result<Rational> {
        let num = self.num as i128 * rhs.num as i128;
        let den = self.den as i128 * rhs.den as i128;
        Self::reduce_i128(num, den)
    }

    fn reduce_i128(mut num: i128, mut den: i128) -> Result<Rational> {
        debug_assert!(den > 0);
        let g = gcd_i128(num.unsigned_abs(), den.unsigned_abs()).max(1) as i128;
        num /= g;
        den /= g;
        Self::from_i128(num, den)
    }
}

fn gcd_i128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}
