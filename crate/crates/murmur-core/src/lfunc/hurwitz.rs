//! Hurwitz-Kronecker class numbers H(n): weighted counts of positive
//! definite binary quadratic forms (a, b, c) of discriminant b^2 - 4ac = -n,
//! not necessarily primitive. Forms equivalent to a multiple of x^2 + y^2
//! weigh 1/2, multiples of x^2 + xy + y^2 weigh 1/3, everything else 1,
//! and H(0) = -1/12.
//!
//! The table stores 12 H(n) as an i32 so every value is exact; it is the
//! backbone of all L(1, psi_D) evaluations with D < 0.

use rayon::prelude::*;
use std::io::{Read, Write};
use std::path::Path;

use crate::arith::Rational;
use crate::error::{Error, Result};

const MAGIC: &[u8; 5] = b"HURW1";
const CHUNK: usize = 1 << 21;

/// Exact table of `12 H(n)` for `0 <= n <= limit`.
pub struct HurwitzTable {
    limit: u64,
    twelve_h: Vec<i32>,
}

/// Weight of the reduced representative (a, b, c), scaled by 12, counting
/// the mirror (a, -b, c) when it is a distinct reduced form.
/// Reduced means |b| <= a <= c with b >= 0 whenever |b| = a or a = c.
#[inline]
fn weight12(a: u64, b: u64, c: u64) -> i32 {
    if c == a {
        if b == a {
            4 // multiples of x^2 + xy + y^2
        } else if b == 0 {
            6 // multiples of x^2 + y^2
        } else {
            12
        }
    } else if b == 0 || b == a {
        12
    } else {
        24 // (a, b, c) and (a, -b, c) both reduced
    }
}

/// Build the table by a single pass over reduced triples with
/// `4ac - b^2 <= X`, segmented over the n-axis and parallel per segment.
pub fn build_hurwitz_table(limit: u64) -> Result<HurwitzTable> {
    if limit < 4 {
        return Err(Error::domain(format!("Hurwitz table limit must be >= 4, got {limit}")));
    }
    if limit >= i64::MAX as u64 / 8 {
        return Err(Error::overflow(format!("Hurwitz table limit {limit}")));
    }
    let len = (limit + 1) as usize;
    let mut twelve_h = vec![0i32; len];
    twelve_h[0] = -1;

    let body = &mut twelve_h[1..];
    body.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
        // chunk covers n in [lo, hi]
        let lo = (ci * CHUNK + 1) as u64;
        let hi = lo + chunk.len() as u64 - 1;
        let mut a = 1u64;
        while 3 * a * a <= hi {
            let fa = 4 * a;
            for b in 0..=a {
                let bb = b * b;
                // n = 4ac - b^2 in [lo, hi] and c >= a
                let c_lo = std::cmp::max(a, (lo + bb).div_ceil(fa));
                let c_hi = (hi + bb) / fa;
                if c_lo > c_hi {
                    continue;
                }
                let mut n = fa * c_lo - bb;
                if c_lo == a {
                    chunk[(n - lo) as usize] += weight12(a, b, c_lo);
                    n += fa;
                }
                let w = if b == 0 || b == a { 12 } else { 24 };
                let mut c = c_lo + u64::from(c_lo == a);
                while c <= c_hi {
                    chunk[(n - lo) as usize] += w;
                    n += fa;
                    c += 1;
                }
            }
            a += 1;
        }
    });

    Ok(HurwitzTable { limit, twelve_h })
}

impl HurwitzTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// `12 H(n)`; exact (-1 at n = 0).
    pub fn twelve_h(&self, n: u64) -> i32 {
        assert!(n <= self.limit, "Hurwitz table lookup {n} beyond limit {}", self.limit);
        self.twelve_h[n as usize]
    }

    /// `H(n)` as an exact rational.
    pub fn h(&self, n: u64) -> Rational {
        Rational::new(i64::from(self.twelve_h(n)), 12).expect("12H fits i64")
    }

    /// `H(n)` as a float; the only rounding is the final division.
    pub fn h_f64(&self, n: u64) -> f64 {
        f64::from(self.twelve_h(n)) / 12.0
    }

    /// Structural integrity check: support pattern, H(0), nonnegativity,
    /// and spot agreement with the independent per-discriminant count.
    pub fn check(&self, spot_checks: &[u64]) -> Result<()> {
        if self.twelve_h[0] != -1 {
            return Err(Error::State(format!(
                "H(0) must be -1/12, table holds {}/12",
                self.twelve_h[0]
            )));
        }
        for (n, &v) in self.twelve_h.iter().enumerate().skip(1) {
            let r = n % 4;
            if (r == 1 || r == 2) && v != 0 {
                return Err(Error::State(format!("H({n}) = {v}/12 but {n} = 1,2 mod 4")));
            }
            if v < 0 {
                return Err(Error::State(format!("negative table entry 12H({n}) = {v}")));
            }
        }
        for &n in spot_checks {
            let direct = direct_hurwitz(n)?;
            if self.h(n) != direct {
                return Err(Error::State(format!(
                    "H({n}) mismatch: table {} vs direct count {}",
                    self.h(n),
                    direct
                )));
            }
        }
        Ok(())
    }

    /// Serialize as magic "HURW1", little-endian u64 limit, then
    /// `limit + 1` little-endian i32 values of `12 H(n)`.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&self.limit.to_le_bytes())?;
        let mut buf = Vec::with_capacity(4 << 10);
        for chunk in self.twelve_h.chunks(1 << 10) {
            buf.clear();
            for v in chunk {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<HurwitzTable> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse { line: 1, msg: "bad magic, expected HURW1".into() });
        }
        let mut lim = [0u8; 8];
        r.read_exact(&mut lim)?;
        let limit = u64::from_le_bytes(lim);
        if limit < 4 || limit > u32::MAX as u64 * 16 {
            return Err(Error::Parse { line: 1, msg: format!("implausible limit {limit}") });
        }
        let mut twelve_h = vec![0i32; (limit + 1) as usize];
        let mut buf = vec![0u8; 4 << 10];
        let mut filled = 0usize;
        while filled < twelve_h.len() {
            let want = ((twelve_h.len() - filled) * 4).min(buf.len());
            r.read_exact(&mut buf[..want])?;
            for (i, word) in buf[..want].chunks_exact(4).enumerate() {
                twelve_h[filled + i] = i32::from_le_bytes(word.try_into().unwrap());
            }
            filled += want / 4;
        }
        Ok(HurwitzTable { limit, twelve_h })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<HurwitzTable> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }

    #[cfg(test)]
    pub(crate) fn corrupt_for_test(&mut self, n: u64, value: i32) {
        self.twelve_h[n as usize] = value;
    }
}

/// Independent per-discriminant count: a bare triple loop over reduced
/// forms, no sieve shared with [`build_hurwitz_table`].
pub fn direct_hurwitz(n: u64) -> Result<Rational> {
    if n == 0 {
        return Rational::new(-1, 12);
    }
    let r = n % 4;
    if r == 1 || r == 2 {
        return Ok(Rational::ZERO);
    }
    let mut total12: i64 = 0;
    let mut b = 0u64;
    while b * b <= n {
        let m = n + b * b; // 4ac
        if m % 4 == 0 {
            let ac = m / 4;
            let mut a = std::cmp::max(b, 1);
            while a * a <= ac {
                if ac % a == 0 {
                    total12 += i64::from(weight12(a, b, ac / a));
                }
                a += 1;
            }
        }
        b += 1;
    }
    Rational::new(total12, 12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn known_small_values() {
        let t = build_hurwitz_table(100).unwrap();
        assert_eq!(t.h(0), Rational::new(-1, 12).unwrap());
        assert_eq!(t.h(3), Rational::new(1, 3).unwrap());
        assert_eq!(t.h(4), Rational::new(1, 2).unwrap());
        assert_eq!(t.h(12), Rational::new(4, 3).unwrap());
        assert_eq!(t.h(23), Rational::from_integer(3));
        assert_eq!(t.h(7), Rational::from_integer(1));
        assert_eq!(t.h(16), Rational::new(3, 2).unwrap());
        assert_eq!(t.h(27), Rational::new(4, 3).unwrap());
        assert_eq!(t.h(1), Rational::ZERO);
        assert_eq!(t.h(2), Rational::ZERO);
        assert!(build_hurwitz_table(3).is_err());
    }

    #[test]
    fn direct_count_agrees_on_known_values() {
        assert_eq!(direct_hurwitz(3).unwrap(), Rational::new(1, 3).unwrap());
        assert_eq!(direct_hurwitz(4).unwrap(), Rational::new(1, 2).unwrap());
        assert_eq!(direct_hurwitz(23).unwrap(), Rational::from_integer(3));
        assert_eq!(direct_hurwitz(12).unwrap(), Rational::new(4, 3).unwrap());
        assert_eq!(direct_hurwitz(0).unwrap(), Rational::new(-1, 12).unwrap());
    }

    #[test]
    fn table_matches_direct_count_at_random_points() {
        let t = build_hurwitz_table(10_000).unwrap();
        let mut rng = StdRng::seed_from_u64(0x48555257);
        for _ in 0..50 {
            let n: u64 = rng.random_range(1..=10_000);
            assert_eq!(t.h(n), direct_hurwitz(n).unwrap(), "H({n})");
        }
    }

    #[test]
    fn table_matches_direct_count_exhaustively_small() {
        let t = build_hurwitz_table(600).unwrap();
        for n in 0..=600u64 {
            assert_eq!(t.h(n), direct_hurwitz(n).unwrap(), "H({n})");
        }
    }

    #[test]
    fn integrity_check_detects_corruption() {
        let mut t = build_hurwitz_table(100).unwrap();
        t.check(&[3, 4, 23, 47]).unwrap();
        t.corrupt_for_test(5, 7); // 5 = 1 mod 4 must stay zero
        assert!(t.check(&[]).is_err());
        let mut t2 = build_hurwitz_table(100).unwrap();
        t2.corrupt_for_test(23, 35);
        assert!(t2.check(&[23]).is_err());
    }

    #[test]
    fn dump_round_trip_is_bit_exact() {
        let t = build_hurwitz_table(4_321).unwrap();
        let mut bytes = Vec::new();
        t.write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..5], b"HURW1");
        let u = HurwitzTable::read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(t.limit(), u.limit());
        assert_eq!(t.twelve_h, u.twelve_h);
        let mut again = Vec::new();
        u.write_to(&mut again).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn save_load_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.tbl");
        let t = build_hurwitz_table(500).unwrap();
        t.save(&path).unwrap();
        let u = HurwitzTable::load(&path).unwrap();
        assert_eq!(t.twelve_h, u.twelve_h);
    }
}
