//! Two independent evaluations of tr(T_n o W_{l^a}) on the newspace of
//! weight k and level l^a, for odd a >= 5 and prime n != l:
//!
//! * [`trace_direct`]: the Skoruppa-Zagier assembly
//!   `sum_{0<=j<=a} alpha(l^(a-j)) s_{k/2+1, l^j}(n, l^j)`, where each
//!   `s_{kappa,M}` combines class-number terms `p_{2kappa-2} H` with a
//!   gcd correction. The class-number part is accumulated in exact
//!   integer arithmetic (24 s is an integer), so the only rounding is the
//!   final conversion.
//! * [`trace_closed`]: the collapsed Ramanujan-sum form
//!   `(1/pi) sum_t c_{l^((a+1)/2)}(t)/sqrt(l) cos((k-1) phi_{t,ln}) L(1, psi_{t^2-4ln})`,
//!   supported on t = 0 mod l^((a-1)/2).
//!
//! Both return the normalized quantity `(-1)^{k/2} n^{(1-k)/2} tr`, which
//! equals the root-number-weighted eigenvalue sum `sum_f eps_f lambda_f(n)`.

use crate::arith::{factorize, gcd, is_prime_u64, ramanujan_sum};
use crate::error::{Error, Result};
use crate::lfunc::{l1_class_number, HurwitzTable};

/// One family of newforms: odd prime `ell`, odd depth exponent `a >= 5`
/// (the level is `ell^a`), even weight `k >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilyParams {
    ell: u64,
    a: u32,
    k: u32,
}

impl FamilyParams {
    pub fn new(ell: u64, a: u32, k: u32) -> Result<FamilyParams> {
        if ell < 3 || !is_prime_u64(ell) || ell % 2 == 0 {
            return Err(Error::domain(format!("level prime must be odd, got {ell}")));
        }
        if a < 5 || a % 2 == 0 {
            return Err(Error::domain(format!(
                "depth exponent must be odd and >= 5, got {a}"
            )));
        }
        if k < 2 || k % 2 == 1 {
            return Err(Error::domain(format!("weight must be even and >= 2, got {k}")));
        }
        Ok(FamilyParams { ell, a, k })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn exponent(&self) -> u32 {
        self.a
    }

    pub fn weight(&self) -> u32 {
        self.k
    }

    /// `ell^a`, guarded against overflow.
    pub fn level(&self) -> Result<u64> {
        self.ell
            .checked_pow(self.a)
            .ok_or_else(|| Error::overflow(format!("level {}^{}", self.ell, self.a)))
    }

    /// Sign `(-1)^{k/2}`.
    pub fn norm_sign(&self) -> f64 {
        if (self.k / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// One contributing term of the closed trace form.
#[derive(Clone, Copy, Debug)]
pub struct TraceTerm {
    pub t: i64,
    /// `c_{l^((a+1)/2)}(t) / sqrt(l)`.
    pub coefficient: f64,
    /// `phi_{t, ln}`.
    pub phase: f64,
    /// `L(1, psi_{t^2 - 4ln})`.
    pub l_value: f64,
    pub contribution: f64,
}

/// A normalized trace with an optional per-t breakdown (populated by the
/// closed route; the direct assembly has no per-t decomposition).
#[derive(Clone, Debug)]
pub struct TraceValue {
    pub normalized: f64,
    pub components: Vec<TraceTerm>,
}

/// The multiplicative function with alpha(p^j) = 1, -1, -1, 1 for
/// j = 0, 1, 2, 3 and 0 for j >= 4.
pub fn alpha(m: u64) -> Result<i32> {
    if m == 0 {
        return Err(Error::domain("alpha(0) is undefined"));
    }
    let mut acc = 1i32;
    for &(_, e) in factorize(m)?.factors() {
        match e {
            1 | 2 => acc = -acc,
            3 => {}
            _ => return Ok(0),
        }
    }
    Ok(acc)
}

/// `phi_{t,m} = arcsin(t / (2 sqrt(m)))`, defined for `t^2 < 4m`.
pub fn phase_phi(t: i64, m: f64) -> Result<f64> {
    let tf = t as f64;
    if !(m > 0.0) || tf * tf >= 4.0 * m {
        return Err(Error::domain(format!("phase needs t^2 < 4m, got t={t}, m={m}")));
    }
    Ok((tf / (2.0 * m.sqrt())).asin())
}

/// `p_k(t/sqrt(L), n)`: the degree-(k-2) kernel of the trace formula,
/// evaluated through the cosine form
/// `2 (-1)^{k/2+1} sqrt(L) n^{(k-1)/2} cos((k-1) phi_{t,Ln}) / sqrt(4Ln - t^2)`
/// when `t^2 - 4Ln < 0`, and `(k-1) (t / (2 sqrt(L)))^{k-2}` on the boundary.
pub fn p_weight(k: u32, t: i64, big_l: u64, n: u64) -> Result<f64> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::domain(format!("p_k needs even k >= 2, got {k}")));
    }
    if big_l == 0 || n == 0 {
        return Err(Error::domain("p_k needs L, n >= 1"));
    }
    let disc = (t as i128) * (t as i128) - 4 * (big_l as i128) * (n as i128);
    if disc > 0 {
        return Err(Error::domain(format!(
            "p_k needs t^2 - 4Ln <= 0, got t={t}, L={big_l}, n={n}"
        )));
    }
    let lf = big_l as f64;
    let nf = n as f64;
    if disc == 0 {
        let base = t as f64 / (2.0 * lf.sqrt());
        return Ok((k - 1) as f64 * base.powi(k as i32 - 2));
    }
    let sign = if (k / 2 + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let phi = phase_phi(t, lf * nf)?;
    Ok(2.0 * sign * lf.sqrt() * nf.powf((k as f64 - 1.0) / 2.0) * (((k - 1) as f64) * phi).cos()
        / (-disc as f64).sqrt())
}

/// Exact integer value of `p_k(T, n)` where `T^2 = w` is an integer and
/// `T^2 - 4n <= 0`. For even k the kernel is a polynomial in `T^2` and `n`
/// with integer coefficients, computed by the two-step recurrence
/// `e_{i+1} = (w - 2n) e_i - n^2 e_{i-1}`.
fn p_weight_exact(k: u32, w: u64, n: u64) -> Result<i128> {
    debug_assert!(k >= 2 && k % 2 == 0);
    let wi = w as i128;
    let ni = n as i128;
    if wi > 4 * ni {
        return Err(Error::domain(format!("p_k exact needs T^2 <= 4n, got {w} > 4*{n}")));
    }
    let ovf = || Error::overflow(format!("p_{k} exact at T^2={w}, n={n}"));
    if wi == 4 * ni {
        // boundary: (k-1) (T/2)^{k-2} = (k-1) (w/4)^{(k-2)/2}
        debug_assert_eq!(w % 4, 0);
        let mut acc: i128 = (k as i128) - 1;
        for _ in 0..(k - 2) / 2 {
            acc = acc.checked_mul(wi / 4).ok_or_else(ovf)?;
        }
        return Ok(acc);
    }
    let steps = (k - 2) / 2;
    let mut prev: i128 = 1; // e_0 = p_2
    if steps == 0 {
        return Ok(prev);
    }
    let mut cur: i128 = wi - ni; // e_1 = p_4
    let lin = wi - 2 * ni;
    let quad = ni.checked_mul(ni).ok_or_else(ovf)?;
    for _ in 1..steps {
        let next = lin
            .checked_mul(cur)
            .and_then(|x| x.checked_sub(quad.checked_mul(prev)?))
            .ok_or_else(ovf)?;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

fn checked_pow_i128(base: i128, exp: u32, what: &str) -> Result<i128> {
    let mut acc: i128 = 1;
    for _ in 0..exp {
        acc = acc
            .checked_mul(base)
            .ok_or_else(|| Error::overflow(what.to_string()))?;
    }
    Ok(acc)
}

/// `24 * s_{kappa, M}(n, M)` as an exact integer.
///
/// `s_{kappa,M}(n,M) = -1/2 sum_{L|M} sum_{t: L|t, t^2-4Ln<=0, ((t/L)^2, M/L) squarefree}
///     p_{2kappa-2}(t/sqrt(L), n) H(t^2-4Ln)
///   - 1/2 sum_{d|n} min(d, n/d)^{2kappa-3} (Q(M), d + n/d)
///   + [kappa=2] sigma_0(M) sigma_1(n)`.
fn s_km_24(kappa: u32, m_level: u64, n: u64, table: &HurwitzTable) -> Result<i128> {
    if kappa < 2 {
        return Err(Error::domain(format!("s_{{k,M}} needs kappa >= 2, got {kappa}")));
    }
    if n == 0 || m_level == 0 {
        return Err(Error::domain("s_{k,M} needs n, M >= 1"));
    }
    if gcd(n, m_level) != 1 {
        return Err(Error::domain(format!("s_{{k,M}} needs (n, M) = 1, got n={n}, M={m_level}")));
    }
    let required = 4u64
        .checked_mul(m_level)
        .and_then(|x| x.checked_mul(n))
        .ok_or_else(|| Error::overflow(format!("4Mn for M={m_level}, n={n}")))?;
    if required > table.limit() {
        return Err(Error::Capacity {
            what: "Hurwitz table for s_{k,M}",
            required,
            available: table.limit(),
        });
    }

    let k = 2 * kappa - 2;
    let m_fact = factorize(m_level)?;
    let ovf = || Error::overflow(format!("s_{{k,M}} at kappa={kappa}, M={m_level}, n={n}"));
    let mut acc24: i128 = 0;

    // class-number part: -1/2 * sum p_{2kappa-2} H, i.e. -(pval * 12H)/24
    for big_l in m_fact.divisors() {
        let cof = m_level / big_l;
        let mut u = 0i64;
        loop {
            let w = (u * u) as u64 * big_l; // (t/sqrt(L))^2 for t = L u
            if w > 4 * n {
                break;
            }
            // squarefree condition on ((t/L)^2, M/L) = (u^2, M/L)
            let g = gcd((u * u) as u64, cof);
            if factorize(g)?.is_squarefree() {
                let pval = p_weight_exact(k, w, n)?;
                let h12 = i128::from(if w == 4 * n {
                    table.twelve_h(0)
                } else {
                    table.twelve_h(big_l * (4 * n - w))
                });
                let signed = pval.checked_mul(h12).ok_or_else(ovf)?;
                // t = +-Lu are distinct terms with equal value; u = 0 once
                let mult = if u == 0 { 1 } else { 2 };
                acc24 = acc24.checked_sub(signed.checked_mul(mult).ok_or_else(ovf)?).ok_or_else(ovf)?;
            }
            u += 1;
        }
    }

    // gcd part: -1/2 sum_{d|n} min(d, n/d)^{2kappa-3} (Q(M), d + n/d)
    let q_m = m_fact.square_part();
    for d in factorize(n)?.divisors() {
        let mind = d.min(n / d) as i128;
        let pow = checked_pow_i128(mind, 2 * kappa - 3, "min(d, n/d)^(2kappa-3)")?;
        let g = gcd(q_m, d + n / d) as i128;
        acc24 = acc24
            .checked_sub(pow.checked_mul(g).and_then(|x| x.checked_mul(12)).ok_or_else(ovf)?)
            .ok_or_else(ovf)?;
    }

    // weight-2 correction
    if kappa == 2 {
        let extra = (crate::arith::sigma(0, m_level)? as i128)
            .checked_mul(crate::arith::sigma(1, n)? as i128)
            .and_then(|x| x.checked_mul(24))
            .ok_or_else(ovf)?;
        acc24 = acc24.checked_add(extra).ok_or_else(ovf)?;
    }

    Ok(acc24)
}

/// `s_{kappa, M}(n, M)` as a float (exact integer accumulation inside).
pub fn s_km(kappa: u32, m_level: u64, n: u64, table: &HurwitzTable) -> Result<f64> {
    Ok(s_km_24(kappa, m_level, n, table)? as f64 / 24.0)
}

fn validate_trace_args(params: &FamilyParams, n: u64) -> Result<()> {
    if !is_prime_u64(n) {
        return Err(Error::domain(format!("trace needs prime n, got {n}")));
    }
    if n == params.ell {
        return Err(Error::domain(format!("trace needs n != l, got n = l = {n}")));
    }
    Ok(())
}

/// Normalized trace by the Skoruppa-Zagier assembly
/// `tr = sum_{0<=j<=a} alpha(l^{a-j}) s_{k/2+1, l^j}(n, l^j)`; only
/// `j in [a-3, a]` contribute since alpha vanishes on fourth powers.
pub fn trace_direct(params: &FamilyParams, n: u64, table: &HurwitzTable) -> Result<TraceValue> {
    validate_trace_args(params, n)?;
    let kappa = params.k / 2 + 1;
    let mut tr24: i128 = 0;
    for j in (params.a - 3)..=params.a {
        let sign = alpha(params.ell.pow(params.a - j))?;
        debug_assert!(sign != 0);
        let m_level = params
            .ell
            .checked_pow(j)
            .ok_or_else(|| Error::overflow(format!("{}^{j}", params.ell)))?;
        let s = s_km_24(kappa, m_level, n, table)?;
        tr24 += i128::from(sign) * s;
    }
    let trace = tr24 as f64 / 24.0;
    let normalized = params.norm_sign() * trace * (n as f64).powf((1.0 - params.k as f64) / 2.0);
    Ok(TraceValue { normalized, components: Vec::new() })
}

/// Normalized trace by the closed Ramanujan-sum form, with a per-t
/// breakdown of every contributing term.
pub fn trace_closed(params: &FamilyParams, n: u64, table: &HurwitzTable) -> Result<TraceValue> {
    validate_trace_args(params, n)?;
    let ell = params.ell;
    let step = ell
        .checked_pow((params.a - 1) / 2)
        .ok_or_else(|| Error::overflow(format!("{}^{}", ell, (params.a - 1) / 2)))?;
    let q = step
        .checked_mul(ell)
        .ok_or_else(|| Error::overflow(format!("{}^{}", ell, (params.a + 1) / 2)))?;
    let four_ln = 4u64
        .checked_mul(ell)
        .and_then(|x| x.checked_mul(n))
        .ok_or_else(|| Error::overflow(format!("4ln for l={ell}, n={n}")))?;
    if four_ln > table.limit() {
        return Err(Error::Capacity {
            what: "Hurwitz table for the closed trace",
            required: four_ln,
            available: table.limit(),
        });
    }

    let sqrt_ell = (ell as f64).sqrt();
    let ln_f = (ell * n) as f64;
    let k1 = (params.k - 1) as f64;
    let mut components = Vec::new();
    let mut sum = 0.0f64;
    // support: t = 0 mod l^((a-1)/2), t^2 < 4ln; ascending t
    let mut j = 0i64;
    while (j * j) as u64 * step * step < four_ln {
        j += 1;
    }
    let j_max = j - 1;
    for j in -j_max..=j_max {
        let t = j * step as i64;
        let c = ramanujan_sum(q, t)? as f64;
        let coefficient = c / sqrt_ell;
        let disc = t * t - four_ln as i64;
        let l_value = l1_class_number(disc, table)?;
        let phase = phase_phi(t, ln_f)?;
        let contribution = coefficient * (k1 * phase).cos() * l_value;
        sum += contribution;
        components.push(TraceTerm { t, coefficient, phase, l_value, contribution });
    }
    Ok(TraceValue {
        normalized: sum / std::f64::consts::PI,
        components,
    })
}

/// `A(t, m) = cos((k-1) phi_{t,m}) L(1, psi_{t^2-4m})` for `t^2 < 4m`,
/// and 0 on the boundary `t^2 = 4m`.
pub fn a_value(t: i64, m: u64, k: u32, table: &HurwitzTable) -> Result<f64> {
    let disc = (t as i128) * (t as i128) - 4 * (m as i128);
    if disc > 0 {
        return Err(Error::domain(format!("A(t, m) needs t^2 <= 4m, got t={t}, m={m}")));
    }
    if disc == 0 {
        return Ok(0.0);
    }
    let phi = phase_phi(t, m as f64)?;
    Ok((((k - 1) as f64) * phi).cos() * l1_class_number(disc as i64, table)?)
}

/// The root-number-weighted eigenvalue sum `sum_f eps_f lambda_f(n)`;
/// definitionally the normalized closed trace.
pub fn epsilon_lambda_sum(params: &FamilyParams, n: u64, table: &HurwitzTable) -> Result<f64> {
    Ok(trace_closed(params, n, table)?.normalized)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::sigma;
    use crate::lfunc::{build_hurwitz_table, direct_hurwitz};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn alpha_cases() {
        assert_eq!(alpha(1).unwrap(), 1);
        for p in [3u64, 5] {
            assert_eq!(alpha(p).unwrap(), -1);
            assert_eq!(alpha(p * p).unwrap(), -1);
            assert_eq!(alpha(p * p * p).unwrap(), 1);
        }
        assert_eq!(alpha(16).unwrap(), 0);
        assert_eq!(alpha(12).unwrap(), 1); // alpha(4) alpha(3) = (-1)(-1)
        assert!(alpha(0).is_err());
    }

    #[test]
    fn phase_cases() {
        assert_eq!(phase_phi(0, 7.0).unwrap(), 0.0);
        for t in 1..5i64 {
            let m = 30.0;
            assert_eq!(phase_phi(t, m).unwrap(), -phase_phi(-t, m).unwrap());
        }
        assert!((phase_phi(1, 1.0).unwrap() - std::f64::consts::PI / 6.0).abs() < 1e-15);
        assert!(phase_phi(4, 4.0).is_err());
    }

    #[test]
    fn p_weight_weight_two_is_one() {
        for (t, l, n) in [(0i64, 1u64, 1u64), (1, 1, 5), (3, 2, 7), (-4, 3, 11)] {
            if (t * t) as u64 >= 4 * l * n {
                continue;
            }
            assert!((p_weight(2, t, l, n).unwrap() - 1.0).abs() < 1e-12, "t={t} L={l} n={n}");
        }
    }

    #[test]
    fn p_weight_symmetric_function_example() {
        // k=4, t=1, L=1, n=1: rho1^2 + rho1 rho2 + rho2^2 = t^2 - n = 0
        assert!(p_weight(4, 1, 1, 1).unwrap().abs() < 1e-14);
    }

    /// Complex-root oracle: p_k(T, n) = (rho1^{k-1} - rho2^{k-1})/(rho1 - rho2)
    /// with rho = (T +- i sqrt(4n - T^2))/2, computed by repeated complex
    /// multiplication.
    fn p_weight_complex_oracle(k: u32, t: i64, l: u64, n: u64) -> f64 {
        let tt = t as f64 / (l as f64).sqrt();
        let re = tt / 2.0;
        let im = (4.0 * n as f64 - tt * tt).sqrt() / 2.0;
        // rho2 = conj(rho1), so the ratio is Im(rho1^(k-1)) / Im(rho1)
        let mut pr = re;
        let mut pi = im;
        for _ in 1..(k - 1) {
            let nr = pr * re - pi * im;
            let ni = pr * im + pi * re;
            pr = nr;
            pi = ni;
        }
        pi / im
    }

    #[test]
    fn p_weight_matches_complex_roots() {
        let mut rng = StdRng::seed_from_u64(0xB0B5);
        let mut done = 0;
        while done < 200 {
            let l: u64 = rng.random_range(1..=20);
            let n: u64 = rng.random_range(1..=400);
            let t_max = (4 * l * n).isqrt() as i64;
            let t: i64 = rng.random_range(-t_max..=t_max);
            if (t * t) as u64 >= 4 * l * n {
                continue;
            }
            for k in [2u32, 4, 6, 8] {
                let ours = p_weight(k, t, l, n).unwrap();
                let oracle = p_weight_complex_oracle(k, t, l, n);
                let scale = ours.abs().max(oracle.abs()).max(1.0);
                assert!(
                    (ours - oracle).abs() / scale < 1e-10,
                    "k={k} t={t} L={l} n={n}: {ours} vs {oracle}"
                );
            }
            done += 1;
        }
    }

    #[test]
    fn p_weight_exact_matches_float() {
        let mut rng = StdRng::seed_from_u64(0xE) ;
        for _ in 0..500 {
            let l: u64 = rng.random_range(1..=9);
            let n: u64 = rng.random_range(1..=300);
            let u_max = (4 * n / l).isqrt() as i64;
            let u: i64 = rng.random_range(0..=u_max);
            let w = (u * u) as u64 * l;
            if w > 4 * n {
                continue;
            }
            for k in [2u32, 4, 6] {
                let exact = p_weight_exact(k, w, n).unwrap() as f64;
                // the float kernel sees T^2 = w through (t, L) = (u l, l)
                let fl = p_weight(k, u * l as i64, l, n).unwrap();
                let scale = exact.abs().max(fl.abs()).max(1.0);
                assert!((exact - fl).abs() / scale < 1e-9, "k={k} u={u} l={l} n={n}");
            }
        }
    }

    #[test]
    fn p_weight_rejects_positive_discriminant() {
        assert!(p_weight(4, 10, 1, 1).is_err());
        assert!(p_weight_exact(4, 100, 1).is_err());
    }

    #[test]
    fn square_free_condition_definitional_recheck() {
        // production path: gcd(u^2, M/L) squarefree via factorization;
        // oracle: scan d >= 2 with d^2 | g
        let is_sf_direct = |g: u64| -> bool {
            if g == 0 {
                return false;
            }
            let mut d = 2u64;
            while d * d <= g {
                if g % (d * d) == 0 {
                    return false;
                }
                d += 1;
            }
            true
        };
        let m_level = 3u64.pow(5);
        let n = 2u64;
        for big_l in factorize(m_level).unwrap().divisors() {
            let cof = m_level / big_l;
            let mut u = 0i64;
            while (u * u) as u64 * big_l <= 4 * n {
                let g = gcd((u * u) as u64, cof);
                let production = factorize(g).unwrap().is_squarefree();
                let direct = if g == 0 { is_sf_direct(cof) } else { is_sf_direct(g) };
                assert_eq!(production, direct, "L={big_l} u={u} g={g}");
                u += 1;
            }
        }
        // gcd(0, M/L) = M/L: the t = 0 term requires M/L squarefree
        assert_eq!(gcd(0, 9), 9);
        assert!(!factorize(9).unwrap().is_squarefree());
    }

    /// Independent assembly of s_{kappa,M} from p_weight_exact and the
    /// bare per-discriminant class-number count.
    fn s_km_test_oracle(kappa: u32, m_level: u64, n: u64) -> f64 {
        let k = 2 * kappa - 2;
        let mut sum = 0.0f64;
        for big_l in factorize(m_level).unwrap().divisors() {
            let cof = m_level / big_l;
            let mut u = -((4 * n / big_l).isqrt() as i64 + 1);
            while (u * u) as u64 * big_l > 4 * n {
                u += 1;
            }
            while (u * u) as u64 * big_l <= 4 * n {
                let g = gcd((u * u) as u64, cof);
                if factorize(g).unwrap().is_squarefree() {
                    let w = (u * u) as u64 * big_l;
                    let p = p_weight_exact(k, w, n).unwrap() as f64;
                    let h = direct_hurwitz(big_l * (4 * n - w)).unwrap().to_f64();
                    sum -= 0.5 * p * h;
                }
                u += 1;
            }
        }
        let q_m = factorize(m_level).unwrap().square_part();
        for d in factorize(n).unwrap().divisors() {
            let mind = d.min(n / d) as f64;
            sum -= 0.5 * mind.powi(2 * kappa as i32 - 3) * gcd(q_m, d + n / d) as f64;
        }
        if kappa == 2 {
            sum += sigma(0, m_level).unwrap() as f64 * sigma(1, n).unwrap() as f64;
        }
        sum
    }

    #[test]
    fn s_km_matches_independent_assembly() {
        let table = build_hurwitz_table(4 * 243 * 7).unwrap();
        for kappa in [2u32, 3, 4] {
            for m_level in [1u64, 3, 9, 27, 243] {
                for n in [2u64, 5, 7] {
                    let ours = s_km(kappa, m_level, n, &table).unwrap();
                    let oracle = s_km_test_oracle(kappa, m_level, n);
                    assert!(
                        (ours - oracle).abs() < 1e-9,
                        "kappa={kappa} M={m_level} n={n}: {ours} vs {oracle}"
                    );
                }
            }
        }
    }

    #[test]
    fn s_km_weight_two_flag_difference() {
        let table = build_hurwitz_table(4 * 9 * 5).unwrap();
        // the kappa = 2 value minus the same assembly without the last term
        // equals sigma_0(M) sigma_1(n)
        let m_level = 9u64;
        let n = 5u64;
        let with_flag = s_km(2, m_level, n, &table).unwrap();
        let without = s_km_test_oracle(2, m_level, n)
            - sigma(0, m_level).unwrap() as f64 * sigma(1, n).unwrap() as f64;
        let diff = with_flag - without;
        let expect = sigma(0, m_level).unwrap() as f64 * sigma(1, n).unwrap() as f64;
        assert!((diff - expect).abs() < 1e-9);
    }

    #[test]
    fn s_km_gcd_term_prime_power_specialization() {
        // Q(l^alpha) = l^(alpha/2 floor); at prime n the gcd sum collapses
        // to a single gcd
        assert_eq!(factorize(243).unwrap().square_part(), 9);
        assert_eq!(factorize(3u64.pow(4)).unwrap().square_part(), 9);
        let table = build_hurwitz_table(4 * 243 * 5).unwrap();
        // difference of two kappa values isolates nothing here; instead
        // verify against the oracle with the collapsed gcd
        let n = 5u64;
        for alpha in [2u32, 3, 4, 5] {
            let m_level = 3u64.pow(alpha);
            let ours = s_km(3, m_level, n, &table).unwrap();
            let mut oracle = s_km_test_oracle(3, m_level, n);
            // replace the oracle's gcd part by the specialized form to show
            // they coincide for prime n
            let q_m = 3u64.pow(alpha / 2);
            let generic: f64 = factorize(n)
                .unwrap()
                .divisors()
                .iter()
                .map(|&d| {
                    0.5 * (d.min(n / d) as f64).powi(3) * gcd(q_m, d + n / d) as f64
                })
                .sum();
            let specialized = gcd(q_m, n + 1) as f64;
            oracle += generic - specialized;
            assert!((ours - oracle).abs() < 1e-9, "alpha={alpha}");
        }
    }

    #[test]
    fn s_km_rejects_shared_factor() {
        let table = build_hurwitz_table(100).unwrap();
        assert!(s_km(3, 9, 3, &table).is_err());
        assert!(matches!(
            s_km(3, 243, 7, &table),
            Err(Error::Capacity { .. })
        ));
    }

    fn small_table(ell: u64, a: u32, n_max: u64) -> HurwitzTable {
        build_hurwitz_table(4 * ell.pow(a) * n_max).unwrap()
    }

    #[test]
    fn direct_equals_closed_on_sample() {
        let table = small_table(3, 5, 13);
        let params = FamilyParams::new(3, 5, 4).unwrap();
        let d = trace_direct(&params, 2, &table).unwrap().normalized;
        let c = trace_closed(&params, 2, &table).unwrap().normalized;
        assert!((d - c).abs() / c.abs().max(1e-10) < 1e-8, "{d} vs {c}");
    }

    #[test]
    fn direct_equals_closed_small_grid() {
        let table = small_table(3, 5, 47);
        for k in [2u32, 4, 6] {
            let params = FamilyParams::new(3, 5, k).unwrap();
            for n in [2u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
                let d = trace_direct(&params, n, &table).unwrap().normalized;
                let c = trace_closed(&params, n, &table).unwrap().normalized;
                let err = (d - c).abs();
                let ok = if c.abs() < 1.0 { err < 1e-10 } else { err / c.abs() < 1e-8 };
                assert!(ok, "k={k} n={n}: direct {d} closed {c}");
            }
        }
    }

    #[test]
    fn trace_integrality() {
        let table = small_table(3, 5, 13);
        let params = FamilyParams::new(3, 5, 2).unwrap();
        for n in [2u64, 5, 7, 11, 13] {
            let tv = trace_direct(&params, n, &table).unwrap();
            let unnorm = tv.normalized * params.norm_sign()
                * (n as f64).powf((params.weight() as f64 - 1.0) / 2.0);
            assert!((unnorm - unnorm.round()).abs() < 1e-6, "n={n}: {unnorm}");
        }
    }

    #[test]
    fn trace_deterministic_across_table_rebuild() {
        let params = FamilyParams::new(3, 5, 2).unwrap();
        let t1 = small_table(3, 5, 7);
        let t2 = small_table(3, 5, 7);
        let a = trace_direct(&params, 7, &t1).unwrap().normalized;
        let b = trace_direct(&params, 7, &t2).unwrap().normalized;
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn closed_support_and_symmetry() {
        let table = small_table(3, 5, 61);
        let params = FamilyParams::new(3, 5, 4).unwrap();
        let step = 3u64.pow(2) as i64;
        let q = 3u64.pow(3);
        // off-support t: the Ramanujan coefficient vanishes identically
        let four_ln = 4 * 3 * 61;
        for t in -(four_ln as i64)..=(four_ln as i64) {
            if t.rem_euclid(step) != 0 && (t * t) < four_ln as i64 {
                assert_eq!(ramanujan_sum(q, t).unwrap(), 0, "t={t}");
            }
        }
        // +-t carry equal L-values (the discriminant is even in t)
        let tv = trace_closed(&params, 61, &table).unwrap();
        for term in &tv.components {
            let mirror = tv
                .components
                .iter()
                .find(|u| u.t == -term.t)
                .expect("mirror term");
            assert_eq!(term.l_value.to_bits(), mirror.l_value.to_bits());
        }
        // vacuous-term audit: summing only the recorded components
        // reproduces the trace
        let sum: f64 = tv.components.iter().map(|c| c.contribution).sum();
        assert!((sum / std::f64::consts::PI - tv.normalized).abs() < 1e-15);
    }

    #[test]
    fn trace_rejects_bad_n() {
        let table = small_table(3, 5, 7);
        let params = FamilyParams::new(3, 5, 4).unwrap();
        assert!(trace_direct(&params, 3, &table).is_err());
        assert!(trace_direct(&params, 6, &table).is_err());
        assert!(trace_closed(&params, 9, &table).is_err());
        assert!(FamilyParams::new(3, 4, 4).is_err());
        assert!(FamilyParams::new(3, 3, 4).is_err());
        assert!(FamilyParams::new(2, 5, 4).is_err());
        assert!(FamilyParams::new(9, 5, 4).is_err());
        assert!(FamilyParams::new(3, 5, 3).is_err());
    }

    #[test]
    fn a_value_examples() {
        let table = build_hurwitz_table(600).unwrap();
        for k in [2u32, 4, 6] {
            let v = a_value(0, 1, k, &table).unwrap();
            assert!((v - std::f64::consts::PI / 4.0).abs() < 1e-14, "k={k}");
        }
        assert_eq!(a_value(2, 1, 4, &table).unwrap(), 0.0);
        assert!(a_value(3, 1, 4, &table).is_err());
    }

    #[test]
    fn a_value_prime_power_scaling_identity() {
        // A(l^j t, l^j n) = l^{-(j-1)/2} sigma_1(l^{(j-1)/2}) A(l^{(j+1)/2} t, l n)
        // for odd j, on arguments where both sides are defined
        let ell = 3u64;
        let table = build_hurwitz_table(40_000).unwrap();
        let cases = [
            (1u32, 1i64, 2u64),
            (1, 1, 5),
            (1, 2, 5),
            (3, 1, 7),
            (3, 1, 31),
            (3, 2, 31),
        ];
        for k in [2u32, 4] {
            for &(j, t, n) in &cases {
                let lj = ell.pow(j) as i64;
                if lj * t * t >= 4 * n as i64 {
                    continue;
                }
                let lhs = a_value(lj * t, ell.pow(j) * n, k, &table).unwrap();
                let half = ell.pow((j - 1) / 2);
                let scale = sigma(1, half).unwrap() as f64 / (half as f64);
                let rhs = scale
                    * a_value(ell.pow((j + 1) / 2) as i64 * t, ell * n, k, &table).unwrap();
                let denom = lhs.abs().max(rhs.abs()).max(1e-12);
                assert!((lhs - rhs).abs() / denom < 1e-8, "j={j} t={t} n={n} k={k}");
            }
        }
    }

    #[test]
    fn epsilon_lambda_sum_delegates_and_is_bounded() {
        let table = small_table(3, 5, 13);
        let params = FamilyParams::new(3, 5, 4).unwrap();
        for n in [2u64, 5, 13] {
            let a = epsilon_lambda_sum(&params, n, &table).unwrap();
            let b = trace_closed(&params, n, &table).unwrap().normalized;
            assert_eq!(a.to_bits(), b.to_bits());
            // Deligne + dimension-scale sanity interval
            let dim = 3.0 / 12.0 * 243.0 * (2.0f64 / 3.0).powi(2) * (4.0 / 3.0);
            assert!(a.abs() <= 2.0 * dim * 1.5, "n={n}: {a}");
        }
    }
}
