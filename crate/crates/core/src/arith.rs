//! Exact integer utilities: Jacobi symbols, trial-division factorization,
//! Möbius function and CRT.
//!
//! All moduli that occur in the class-number computations are below 10^10,
//! so `u64`/`i64` with `u128` intermediates is enough everywhere.

use crate::error::{invalid, Result};

/// Prime factorization of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub value: u64,
    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Prime powers `p^k` exactly dividing the value.
    pub fn prime_powers(&self) -> Vec<u64> {
        self.factors.iter().map(|&(p, e)| p.pow(e)).collect()
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

/// Non-negative residue of `m` modulo `k`.
#[inline]
pub fn modulo(m: i64, k: u64) -> u64 {
    m.rem_euclid(k as i64) as u64
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (g, x, _) = ext_gcd(a as i128 % m as i128, m as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m as i128) as u64)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    (old_r, old_s, old_t)
}

/// Jacobi symbol `(m / k)` for odd `k >= 1`. Negative `m` is reduced modulo `k` first.
pub fn jacobi(m: i64, k: u64) -> Result<i8> {
    if k == 0 || k % 2 == 0 {
        return Err(invalid!("jacobi: modulus {k} must be odd and positive"));
    }
    Ok(jacobi_unchecked(modulo(m, k), k))
}

/// Jacobi symbol for `0 <= a` and odd `k`; no argument validation.
pub fn jacobi_unchecked(mut a: u64, mut k: u64) -> i8 {
    a %= k;
    let mut sign = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = k % 8;
            if r == 3 || r == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut k);
        if a % 4 == 3 && k % 4 == 3 {
            sign = -sign;
        }
        a %= k;
    }
    if k == 1 {
        sign
    } else {
        0
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    // deterministic Miller-Rabin for 64-bit inputs
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn next_prime(n: u64) -> u64 {
    let mut m = n + 1;
    while !is_prime(m) {
        m += 1;
    }
    m
}

/// Trial-division factorization.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(invalid!("factorize: n must be positive"));
    }
    let mut factors = Vec::new();
    let mut m = n;
    let mut push = |p: u64, m: &mut u64| {
        let mut e = 0;
        while *m % p == 0 {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut m);
    let mut p = 3u64;
    while p.saturating_mul(p) <= m {
        push(p, &mut m);
        p += 2;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(Factorization { value: n, factors })
}

pub fn is_squarefree(n: u64) -> Result<bool> {
    Ok(factorize(n)?.factors.iter().all(|&(_, e)| e == 1))
}

pub fn moebius(n: u64) -> Result<i8> {
    let f = factorize(n)?;
    if f.factors.iter().any(|&(_, e)| e > 1) {
        return Ok(0);
    }
    Ok(if f.factors.len() % 2 == 0 { 1 } else { -1 })
}

pub fn largest_prime_factor(n: u64) -> Result<u64> {
    if n <= 1 {
        return Err(invalid!("largest_prime_factor: n = {n} has no prime factor"));
    }
    Ok(factorize(n)?.factors.last().expect("n > 1").0)
}

pub fn euler_phi(n: u64) -> u64 {
    let f = factorize(n.max(1)).expect("positive");
    f.factors
        .iter()
        .fold(n.max(1), |acc, &(p, _)| acc / p * (p - 1))
}

/// Combine `(residue, modulus)` pairs with pairwise coprime moduli.
pub fn crt_combine(parts: &[(u64, u64)]) -> Result<(u64, u64)> {
    let mut acc = (0u64, 1u64);
    for &(r, m) in parts {
        if m == 0 {
            return Err(invalid!("crt_combine: zero modulus"));
        }
        acc = crt_pair(acc.0, acc.1, r % m, m)
            .ok_or_else(|| invalid!("crt_combine: moduli {} and {m} are not coprime", acc.1))?;
    }
    Ok(acc)
}

/// Solution of `x = r1 mod m1`, `x = r2 mod m2` for coprime moduli.
pub fn crt_pair(r1: u64, m1: u64, r2: u64, m2: u64) -> Option<(u64, u64)> {
    if gcd(m1, m2) != 1 {
        return None;
    }
    let m = m1 as u128 * m2 as u128;
    if m > u64::MAX as u128 {
        return None;
    }
    let inv = inv_mod(m1 % m2, m2)? as u128;
    let diff = (r2 as u128 + m2 as u128 - (r1 as u128 % m2 as u128)) % m2 as u128;
    let t = diff * inv % m2 as u128;
    Some(((r1 as u128 + m1 as u128 * t) as u64, m as u64))
}

/// Multiplicative order of `a` modulo `m` (requires `gcd(a, m) = 1`).
pub fn multiplicative_order(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(1);
    }
    if gcd(a, m) != 1 {
        return None;
    }
    let phi = euler_phi(m);
    let mut order = phi;
    for (p, _) in factorize(phi).ok()?.factors {
        while order % p == 0 && pow_mod(a, order / p, m) == 1 {
            order /= p;
        }
    }
    Some(order)
}

/// Smallest primitive root modulo an odd prime power.
pub fn primitive_root_prime_power(p: u64, k: u32) -> Result<u64> {
    if p == 2 || !is_prime(p) || k == 0 {
        return Err(invalid!("primitive root requested for non odd prime power {p}^{k}"));
    }
    let m = p.pow(k);
    let phi = m / p * (p - 1);
    (2..m)
        .find(|&g| multiplicative_order(g, m) == Some(phi))
        .ok_or_else(|| crate::error::Error::Internal(format!("no primitive root mod {m}")))
}

pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.saturating_mul(x) > n {
        x -= 1;
    }
    while (x + 1).saturating_mul(x + 1) <= n {
        x += 1;
    }
    x
}

pub fn is_square(n: u64) -> bool {
    let s = isqrt(n);
    s * s == n
}

/// Odd primes below `bound`.
pub fn odd_primes_below(bound: u64) -> Vec<u64> {
    (3..bound).step_by(2).filter(|&p| is_prime(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi(1, 3).unwrap(), 1);
        assert_eq!(jacobi(21, 7).unwrap(), 0);
        assert_eq!(jacobi(2, 15).unwrap(), 1);
        assert_eq!(jacobi(-1, 21).unwrap(), 1);
        assert!(jacobi(3, 8).is_err());
        assert!(jacobi(3, 0).is_err());
    }

    #[test]
    fn jacobi_is_multiplicative() {
        for k in (1..1000u64).step_by(2).filter(|k| k % 37 == 1 || *k < 60) {
            for m in (-1000i64..=1000).step_by(37) {
                for m2 in (-1000i64..=1000).step_by(53) {
                    let lhs = jacobi(m, k).unwrap() * jacobi(m2, k).unwrap();
                    assert_eq!(lhs, jacobi(m * m2, k).unwrap(), "m={m} m'={m2} k={k}");
                }
            }
        }
    }

    #[test]
    fn jacobi_matches_euler_criterion() {
        for p in odd_primes_below(200) {
            for m in 0..p {
                let e = pow_mod(m, (p - 1) / 2, p);
                let expected = match e {
                    0 => 0,
                    1 => 1,
                    _ => -1,
                };
                assert_eq!(jacobi(m as i64, p).unwrap(), expected);
            }
        }
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(0).is_err());
        assert!(factorize(1).unwrap().factors.is_empty());
        assert_eq!(factorize(3315).unwrap().factors, vec![(3, 1), (5, 1), (13, 1), (17, 1)]);
        assert_eq!(
            factorize(959_595).unwrap().factors,
            vec![(3, 1), (5, 1), (7, 1), (13, 1), (19, 1), (37, 1)]
        );
        assert_eq!(factorize(175).unwrap().factors, vec![(5, 2), (7, 1)]);
    }

    #[test]
    fn squarefree_and_moebius() {
        assert!(is_squarefree(21).unwrap());
        assert!(!is_squarefree(45).unwrap());
        assert!(is_squarefree(1253).unwrap());
        assert_eq!(moebius(1).unwrap(), 1);
        assert_eq!(moebius(4).unwrap(), 0);
        assert_eq!(moebius(6).unwrap(), 1);
        assert_eq!(moebius(7).unwrap(), -1);
        for n in 1..=100_000u64 {
            assert_eq!(is_squarefree(n).unwrap(), moebius(n).unwrap() != 0);
        }
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt_combine(&[(0, 3), (0, 5)]).unwrap(), (0, 15));
        assert_eq!(crt_combine(&[(2, 3), (3, 5)]).unwrap(), (8, 15));
        assert_eq!(crt_combine(&[(1, 2), (1, 3)]).unwrap(), (1, 6));
        assert!(crt_combine(&[(1, 6), (1, 4)]).is_err());
    }

    #[test]
    fn largest_prime_factor_examples() {
        assert_eq!(largest_prime_factor(127).unwrap(), 127);
        assert_eq!(largest_prime_factor(1235).unwrap(), 19);
        assert_eq!(largest_prime_factor(12).unwrap(), 3);
        assert!(largest_prime_factor(1).is_err());
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root_prime_power(5, 1).unwrap(), 2);
        assert_eq!(primitive_root_prime_power(3, 2).unwrap(), 2);
        assert_eq!(primitive_root_prime_power(7, 1).unwrap(), 3);
        assert_eq!(multiplicative_order(2, 9), Some(6));
    }

    proptest! {
        #[test]
        fn factorization_invariants(n in 1u64..5_000_000) {
            let f = factorize(n).unwrap();
            let prod: u64 = f.factors.iter().map(|&(p, e)| p.pow(e)).product();
            prop_assert_eq!(prod, n);
            prop_assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(f.factors.iter().all(|&(p, _)| is_prime(p)));
        }

        #[test]
        fn crt_reconstructs(x in 0u64..1_000_000) {
            let moduli = [7u64, 11, 13, 101];
            let parts: Vec<_> = moduli.iter().map(|&m| (x % m, m)).collect();
            let (r, m) = crt_combine(&parts).unwrap();
            prop_assert_eq!(r, x % m);
        }
    }
}
