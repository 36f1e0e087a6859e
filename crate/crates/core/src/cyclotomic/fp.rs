//! Dense polynomials over `F_r`, coefficients low degree first, always trimmed.
//!
//! Enough machinery to split cyclotomic polynomials modulo `r`: gcd, modular
//! powers, radical, distinct-degree and equal-degree factorization, and a
//! Rabin irreducibility test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{factorize, inv_mod, mul_mod};

pub type Poly = Vec<u64>;

pub fn trim(mut f: Poly) -> Poly {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

pub fn degree(f: &[u64]) -> Option<usize> {
    f.len().checked_sub(1)
}

pub fn from_signed(coeffs: &[i64], r: u64) -> Poly {
    trim(coeffs.iter().map(|&c| c.rem_euclid(r as i64) as u64).collect())
}

pub fn x_poly() -> Poly {
    vec![0, 1]
}

pub fn add(f: &[u64], g: &[u64], r: u64) -> Poly {
    let n = f.len().max(g.len());
    trim(
        (0..n)
            .map(|i| (f.get(i).copied().unwrap_or(0) + g.get(i).copied().unwrap_or(0)) % r)
            .collect(),
    )
}

pub fn sub(f: &[u64], g: &[u64], r: u64) -> Poly {
    let n = f.len().max(g.len());
    trim(
        (0..n)
            .map(|i| (f.get(i).copied().unwrap_or(0) + r - g.get(i).copied().unwrap_or(0)) % r)
            .collect(),
    )
}

pub fn mul(f: &[u64], g: &[u64], r: u64) -> Poly {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; f.len() + g.len() - 1];
    for (i, &a) in f.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in g.iter().enumerate() {
            out[i + j] += a as u128 * b as u128;
        }
    }
    trim(out.into_iter().map(|c| (c % r as u128) as u64).collect())
}

pub fn scale(f: &[u64], c: u64, r: u64) -> Poly {
    trim(f.iter().map(|&a| mul_mod(a, c, r)).collect())
}

/// Quotient and remainder; `g` must be non-zero.
pub fn divrem(f: &[u64], g: &[u64], r: u64) -> (Poly, Poly) {
    let dg = degree(g).expect("division by zero polynomial");
    let lead_inv = inv_mod(g[dg], r).expect("leading coefficient invertible");
    let mut rem: Vec<u64> = f.to_vec();
    if rem.len() < g.len() {
        return (Vec::new(), trim(rem));
    }
    let mut quo = vec![0u64; rem.len() - dg];
    for i in (dg..rem.len()).rev() {
        let c = mul_mod(rem[i], lead_inv, r);
        if c == 0 {
            continue;
        }
        quo[i - dg] = c;
        for (j, &b) in g.iter().enumerate() {
            let k = i - dg + j;
            rem[k] = (rem[k] + r - mul_mod(c, b, r)) % r;
        }
    }
    rem.truncate(dg);
    (trim(quo), trim(rem))
}

pub fn rem(f: &[u64], g: &[u64], r: u64) -> Poly {
    divrem(f, g, r).1
}

pub fn monic(f: &[u64], r: u64) -> Poly {
    match f.last() {
        None => Vec::new(),
        Some(&lead) => scale(f, inv_mod(lead, r).expect("non-zero lead"), r),
    }
}

pub fn gcd(f: &[u64], g: &[u64], r: u64) -> Poly {
    let (mut a, mut b) = (trim(f.to_vec()), trim(g.to_vec()));
    while !b.is_empty() {
        let t = rem(&a, &b, r);
        a = b;
        b = t;
    }
    monic(&a, r)
}

pub fn derivative(f: &[u64], r: u64) -> Poly {
    trim(f.iter().enumerate().skip(1).map(|(i, &c)| mul_mod(c, i as u64 % r, r)).collect())
}

pub fn mulmod(f: &[u64], g: &[u64], m: &[u64], r: u64) -> Poly {
    rem(&mul(f, g, r), m, r)
}

/// `f^e mod m`.
pub fn powmod(f: &[u64], mut e: u64, m: &[u64], r: u64) -> Poly {
    let mut base = rem(f, m, r);
    let mut acc: Poly = rem(&[1], m, r);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(&acc, &base, m, r);
        }
        base = mulmod(&base, &base, m, r);
        e >>= 1;
    }
    acc
}

fn is_one(f: &[u64]) -> bool {
    f == [1]
}

/// Product of the distinct monic irreducible factors of `f`.
pub fn radical(f: &[u64], r: u64) -> Poly {
    let f = monic(f, r);
    if f.len() <= 1 {
        return vec![1];
    }
    let d = derivative(&f, r);
    if d.is_empty() {
        // f(x) = h(x^r) = h(x)^r over F_r
        let root: Poly = f.iter().step_by(r as usize).copied().collect();
        return radical(&root, r);
    }
    let g = gcd(&f, &d, r);
    let w = divrem(&f, &g, r).0;
    let mut h = g;
    loop {
        let c = gcd(&h, &w, r);
        if c.len() <= 1 {
            break;
        }
        h = divrem(&h, &c, r).0;
    }
    monic(&mul(&w, &radical(&h, r), r), r)
}

/// Distinct-degree factorization of a monic squarefree polynomial:
/// `(degree, product of all irreducible factors of that degree)`.
pub fn distinct_degree(f: &[u64], r: u64) -> Vec<(usize, Poly)> {
    let mut out = Vec::new();
    let mut f = monic(f, r);
    let mut h = x_poly();
    let mut i = 0;
    while degree(&f).unwrap_or(0) >= 2 * (i + 1) {
        i += 1;
        h = powmod(&h, r, &f, r);
        let g = gcd(&sub(&h, &x_poly(), r), &f, r);
        if g.len() > 1 {
            f = divrem(&f, &g, r).0;
            h = rem(&h, &f, r);
            out.push((i, g));
        }
    }
    if f.len() > 1 {
        out.push((f.len() - 1, f));
    }
    out
}

/// Splits a product of distinct irreducibles of degree `d` (Cantor-Zassenhaus).
/// The pseudo-random stream is seeded, so the run is reproducible.
pub fn equal_degree(f: &[u64], d: usize, r: u64) -> Vec<Poly> {
    assert!(r % 2 == 1, "equal-degree splitting needs odd characteristic");
    let n = f.len() - 1;
    if n == d {
        return vec![monic(f, r)];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ r ^ ((n as u64) << 32));
    loop {
        let a: Poly = trim((0..n).map(|_| rng.gen_range(0..r)).collect());
        if a.len() <= 1 {
            continue;
        }
        // a^((r^d - 1)/2) = (a * a^r * ... * a^(r^(d-1)))^((r-1)/2)
        let mut frob = a.clone();
        let mut norm = a.clone();
        for _ in 1..d {
            frob = powmod(&frob, r, f, r);
            norm = mulmod(&norm, &frob, f, r);
        }
        let b = powmod(&norm, (r - 1) / 2, f, r);
        let g = gcd(&sub(&b, &[1], r), f, r);
        if g.len() > 1 && g.len() < f.len() {
            let other = divrem(f, &g, r).0;
            let mut out = equal_degree(&g, d, r);
            out.extend(equal_degree(&other, d, r));
            return out;
        }
    }
}

/// Distinct monic irreducible factors of `f`, sorted by degree then by
/// coefficient vector (constant term first).
pub fn distinct_irreducible_factors(f: &[u64], r: u64) -> Vec<Poly> {
    let rad = radical(f, r);
    let mut out: Vec<Poly> = distinct_degree(&rad, r)
        .into_iter()
        .flat_map(|(d, g)| equal_degree(&g, d, r))
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Rabin's irreducibility test.
pub fn is_irreducible(f: &[u64], r: u64) -> bool {
    let f = trim(f.to_vec());
    let n = match degree(&f) {
        None | Some(0) => return false,
        Some(n) => n,
    };
    let f = monic(&f, r);
    let frob_pow = |k: usize| {
        let mut h = x_poly();
        for _ in 0..k {
            h = powmod(&h, r, &f, r);
        }
        h
    };
    if rem(&sub(&frob_pow(n), &x_poly(), r), &f, r).len() > 0 {
        return false;
    }
    let primes: Vec<u64> = factorize(n as u64).map(|f| f.primes().collect()).unwrap_or_default();
    primes.into_iter().all(|p| {
        let h = frob_pow(n / p as usize);
        is_one(&gcd(&sub(&h, &x_poly(), r), &f, r))
    })
}
