//! Exact arithmetic in `Z[ζ_N]` and `Q(ζ_N)`, reduction modulo prime ideals
//! above a rational prime, and character sums valued in these rings.

pub mod fp;
mod residue;
mod sums;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{euler_phi, factorize, gcd};
use crate::error::{invalid, Error, Result};

pub use residue::{primes_above, FqElem, ResidueFieldTarget};
pub use sums::{gauss_sum_numeric, jacobi_sum, l0_exact, l0_product_integral, m_chi};

/// Integer polynomial `Φ_N`, coefficients low degree first.
pub fn cyclotomic_poly(n: u64) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.read().unwrap().get(&n) {
        return p.clone();
    }
    let p = Arc::new(compute_cyclotomic(n));
    cache.write().unwrap().insert(n, p.clone());
    p
}

fn compute_cyclotomic(n: u64) -> Vec<i64> {
    assert!(n >= 1, "cyclotomic polynomial of order 0");
    // Φ_N = x^N - 1 divided by Φ_d for every proper divisor d
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            num = exact_div_monic(&num, &cyclotomic_poly(d));
        }
    }
    num
}

fn exact_div_monic(f: &[i64], g: &[i64]) -> Vec<i64> {
    let dg = g.len() - 1;
    let mut rem = f.to_vec();
    let mut quo = vec![0i64; f.len() - dg];
    for i in (dg..f.len()).rev() {
        let c = rem[i];
        quo[i - dg] = c;
        for (j, &b) in g.iter().enumerate() {
            rem[i - dg + j] -= c * b;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    quo
}

/// Folds exponent buckets `Σ b_k ζ^k` (any length, exponents read mod `N`)
/// into the reduced power basis of length `φ(N)`.
pub fn reduce_buckets(n: u64, buckets: &[i128]) -> Vec<i128> {
    let n_us = n as usize;
    let mut folded = vec![0i128; n_us];
    for (k, &b) in buckets.iter().enumerate() {
        folded[k % n_us] += b;
    }
    let phi = cyclotomic_poly(n);
    let deg = phi.len() - 1;
    for i in (deg..n_us).rev() {
        let c = folded[i];
        if c == 0 {
            continue;
        }
        for (j, &p) in phi.iter().enumerate() {
            folded[i - deg + j] -= c * p as i128;
        }
    }
    folded.truncate(deg);
    folded
}

/// An element `Σ c_j ζ_N^j` of `Q(ζ_N)`, `0 ≤ j < φ(N)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycElement {
    order: u64,
    coeffs: Vec<BigRational>,
}

impl CycElement {
    pub fn zero(order: u64) -> Self {
        assert!(order >= 1);
        CycElement { order, coeffs: vec![BigRational::zero(); euler_phi(order) as usize] }
    }

    pub fn from_integer(order: u64, c: i64) -> Self {
        let mut x = Self::zero(order);
        x.coeffs[0] = BigRational::from_integer(c.into());
        x
    }

    pub fn one(order: u64) -> Self {
        Self::from_integer(order, 1)
    }

    /// `ζ_N^k`, `k` taken modulo `N`.
    pub fn zeta_pow(order: u64, k: i64) -> Self {
        let k = k.rem_euclid(order as i64) as usize;
        let mut buckets = vec![0i128; order as usize];
        buckets[k] = 1;
        Self::from_buckets(order, &buckets)
    }

    /// Element with integer exponent buckets `Σ b_k ζ_N^k`.
    pub fn from_buckets(order: u64, buckets: &[i128]) -> Self {
        let coeffs = reduce_buckets(order, buckets)
            .into_iter()
            .map(|c| BigRational::from_integer(c.into()))
            .collect();
        CycElement { order, coeffs }
    }

    /// Takes reduced power-basis coefficients of length `φ(N)`.
    pub fn from_coeffs(order: u64, coeffs: Vec<BigRational>) -> Result<Self> {
        if order == 0 || coeffs.len() as u64 != euler_phi(order) {
            return Err(invalid!("expected {} coefficients for order {order}", euler_phi(order.max(1))));
        }
        Ok(CycElement { order, coeffs })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// Integer coefficients, or `None` when some coefficient is fractional.
    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        self.coeffs.iter().map(|c| c.is_integer().then(|| c.to_integer())).collect()
    }

    /// Re-expresses the element in `Q(ζ_M)` for a multiple `M` of `N`.
    pub fn lift(&self, m: u64) -> Result<Self> {
        if m == 0 || m % self.order != 0 {
            return Err(invalid!("cannot lift order {} to {m}", self.order));
        }
        if m == self.order {
            return Ok(self.clone());
        }
        let step = (m / self.order) as usize;
        let mut out = vec![BigRational::zero(); m as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            out[j * step] = c.clone();
        }
        Ok(CycElement { order: m, coeffs: reduce_rational(m, out) })
    }

    fn common(&self, other: &Self) -> Result<(Self, Self)> {
        if self.order == other.order {
            return Ok((self.clone(), other.clone()));
        }
        let m = self.order.max(other.order);
        if m % self.order != 0 || m % other.order != 0 {
            return Err(invalid!("incompatible orders {} and {}", self.order, other.order));
        }
        Ok((self.lift(m)?, other.lift(m)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.common(other)?;
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        Ok(CycElement { order: a.order, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        CycElement { order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.common(other)?;
        let n = a.order as usize;
        let mut prod = vec![BigRational::zero(); n];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    prod[(i + j) % n] += x * y;
                }
            }
        }
        Ok(CycElement { order: a.order, coeffs: reduce_rational(a.order, prod) })
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        CycElement { order: self.order, coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn equals(&self, other: &Self) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }

    /// Image under `ζ ↦ ζ^k`; an automorphism when `gcd(k, N) = 1`.
    pub fn galois(&self, k: i64) -> Self {
        let n = self.order as i64;
        let mut out = vec![BigRational::zero(); self.order as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            out[(j as i64 * k).rem_euclid(n) as usize] += c;
        }
        CycElement { order: self.order, coeffs: reduce_rational(self.order, out) }
    }

    /// Complex conjugate, `ζ ↦ ζ^{-1}`.
    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    /// Multiplicative inverse, via the extended Euclidean algorithm over `Q`.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(invalid!("zero has no inverse"));
        }
        let phi: Vec<BigRational> = cyclotomic_poly(self.order)
            .iter()
            .map(|&c| BigRational::from_integer(c.into()))
            .collect();
        let inv = qpoly::inverse_mod(&self.coeffs, &phi)
            .ok_or_else(|| Error::Internal("element not invertible modulo Φ_N".into()))?;
        let mut coeffs = inv;
        coeffs.resize(self.coeffs.len(), BigRational::zero());
        Ok(CycElement { order: self.order, coeffs })
    }

    /// Evaluates at `e^{2πik/N}`.
    pub fn embed_complex(&self, k: i64) -> Result<Complex64> {
        if gcd(k.unsigned_abs(), self.order) != 1 {
            return Err(invalid!("embedding index {k} not coprime to {}", self.order));
        }
        let n = self.order as i64;
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let e = (j as i64 * k).rem_euclid(n) as f64;
                let theta = 2.0 * std::f64::consts::PI * e / n as f64;
                Complex64::from_polar(1.0, theta) * c.to_f64().unwrap_or(f64::NAN)
            })
            .sum())
    }

    /// Norm down to `Q`: product of all Galois conjugates.
    pub fn norm(&self) -> BigRational {
        let mut acc = Self::one(self.order);
        for k in 1..self.order as i64 {
            if gcd(k as u64, self.order) == 1 {
                acc = acc.mul(&self.galois(k)).expect("same order");
            }
        }
        acc.coeffs[0].clone()
    }

    /// Smallest divisor `M` of `N` such that the element lies in `Q(ζ_M)`.
    pub fn minimal_order(&self) -> u64 {
        let mut m = self.order;
        let primes: Vec<u64> = factorize(m).map(|f| f.primes().collect()).unwrap_or_default();
        for p in primes {
            while m % p == 0 {
                let candidate = m / p;
                // lies in Q(ζ_{m/p}) iff fixed by every automorphism trivial on it
                let fixed = (1..self.order as i64)
                    .filter(|&k| {
                        gcd(k as u64, self.order) == 1 && k as u64 % candidate == 1 % candidate
                    })
                    .all(|k| self.galois(k) == *self);
                if !fixed {
                    break;
                }
                m = candidate;
            }
        }
        m
    }
}

impl std::fmt::Display for CycElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut terms = Vec::new();
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            let body = match (j, mag.is_one()) {
                (0, _) => mag.to_string(),
                (_, true) => format!("z^{j}"),
                (_, false) => format!("{mag}*z^{j}"),
            };
            terms.push((sign, body));
        }
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (sign, body)) in terms.iter().enumerate() {
            match (i, *sign) {
                (0, "-") => write!(f, "-{body}")?,
                (0, _) => write!(f, "{body}")?,
                _ => write!(f, " {sign} {body}")?,
            }
        }
        write!(f, " (z = ζ_{})", self.order)
    }
}

fn reduce_rational(n: u64, mut v: Vec<BigRational>) -> Vec<BigRational> {
    let phi = cyclotomic_poly(n);
    let deg = phi.len() - 1;
    for i in (deg..v.len()).rev() {
        if v[i].is_zero() {
            continue;
        }
        let c = v[i].clone();
        for (j, &p) in phi.iter().enumerate() {
            if p != 0 {
                v[i - deg + j] -= &c * BigRational::from_integer(p.into());
            }
        }
    }
    v.truncate(deg);
    v
}

mod qpoly {
    use num_rational::BigRational;
    use num_traits::Zero;

    fn trim(mut f: Vec<BigRational>) -> Vec<BigRational> {
        while f.last().is_some_and(Zero::is_zero) {
            f.pop();
        }
        f
    }

    fn divrem(f: &[BigRational], g: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
        let dg = g.len() - 1;
        let mut rem = f.to_vec();
        if rem.len() < g.len() {
            return (Vec::new(), trim(rem));
        }
        let mut quo = vec![BigRational::zero(); rem.len() - dg];
        for i in (dg..rem.len()).rev() {
            let c = &rem[i] / &g[dg];
            if c.is_zero() {
                continue;
            }
            for (j, b) in g.iter().enumerate() {
                rem[i - dg + j] -= &c * b;
            }
            quo[i - dg] = c;
        }
        rem.truncate(dg);
        (trim(quo), trim(rem))
    }

    fn mul(f: &[BigRational], g: &[BigRational]) -> Vec<BigRational> {
        if f.is_empty() || g.is_empty() {
            return Vec::new();
        }
        let mut out = vec![BigRational::zero(); f.len() + g.len() - 1];
        for (i, a) in f.iter().enumerate() {
            for (j, b) in g.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        trim(out)
    }

    fn sub(f: &[BigRational], g: &[BigRational]) -> Vec<BigRational> {
        let n = f.len().max(g.len());
        let z = BigRational::zero();
        trim((0..n).map(|i| f.get(i).unwrap_or(&z) - g.get(i).unwrap_or(&z)).collect())
    }

    /// `a^{-1} mod m` when `gcd(a, m) = 1`.
    pub fn inverse_mod(a: &[BigRational], m: &[BigRational]) -> Option<Vec<BigRational>> {
        let (mut r0, mut r1) = (trim(m.to_vec()), divrem(&trim(a.to_vec()), m).1);
        let (mut s0, mut s1): (Vec<BigRational>, Vec<BigRational>) = (Vec::new(), vec![num_traits::One::one()]);
        while !r1.is_empty() {
            let (q, r) = divrem(&r0, &r1);
            let s = sub(&s0, &mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
        }
        if r0.len() != 1 {
            return None;
        }
        let c = r0[0].clone();
        Some(divrem(&s0.iter().map(|x| x / &c).collect::<Vec<_>>(), m).1)
    }
}
