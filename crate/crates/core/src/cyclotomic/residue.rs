//! Residue fields `Z[ζ_N]/ℜ ≅ F_{r^deg}` for prime ideals `ℜ` above `r`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{cyclotomic_poly, fp, CycElement};
use crate::arith::{is_prime, mul_mod};
use crate::error::{invalid, Result};
use crate::serde_util::{dec, dec_vec};

/// Element of `F_{r^deg}`: coefficients of a polynomial of degree `< deg`.
pub type FqElem = Vec<u64>;

/// A prime ideal above `r` in `Z[ζ_N]`, given by an irreducible factor of
/// `Φ_N mod r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TargetRepr", into = "TargetRepr")]
pub struct ResidueFieldTarget {
    r: u64,
    n: u64,
    poly: Vec<u64>,
    /// `ζ^k` for `0 ≤ k < N`.
    zeta_powers: Vec<FqElem>,
}

#[derive(Serialize, Deserialize)]
struct TargetRepr {
    #[serde(with = "dec")]
    r: u64,
    #[serde(rename = "N", with = "dec")]
    n: u64,
    #[serde(with = "dec_vec")]
    poly: Vec<u64>,
}

impl TryFrom<TargetRepr> for ResidueFieldTarget {
    type Error = crate::Error;
    fn try_from(t: TargetRepr) -> Result<Self> {
        ResidueFieldTarget::new(t.r, t.n, t.poly)
    }
}

impl From<ResidueFieldTarget> for TargetRepr {
    fn from(t: ResidueFieldTarget) -> Self {
        TargetRepr { r: t.r, n: t.n, poly: t.poly }
    }
}

impl ResidueFieldTarget {
    /// Validates that `poly` is monic, irreducible over `F_r` and divides `Φ_N`.
    pub fn new(r: u64, n: u64, poly: Vec<u64>) -> Result<Self> {
        if r < 3 || !is_prime(r) {
            return Err(invalid!("{r} is not an odd prime"));
        }
        if n == 0 {
            return Err(invalid!("order must be positive"));
        }
        if poly.iter().any(|&c| c >= r) || poly.last() != Some(&1) {
            return Err(invalid!("poly must be monic with coefficients in [0, {r})"));
        }
        if !fp::is_irreducible(&poly, r) {
            return Err(invalid!("poly is not irreducible mod {r}"));
        }
        let phi = fp::from_signed(&cyclotomic_poly(n), r);
        if !fp::rem(&phi, &poly, r).is_empty() {
            return Err(invalid!("poly does not divide the cyclotomic polynomial of order {n} mod {r}"));
        }
        let deg = poly.len() - 1;
        let x = fp::rem(&fp::x_poly(), &poly, r);
        let mut zeta_powers = Vec::with_capacity(n as usize);
        let mut cur = fp::rem(&[1], &poly, r);
        for _ in 0..n {
            zeta_powers.push(pad(cur.clone(), deg));
            cur = fp::mulmod(&cur, &x, &poly, r);
        }
        Ok(ResidueFieldTarget { r, n, poly, zeta_powers })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn order(&self) -> u64 {
        self.n
    }

    pub fn poly(&self) -> &[u64] {
        &self.poly
    }

    pub fn deg(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn zeta_image(&self) -> &FqElem {
        &self.zeta_powers[1 % self.n as usize]
    }

    /// Image of `ζ^k`, `k` read modulo `N`.
    pub fn zeta_power(&self, k: i64) -> &FqElem {
        &self.zeta_powers[k.rem_euclid(self.n as i64) as usize]
    }

    pub fn zero(&self) -> FqElem {
        vec![0; self.deg()]
    }

    pub fn from_int(&self, c: i64) -> FqElem {
        let mut e = self.zero();
        e[0] = c.rem_euclid(self.r as i64) as u64;
        e
    }

    pub fn is_zero(x: &[u64]) -> bool {
        x.iter().all(|&c| c == 0)
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> FqElem {
        x.iter().zip(y).map(|(a, b)| (a + b) % self.r).collect()
    }

    pub fn sub(&self, x: &[u64], y: &[u64]) -> FqElem {
        x.iter().zip(y).map(|(a, b)| (a + self.r - b) % self.r).collect()
    }

    pub fn scale(&self, x: &[u64], c: i64) -> FqElem {
        let c = c.rem_euclid(self.r as i64) as u64;
        x.iter().map(|&a| mul_mod(a, c, self.r)).collect()
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> FqElem {
        if self.deg() == 1 {
            return vec![mul_mod(x[0], y[0], self.r)];
        }
        pad(fp::mulmod(x, y, &self.poly, self.r), self.deg())
    }

    pub fn pow(&self, x: &[u64], mut e: u64) -> FqElem {
        let mut base = x.to_vec();
        let mut acc = self.from_int(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Image of `Σ b_k ζ^k`; exponents are read modulo `N`.
    pub fn image_of_buckets(&self, buckets: &[i128]) -> FqElem {
        let r = self.r as i128;
        let mut acc = vec![0u64; self.deg()];
        for (k, &b) in buckets.iter().enumerate() {
            let c = b.rem_euclid(r) as u64;
            if c == 0 {
                continue;
            }
            for (a, &z) in acc.iter_mut().zip(&self.zeta_powers[k % self.n as usize]) {
                *a = (*a + mul_mod(c, z, self.r)) % self.r;
            }
        }
        acc
    }

    /// Reduction `Z[ζ_N] → F_{r^deg}`.
    pub fn reduce(&self, x: &CycElement) -> Result<FqElem> {
        if x.order() != self.n {
            return Err(invalid!("element of order {} reduced at a target of order {}", x.order(), self.n));
        }
        let coeffs = x
            .integer_coeffs()
            .ok_or_else(|| invalid!("cannot reduce an element with fractional coefficients"))?;
        let rb = BigInt::from(self.r);
        let buckets: Vec<i128> = coeffs
            .iter()
            .map(|c| {
                let m: BigInt = ((c % &rb) + &rb) % &rb;
                m.to_i128().expect("residue fits")
            })
            .collect();
        Ok(self.image_of_buckets(&buckets))
    }
}

fn pad(mut v: Vec<u64>, len: usize) -> Vec<u64> {
    v.resize(len, 0);
    v
}

/// One target per distinct irreducible factor of `Φ_N mod r`, in a fixed order.
pub fn primes_above(r: u64, n: u64) -> Result<Vec<ResidueFieldTarget>> {
    if r < 3 || !is_prime(r) {
        return Err(invalid!("{r} is not an odd prime"));
    }
    if n == 0 {
        return Err(invalid!("order must be positive"));
    }
    let phi = fp::from_signed(&cyclotomic_poly(n), r);
    fp::distinct_irreducible_factors(&phi, r)
        .into_iter()
        .map(|g| ResidueFieldTarget::new(r, n, g))
        .collect()
}
