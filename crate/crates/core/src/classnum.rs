//! Class numbers of real quadratic fields `Q(√d)`, `d ≡ 1 mod 4` squarefree,
//! by counting cycles of reduced indefinite forms, with an analytic cross-check.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, is_square, is_squarefree, isqrt, jacobi_unchecked, odd_primes_below};
use crate::error::{invalid, Result};
use crate::zetaforms::{cf_expand, CFExpansion, QuadForm, RDParams};

fn check_discriminant(d: u64) -> Result<()> {
    if d <= 1 || d % 4 != 1 || is_square(d) {
        return Err(invalid!("d = {d} must be > 1, 1 mod 4 and not a square"));
    }
    Ok(())
}

fn is_reduced(f: &QuadForm, root: f64) -> bool {
    let (a2, b) = (2.0 * (f.a.unsigned_abs() as f64), f.b as f64);
    f.b > 0 && b < root && root - b < a2 && a2 < root + b
}

/// Positive divisors of `m`, from a trial-division factorization.
fn divisors(mut m: u64, primes: &[u64]) -> Vec<u64> {
    let mut divs = vec![1u64];
    let add = |p: u64, e: u32, divs: &mut Vec<u64>| {
        let len = divs.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    };
    if m % 2 == 0 {
        let e = m.trailing_zeros();
        m >>= e;
        add(2, e, &mut divs);
    }
    for &p in primes {
        if p * p > m {
            break;
        }
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if e > 0 {
            add(p, e, &mut divs);
        }
    }
    if m > 1 {
        add(m, 1, &mut divs);
    }
    divs
}

/// All reduced forms `(A, B, C)` of discriminant `d`:
/// `0 < B < √d` and `√d - B < 2|A| < √d + B`.
pub fn reduced_forms(d: u64) -> Result<Vec<QuadForm>> {
    check_discriminant(d)?;
    let s = isqrt(d);
    let root = (d as f64).sqrt();
    let primes = odd_primes_below(isqrt(d / 4) + 2);
    let mut out = Vec::new();
    let mut b = 1;
    while b <= s {
        let m = (d - b * b) / 4;
        for a in divisors(m, &primes) {
            let c = (m / a) as i64;
            for f in [QuadForm::new(a as i64, b as i64, -c), QuadForm::new(-(a as i64), b as i64, c)] {
                if is_reduced(&f, root) {
                    out.push(f);
                }
            }
        }
        b += 2;
    }
    out.sort_by_key(|f| (f.b, f.a));
    Ok(out)
}

/// One reduction step `(A, B, C) -> (C, B', A')` with `B' ≡ -B mod 2C`, `√d - 2|C| < B' < √d`.
pub fn rho(f: &QuadForm, d: u64) -> QuadForm {
    let s = isqrt(d) as i64;
    let c2 = 2 * f.c.abs();
    let k = (s + f.b).div_euclid(c2);
    let b = -f.b + c2 * k;
    let a = ((b as i128 * b as i128 - d as i128) / (4 * f.c as i128)) as i64;
    QuadForm::new(f.c, b, a)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormClassData {
    pub d: u64,
    pub reduced_forms: Vec<QuadForm>,
    /// Indices into `reduced_forms`, one list per rho-cycle.
    pub cycles: Vec<Vec<usize>>,
    pub h_plus: u64,
    pub unit_norm: i8,
    pub h: u64,
}

fn cycles_of(forms: &[QuadForm], d: u64) -> Result<Vec<Vec<usize>>> {
    let index: HashMap<QuadForm, usize> = forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let mut seen = vec![false; forms.len()];
    let mut cycles = Vec::new();
    for start in 0..forms.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut cur = rho(&forms[start], d);
        loop {
            let &i = index
                .get(&cur)
                .ok_or_else(|| crate::Error::Internal(format!("rho left the reduced set at {cur:?}")))?;
            if i == start {
                break;
            }
            if seen[i] {
                return Err(crate::Error::Internal(format!("rho orbits overlap at {cur:?}")));
            }
            seen[i] = true;
            cycle.push(i);
            cur = rho(&cur, d);
        }
        cycles.push(cycle);
    }
    Ok(cycles)
}

/// Continued fraction of `(1 + √d)/2`.
pub fn omega_expansion(d: u64) -> Result<CFExpansion> {
    cf_expand(1, 2, d as i128)
}

/// `N(ε) = (-1)^ℓ` with `ℓ` the period of `(1 + √d)/2`.
pub fn unit_norm(d: u64) -> Result<i8> {
    check_discriminant(d)?;
    Ok(if omega_expansion(d)?.len() % 2 == 1 { -1 } else { 1 })
}

/// `ε = x + y (1 + √d)/2 > 1` as exact integers `(x, y)`.
pub fn fundamental_unit(d: u64) -> Result<(BigInt, BigInt)> {
    check_discriminant(d)?;
    let cf = omega_expansion(d)?;
    let (mut p0, mut q0) = (BigInt::one(), BigInt::from(0));
    let (mut p1, mut q1) = (BigInt::from(cf.a0), BigInt::one());
    for &a in &cf.period[..cf.len() - 1] {
        let (p2, q2) = (BigInt::from(a) * &p1 + &p0, BigInt::from(a) * &q1 + &q0);
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    // ε = p - q ω̄ = (p - q) + q ω
    Ok((&p1 - &q1, q1))
}

/// Exact norm of `x + y ω`: `x^2 + xy + y^2 (1 - d)/4`.
pub fn norm_omega(x: &BigInt, y: &BigInt, d: u64) -> BigInt {
    x * x + x * y - y * y * BigInt::from((d - 1) / 4)
}

/// `log ε` as the sum of the logs of the complete quotients over one period.
pub fn regulator(d: u64) -> Result<f64> {
    check_discriminant(d)?;
    let cf = omega_expansion(d)?;
    let root = (cf.radicand as f64).sqrt();
    Ok(cf.period_states.iter().map(|&(p, q)| ((p as f64 + root) / q as f64).ln()).sum())
}

pub fn class_number_data(d: u64) -> Result<FormClassData> {
    check_discriminant(d)?;
    if !is_squarefree(d)? {
        return Err(invalid!("d = {d} is not squarefree"));
    }
    let reduced_forms = reduced_forms(d)?;
    let cycles = cycles_of(&reduced_forms, d)?;
    let h_plus = cycles.len() as u64;
    let unit_norm = unit_norm(d)?;
    let h = if unit_norm == -1 { h_plus } else { h_plus / 2 };
    Ok(FormClassData { d, reduced_forms, cycles, h_plus, unit_norm, h })
}

/// `h(d)` for squarefree `d ≡ 1 mod 4`.
pub fn class_number(d: u64) -> Result<u64> {
    Ok(class_number_data(d)?.h)
}

/// `h = -(1 / log ε) Σ_{1≤a<d/2} χ_d(a) log sin(πa/d)`, from
/// `h = √d L(1, χ_d) / (2 log ε)` and the finite formula for `L(1, χ_d)`.
pub fn class_number_analytic(d: u64) -> Result<f64> {
    check_discriminant(d)?;
    if !is_squarefree(d)? {
        return Err(invalid!("d = {d} is not squarefree"));
    }
    let sum: f64 = (1..=d / 2)
        .map(|a| {
            let chi = jacobi_unchecked(a, d) as f64;
            if chi == 0.0 {
                0.0
            } else {
                chi * (std::f64::consts::PI * a as f64 / d as f64).sin().ln()
            }
        })
        .sum();
    Ok(-sum / regulator(d)?)
}

/// One member of the family `d = (an)^2 + 4a`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub a: u64,
    pub n: u64,
    pub d: u64,
    pub squarefree: bool,
    pub h: Option<u64>,
}

fn row(a: u64, n: u64) -> Result<FamilyRow> {
    let p = RDParams::new(a, n)?;
    let squarefree = is_squarefree(p.d)?;
    let h = if squarefree { Some(class_number(p.d)?) } else { None };
    Ok(FamilyRow { a, n, d: p.d, squarefree, h })
}

/// All odd `a, n ≥ 1` with `d ≤ max_d`, sorted by `(d, a)`.
pub fn enumerate_family(max_d: u64) -> Result<Vec<FamilyRow>> {
    if max_d < 13 {
        return Err(invalid!("max_d must be at least 13"));
    }
    let mut pairs = Vec::new();
    let mut a = 1;
    while a * a + 4 * a <= max_d {
        let mut n = 1;
        while (a * n) * (a * n) + 4 * a <= max_d {
            pairs.push((a, n));
            n += 2;
        }
        a += 2;
    }
    let mut rows: Vec<FamilyRow> = pairs.par_iter().map(|&(a, n)| row(a, n)).collect::<Result<_>>()?;
    rows.sort_by_key(|r| (r.d, r.a));
    Ok(rows)
}

/// Class numbers along `n = 1, 3, ..., ≤ n_max` for fixed `a`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirectCheckReport {
    pub a: u64,
    pub n_max: u64,
    pub rows: Vec<FamilyRow>,
    /// Members with `h = 1`.
    pub hits: Vec<FamilyRow>,
}

pub fn direct_check(a: u64, n_max: u64) -> Result<DirectCheckReport> {
    if a % 2 == 0 || a == 0 {
        return Err(invalid!("a = {a} must be odd and positive"));
    }
    let ns: Vec<u64> = (1..=n_max).step_by(2).collect();
    let rows: Vec<FamilyRow> = ns.par_iter().map(|&n| row(a, n)).collect::<Result<_>>()?;
    let hits = rows.iter().filter(|r| r.h == Some(1)).cloned().collect();
    Ok(DirectCheckReport { a, n_max, rows, hits })
}

/// All odd `a, n` with `an ≤ max_an`, sorted by `(d, a)`.
pub fn small_product_check(max_an: u64) -> Result<Vec<FamilyRow>> {
    let pairs: Vec<(u64, u64)> = (1..=max_an)
        .step_by(2)
        .flat_map(|a| (1..=max_an / a).step_by(2).map(move |n| (a, n)))
        .collect();
    let mut rows: Vec<FamilyRow> = pairs.par_iter().map(|&(a, n)| row(a, n)).collect::<Result<_>>()?;
    rows.sort_by_key(|r| (r.d, r.a));
    Ok(rows)
}

/// Largest `n` not covered by a sieve that needs `bound < an/2`.
pub fn direct_check_bound(a: u64, bound: u64) -> u64 {
    2 * bound / a + 1
}

/// For `h(d) = 1`: `a` and `an^2 + 4` are prime and `(d/p) = -1` for every
/// prime `p ≠ a` with `2 < p < an/2`.
pub fn claim_fact_b_check(a: u64, n: u64) -> Result<bool> {
    let p = RDParams::fundamental(a, n)?;
    if class_number(p.d)? != 1 {
        return Err(invalid!("h({}) != 1", p.d));
    }
    if !is_prime(a) || !is_prime(a * n * n + 4) {
        return Ok(false);
    }
    let an = a * n;
    // p < an/2  <=>  2p < an
    Ok(odd_primes_below(an / 2 + 1)
        .into_iter()
        .filter(|&q| 2 * q < an && q != a)
        .all(|q| jacobi_unchecked(p.d % q, q) == -1))
}

/// Exact `(x, y)` of `ε` in floating point, `x + y(1 + √d)/2`, when it fits.
pub fn unit_as_f64(d: u64) -> Result<Option<f64>> {
    let (x, y) = fundamental_unit(d)?;
    let root = (d as f64).sqrt();
    Ok(x.to_f64().zip(y.to_f64()).map(|(x, y)| x + y * (1.0 + root) / 2.0).filter(|v| v.is_finite()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fundamental_discriminants(limit: u64) -> impl Iterator<Item = u64> {
        (5..limit).step_by(4).filter(|&d| is_squarefree(d).unwrap())
    }

    #[test]
    fn examples() {
        assert_eq!(class_number(21).unwrap(), 1);
        assert_eq!(class_number(1253).unwrap(), 1);
        assert_eq!(class_number(65).unwrap(), 2);
        assert_eq!(class_number(5).unwrap(), 1);
        assert!(class_number(45).is_err());
        let data = class_number_data(5).unwrap();
        assert_eq!(data.cycles.len(), 1);
        // h(229) = 3 and h(401) = 5 are classical
        assert_eq!(class_number(229).unwrap(), 3);
        assert_eq!(class_number(401).unwrap(), 5);
    }

    #[test]
    fn principal_form_present() {
        for d in fundamental_discriminants(3000) {
            let s = isqrt(d);
            let b0 = if s % 2 == 1 { s } else { s - 1 };
            let principal = QuadForm::new(1, b0 as i64, -(((d - b0 * b0) / 4) as i64));
            assert!(reduced_forms(d).unwrap().contains(&principal), "d={d}");
        }
    }

    #[test]
    fn reduced_forms_by_brute_force() {
        for d in fundamental_discriminants(400) {
            let root = (d as f64).sqrt();
            let mut brute = Vec::new();
            for b in 1..=isqrt(d) as i64 {
                for a in -(d as i64)..=d as i64 {
                    if a == 0 || (b * b - d as i64) % (4 * a) != 0 {
                        continue;
                    }
                    let f = QuadForm::new(a, b, (b * b - d as i64) / (4 * a));
                    if is_reduced(&f, root) {
                        brute.push(f);
                    }
                }
            }
            brute.sort_by_key(|f| (f.b, f.a));
            assert_eq!(reduced_forms(d).unwrap(), brute, "d={d}");
        }
    }

    #[test]
    fn rho_cycles_close() {
        for d in fundamental_discriminants(10_000) {
            let forms = reduced_forms(d).unwrap();
            let cycles = cycles_of(&forms, d).unwrap();
            assert_eq!(cycles.iter().map(Vec::len).sum::<usize>(), forms.len());
            let data = class_number_data(d).unwrap();
            if data.unit_norm == 1 {
                assert_eq!(data.h_plus % 2, 0, "d={d}");
            }
        }
    }

    #[test]
    fn unit_norm_agrees_with_exact_unit() {
        for d in fundamental_discriminants(10_000) {
            let (x, y) = fundamental_unit(d).unwrap();
            let norm = norm_omega(&x, &y, d);
            assert_eq!(norm, BigInt::from(unit_norm(d).unwrap()), "d={d}");
            if let Some(eps) = unit_as_f64(d).unwrap() {
                let reg = regulator(d).unwrap();
                assert!((eps.ln() - reg).abs() < 1e-8 * reg.max(1.0), "d={d}");
            }
        }
    }

    #[test]
    fn analytic_matches_algebraic() {
        let ds: Vec<u64> = fundamental_discriminants(10_000).collect();
        ds.par_iter().for_each(|&d| {
            let h = class_number(d).unwrap() as f64;
            let an = class_number_analytic(d).unwrap();
            assert!((an - h).abs() < 0.1, "d={d}: {an} vs {h}");
        });
    }

    #[test]
    fn small_products() {
        let rows = small_product_check(5).unwrap();
        let mut pairs: Vec<_> = rows.iter().map(|r| (r.a, r.n)).collect();
        pairs.sort();
        assert_eq!(pairs, vec![(1, 1), (1, 3), (1, 5), (3, 1), (5, 1)]);
    }

    #[test]
    fn family_and_claim() {
        let rows = enumerate_family(1253).unwrap();
        let last = rows.iter().filter(|r| r.h == Some(1)).map(|r| r.d).max().unwrap();
        assert_eq!(last, 1253);
        assert!(rows.iter().any(|r| (r.a, r.n, r.d, r.h) == (7, 5, 1253, Some(1))));
        assert!(rows.iter().any(|r| (r.a, r.n, r.d) == (1, 3, 13)));
        for r in rows.iter().filter(|r| r.h == Some(1) && r.a > 1) {
            assert!(claim_fact_b_check(r.a, r.n).unwrap(), "a={} n={}", r.a, r.n);
        }
        assert!(claim_fact_b_check(7, 5).unwrap());
        assert!(claim_fact_b_check(3, 1).unwrap());
        // h(85) = 2
        assert!(claim_fact_b_check(1, 9).is_err());
        assert_eq!(direct_check_bound(7, 1861), 532);
        assert_eq!(direct_check_bound(5, 1861), 745);
        assert_eq!(direct_check(7, 1).unwrap().rows.len(), 1);
    }
}
