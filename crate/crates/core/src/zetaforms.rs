//! Continued fractions, the binary forms `f_1, f_2` attached to
//! `d = (an)^2 + 4a`, the character sums built on them, the two evaluations
//! of `β_χ` and the value of the principal partial zeta function at 0.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, is_square, is_squarefree, isqrt, jacobi, moebius};
use crate::characters::{decompose_plus_minus, kronecker_chi_d, DirichletCharacter};
use crate::cyclotomic::{jacobi_sum, l0_product_integral, m_chi, CycElement};
use crate::error::{invalid, Error, Result};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Regular continued fraction `[a0; preperiod, overline(period)]` of `(P + √D)/Q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CFExpansion {
    pub a0: i128,
    pub preperiod: Vec<i128>,
    pub period: Vec<i128>,
    /// `(P_i, Q_i)` of the complete quotients `(P_i + √D)/Q_i` producing the period.
    pub period_states: Vec<(i128, i128)>,
    /// Radicand after normalization, so that `Q_i | D - P_i^2`.
    pub radicand: i128,
}

impl CFExpansion {
    pub fn len(&self) -> usize {
        self.period.len()
    }

    pub fn is_empty(&self) -> bool {
        self.period.is_empty()
    }

    pub fn is_purely_periodic(&self) -> bool {
        self.preperiod.is_empty()
    }
}

/// Expands `(P + √D)/Q`; the least period is found by repetition of `(P, Q)`.
pub fn cf_expand(p: i128, q: i128, d: i128) -> Result<CFExpansion> {
    if d <= 0 || is_square(d as u64) {
        return Err(invalid!("radicand {d} must be a positive non-square"));
    }
    if q <= 0 {
        return Err(invalid!("denominator must be positive"));
    }
    let (mut p, mut q, mut d) = (p, q, d);
    if (d - p * p) % q != 0 {
        p *= q;
        d *= q * q;
        q *= q;
    }
    let root = isqrt(d as u64) as i128;
    let step = |p: i128, q: i128| -> (i128, i128, i128) {
        let a = (p + root).div_euclid(q);
        let p2 = a * q - p;
        (a, p2, (d - p2 * p2) / q)
    };
    let (a0, mut p, mut q) = step(p, q);
    let mut seen: HashMap<(i128, i128), usize> = HashMap::new();
    let mut terms = Vec::new();
    let mut states = Vec::new();
    loop {
        if let Some(&j) = seen.get(&(p, q)) {
            return Ok(CFExpansion {
                a0,
                preperiod: terms[..j].to_vec(),
                period: terms[j..].to_vec(),
                period_states: states[j..].to_vec(),
                radicand: d,
            });
        }
        seen.insert((p, q), terms.len());
        states.push((p, q));
        let (a, p2, q2) = step(p, q);
        terms.push(a);
        p = p2;
        q = q2;
    }
}

/// Parameters of `d = (an)^2 + 4a` with odd positive `a, n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RDParams {
    pub a: u64,
    pub n: u64,
    pub d: u64,
}

impl RDParams {
    pub fn new(a: u64, n: u64) -> Result<Self> {
        if a % 2 == 0 || n % 2 == 0 {
            return Err(invalid!("a = {a} and n = {n} must be odd and positive"));
        }
        let an = a.checked_mul(n).ok_or_else(|| invalid!("a*n overflows"))?;
        let d = an
            .checked_mul(an)
            .and_then(|s| s.checked_add(4 * a))
            .ok_or_else(|| invalid!("d overflows"))?;
        Ok(RDParams { a, n, d })
    }

    /// As [`RDParams::new`], additionally requiring `d` squarefree.
    pub fn fundamental(a: u64, n: u64) -> Result<Self> {
        let p = Self::new(a, n)?;
        if !is_squarefree(p.d)? {
            return Err(invalid!("d = {} is not squarefree", p.d));
        }
        Ok(p)
    }
}

/// `Ax^2 + Bxy + Cy^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    pub fn disc(&self) -> i128 {
        self.b as i128 * self.b as i128 - 4 * self.a as i128 * self.c as i128
    }

    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (x, y) = (x as i128, y as i128);
        self.a as i128 * x * x + self.b as i128 * x * y + self.c as i128 * y * y
    }

    pub fn neg(&self) -> Self {
        QuadForm::new(-self.a, -self.b, -self.c)
    }

    /// Coefficients reduced into `[0, q)`.
    pub fn reduced_mod(&self, q: u64) -> [u64; 3] {
        let r = |c: i64| c.rem_euclid(q as i64) as u64;
        [r(self.a), r(self.b), r(self.c)]
    }
}

fn f1_mod(a: i64, n: i64) -> QuadForm {
    QuadForm::new(a, a * n, -1)
}

fn f2_mod(a: i64, n: i64) -> QuadForm {
    QuadForm::new(1, a * n, -a)
}

/// `f_1 = ax^2 + anxy - y^2`, `f_2 = x^2 + anxy - ay^2`.
pub fn forms_f(params: &RDParams) -> (QuadForm, QuadForm) {
    let (a, n) = (params.a as i64, params.n as i64);
    (f1_mod(a, n), f2_mod(a, n))
}

/// `u + vα` with `α^2 = a - anα`.
#[derive(Clone, Copy)]
struct ZAlpha {
    u: i128,
    v: i128,
}

impl ZAlpha {
    fn mul(self, o: Self, a: i128, an: i128) -> Self {
        let vv = self.v * o.v;
        ZAlpha { u: self.u * o.u + vv * a, v: self.u * o.v + self.v * o.u - vv * an }
    }

    /// `ᾱ = -an - α`.
    fn conj(self, an: i128) -> Self {
        ZAlpha { u: self.u - an * self.v, v: -self.v }
    }

    fn add(self, o: Self) -> Self {
        ZAlpha { u: self.u + o.u, v: self.v + o.v }
    }

    fn rational(self) -> Result<i128> {
        if self.v != 0 {
            return Err(Error::Internal("expected a rational integer".into()));
        }
        Ok(self.u)
    }
}

/// `Q_1, Q_2` built from the convergents of `α = (√d - an)/2`, using
/// `α + ᾱ = -an` and `αᾱ = -a`.
pub fn derive_qj(params: &RDParams) -> Result<(QuadForm, QuadForm)> {
    if params.a <= 1 {
        return Err(Error::Unsupported("a = 1 has period length 1".into()));
    }
    let (a, an) = (params.a as i128, (params.a * params.n) as i128);
    let cf = cf_expand(-an, 2, params.d as i128)?;
    let quotient = |j: usize| cf.period[(j - 1) % cf.period.len()];
    // α_j = p_j - q_j α with α_{-1} = 1, α_0 = -α
    let mut alphas = vec![ZAlpha { u: 1, v: 0 }, ZAlpha { u: 0, v: -1 }];
    let (mut p_prev, mut q_prev, mut p_cur, mut q_cur) = (1i128, 0i128, 0i128, 1i128);
    for j in 1..=2 {
        let aj = quotient(j);
        let (p_next, q_next) = (aj * p_cur + p_prev, aj * q_cur + q_prev);
        alphas.push(ZAlpha { u: p_next, v: -q_next });
        (p_prev, q_prev, p_cur, q_cur) = (p_cur, q_cur, p_next, q_next);
    }
    let form = |j: usize| -> Result<QuadForm> {
        // alphas[k] holds α_{k-1}
        let (x, y) = (alphas[j], alphas[j + 1]);
        let (xc, yc) = (x.conj(an), y.conj(an));
        let narrow = |v: i128| i64::try_from(v).map_err(|_| Error::Internal("coefficient overflow".into()));
        Ok(QuadForm::new(
            narrow(x.mul(xc, a, an).rational()?)?,
            narrow(x.mul(yc, a, an).add(y.mul(xc, a, an)).rational()?)?,
            narrow(y.mul(yc, a, an).rational()?)?,
        ))
    };
    Ok((form(1)?, form(2)?))
}

/// A sum `S` in `Z[ζ_N]` together with its value `S / scale`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scaled {
    pub scaled: CycElement,
    pub scale: u64,
}

impl Scaled {
    pub fn value(&self) -> CycElement {
        self.scaled.scale(&rat(1, self.scale as i64))
    }
}

/// Integer buckets of `Σ_{1≤u,v<q} χ(f(u,v)) u v`, indexed by the exponent of `ζ_N`.
pub fn g_buckets(f: &QuadForm, chi: &DirichletCharacter) -> Vec<i128> {
    let q = chi.modulus();
    let [fa, fb, fc] = f.reduced_mod(q);
    let table = chi.table();
    let mut buckets = vec![0i128; chi.order() as usize];
    for u in 1..q {
        let (au2, bu) = (fa * u % q * u % q, fb * u % q);
        for v in 1..q {
            let val = (au2 + (bu + fc * v % q) % q * v) % q;
            let k = table[val as usize];
            if k != crate::characters::ZERO {
                buckets[k as usize] += (u * v) as i128;
            }
        }
    }
    buckets
}

/// `G(f, χ) = Σ_{1≤u,v≤q-1} χ(f(u,v)) (u/q)(v/q)`, with scaled form `q^2 G`.
pub fn g_sum(f: &QuadForm, chi: &DirichletCharacter) -> Result<Scaled> {
    let q = chi.modulus();
    if q <= 1 {
        return Err(invalid!("G(f, chi) needs modulus > 1"));
    }
    Ok(Scaled { scaled: CycElement::from_buckets(chi.order(), &g_buckets(f, chi)), scale: q * q })
}

/// `C_χ(a, n) = q (G(f_1, χ) + G(f_2, χ))`; only `a, n mod q` matter.
pub fn c_chi(a: i64, n: i64, chi: &DirichletCharacter) -> Result<CycElement> {
    let q = chi.modulus() as i64;
    let (a, n) = (a.rem_euclid(q), n.rem_euclid(q));
    let g1 = g_sum(&f1_mod(a, n), chi)?;
    let g2 = g_sum(&f2_mod(a, n), chi)?;
    Ok(g1.scaled.add(&g2.scaled)?.scale(&rat(1, q)))
}

/// Weight `h` in `g(χ, f, h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    One,
    /// `B_1(x) = x - 1/2`.
    B1,
    /// `h(x) = x`.
    T,
}

/// `g(χ, f, h) = Σ_{1≤m,n≤q-1} χ(f(m,n)) h(n/q)`.
pub fn g_aux(chi: &DirichletCharacter, f: &QuadForm, h: Weight) -> CycElement {
    let q = chi.modulus();
    let [fa, fb, fc] = f.reduced_mod(q);
    let mut buckets = vec![0i128; chi.order() as usize];
    for m in 1..q {
        for n in 1..q {
            let val = (fa * m % q * m + fb * m % q * n + fc * n % q * n) % q;
            if let Some(k) = chi.value(val as i64) {
                buckets[k as usize] += match h {
                    Weight::One => 1,
                    Weight::B1 => 2 * n as i128 - q as i128,
                    Weight::T => n as i128,
                };
            }
        }
    }
    let sum = CycElement::from_buckets(chi.order(), &buckets);
    match h {
        Weight::One => sum,
        Weight::B1 => sum.scale(&rat(1, 2 * q as i64)),
        Weight::T => sum.scale(&rat(1, q as i64)),
    }
}

/// `γ_χ = Σ_{1≤n<q} χ^2(n) n^2 / q^2`, with scaled form `q^2 γ_χ`.
pub fn gamma_chi(chi: &DirichletCharacter) -> Scaled {
    let (q, order) = (chi.modulus(), chi.order());
    let mut buckets = vec![0i128; order as usize];
    for n in 1..q {
        if let Some(k) = chi.value(n as i64) {
            buckets[(2 * k as u64 % order) as usize] += (n * n) as i128;
        }
    }
    Scaled { scaled: CycElement::from_buckets(order, &buckets), scale: q * q }
}

/// Pieces of the finite evaluation of `β_χ`, all in `Q(ζ_N)` for `N` the order of `χ`.
#[derive(Clone, Debug)]
pub struct BetaParts {
    pub chi_plus: DirichletCharacter,
    pub chi_minus: DirichletCharacter,
    /// `χ_+(-1)`.
    pub sign: i8,
    pub jacobi_plus: CycElement,
    /// `q^2 γ_χ`.
    pub gamma_scaled: CycElement,
    /// `μ(q_-)`.
    pub mu: i8,
    /// `(p, p^2 χ_+^2(p) - 1, p χ_+^2(p) - 1)` for `p | q_-`.
    pub factors: Vec<(u64, CycElement, CycElement)>,
}

pub fn beta_parts(chi: &DirichletCharacter) -> Result<BetaParts> {
    let order = chi.order();
    let (plus, minus) = decompose_plus_minus(chi)?;
    let sq = plus.pow(2);
    let mut factors = Vec::new();
    let q_minus = minus.modulus();
    for p in crate::arith::factorize(q_minus)?.primes() {
        let k = sq.value_in(p as i64, order).expect("p coprime to q_+") as i64;
        let z = CycElement::zeta_pow(order, k);
        let pp = (p * p) as i64;
        factors.push((
            p,
            z.scale(&rat(pp, 1)).sub(&CycElement::one(order))?,
            z.scale(&rat(p as i64, 1)).sub(&CycElement::one(order))?,
        ));
    }
    Ok(BetaParts {
        sign: plus.parity(),
        jacobi_plus: jacobi_sum(&plus).lift(order)?,
        gamma_scaled: gamma_chi(chi).scaled,
        mu: moebius(q_minus)?,
        factors,
        chi_plus: plus,
        chi_minus: minus,
    })
}

/// `β_χ = χ_+(-1) J_{χ_+} γ_χ μ(q_-) Π_{p|q_-} (p^2χ_+^2(p) - 1)/(pχ_+^2(p) - 1)`.
pub fn beta_finite(chi: &DirichletCharacter) -> Result<CycElement> {
    if chi.order() <= 2 {
        return Err(invalid!("beta needs a character of order > 2"));
    }
    let parts = beta_parts(chi)?;
    let q = chi.modulus() as i64;
    let mut beta = parts
        .jacobi_plus
        .mul(&parts.gamma_scaled)?
        .scale(&rat(parts.sign as i64 * parts.mu as i64, q * q));
    for (_, num, den) in &parts.factors {
        beta = beta.mul(num)?.mul(&den.inverse()?)?;
    }
    Ok(beta)
}

/// `β_χ = π^{-2} χ(-1) τ(χ)^2 L(2, χ̄^2)` with the L-series cut after `m` terms.
/// `χ̄^2` is taken modulo `q`, so it vanishes off the units.
pub fn beta_numeric(chi: &DirichletCharacter, m: u64) -> Complex64 {
    let (q, order) = (chi.modulus(), chi.order());
    let tau = crate::cyclotomic::gauss_sum_numeric(chi);
    let vals: Vec<Complex64> = (0..q)
        .map(|x| match chi.value(x as i64) {
            None => Complex64::new(0.0, 0.0),
            Some(k) => {
                let e = (order - 2 * k as u64 % order) % order;
                Complex64::from_polar(1.0, std::f64::consts::TAU * e as f64 / order as f64)
            }
        })
        .collect();
    let mut l2 = Complex64::new(0.0, 0.0);
    for j in (1..=m).rev() {
        l2 += vals[(j % q) as usize] / (j as f64 * j as f64);
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    tau * tau * l2 * chi.parity() as f64 / pi2
}

/// Embedding indices `k` with `|σ_k(β_finite) - β_numeric| ≤ tol`.
pub fn beta_matching_embeddings(exact: &CycElement, numeric: Complex64, tol: f64) -> Vec<i64> {
    let n = exact.order();
    (1..=n as i64)
        .filter(|&k| gcd(k as u64, n) == 1)
        .filter(|&k| exact.embed_complex(k).map(|z| (z - numeric).norm() <= tol).unwrap_or(false))
        .collect()
}

fn check_identity_inputs(params: &RDParams, chi: &DirichletCharacter) -> Result<()> {
    if params.a == 1 {
        return Err(Error::Unsupported("a = 1 (period length 1) is not handled".into()));
    }
    let q = chi.modulus();
    if q <= 1 || !chi.is_odd() || !chi.is_primitive() || !chi.is_complex() {
        return Err(invalid!("character mod {q} must be odd, primitive and complex"));
    }
    if gcd(q, 2 * params.d) != 1 {
        return Err(invalid!("gcd(q, 2d) > 1 for q = {q}, d = {}", params.d));
    }
    Ok(())
}

/// `χ(d) (d/q) β_χ c_a` with `c_a = a + χ̄(a)`.
fn beta_term(params: &RDParams, chi: &DirichletCharacter) -> Result<CycElement> {
    let (q, order) = (chi.modulus(), chi.order());
    let chi_d = CycElement::zeta_pow(order, chi.value(params.d as i64).expect("d is a unit") as i64);
    let leg = jacobi(params.d as i64, q)? as i64;
    let mut c_a = CycElement::from_integer(order, params.a as i64);
    if let Some(k) = chi.value(params.a as i64) {
        c_a = c_a.add(&CycElement::zeta_pow(order, -(k as i64)))?;
    }
    Ok(beta_finite(chi)?.mul(&chi_d)?.mul(&c_a)?.scale(&rat(leg, 1)))
}

/// `½ ζ_I(0, χ) = G(f_1, χ) + G(f_2, χ) + (n/2) χ(d) (d/q) β_χ c_a` for `I = O_K`.
pub fn partial_zeta_zero(params: &RDParams, chi: &DirichletCharacter) -> Result<CycElement> {
    check_identity_inputs(params, chi)?;
    let (f1, f2) = forms_f(params);
    let g = g_sum(&f1, chi)?.value().add(&g_sum(&f2, chi)?.value())?;
    g.add(&beta_term(params, chi)?.scale(&rat(params.n as i64, 2)))
}

/// Both sides of `-m_χ L(0, χχ_d) = 2C_χ(a,n) + nq χ(d) (d/q) β_χ c_a`.
#[derive(Clone, Debug)]
pub struct IdentityWitness {
    pub lhs: CycElement,
    pub rhs: CycElement,
    pub holds: bool,
}

/// Evaluates both sides exactly. They agree when `h(d) = 1`; checking that
/// is left to the caller.
pub fn identity_check(params: &RDParams, chi: &DirichletCharacter) -> Result<IdentityWitness> {
    check_identity_inputs(params, chi)?;
    if !is_squarefree(params.d)? {
        return Err(invalid!("d = {} is not squarefree", params.d));
    }
    let q = chi.modulus();
    let l0 = l0_product_integral(chi, &kronecker_chi_d(params.d)?)?;
    let lhs = m_chi(chi).neg().mul(&l0)?;
    let c = c_chi(params.a as i64, params.n as i64, chi)?;
    let rhs = c
        .scale(&rat(2, 1))
        .add(&beta_term(params, chi)?.scale(&rat((params.n * q) as i64, 1)))?;
    let holds = lhs.equals(&rhs)?;
    Ok(IdentityWitness { lhs, rhs, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{enumerate_characters, CharFilter};

    fn odd_primitive_complex(q: u64) -> Vec<DirichletCharacter> {
        enumerate_characters(q, CharFilter::ODD_PRIMITIVE_COMPLEX).unwrap()
    }

    #[test]
    fn continued_fractions() {
        let cf = cf_expand(-3, 2, 21).unwrap();
        assert_eq!((cf.a0, cf.preperiod.clone(), cf.period.clone()), (0, vec![], vec![1, 3]));
        let cf = cf_expand(-35, 2, 1253).unwrap();
        assert_eq!((cf.a0, cf.period.clone()), (0, vec![5, 35]));
        let cf = cf_expand(-1, 1, 2).unwrap();
        assert_eq!((cf.a0, cf.period.clone()), (0, vec![2]));
        let cf = cf_expand(0, 1, 7).unwrap();
        assert_eq!((cf.a0, cf.preperiod.clone(), cf.period.clone()), (2, vec![], vec![1, 1, 1, 4]));
        assert!(cf_expand(0, 1, 49).is_err());
        // Q not dividing D - P^2 is normalized first
        assert_eq!(cf_expand(0, 3, 2).unwrap().period, cf_expand(0, 9, 18).unwrap().period);
    }

    #[test]
    fn alpha_period_is_n_an() {
        for a in (3..=15).step_by(2) {
            for n in (1..=15).step_by(2) {
                let Ok(p) = RDParams::fundamental(a, n) else { continue };
                let cf = cf_expand(-((a * n) as i128), 2, p.d as i128).unwrap();
                assert_eq!(cf.a0, 0);
                assert!(cf.is_purely_periodic());
                assert_eq!(cf.period, vec![n as i128, (a * n) as i128], "a={a} n={n}");
            }
        }
    }

    #[test]
    fn forms() {
        let p = RDParams::new(3, 1).unwrap();
        assert_eq!(p.d, 21);
        let (f1, f2) = forms_f(&p);
        assert_eq!(f1, QuadForm::new(3, 3, -1));
        assert_eq!(f2, QuadForm::new(1, 3, -3));
        for a in (3..40).step_by(2) {
            for n in (1..40).step_by(2) {
                let p = RDParams::new(a, n).unwrap();
                assert_eq!(p.d % 8, 5);
                let (f1, f2) = forms_f(&p);
                assert_eq!((f1.eval(1, 0), f2.eval(1, 0)), (a as i128, 1));
                assert_eq!((f1.disc(), f2.disc()), (p.d as i128, p.d as i128));
                let (q1, q2) = derive_qj(&p).unwrap();
                assert_eq!((q1, q2), (f1.neg(), f2));
            }
        }
        assert!(RDParams::new(2, 3).is_err());
        assert!(RDParams::fundamental(5, 1).is_err());
    }

    #[test]
    fn g_sum_by_second_loop_order() {
        let p = RDParams::new(3, 1).unwrap();
        let (f1, _) = forms_f(&p);
        for chi in odd_primitive_complex(5) {
            let g = g_sum(&f1, &chi).unwrap();
            let mut alt = CycElement::zero(chi.order());
            for v in (1..5i64).rev() {
                for u in (1..5i64).rev() {
                    if let Some(k) = chi.value(f1.eval(u, v) as i64) {
                        let term = CycElement::zeta_pow(chi.order(), k as i64).scale(&rat(u * v, 25));
                        alt = alt.add(&term).unwrap();
                    }
                }
            }
            assert_eq!(g.value(), alt);
            assert!(g.scaled.is_integral());
        }
    }

    #[test]
    fn gamma_examples() {
        let chi = DirichletCharacter::new(5, vec![1]).unwrap();
        assert_eq!(gamma_chi(&chi).scaled, CycElement::from_integer(4, 4));
        assert_eq!(gamma_chi(&chi.conj()).value(), gamma_chi(&chi).value().conj());
        let quad = DirichletCharacter::new(7, vec![3]).unwrap();
        assert_eq!(gamma_chi(&quad).scaled, CycElement::from_integer(2, (1..7).map(|n| n * n).sum()));
    }

    #[test]
    fn beta_without_quadratic_part() {
        let chi = DirichletCharacter::new(5, vec![1]).unwrap();
        let expected = jacobi_sum(&chi)
            .mul(&gamma_chi(&chi).value())
            .unwrap()
            .scale(&rat(chi.parity() as i64, 1));
        assert_eq!(beta_finite(&chi).unwrap(), expected);
        assert!(beta_finite(&DirichletCharacter::new(5, vec![2]).unwrap()).is_err());
    }

    #[test]
    fn beta_numeric_matches_canonical_embedding() {
        for q in [5u64, 7, 13, 15, 21, 35] {
            let chars = enumerate_characters(q, CharFilter { odd: false, primitive: true, complex: true }).unwrap();
            for chi in chars {
                let exact = beta_finite(&chi).unwrap();
                let num = beta_numeric(&chi, 200_000);
                let ks = beta_matching_embeddings(&exact, num, 1e-4);
                assert!(ks.contains(&1), "q={q} exps={:?} exact={} num={num}", chi.exponents(), exact.embed_complex(1).unwrap());
            }
        }
    }

    #[test]
    fn lemma_identities_small_moduli() {
        for q in [5u64, 7, 9] {
            for chi in odd_primitive_complex(q) {
                for a in 0..q as i64 {
                    for n in 0..q as i64 {
                        let d = (a * n).pow(2) + 4 * a;
                        if gcd(d.rem_euclid(q as i64) as u64, q) != 1 {
                            continue;
                        }
                        let g1 = g_sum(&f1_mod(a, n), &chi).unwrap();
                        let g2 = g_sum(&f2_mod(a, n), &chi).unwrap();
                        assert_eq!(g1, g2, "q={q} a={a} n={n}");
                        assert!(g_aux(&chi, &f2_mod(a, n), Weight::One).is_zero());
                        assert!(g_aux(&chi, &f2_mod(a, n), Weight::T).is_zero());
                        assert!(g_aux(&chi, &f1_mod(a, n), Weight::B1).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn identity_at_small_fields() {
        for (a, n, q) in [(3u64, 1u64, 5u64), (3, 3, 5), (7, 1, 5)] {
            let p = RDParams::fundamental(a, n).unwrap();
            for chi in odd_primitive_complex(q) {
                let w = identity_check(&p, &chi).unwrap();
                assert!(w.holds, "a={a} n={n} q={q}: {} vs {}", w.lhs, w.rhs);
                let z = partial_zeta_zero(&p, &chi).unwrap();
                let z_conj = partial_zeta_zero(&p, &chi.conj()).unwrap();
                assert_eq!(z.conj(), z_conj);
            }
        }
        let p = RDParams::fundamental(3, 1).unwrap();
        let chi7 = odd_primitive_complex(7).remove(0);
        assert!(identity_check(&p, &chi7).is_err());
        let yokoi = RDParams::fundamental(1, 1).unwrap();
        assert!(matches!(identity_check(&yokoi, &odd_primitive_complex(7)[0]), Err(Error::Unsupported(_))));
    }
}
