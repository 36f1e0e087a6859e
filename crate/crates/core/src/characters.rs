//! Dirichlet characters modulo odd `q`.
//!
//! A character is stored as an exponent vector over a fixed basis of
//! `(Z/qZ)*`: one generator per odd prime power `p^k || q`, namely the smallest
//! primitive root modulo `p^k`, lifted by CRT to be `1` modulo the other prime
//! powers. The value table caches `chi(x)` for every residue as an exponent
//! of `zeta_N = exp(2 pi i / N)`, where `N` is the exact order of the character.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd, lcm};
use crate::error::{invalid, Error, Result};
use crate::serde_util::dec;

/// Marker in value tables for residues not coprime to the modulus.
pub const ZERO: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Component {
    prime: u64,
    exponent: u32,
    /// `p^k`
    modulus: u64,
    /// `phi(p^k)`, the order of the cyclic factor.
    order: u64,
    /// Discrete logarithm base the primitive root, `ZERO` on non-units.
    dlog: Vec<u32>,
}

/// Decomposition of `(Z/qZ)*` into cyclic factors, one per prime power of `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitGroupBasis {
    pub modulus: u64,
    /// `(generator, order)` pairs; the group is the internal direct product.
    pub generators: Vec<(u64, u64)>,
    components: Vec<Component>,
}

impl UnitGroupBasis {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(invalid!("unit group of modulus 0"));
        }
        if q % 2 == 0 {
            return Err(invalid!("even modulus {q} is not supported"));
        }
        let fact = arith::factorize(q)?;
        let mut components = Vec::new();
        let mut generators = Vec::new();
        for &(p, k) in &fact.factors {
            let m = p.pow(k);
            let root = arith::primitive_root_prime_power(p, k)?;
            let order = m / p * (p - 1);
            let mut dlog = vec![ZERO; m as usize];
            let mut x = 1u64;
            for e in 0..order {
                dlog[x as usize] = e as u32;
                x = x * root % m;
            }
            let (g, _) = arith::crt_combine(&[(root, m), (1, q / m)])?;
            generators.push((g, order));
            components.push(Component { prime: p, exponent: k, modulus: m, order, dlog });
        }
        Ok(UnitGroupBasis { modulus: q, generators, components })
    }

    /// Discrete logarithm of a unit with respect to the generators.
    pub fn dlog(&self, x: u64) -> Option<Vec<u64>> {
        self.components
            .iter()
            .map(|c| {
                let e = c.dlog[(x % c.modulus) as usize];
                (e != ZERO).then_some(e as u64)
            })
            .collect()
    }

    pub fn group_order(&self) -> u64 {
        self.generators.iter().map(|&(_, e)| e).product()
    }
}

/// Which characters [`enumerate_characters`] keeps. `true` means "required".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CharFilter {
    pub odd: bool,
    pub primitive: bool,
    /// Order greater than 2.
    pub complex: bool,
}

impl CharFilter {
    pub const ALL: CharFilter = CharFilter { odd: false, primitive: false, complex: false };
    pub const ODD_PRIMITIVE_COMPLEX: CharFilter =
        CharFilter { odd: true, primitive: true, complex: true };
}

#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    basis: Arc<UnitGroupBasis>,
    exponents: Vec<u64>,
    order: u64,
    table: Vec<u32>,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus() == other.modulus() && self.exponents == other.exponents
    }
}
impl Eq for DirichletCharacter {}

fn order_from_exponents(basis: &UnitGroupBasis, exponents: &[u64]) -> u64 {
    basis
        .generators
        .iter()
        .zip(exponents)
        .fold(1, |acc, (&(_, e), &t)| lcm(acc, e / gcd(t, e)))
}

impl DirichletCharacter {
    pub fn from_exponents(basis: Arc<UnitGroupBasis>, exponents: Vec<u64>) -> Result<Self> {
        if exponents.len() != basis.generators.len() {
            return Err(invalid!(
                "character mod {} needs {} exponents, got {}",
                basis.modulus,
                basis.generators.len(),
                exponents.len()
            ));
        }
        if let Some((i, _)) = exponents
            .iter()
            .zip(&basis.generators)
            .enumerate()
            .find(|(_, (&t, &(_, e)))| t >= e)
            .map(|(i, x)| (i, x))
        {
            return Err(invalid!("exponent {i} out of range for modulus {}", basis.modulus));
        }
        let order = order_from_exponents(&basis, &exponents);
        let q = basis.modulus as usize;
        let mut table = vec![0u32; q];
        let mut unit = vec![true; q];
        for (c, &t) in basis.components.iter().zip(&exponents) {
            let contrib: Vec<u32> = c
                .dlog
                .iter()
                .map(|&l| {
                    if l == ZERO {
                        ZERO
                    } else {
                        // exact: the component value has order dividing N
                        ((l as u64 * t % c.order) * order / c.order % order) as u32
                    }
                })
                .collect();
            for x in 0..q {
                let v = contrib[x % c.modulus as usize];
                if v == ZERO {
                    unit[x] = false;
                } else {
                    table[x] = ((table[x] as u64 + v as u64) % order) as u32;
                }
            }
        }
        for x in 0..q {
            if !unit[x] {
                table[x] = ZERO;
            }
        }
        Ok(DirichletCharacter { basis, exponents, order, table })
    }

    pub fn new(q: u64, exponents: Vec<u64>) -> Result<Self> {
        Self::from_exponents(Arc::new(UnitGroupBasis::new(q)?), exponents)
    }

    pub fn principal(q: u64) -> Result<Self> {
        let basis = Arc::new(UnitGroupBasis::new(q)?);
        let n = basis.generators.len();
        Self::from_exponents(basis, vec![0; n])
    }

    pub fn modulus(&self) -> u64 {
        self.basis.modulus
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn basis(&self) -> &Arc<UnitGroupBasis> {
        &self.basis
    }

    /// Value table: `table()[x]` is `k` with `chi(x) = zeta_N^k`, or [`ZERO`].
    pub fn table(&self) -> &[u32] {
        &self.table
    }

    /// Exponent of `chi(x)` as a power of `zeta_N`, `None` when `gcd(x, q) > 1`.
    #[inline]
    pub fn value(&self, x: i64) -> Option<u32> {
        let v = self.table[arith::modulo(x, self.modulus()) as usize];
        (v != ZERO).then_some(v)
    }

    /// Exponent of `chi(x)` as a power of `zeta_m` for a multiple `m` of the order.
    pub fn value_in(&self, x: i64, m: u64) -> Option<u64> {
        debug_assert_eq!(m % self.order, 0);
        self.value(x).map(|k| k as u64 * (m / self.order))
    }

    /// `chi(-1)` as `+1` or `-1`.
    pub fn parity(&self) -> i8 {
        match self.value(-1) {
            Some(0) => 1,
            Some(_) => -1,
            None => unreachable!("-1 is a unit"),
        }
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == -1
    }

    pub fn is_principal(&self) -> bool {
        self.order == 1
    }

    pub fn is_complex(&self) -> bool {
        self.order > 2
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus()
    }

    /// Smallest modulus inducing this character.
    pub fn conductor(&self) -> u64 {
        self.basis
            .components
            .iter()
            .zip(&self.exponents)
            .map(|(c, &t)| component_conductor(c, t))
            .product()
    }

    pub fn conj(&self) -> Self {
        self.pow(self.order - 1)
    }

    pub fn pow(&self, k: u64) -> Self {
        let exps = self
            .exponents
            .iter()
            .zip(&self.basis.generators)
            .map(|(&t, &(_, e))| t * (k % e) % e)
            .collect();
        Self::from_exponents(self.basis.clone(), exps).expect("exponents in range")
    }

    pub fn spec(&self) -> CharacterSpec {
        CharacterSpec {
            modulus: self.modulus(),
            generators: self
                .basis
                .generators
                .iter()
                .zip(&self.exponents)
                .map(|(&(g, e), &t)| GeneratorSpec { generator: g, order: e, exponent: t })
                .collect(),
            order: self.order,
        }
    }

    /// Rebuild a character from its serialized form. The generator list must
    /// match the canonical basis of the modulus and the declared order must be exact.
    pub fn from_spec(spec: &CharacterSpec) -> Result<Self> {
        let basis = Arc::new(UnitGroupBasis::new(spec.modulus)?);
        let declared: Vec<(u64, u64)> =
            spec.generators.iter().map(|g| (g.generator, g.order)).collect();
        if declared != basis.generators {
            return Err(invalid!("generator list does not match the basis of modulus {}", spec.modulus));
        }
        let chi = Self::from_exponents(basis, spec.generators.iter().map(|g| g.exponent).collect())?;
        if chi.order != spec.order {
            return Err(invalid!("declared order {} but character has order {}", spec.order, chi.order));
        }
        Ok(chi)
    }
}

fn component_conductor(c: &Component, t: u64) -> u64 {
    if t == 0 {
        return 1;
    }
    let mut o = c.order / gcd(t, c.order);
    let mut v = 0;
    while o % c.prime == 0 {
        o /= c.prime;
        v += 1;
    }
    c.prime.pow(v + 1)
}

/// Serialized character: modulus, `(generator, generator order, exponent)` list, order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterSpec {
    #[serde(with = "dec")]
    pub modulus: u64,
    pub generators: Vec<GeneratorSpec>,
    #[serde(with = "dec")]
    pub order: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(with = "dec")]
    pub generator: u64,
    #[serde(with = "dec")]
    pub order: u64,
    #[serde(with = "dec")]
    pub exponent: u64,
}

pub fn unit_group_basis(q: u64) -> Result<UnitGroupBasis> {
    UnitGroupBasis::new(q)
}

/// All characters mod `q` passing `filter`, in lexicographic order of exponent vectors.
pub fn enumerate_characters(q: u64, filter: CharFilter) -> Result<Vec<DirichletCharacter>> {
    let basis = Arc::new(UnitGroupBasis::new(q)?);
    let orders: Vec<u64> = basis.generators.iter().map(|&(_, e)| e).collect();
    // -1 has discrete log e/2 in every (cyclic, even order) factor
    let mut out = Vec::new();
    let mut exps = vec![0u64; orders.len()];
    loop {
        let odd = exps.iter().sum::<u64>() % 2 == 1;
        let order = order_from_exponents(&basis, &exps);
        let primitive = basis
            .components
            .iter()
            .zip(&exps)
            .all(|(c, &t)| component_conductor(c, t) == c.modulus);
        if (!filter.odd || odd) && (!filter.primitive || primitive) && (!filter.complex || order > 2)
        {
            out.push(DirichletCharacter::from_exponents(basis.clone(), exps.clone())?);
        }
        // odometer, last generator fastest
        let mut i = orders.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            exps[i] += 1;
            if exps[i] < orders[i] {
                break;
            }
            exps[i] = 0;
        }
    }
}

/// Kronecker character `chi_d(m) = (m / d)` for squarefree `d = 1 mod 4`.
pub fn kronecker_chi_d(d: u64) -> Result<DirichletCharacter> {
    if d <= 1 || d % 4 != 1 || !arith::is_squarefree(d)? {
        return Err(invalid!("kronecker_chi_d: d = {d} must be squarefree, > 1 and 1 mod 4"));
    }
    let basis = Arc::new(UnitGroupBasis::new(d)?);
    let exps = basis.generators.iter().map(|&(_, e)| e / 2).collect();
    DirichletCharacter::from_exponents(basis, exps)
}

/// Pointwise product, as a character modulo `lcm(q1, q2)`.
pub fn multiply(a: &DirichletCharacter, b: &DirichletCharacter) -> Result<DirichletCharacter> {
    let q = lcm(a.modulus(), b.modulus());
    let basis = Arc::new(UnitGroupBasis::new(q)?);
    let m = lcm(a.order(), b.order());
    let mut exps = Vec::with_capacity(basis.generators.len());
    for &(g, e) in &basis.generators {
        let ka = a.value_in(g as i64, m).expect("generator is a unit");
        let kb = b.value_in(g as i64, m).expect("generator is a unit");
        let k = (ka + kb) % m;
        if (k * e) % m != 0 {
            return Err(Error::Internal(format!("product value at generator {g} has wrong order")));
        }
        exps.push(k * e / m);
    }
    DirichletCharacter::from_exponents(basis, exps)
}

/// The unique factorization `chi = chi_plus * chi_minus` with coprime primitive
/// factors, `chi_minus` of order at most 2 and `chi_plus^2` primitive.
pub fn decompose_plus_minus(
    chi: &DirichletCharacter,
) -> Result<(DirichletCharacter, DirichletCharacter)> {
    if chi.order() <= 2 {
        return Err(invalid!("decompose_plus_minus: order {} <= 2", chi.order()));
    }
    if !chi.is_primitive() {
        return Err(invalid!("decompose_plus_minus: character mod {} is not primitive", chi.modulus()));
    }
    let basis = chi.basis();
    let (mut q_plus, mut q_minus) = (1u64, 1u64);
    let (mut e_plus, mut e_minus) = (Vec::new(), Vec::new());
    for (c, &t) in basis.components.iter().zip(chi.exponents()) {
        let comp_order = c.order / gcd(t, c.order);
        // a primitive quadratic component only exists at primes to the first power
        if comp_order == 2 && c.exponent == 1 {
            q_minus *= c.modulus;
            e_minus.push(t);
        } else {
            q_plus *= c.modulus;
            e_plus.push(t);
        }
    }
    let plus = DirichletCharacter::new(q_plus, e_plus)?;
    let minus = DirichletCharacter::new(q_minus, e_minus)?;
    let sq = plus.pow(2);
    if !plus.is_primitive() || !minus.is_primitive() || !sq.is_primitive() || minus.order() > 2 {
        return Err(Error::Internal(format!(
            "no valid plus/minus decomposition for character mod {}",
            chi.modulus()
        )));
    }
    Ok((plus, minus))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_conductor(chi: &DirichletCharacter) -> u64 {
        // induced from mod f iff trivial on units congruent to 1 mod f
        let q = chi.modulus();
        (1..=q)
            .filter(|f| q % f == 0)
            .find(|&f| {
                (1..q)
                    .filter(|&x| gcd(x, q) == 1 && x % f == 1 % f)
                    .all(|x| chi.value(x as i64) == Some(0))
            })
            .unwrap()
    }

    #[test]
    fn basis_examples() {
        let b5 = unit_group_basis(5).unwrap();
        assert_eq!(b5.generators, vec![(2, 4)]);
        let b9 = unit_group_basis(9).unwrap();
        assert_eq!(b9.generators, vec![(2, 6)]);
        let b15 = unit_group_basis(15).unwrap();
        let orders: Vec<u64> = b15.generators.iter().map(|g| g.1).collect();
        assert_eq!(orders, vec![2, 4]);
        assert_eq!(b15.group_order(), 8);
        assert!(unit_group_basis(8).is_err());
    }

    #[test]
    fn basis_generators_have_exact_order_and_unique_dlog() {
        for q in (3..300u64).step_by(2) {
            let b = unit_group_basis(q).unwrap();
            assert_eq!(b.group_order(), arith::euler_phi(q));
            for &(g, e) in &b.generators {
                assert_eq!(arith::multiplicative_order(g, q), Some(e));
            }
            let mut seen = std::collections::HashSet::new();
            for x in 1..q {
                if gcd(x, q) == 1 {
                    let l = b.dlog(x).unwrap();
                    let back = b
                        .generators
                        .iter()
                        .zip(&l)
                        .fold(1, |acc, (&(g, _), &t)| acc * arith::pow_mod(g, t, q) % q);
                    assert_eq!(back, x);
                    assert!(seen.insert(l));
                } else {
                    assert!(b.dlog(x).is_none());
                }
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        assert!(enumerate_characters(3, CharFilter::ODD_PRIMITIVE_COMPLEX).unwrap().is_empty());
        let c5 = enumerate_characters(5, CharFilter::ODD_PRIMITIVE_COMPLEX).unwrap();
        assert_eq!(c5.len(), 2);
        assert!(c5.iter().all(|c| c.order() == 4));
        let all95 = enumerate_characters(95, CharFilter::ALL).unwrap();
        assert_eq!(all95.len(), 72);
        let brute = all95
            .iter()
            .filter(|c| c.is_odd() && brute_conductor(c) == 95 && c.order() > 2)
            .count();
        assert_eq!(
            enumerate_characters(95, CharFilter::ODD_PRIMITIVE_COMPLEX).unwrap().len(),
            brute
        );
    }

    #[test]
    fn characters_are_homomorphisms_and_count_phi() {
        for q in (3..=300u64).step_by(2) {
            let chars = enumerate_characters(q, CharFilter::ALL).unwrap();
            assert_eq!(chars.len() as u64, arith::euler_phi(q));
            for chi in chars.iter().step_by(7) {
                assert_eq!(chi.value(1), Some(0));
                let n = chi.order() as u32;
                for x in (1..q).step_by(5) {
                    for y in (1..q).step_by(11) {
                        let xy = chi.value((x * y) as i64);
                        match (chi.value(x as i64), chi.value(y as i64)) {
                            (Some(a), Some(b)) => assert_eq!(xy, Some((a + b) % n)),
                            _ => assert_eq!(xy, None),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn order_is_exact() {
        for chi in enumerate_characters(105, CharFilter::ALL).unwrap() {
            let n = chi.order() as u32;
            let vals: Vec<u32> = chi.table().iter().copied().filter(|&v| v != ZERO).collect();
            // some value generates the full group of N-th roots of unity... the gcd of
            // all exponents with N must be 1
            let g = vals.iter().fold(n as u64, |acc, &v| gcd(acc, v as u64));
            assert_eq!(g, 1, "order of character {:?}", chi.exponents());
        }
    }

    #[test]
    fn conductor_examples_and_brute_force() {
        let chi = DirichletCharacter::principal(15).unwrap();
        assert_eq!(chi.conductor(), 1);
        let c5 = enumerate_characters(5, CharFilter::ODD_PRIMITIVE_COMPLEX).unwrap();
        assert_eq!(c5[0].conductor(), 5);
        // quadratic character mod 3 lifted to 15: exponents (1, 0)
        let q3 = DirichletCharacter::new(15, vec![1, 0]).unwrap();
        assert_eq!(q3.conductor(), 3);
        for q in (3..=100u64).step_by(2) {
            for chi in enumerate_characters(q, CharFilter::ALL).unwrap() {
                let f = chi.conductor();
                assert_eq!(q % f, 0);
                assert_eq!(f, brute_conductor(&chi), "q={q} exps={:?}", chi.exponents());
            }
        }
    }

    #[test]
    fn parity_matches_exponent_sum() {
        for q in (3..=150u64).step_by(2) {
            for chi in enumerate_characters(q, CharFilter::ALL).unwrap() {
                let from_exps = if chi.exponents().iter().sum::<u64>() % 2 == 0 { 1 } else { -1 };
                assert_eq!(chi.parity(), from_exps);
            }
        }
    }

    #[test]
    fn kronecker_examples() {
        let chi = kronecker_chi_d(21).unwrap();
        assert_eq!(chi.parity(), 1);
        assert_eq!(chi.value(2), Some(1)); // zeta_2^1 = -1
        let chi5 = kronecker_chi_d(5).unwrap();
        assert_eq!(chi5.value(4), Some(0));
        for d in [5u64, 13, 21, 29, 77, 1253] {
            let chi = kronecker_chi_d(d).unwrap();
            for m in 0..d {
                let j = arith::jacobi(m as i64, d).unwrap();
                let v = match chi.value(m as i64) {
                    None => 0,
                    Some(0) => 1,
                    Some(_) => -1,
                };
                assert_eq!(v, j);
            }
        }
        assert!(kronecker_chi_d(45).is_err());
        assert!(kronecker_chi_d(7).is_err());
    }

    #[test]
    fn multiply_examples() {
        let c5 = enumerate_characters(5, CharFilter::ODD_PRIMITIVE_COMPLEX).unwrap();
        let chi = &c5[0];
        assert!(multiply(chi, &chi.conj()).unwrap().is_principal());
        let p = DirichletCharacter::principal(5).unwrap();
        assert_eq!(multiply(chi, &p).unwrap(), *chi);
        let prod = multiply(chi, &kronecker_chi_d(21).unwrap()).unwrap();
        assert_eq!(prod.modulus(), 105);
        assert!(prod.is_odd());
        for x in 0..105i64 {
            let expect = match (chi.value(x), kronecker_chi_d(21).unwrap().value(x)) {
                (Some(a), Some(b)) => Some((a + 2 * b) % 4),
                _ => None,
            };
            assert_eq!(prod.value_in(x, 4).map(|v| v as u32), expect);
        }
    }

    #[test]
    fn decomposition_examples() {
        let c5 = enumerate_characters(5, CharFilter::ODD_PRIMITIVE_COMPLEX).unwrap();
        let (p, m) = decompose_plus_minus(&c5[0]).unwrap();
        assert_eq!(p, c5[0]);
        assert_eq!(m.modulus(), 1);
        // order-4 mod 5 times quadratic mod 3, as a character mod 15
        let chi = DirichletCharacter::new(15, vec![1, 1]).unwrap();
        assert!(chi.is_primitive());
        let (p, m) = decompose_plus_minus(&chi).unwrap();
        assert_eq!((p.modulus(), m.modulus()), (5, 3));
        assert_eq!(p.exponents(), &[1]);
        let quad5 = DirichletCharacter::new(5, vec![2]).unwrap();
        assert!(decompose_plus_minus(&quad5).is_err());
    }

    #[test]
    fn decomposition_is_unique_and_valid() {
        for q in (3..=100u64).step_by(2) {
            let prim: Vec<_> = enumerate_characters(q, CharFilter::ALL)
                .unwrap()
                .into_iter()
                .filter(|c| c.is_primitive() && c.order() > 2)
                .collect();
            for chi in &prim {
                let (p, m) = decompose_plus_minus(chi).unwrap();
                assert_eq!(p.modulus() * m.modulus(), chi.conductor());
                assert_eq!(gcd(p.modulus(), m.modulus()), 1);
                assert!(p.pow(2).is_primitive() && m.order() <= 2);
                let back = multiply(&p, &m).unwrap();
                assert_eq!(back.modulus(), q);
                for x in 0..q as i64 {
                    assert_eq!(back.value_in(x, lcm(back.order(), chi.order())),
                               chi.value_in(x, lcm(back.order(), chi.order())));
                }
                // exhaustive search over all factorizations q = q1 * q2 with coprime factors
                let mut found = 0;
                for q1 in (1..=q).filter(|d| q % d == 0 && gcd(*d, q / d) == 1) {
                    let q2 = q / q1;
                    let c1s = enumerate_characters(q1, CharFilter::ALL).unwrap();
                    let c2s = enumerate_characters(q2, CharFilter::ALL).unwrap();
                    for c1 in c1s.iter().filter(|c| c.is_primitive() && c.pow(2).is_primitive()) {
                        for c2 in c2s.iter().filter(|c| c.is_primitive() && c.order() <= 2) {
                            let l = lcm(lcm(c1.order(), c2.order()), chi.order());
                            let matches = (0..q as i64).all(|x| {
                                let prod = match (c1.value_in(x, l), c2.value_in(x, l)) {
                                    (Some(a), Some(b)) => Some((a + b) % l),
                                    _ => None,
                                };
                                prod == chi.value_in(x, l)
                            });
                            if matches {
                                found += 1;
                            }
                        }
                    }
                }
                assert_eq!(found, 1, "q={q} exps={:?}", chi.exponents());
            }
        }
    }

    #[test]
    fn spec_round_trip() {
        for chi in enumerate_characters(175, CharFilter::ODD_PRIMITIVE_COMPLEX).unwrap().iter().take(5) {
            let spec = chi.spec();
            let json = serde_json::to_string(&spec).unwrap();
            let back: CharacterSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(DirichletCharacter::from_spec(&back).unwrap(), *chi);
        }
    }
}
