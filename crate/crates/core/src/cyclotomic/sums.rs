//! Character sums with values in `Z[ζ_N]`, `N` the exact order of the character.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

use super::CycElement;
use crate::arith::gcd;
use crate::characters::DirichletCharacter;
use crate::error::{invalid, Error, Result};

/// `m_χ = Σ_{1≤a<q} a χ(a)`.
pub fn m_chi(chi: &DirichletCharacter) -> CycElement {
    let n = chi.order();
    let mut buckets = vec![0i128; n as usize];
    for a in 1..chi.modulus() {
        if let Some(k) = chi.value(a as i64) {
            buckets[k as usize] += a as i128;
        }
    }
    CycElement::from_buckets(n, &buckets)
}

fn require_odd_primitive(chi: &DirichletCharacter) -> Result<()> {
    if chi.modulus() <= 1 || !chi.is_odd() || !chi.is_primitive() {
        return Err(invalid!("character mod {} must be odd and primitive", chi.modulus()));
    }
    Ok(())
}

/// `L(0, χ) = -m_χ / q` for odd primitive `χ`.
pub fn l0_exact(chi: &DirichletCharacter) -> Result<CycElement> {
    require_odd_primitive(chi)?;
    let q = BigRational::new(BigInt::from(-1), BigInt::from(chi.modulus()));
    Ok(m_chi(chi).scale(&q))
}

/// `L(0, χχ_d) = -(1/(qd)) Σ_{1≤a≤qd} a (χχ_d)(a)`, checked to be an algebraic
/// integer. `chi_d` is the quadratic character of conductor `d`.
pub fn l0_product_integral(chi: &DirichletCharacter, chi_d: &DirichletCharacter) -> Result<CycElement> {
    require_odd_primitive(chi)?;
    let (q, d) = (chi.modulus(), chi_d.modulus());
    if chi_d.order() > 2 || chi_d.is_odd() || d % 4 != 1 {
        return Err(invalid!("chi_d must be an even quadratic character with d = 1 mod 4"));
    }
    if gcd(q, d) != 1 {
        return Err(invalid!("moduli {q} and {d} are not coprime"));
    }
    let n = chi.order();
    // χ is odd, so N is even and -1 = ζ_N^{N/2}
    let half = n / 2;
    let mut buckets = vec![0i128; n as usize];
    for a in 1..=q * d {
        let (Some(k), Some(s)) = (chi.value(a as i64), chi_d.value(a as i64)) else {
            continue;
        };
        let k = (k as u64 + if s == 0 { 0 } else { half }) % n;
        buckets[k as usize] += a as i128;
    }
    let qd = BigRational::new(BigInt::from(-1), BigInt::from(q * d));
    let value = CycElement::from_buckets(n, &buckets).scale(&qd);
    if !value.is_integral() {
        return Err(Error::ViolatedPrecondition(format!(
            "L(0, chi chi_d) for q = {q}, d = {d} is not integral: {value}"
        )));
    }
    Ok(value)
}

/// `J_χ = Σ_{a+b≡1 (q)} χ(a)χ(b)`.
pub fn jacobi_sum(chi: &DirichletCharacter) -> CycElement {
    let (q, n) = (chi.modulus(), chi.order());
    let mut buckets = vec![0i128; n as usize];
    for a in 0..q {
        let b = (q + 1 - a) % q;
        if let (Some(x), Some(y)) = (chi.value(a as i64), chi.value(b as i64)) {
            buckets[((x as u64 + y as u64) % n) as usize] += 1;
        }
    }
    CycElement::from_buckets(n, &buckets)
}

/// `τ(χ) = Σ_{a mod q} χ(a) e(a/q)` in floating point.
pub fn gauss_sum_numeric(chi: &DirichletCharacter) -> Complex64 {
    let (q, n) = (chi.modulus() as f64, chi.order() as f64);
    let tau = std::f64::consts::TAU;
    (0..chi.modulus())
        .filter_map(|a| {
            chi.value(a as i64)
                .map(|k| Complex64::from_polar(1.0, tau * (k as f64 / n + a as f64 / q)))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{enumerate_characters, kronecker_chi_d, CharFilter};

    fn order4_mod5() -> DirichletCharacter {
        // generator 2, χ(2) = ζ_4
        DirichletCharacter::new(5, vec![1]).unwrap()
    }

    #[test]
    fn m_chi_examples() {
        let chi = order4_mod5();
        assert_eq!(chi.value(2), Some(1));
        assert_eq!(m_chi(&chi), CycElement::from_buckets(4, &[-3, -1]));
        let quad3 = DirichletCharacter::new(3, vec![1]).unwrap();
        assert_eq!(m_chi(&quad3), CycElement::from_integer(2, -1));
    }

    #[test]
    fn m_chi_vanishes_for_even_characters() {
        for q in (3..=200).step_by(2) {
            for chi in enumerate_characters(q, CharFilter::ALL).unwrap() {
                if !chi.is_odd() && !chi.is_principal() {
                    assert!(m_chi(&chi).is_zero(), "q={q} exps={:?}", chi.exponents());
                }
            }
        }
    }

    #[test]
    fn l0_examples() {
        let chi = order4_mod5();
        let expected = CycElement::from_buckets(4, &[3, 1])
            .scale(&BigRational::new(1.into(), 5.into()));
        assert_eq!(l0_exact(&chi).unwrap(), expected);
        assert_eq!(l0_exact(&chi.conj()).unwrap(), expected.conj());
        assert!(l0_exact(&DirichletCharacter::new(5, vec![2]).unwrap()).is_err());
        for q in (3..=100).step_by(2) {
            for chi in enumerate_characters(q, CharFilter { odd: true, primitive: true, complex: false }).unwrap() {
                let l0 = l0_exact(&chi).unwrap();
                let qq = BigRational::from_integer(BigInt::from(q));
                assert_eq!(l0.scale(&qq), m_chi(&chi).neg());
            }
        }
    }

    #[test]
    fn l0_product_is_integral() {
        let chi = order4_mod5();
        assert!(l0_product_integral(&chi, &kronecker_chi_d(21).unwrap()).is_ok());
        assert!(l0_product_integral(&chi, &kronecker_chi_d(5).unwrap()).is_err());
        let even = DirichletCharacter::new(5, vec![2]).unwrap();
        assert!(l0_product_integral(&even, &kronecker_chi_d(21).unwrap()).is_err());
        for q in (3..=15).step_by(2) {
            for chi in enumerate_characters(q, CharFilter { odd: true, primitive: true, complex: false }).unwrap() {
                for d in [5u64, 13, 21, 29, 77] {
                    if gcd(q, d) == 1 {
                        l0_product_integral(&chi, &kronecker_chi_d(d).unwrap()).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn jacobi_sum_examples() {
        let j = jacobi_sum(&order4_mod5());
        assert_eq!(j.mul(&j.conj()).unwrap(), CycElement::from_integer(4, 5));
        for q in [5u64, 9, 15, 21] {
            let j = jacobi_sum(&DirichletCharacter::principal(q).unwrap());
            let units_pairs = (0..q)
                .filter(|&a| gcd(a, q) == 1 && gcd((q + 1 - a) % q, q) == 1)
                .count() as i64;
            assert_eq!(j, CycElement::from_integer(1, units_pairs));
        }
        assert_eq!(jacobi_sum(&DirichletCharacter::principal(5).unwrap()), CycElement::from_integer(1, 3));
    }

    #[test]
    fn gauss_sums() {
        let chi = order4_mod5();
        let tau = gauss_sum_numeric(&chi);
        assert!((tau.norm_sqr() - 5.0).abs() < 5e-9);
        let lhs = gauss_sum_numeric(&chi.conj());
        let rhs = tau.conj() * chi.parity() as f64;
        assert!((lhs - rhs).norm() < 1e-9);
        let t1 = gauss_sum_numeric(&DirichletCharacter::principal(1).unwrap());
        assert!((t1 - 1.0).norm() < 1e-12);
        for q in [7u64, 9, 25, 39] {
            for chi in enumerate_characters(q, CharFilter { odd: false, primitive: true, complex: false }).unwrap() {
                assert!((gauss_sum_numeric(&chi).norm_sqr() / q as f64 - 1.0).abs() < 1e-9);
            }
        }
    }
}
