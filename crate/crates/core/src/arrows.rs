//! Arrows `q -> r`: an odd primitive complex character `χ` mod `q` and a prime
//! ideal `ℜ` above `r`, `(r, q) = 1`, with `m_χ ∈ ℜ`. Certificates are JSON
//! documents that [`check_certificate`] re-verifies from scratch.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, is_prime};
use crate::characters::{enumerate_characters, CharFilter, CharacterSpec, DirichletCharacter};
use crate::cyclotomic::{m_chi, primes_above, ResidueFieldTarget};
use crate::error::{invalid, Error, Result};
use crate::serde_util::{dec, dec_vec};

pub const CERTIFICATE_SCHEMA_VERSION: &str = "1";

/// Plain-data description of a prime ideal above `r`; validated only by the checker.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSpec {
    #[serde(with = "dec")]
    pub r: u64,
    #[serde(rename = "N", with = "dec")]
    pub n: u64,
    #[serde(with = "dec_vec")]
    pub poly: Vec<u64>,
}

impl From<&ResidueFieldTarget> for TargetSpec {
    fn from(t: &ResidueFieldTarget) -> Self {
        TargetSpec { r: t.r(), n: t.order(), poly: t.poly().to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowCertificate {
    pub schema_version: String,
    #[serde(with = "dec")]
    pub q: u64,
    #[serde(with = "dec")]
    pub r: u64,
    pub character: CharacterSpec,
    pub target: TargetSpec,
    /// Reduction of `m_χ` at the target, coefficient list of length `deg`.
    #[serde(with = "dec_vec")]
    pub m_residue: Vec<u64>,
    pub toolkit_version: String,
}

impl ArrowCertificate {
    pub fn file_name(&self) -> String {
        certificate_file_name(self.q, self.r)
    }

    pub fn character(&self) -> Result<DirichletCharacter> {
        DirichletCharacter::from_spec(&self.character)
    }

    pub fn residue_target(&self) -> Result<ResidueFieldTarget> {
        ResidueFieldTarget::new(self.target.r, self.target.n, self.target.poly.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name());
        std::fs::write(&path, self.to_json() + "\n")?;
        Ok(path)
    }
}

pub fn certificate_file_name(q: u64, r: u64) -> String {
    format!("arrow_{q}_{r}.json")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    First,
    All,
}

fn check_arrow_args(q: u64, r: u64) -> Result<()> {
    if q <= 1 || q % 2 == 0 {
        return Err(invalid!("q = {q} must be odd and > 1"));
    }
    if r == 2 || !is_prime(r) {
        return Err(invalid!("r = {r} must be an odd prime"));
    }
    if gcd(q, r) != 1 {
        return Err(invalid!("gcd(q, r) > 1 for q = {q}, r = {r}"));
    }
    Ok(())
}

/// Searches characters in enumeration order and targets in factor order.
pub fn find_arrows(q: u64, r: u64, mode: SearchMode) -> Result<Vec<ArrowCertificate>> {
    check_arrow_args(q, r)?;
    let mut targets: HashMap<u64, Vec<ResidueFieldTarget>> = HashMap::new();
    let mut out = Vec::new();
    for chi in enumerate_characters(q, CharFilter::ODD_PRIMITIVE_COMPLEX)? {
        let n = chi.order();
        if !targets.contains_key(&n) {
            targets.insert(n, primes_above(r, n)?);
        }
        let m = m_chi(&chi);
        for t in &targets[&n] {
            let residue = t.reduce(&m)?;
            if ResidueFieldTarget::is_zero(&residue) {
                out.push(ArrowCertificate {
                    schema_version: CERTIFICATE_SCHEMA_VERSION.into(),
                    q,
                    r,
                    character: chi.spec(),
                    target: t.into(),
                    m_residue: residue,
                    toolkit_version: crate::TOOLKIT_VERSION.into(),
                });
                if mode == SearchMode::First {
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

/// Outcome of re-verifying a certificate; `failures` names each failed check.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CertificateCheck {
    pub failures: Vec<String>,
}

impl CertificateCheck {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Re-verifies every property of the certificate without trusting any field.
pub fn check_certificate(cert: &ArrowCertificate) -> CertificateCheck {
    let mut failures = Vec::new();
    let mut fail = |s: String| failures.push(s);
    if cert.schema_version != CERTIFICATE_SCHEMA_VERSION {
        fail(format!("unknown schema version {}", cert.schema_version));
    }
    if let Err(e) = check_arrow_args(cert.q, cert.r) {
        fail(e.to_string());
    }
    let chi = match cert.character() {
        Ok(c) => c,
        Err(e) => {
            fail(format!("character: {e}"));
            return CertificateCheck { failures };
        }
    };
    if chi.modulus() != cert.q {
        fail(format!("character modulus {} differs from q = {}", chi.modulus(), cert.q));
    }
    if !chi.is_odd() {
        fail("character is even".into());
    }
    if !chi.is_primitive() {
        fail("character is not primitive".into());
    }
    if !chi.is_complex() {
        fail(format!("character order {} is not > 2", chi.order()));
    }
    if cert.target.r != cert.r {
        fail(format!("target prime {} differs from r = {}", cert.target.r, cert.r));
    }
    if cert.target.n != chi.order() {
        fail(format!("target order {} differs from character order {}", cert.target.n, chi.order()));
    }
    let target = match cert.residue_target() {
        Ok(t) => t,
        Err(e) => {
            fail(format!("target: {e}"));
            return CertificateCheck { failures };
        }
    };
    if target.order() == chi.order() {
        match target.reduce(&m_chi(&chi)) {
            Ok(res) => {
                if !ResidueFieldTarget::is_zero(&res) {
                    fail("m_chi does not reduce to zero".into());
                }
                if res != cert.m_residue {
                    fail("recorded m_residue differs from the recomputed one".into());
                }
            }
            Err(e) => fail(format!("reduction: {e}")),
        }
    }
    CertificateCheck { failures }
}

/// Parses and checks a certificate document.
pub fn check_certificate_json(text: &str) -> Result<CertificateCheck> {
    Ok(check_certificate(&ArrowCertificate::from_json(text)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct ArrowStatus {
    pub q: u64,
    pub r: u64,
    pub established: bool,
    pub error: Option<String>,
    #[serde(skip)]
    pub certificate: Option<ArrowCertificate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArrowSetReport {
    pub arrows: Vec<ArrowStatus>,
}

impl ArrowSetReport {
    pub fn all_established(&self) -> bool {
        self.arrows.iter().all(|a| a.established)
    }

    pub fn failed(&self) -> Vec<(u64, u64)> {
        self.arrows.iter().filter(|a| !a.established).map(|a| (a.q, a.r)).collect()
    }
}

/// Runs [`find_arrows`] in `first` mode on every pair.
pub fn verify_arrow_set(pairs: &[(u64, u64)]) -> ArrowSetReport {
    use rayon::prelude::*;
    let arrows = pairs
        .par_iter()
        .map(|&(q, r)| match find_arrows(q, r, SearchMode::First) {
            Ok(mut v) => ArrowStatus { q, r, established: !v.is_empty(), error: None, certificate: v.pop() },
            Err(e) => ArrowStatus { q, r, established: false, error: Some(e.to_string()), certificate: None },
        })
        .collect();
    ArrowSetReport { arrows }
}

/// A named group of arrows used by one sieve.
pub struct ArrowGroup {
    pub name: &'static str,
    pub arrows: &'static [(u64, u64)],
}

/// Every arrow used by the class-number-one argument, grouped by sieve. The
/// endgame for `a = 7` lists both readings of the pair into 61; see
/// [`ARROW_INTO_61_READINGS`].
pub const ARROW_GROUPS: &[ArrowGroup] = &[
    ArrowGroup {
        name: "first-sieve",
        arrows: &[
            (95, 13),
            (133, 13), (133, 37), (133, 73),
            (247, 3), (247, 7), (247, 73), (247, 127),
            (285, 37), (285, 73),
            (91, 37),
            (219, 17),
            (111, 19),
            (185, 13),
            (273, 19), (273, 37),
            (119, 5),
            (127, 5), (127, 13),
            (381, 37),
        ],
    },
    ArrowGroup { name: "mod-43", arrows: &[(215, 7), (215, 19), (215, 37)] },
    ArrowGroup { name: "mod-181", arrows: &[(181, 5), (181, 37), (247, 181), (285, 181)] },
    ArrowGroup { name: "mod-353", arrows: &[(255, 353), (3315, 353)] },
    ArrowGroup { name: "mod-17", arrows: &[(119, 3), (119, 5), (119, 13), (221, 5)] },
    ArrowGroup {
        name: "endgame",
        arrows: &[(175, 1861), (175, 61), (61, 1861), (61, 41), (41, 11), (9, 11)],
    },
];

/// The arrow into 61 used for `a = 7`: one modulus `11 * 19`, or two arrows
/// from 11 and 19 separately.
pub const ARROW_INTO_61_READINGS: (&[(u64, u64)], &[(u64, u64)]) = (&[(209, 61)], &[(11, 61), (19, 61)]);

/// All distinct arrows of [`ARROW_GROUPS`] in first-appearance order.
pub fn all_listed_arrows() -> Vec<(u64, u64)> {
    let mut out: Vec<(u64, u64)> = Vec::new();
    for g in ARROW_GROUPS {
        for &a in g.arrows {
            if !out.contains(&a) {
                out.push(a);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::CycElement;

    #[test]
    fn basic_arrows() {
        let certs = find_arrows(95, 13, SearchMode::First).unwrap();
        assert_eq!(certs.len(), 1);
        assert!(check_certificate(&certs[0]).ok());
        assert!(find_arrows(3, 5, SearchMode::All).unwrap().is_empty());
        assert!(find_arrows(95, 19, SearchMode::First).is_err());
        assert!(find_arrows(95, 2, SearchMode::First).is_err());
        assert!(find_arrows(96, 13, SearchMode::First).is_err());
        assert!(!find_arrows(175, 61, SearchMode::First).unwrap().is_empty());
    }

    #[test]
    fn round_trip_and_determinism() {
        let a = find_arrows(133, 37, SearchMode::First).unwrap().remove(0);
        let b = find_arrows(133, 37, SearchMode::First).unwrap().remove(0);
        assert_eq!(a, b);
        let back = ArrowCertificate::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert!(check_certificate(&back).ok());
        assert!(a.to_json().contains("\"q\": \"133\""));
        assert_eq!(a.file_name(), "arrow_133_37.json");
    }

    #[test]
    fn perturbations_are_rejected() {
        let cert = find_arrows(95, 13, SearchMode::First).unwrap().remove(0);
        let mut bad = cert.clone();
        bad.r = 17;
        assert!(!check_certificate(&bad).ok());
        bad.target.r = 17;
        assert!(!check_certificate(&bad).ok());
        let mut bad = cert.clone();
        let g = &mut bad.character.generators[0];
        g.exponent = (g.exponent + 2) % g.order;
        assert!(!check_certificate(&bad).ok());
        let mut bad = cert.clone();
        bad.m_residue = vec![1; bad.m_residue.len()];
        assert!(!check_certificate(&bad).ok());
        assert!(matches!(check_certificate_json("{\"q\": 5}"), Err(Error::Parse(_))));
    }

    #[test]
    fn descending_summation_agrees() {
        for (q, r) in [(95u64, 13u64), (61, 41), (9, 11), (127, 5)] {
            for cert in find_arrows(q, r, SearchMode::All).unwrap() {
                let chi = cert.character().unwrap();
                let n = chi.order();
                let mut acc = CycElement::zero(n);
                for a in (1..q).rev() {
                    if let Some(k) = chi.value(a as i64) {
                        acc = acc.add(&CycElement::zeta_pow(n, k as i64).scale(&num_rational::BigRational::from_integer((a as i64).into()))).unwrap();
                    }
                }
                let t = cert.residue_target().unwrap();
                assert_eq!(t.reduce(&acc).unwrap(), cert.m_residue);
            }
        }
    }

    #[test]
    fn arrow_set_reports_failures() {
        assert!(verify_arrow_set(&[]).arrows.is_empty());
        let rep = verify_arrow_set(&[(95, 13), (3, 5)]);
        assert!(!rep.all_established());
        assert_eq!(rep.failed(), vec![(3, 5)]);
    }
}
