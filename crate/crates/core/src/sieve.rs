//! Residue sieves over pairs `(a₀, n₀)` modulo `P` driven by arrow certificates.
//!
//! Every pair is first tested against `((an)² + 4a / p) = -1` for each odd
//! prime `p` of the arrows' `qr`, then against the congruence attached to
//! each arrow. Two engines are provided: a direct one that walks every pair
//! and a join engine that assigns CRT coordinates one prime power at a time
//! and checks each arrow as soon as all of its coordinates are fixed.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::{factorize, gcd, inv_mod, jacobi_unchecked};
use crate::arrows::{check_certificate, ArrowCertificate};
use crate::characters::{DirichletCharacter, ZERO};
use crate::cyclotomic::{CycElement, FqElem, ResidueFieldTarget};
use crate::error::invalid;
use crate::serde_util::{dec, dec128, dec_opt, dec_pairs, dec_vec};
use crate::zetaforms::{beta_parts, g_buckets, QuadForm};
use crate::{Error, Result};

pub const PLAN_SCHEMA_VERSION: &str = "1";
pub const REPORT_SCHEMA_VERSION: &str = "1";

/// `true` iff `((a₀n₀)² + 4a₀ / p) = -1`; a zero symbol fails.
pub fn legendre_test(a0: u64, n0: u64, p: u64) -> bool {
    let (a, n) = ((a0 % p) as u128, (n0 % p) as u128);
    let d = ((a * n % p as u128) * (a * n % p as u128) + 4 * a) % p as u128;
    jacobi_unchecked(d as u64, p) == -1
}

/// Legendre outcomes for all `(a mod p, n mod p)`.
struct LegendreTable {
    p: u64,
    pass: Vec<bool>,
}

impl LegendreTable {
    fn new(p: u64) -> Self {
        let mut pass = vec![false; (p * p) as usize];
        for a in 0..p {
            for n in 0..p {
                pass[(a * p + n) as usize] = legendre_test(a, n, p);
            }
        }
        LegendreTable { p, pass }
    }

    #[inline]
    fn test(&self, a: u64, n: u64) -> bool {
        self.pass[((a % self.p) * self.p + n % self.p) as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CongruenceMode {
    General,
    RDividesN,
    QDividesN,
}

/// An arrow certificate with everything the congruence needs reduced into `F_{r^deg}`.
pub struct ArrowConstraint {
    certificate: ArrowCertificate,
    mode: CongruenceMode,
    chi: DirichletCharacter,
    target: ResidueFieldTarget,
    q: u64,
    r: u64,
    primes: Vec<u64>,
    /// `q² γ_χ`.
    pub gamma_scaled: FqElem,
    pub jacobi_plus: FqElem,
    pub mu: i8,
    /// `χ_+(-1)`.
    pub sign_plus: i8,
    /// `Π_{p|q_-} (p χ_+²(p) - 1)`.
    pub prod_p: FqElem,
    /// `Π_{p|q_-} (p² χ_+²(p) - 1)`.
    pub prod_p2: FqElem,
    /// `4 Π (p χ_+²(p) - 1)`, the factor in front of `q² G`.
    g_factor: FqElem,
    /// `K ζ^j` for `K = q²γ_χ J_{χ_+} μ(q_-) χ_+(-1) Π (p²χ_+²(p) - 1)`.
    k_powers: Vec<FqElem>,
    jacobi_q: Vec<i8>,
    g_memo: Vec<OnceLock<FqElem>>,
}

impl std::fmt::Debug for ArrowConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ArrowConstraint")
            .field("q", &self.q)
            .field("r", &self.r)
            .field("mode", &self.mode)
            .field("order", &self.chi.order())
            .field("deg", &self.target.deg())
            .finish()
    }
}

pub fn precompute_constraint(cert: ArrowCertificate, mode: CongruenceMode) -> Result<ArrowConstraint> {
    let check = check_certificate(&cert);
    if !check.ok() {
        return Err(invalid!("certificate {} rejected: {}", cert.file_name(), check.failures.join("; ")));
    }
    let chi = cert.character()?;
    let target = cert.residue_target()?;
    let (q, r) = (cert.q, cert.r);
    let order = chi.order();
    let parts = beta_parts(&chi)?;

    let gamma_scaled = target.reduce(&parts.gamma_scaled)?;
    let jacobi_plus = target.reduce(&parts.jacobi_plus)?;
    let mut prod_p = target.from_int(1);
    let mut prod_p2 = target.from_int(1);
    for (_, p2_term, p_term) in &parts.factors {
        prod_p = target.mul(&prod_p, &target.reduce(p_term)?);
        prod_p2 = target.mul(&prod_p2, &target.reduce(p2_term)?);
    }
    let g_factor = target.scale(&prod_p, 4);
    let mut k = target.mul(&gamma_scaled, &jacobi_plus);
    k = target.scale(&k, (parts.mu * parts.sign) as i64);
    k = target.mul(&k, &prod_p2);
    let k_powers = (0..order as i64).map(|j| target.mul(&k, target.zeta_power(j))).collect();

    let jacobi_q = (0..q).map(|x| jacobi_unchecked(x, q)).collect();
    let g_memo = match mode {
        CongruenceMode::QDividesN => Vec::new(),
        _ => (0..q * q).map(|_| OnceLock::new()).collect(),
    };
    let primes = factorize(q * r)?.primes().collect();
    Ok(ArrowConstraint {
        certificate: cert,
        mode,
        sign_plus: parts.sign,
        mu: parts.mu,
        chi,
        target,
        q,
        r,
        primes,
        gamma_scaled,
        jacobi_plus,
        prod_p,
        prod_p2,
        g_factor,
        k_powers,
        jacobi_q,
        g_memo,
    })
}

impl ArrowConstraint {
    pub fn certificate(&self) -> &ArrowCertificate {
        &self.certificate
    }

    pub fn mode(&self) -> CongruenceMode {
        self.mode
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn qr(&self) -> u64 {
        self.q * self.r
    }

    /// Distinct primes of `qr`, all odd.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn character(&self) -> &DirichletCharacter {
        &self.chi
    }

    pub fn target(&self) -> &ResidueFieldTarget {
        &self.target
    }

    /// Number of filled memo entries.
    pub fn memo_len(&self) -> usize {
        self.g_memo.iter().filter(|c| c.get().is_some()).count()
    }

    /// `4 Π(pχ_+²(p) - 1) q² G(f₁, χ)` reduced, memoized on `(a mod q, n mod q)`.
    pub fn g_term(&self, a0: u64, n0: u64) -> FqElem {
        let (a, n) = (a0 % self.q, n0 % self.q);
        if self.g_memo.is_empty() {
            return self.compute_g_term(a, n);
        }
        self.g_memo[(a * self.q + n) as usize].get_or_init(|| self.compute_g_term(a, n)).clone()
    }

    fn compute_g_term(&self, a: u64, n: u64) -> FqElem {
        let f1 = QuadForm::new(a as i64, (a * n % self.q) as i64, -1);
        let g = self.target.image_of_buckets(&g_buckets(&f1, &self.chi));
        self.target.mul(&self.g_factor, &g)
    }

    /// Adds `n χ(d) (d/q) c_a K` into `acc`; `false` if `χ(d) = 0`.
    fn add_n_term(&self, a0: u64, n0: u64, acc: &mut [u64]) -> bool {
        let (q, r) = (self.q, self.r);
        let (aq, nq) = (a0 % q, n0 % q);
        let an = aq * nq % q;
        let dq = ((an * an) % q + 4 * aq) % q;
        let ed = self.chi.table()[dq as usize];
        if ed == ZERO {
            return false;
        }
        let n_r = n0 % r;
        if n_r == 0 {
            return true;
        }
        let jac = if self.jacobi_q[dq as usize] == 1 { 1 } else { r - 1 };
        let coef = n_r * jac % r;
        let order = self.chi.order();
        let a_r = a0 % r;
        let kd = &self.k_powers[ed as usize];
        let ea = self.chi.table()[aq as usize];
        let kda = (ea != ZERO).then(|| &self.k_powers[((ed as u64 + order - ea as u64) % order) as usize]);
        for (i, slot) in acc.iter_mut().enumerate() {
            let mut t = a_r * kd[i] % r;
            if let Some(kda) = kda {
                t = (t + kda[i]) % r;
            }
            *slot = (*slot + coef * t) % r;
        }
        true
    }

    fn eval_general(&self, a0: u64, n0: u64) -> bool {
        let mut acc = self.g_term(a0, n0);
        self.add_n_term(a0, n0, &mut acc) && ResidueFieldTarget::is_zero(&acc)
    }

    fn eval_g_only(&self, a0: u64, n0: u64) -> bool {
        ResidueFieldTarget::is_zero(&self.g_term(a0, n0))
    }

    fn eval_n_only(&self, a0: u64, n0: u64) -> bool {
        let mut acc = self.target.zero();
        self.add_n_term(a0, n0, &mut acc) && ResidueFieldTarget::is_zero(&acc)
    }

    /// The congruence selected by the constraint's mode. Callers guarantee the
    /// divisibility the mode assumes.
    #[inline]
    pub fn congruence(&self, a0: u64, n0: u64) -> bool {
        match self.mode {
            CongruenceMode::General => self.eval_general(a0, n0),
            CongruenceMode::RDividesN => self.eval_g_only(a0, n0),
            CongruenceMode::QDividesN => self.eval_n_only(a0, n0),
        }
    }

    /// Legendre tests at every prime of `qr` followed by the congruence.
    pub fn passes(&self, a0: u64, n0: u64) -> bool {
        self.primes.iter().all(|&p| legendre_test(a0, n0, p)) && self.congruence(a0, n0)
    }
}

pub fn congruence_general(a0: u64, n0: u64, c: &ArrowConstraint) -> bool {
    c.eval_general(a0, n0)
}

pub fn congruence_r_div_n(a0: u64, n0: u64, c: &ArrowConstraint) -> Result<bool> {
    if n0 % c.r != 0 {
        return Err(invalid!("r = {} does not divide n0 = {}", c.r, n0));
    }
    Ok(c.eval_g_only(a0, n0))
}

pub fn congruence_q_div_n(a0: u64, n0: u64, c: &ArrowConstraint) -> Result<bool> {
    if n0 % c.q != 0 {
        return Err(invalid!("q = {} does not divide n0 = {}", c.q, n0));
    }
    Ok(c.eval_n_only(a0, n0))
}

/// Recomputes the precomputed residues of a constraint from the exact values.
pub fn constraint_matches_exact(c: &ArrowConstraint) -> Result<bool> {
    let parts = beta_parts(&c.chi)?;
    let t = &c.target;
    let order = c.chi.order();
    let mut p_exact = CycElement::one(order);
    let mut p2_exact = CycElement::one(order);
    for (_, p2_term, p_term) in &parts.factors {
        p_exact = p_exact.mul(p_term)?;
        p2_exact = p2_exact.mul(p2_term)?;
    }
    let k_exact = parts
        .gamma_scaled
        .mul(&parts.jacobi_plus)?
        .mul(&p2_exact)?
        .scale(&BigRational::from_integer(((parts.mu * parts.sign) as i64).into()));
    Ok(t.reduce(&parts.gamma_scaled)? == c.gamma_scaled
        && t.reduce(&parts.jacobi_plus)? == c.jacobi_plus
        && parts.mu == c.mu
        && parts.sign == c.sign_plus
        && t.reduce(&p_exact)? == c.prod_p
        && t.reduce(&p2_exact)? == c.prod_p2
        && t.reduce(&k_exact)? == c.k_powers[0])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanArrow {
    /// Certificate file name, resolved against the certificate directory.
    pub certificate: String,
    pub mode: CongruenceMode,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanPhase {
    /// Factor by which this phase's modulus exceeds the previous one.
    #[serde(with = "dec")]
    pub extension: u64,
    pub arrows: Vec<PlanArrow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    /// Every survivor has `value | n₀`.
    NDivisibleBy {
        #[serde(with = "dec")]
        value: u64,
    },
    NoSurvivors,
}

impl Expectation {
    fn violated_by(&self, _a: u64, n: u64) -> bool {
        match self {
            Expectation::NDivisibleBy { value } => n % value != 0,
            Expectation::NoSurvivors => true,
        }
    }
}

/// Declarative description of one sieve run.
///
/// Phase 1 runs over all pairs modulo `modulus`. Each later phase multiplies
/// the modulus by its `extension` and only visits lifts of pairs that
/// survived the previous phase while violating the expectation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SievePlan {
    pub schema_version: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(with = "dec")]
    pub modulus: u64,
    /// Restricts `a₀` to a single residue (endgame sieves with `a` known).
    #[serde(default, with = "dec_opt", skip_serializing_if = "Option::is_none")]
    pub fixed_a: Option<u64>,
    /// Only `n₀ ≡ 0 (mod n_restriction)` is enumerated.
    #[serde(with = "dec")]
    pub n_restriction: u64,
    #[serde(default, with = "dec_vec")]
    pub a_exclusions: Vec<u64>,
    pub phases: Vec<PlanPhase>,
    #[serde(default)]
    pub expectation: Option<Expectation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SievePlan {
    pub fn from_json(text: &str) -> Result<Self> {
        let plan: SievePlan = serde_json::from_str(text)?;
        if plan.schema_version != PLAN_SCHEMA_VERSION {
            return Err(Error::Parse(format!("unknown plan schema version {}", plan.schema_version)));
        }
        Ok(plan)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    /// SHA-256 of the canonical compact JSON encoding.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("plan serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Modulus of each phase.
    pub fn phase_moduli(&self) -> Result<Vec<u64>> {
        let mut m = self.modulus;
        let mut out = Vec::with_capacity(self.phases.len());
        for (i, ph) in self.phases.iter().enumerate() {
            if i > 0 {
                m = m
                    .checked_mul(ph.extension)
                    .ok_or_else(|| invalid!("phase {} modulus overflows", i + 1))?;
            } else if ph.extension != 1 {
                return Err(invalid!("phase 1 must have extension 1"));
            }
            out.push(m);
        }
        Ok(out)
    }

    /// Same plan with the phase order reversed; only for plans whose phases
    /// all share one modulus.
    pub fn reversed_phases(&self) -> Result<SievePlan> {
        self.require_single_modulus()?;
        let mut p = self.clone();
        p.phases.reverse();
        p.name = format!("{}-reversed", self.name);
        Ok(p)
    }

    /// Same plan with every arrow in a single phase.
    pub fn merged_phases(&self) -> Result<SievePlan> {
        self.require_single_modulus()?;
        let mut p = self.clone();
        let arrows = self.phases.iter().flat_map(|ph| ph.arrows.iter().cloned()).collect();
        p.phases = vec![PlanPhase { extension: 1, arrows }];
        p.name = format!("{}-merged", self.name);
        Ok(p)
    }

    fn require_single_modulus(&self) -> Result<()> {
        if self.phases.iter().any(|ph| ph.extension != 1) {
            return Err(invalid!("plan {} changes modulus between phases", self.name));
        }
        Ok(())
    }

    /// Loads every referenced certificate from `cert_dir` and precomputes it.
    pub fn resolve(&self, cert_dir: &Path) -> Result<ResolvedPlan> {
        let mut cache: HashMap<(String, CongruenceMode), Arc<ArrowConstraint>> = HashMap::new();
        let mut phases = Vec::new();
        for ph in &self.phases {
            let mut list = Vec::new();
            for pa in &ph.arrows {
                let key = (pa.certificate.clone(), pa.mode);
                if let Some(c) = cache.get(&key) {
                    list.push(c.clone());
                    continue;
                }
                let path = cert_dir.join(&pa.certificate);
                let cert = ArrowCertificate::load(&path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                let c = Arc::new(precompute_constraint(cert, pa.mode)?);
                cache.insert(key, c.clone());
                list.push(c);
            }
            phases.push(list);
        }
        ResolvedPlan::new(self.clone(), phases)
    }
}

/// A plan together with its precomputed constraints.
pub struct ResolvedPlan {
    pub plan: SievePlan,
    pub phases: Vec<Vec<Arc<ArrowConstraint>>>,
    moduli: Vec<u64>,
}

impl ResolvedPlan {
    pub fn new(plan: SievePlan, phases: Vec<Vec<Arc<ArrowConstraint>>>) -> Result<Self> {
        if phases.len() != plan.phases.len() {
            return Err(invalid!("plan has {} phases but {} were resolved", plan.phases.len(), phases.len()));
        }
        if plan.phases.is_empty() {
            return Err(invalid!("plan has no phases"));
        }
        if plan.modulus == 0 || plan.n_restriction == 0 {
            return Err(invalid!("modulus and n_restriction must be positive"));
        }
        if plan.modulus % 2 == 0 {
            return Err(invalid!("modulus {} must be odd", plan.modulus));
        }
        if plan.modulus % plan.n_restriction != 0 {
            return Err(invalid!("n_restriction {} does not divide {}", plan.n_restriction, plan.modulus));
        }
        let moduli = plan.phase_moduli()?;
        if let Some(Expectation::NDivisibleBy { value }) = &plan.expectation {
            if *value == 0 || plan.modulus % value != 0 {
                return Err(invalid!("expected divisor {value} does not divide {}", plan.modulus));
            }
        }
        for (i, (list, &m)) in phases.iter().zip(&moduli).enumerate() {
            for c in list {
                if m % c.qr() != 0 {
                    return Err(invalid!("phase {}: qr = {} does not divide {m}", i + 1, c.qr()));
                }
                let needed = match c.mode {
                    CongruenceMode::General => 1,
                    CongruenceMode::RDividesN => c.r,
                    CongruenceMode::QDividesN => c.q,
                };
                if plan.n_restriction % needed != 0 {
                    return Err(invalid!(
                        "phase {}: {:?} mode for {}→{} needs {needed} | n_restriction",
                        i + 1,
                        c.mode,
                        c.q,
                        c.r
                    ));
                }
            }
        }
        Ok(ResolvedPlan { plan, phases, moduli })
    }

    pub fn phase_moduli(&self) -> &[u64] {
        &self.moduli
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Visits every pair of the domain.
    Direct,
    /// Assigns CRT coordinates prime power by prime power.
    #[default]
    Join,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub engine: Engine,
    /// Cap on the number of non-exceptional survivors listed per phase.
    pub survivor_list_limit: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { engine: Engine::Join, survivor_list_limit: 1 << 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub index: usize,
    #[serde(with = "dec")]
    pub modulus: u64,
    /// Pairs from the previous phase whose lifts were enumerated.
    #[serde(with = "dec")]
    pub parents: u64,
    #[serde(with = "dec128")]
    pub tested: u128,
    #[serde(with = "dec128")]
    pub killed_legendre: u128,
    #[serde(with = "dec128")]
    pub killed_congruence: u128,
    #[serde(with = "dec128")]
    pub survivors: u128,
    /// Survivors that satisfy the expectation, up to the listing limit.
    #[serde(with = "dec_pairs")]
    pub survivor_list: Vec<(u64, u64)>,
    pub survivor_list_truncated: bool,
    /// Survivors violating the expectation; these are lifted into the next phase.
    #[serde(with = "dec_pairs")]
    pub exceptional: Vec<(u64, u64)>,
}

impl PhaseReport {
    pub fn consistent(&self) -> bool {
        self.tested == self.killed_legendre + self.killed_congruence + self.survivors
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SieveReport {
    pub schema_version: String,
    pub plan_name: String,
    pub plan_digest: String,
    pub toolkit_version: String,
    pub engine: Engine,
    pub phases: Vec<PhaseReport>,
    pub expectation: Option<Expectation>,
    /// Exceptional survivors of the last phase, modulo its modulus.
    #[serde(with = "dec_pairs")]
    pub violations: Vec<(u64, u64)>,
    pub expectation_met: bool,
    #[serde(with = "dec_vec")]
    pub a_exclusions: Vec<u64>,
    /// Violations whose `a₀` is congruent to an excluded value.
    #[serde(with = "dec_pairs")]
    pub violations_at_excluded_a: Vec<(u64, u64)>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SieveReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn consistent(&self) -> bool {
        self.phases.iter().all(PhaseReport::consistent)
    }
}

/// Runs every phase of the plan in order.
pub fn run_sieve(plan: &ResolvedPlan, opts: &RunOptions) -> Result<SieveReport> {
    let start = Instant::now();
    let p = &plan.plan;
    let mut phases = Vec::new();
    let mut parents: Option<Vec<(u64, u64)>> = None;
    let mut prev_mod = 1;
    for (i, (arrows, &m)) in plan.phases.iter().zip(&plan.moduli).enumerate() {
        let ctx = PhaseCtx::new(p, arrows, m, if i == 0 { 1 } else { prev_mod })?;
        let parent_list = parents.take().unwrap_or_else(|| vec![(0, 0)]);
        let mut rep = match opts.engine {
            Engine::Direct => ctx.run_direct(&parent_list, opts),
            Engine::Join => ctx.run_join(&parent_list, opts),
        };
        rep.index = i + 1;
        rep.parents = if i == 0 { 0 } else { parent_list.len() as u64 };
        parents = Some(rep.exceptional.clone());
        prev_mod = m;
        phases.push(rep);
    }
    let violations = phases.last().map(|r| r.exceptional.clone()).unwrap_or_default();
    let last_mod = *plan.moduli.last().unwrap();
    let violations_at_excluded_a = violations
        .iter()
        .copied()
        .filter(|&(a, _)| p.a_exclusions.iter().any(|&x| x % last_mod == a))
        .collect();
    Ok(SieveReport {
        schema_version: REPORT_SCHEMA_VERSION.into(),
        plan_name: p.name.clone(),
        plan_digest: p.digest(),
        toolkit_version: crate::TOOLKIT_VERSION.into(),
        engine: opts.engine,
        phases,
        expectation: p.expectation.clone(),
        expectation_met: violations.is_empty(),
        violations,
        a_exclusions: p.a_exclusions.clone(),
        violations_at_excluded_a,
        wall_time: start.elapsed(),
    })
}

/// One prime-power CRT coordinate of a phase modulus.
#[derive(Clone, Copy, Debug)]
struct Comp {
    p: u64,
    m: u64,
}

struct PhaseCtx<'a> {
    plan: &'a SievePlan,
    arrows: &'a [Arc<ArrowConstraint>],
    modulus: u64,
    prev: u64,
    tables: Vec<LegendreTable>,
    /// Components in search order.
    comps: Vec<Comp>,
    /// Modulus of the first `i` components.
    prefix: Vec<u64>,
    /// `prefix[i]^{-1} mod comps[i].m`.
    inv: Vec<u64>,
    /// Arrows whose last component is `comps[i]`.
    checks: Vec<Vec<usize>>,
    /// Parent-independent candidate lists for components coprime to `prev`.
    base: Vec<Option<(u128, Vec<(u64, u64)>)>>,
}

/// Collected output of one block of the search.
#[derive(Default)]
struct Sink {
    survivors: u128,
    listed: Vec<(u64, u64)>,
    exceptional: Vec<(u64, u64)>,
    tested: u128,
    legendre_pass: u128,
}

impl Sink {
    fn merge(mut self, o: Sink) -> Sink {
        self.survivors += o.survivors;
        self.listed.extend(o.listed);
        self.exceptional.extend(o.exceptional);
        self.tested += o.tested;
        self.legendre_pass += o.legendre_pass;
        self
    }
}

impl<'a> PhaseCtx<'a> {
    fn new(plan: &'a SievePlan, arrows: &'a [Arc<ArrowConstraint>], modulus: u64, prev: u64) -> Result<Self> {
        let primes: BTreeSet<u64> = arrows.iter().flat_map(|c| c.primes().iter().copied()).collect();
        let tables = primes.iter().map(|&p| LegendreTable::new(p)).collect();
        let all: Vec<Comp> = factorize(modulus)?.factors.iter().map(|&(p, e)| Comp { p, m: p.pow(e) }).collect();

        let mut ctx = PhaseCtx {
            plan,
            arrows,
            modulus,
            prev,
            tables,
            comps: Vec::new(),
            prefix: Vec::new(),
            inv: Vec::new(),
            checks: Vec::new(),
            base: Vec::new(),
        };
        let base_all: Vec<Option<(u128, Vec<(u64, u64)>)>> = all
            .iter()
            .map(|c| (gcd(c.m, prev) == 1).then(|| ctx.candidates(*c, None)))
            .collect();

        // Greedy order: complete as many arrows as possible early, small lists first.
        let est: Vec<usize> = base_all.iter().map(|b| b.as_ref().map_or(1, |(_, v)| v.len())).collect();
        let arrow_comps: Vec<Vec<usize>> = arrows
            .iter()
            .map(|c| (0..all.len()).filter(|&i| c.qr() % all[i].p == 0).collect())
            .collect();
        let mut placed = vec![false; all.len()];
        let mut order = Vec::new();
        while order.len() < all.len() {
            let best = (0..all.len())
                .filter(|&i| !placed[i])
                .max_by_key(|&i| {
                    let completes = arrow_comps
                        .iter()
                        .filter(|cs| cs.contains(&i) && cs.iter().all(|&j| j == i || placed[j]))
                        .count();
                    let touches = arrow_comps.iter().filter(|cs| cs.contains(&i)).count();
                    (completes, std::cmp::Reverse(est[i]), touches, std::cmp::Reverse(i))
                })
                .unwrap();
            placed[best] = true;
            order.push(best);
        }
        let pos: Vec<usize> = {
            let mut pos = vec![0; all.len()];
            for (k, &i) in order.iter().enumerate() {
                pos[i] = k;
            }
            pos
        };
        ctx.checks = vec![Vec::new(); all.len().max(1)];
        for (j, cs) in arrow_comps.iter().enumerate() {
            let last = cs.iter().map(|&i| pos[i]).max().unwrap_or(0);
            ctx.checks[last].push(j);
        }
        let mut pm = 1u64;
        for &i in &order {
            let c = all[i];
            ctx.prefix.push(pm);
            ctx.inv.push(inv_mod(pm % c.m, c.m).expect("coprime components"));
            pm *= c.m;
        }
        ctx.comps = order.iter().map(|&i| all[i]).collect();
        ctx.base = order.iter().map(|&i| base_all[i].clone()).collect();
        Ok(ctx)
    }

    fn table(&self, p: u64) -> Option<&LegendreTable> {
        self.tables.iter().find(|t| t.p == p)
    }

    /// Allowed `(a mod m, n mod m)` before and after the Legendre filter.
    fn candidates(&self, c: Comp, parent: Option<(u64, u64)>) -> (u128, Vec<(u64, u64)>) {
        let g = gcd(c.m, self.prev);
        let restrict = gcd(self.plan.n_restriction, c.m);
        let a_list: Vec<u64> = match self.plan.fixed_a {
            Some(a) => vec![a % c.m],
            None => (0..c.m).filter(|&x| parent.map_or(true, |(a0, _)| x % g == a0 % g)).collect(),
        };
        let n_list: Vec<u64> = (0..c.m)
            .filter(|&y| y % restrict == 0 && parent.map_or(true, |(_, n0)| y % g == n0 % g))
            .collect();
        let pre = a_list.len() as u128 * n_list.len() as u128;
        let table = self.table(c.p);
        let mut out = Vec::new();
        for &x in &a_list {
            for &y in &n_list {
                if table.map_or(true, |t| t.test(x, y)) {
                    out.push((x, y));
                }
            }
        }
        (pre, out)
    }

    fn record(&self, sink: &mut Sink, a: u64, n: u64, limit: usize) {
        sink.survivors += 1;
        match &self.plan.expectation {
            Some(e) if e.violated_by(a, n) => sink.exceptional.push((a, n)),
            _ => {
                if sink.listed.len() <= limit {
                    sink.listed.push((a, n));
                }
            }
        }
    }

    fn finish(&self, sink: Sink, limit: usize) -> PhaseReport {
        let mut listed = sink.listed;
        listed.sort_unstable();
        listed.truncate(limit);
        let mut exceptional = sink.exceptional;
        exceptional.sort_unstable();
        let truncated = sink.survivors - exceptional.len() as u128 > limit as u128;
        PhaseReport {
            index: 0,
            modulus: self.modulus,
            parents: 0,
            tested: sink.tested,
            killed_legendre: sink.tested - sink.legendre_pass,
            killed_congruence: sink.legendre_pass - sink.survivors,
            survivors: sink.survivors,
            survivor_list: listed,
            survivor_list_truncated: truncated,
            exceptional,
        }
    }

    fn run_join(&self, parents: &[(u64, u64)], opts: &RunOptions) -> PhaseReport {
        let limit = opts.survivor_list_limit;
        let sink = parents
            .par_iter()
            .map(|&par| {
                let parent = (self.prev > 1).then_some(par);
                let mut tested = 1u128;
                let mut legendre_pass = 1u128;
                let lists: Vec<Vec<(u64, u64)>> = self
                    .comps
                    .iter()
                    .zip(&self.base)
                    .map(|(&c, b)| {
                        let (pre, v) = match b {
                            Some(b) => b.clone(),
                            None => self.candidates(c, parent),
                        };
                        tested *= pre;
                        legendre_pass *= v.len() as u128;
                        v
                    })
                    .collect();
                let mut sink = Sink { tested, legendre_pass, ..Sink::default() };
                if legendre_pass == 0 {
                    return sink;
                }
                // Expand the first levels sequentially, then search blocks in parallel.
                let mut frontier = vec![(0u64, 0u64)];
                let mut depth = 0;
                while depth < self.comps.len() && frontier.len() < 256 {
                    frontier = frontier
                        .iter()
                        .flat_map(|&(a, n)| self.extend(depth, a, n, &lists[depth]))
                        .collect();
                    depth += 1;
                }
                let found = frontier
                    .par_iter()
                    .fold(Sink::default, |mut s, &(a, n)| {
                        self.dfs(depth, a, n, &lists, &mut s, limit);
                        s
                    })
                    .reduce(Sink::default, Sink::merge);
                sink = sink.merge(Sink { tested: 0, legendre_pass: 0, ..found });
                sink
            })
            .reduce(Sink::default, Sink::merge);
        self.finish(sink, limit)
    }

    #[inline]
    fn lift(&self, depth: usize, a: u64, x: u64) -> u64 {
        let m = self.comps[depth].m;
        let t = ((x + m - a % m) % m) as u128 * self.inv[depth] as u128 % m as u128;
        a + self.prefix[depth] * t as u64
    }

    fn extend(&self, depth: usize, a: u64, n: u64, list: &[(u64, u64)]) -> Vec<(u64, u64)> {
        list.iter()
            .filter_map(|&(x, y)| {
                let (a2, n2) = (self.lift(depth, a, x), self.lift(depth, n, y));
                self.checks[depth].iter().all(|&j| self.arrows[j].congruence(a2, n2)).then_some((a2, n2))
            })
            .collect()
    }

    fn dfs(&self, depth: usize, a: u64, n: u64, lists: &[Vec<(u64, u64)>], sink: &mut Sink, limit: usize) {
        if depth == self.comps.len() {
            self.record(sink, a, n, limit);
            return;
        }
        for &(x, y) in &lists[depth] {
            let (a2, n2) = (self.lift(depth, a, x), self.lift(depth, n, y));
            if self.checks[depth].iter().all(|&j| self.arrows[j].congruence(a2, n2)) {
                self.dfs(depth + 1, a2, n2, lists, sink, limit);
            }
        }
    }

    fn run_direct(&self, parents: &[(u64, u64)], opts: &RunOptions) -> PhaseReport {
        let limit = opts.survivor_list_limit;
        let m = self.modulus;
        let sink = parents
            .par_iter()
            .map(|&(a0, n0)| {
                let step = if self.prev > 1 { self.prev } else { 1 };
                let (a0, n0) = if self.prev > 1 { (a0, n0) } else { (0, 0) };
                let a_vals: Vec<u64> = match self.plan.fixed_a {
                    Some(a) => vec![a % m],
                    None => (0..m / step).map(|t| a0 + t * step).collect(),
                };
                let n_vals: Vec<u64> = (0..m / step)
                    .map(|t| n0 + t * step)
                    .filter(|y| y % self.plan.n_restriction == 0)
                    .collect();
                a_vals
                    .par_iter()
                    .fold(Sink::default, |mut s, &a| {
                        for &n in &n_vals {
                            s.tested += 1;
                            if !self.tables.iter().all(|t| t.test(a, n)) {
                                continue;
                            }
                            s.legendre_pass += 1;
                            if self.arrows.iter().all(|c| c.congruence(a, n)) {
                                self.record(&mut s, a, n, limit);
                            }
                        }
                        s
                    })
                    .reduce(Sink::default, Sink::merge)
            })
            .reduce(Sink::default, Sink::merge);
        self.finish(sink, limit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrows::{find_arrows, SearchMode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constraint(q: u64, r: u64, mode: CongruenceMode) -> Arc<ArrowConstraint> {
        let cert = find_arrows(q, r, SearchMode::First).unwrap().remove(0);
        Arc::new(precompute_constraint(cert, mode).unwrap())
    }

    fn plan(modulus: u64, n_restriction: u64, expectation: Option<Expectation>, phases: usize) -> SievePlan {
        SievePlan {
            schema_version: PLAN_SCHEMA_VERSION.into(),
            name: "test".into(),
            description: String::new(),
            modulus,
            fixed_a: None,
            n_restriction,
            a_exclusions: vec![],
            phases: (0..phases).map(|_| PlanPhase { extension: 1, arrows: vec![] }).collect(),
            expectation,
            notes: vec![],
        }
    }

    #[test]
    fn legendre_examples() {
        assert!(legendre_test(7, 5, 13));
        assert!(!legendre_test(13, 4, 13));
        assert!(!legendre_test(1, 1, 5));
    }

    #[test]
    fn legendre_controls_for_class_number_one_pairs() {
        for (a, n) in [(7u64, 5u64), (3, 3), (7, 1)] {
            let bound = a * n / 2;
            for p in crate::arith::odd_primes_below(bound + 1) {
                if p != a && 2 * p < a * n {
                    assert!(legendre_test(a, n, p), "({a},{n}) p={p}");
                }
            }
        }
    }

    #[test]
    fn precomputed_residues_match_exact() {
        for (q, r) in [(95, 13), (119, 5), (41, 11), (215, 7)] {
            let c = constraint(q, r, CongruenceMode::General);
            assert!(constraint_matches_exact(&c).unwrap(), "{q}->{r}");
        }
    }

    #[test]
    fn memo_entry_matches_direct_reduction() {
        let c = constraint(95, 13, CongruenceMode::General);
        let f1 = QuadForm::new(7, 35, -1);
        let g = crate::zetaforms::g_sum(&f1, c.character()).unwrap();
        let direct = c.target().mul(&c.g_factor, &c.target().reduce(&g.scaled).unwrap());
        assert_eq!(c.g_term(7, 5), direct);
        assert_eq!(c.g_term(7 + 95, 5 + 190), direct);
        assert_eq!(c.memo_len(), 1);
    }

    #[test]
    fn q_divides_n_mode_has_no_memo() {
        let c = constraint(255, 353, CongruenceMode::QDividesN);
        assert_eq!(c.memo_len(), 0);
        assert!(c.g_memo.is_empty());
        assert!(congruence_q_div_n(1, 255 * 353, &c).unwrap());
        assert!(congruence_q_div_n(1, 7, &c).is_err());
    }

    #[test]
    fn positive_controls() {
        for (q, r) in [(95, 13), (119, 5), (41, 11), (215, 7), (61, 41)] {
            let c = constraint(q, r, CongruenceMode::General);
            for (a, n) in [(7u64, 5u64), (3, 3), (7, 1)] {
                let d = a * a * n * n + 4 * a;
                if gcd(q, 2 * d) == 1 {
                    assert!(congruence_general(a, n, &c), "{q}->{r} at ({a},{n})");
                }
            }
        }
    }

    #[test]
    fn shift_invariance() {
        let c = constraint(95, 13, CongruenceMode::General);
        let qr = c.qr();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let (a, n) = (rng.gen_range(0..qr), rng.gen_range(0..qr));
            let base = congruence_general(a, n, &c);
            assert_eq!(congruence_general(a + qr, n, &c), base);
            assert_eq!(congruence_general(a, n + qr, &c), base);
        }
    }

    #[test]
    fn r_div_n_agrees_with_general() {
        let c = constraint(215, 7, CongruenceMode::RDividesN);
        let g = constraint(215, 7, CongruenceMode::General);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let a = rng.gen_range(0..c.qr());
            let n = 7 * rng.gen_range(0..215);
            if gcd(a * a * n * n + 4 * a, 215) != 1 {
                continue;
            }
            assert_eq!(congruence_r_div_n(a, n, &c).unwrap(), congruence_general(a, n, &g));
        }
        assert!(congruence_r_div_n(1, 3, &c).is_err());
    }

    #[test]
    fn kill_rate_over_units() {
        let c = constraint(95, 13, CongruenceMode::General);
        let primes = c.primes().to_vec();
        let qr = c.qr();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples = 100_000;
        let mut pass = 0;
        for _ in 0..samples {
            let a = loop {
                let a = rng.gen_range(1..qr);
                if gcd(a, qr) == 1 {
                    break a;
                }
            };
            let n = rng.gen_range(0..qr);
            if primes.iter().all(|&p| legendre_test(a, n, p)) {
                pass += 1;
            }
        }
        let expected = 0.5f64.powi(primes.len() as i32);
        let sigma = (expected * (1.0 - expected) / samples as f64).sqrt();
        let rate = pass as f64 / samples as f64;
        assert!((rate - expected).abs() < 3.0 * sigma, "rate {rate} vs {expected}");
    }

    #[test]
    fn empty_plan_keeps_everything() {
        let rp = ResolvedPlan::new(plan(15, 1, None, 1), vec![vec![]]).unwrap();
        for engine in [Engine::Direct, Engine::Join] {
            let rep = run_sieve(&rp, &RunOptions { engine, ..RunOptions::default() }).unwrap();
            assert_eq!(rep.phases[0].survivors, 225);
            assert_eq!(rep.phases[0].survivor_list.len(), 225);
            assert!(rep.expectation_met && rep.consistent());
        }
    }

    #[test]
    fn single_pair_positive_control() {
        let c = constraint(95, 13, CongruenceMode::General);
        let mut p = plan(95 * 13, 1, None, 1);
        p.fixed_a = Some(7);
        let rp = ResolvedPlan::new(p, vec![vec![c]]).unwrap();
        let rep = run_sieve(&rp, &RunOptions::default()).unwrap();
        assert!(rep.phases[0].survivor_list.contains(&(7, 5)));
    }

    #[test]
    fn engines_agree_and_phases_lift() {
        let c1 = constraint(95, 13, CongruenceMode::General);
        let c2 = constraint(247, 3, CongruenceMode::General);
        let mut p = plan(95 * 13, 1, Some(Expectation::NDivisibleBy { value: 5 }), 2);
        p.phases[1].extension = 3;
        let rp = ResolvedPlan::new(p, vec![vec![c1.clone()], vec![c1, c2]]).unwrap();
        let direct = run_sieve(&rp, &RunOptions { engine: Engine::Direct, ..RunOptions::default() }).unwrap();
        let join = run_sieve(&rp, &RunOptions { engine: Engine::Join, ..RunOptions::default() }).unwrap();
        assert!(direct.consistent() && join.consistent());
        assert_eq!(direct.phases, join.phases);
        assert!(direct.phases[1].parents > 0);
    }

    #[test]
    fn plan_validation() {
        let c = constraint(95, 13, CongruenceMode::RDividesN);
        assert!(ResolvedPlan::new(plan(95, 1, None, 1), vec![vec![c.clone()]]).is_err());
        assert!(ResolvedPlan::new(plan(95 * 13, 1, None, 1), vec![vec![c.clone()]]).is_err());
        assert!(ResolvedPlan::new(plan(95 * 13, 13, None, 1), vec![vec![c]]).is_ok());
    }

    #[test]
    fn plan_json_round_trip() {
        let mut p = plan(1058015, 24605, Some(Expectation::NDivisibleBy { value: 43 }), 1);
        p.phases[0].arrows.push(PlanArrow { certificate: "arrow_215_7.json".into(), mode: CongruenceMode::RDividesN });
        let text = p.to_json();
        assert!(text.contains("\"1058015\"") && text.contains("r-divides-n"));
        let back = SievePlan::from_json(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.digest(), p.digest());
    }
}
