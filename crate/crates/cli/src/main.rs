//! `rdq`: command-line driver for arrows, sieves, identities and class numbers.

mod manifest;
mod reproduce;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use rdq_core::arrows::{check_certificate_json, find_arrows, SearchMode};
use rdq_core::characters::{enumerate_characters, CharFilter};
use rdq_core::classnum::{class_number, direct_check, enumerate_family, FamilyRow};
use rdq_core::sieve::{run_sieve, Engine, RunOptions, SievePlan, SieveReport};
use rdq_core::zetaforms::{beta_finite, beta_numeric, identity_check, RDParams};

use manifest::Run;

/// Exit code for a failed expectation.
pub const EXIT_FAILED: i32 = 1;
/// Exit code for usage and precondition errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(name = "rdq", version, about = "Class number one verification toolkit for d = (an)^2 + 4a")]
struct Cli {
    /// Directory for reports, certificates and run manifests.
    #[arg(long, global = true, env = "CLASSONE_OUT", default_value = "rdq-out")]
    out_dir: PathBuf,
    /// Worker threads for the sieve (default: all cores); other commands use one.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for an arrow q -> r and write its certificate.
    VerifyArrow {
        q: u64,
        r: u64,
        /// Write every certificate instead of the first one.
        #[arg(long)]
        all: bool,
        /// Certificate directory (default: the output directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check certificate files from scratch.
    CheckCertificate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run a sieve plan.
    Sieve {
        #[arg(long)]
        plan: PathBuf,
        /// Certificate directory (default: `certs` next to the plan directory).
        #[arg(long)]
        certs: Option<PathBuf>,
        /// Report path (default: `<out-dir>/report_<plan name>.json`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "join", value_parser = ["join", "direct"])]
        engine: String,
        /// Maximum number of non-exceptional survivors listed per phase.
        #[arg(long, default_value_t = 1 << 16)]
        survivor_limit: usize,
    },
    /// Evaluate both sides of the L(0) identity exactly for every odd primitive complex χ mod q.
    IdentityCheck { a: u64, n: u64, q: u64 },
    /// Compare the finite evaluation of β_χ with a truncated L-series.
    BetaCheck {
        #[arg(long, default_value_t = 40)]
        qmax: u64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value_t = 1_000_000)]
        terms: u64,
    },
    /// Class number of Q(√d).
    ClassNumber { d: u64 },
    /// CSV of all family members with d ≤ max-d.
    EnumerateFamily {
        #[arg(long)]
        max_d: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of class numbers for fixed a and odd n ≤ n_max.
    DirectCheck {
        a: u64,
        n_max: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run one proof step: lemma-6.1 .. lemma-6.4, final-17, endgame-a<k>, arrows, base-cases, theorem.
    Reproduce {
        id: String,
        #[arg(long, default_value = "plans")]
        plans: PathBuf,
        #[arg(long, default_value = "certs")]
        certs: PathBuf,
        /// Mark the long sieves as skipped instead of running them (theorem only).
        #[arg(long)]
        skip_extended: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let sieve_like = matches!(cli.command, Command::Sieve { .. } | Command::Reproduce { .. });
    let threads = cli.threads.or(if sieve_like { None } else { Some(1) });
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring threads")?;
    }
    let out_dir = cli.out_dir;
    match cli.command {
        Command::VerifyArrow { q, r, all, out } => cmd_verify_arrow(out_dir, q, r, all, out),
        Command::CheckCertificate { files } => cmd_check_certificate(out_dir, &files),
        Command::Sieve { plan, certs, out, engine, survivor_limit } => {
            let mut run = Run::new("sieve", out_dir);
            let engine = if engine == "direct" { Engine::Direct } else { Engine::Join };
            let opts = RunOptions { engine, survivor_list_limit: survivor_limit };
            let certs = certs.unwrap_or_else(|| default_cert_dir(&plan));
            let (report, _) = sieve_plan_file(&mut run, &plan, &certs, &opts, out.as_deref())?;
            let code = if report.expectation_met { 0 } else { EXIT_FAILED };
            run.finish(code)
        }
        Command::IdentityCheck { a, n, q } => cmd_identity_check(out_dir, a, n, q),
        Command::BetaCheck { qmax, tol, terms } => cmd_beta_check(out_dir, qmax, tol, terms),
        Command::ClassNumber { d } => {
            let mut run = Run::new("class-number", out_dir);
            let h = class_number(d)?;
            run.say(h.to_string());
            run.finish(0)
        }
        Command::EnumerateFamily { max_d, out } => {
            let mut run = Run::new("enumerate-family", out_dir);
            let rows = enumerate_family(max_d)?;
            emit_csv(&mut run, &rows, out.as_deref())?;
            run.finish(0)
        }
        Command::DirectCheck { a, n_max, out } => {
            let mut run = Run::new("direct-check", out_dir);
            let rep = direct_check(a, n_max)?;
            emit_csv(&mut run, &rep.rows, out.as_deref())?;
            let hits: Vec<String> = rep.hits.iter().map(|r| r.d.to_string()).collect();
            eprintln!("a = {a}, n ≤ {n_max}: h = 1 at d ∈ {{{}}}", hits.join(", "));
            run.finish(0)
        }
        Command::Reproduce { id, plans, certs, skip_extended } => {
            reproduce::run(out_dir, &id, &plans, &certs, skip_extended)
        }
    }
}

fn default_cert_dir(plan: &Path) -> PathBuf {
    let dir = plan.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    dir.join("..").join("certs")
}

fn cmd_verify_arrow(out_dir: PathBuf, q: u64, r: u64, all: bool, out: Option<PathBuf>) -> Result<i32> {
    let mut run = Run::new("verify-arrow", out_dir);
    let mode = if all { SearchMode::All } else { SearchMode::First };
    let certs = find_arrows(q, r, mode)?;
    if certs.is_empty() {
        run.say(format!("{q} -> {r}: no certificate found"));
        return run.finish(EXIT_FAILED);
    }
    let dir = out.unwrap_or_else(|| run.out_dir.clone());
    for (i, cert) in certs.iter().enumerate() {
        let name = if i == 0 { cert.file_name() } else { format!("arrow_{q}_{r}-{i}.json") };
        let path = dir.join(name);
        run.write_output(&path, &cert.to_json())?;
        run.say(format!(
            "{q} -> {r}: character of order {} with target degree {} written to {}",
            cert.target.n,
            cert.target.poly.len() - 1,
            path.display()
        ));
    }
    run.finish(0)
}

fn cmd_check_certificate(out_dir: PathBuf, files: &[PathBuf]) -> Result<i32> {
    let mut run = Run::new("check-certificate", out_dir);
    let mut code = 0;
    for f in files {
        let text = run.read_input(f)?;
        let check = check_certificate_json(&text)?;
        if check.ok() {
            run.say(format!("{}: ok", f.display()));
        } else {
            code = EXIT_FAILED;
            run.say(format!("{}: FAILED: {}", f.display(), check.failures.join("; ")));
        }
    }
    run.finish(code)
}

/// Loads, runs and reports one plan file. The report is written to `out`
/// or to the output directory.
pub fn sieve_plan_file(
    run: &mut Run,
    plan_path: &Path,
    certs: &Path,
    opts: &RunOptions,
    out: Option<&Path>,
) -> Result<(SieveReport, PathBuf)> {
    let text = run.read_input(plan_path)?;
    let plan = SievePlan::from_json(&text).with_context(|| format!("parsing {}", plan_path.display()))?;
    for phase in &plan.phases {
        for arrow in &phase.arrows {
            let path = certs.join(&arrow.certificate);
            if !path.exists() {
                bail!("plan {} references missing certificate {}", plan.name, path.display());
            }
            run.note_input(&path)?;
        }
    }
    let resolved = plan.resolve(certs)?;
    let report = run_sieve(&resolved, opts)?;
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| run.out_dir.join(format!("report_{}.json", plan.name)));
    run.write_output(&path, &report.to_json())?;
    summarize_report(run, &report);
    Ok((report, path))
}

pub fn summarize_report(run: &mut Run, report: &SieveReport) {
    for ph in &report.phases {
        run.say(format!(
            "{} phase {}: modulus {}, tested {}, killed by Legendre {}, killed by congruence {}, survivors {}, exceptional {}",
            report.plan_name,
            ph.index,
            ph.modulus,
            ph.tested,
            ph.killed_legendre,
            ph.killed_congruence,
            ph.survivors,
            ph.exceptional.len()
        ));
    }
    let verdict = match (&report.expectation, report.expectation_met) {
        (None, _) => "no expectation declared".to_string(),
        (Some(_), true) => "expectation met".to_string(),
        (Some(_), false) => format!("expectation FAILED with {} violating pairs", report.violations.len()),
    };
    run.say(format!("{}: {verdict}", report.plan_name));
}

fn cmd_identity_check(out_dir: PathBuf, a: u64, n: u64, q: u64) -> Result<i32> {
    let mut run = Run::new("identity-check", out_dir);
    let params = RDParams::fundamental(a, n)?;
    let h = class_number(params.d)?;
    if h != 1 {
        bail!("h({}) = {h}; the identity is only asserted for class number one", params.d);
    }
    let chars = enumerate_characters(q, CharFilter::ODD_PRIMITIVE_COMPLEX)?;
    if chars.is_empty() {
        bail!("no odd primitive character of order > 2 modulo {q}");
    }
    let mut code = 0;
    for chi in &chars {
        let w = identity_check(&params, chi)?;
        run.say(format!("chi = {:?} (order {})", chi.exponents(), chi.order()));
        run.say(format!("  lhs = {}", w.lhs));
        run.say(format!("  rhs = {}", w.rhs));
        run.say(format!("  {}", if w.holds { "equal" } else { "DIFFERENT" }));
        if !w.holds {
            code = EXIT_FAILED;
        }
    }
    run.finish(code)
}

fn cmd_beta_check(out_dir: PathBuf, qmax: u64, tol: f64, terms: u64) -> Result<i32> {
    let mut run = Run::new("beta-check", out_dir);
    let (mut checked, mut failed, mut worst) = (0, 0, 0.0f64);
    for q in (3..=qmax).step_by(2) {
        for chi in enumerate_characters(q, CharFilter::ALL)? {
            if !chi.is_primitive() || chi.order() <= 2 {
                continue;
            }
            let exact = beta_finite(&chi)?.embed_complex(1)?;
            let diff = (exact - beta_numeric(&chi, terms)).norm();
            worst = worst.max(diff);
            checked += 1;
            if !(diff <= tol) {
                failed += 1;
                run.say(format!("q = {q}, chi = {:?}: difference {diff:.3e}", chi.exponents()));
            }
        }
    }
    run.say(format!("{checked} characters checked, {failed} above tolerance {tol:e}, largest difference {worst:.3e}"));
    run.finish(if failed == 0 { 0 } else { EXIT_FAILED })
}

pub fn csv_string(rows: &[FamilyRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn emit_csv(run: &mut Run, rows: &[FamilyRow], out: Option<&Path>) -> Result<()> {
    let text = csv_string(rows)?;
    match out {
        Some(p) => run.write_output(p, &text),
        None => {
            run.say(text.trim_end());
            Ok(())
        }
    }
}
