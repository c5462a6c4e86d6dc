//! Experiment orchestration and on-disk reports.
//!
//! Output files (written only when the config names an output directory):
//!
//! * `summary.json`: resolved config, certificates, finals, checks.
//! * `defects.csv`: header
//!   `n,markov_defect,qsp_defect,r_defect_max,kc_residual_max,trajectory_residual_max`,
//!   one row per `n = 1..=T`, empty fields for diagnostics not run.
//! * `trajectory.csv`: `simulate` only, `n,x_0,…,x_{N-1}`.
//! * `oscillation.csv`: `minorize` only, `l,n,max,min,gap,bound,slack`.
//!
//! Exit codes: 0 success, 1 asserted invariant failed, 2 config error.
//! Diagnostics run in a fixed order and all floats are formatted with `{:e}`,
//! so identical configs give byte-identical files (wall-clock timing is opt-in).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::config::{Diagnostic, ExperimentConfig};
use crate::ergodicity::{equivalence_report_with, markov_defect, pair_defect, qsp_defect, r_defect};
use crate::error::{QspError, Result};
use crate::generators::generate_one_step;
use crate::markov::{associated_markov, kc_residual_max_ending_at, MarkovFamily};
use crate::minorization::{
    defect_recursion_check_all, detect_minorization_markov, detect_minorization_qsp, markov_defect_envelope,
    oscillation_check, CorollaryConditions, LemmaConditions, LemmaRow, MinorizationCertificate, OscillationReport,
    Side,
};
use crate::qsp::{build_family_with, check_consistency, trajectory_residual, ProcessType, QspFamily};
use crate::rng::simplex_sample;
use crate::simplex::{basis_vector, validate_kernel, CubicKernel};

pub const DEFECT_CSV_HEADER: &str = "n,markov_defect,qsp_defect,r_defect_max,kc_residual_max,trajectory_residual_max";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Validate,
    Simulate,
    Diagnose,
    Minorize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    /// Asserted checks decide the exit code; the rest are recorded evidence.
    pub asserted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelSummary {
    pub steps: usize,
    pub all_ok: bool,
    pub max_negativity: f64,
    pub max_row_defect: f64,
    pub max_symmetry_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub side: Side,
    pub k0: usize,
    pub min_lambda: f64,
    pub raw_min: f64,
    pub clamped: usize,
    pub lemma: LemmaConditions,
    pub corollary: CorollaryConditions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer_margin: Option<f64>,
}

impl From<&MinorizationCertificate> for CertificateSummary {
    fn from(c: &MinorizationCertificate) -> Self {
        Self {
            side: c.side,
            k0: c.k0,
            min_lambda: c.min_lambda(),
            raw_min: c.raw_min,
            clamped: c.clamped,
            lemma: c.lemma.clone(),
            corollary: c.corollary.clone(),
            transfer_margin: c.transfer_margin,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Finals {
    pub m: usize,
    pub n: usize,
    pub markov: f64,
    pub qsp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencySummary {
    pub max_residual: f64,
    pub worst_triple: Option<(usize, usize, usize)>,
    pub triples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub command: Command,
    pub config: ExperimentConfig,
    pub kernels: KernelSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_state: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qsp_certificate: Option<CertificateSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub markov_certificate: Option<CertificateSummary>,
    /// Set when minorization was checked but no column qualified.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finals: Option<Finals>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub co_decay: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistency: Option<ConsistencySummary>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

/// One row of `defects.csv`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DefectRow {
    pub n: usize,
    pub markov_defect: Option<f64>,
    pub qsp_defect: Option<f64>,
    pub r_defect_max: Option<f64>,
    pub kc_residual_max: Option<f64>,
    pub trajectory_residual_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub summary: Summary,
    pub defects: Vec<DefectRow>,
    pub oscillation: Option<OscillationReport>,
    pub family: QspFamily,
}

impl Outcome {
    pub fn failures(&self) -> Vec<&Check> {
        self.summary.checks.iter().filter(|c| c.asserted && !c.passed).collect()
    }
}

fn check_le(checks: &mut Vec<Check>, name: impl Into<String>, value: f64, limit: f64, asserted: bool) {
    checks.push(Check { name: name.into(), value, limit, passed: value <= limit, asserted });
}

fn check_ge(checks: &mut Vec<Check>, name: impl Into<String>, value: f64, limit: f64, asserted: bool) {
    checks.push(Check { name: name.into(), value, limit, passed: value >= limit, asserted });
}

fn kernel_summary(kernels: &[CubicKernel], tol: f64) -> KernelSummary {
    let mut s = KernelSummary {
        steps: kernels.len(),
        all_ok: true,
        max_negativity: 0.0,
        max_row_defect: 0.0,
        max_symmetry_defect: 0.0,
    };
    for k in kernels {
        let r = validate_kernel(k, tol);
        s.all_ok &= r.ok;
        s.max_negativity = s.max_negativity.max(r.max_negativity);
        s.max_row_defect = s.max_row_defect.max(r.max_row_defect);
        s.max_symmetry_defect = s.max_symmetry_defect.max(r.max_symmetry_defect);
    }
    s
}

/// The `diagnose` command.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    run(cfg, Command::Diagnose)
}

/// Runs `command` and, if `cfg.output` is set, writes its files.
///
/// Config problems surface as `Err(QspError::Config)`; failed invariants are
/// reported through `Outcome::exit_code`.
pub fn run(cfg: &ExperimentConfig, command: Command) -> Result<Outcome> {
    cfg.validate()?;
    let started = Instant::now();
    let tol = cfg.tolerances;
    let seed = cfg.seed_or_zero();
    let one_step = generate_one_step(&cfg.generator, cfg.dim, seed, cfg.horizon, cfg.iid)?;
    let kernels = kernel_summary(&one_step, tol.sum);
    let mut checks = Vec::new();
    check_le(
        &mut checks,
        "one_step_kernels_valid",
        kernels.max_row_defect.max(kernels.max_symmetry_defect),
        tol.sum,
        true,
    );

    let x0 = cfg.x0.resolve(cfg.dim, &tol.simplex())?;
    let fam = build_family_with(x0, one_step, cfg.ptype, cfg.horizon, &cfg.build_options())?;
    let mut summary = Summary {
        command,
        config: cfg.clone(),
        kernels,
        final_state: None,
        qsp_certificate: None,
        markov_certificate: None,
        certificate_note: None,
        finals: None,
        co_decay: None,
        consistency: None,
        checks,
        wall_clock_seconds: None,
    };
    let mut defects = Vec::new();
    let mut oscillation = None;

    match command {
        Command::Validate => {}
        Command::Simulate => {
            summary.final_state = Some(fam.state(fam.horizon())?.as_slice().to_vec());
        }
        Command::Diagnose => {
            let mf = associated_markov(&fam)?;
            defects = diagnose(cfg, &fam, &mf, &mut summary)?;
        }
        Command::Minorize => {
            let mf = associated_markov(&fam)?;
            oscillation = minorize(cfg, &fam, &mf, &mut summary)?;
        }
    }

    if cfg.record_wall_clock {
        summary.wall_clock_seconds = Some(started.elapsed().as_secs_f64());
    }
    let exit_code = if summary.checks.iter().any(|c| c.asserted && !c.passed) { EXIT_ASSERTION } else { EXIT_OK };
    let outcome = Outcome { exit_code, summary, defects, oscillation, family: fam };
    if let Some(dir) = &cfg.output {
        write_outputs(dir, &outcome)?;
    }
    Ok(outcome)
}

fn diagnose(
    cfg: &ExperimentConfig,
    fam: &QspFamily,
    mf: &MarkovFamily,
    summary: &mut Summary,
) -> Result<Vec<DefectRow>> {
    let tol = cfg.tolerances;
    let t = fam.horizon();
    let m = cfg.start;
    let seed = cfg.seed_or_zero();
    let checks = &mut summary.checks;
    let mut rows: Vec<DefectRow> = (1..=t).map(|n| DefectRow { n, ..Default::default() }).collect();

    if cfg.wants(Diagnostic::Consistency) {
        let report = check_consistency(fam, tol.consistency)?;
        check_le(checks, "consistency_max_residual", report.max_residual, tol.consistency, false);
        summary.consistency = Some(ConsistencySummary {
            max_residual: report.max_residual,
            worst_triple: report.worst_triple,
            triples: report.per_triple.len(),
        });
    }

    if cfg.wants(Diagnostic::Trajectory) {
        let mut worst: f64 = 0.0;
        for row in rows.iter_mut() {
            let n = row.n;
            let mut w: f64 = 0.0;
            for start in 0..n {
                w = w.max(trajectory_residual(fam, start, n)?);
            }
            row.trajectory_residual_max = Some(w);
            worst = worst.max(w);
        }
        // the identity is only guaranteed for type B
        let asserted = fam.ptype() == ProcessType::TypeB;
        check_le(checks, "trajectory_residual_max", worst, tol.trajectory, asserted);
    }

    if cfg.wants(Diagnostic::Kc) {
        let mut worst: f64 = 0.0;
        for row in rows.iter_mut().filter(|r| r.n >= 2) {
            let v = kc_residual_max_ending_at(mf, row.n)?;
            row.kc_residual_max = Some(v);
            worst = worst.max(v);
        }
        check_le(checks, "kc_residual_max", worst, tol.kc, true);
    }

    let want_defects = cfg.wants(Diagnostic::Defects) || cfg.wants(Diagnostic::Equivalence);
    if want_defects {
        let mut range_violation: f64 = 0.0;
        for row in rows.iter_mut().filter(|r| r.n > m) {
            let md = markov_defect(mf, m, row.n)?;
            let qd = qsp_defect(fam, m, row.n)?;
            range_violation = range_violation.max(-md).max(-qd).max(md - 2.0).max(qd - 2.0);
            row.markov_defect = Some(md);
            row.qsp_defect = Some(qd);
        }
        check_le(checks, "defects_within_0_2", range_violation, tol.bound_slack, true);
        summary.finals = Some(Finals {
            m,
            n: t,
            markov: markov_defect(mf, m, t)?,
            qsp: qsp_defect(fam, m, t)?,
            r: None,
            threshold: cfg.threshold,
        });
    }

    if cfg.wants(Diagnostic::Equivalence) {
        let report = equivalence_report_with(fam, mf, m, cfg.threshold, cfg.sample_count, seed)?;
        for row in rows.iter_mut().filter(|r| r.n > m) {
            row.r_defect_max = report.r.values.get(&row.n).copied();
        }
        if let Some(f) = summary.finals.as_mut() {
            f.r = Some(report.r_final);
        }
        summary.co_decay = Some(report.co_decay);
        check_ge(checks, "co_decay", f64::from(u8::from(report.co_decay)), 1.0, false);

        let (pair_gap, r_gap) = equivalence_bounds(cfg, fam, mf, m)?;
        check_le(checks, "pair_defect_minus_markov_defect", pair_gap, tol.bound_slack, true);
        check_le(checks, "qsp_defect_minus_twice_basis_r_defect", r_gap, tol.bound_slack, true);
    }

    if cfg.wants(Diagnostic::Minorization) || cfg.wants(Diagnostic::Oscillation) {
        minorization_checks(cfg, fam, mf, summary)?;
    }
    Ok(rows)
}

/// Worst `pair_defect − markov_defect` over sampled pairs and worst
/// `qsp_defect − 2 max_u r_defect(e_u)`, over `n = m+1..=T`.
fn equivalence_bounds(cfg: &ExperimentConfig, fam: &QspFamily, mf: &MarkovFamily, m: usize) -> Result<(f64, f64)> {
    let dim = fam.dim();
    let seed = cfg.seed_or_zero();
    let offset = cfg.sample_count;
    let pairs: Vec<_> = (0..cfg.sample_count)
        .map(|s| (simplex_sample(seed, offset + 2 * s, dim), simplex_sample(seed, offset + 2 * s + 1, dim)))
        .collect();
    let basis = (0..dim).map(|u| basis_vector(u, dim)).collect::<Result<Vec<_>>>()?;
    let mut pair_gap = f64::NEG_INFINITY;
    let mut r_gap = f64::NEG_INFINITY;
    for n in m + 1..=fam.horizon() {
        let md = markov_defect(mf, m, n)?;
        for (phi, psi) in &pairs {
            pair_gap = pair_gap.max(pair_defect(mf, m, n, phi, psi)? - md);
        }
        let basis_r = basis.iter().try_fold(0.0_f64, |acc, e| Ok::<_, QspError>(acc.max(r_defect(fam, m, n, e)?)))?;
        r_gap = r_gap.max(qsp_defect(fam, m, n)? - 2.0 * basis_r);
    }
    Ok((pair_gap, r_gap))
}

/// Certificate detection on both sides plus, when a Markov certificate
/// exists, the oscillation and defect-recursion bounds.
fn minorization_checks(
    cfg: &ExperimentConfig,
    fam: &QspFamily,
    mf: &MarkovFamily,
    summary: &mut Summary,
) -> Result<Option<OscillationReport>> {
    let tol = cfg.tolerances;
    let qsp_cert = detect_minorization_qsp(fam)?;
    let markov_cert = detect_minorization_markov(mf)?;
    if let Some(c) = &qsp_cert {
        check_ge(&mut summary.checks, "transfer_margin", c.transfer_margin.unwrap_or(0.0), -tol.oscillation, true);
    }
    summary.qsp_certificate = qsp_cert.as_ref().map(CertificateSummary::from);
    summary.markov_certificate = markov_cert.as_ref().map(CertificateSummary::from);
    // The certificate proper is the kernel-level one; the Markov side is
    // reported alongside as evidence.
    if qsp_cert.is_none() {
        summary.certificate_note = Some("no certificate".into());
    }

    let mut report = None;
    if cfg.wants(Diagnostic::Oscillation) {
        if let Some(cert) = &markov_cert {
            let osc = oscillation_check(mf, cert)?;
            check_ge(&mut summary.checks, "oscillation_min_slack", osc.min_slack, -tol.oscillation, true);
            let violation = defect_recursion_check_all(mf, cert)?;
            check_le(&mut summary.checks, "defect_recursion_violation", violation, tol.recursion, true);
            let envelope = markov_defect_envelope(mf, cert, cfg.start, mf.horizon())?;
            let defect = markov_defect(mf, cfg.start, mf.horizon())?;
            check_le(&mut summary.checks, "markov_defect_minus_envelope", defect - envelope, tol.recursion, true);
            report = Some(osc);
        }
    }
    Ok(report)
}

fn minorize(
    cfg: &ExperimentConfig,
    fam: &QspFamily,
    mf: &MarkovFamily,
    summary: &mut Summary,
) -> Result<Option<OscillationReport>> {
    let mut cfg = cfg.clone();
    if !cfg.wants(Diagnostic::Oscillation) {
        cfg.diagnostics.push(Diagnostic::Oscillation);
    }
    let report = minorization_checks(&cfg, fam, mf, summary)?;
    let t = fam.horizon();
    summary.finals = Some(Finals {
        m: cfg.start,
        n: t,
        markov: markov_defect(mf, cfg.start, t)?,
        qsp: qsp_defect(fam, cfg.start, t)?,
        r: None,
        threshold: cfg.threshold,
    });
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn defects_csv(rows: &[DefectRow]) -> String {
    let mut out = String::from(DEFECT_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            opt(r.markov_defect),
            opt(r.qsp_defect),
            opt(r.r_defect_max),
            opt(r.kc_residual_max),
            opt(r.trajectory_residual_max)
        );
    }
    out
}

pub fn trajectory_csv(fam: &QspFamily) -> String {
    let mut out = String::from("n");
    for k in 0..fam.dim() {
        let _ = write!(out, ",x_{k}");
    }
    out.push('\n');
    for (n, x) in fam.trajectory().iter().enumerate() {
        let _ = write!(out, "{n}");
        for v in x.as_slice() {
            let _ = write!(out, ",{v:e}");
        }
        out.push('\n');
    }
    out
}

pub fn oscillation_csv(report: &OscillationReport) -> String {
    let mut out = String::from("l,n,max,min,gap,bound,slack\n");
    for c in &report.cells {
        let _ = writeln!(out, "{},{},{:e},{:e},{:e},{:e},{:e}", c.l, c.n, c.max, c.min, c.gap, c.bound, c.slack);
    }
    out
}

pub fn summary_json(summary: &Summary) -> Result<String> {
    let mut s = serde_json::to_string_pretty(summary)?;
    s.push('\n');
    Ok(s)
}

fn write_outputs(dir: &Path, outcome: &Outcome) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("summary.json"), summary_json(&outcome.summary)?)?;
    match outcome.summary.command {
        Command::Diagnose => fs::write(dir.join("defects.csv"), defects_csv(&outcome.defects))?,
        Command::Simulate => fs::write(dir.join("trajectory.csv"), trajectory_csv(&outcome.family))?,
        Command::Minorize => {
            if let Some(osc) = &outcome.oscillation {
                fs::write(dir.join("oscillation.csv"), oscillation_csv(osc))?;
            }
        }
        Command::Validate => {}
    }
    Ok(())
}

pub fn lemma_csv(rows: &[LemmaRow]) -> String {
    let mut out = String::from("n,lambda,extremal_a,unrolled_bound,decay_expression,n_product,ratio\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.n, r.lambda, r.extremal, r.bound, r.decay_expression, r.n_product, r.ratio
        );
    }
    out
}
