//! Acceptance criteria, one line each. Runs as a plain binary so every line is
//! printed whether or not it passes; exits nonzero if any criterion fails.

mod common;

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use qsp_core::config::ExperimentConfig;
use qsp_core::ergodicity::{equivalence_report_with, markov_defect, pair_defect, qsp_defect, r_defect};
use qsp_core::experiment::{run, Command};
use qsp_core::generators::{generate_kernel, GeneratorPreset};
use qsp_core::markov::{associated_markov, kc_residual_max};
use qsp_core::minorization::{
    check_lemma_conditions, decay_expression, defect_recursion_check_all, detect_minorization_markov,
    detect_minorization_qsp, lemma_bound, oscillation_check, sequence_oracle, LambdaSequence,
};
use qsp_core::qsp::{compose_type_b, trajectory_residual, ProcessType};
use qsp_core::reference::compose_type_b_naive;
use qsp_core::rng::{simplex_sample, stream};
use qsp_core::simplex::basis_vector;

const THRESHOLD: f64 = 1e-3;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn markov_kc() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_name = String::new();
    let corpus = common::corpus();
    for (name, fam) in &corpus {
        let kc = kc_residual_max(&associated_markov(fam).unwrap()).unwrap();
        if kc > worst {
            worst = kc;
            worst_name = name.clone();
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-10 && elapsed < Duration::from_secs(30),
        format!(
            "{} families, max kc residual {worst:e} ({worst_name}) <= 1e-10, {:.2}s < 30s",
            corpus.len(),
            secs(elapsed)
        ),
    )
}

fn trajectory_identity() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (_, fam) in common::corpus().iter().filter(|(_, f)| f.ptype() == ProcessType::TypeB) {
        for n in 2..=fam.horizon() {
            for m in 1..n {
                worst = worst.max(trajectory_residual(fam, m, n).unwrap());
                count += 1;
            }
        }
    }
    verdict(worst <= 1e-10, format!("{count} (m, n) pairs over type B corpus, max residual {worst:e} <= 1e-10"))
}

fn factorized_type_b() -> Verdict {
    let mut worst: f64 = 0.0;
    for case in 0..50u64 {
        let dim = 2 + (case as usize % 3);
        let preset = GeneratorPreset::Random { concentration: 1.0 };
        let p_sr = generate_kernel(&preset, dim, 5000 + case, 1).unwrap();
        let p_rt = generate_kernel(&preset, dim, 5000 + case, 2).unwrap();
        let x = simplex_sample(5000 + case, 0, dim);
        let fast = compose_type_b(&p_sr, &p_rt, &x).unwrap();
        let naive = compose_type_b_naive(&p_sr, &p_rt, &x);
        worst = worst.max(fast.max_abs_diff(&naive).unwrap());
    }
    verdict(worst <= 1e-12, format!("50 cases N in 2..=4, max entrywise difference {worst:e} <= 1e-12"))
}

fn minorized_end_to_end() -> Verdict {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for ptype in [ProcessType::TypeA, ProcessType::TypeB] {
        let preset = GeneratorPreset::Minorized { lambda: 0.3, k0: 1, concentration: 1.0 };
        let fam = common::family(&preset, 3, 42, 40, ptype);
        let mf = associated_markov(&fam).unwrap();
        let Some(qcert) = detect_minorization_qsp(&fam).unwrap() else {
            ok = false;
            parts.push(format!("{ptype:?}: no certificate"));
            continue;
        };
        let mcert = detect_minorization_markov(&mf).unwrap().expect("associated family inherits the floor");
        let md = markov_defect(&mf, 0, 40).unwrap();
        let qd = qsp_defect(&fam, 0, 40).unwrap();
        let osc = oscillation_check(&mf, &mcert).unwrap();
        let rec = defect_recursion_check_all(&mf, &mcert).unwrap();
        let lam = qcert.min_lambda();
        let good = lam >= 0.3 && md <= 1e-3 && qd <= 1e-3 && osc.min_slack >= -1e-10 && rec <= 1e-10;
        ok &= good;
        parts.push(format!(
            "{ptype:?}: k0 {} min λ {lam} (Markov side {}), defects {md:e}/{qd:e}, min slack {:e}, recursion {rec:e}",
            qcert.k0,
            mcert.min_lambda(),
            osc.min_slack
        ));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(60);
    verdict(ok, format!("{}; {:.2}s < 60s", parts.join("; "), secs(elapsed)))
}

fn negative_control() -> Verdict {
    let fam = common::family(&GeneratorPreset::IdentityMix, 2, 0, 40, ProcessType::TypeA);
    let mf = associated_markov(&fam).unwrap();
    let mut worst_gap: f64 = 0.0;
    let mut worst_n = 0;
    for n in 1..=40 {
        let gap = (qsp_defect(&fam, 0, n).unwrap() - 2.0).abs();
        if gap > worst_gap {
            worst_gap = gap;
            worst_n = n;
        }
    }
    let cert = detect_minorization_qsp(&fam).unwrap();
    let rep = equivalence_report_with(&fam, &mf, 0, THRESHOLD, 16, 0).unwrap();
    let both_above = rep.markov_final > THRESHOLD && rep.qsp_final > THRESHOLD;
    let passed = worst_gap <= 1e-12 && cert.is_none() && rep.qsp_final > THRESHOLD && rep.co_decay && both_above;
    verdict(
        passed,
        format!(
            "max |qsp_defect - 2| = {worst_gap:e} at n = {worst_n} (need <= 1e-12); certificate found: {}; \
             finals markov {:e}, qsp {:e} (need both > {THRESHOLD:e}); co_decay {}",
            cert.is_some(),
            rep.markov_final,
            rep.qsp_final,
            rep.co_decay
        ),
    )
}

fn co_decay_sweep() -> Verdict {
    let mut runs = 0;
    let mut counterexamples = Vec::new();
    for seed in 0..50u64 {
        for preset in common::all_presets(3, seed) {
            for ptype in [ProcessType::TypeA, ProcessType::TypeB] {
                let fam = common::family(&preset, 3, seed, 40, ptype);
                let mf = associated_markov(&fam).unwrap();
                let md = markov_defect(&mf, 0, 40).unwrap();
                let qd = qsp_defect(&fam, 0, 40).unwrap();
                runs += 1;
                if (md <= 1e-3 && qd >= 1e-1) || (qd <= 1e-3 && md >= 1e-1) {
                    counterexamples.push(format!("{}/{ptype:?}/seed {seed}: {md:e} vs {qd:e}", preset.name()));
                }
            }
        }
    }
    verdict(
        counterexamples.is_empty(),
        format!("{runs} runs (5 presets x 2 types x 50 seeds), counterexamples: {}", counterexamples.len())
            + &counterexamples.first().map(|c| format!(" (first: {c})")).unwrap_or_default(),
    )
}

fn lemma_numerics() -> Verdict {
    let mut rng = stream(7, 0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let values: Vec<f64> = (0..40).map(|_| rng.random_range(1e-3..0.999)).collect();
        let seq = LambdaSequence::new(values).unwrap();
        let a0 = rng.random_range(0.0..2.0);
        let a1 = sequence_oracle(a0, &seq, 1).unwrap();
        for n in 1..=40 {
            worst = worst.max(sequence_oracle(a0, &seq, n).unwrap() - lemma_bound(a1, &seq, n).unwrap());
        }
    }
    let constant = LambdaSequence::constant(0.3, 40).unwrap();
    let a40 = sequence_oracle(1.0, &constant, 40).unwrap();
    let harmonic = LambdaSequence::harmonic(1.0, 200).unwrap();
    let e200 = decay_expression(&harmonic, 200);
    let decay_fails = !check_lemma_conditions(&harmonic).decay.holds;
    let passed = worst <= 1e-12 && a40 <= 1e-2 && (e200 - 1.0).abs() <= 0.05 && decay_fails;
    verdict(
        passed,
        format!(
            "max oracle - bound {worst:e} <= 1e-12; constant 0.3 a_40 = {a40:e} <= 1e-2; \
             harmonic E_200 = {e200} (limit 1, tol 0.05), reported failing: {decay_fails}"
        ),
    )
}

fn equivalence_bounds() -> Verdict {
    let corpus = common::corpus();
    let pairs_per_family = 1000 / corpus.len();
    let mut pair_gap = f64::NEG_INFINITY;
    let mut r_gap = f64::NEG_INFINITY;
    let mut pairs = 0;
    for (idx, (_, fam)) in corpus.iter().enumerate() {
        let mf = associated_markov(fam).unwrap();
        let dim = fam.dim();
        let basis: Vec<_> = (0..dim).map(|u| basis_vector(u, dim).unwrap()).collect();
        for s in 0..pairs_per_family {
            let phi = simplex_sample(9000 + idx as u64, 2 * s, dim);
            let psi = simplex_sample(9000 + idx as u64, 2 * s + 1, dim);
            pairs += 1;
            for m in 0..fam.horizon() {
                for n in m + 1..=fam.horizon() {
                    let md = markov_defect(&mf, m, n).unwrap();
                    pair_gap = pair_gap.max(pair_defect(&mf, m, n, &phi, &psi).unwrap() - md);
                }
            }
        }
        for m in 0..fam.horizon() {
            for n in m + 1..=fam.horizon() {
                let r = basis.iter().map(|e| r_defect(fam, m, n, e).unwrap()).fold(0.0, f64::max);
                r_gap = r_gap.max(qsp_defect(fam, m, n).unwrap() - 2.0 * r);
            }
        }
    }
    verdict(
        pair_gap <= 1e-12 && r_gap <= 1e-12,
        format!(
            "{pairs} pairs: max pair - markov {pair_gap:e} <= 1e-12; {} families: max qsp - 2 r(e_u) {r_gap:e} <= 1e-12",
            corpus.len()
        ),
    )
}

fn determinism() -> Verdict {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs");
    let mut names: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    names.sort();
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for path in names {
        let Ok(cfg) = ExperimentConfig::from_path(&path) else { continue };
        for command in [Command::Simulate, Command::Diagnose, Command::Minorize] {
            // Same config, same output directory, run twice.
            let dir = tempfile::tempdir().unwrap();
            let mut c = cfg.clone();
            c.output = Some(dir.path().to_path_buf());
            let snapshot = || {
                let mut files: Vec<_> = fs::read_dir(dir.path())
                    .unwrap()
                    .map(|e| {
                        let e = e.unwrap();
                        (e.file_name(), fs::read(e.path()).unwrap())
                    })
                    .collect();
                files.sort();
                files
            };
            run(&c, command).unwrap();
            let first = snapshot();
            for f in fs::read_dir(dir.path()).unwrap() {
                fs::remove_file(f.unwrap().path()).unwrap();
            }
            run(&c, command).unwrap();
            let second = snapshot();
            compared += first.len();
            if first != second {
                mismatches.push(format!("{}:{command:?}", path.display()));
            }
        }
    }
    verdict(
        mismatches.is_empty() && compared > 0,
        format!("{compared} files compared byte-for-byte, mismatches: {mismatches:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("associated process is Markov", markov_kc),
        ("type B trajectory identity", trajectory_identity),
        ("factorized type B composition", factorized_type_b),
        ("minorized family end to end", minorized_end_to_end),
        ("identity_mix negative control", negative_control),
        ("co-decay across presets", co_decay_sweep),
        ("lemma numerics", lemma_numerics),
        ("equivalence bounds", equivalence_bounds),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (idx, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        failed += usize::from(!v.passed);
        println!("criterion {} [{name}]: {} - {}", idx + 1, if v.passed { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
