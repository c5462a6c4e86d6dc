//! Detect a minorization certificate and check the bounds it implies.
//!
//!     cargo run --example minorization_certificate

use qsp_core::minorization::{defect_recursion_check_all, markov_defect_envelope};
use qsp_core::prelude::*;

fn main() -> Result<()> {
    let horizon = 30;
    let preset = GeneratorPreset::Minorized { lambda: 0.2, k0: 2, concentration: 1.0 };
    let steps = generate_one_step(&preset, 4, 99, horizon, true)?;
    let fam = build_family(ProbVector::uniform(4)?, steps, ProcessType::TypeA, horizon)?;
    let mf = associated_markov(&fam)?;

    let Some(cert) = detect_minorization_qsp(&fam)? else {
        println!("no certificate");
        return Ok(());
    };
    println!("kernel certificate: k0 = {}, min λ = {:.4}", cert.k0, cert.min_lambda());
    println!("  transfer margin to H: {:e}", cert.transfer_margin.unwrap_or(f64::NAN));
    println!("  conditions hold: {}", cert.conditions_hold());

    let mcert = detect_minorization_markov(&mf)?.expect("floor transfers to the associated process");
    let osc = oscillation_check(&mf, &mcert)?;
    println!("Markov certificate: k0 = {}, min λ = {:.4}", mcert.k0, mcert.min_lambda());
    println!("  {} oscillation cells, min slack {:e}", osc.cells.len(), osc.min_slack);
    println!("  defect recursion violation {:e}", defect_recursion_check_all(&mf, &mcert)?);
    for n in [5, 10, 20, 30] {
        println!(
            "  n = {n:>2}: defect {:.3e} <= envelope {:.3e}",
            markov_defect(&mf, 0, n)?,
            markov_defect_envelope(&mf, &mcert, 0, n)?
        );
    }
    Ok(())
}
