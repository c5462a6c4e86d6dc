//! Markov, q.s.p. and R-matrix defects side by side for a decaying and a
//! slowly mixing family.
//!
//!     cargo run --example ergodic_defects

use qsp_core::prelude::*;

fn show(name: &str, fam: &QspFamily) -> Result<()> {
    let rep = equivalence_report(fam, 0, 1e-3, 16, 1)?;
    println!("{name}");
    println!("  {:>3} {:>12} {:>12} {:>12}", "n", "markov", "qsp", "r_max");
    for n in (1..=fam.horizon()).step_by(4) {
        println!("  {n:>3} {:>12.3e} {:>12.3e} {:>12.3e}", rep.markov.values[&n], rep.qsp.values[&n], rep.r.values[&n]);
    }
    println!(
        "  finals {:.3e} / {:.3e} / {:.3e}, co_decay = {}",
        rep.markov_final, rep.qsp_final, rep.r_final, rep.co_decay
    );
    Ok(())
}

fn main() -> Result<()> {
    let t = 24;
    let steps = generate_one_step(&GeneratorPreset::Random { concentration: 1.0 }, 3, 5, t, true)?;
    show("random, type A", &build_family(ProbVector::uniform(3)?, steps, ProcessType::TypeA, t)?)?;

    let steps = vec![CubicKernel::identity_mix(3); t];
    show("identity_mix, type A", &build_family(ProbVector::new(vec![0.2, 0.3, 0.5])?, steps, ProcessType::TypeA, t)?)?;
    Ok(())
}
