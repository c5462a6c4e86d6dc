//! Build a type A and a type B family from the same one-step kernels and
//! compare their trajectories and split consistency.
//!
//!     cargo run --example build_family

use qsp_core::prelude::*;

fn main() -> Result<()> {
    let (dim, horizon) = (3, 8);
    let steps = generate_one_step(&GeneratorPreset::Random { concentration: 1.0 }, dim, 2024, horizon, true)?;
    let x0 = ProbVector::new(vec![0.6, 0.3, 0.1])?;

    for ptype in [ProcessType::TypeA, ProcessType::TypeB] {
        let fam = build_family(x0.clone(), steps.clone(), ptype, horizon)?;
        println!("{ptype:?}");
        for (n, x) in fam.trajectory().iter().enumerate() {
            let v: Vec<String> = x.as_slice().iter().map(|v| format!("{v:.4}")).collect();
            println!("  x({n}) = [{}]", v.join(", "));
        }
        let report = check_consistency(&fam, 1e-10)?;
        println!(
            "  worst split residual {:e} at {:?} over {} triples",
            report.max_residual,
            report.worst_triple,
            report.per_triple.len()
        );
        println!("  trajectory residual (2, {horizon}) = {:e}", trajectory_residual(&fam, 2, horizon)?);
    }
    Ok(())
}
