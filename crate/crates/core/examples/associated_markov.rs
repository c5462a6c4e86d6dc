//! The associated Markov process of a q.s.p. and its Kolmogorov-Chapman check.
//!
//!     cargo run --example associated_markov

use qsp_core::prelude::*;

fn main() -> Result<()> {
    let steps = generate_one_step(&GeneratorPreset::Random { concentration: 0.5 }, 4, 7, 10, true)?;
    let fam = build_family(ProbVector::uniform(4)?, steps, ProcessType::TypeB, 10)?;
    let mf = associated_markov(&fam)?;

    let h = mf.matrix(0, 1)?;
    println!("H(0,1):");
    for i in 0..h.dim() {
        let row: Vec<String> = h.row(i).iter().map(|v| format!("{v:.4}")).collect();
        println!("  {}", row.join("  "));
    }
    println!("KC residual (0, 4, 10) = {:e}", kc_residual(&mf, 0, 4, 10)?);
    println!("max KC residual        = {:e}", kc_residual_max(&mf)?);

    // The associated matrix moves the trajectory exactly like the kernel does.
    let moved = apply_markov(mf.matrix(3, 9)?, fam.state(3)?)?;
    println!("|H(3,9) x(3) - x(9)|_1 = {:e}", l1_distance(&moved, fam.state(9)?)?);
    Ok(())
}
