//! The extremal recursion `a_n = (1-λ_n) a_{n-1} + Π(1-λ_k)` against its
//! unrolled bound for three λ families.
//!
//!     cargo run --example lemma_sequences

use qsp_core::minorization::lemma_table;
use qsp_core::prelude::*;

fn main() -> Result<()> {
    let len = 60;
    let families = [
        ("constant 0.3", LambdaSequence::constant(0.3, len)?),
        ("harmonic 1/(n+1)", LambdaSequence::harmonic(1.0, len)?),
        ("inverse sqrt 1/sqrt(n+1)", LambdaSequence::inverse_sqrt(1.0, len)?),
    ];
    for (name, seq) in &families {
        let lemma = check_lemma_conditions(seq);
        let cor = check_corollary_conditions(seq);
        println!(
            "{name}: divergence {}, decay {}, corollary implies decay {}",
            lemma.divergence.holds, lemma.decay.holds, cor.implies_decay
        );
        for row in lemma_table(seq, 1.0)?.iter().filter(|r| r.n % 15 == 0) {
            println!(
                "  n = {:>2}  a_n = {:.3e}  bound = {:.3e}  E_n = {:.3e}  nΠ = {:.3e}",
                row.n, row.extremal, row.bound, row.decay_expression, row.n_product
            );
        }
    }
    Ok(())
}
