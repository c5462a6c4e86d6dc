#![allow(dead_code)]

use qsp_core::generators::{generate_one_step, GeneratorPreset};
use qsp_core::qsp::{build_family, ProcessType, QspFamily};
use qsp_core::rng::simplex_sample;
use qsp_core::simplex::ProbVector;

pub const CORPUS_DIMS: [usize; 4] = [2, 3, 4, 6];
pub const CORPUS_PER_TYPE: usize = 20;
pub const CORPUS_HORIZON: usize = 10;

/// Seeded iid random families: `CORPUS_PER_TYPE` of each type, dimensions
/// cycling through `CORPUS_DIMS`, random initial points.
pub fn corpus() -> Vec<(String, QspFamily)> {
    let mut out = Vec::new();
    for ptype in [ProcessType::TypeA, ProcessType::TypeB] {
        for idx in 0..CORPUS_PER_TYPE {
            let dim = CORPUS_DIMS[idx % CORPUS_DIMS.len()];
            let seed = 1000 + idx as u64;
            let preset = GeneratorPreset::Random { concentration: 1.0 };
            let steps = generate_one_step(&preset, dim, seed, CORPUS_HORIZON, true).unwrap();
            let x0 = simplex_sample(seed, 0, dim);
            let fam = build_family(x0, steps, ptype, CORPUS_HORIZON).unwrap();
            out.push((format!("{ptype:?}/N={dim}/seed={seed}"), fam));
        }
    }
    out
}

pub fn family(preset: &GeneratorPreset, dim: usize, seed: u64, horizon: usize, ptype: ProcessType) -> QspFamily {
    let steps = generate_one_step(preset, dim, seed, horizon, true).unwrap();
    build_family(ProbVector::uniform(dim).unwrap(), steps, ptype, horizon).unwrap()
}

/// One instance of every generator preset for `seed`; parameters that are not
/// randomized by the preset itself are drawn from `seed` here.
pub fn all_presets(dim: usize, seed: u64) -> Vec<GeneratorPreset> {
    vec![
        GeneratorPreset::Constant { p: simplex_sample(seed, 0, dim).into_vec() },
        GeneratorPreset::IdentityMix,
        GeneratorPreset::Random { concentration: 1.0 },
        GeneratorPreset::Minorized { lambda: 0.3, k0: (seed as usize) % dim, concentration: 1.0 },
        GeneratorPreset::MarkovPairLift { q: None, concentration: 1.0 },
    ]
}
