//! Simulation and ergodicity diagnostics for discrete-time quadratic
//! stochastic processes (q.s.p.) on a finite state space.
//!
//! A q.s.p. is a family of cubic kernels `P^{[m,n]}_{ij,k}`, the probability
//! that types `i` and `j` interacting at time `m` produce type `k` at time
//! `n`. This crate
//!
//! * builds multi-step families from one-step kernels under either of the two
//!   composition laws ([`qsp`]),
//! * derives the associated Markov process and checks Kolmogorov-Chapman
//!   consistency ([`markov`]),
//! * measures ergodic defects on the quadratic and Markov side
//!   ([`ergodicity`]),
//! * detects minorization certificates and checks the quantitative bounds
//!   that make them imply ergodicity ([`minorization`]),
//! * runs seeded, reproducible experiments from JSON configs
//!   ([`generators`], [`config`], [`experiment`]).
//!
//! ```
//! use qsp_core::prelude::*;
//!
//! let preset = GeneratorPreset::Minorized { lambda: 0.3, k0: 1, concentration: 1.0 };
//! let steps = generate_one_step(&preset, 3, 7, 20, true)?;
//! let fam = build_family(ProbVector::uniform(3)?, steps, ProcessType::TypeB, 20)?;
//! let mf = associated_markov(&fam)?;
//! assert!(kc_residual_max(&mf)? <= 1e-10);
//! assert!(markov_defect(&mf, 0, 20)? < 1e-2);
//! # Ok::<(), qsp_core::QspError>(())
//! ```

pub mod config;
pub mod ergodicity;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod markov;
pub mod minorization;
pub mod qsp;
pub mod reference;
pub mod rng;
pub mod simplex;

pub use error::{QspError, Result};

pub mod prelude {
    pub use crate::ergodicity::{
        equivalence_report, markov_defect, pair_defect, qsp_defect, r_defect, DefectSeries, EquivalenceReport,
    };
    pub use crate::error::{QspError, Result};
    pub use crate::generators::{generate_kernel, generate_one_step, GeneratorPreset};
    pub use crate::markov::{
        apply_markov, associated_markov, bilinear_apply, kc_residual, kc_residual_max, r_matrix, MarkovFamily,
    };
    pub use crate::minorization::{
        check_corollary_conditions, check_lemma_conditions, defect_recursion_check, detect_minorization_markov,
        detect_minorization_qsp, lemma_bound, oscillation_check, sequence_oracle, LambdaSequence,
        MinorizationCertificate,
    };
    pub use crate::qsp::{
        build_family, check_consistency, compose_type_a, compose_type_b, propagate, trajectory_residual, ProcessType,
        QspFamily,
    };
    pub use crate::simplex::{
        basis_vector, l1_distance, validate_kernel, validate_matrix, CubicKernel, ProbVector, StochMatrix, Tolerances,
    };
}
