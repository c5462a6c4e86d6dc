//! Seeded random streams.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). A stream is
//! identified by `(seed, stream_id)`: the key is derived with
//! `ChaCha8Rng::seed_from_u64(seed)` and the 64-bit ChaCha stream/nonce word
//! is set to `stream_id`. Stream ids are laid out as
//!
//! ```text
//! kernel draw for step n, unordered pair (i <= j):   (n << 32) | (i << 16) | j
//! matrix row i for step n (markov_pair_lift):        (n << 32) | (i << 16) | 0xFFFF
//! simplex sample number s (defect sampling):         (1 << 63) | s
//! ```
//!
//! so every draw is independent of evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{QspError, Result};
use crate::simplex::ProbVector;

pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

pub fn kernel_stream_id(step: usize, i: usize, j: usize) -> u64 {
    ((step as u64) << 32) | ((i as u64) << 16) | j as u64
}

pub fn matrix_row_stream_id(step: usize, i: usize) -> u64 {
    ((step as u64) << 32) | ((i as u64) << 16) | 0xFFFF
}

pub fn sample_stream_id(sample: usize) -> u64 {
    (1u64 << 63) | sample as u64
}

/// Unit-rate exponential by inversion: `-ln(1 - U)`, `U` uniform on [0, 1).
pub fn exp1<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln()
}

/// A symmetric Dirichlet(`concentration`) draw of length `dim`.
///
/// With concentration 1 the weights are unit exponentials, otherwise
/// Gamma(concentration, 1) variates.
pub fn dirichlet<R: Rng>(rng: &mut R, dim: usize, concentration: f64) -> Result<Vec<f64>> {
    if !(concentration.is_finite() && concentration > 0.0) {
        return Err(QspError::Config(format!("concentration must be positive, got {concentration}")));
    }
    let mut w: Vec<f64> = if concentration == 1.0 {
        (0..dim).map(|_| exp1(rng)).collect()
    } else {
        let gamma = Gamma::new(concentration, 1.0).map_err(|e| QspError::Config(e.to_string()))?;
        (0..dim).map(|_| gamma.sample(rng)).collect()
    };
    let total: f64 = w.iter().sum();
    if total.is_nan() || total <= 0.0 {
        // every weight underflowed; fall back to uniform
        w.fill(1.0);
    }
    Ok(renormalize(w))
}

/// Divides by the sum. Generators call this explicitly; validation never does.
pub fn renormalize(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Uniform point of the simplex for sample number `sample`.
pub fn simplex_sample(seed: u64, sample: usize, dim: usize) -> ProbVector {
    let mut rng = stream(seed, sample_stream_id(sample));
    let w = dirichlet(&mut rng, dim, 1.0).expect("unit concentration is valid");
    ProbVector::from_raw(w)
}
