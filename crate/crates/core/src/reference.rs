//! Brute-force contractions written index-for-index from the defining sums.
//!
//! These are slow (`compose_type_b_naive` is O(N^6)) and exist only as
//! independent oracles for the optimized paths in [`crate::qsp`] and
//! [`crate::markov`]. They perform no validation.

use crate::simplex::{CubicKernel, ProbVector, StochMatrix};

/// `Σ_{i,j} P_{ij,k} x_i x_j`, unvalidated.
pub fn propagate_naive(x: &ProbVector, p: &CubicKernel) -> Vec<f64> {
    let n = p.dim();
    (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += p.get(i, j, k) * x[i] * x[j];
                }
            }
            acc
        })
        .collect()
}

/// `Σ_{m,l} P^{[s,r]}_{ij,m} P^{[r,t]}_{ml,k} x_l`, O(N^5).
pub fn compose_type_a_naive(p_sr: &CubicKernel, p_rt: &CubicKernel, x_r: &ProbVector) -> CubicKernel {
    let n = p_sr.dim();
    CubicKernel::from_fn(n, |i, j, k| {
        let mut acc = 0.0;
        for m in 0..n {
            for l in 0..n {
                acc += p_sr.get(i, j, m) * p_rt.get(m, l, k) * x_r[l];
            }
        }
        acc
    })
}

/// `Σ_{m,l,g,h} P^{[s,r]}_{im,l} P^{[s,r]}_{jg,h} P^{[r,t]}_{lh,k} x_m x_g`, O(N^6).
pub fn compose_type_b_naive(p_sr: &CubicKernel, p_rt: &CubicKernel, x_s: &ProbVector) -> CubicKernel {
    let n = p_sr.dim();
    CubicKernel::from_fn(n, |i, j, k| {
        let mut acc = 0.0;
        for m in 0..n {
            for l in 0..n {
                for g in 0..n {
                    for h in 0..n {
                        acc += p_sr.get(i, m, l) * p_sr.get(j, g, h) * p_rt.get(l, h, k) * x_s[m] * x_s[g];
                    }
                }
            }
        }
        acc
    })
}

/// `H_{ij} = Σ_l P_{il,j} x_l`, as nested rows.
pub fn slot_average_naive(p: &CubicKernel, x: &ProbVector) -> Vec<Vec<f64>> {
    let n = p.dim();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|l| p.get(i, l, j) * x[l]).sum()).collect()).collect()
}

/// `Σ_k A_{ik} B_{kj}`, as nested rows.
pub fn matmul_naive(a: &StochMatrix, b: &StochMatrix) -> Vec<Vec<f64>> {
    let n = a.dim();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a.get(i, k) * b.get(k, j)).sum()).collect()).collect()
}
