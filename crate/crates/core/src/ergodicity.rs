//! Ergodic defects for Markov families, q.s.p. families and R-matrices.
//!
//! Each defect is the largest l1 distance between two transition rows of the
//! object at interval `(m, n)`, so it lies in `[0, 2]` and vanishes exactly
//! when all rows coincide. The finite-horizon proxy for "satisfies the
//! ergodic principle" is `defect(m, T) <= threshold`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{QspError, Result};
use crate::markov::{apply_markov, associated_markov, r_matrix, MarkovFamily};
use crate::qsp::QspFamily;
use crate::rng::simplex_sample;
use crate::simplex::{basis_vector, check_dim, l1_diff, l1_distance, ProbVector, StochMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    Markov,
    Qsp,
    RMatrix,
    Pair,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectSeries {
    pub m: usize,
    pub kind: DefectKind,
    /// `n -> defect(m, n)` for `n > m`.
    pub values: BTreeMap<usize, f64>,
}

impl DefectSeries {
    pub fn last(&self) -> Option<f64> {
        self.values.values().next_back().copied()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub m: usize,
    pub markov_final: f64,
    pub qsp_final: f64,
    pub r_final: f64,
    pub threshold: f64,
    /// All three finals on the same side of `threshold`.
    pub co_decay: bool,
    pub markov: DefectSeries,
    pub qsp: DefectSeries,
    pub r: DefectSeries,
}

/// `max_{i<j} Σ_k |Q_ik − Q_jk|`.
pub fn row_spread(q: &StochMatrix) -> f64 {
    let n = q.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max(l1_diff(q.row(i), q.row(j)));
        }
    }
    worst
}

pub fn markov_defect(mf: &MarkovFamily, m: usize, n: usize) -> Result<f64> {
    Ok(row_spread(mf.matrix(m, n)?))
}

/// Max over unordered pairs `(i,j)`, `(u,v)` of `Σ_k |P_{ij,k} − P_{uv,k}|`.
pub fn qsp_defect(fam: &QspFamily, m: usize, n: usize) -> Result<f64> {
    let p = fam.kernel(m, n)?;
    let dim = p.dim();
    let rows: Vec<&[f64]> = (0..dim).flat_map(|i| (i..dim).map(move |j| (i, j))).map(|(i, j)| p.row(i, j)).collect();
    let mut worst: f64 = 0.0;
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            worst = worst.max(l1_diff(rows[a], rows[b]));
        }
    }
    Ok(worst)
}

/// Row spread of `R^{m,n}(x)`.
pub fn r_defect(fam: &QspFamily, m: usize, n: usize, x: &ProbVector) -> Result<f64> {
    check_dim(fam.dim(), x.dim())?;
    Ok(row_spread(&r_matrix(fam, m, n, x)?))
}

/// `‖Q^{m,n} φ − Q^{m,n} ψ‖₁`.
pub fn pair_defect(mf: &MarkovFamily, m: usize, n: usize, phi: &ProbVector, psi: &ProbVector) -> Result<f64> {
    let q = mf.matrix(m, n)?;
    check_dim(q.dim(), phi.dim())?;
    check_dim(q.dim(), psi.dim())?;
    l1_distance(&apply_markov(q, phi)?, &apply_markov(q, psi)?)
}

/// Test points for the R-defect: all basis vectors, `x^(m)`, then
/// `sample_count` seeded uniform simplex samples.
pub fn r_sample_points(fam: &QspFamily, m: usize, sample_count: usize, seed: u64) -> Result<Vec<ProbVector>> {
    let dim = fam.dim();
    let mut points = (0..dim).map(|k| basis_vector(k, dim)).collect::<Result<Vec<_>>>()?;
    points.push(fam.state(m)?.clone());
    points.extend((0..sample_count).map(|s| simplex_sample(seed, s, dim)));
    Ok(points)
}

/// Worst [`r_defect`] over a set of points.
pub fn r_defect_max(fam: &QspFamily, m: usize, n: usize, points: &[ProbVector]) -> Result<f64> {
    points.iter().try_fold(0.0_f64, |acc, x| Ok(acc.max(r_defect(fam, m, n, x)?)))
}

/// Computes the Markov, q.s.p. and R defect series from time `m` to the
/// horizon and compares their finals against `threshold`.
pub fn equivalence_report(
    fam: &QspFamily,
    m: usize,
    threshold: f64,
    sample_count: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    let mf = associated_markov(fam)?;
    equivalence_report_with(fam, &mf, m, threshold, sample_count, seed)
}

/// As [`equivalence_report`], reusing an already computed associated family.
pub fn equivalence_report_with(
    fam: &QspFamily,
    mf: &MarkovFamily,
    m: usize,
    threshold: f64,
    sample_count: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    let t = fam.horizon();
    if m >= t {
        return Err(QspError::IntervalOutOfRange { m, n: t, horizon: t });
    }
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(QspError::InvalidArgument(format!("threshold must be positive, got {threshold}")));
    }
    let points = r_sample_points(fam, m, sample_count, seed)?;
    let series = |kind| DefectSeries { m, kind, values: BTreeMap::new() };
    let (mut markov, mut qsp, mut r) =
        (series(DefectKind::Markov), series(DefectKind::Qsp), series(DefectKind::RMatrix));
    for n in m + 1..=t {
        markov.values.insert(n, markov_defect(mf, m, n)?);
        qsp.values.insert(n, qsp_defect(fam, m, n)?);
        r.values.insert(n, r_defect_max(fam, m, n, &points)?);
    }
    let markov_final = markov.last().unwrap_or(0.0);
    let qsp_final = qsp.last().unwrap_or(0.0);
    let r_final = r.last().unwrap_or(0.0);
    let below = [markov_final, qsp_final, r_final].map(|v| v <= threshold);
    let co_decay = below.iter().all(|&b| b) || below.iter().all(|&b| !b);
    Ok(EquivalenceReport { m, markov_final, qsp_final, r_final, threshold, co_decay, markov, qsp, r })
}
