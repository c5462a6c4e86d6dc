//! Finite simplex vectors, stochastic matrices and cubic kernels.
//!
//! Every object lives in a fixed finite dimension `N`. Indices are 0-based
//! throughout the crate. Construction only checks shapes; stochasticity is
//! checked by [`validate_matrix`] / [`validate_kernel`], which report defects
//! and never repair the input.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{QspError, Result};

/// Largest supported state-space dimension.
pub const MAX_DIM: usize = 64;

/// Cap on the number of index tuples kept in a [`ValidationReport`].
const MAX_OFFENDERS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed |sum - 1| for probability vectors and rows.
    pub sum: f64,
    /// Allowed negativity of a single entry.
    pub entry: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { sum: 1e-10, entry: 1e-12 }
    }
}

/// A point of the (N-1)-simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbVector {
    values: Vec<f64>,
}

impl ProbVector {
    /// Checks the simplex invariants with the default [`Tolerances`].
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_tolerances(values, &Tolerances::default())
    }

    pub fn with_tolerances(values: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if values.is_empty() {
            return Err(QspError::NotOnSimplex("empty vector".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < -tol.entry) {
            return Err(QspError::NotOnSimplex(format!("entry {i} is {v}")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > tol.sum {
            return Err(QspError::NotOnSimplex(format!("entries sum to {sum}")));
        }
        Ok(Self { values })
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(QspError::InvalidArgument("dimension must be positive".into()));
        }
        Ok(Self { values: vec![1.0 / dim as f64; dim] })
    }

    /// Wraps values known to lie on the simplex (up to rounding).
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl Index<usize> for ProbVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl<'de> Deserialize<'de> for ProbVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(d)?;
        ProbVector::new(values).map_err(serde::de::Error::custom)
    }
}

/// The basis vector `e^(k)` of dimension `dim` (0-based `k`).
pub fn basis_vector(k: usize, dim: usize) -> Result<ProbVector> {
    if k >= dim {
        return Err(QspError::IndexOutOfRange { index: k, dim });
    }
    let mut values = vec![0.0; dim];
    values[k] = 1.0;
    Ok(ProbVector { values })
}

pub fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub(crate) fn l1_diff(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b).abs()).sum()
}

pub fn l1_distance(u: &ProbVector, v: &ProbVector) -> Result<f64> {
    check_dim(u.dim(), v.dim())?;
    Ok(l1_diff(&u.values, &v.values))
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(QspError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// An `N x N` matrix intended to be row-stochastic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl StochMatrix {
    /// Row-major entries; only the shape is checked.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(QspError::InvalidArgument("dimension must be positive".into()));
        }
        check_dim(dim * dim, entries.len())?;
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        for row in rows {
            check_dim(dim, row.len())?;
        }
        Self::new(dim, rows.concat())
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    /// Every row equal to `p`.
    pub fn rank_one(p: &ProbVector) -> Self {
        let dim = p.dim();
        Self { dim, entries: p.as_slice().repeat(dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Matrix product `self * other`, i.e. the Kolmogorov-Chapman composition.
    pub fn compose(&self, other: &StochMatrix) -> Result<StochMatrix> {
        check_dim(self.dim, other.dim)?;
        let n = self.dim;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            let out = &mut entries[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(StochMatrix { dim: n, entries })
    }
}

/// A cubic kernel `P_{ij,k}`: the distribution over `k` produced by the
/// interaction of `i` and `j`. Stored with `k` fastest, so `row(i, j)` is a
/// contiguous distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicKernel {
    dim: usize,
    entries: Vec<f64>,
}

impl CubicKernel {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(QspError::InvalidArgument("dimension must be positive".into()));
        }
        check_dim(dim * dim * dim, entries.len())?;
        Ok(Self { dim, entries })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    entries.push(f(i, j, k));
                }
            }
        }
        Self { dim, entries }
    }

    /// `P_{ij,k} = p_k` for every pair.
    pub fn constant(p: &ProbVector) -> Self {
        let dim = p.dim();
        Self { dim, entries: p.as_slice().repeat(dim * dim) }
    }

    /// `P_{ij,k} = (δ_ik + δ_jk) / 2`.
    pub fn identity_mix(dim: usize) -> Self {
        Self::from_fn(dim, |i, j, k| 0.5 * (f64::from(u8::from(i == k)) + f64::from(u8::from(j == k))))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.entries[(i * self.dim + j) * self.dim + k]
    }

    #[inline]
    pub fn row(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.dim + j) * self.dim;
        &self.entries[start..start + self.dim]
    }

    pub(crate) fn row_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let start = (i * self.dim + j) * self.dim;
        &mut self.entries[start..start + self.dim]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &CubicKernel) -> Result<f64> {
        check_dim(self.dim, other.dim)?;
        Ok(self.entries.iter().zip(&other.entries).fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    /// `max(0, -min entry)`.
    pub max_negativity: f64,
    /// Worst `|row sum - 1|`.
    pub max_row_defect: f64,
    /// `max |P_{ij,k} - P_{ji,k}|`; always 0 for matrices.
    pub max_symmetry_defect: f64,
    /// Offending index tuples (entries, rows or symmetric pairs), at most 64.
    pub offending_indices: Vec<Vec<usize>>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ok={} negativity={:e} row_defect={:e} symmetry_defect={:e}",
            self.ok, self.max_negativity, self.max_row_defect, self.max_symmetry_defect
        )?;
        if !self.offending_indices.is_empty() {
            write!(f, " offending={:?}", self.offending_indices)?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Defects {
    negativity: f64,
    row: f64,
    symmetry: f64,
    offenders: Vec<Vec<usize>>,
}

impl Defects {
    fn flag(&mut self, idx: Vec<usize>) {
        if self.offenders.len() < MAX_OFFENDERS {
            self.offenders.push(idx);
        }
    }

    fn scan_row(&mut self, row: &[f64], prefix: &[usize], tol: f64) {
        for (k, &v) in row.iter().enumerate() {
            let neg = if v.is_nan() { f64::INFINITY } else { (-v).max(0.0) };
            self.negativity = self.negativity.max(neg);
            if neg > tol {
                let mut idx = prefix.to_vec();
                idx.push(k);
                self.flag(idx);
            }
        }
        let sum: f64 = row.iter().sum();
        let defect = if sum.is_nan() { f64::INFINITY } else { (sum - 1.0).abs() };
        self.row = self.row.max(defect);
        if defect > tol {
            self.flag(prefix.to_vec());
        }
    }

    fn into_report(self, tol: f64) -> ValidationReport {
        ValidationReport {
            ok: self.negativity <= tol && self.row <= tol && self.symmetry <= tol,
            max_negativity: self.negativity,
            max_row_defect: self.row,
            max_symmetry_defect: self.symmetry,
            offending_indices: self.offenders,
        }
    }
}

/// Checks nonnegativity and unit row sums of `q`.
pub fn validate_matrix(q: &StochMatrix, tol: f64) -> ValidationReport {
    let mut d = Defects::default();
    for i in 0..q.dim {
        d.scan_row(q.row(i), &[i], tol);
    }
    d.into_report(tol)
}

/// Checks symmetry in `(i, j)`, nonnegativity, and stochasticity over `k`.
pub fn validate_kernel(p: &CubicKernel, tol: f64) -> ValidationReport {
    let n = p.dim;
    let mut d = Defects::default();
    for i in 0..n {
        for j in 0..n {
            d.scan_row(p.row(i, j), &[i, j], tol);
            if j > i {
                let sym = l1_sym_defect(p.row(i, j), p.row(j, i));
                d.symmetry = d.symmetry.max(sym);
                if sym > tol {
                    d.flag(vec![i, j]);
                }
            }
        }
    }
    d.into_report(tol)
}

fn l1_sym_defect(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| {
        let d = (x - y).abs();
        if d.is_nan() {
            f64::INFINITY
        } else {
            acc.max(d)
        }
    })
}
