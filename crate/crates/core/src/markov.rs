//! Markov families and the Markov process associated with a q.s.p.
//!
//! Operators act on the first index, `(Q x)_j = Σ_i Q_{ij} x_i`, so that
//! `‖Q e_i − Q e_j‖₁` is exactly the l1 distance between rows `i` and `j`.

use crate::error::{QspError, Result};
use crate::qsp::{average_second_slot, QspFamily};
use crate::simplex::{check_dim, validate_matrix, CubicKernel, ProbVector, StochMatrix, Tolerances};

/// Stochastic matrices `Q^{m,n}` for `0 <= m < n <= T`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovFamily {
    dim: usize,
    horizon: usize,
    // slot(m, n) = n(n-1)/2 + m
    matrices: Vec<StochMatrix>,
}

#[inline]
fn slot(m: usize, n: usize) -> usize {
    n * (n - 1) / 2 + m
}

impl MarkovFamily {
    /// Builds `Q^{m,n} = Q^{m,m+1} ⋯ Q^{n-1,n}` from one-step matrices
    /// (`steps[n-1]` is `Q^{n-1,n}`).
    pub fn from_one_step(steps: Vec<StochMatrix>) -> Result<Self> {
        let horizon = steps.len();
        let dim = steps
            .first()
            .map(StochMatrix::dim)
            .ok_or_else(|| QspError::InvalidArgument("at least one step is required".into()))?;
        let tol = Tolerances::default().sum;
        let mut matrices: Vec<StochMatrix> = Vec::with_capacity(horizon * (horizon + 1) / 2);
        for (idx, step) in steps.into_iter().enumerate() {
            check_dim(dim, step.dim())?;
            let report = validate_matrix(&step, tol);
            if !report.ok {
                return Err(QspError::PostCondition { context: "MarkovFamily::from_one_step", report });
            }
            let n = idx + 1;
            for m in 0..n - 1 {
                let q = matrices[slot(m, n - 1)].compose(&step)?;
                matrices.push(q);
            }
            matrices.push(step);
        }
        Ok(Self { dim, horizon, matrices })
    }

    /// Every interval `(m, n)` maps to `q^(n-m)`.
    pub fn powers(q: &StochMatrix, horizon: usize) -> Result<Self> {
        Self::from_one_step(vec![q.clone(); horizon])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn matrix(&self, m: usize, n: usize) -> Result<&StochMatrix> {
        if m >= n || n > self.horizon {
            return Err(QspError::IntervalOutOfRange { m, n, horizon: self.horizon });
        }
        Ok(&self.matrices[slot(m, n)])
    }
}

/// `H^{m,n}_{ij} = Σ_l P^{[m,n]}_{il,j} x^(m)_l` for every interval of `fam`.
///
/// Each matrix is computed directly from the stored kernel and trajectory,
/// never by multiplying other `H` matrices.
pub fn associated_markov(fam: &QspFamily) -> Result<MarkovFamily> {
    let t = fam.horizon();
    let tol = fam.tolerances().sum;
    let mut matrices = Vec::with_capacity(t * (t + 1) / 2);
    for n in 1..=t {
        for m in 0..n {
            let h = slot_average(fam.kernel(m, n)?, fam.state(m)?)?;
            let report = validate_matrix(&h, tol);
            if !report.ok {
                return Err(QspError::PostCondition { context: "associated_markov", report });
            }
            matrices.push(h);
        }
    }
    Ok(MarkovFamily { dim: fam.dim(), horizon: t, matrices })
}

fn slot_average(p: &CubicKernel, x: &ProbVector) -> Result<StochMatrix> {
    check_dim(p.dim(), x.dim())?;
    StochMatrix::new(p.dim(), average_second_slot(p, x.as_slice()))
}

/// `max_{ij} |Q^{m,l}_{ij} − (Q^{m,n} Q^{n,l})_{ij}|` for `m < n < l`.
pub fn kc_residual(mf: &MarkovFamily, m: usize, n: usize, l: usize) -> Result<f64> {
    if !(m < n && n < l) {
        return Err(QspError::InvalidArgument(format!("need m < n < l, got ({m}, {n}, {l})")));
    }
    let direct = mf.matrix(m, l)?;
    let product = mf.matrix(m, n)?.compose(mf.matrix(n, l)?)?;
    Ok(direct.entries().iter().zip(product.entries()).fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
}

/// Max [`kc_residual`] over all admissible triples of the family.
pub fn kc_residual_max(mf: &MarkovFamily) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for l in 2..=mf.horizon() {
        worst = worst.max(kc_residual_max_ending_at(mf, l)?);
    }
    Ok(worst)
}

/// Max [`kc_residual`] over triples `(m, n, l)` with the given `l`.
pub fn kc_residual_max_ending_at(mf: &MarkovFamily, l: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in 1..l {
        for m in 0..n {
            worst = worst.max(kc_residual(mf, m, n, l)?);
        }
    }
    Ok(worst)
}

/// `(Q v)_j = Σ_i Q_{ij} v_i` for an arbitrary signed vector.
pub fn apply_markov_signed(q: &StochMatrix, v: &[f64]) -> Result<Vec<f64>> {
    check_dim(q.dim(), v.len())?;
    let mut out = vec![0.0; q.dim()];
    for (i, &vi) in v.iter().enumerate() {
        if vi == 0.0 {
            continue;
        }
        for (o, qij) in out.iter_mut().zip(q.row(i)) {
            *o += vi * qij;
        }
    }
    Ok(out)
}

/// `(Q x)_j = Σ_i Q_{ij} x_i`; maps the simplex into itself.
pub fn apply_markov(q: &StochMatrix, x: &ProbVector) -> Result<ProbVector> {
    let out = apply_markov_signed(q, x.as_slice())?;
    ProbVector::new(out)
}

/// `R^{m,n}_{ij}(x) = Σ_l P^{[m,n]}_{il,j} x_l`.
pub fn r_matrix(fam: &QspFamily, m: usize, n: usize, x: &ProbVector) -> Result<StochMatrix> {
    let r = slot_average(fam.kernel(m, n)?, x)?;
    let report = validate_matrix(&r, fam.tolerances().sum);
    if !report.ok {
        return Err(QspError::PostCondition { context: "r_matrix", report });
    }
    Ok(r)
}

/// `(P(x, y))_k = Σ_{i,j} P_{ij,k} x_i y_j`.
pub fn bilinear_apply(p: &CubicKernel, x: &ProbVector, y: &ProbVector) -> Result<ProbVector> {
    let n = p.dim();
    check_dim(n, x.dim())?;
    check_dim(n, y.dim())?;
    let mut out = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let w = x[i] * y[j];
            if w == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(p.row(i, j)) {
                *o += w * v;
            }
        }
    }
    ProbVector::new(out)
}
