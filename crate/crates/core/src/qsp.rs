//! Multi-step quadratic stochastic process families.
//!
//! A family is built from an initial distribution `x^(0)` and one-step
//! kernels `P^{[n-1,n]}` by right-split recursion on the interval length:
//!
//! ```text
//! type A:  P^{[m,n]} = compose_type_a(P^{[m,n-1]}, P^{[n-1,n]}, x^(n-1))
//! type B:  P^{[m,n]} = compose_type_b(P^{[m,n-1]}, P^{[n-1,n]}, x^(m))
//! x^(n)   = propagate(x^(0), P^{[0,n]})
//! ```
//!
//! Whether the resulting family satisfies the fundamental equation at every
//! other split point is measured by [`check_consistency`], not assumed.

use serde::{Deserialize, Serialize};

use crate::error::{QspError, Result};
use crate::simplex::{check_dim, l1_distance, validate_kernel, CubicKernel, ProbVector, Tolerances, MAX_DIM};

/// Default cap on the horizon; memory grows as `T^2 N^3`.
pub const MAX_HORIZON: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProcessType {
    #[serde(rename = "A")]
    TypeA,
    #[serde(rename = "B")]
    TypeB,
}

/// `x'_k = Σ_{i,j} P_{ij,k} x_i x_j`.
pub fn propagate(x: &ProbVector, p: &CubicKernel) -> Result<ProbVector> {
    propagate_tol(x, p, &Tolerances::default())
}

pub(crate) fn propagate_tol(x: &ProbVector, p: &CubicKernel, tol: &Tolerances) -> Result<ProbVector> {
    let n = p.dim();
    check_dim(n, x.dim())?;
    let xs = x.as_slice();
    let mut out = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let w = xs[i] * xs[j];
            if w == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(p.row(i, j)) {
                *o += w * v;
            }
        }
    }
    ProbVector::with_tolerances(out, tol).map_err(|e| match e {
        QspError::NotOnSimplex(msg) => QspError::NotOnSimplex(format!("propagate output: {msg}")),
        other => other,
    })
}

/// Type-A composition
/// `P^{[s,t]}_{ij,k} = Σ_{m,l} P^{[s,r]}_{ij,m} P^{[r,t]}_{ml,k} x^(r)_l`.
///
/// Contracts `l` first (`B_{m,k} = Σ_l P^{[r,t]}_{ml,k} x_l`, O(N^3)), then
/// applies `B` to every row of `p_sr` (O(N^4)).
pub fn compose_type_a(p_sr: &CubicKernel, p_rt: &CubicKernel, x_r: &ProbVector) -> Result<CubicKernel> {
    compose_type_a_tol(p_sr, p_rt, x_r, &Tolerances::default())
}

pub(crate) fn compose_type_a_tol(
    p_sr: &CubicKernel,
    p_rt: &CubicKernel,
    x_r: &ProbVector,
    tol: &Tolerances,
) -> Result<CubicKernel> {
    let n = p_sr.dim();
    check_dim(n, p_rt.dim())?;
    check_dim(n, x_r.dim())?;

    let b = average_second_slot(p_rt, x_r.as_slice());
    let mut out = CubicKernel::from_fn(n, |_, _, _| 0.0);
    for i in 0..n {
        for j in i..n {
            let row = row_times_matrix(p_sr.row(i, j), &b, n);
            out.row_mut(i, j).copy_from_slice(&row);
            if i != j {
                out.row_mut(j, i).copy_from_slice(&row);
            }
        }
    }
    check_post(out, tol, "compose_type_a")
}

/// Type-B composition
/// `P^{[s,t]}_{ij,k} = Σ_{m,l,g,h} P^{[s,r]}_{im,l} P^{[s,r]}_{jg,h} P^{[r,t]}_{lh,k} x^(s)_m x^(s)_g`.
///
/// Factorized as `A_{i,l} = Σ_m P^{[s,r]}_{im,l} x_m` and
/// `P^{[s,t]}_{ij,k} = Σ_{l,h} A_{i,l} A_{j,h} P^{[r,t]}_{lh,k}`, evaluated in
/// two O(N^4) stages. Only `i <= j` is computed; the rest is mirrored, so the
/// output is exactly symmetric.
pub fn compose_type_b(p_sr: &CubicKernel, p_rt: &CubicKernel, x_s: &ProbVector) -> Result<CubicKernel> {
    compose_type_b_tol(p_sr, p_rt, x_s, &Tolerances::default())
}

pub(crate) fn compose_type_b_tol(
    p_sr: &CubicKernel,
    p_rt: &CubicKernel,
    x_s: &ProbVector,
    tol: &Tolerances,
) -> Result<CubicKernel> {
    let n = p_sr.dim();
    check_dim(n, p_rt.dim())?;
    check_dim(n, x_s.dim())?;

    let a = average_second_slot(p_sr, x_s.as_slice());
    // c[(i*n + h)*n + k] = Σ_l A_{i,l} P^{[r,t]}_{lh,k}
    let mut c = vec![0.0; n * n * n];
    for i in 0..n {
        for l in 0..n {
            let a_il = a[i * n + l];
            if a_il == 0.0 {
                continue;
            }
            for h in 0..n {
                let dst = &mut c[(i * n + h) * n..(i * n + h + 1) * n];
                for (d, v) in dst.iter_mut().zip(p_rt.row(l, h)) {
                    *d += a_il * v;
                }
            }
        }
    }
    let mut out = CubicKernel::from_fn(n, |_, _, _| 0.0);
    let mut row = vec![0.0; n];
    for i in 0..n {
        for j in i..n {
            row.iter_mut().for_each(|v| *v = 0.0);
            for h in 0..n {
                let a_jh = a[j * n + h];
                if a_jh == 0.0 {
                    continue;
                }
                for (d, v) in row.iter_mut().zip(&c[(i * n + h) * n..(i * n + h + 1) * n]) {
                    *d += a_jh * v;
                }
            }
            out.row_mut(i, j).copy_from_slice(&row);
            if i != j {
                out.row_mut(j, i).copy_from_slice(&row);
            }
        }
    }
    check_post(out, tol, "compose_type_b")
}

/// `M_{a,k} = Σ_b P_{ab,k} x_b`, row-major `N x N`.
///
/// Rows are renormalized. `M` is stochastic in exact arithmetic, but the
/// family recursion feeds each level's rounding error back in through the
/// kernel (type B uses it twice) and the trajectory, so without this the
/// row-sum error doubles per time step.
pub(crate) fn average_second_slot(p: &CubicKernel, x: &[f64]) -> Vec<f64> {
    let n = p.dim();
    let mut m = vec![0.0; n * n];
    for a in 0..n {
        let dst = &mut m[a * n..(a + 1) * n];
        for (b, &xb) in x.iter().enumerate() {
            if xb == 0.0 {
                continue;
            }
            for (d, v) in dst.iter_mut().zip(p.row(a, b)) {
                *d += xb * v;
            }
        }
        let total: f64 = dst.iter().sum();
        dst.iter_mut().for_each(|v| *v /= total);
    }
    m
}

fn row_times_matrix(row: &[f64], m: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (a, &w) in row.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(&m[a * n..(a + 1) * n]) {
            *o += w * v;
        }
    }
    out
}

fn check_post(k: CubicKernel, tol: &Tolerances, context: &'static str) -> Result<CubicKernel> {
    let report = validate_kernel(&k, tol.sum);
    if report.ok {
        Ok(k)
    } else {
        Err(QspError::PostCondition { context, report })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildOptions {
    pub tolerances: Tolerances,
    pub max_horizon: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { tolerances: Tolerances::default(), max_horizon: MAX_HORIZON }
    }
}

/// A discrete-time q.s.p. truncated to dimension `N` and horizon `T`, with
/// every multi-step kernel `P^{[m,n]}` (`0 <= m < n <= T`) and the trajectory
/// `x^(0..=T)` memoized.
#[derive(Clone, Debug, PartialEq)]
pub struct QspFamily {
    dim: usize,
    horizon: usize,
    ptype: ProcessType,
    tolerances: Tolerances,
    // slot(m, n) = n(n-1)/2 + m
    kernels: Vec<CubicKernel>,
    trajectory: Vec<ProbVector>,
}

#[inline]
fn slot(m: usize, n: usize) -> usize {
    n * (n - 1) / 2 + m
}

impl QspFamily {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn ptype(&self) -> ProcessType {
        self.ptype
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn x0(&self) -> &ProbVector {
        &self.trajectory[0]
    }

    pub(crate) fn check_interval(&self, m: usize, n: usize) -> Result<()> {
        if m >= n || n > self.horizon {
            return Err(QspError::IntervalOutOfRange { m, n, horizon: self.horizon });
        }
        Ok(())
    }

    /// `P^{[m,n]}`.
    pub fn kernel(&self, m: usize, n: usize) -> Result<&CubicKernel> {
        self.check_interval(m, n)?;
        Ok(&self.kernels[slot(m, n)])
    }

    /// `P^{[n-1,n]}` for `1 <= n <= T`.
    pub fn one_step(&self, n: usize) -> Result<&CubicKernel> {
        if n == 0 {
            return Err(QspError::IntervalOutOfRange { m: 0, n: 0, horizon: self.horizon });
        }
        self.kernel(n - 1, n)
    }

    /// `x^(n)` for `0 <= n <= T`.
    pub fn state(&self, n: usize) -> Result<&ProbVector> {
        self.trajectory.get(n).ok_or(QspError::IntervalOutOfRange { m: 0, n, horizon: self.horizon })
    }

    pub fn trajectory(&self) -> &[ProbVector] {
        &self.trajectory
    }

    fn compose(&self, p_sr: &CubicKernel, p_rt: &CubicKernel, s: usize, r: usize) -> Result<CubicKernel> {
        match self.ptype {
            ProcessType::TypeA => compose_type_a_tol(p_sr, p_rt, &self.trajectory[r], &self.tolerances),
            ProcessType::TypeB => compose_type_b_tol(p_sr, p_rt, &self.trajectory[s], &self.tolerances),
        }
    }
}

pub fn build_family(
    x0: ProbVector,
    one_step: Vec<CubicKernel>,
    ptype: ProcessType,
    horizon: usize,
) -> Result<QspFamily> {
    build_family_with(x0, one_step, ptype, horizon, &BuildOptions::default())
}

/// Builds the family; `one_step[n - 1]` holds `P^{[n-1,n]}` and its length
/// must equal `horizon`.
pub fn build_family_with(
    x0: ProbVector,
    one_step: Vec<CubicKernel>,
    ptype: ProcessType,
    horizon: usize,
    opts: &BuildOptions,
) -> Result<QspFamily> {
    if horizon == 0 || horizon > opts.max_horizon {
        return Err(QspError::InvalidArgument(format!("horizon must be in 1..={}, got {horizon}", opts.max_horizon)));
    }
    check_dim(horizon, one_step.len())?;
    let dim = x0.dim();
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(QspError::InvalidArgument(format!("dimension must be in 2..={MAX_DIM}, got {dim}")));
    }
    let tol = opts.tolerances;
    for (idx, k) in one_step.iter().enumerate() {
        check_dim(dim, k.dim())?;
        let report = validate_kernel(k, tol.sum);
        if !report.ok || report.max_negativity > tol.entry {
            return Err(QspError::InvalidKernel { step: idx + 1, report });
        }
    }

    let mut fam = QspFamily {
        dim,
        horizon,
        ptype,
        tolerances: tol,
        kernels: Vec::with_capacity(horizon * (horizon + 1) / 2),
        trajectory: Vec::with_capacity(horizon + 1),
    };
    fam.trajectory.push(x0);

    for (idx, step) in one_step.into_iter().enumerate() {
        let n = idx + 1;
        // slots for (0..n-1, n) precede slot(n-1, n)
        for m in 0..n - 1 {
            let p = fam.compose(&fam.kernels[slot(m, n - 1)], &step, m, n - 1)?;
            fam.kernels.push(p);
        }
        fam.kernels.push(step);
        let x_n = propagate_tol(&fam.trajectory[0], &fam.kernels[slot(0, n)], &tol)?;
        fam.trajectory.push(x_n);
    }
    Ok(fam)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TripleResidual {
    pub s: usize,
    pub r: usize,
    pub t: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub max_residual: f64,
    pub worst_triple: Option<(usize, usize, usize)>,
    pub per_triple: Vec<TripleResidual>,
    /// `max_residual <= tol`.
    pub within_tolerance: bool,
}

/// Re-composes every stored `P^{[s,t]}` through every admissible split
/// `s < r < t` and reports the max entrywise deviation from the stored kernel.
pub fn check_consistency(fam: &QspFamily, tol: f64) -> Result<ConsistencyReport> {
    let mut per_triple = Vec::new();
    let mut max_residual = 0.0;
    let mut worst_triple = None;
    for t in 2..=fam.horizon {
        for s in 0..t - 1 {
            let stored = fam.kernel(s, t)?;
            for r in s + 1..t {
                let composed = fam.compose(fam.kernel(s, r)?, fam.kernel(r, t)?, s, r)?;
                let residual = stored.max_abs_diff(&composed)?;
                if worst_triple.is_none() || residual > max_residual {
                    max_residual = residual;
                    worst_triple = Some((s, r, t));
                }
                per_triple.push(TripleResidual { s, r, t, residual });
            }
        }
    }
    Ok(ConsistencyReport { max_residual, worst_triple, per_triple, within_tolerance: max_residual <= tol })
}

/// `‖x^(n) − propagate(x^(m), P^{[m,n]})‖₁`.
pub fn trajectory_residual(fam: &QspFamily, m: usize, n: usize) -> Result<f64> {
    let p = fam.kernel(m, n)?;
    let pushed = propagate_tol(&fam.trajectory[m], p, &fam.tolerances)?;
    l1_distance(&fam.trajectory[n], &pushed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use crate::simplex::validate_kernel;
    use approx::assert_abs_diff_eq;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    fn sorting_kernel() -> CubicKernel {
        CubicKernel::new(2, vec![1.0, 0.0, 0.5, 0.5, 0.5, 0.5, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn propagate_examples() {
        let p = pv(&[0.3, 0.7]);
        let out = propagate(&pv(&[0.9, 0.1]), &CubicKernel::constant(&p)).unwrap();
        assert_abs_diff_eq!(out.as_slice(), p.as_slice(), epsilon = 1e-15);

        let x = pv(&[0.2, 0.8]);
        let out = propagate(&x, &CubicKernel::identity_mix(2)).unwrap();
        assert_abs_diff_eq!(out.as_slice(), x.as_slice(), epsilon = 1e-15);

        // 0.25*1 + 2*0.25*0.5 + 0 = 0.5
        let out = propagate(&pv(&[0.5, 0.5]), &sorting_kernel()).unwrap();
        assert_abs_diff_eq!(out.as_slice(), &[0.5, 0.5][..], epsilon = 1e-15);
    }

    #[test]
    fn propagate_dimension_mismatch() {
        let err = propagate(&ProbVector::uniform(3).unwrap(), &sorting_kernel()).unwrap_err();
        assert!(matches!(err, QspError::DimensionMismatch { .. }));
    }

    #[test]
    fn constant_compositions() {
        let p = pv(&[0.2, 0.5, 0.3]);
        let q = pv(&[0.6, 0.1, 0.3]);
        let (kp, kq) = (CubicKernel::constant(&p), CubicKernel::constant(&q));
        let x = pv(&[0.1, 0.1, 0.8]);
        for out in [compose_type_a(&kp, &kq, &x).unwrap(), compose_type_b(&kp, &kq, &x).unwrap()] {
            assert!(out.max_abs_diff(&kq).unwrap() < 1e-15);
        }
    }

    #[test]
    fn type_a_constant_then_identity_mix() {
        // Σ_m p_m (δ_mk + x_k)/2 = (p_k + x_k)/2
        let p = pv(&[0.3, 0.7]);
        let x = pv(&[0.9, 0.1]);
        let out = compose_type_a(&CubicKernel::constant(&p), &CubicKernel::identity_mix(2), &x).unwrap();
        let brute = reference::compose_type_a_naive(&CubicKernel::constant(&p), &CubicKernel::identity_mix(2), &x);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(out.row(i, j), &[0.6, 0.4][..], epsilon = 1e-15);
                assert_abs_diff_eq!(brute.row(i, j), &[0.6, 0.4][..], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn type_b_is_exactly_symmetric() {
        let k = CubicKernel::from_fn(3, |i, j, c| {
            let base = [(i + j) as f64 + 1.0, (i * j) as f64 + 0.5, 2.0];
            base[c] / base.iter().sum::<f64>()
        });
        let x = pv(&[0.2, 0.3, 0.5]);
        let out = compose_type_b(&k, &k, &x).unwrap();
        assert_eq!(validate_kernel(&out, 1e-10).max_symmetry_defect, 0.0);
    }

    #[test]
    fn family_of_constants() {
        let ps: Vec<ProbVector> = (0..4).map(|n| pv(&[0.1 * (n + 1) as f64, 1.0 - 0.1 * (n + 1) as f64])).collect();
        for ptype in [ProcessType::TypeA, ProcessType::TypeB] {
            let steps = ps.iter().map(CubicKernel::constant).collect();
            let fam = build_family(pv(&[0.5, 0.5]), steps, ptype, 4).unwrap();
            for n in 1..=4 {
                for m in 0..n {
                    let expected = CubicKernel::constant(&ps[n - 1]);
                    assert!(fam.kernel(m, n).unwrap().max_abs_diff(&expected).unwrap() < 1e-15);
                }
            }
            let report = check_consistency(&fam, 1e-12).unwrap();
            assert!(report.max_residual <= 1e-12);
            assert!(report.within_tolerance);
            assert_eq!(report.per_triple.len(), 10); // C(5, 3) triples for T = 4
        }
    }

    #[test]
    fn identity_mix_fixes_trajectory() {
        let x0 = pv(&[0.2, 0.8]);
        let steps = vec![CubicKernel::identity_mix(2); 5];
        let fam = build_family(x0.clone(), steps, ProcessType::TypeA, 5).unwrap();
        for x in fam.trajectory() {
            assert_abs_diff_eq!(x.as_slice(), x0.as_slice(), epsilon = 1e-13);
        }
    }

    #[test]
    fn build_rejects_bad_input() {
        let bad = CubicKernel::new(2, vec![1.0, 0.0, 0.2, 0.8, 0.5, 0.5, 0.0, 1.0]).unwrap();
        let steps = vec![CubicKernel::identity_mix(2), bad];
        let err = build_family(pv(&[0.5, 0.5]), steps, ProcessType::TypeA, 2).unwrap_err();
        assert!(matches!(err, QspError::InvalidKernel { step: 2, .. }));

        let steps = vec![CubicKernel::identity_mix(3)];
        let err = build_family(pv(&[0.5, 0.5]), steps, ProcessType::TypeA, 1).unwrap_err();
        assert!(matches!(err, QspError::DimensionMismatch { .. }));

        let err = build_family(pv(&[0.5, 0.5]), vec![], ProcessType::TypeA, 0).unwrap_err();
        assert!(matches!(err, QspError::InvalidArgument(_)));
    }

    #[test]
    fn interval_bounds() {
        let fam = build_family(pv(&[0.5, 0.5]), vec![sorting_kernel(); 3], ProcessType::TypeB, 3).unwrap();
        assert!(fam.kernel(0, 3).is_ok());
        assert!(fam.kernel(2, 2).is_err());
        assert!(fam.kernel(0, 4).is_err());
        assert!(fam.one_step(0).is_err());
        assert!(trajectory_residual(&fam, 1, 4).is_err());
        assert_eq!(trajectory_residual(&fam, 0, 3).unwrap(), 0.0);
    }
}
