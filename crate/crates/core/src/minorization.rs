//! Minorization certificates and the λ-sequence machinery behind them.
//!
//! A Markov family is *minorized* at column `k0` by a sequence `λ_n ∈ (0,1)`
//! when every one-step matrix satisfies `Q^{n-1,n}_{i,k0} >= λ_n` for all rows
//! `i`; a q.s.p. is minorized when `P^{[n-1,n]}_{ij,k0} >= λ_n` for all pairs.
//! If additionally `Σ λ_n = ∞` and
//!
//! ```text
//! E_n = Σ_{j<=n} Π_{k<=n}(1-λ_k) / (1-λ_j)  →  0,
//! ```
//!
//! the row spread of `Q^{m,n}` vanishes as `n → ∞`. Neither condition is
//! decidable from finitely many terms: analytic families (`constant`,
//! `harmonic`, `inverse_sqrt`) get closed-form verdicts, custom sequences get
//! finite-horizon trend checks that are flagged `heuristic`.

use serde::{Deserialize, Serialize};

use crate::ergodicity::row_spread;
use crate::error::{QspError, Result};
use crate::markov::{r_matrix, MarkovFamily};
use crate::qsp::QspFamily;
use crate::simplex::{l1_diff, StochMatrix};

/// Detected λ values are clamped into `[LAMBDA_EPS, 1 - LAMBDA_EPS]`.
pub const LAMBDA_EPS: f64 = 1e-12;

/// Bound on the running ratio `Σ_{i<=n} λ_i/(1-λ_i) / n` for custom sequences.
pub const DEFAULT_RATIO_CAP: f64 = 100.0;

const TREND_WINDOW: usize = 10;
const HEURISTIC_PRODUCT_CUTOFF: f64 = 0.05;
const HEURISTIC_DECAY_CUTOFF: f64 = 0.1;
const HEURISTIC_GROWTH_FACTOR: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LambdaFamily {
    /// `λ_n = c`.
    Constant {
        c: f64,
    },
    /// `λ_n = c / (n + 1)`.
    Harmonic {
        c: f64,
    },
    /// `λ_n = c / sqrt(n + 1)`.
    InverseSqrt {
        c: f64,
    },
    Custom,
}

/// `λ_1, …, λ_T`, each strictly inside (0, 1).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaSequence {
    values: Vec<f64>,
    family: LambdaFamily,
}

impl LambdaSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::tagged(values, LambdaFamily::Custom)
    }

    fn tagged(values: Vec<f64>, family: LambdaFamily) -> Result<Self> {
        if values.is_empty() {
            return Err(QspError::InvalidArgument("λ sequence must be nonempty".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && **v < 1.0)) {
            return Err(QspError::InvalidArgument(format!("λ_{} = {v} is outside (0, 1)", i + 1)));
        }
        Ok(Self { values, family })
    }

    pub fn constant(c: f64, len: usize) -> Result<Self> {
        Self::tagged(vec![c; len], LambdaFamily::Constant { c })
    }

    pub fn harmonic(c: f64, len: usize) -> Result<Self> {
        check_scale(c)?;
        Self::tagged((1..=len).map(|n| c / (n as f64 + 1.0)).collect(), LambdaFamily::Harmonic { c })
    }

    pub fn inverse_sqrt(c: f64, len: usize) -> Result<Self> {
        check_scale(c)?;
        Self::tagged((1..=len).map(|n| c / (n as f64 + 1.0).sqrt()).collect(), LambdaFamily::InverseSqrt { c })
    }

    /// Builds the sequence described by `family` with `len` terms.
    pub fn from_family(family: LambdaFamily, len: usize) -> Result<Self> {
        match family {
            LambdaFamily::Constant { c } => Self::constant(c, len),
            LambdaFamily::Harmonic { c } => Self::harmonic(c, len),
            LambdaFamily::InverseSqrt { c } => Self::inverse_sqrt(c, len),
            LambdaFamily::Custom => Err(QspError::InvalidArgument("custom sequences need explicit values".into())),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `λ_n`, 1-based.
    pub fn get(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn family(&self) -> LambdaFamily {
        self.family
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `prefix[n] = Π_{k<=n} (1 - λ_k)`, `prefix[0] = 1`.
    fn prefix_products(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() + 1);
        out.push(1.0);
        for &l in &self.values {
            out.push(out.last().unwrap() * (1.0 - l));
        }
        out
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.len() {
            return Err(QspError::IndexOutOfRange { index: n, dim: self.len() });
        }
        Ok(())
    }
}

fn check_scale(c: f64) -> Result<()> {
    if c > 0.0 && c <= 1.0 {
        Ok(())
    } else {
        Err(QspError::InvalidArgument(format!("scale c must be in (0, 1], got {c}")))
    }
}

/// Unrolled bound
/// `a_n <= a_1 Π_{i=2..n}(1-λ_i) + Σ_{j=1..n} Π_{k=1..n}(1-λ_k)/(1-λ_j)`.
pub fn lemma_bound(a1: f64, lambdas: &LambdaSequence, n: usize) -> Result<f64> {
    lambdas.check_index(n)?;
    if a1.is_nan() || a1 < 0.0 {
        return Err(QspError::InvalidArgument(format!("a_1 must be nonnegative, got {a1}")));
    }
    let tail: f64 = (2..=n).map(|i| 1.0 - lambdas.get(i)).product();
    Ok(a1 * tail + decay_expression(lambdas, n))
}

/// `E_n = Σ_{j<=n} Π_{k<=n}(1-λ_k) / (1-λ_j)`.
pub fn decay_expression(lambdas: &LambdaSequence, n: usize) -> f64 {
    let prod: f64 = lambdas.values[..n].iter().map(|l| 1.0 - l).product();
    lambdas.values[..n].iter().map(|l| prod / (1.0 - l)).sum()
}

/// The extremal sequence `a_n = (1-λ_n) a_{n-1} + Π_{k<=n}(1-λ_k)` started at `a0`.
pub fn sequence_oracle(a0: f64, lambdas: &LambdaSequence, n: usize) -> Result<f64> {
    if a0.is_nan() || a0 < 0.0 {
        return Err(QspError::InvalidArgument(format!("a_0 must be nonnegative, got {a0}")));
    }
    if n > lambdas.len() {
        return Err(QspError::IndexOutOfRange { index: n, dim: lambdas.len() });
    }
    let mut a = a0;
    let mut prod = 1.0;
    for &l in &lambdas.values[..n] {
        prod *= 1.0 - l;
        a = (1.0 - l) * a + prod;
    }
    Ok(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionVerdict {
    pub holds: bool,
    /// Verdict from finite-horizon trends rather than a closed form.
    pub heuristic: bool,
    /// Diagnostic value at the horizon.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaConditions {
    /// `Σ λ_n = ∞`; value is the partial sum at the horizon.
    pub divergence: ConditionVerdict,
    /// `E_n → 0`; value is `E_T`.
    pub decay: ConditionVerdict,
    /// `Π_{k<=T}(1-λ_k)`.
    pub product_at_horizon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorollaryConditions {
    /// `n Π_{k<=n}(1-λ_k) → 0`; value at the horizon.
    pub n_product: ConditionVerdict,
    /// `n Π` over the last (up to 10) indices.
    pub n_product_tail: Vec<f64>,
    /// `Σ_{i<=n} λ_i/(1-λ_i) = O(n)`; value is the running ratio at the horizon.
    pub linear_growth: ConditionVerdict,
    pub max_ratio: f64,
    pub ratio_cap: f64,
    /// `C = max_n Σ_{j<=n} 1/(1-λ_j) / n`.
    pub c_constant: f64,
    /// `C · T · Π_{k<=T}(1-λ_k)`, an upper bound for `E_T`.
    pub decay_bound: f64,
    /// Both corollary conditions hold, hence `E_n → 0`.
    pub implies_decay: bool,
}

pub fn check_lemma_conditions(lambdas: &LambdaSequence) -> LemmaConditions {
    let t = lambdas.len();
    let prefix = lambdas.prefix_products();
    let partial_sum: f64 = lambdas.values.iter().sum();
    let e_t = decay_expression(lambdas, t);
    let (divergence, decay) = match lambdas.family {
        LambdaFamily::Constant { .. } | LambdaFamily::InverseSqrt { .. } => {
            (exact(true, partial_sum), exact(true, e_t))
        }
        LambdaFamily::Harmonic { .. } => (exact(true, partial_sum), exact(false, e_t)),
        LambdaFamily::Custom => {
            let earlier = decay_expression(lambdas, t.saturating_sub(TREND_WINDOW).max(1));
            (
                heuristic(prefix[t] <= HEURISTIC_PRODUCT_CUTOFF, partial_sum),
                heuristic(e_t <= HEURISTIC_DECAY_CUTOFF && e_t <= earlier, e_t),
            )
        }
    };
    LemmaConditions { divergence, decay, product_at_horizon: prefix[t] }
}

pub fn check_corollary_conditions(lambdas: &LambdaSequence) -> CorollaryConditions {
    check_corollary_conditions_with_cap(lambdas, DEFAULT_RATIO_CAP)
}

pub fn check_corollary_conditions_with_cap(lambdas: &LambdaSequence, ratio_cap: f64) -> CorollaryConditions {
    let t = lambdas.len();
    let prefix = lambdas.prefix_products();
    let n_prod: Vec<f64> = (1..=t).map(|n| n as f64 * prefix[n]).collect();
    let ratios = running_ratios(lambdas.values.iter().map(|l| l / (1.0 - l)));
    let c_constant = running_ratios(lambdas.values.iter().map(|l| 1.0 / (1.0 - l))).into_iter().fold(0.0, f64::max);
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let tail_start = t.saturating_sub(TREND_WINDOW);
    let n_product_tail = n_prod[tail_start..].to_vec();
    let n_prod_t = n_prod[t - 1];
    let ratio_t = ratios[t - 1];

    let (n_product, linear_growth) = match lambdas.family {
        LambdaFamily::Constant { .. } | LambdaFamily::InverseSqrt { .. } => {
            (exact(true, n_prod_t), exact(true, ratio_t))
        }
        // n Π ~ n^{1-c}, Σ λ/(1-λ) ~ c ln n
        LambdaFamily::Harmonic { .. } => (exact(false, n_prod_t), exact(true, ratio_t)),
        LambdaFamily::Custom => {
            let non_increasing = n_product_tail.windows(2).all(|w| w[1] <= w[0]);
            let half = ratios[t.div_ceil(2) - 1];
            (
                heuristic(n_prod_t <= HEURISTIC_DECAY_CUTOFF && non_increasing, n_prod_t),
                heuristic(max_ratio <= ratio_cap && ratio_t <= HEURISTIC_GROWTH_FACTOR * half, ratio_t),
            )
        }
    };
    CorollaryConditions {
        implies_decay: n_product.holds && linear_growth.holds,
        n_product,
        n_product_tail,
        linear_growth,
        max_ratio,
        ratio_cap,
        c_constant,
        decay_bound: c_constant * t as f64 * prefix[t],
    }
}

fn running_ratios(terms: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    terms
        .enumerate()
        .map(|(i, v)| {
            acc += v;
            acc / (i + 1) as f64
        })
        .collect()
}

fn exact(holds: bool, value: f64) -> ConditionVerdict {
    ConditionVerdict { holds, heuristic: false, value }
}

fn heuristic(holds: bool, value: f64) -> ConditionVerdict {
    ConditionVerdict { holds, heuristic: true, value }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Markov,
    Qsp,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinorizationCertificate {
    pub k0: usize,
    pub side: Side,
    /// Clamped column floors, `lambdas.get(n)` belongs to step `(n-1, n)`.
    pub lambdas: LambdaSequence,
    /// Unclamped minimum over the horizon.
    pub raw_min: f64,
    /// Number of λ values moved by clamping.
    pub clamped: usize,
    pub lemma: LemmaConditions,
    pub corollary: CorollaryConditions,
    /// q.s.p. side only: `min_{n,i} H^{n-1,n}_{i,k0} − λ_n`.
    pub transfer_margin: Option<f64>,
}

impl MinorizationCertificate {
    pub fn min_lambda(&self) -> f64 {
        self.lambdas.min()
    }

    /// Whether the λ conditions that drive decay are reported holding.
    pub fn conditions_hold(&self) -> bool {
        self.lemma.divergence.holds && (self.lemma.decay.holds || self.corollary.implies_decay)
    }
}

/// `floors[c][n-1]`: the column-`c` floor of step `n`. Picks the column with
/// the largest worst-case floor; ties go to the smaller index.
fn pick_column(floors: &[Vec<f64>]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (c, col) in floors.iter().enumerate() {
        let worst = col.iter().copied().fold(f64::INFINITY, f64::min);
        if best.is_none_or(|(_, b)| worst > b) {
            best = Some((c, worst));
        }
    }
    best.filter(|(_, w)| *w > 0.0)
}

fn certificate(k0: usize, side: Side, raw: &[f64]) -> Result<MinorizationCertificate> {
    let clamped = raw.iter().filter(|&&v| !(LAMBDA_EPS..=1.0 - LAMBDA_EPS).contains(&v)).count();
    let values = raw.iter().map(|v| v.clamp(LAMBDA_EPS, 1.0 - LAMBDA_EPS)).collect();
    let lambdas = LambdaSequence::new(values)?;
    Ok(MinorizationCertificate {
        k0,
        side,
        raw_min: raw.iter().copied().fold(f64::INFINITY, f64::min),
        clamped,
        lemma: check_lemma_conditions(&lambdas),
        corollary: check_corollary_conditions(&lambdas),
        lambdas,
        transfer_margin: None,
    })
}

/// `min_i Q^{n-1,n}_{i,c}` for `n = 1..=T`.
pub fn column_floor(mf: &MarkovFamily, c: usize) -> Result<Vec<f64>> {
    if c >= mf.dim() {
        return Err(QspError::IndexOutOfRange { index: c, dim: mf.dim() });
    }
    (1..=mf.horizon())
        .map(|n| {
            let q = mf.matrix(n - 1, n)?;
            Ok((0..q.dim()).map(|i| q.get(i, c)).fold(f64::INFINITY, f64::min))
        })
        .collect()
}

pub fn detect_minorization_markov(mf: &MarkovFamily) -> Result<Option<MinorizationCertificate>> {
    let floors = (0..mf.dim()).map(|c| column_floor(mf, c)).collect::<Result<Vec<_>>>()?;
    match pick_column(&floors) {
        Some((k0, _)) => certificate(k0, Side::Markov, &floors[k0]).map(Some),
        None => Ok(None),
    }
}

/// Selects `k0` from `min_{i,j} P^{[n-1,n]}_{ij,c}` and checks that the floor
/// transfers to the associated matrices `H^{n-1,n}`.
pub fn detect_minorization_qsp(fam: &QspFamily) -> Result<Option<MinorizationCertificate>> {
    let dim = fam.dim();
    let t = fam.horizon();
    let mut floors = vec![vec![f64::INFINITY; t]; dim];
    for n in 1..=t {
        let p = fam.one_step(n)?;
        for i in 0..dim {
            for j in i..dim {
                for (c, &v) in p.row(i, j).iter().enumerate() {
                    floors[c][n - 1] = floors[c][n - 1].min(v);
                }
            }
        }
    }
    let Some((k0, _)) = pick_column(&floors) else {
        return Ok(None);
    };
    let mut cert = certificate(k0, Side::Qsp, &floors[k0])?;
    let mut margin = f64::INFINITY;
    for n in 1..=t {
        let h = r_matrix(fam, n - 1, n, fam.state(n - 1)?)?;
        for i in 0..dim {
            margin = margin.min(h.get(i, k0) - floors[k0][n - 1]);
        }
    }
    cert.transfer_margin = Some(margin);
    Ok(Some(cert))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationCell {
    pub l: usize,
    pub n: usize,
    /// `max_i Q^{l,n}_{i,k0}`.
    pub max: f64,
    /// `min_i Q^{l,n}_{i,k0}`.
    pub min: f64,
    pub gap: f64,
    /// `Π_{k=l+1}^{n-1} (1 - λ_k)`.
    pub bound: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationReport {
    pub k0: usize,
    pub cells: Vec<OscillationCell>,
    pub min_slack: f64,
}

fn check_cert_fits(mf: &MarkovFamily, cert: &MinorizationCertificate) -> Result<()> {
    if cert.lambdas.len() != mf.horizon() {
        return Err(QspError::InvalidArgument(format!(
            "certificate covers {} steps, family horizon is {}",
            cert.lambdas.len(),
            mf.horizon()
        )));
    }
    if cert.k0 >= mf.dim() {
        return Err(QspError::IndexOutOfRange { index: cert.k0, dim: mf.dim() });
    }
    Ok(())
}

/// Column-`k0` oscillation `M_{l,n} − m_{l,n}` against `Π_{k=l+1}^{n-1}(1-λ_k)`
/// for every `0 <= l < n <= T`.
pub fn oscillation_check(mf: &MarkovFamily, cert: &MinorizationCertificate) -> Result<OscillationReport> {
    check_cert_fits(mf, cert)?;
    let k0 = cert.k0;
    let mut cells = Vec::new();
    let mut min_slack = f64::INFINITY;
    for n in 1..=mf.horizon() {
        for l in 0..n {
            let q = mf.matrix(l, n)?;
            let col = (0..q.dim()).map(|i| q.get(i, k0));
            let (max, min) = col.fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), v| (hi.max(v), lo.min(v)));
            let bound: f64 = (l + 1..n).map(|k| 1.0 - cert.lambdas.get(k)).product();
            let gap = max - min;
            let slack = bound - gap;
            min_slack = min_slack.min(slack);
            cells.push(OscillationCell { l, n, max, min, gap, bound, slack });
        }
    }
    Ok(OscillationReport { k0, cells, min_slack })
}

/// Max over `(i, j, n)` of
/// `Σ_k |Q^{m,n}_{ik} − Q^{m,n}_{jk}| − (1-λ_n) Σ_l |Q^{m,n-1}_{il} − Q^{m,n-1}_{jl}| − |Q^{m,n}_{ik0} − Q^{m,n}_{jk0}|`,
/// with `Q^{m,m}` the identity. Nonpositive when the recursion holds.
pub fn defect_recursion_check(mf: &MarkovFamily, cert: &MinorizationCertificate, m: usize) -> Result<f64> {
    check_cert_fits(mf, cert)?;
    if m >= mf.horizon() {
        return Err(QspError::IntervalOutOfRange { m, n: mf.horizon(), horizon: mf.horizon() });
    }
    let dim = mf.dim();
    let k0 = cert.k0;
    let identity = StochMatrix::identity(dim);
    let mut worst = f64::NEG_INFINITY;
    for n in m + 1..=mf.horizon() {
        let cur = mf.matrix(m, n)?;
        let prev = if n == m + 1 { &identity } else { mf.matrix(m, n - 1)? };
        let shrink = 1.0 - cert.lambdas.get(n);
        for i in 0..dim {
            for j in i + 1..dim {
                let lhs = l1_diff(cur.row(i), cur.row(j));
                let rhs = shrink * l1_diff(prev.row(i), prev.row(j)) + (cur.get(i, k0) - cur.get(j, k0)).abs();
                worst = worst.max(lhs - rhs);
            }
        }
    }
    Ok(worst)
}

/// [`defect_recursion_check`] maximized over every start time.
pub fn defect_recursion_check_all(mf: &MarkovFamily, cert: &MinorizationCertificate) -> Result<f64> {
    (0..mf.horizon()).try_fold(f64::NEG_INFINITY, |acc, m| Ok(acc.max(defect_recursion_check(mf, cert, m)?)))
}

/// Upper envelope for `markov_defect(m, n)` implied by the certificate:
/// `a_{m+1}` is the observed defect and
/// `a_k = (1-λ_k) a_{k-1} + Π_{j=m+1}^{k-1}(1-λ_j)` thereafter.
pub fn markov_defect_envelope(mf: &MarkovFamily, cert: &MinorizationCertificate, m: usize, n: usize) -> Result<f64> {
    check_cert_fits(mf, cert)?;
    let mut a = row_spread(mf.matrix(m, m + 1)?);
    mf.matrix(m, n)?;
    let mut prod = 1.0;
    for k in m + 2..=n {
        prod *= 1.0 - cert.lambdas.get(k - 1);
        a = (1.0 - cert.lambdas.get(k)) * a + prod;
    }
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaRow {
    pub n: usize,
    pub lambda: f64,
    pub extremal: f64,
    pub bound: f64,
    pub decay_expression: f64,
    pub n_product: f64,
    pub ratio: f64,
}

/// One row per `n`: the extremal sequence from `a0`, the unrolled bound
/// seeded with its first term, and the condition expressions.
pub fn lemma_table(lambdas: &LambdaSequence, a0: f64) -> Result<Vec<LemmaRow>> {
    let a1 = sequence_oracle(a0, lambdas, 1)?;
    let prefix = lambdas.prefix_products();
    let ratios = running_ratios(lambdas.values.iter().map(|l| l / (1.0 - l)));
    (1..=lambdas.len())
        .map(|n| {
            Ok(LemmaRow {
                n,
                lambda: lambdas.get(n),
                extremal: sequence_oracle(a0, lambdas, n)?,
                bound: lemma_bound(a1, lambdas, n)?,
                decay_expression: decay_expression(lambdas, n),
                n_product: n as f64 * prefix[n],
                ratio: ratios[n - 1],
            })
        })
        .collect()
}
