//! Seeded kernel generators used by experiments and tests.

use serde::{Deserialize, Serialize};

use crate::error::{QspError, Result};
use crate::rng::{dirichlet, kernel_stream_id, matrix_row_stream_id, stream};
use crate::simplex::{validate_kernel, CubicKernel, ProbVector, StochMatrix};

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorPreset {
    /// `P_{ij,k} = p_k`.
    Constant { p: Vec<f64> },
    /// `P_{ij,k} = (δ_ik + δ_jk) / 2`.
    IdentityMix,
    /// Independent symmetric Dirichlet rows per unordered pair.
    Random {
        #[serde(default = "unit")]
        concentration: f64,
    },
    /// `P_{ij,·} = λ e_{k0} + (1 − λ) D_{ij,·}` with `D` drawn as in `Random`.
    Minorized {
        lambda: f64,
        k0: usize,
        #[serde(default = "unit")]
        concentration: f64,
    },
    /// `P_{ij,k} = (Q_ik + Q_jk) / 2`; `q` defaults to a random stochastic
    /// matrix with Dirichlet rows.
    MarkovPairLift {
        #[serde(default)]
        q: Option<Vec<Vec<f64>>>,
        #[serde(default = "unit")]
        concentration: f64,
    },
}

impl GeneratorPreset {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorPreset::Constant { .. } => "constant",
            GeneratorPreset::IdentityMix => "identity_mix",
            GeneratorPreset::Random { .. } => "random",
            GeneratorPreset::Minorized { .. } => "minorized",
            GeneratorPreset::MarkovPairLift { .. } => "markov_pair_lift",
        }
    }

    /// Whether the preset consumes randomness.
    pub fn is_randomized(&self) -> bool {
        match self {
            GeneratorPreset::Constant { .. } | GeneratorPreset::IdentityMix => false,
            GeneratorPreset::MarkovPairLift { q, .. } => q.is_none(),
            _ => true,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            GeneratorPreset::Constant { p } => {
                if p.len() != dim {
                    return Err(QspError::Config(format!("constant p has length {}, expected {dim}", p.len())));
                }
                ProbVector::new(p.clone()).map_err(|e| QspError::Config(format!("constant p: {e}")))?;
            }
            GeneratorPreset::IdentityMix => {}
            GeneratorPreset::Random { concentration } => check_concentration(*concentration)?,
            GeneratorPreset::Minorized { lambda, k0, concentration } => {
                if !(*lambda > 0.0 && *lambda < 1.0) {
                    return Err(QspError::Config(format!("minorized lambda must be in (0, 1), got {lambda}")));
                }
                if *k0 >= dim {
                    return Err(QspError::Config(format!("minorized k0 = {k0} out of range for dimension {dim}")));
                }
                check_concentration(*concentration)?;
            }
            GeneratorPreset::MarkovPairLift { q, concentration } => {
                check_concentration(*concentration)?;
                if let Some(rows) = q {
                    lift_matrix(rows, dim)?;
                }
            }
        }
        Ok(())
    }
}

fn check_concentration(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(QspError::Config(format!("concentration must be positive, got {c}")))
    }
}

fn lift_matrix(rows: &[Vec<f64>], dim: usize) -> Result<StochMatrix> {
    let q = StochMatrix::from_rows(rows).map_err(|e| QspError::Config(format!("markov_pair_lift q: {e}")))?;
    if q.dim() != dim {
        return Err(QspError::Config(format!("markov_pair_lift q has dimension {}, expected {dim}", q.dim())));
    }
    let report = crate::simplex::validate_matrix(&q, 1e-10);
    if !report.ok {
        return Err(QspError::Config(format!("markov_pair_lift q is not stochastic: {report}")));
    }
    Ok(q)
}

/// Draws one Dirichlet row per unordered pair `i <= j` and mirrors it.
fn random_symmetric(dim: usize, seed: u64, step: usize, concentration: f64) -> Result<CubicKernel> {
    let mut entries = vec![0.0; dim * dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let mut rng = stream(seed, kernel_stream_id(step, i, j));
            let row = dirichlet(&mut rng, dim, concentration)?;
            entries[(i * dim + j) * dim..(i * dim + j + 1) * dim].copy_from_slice(&row);
            entries[(j * dim + i) * dim..(j * dim + i + 1) * dim].copy_from_slice(&row);
        }
    }
    CubicKernel::new(dim, entries)
}

/// `P_{ij,k} = (Q_ik + Q_jk) / 2`.
pub fn pair_lift(q: &StochMatrix) -> CubicKernel {
    CubicKernel::from_fn(q.dim(), |i, j, k| 0.5 * (q.get(i, k) + q.get(j, k)))
}

/// Random stochastic matrix with Dirichlet rows drawn from the step's row streams.
pub fn random_stochastic_matrix(dim: usize, seed: u64, step: usize, concentration: f64) -> Result<StochMatrix> {
    let rows = (0..dim)
        .map(|i| dirichlet(&mut stream(seed, matrix_row_stream_id(step, i)), dim, concentration))
        .collect::<Result<Vec<_>>>()?;
    StochMatrix::from_rows(&rows)
}

/// Generates the kernel for time step `step` (1-based) of a family.
pub fn generate_kernel(preset: &GeneratorPreset, dim: usize, seed: u64, step: usize) -> Result<CubicKernel> {
    preset.validate(dim)?;
    let kernel = match preset {
        GeneratorPreset::Constant { p } => CubicKernel::constant(&ProbVector::new(p.clone())?),
        GeneratorPreset::IdentityMix => CubicKernel::identity_mix(dim),
        GeneratorPreset::Random { concentration } => random_symmetric(dim, seed, step, *concentration)?,
        GeneratorPreset::Minorized { lambda, k0, concentration } => {
            let d = random_symmetric(dim, seed, step, *concentration)?;
            CubicKernel::from_fn(dim, |i, j, k| {
                let base = (1.0 - lambda) * d.get(i, j, k);
                if k == *k0 {
                    lambda + base
                } else {
                    base
                }
            })
        }
        GeneratorPreset::MarkovPairLift { q, concentration } => {
            let q = match q {
                Some(rows) => lift_matrix(rows, dim)?,
                None => random_stochastic_matrix(dim, seed, step, *concentration)?,
            };
            pair_lift(&q)
        }
    };
    let report = validate_kernel(&kernel, 1e-10);
    if !report.ok {
        return Err(QspError::PostCondition { context: "generate_kernel", report });
    }
    Ok(kernel)
}

/// One-step kernels for steps `1..=horizon`. With `iid` each step gets its own
/// draw; otherwise the step-1 kernel is reused.
pub fn generate_one_step(
    preset: &GeneratorPreset,
    dim: usize,
    seed: u64,
    horizon: usize,
    iid: bool,
) -> Result<Vec<CubicKernel>> {
    if iid && preset.is_randomized() {
        (1..=horizon).map(|n| generate_kernel(preset, dim, seed, n)).collect()
    } else {
        let k = generate_kernel(preset, dim, seed, 1)?;
        Ok(vec![k; horizon])
    }
}
