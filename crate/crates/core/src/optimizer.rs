//! See-saw maximization of `|⟨S⟩|` over all measurement settings.
//!
//! The mean value is linear in each of the six directions when the other
//! five are fixed, so the best single-direction update is the normalized
//! coefficient vector. Sweeps never decrease the objective.
//!
//! Randomness: start `n` draws from `ChaCha20Rng::seed_from_u64(seed)` on
//! stream `n`, sampling each direction as a normalized triple of standard
//! normals (components x, y, z in that order; directions a, a', b, b', c, c').

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::correlation::{correlation_tensor, singular_spectrum, unfold, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::qcore::{norm3, DensityMatrix, UnitVector3};
use crate::svetlichny::{bilinear_value, MeasurementSettings};

/// Slack allowed above `4λ₁` before the optimizer reports a numerical failure.
pub const BOUND_SLACK: f64 = 1e-7;
const MIN_COEFFICIENT_NORM: f64 = 1e-14;
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub max_iterations: usize,
    /// Absolute per-sweep improvement below which a start is converged.
    pub convergence_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            starts: 50,
            max_iterations: 500,
            convergence_tol: 1e-10,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::Config("starts must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if self.convergence_tol.is_nan() || self.convergence_tol <= 0.0 {
            return Err(Error::Config("convergence_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of a single start (both sign branches).
#[derive(Debug, Clone, PartialEq)]
pub struct StartOutcome {
    pub value: f64,
    pub settings: MeasurementSettings,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    /// Largest `|⟨S⟩|` found; `best_settings` attain `+best_value`.
    pub best_value: f64,
    pub best_settings: MeasurementSettings,
    pub best_start: usize,
    /// Sweeps used by the winning start.
    pub iterations_used: usize,
    pub converged: bool,
    pub per_start_values: Vec<f64>,
    pub per_start: Vec<StartOutcome>,
}

fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> UnitVector3 {
    loop {
        let v = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        if norm3(&v) > 1e-12 {
            return UnitVector3::normalized(v).expect("nonzero direction");
        }
    }
}

/// Six directions drawn independently and uniformly from the unit sphere.
pub fn random_settings<R: Rng + ?Sized>(rng: &mut R) -> MeasurementSettings {
    MeasurementSettings::from_array(std::array::from_fn(|_| random_direction(rng)))
}

/// Generator for start `index` under `seed`.
pub fn start_rng(seed: u64, index: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn matvec3(m: &[f64; 9], v: &[f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| (0..3).map(|k| m[3 * i + k] * v[k]).sum())
}

fn matvec3_t(m: &[f64; 9], v: &[f64; 3]) -> [f64; 3] {
    std::array::from_fn(|k| (0..3).map(|i| m[3 * i + k] * v[i]).sum())
}

fn combine(x: [f64; 3], sx: f64, y: [f64; 3], sy: f64) -> [f64; 3] {
    std::array::from_fn(|n| sx * x[n] + sy * y[n])
}

fn update(current: UnitVector3, coefficient: [f64; 3]) -> UnitVector3 {
    if norm3(&coefficient) < MIN_COEFFICIENT_NORM {
        return current;
    }
    UnitVector3::normalized(coefficient).unwrap_or(current)
}

/// One sweep over `a, a', b, b', c, c'` in that order, each replaced by the
/// direction that maximizes `bilinear_value(m, ·)` with the others fixed.
pub fn seesaw_step(m: &CorrelationMatrix, s: &MeasurementSettings) -> (MeasurementSettings, f64) {
    let mut s = *s;

    // Contractions of M with b ± b', reshaped as 3×3 over (A, C).
    let ac_forms = |s: &MeasurementSettings| {
        let (b, bp) = (s.b.components(), s.b_prime.components());
        let sum = m.apply_transpose(&std::array::from_fn(|j| b[j] + bp[j]));
        let diff = m.apply_transpose(&std::array::from_fn(|j| b[j] - bp[j]));
        (sum, diff)
    };

    let (sum, diff) = ac_forms(&s);
    let (c, cp) = (s.c.components(), s.c_prime.components());
    s.a = update(s.a, combine(matvec3(&sum, &c), 1.0, matvec3(&diff, &cp), 1.0));
    s.a_prime = update(s.a_prime, combine(matvec3(&sum, &cp), -1.0, matvec3(&diff, &c), 1.0));

    let (minus, plus) = s.pair_vectors();
    let m_minus = m.apply(&minus);
    let m_plus = m.apply(&plus);
    s.b = update(s.b, combine(m_minus, 1.0, m_plus, 1.0));
    s.b_prime = update(s.b_prime, combine(m_minus, 1.0, m_plus, -1.0));

    let (sum, diff) = ac_forms(&s);
    let (a, ap) = (s.a.components(), s.a_prime.components());
    s.c = update(s.c, combine(matvec3_t(&sum, &a), 1.0, matvec3_t(&diff, &ap), 1.0));
    s.c_prime = update(s.c_prime, combine(matvec3_t(&sum, &ap), -1.0, matvec3_t(&diff, &a), 1.0));

    let value = bilinear_value(m, &s);
    (s, value)
}

/// Ascends `bilinear_value(m, ·)` from `start` until the per-sweep gain drops
/// below the tolerance. Errors if a sweep ever lowers the objective.
fn ascend(
    m: &CorrelationMatrix,
    start: &MeasurementSettings,
    cfg: &OptimizerConfig,
) -> Result<(MeasurementSettings, f64, usize, bool)> {
    let mut s = *start;
    let mut value = bilinear_value(m, &s);
    for sweep in 1..=cfg.max_iterations {
        let (next, next_value) = seesaw_step(m, &s);
        if next_value < value - MONOTONE_SLACK * value.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "see-saw sweep decreased the objective from {value} to {next_value}"
            )));
        }
        let gain = next_value - value;
        s = next;
        value = next_value;
        if gain < cfg.convergence_tol {
            return Ok((s, value, sweep, true));
        }
    }
    Ok((s, value, cfg.max_iterations, false))
}

fn run_start(m: &CorrelationMatrix, neg: &CorrelationMatrix, index: usize, cfg: &OptimizerConfig) -> Result<StartOutcome> {
    let start = random_settings(&mut start_rng(cfg.seed, index));
    let (pos_s, pos_v, pos_it, pos_conv) = ascend(m, &start, cfg)?;
    // Maximizing -⟨S⟩ is maximizing ⟨S⟩ for -M.
    let (neg_s, neg_v, neg_it, neg_conv) = ascend(neg, &start, cfg)?;
    Ok(if neg_v > pos_v {
        StartOutcome {
            value: neg_v,
            settings: neg_s.negate_a(),
            iterations: neg_it,
            converged: neg_conv,
        }
    } else {
        StartOutcome {
            value: pos_v,
            settings: pos_s,
            iterations: pos_it,
            converged: pos_conv,
        }
    })
}

/// Multistart see-saw on an unfolding. Starts run in parallel; the winner
/// is the largest value, ties going to the lowest start index.
pub fn maximize_matrix(m: &CorrelationMatrix, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    let neg = m.scaled(-1.0);
    let per_start: Vec<StartOutcome> = (0..cfg.starts)
        .into_par_iter()
        .map(|n| run_start(m, &neg, n, cfg))
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (n, out) in per_start.iter().enumerate() {
        if out.value > per_start[best].value {
            best = n;
        }
    }
    let winner = &per_start[best];
    let bound = 4.0 * singular_spectrum(m).values[0];
    if winner.value > bound + BOUND_SLACK {
        return Err(Error::Numerical(format!(
            "optimizer value {} exceeds the bound {bound}",
            winner.value
        )));
    }
    Ok(OptimizationResult {
        best_value: winner.value.max(0.0),
        best_settings: winner.settings,
        best_start: best,
        iterations_used: winner.iterations,
        converged: winner.converged,
        per_start_values: per_start.iter().map(|o| o.value).collect(),
        per_start,
    })
}

pub fn maximize(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    let m = unfold(&correlation_tensor(rho)?);
    maximize_matrix(&m, cfg)
}
