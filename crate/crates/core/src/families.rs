//! Noisy GHZ-class state families, their closed-form singular values,
//! violation thresholds and the GME-concurrence lower bounds.
//!
//! The numerically computed correlation tensor is the ground truth here; the
//! closed forms are cross-checks.
//!
//! For `cosθ|000⟩ + sinθ|11⟩(cosθ₃|0⟩ + sinθ₃|1⟩)` the unfolding has a
//! third row `(0,0,0,0,0,0,c,0,d)` with `c = sin²θ·sin2θ₃` and
//! `d = cos²θ + sin²θ·cos2θ₃`. Some printed versions of this formula carry
//! `cos²2θ₃` in `d`; that form gives `⟨σ₃σ₃σ₃⟩ = 1` on GHZ where the true
//! value is 0, and it does not reproduce the third singular value
//! `√(1 − sin²2θ·sin²θ₃)`. The `cos2θ₃` form is consistent with both.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;

use crate::correlation::{correlation_tensor, singular_spectrum, unfold, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::qcore::{pure_to_density, validate_density, ComplexMatrix, DensityMatrix, PureState};
use crate::svetlichny::{CLASSICAL_BOUND, CLASSIFICATION_TOL};

/// Angle slack accepted at the ends of `[0, π/2]`.
const ANGLE_SLACK: f64 = 1e-12;
/// Width of the final bracket in the threshold bisection.
pub const BISECTION_TOL: f64 = 1e-9;

/// Literature value: white-noise GHZ is genuinely multipartite entangled iff
/// `p > 3/7`. Annotation only, not computed.
pub const GHZ_WHITE_GME_THRESHOLD: f64 = 0.428571;
/// Literature value: color-noise GHZ admits bi-local hidden models for
/// `p ≤ 5/12`. Annotation only, not computed.
pub const GHZ_COLOR_BILOCAL_BOUND: f64 = 0.416667;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzClassParams {
    theta: f64,
    theta3: f64,
}

impl GhzClassParams {
    /// Both angles in radians within `[0, π/2]`.
    pub fn new(theta: f64, theta3: f64) -> Result<Self> {
        Ok(GhzClassParams {
            theta: check_angle("theta", theta)?,
            theta3: check_angle("theta3", theta3)?,
        })
    }

    /// θ = π/4, θ₃ = π/2
    pub fn ghz() -> Self {
        GhzClassParams {
            theta: FRAC_PI_4,
            theta3: FRAC_PI_2,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn theta3(&self) -> f64 {
        self.theta3
    }
}

fn check_angle(name: &'static str, v: f64) -> Result<f64> {
    if !(-ANGLE_SLACK..=FRAC_PI_2 + ANGLE_SLACK).contains(&v) {
        return Err(Error::OutOfRange {
            name,
            value: v,
            range: "[0, pi/2]",
        });
    }
    Ok(v.clamp(0.0, FRAC_PI_2))
}

fn check_weight(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "[0, 1]",
        });
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyKind {
    /// `p|ψ⟩⟨ψ| + (1 − p)/8 · I`
    GhzWhiteNoise(GhzClassParams),
    /// `p|GHZ⟩⟨GHZ| + (1 − p)/4 · I₂ ⊗ diag(1, 0, 0, 1)`
    GhzColorNoiseA,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::GhzWhiteNoise(_) => "ghz-white",
            FamilyKind::GhzColorNoiseA => "ghz-color",
        }
    }

    /// Angles of the underlying pure state (GHZ for the color-noise family).
    pub fn params(&self) -> GhzClassParams {
        match self {
            FamilyKind::GhzWhiteNoise(params) => *params,
            FamilyKind::GhzColorNoiseA => GhzClassParams::ghz(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilySpec {
    kind: FamilyKind,
    p: f64,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, p: f64) -> Result<Self> {
        Ok(FamilySpec {
            kind,
            p: check_weight(p)?,
        })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

pub fn ghz_class_state(params: &GhzClassParams) -> PureState {
    let (t, t3) = (params.theta, params.theta3);
    let mut amps = [0.0; 8];
    amps[0] = t.cos();
    amps[6] = t.sin() * t3.cos();
    amps[7] = t.sin() * t3.sin();
    // cos² + sin²(cos² + sin²) = 1 up to rounding.
    PureState::from_real(amps).expect("GHZ-class amplitudes are normalized")
}

pub fn realize(spec: &FamilySpec) -> Result<DensityMatrix> {
    let p = spec.p;
    let (pure, noise) = match spec.kind {
        FamilyKind::GhzWhiteNoise(params) => (
            pure_to_density(&ghz_class_state(&params))?,
            ComplexMatrix::identity(8).scale(0.125),
        ),
        FamilyKind::GhzColorNoiseA => {
            let d = [1.0, 0.0, 0.0, 1.0];
            let diag: Vec<f64> = (0..8).map(|n| 0.25 * d[n % 4]).collect();
            (
                pure_to_density(&PureState::ghz())?,
                ComplexMatrix::from_diagonal(&diag),
            )
        }
    };
    let m = &pure.matrix().scale(p) + &noise.scale(1.0 - p);
    Ok(validate_density(&m)?)
}

/// The unfolding in closed form, with the corrected `d` entry.
pub fn analytic_unfolding(kind: &FamilyKind, p: f64) -> CorrelationMatrix {
    let (a, b, c, d) = match kind {
        FamilyKind::GhzWhiteNoise(params) => {
            let (t, t3) = (params.theta, params.theta3);
            (
                2.0 * t.cos() * t.sin() * t3.sin(),
                2.0 * t.cos() * t3.cos() * t.sin(),
                2.0 * t3.cos() * t.sin().powi(2) * t3.sin(),
                t.cos().powi(2) + t.sin().powi(2) * (2.0 * t3).cos(),
            )
        }
        FamilyKind::GhzColorNoiseA => (1.0, 0.0, 0.0, 0.0),
    };
    let rows = [
        [a, 0.0, b, 0.0, -a, 0.0, 0.0, 0.0, 0.0],
        [0.0, -a, 0.0, -a, 0.0, -b, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, c, 0.0, d],
    ];
    CorrelationMatrix {
        entries: rows.map(|r| r.map(|x| p * x)),
    }
}

/// Closed-form singular values, sorted descending.
pub fn analytic_singular_values(params: &GhzClassParams, p: f64) -> [f64; 3] {
    let s2 = (2.0 * params.theta).sin();
    let s3 = params.theta3.sin();
    let pair = p * s2.abs() * (1.0 + s3 * s3).sqrt();
    let third = p * (1.0 - s2 * s2 * s3 * s3).max(0.0).sqrt();
    let mut v = [pair, pair, third];
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// Mixing weight above which the family violates the inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Violation(f64),
    NoViolationForAnyP,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMethod {
    ClosedForm,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub p_star: Threshold,
    pub method: ThresholdMethod,
}

/// `4λ₁` of the family member at weight `p`, from the numerical tensor.
pub fn family_q_bound(kind: &FamilyKind, p: f64) -> Result<f64> {
    let rho = realize(&FamilySpec::new(*kind, p)?)?;
    let spectrum = singular_spectrum(&unfold(&correlation_tensor(&rho)?));
    Ok(4.0 * spectrum.values[0])
}

/// The full correlations are linear in `p`, so `p* = 4 / q_bound(1)`.
pub fn violation_threshold(kind: &FamilyKind) -> Result<ThresholdReport> {
    let q1 = family_q_bound(kind, 1.0)?;
    let p_star = if q1 > CLASSICAL_BOUND + CLASSIFICATION_TOL {
        Threshold::Violation(CLASSICAL_BOUND / q1)
    } else {
        Threshold::NoViolationForAnyP
    };
    Ok(ThresholdReport {
        p_star,
        method: ThresholdMethod::ClosedForm,
    })
}

/// Bisection of `q_bound(p) − 4` on `[0, 1]`; used to cross-check the
/// closed form.
pub fn violation_threshold_bisection(kind: &FamilyKind) -> Result<ThresholdReport> {
    let excess = |p: f64| family_q_bound(kind, p).map(|q| q - CLASSICAL_BOUND);
    if excess(1.0)? <= CLASSIFICATION_TOL {
        return Ok(ThresholdReport {
            p_star: Threshold::NoViolationForAnyP,
            method: ThresholdMethod::Bisection,
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdReport {
        p_star: Threshold::Violation(0.5 * (lo + hi)),
        method: ThresholdMethod::Bisection,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmeReport {
    /// `λ₁² + λ₂² + λ₃²`, the squared Hilbert–Schmidt norm of the unfolding.
    pub hs_norm_sq: f64,
    /// `√(hs_norm_sq / 8) − 1/2`; may be negative.
    pub lb_value: f64,
    /// `q_bound / 8 − 1/2`. Bounded by `lb_value` only when `λ₁ = λ₂`; on
    /// the white-noise family that fails near `θ = 0`.
    pub chain_value: f64,
    pub clamped_lb: f64,
}

pub fn gme_lower_bound(rho: &DensityMatrix) -> Result<GmeReport> {
    let spectrum = singular_spectrum(&unfold(&correlation_tensor(rho)?));
    let hs_norm_sq = spectrum.sum_of_squares();
    let lb_value = (hs_norm_sq / 8.0).sqrt() - 0.5;
    let q_bound = 4.0 * spectrum.values[0];
    Ok(GmeReport {
        hs_norm_sq,
        lb_value,
        chain_value: q_bound / 8.0 - 0.5,
        clamped_lb: lb_value.max(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub theta: f64,
    pub theta3: f64,
    pub p: f64,
    pub lambda1: f64,
    pub q_bound: f64,
    /// `q_bound > 4`; on these families the bound is attained, so this is
    /// the violation verdict.
    pub violates: bool,
    pub gme_lb: f64,
}

/// Family grid
#[derive(Debug, Clone, PartialEq)]
pub enum ScanFamily {
    GhzWhiteNoise { params: Vec<GhzClassParams> },
    GhzColorNoiseA,
}

/// One row per grid point: parameters in the given order, then `p`
/// ascending.
pub fn scan(family: &ScanFamily, p_grid: &[f64]) -> Result<Vec<ScanRow>> {
    let kinds: Vec<FamilyKind> = match family {
        ScanFamily::GhzWhiteNoise { params } => {
            params.iter().map(|&p| FamilyKind::GhzWhiteNoise(p)).collect()
        }
        ScanFamily::GhzColorNoiseA => vec![FamilyKind::GhzColorNoiseA],
    };
    if kinds.is_empty() || p_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut ps: Vec<f64> = p_grid
        .iter()
        .map(|&p| check_weight(p))
        .collect::<Result<_>>()?;
    ps.sort_by(f64::total_cmp);

    let points: Vec<(FamilyKind, f64)> = kinds
        .iter()
        .flat_map(|k| ps.iter().map(move |&p| (*k, p)))
        .collect();
    points
        .par_iter()
        .map(|&(kind, p)| {
            let rho = realize(&FamilySpec::new(kind, p)?)?;
            let spectrum = singular_spectrum(&unfold(&correlation_tensor(&rho)?));
            let q_bound = 4.0 * spectrum.values[0];
            let hs = spectrum.sum_of_squares();
            let params = kind.params();
            Ok(ScanRow {
                theta: params.theta,
                theta3: params.theta3,
                p,
                lambda1: spectrum.values[0],
                q_bound,
                violates: q_bound > CLASSICAL_BOUND + CLASSIFICATION_TOL,
                gme_lb: (hs / 8.0).sqrt() - 0.5,
            })
        })
        .collect()
}
