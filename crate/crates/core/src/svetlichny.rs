//! Svetlichny operator, its mean value, the `4λ₁` bound and tightness
//! certificates.
//!
//! Expanding the operator in Pauli products gives
//! `⟨S⟩ = (b + b')ᵀ M (a⊗c − a'⊗c') + (b − b')ᵀ M (a⊗c' + a'⊗c)`
//! with `M` the 3×9 unfolding from [`crate::correlation`]. Both evaluation
//! paths are exposed so they can be checked against each other.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::correlation::{correlation_tensor, singular_spectrum, unfold, CorrelationMatrix, SingularSpectrum};
use crate::eigen::hermitian_top_eigenvector;
use crate::error::{Error, Result};
use crate::optimizer::{maximize_matrix, OptimizerConfig};
use crate::qcore::{expectation, kron3, norm3, observable, ComplexMatrix, DensityMatrix, UnitVector3};

/// Maximal mean value attainable by hybrid local–nonlocal models.
pub const CLASSICAL_BOUND: f64 = 4.0;
/// Slack used when comparing values against [`CLASSICAL_BOUND`].
pub const CLASSIFICATION_TOL: f64 = 1e-9;
/// Default tolerance for a certificate to count as reaching `4λ₁`.
pub const DEFAULT_CERTIFICATE_TOL: f64 = 1e-6;
/// Random starts for the singular-subspace decomposition search.
pub const SUBSPACE_STARTS: usize = 50;
/// Largest out-of-subspace residual accepted from the decomposition search.
pub const SUBSPACE_RESIDUAL_TOL: f64 = 1e-8;
const SUBSPACE_MAX_ITERATIONS: usize = 5000;

/// Six measurement directions `(a, a', b, b', c, c')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSettings {
    pub a: UnitVector3,
    pub a_prime: UnitVector3,
    pub b: UnitVector3,
    pub b_prime: UnitVector3,
    pub c: UnitVector3,
    pub c_prime: UnitVector3,
}

impl MeasurementSettings {
    pub fn as_array(&self) -> [UnitVector3; 6] {
        [self.a, self.a_prime, self.b, self.b_prime, self.c, self.c_prime]
    }

    pub fn from_array(v: [UnitVector3; 6]) -> Self {
        MeasurementSettings {
            a: v[0],
            a_prime: v[1],
            b: v[2],
            b_prime: v[3],
            c: v[4],
            c_prime: v[5],
        }
    }

    /// Settings with `a` and `a'` negated; flips the sign of `⟨S⟩`.
    pub fn negate_a(&self) -> Self {
        MeasurementSettings {
            a: self.a.neg(),
            a_prime: self.a_prime.neg(),
            ..*self
        }
    }

    /// The two 9-vectors `a⊗c − a'⊗c'` and `a⊗c' + a'⊗c`.
    pub fn pair_vectors(&self) -> ([f64; 9], [f64; 9]) {
        let (a, ap) = (self.a.components(), self.a_prime.components());
        let (c, cp) = (self.c.components(), self.c_prime.components());
        let mut minus = [0.0; 9];
        let mut plus = [0.0; 9];
        for i in 0..3 {
            for k in 0..3 {
                minus[3 * i + k] = a[i] * c[k] - ap[i] * cp[k];
                plus[3 * i + k] = a[i] * cp[k] + ap[i] * c[k];
            }
        }
        (minus, plus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    CertifiedViolation,
    CertifiedNoViolation,
    Inconclusive,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::CertifiedViolation => "CertifiedViolation",
            Classification::CertifiedNoViolation => "CertifiedNoViolation",
            Classification::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateMethod {
    /// Decomposition found inside the top singular subspace.
    SingularSubspace,
    /// Best settings from the see-saw optimizer.
    SeeSaw,
}

impl CertificateMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertificateMethod::SingularSubspace => "singular-subspace",
            CertificateMethod::SeeSaw => "see-saw",
        }
    }
}

/// Settings whose mean value reaches the bound within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub settings: MeasurementSettings,
    /// `svetlichny_value` of `settings`.
    pub achieved: f64,
    /// `4λ₁ − achieved`
    pub residual: f64,
    pub method: CertificateMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub spectrum: SingularSpectrum,
    /// Always `4.0 * spectrum.values[0]`.
    pub q_bound: f64,
    pub classification: Classification,
    pub optimizer_value: Option<f64>,
    pub certificate: Option<Certificate>,
}

pub fn build_operator(s: &MeasurementSettings) -> ComplexMatrix {
    let a = observable(&s.a);
    let ap = observable(&s.a_prime);
    let b = observable(&s.b);
    let bp = observable(&s.b_prime);
    let c = observable(&s.c);
    let cp = observable(&s.c_prime);
    let b_sum = &b + &bp;
    let b_diff = &b + &bp.scale(-1.0);
    let k = |x: &ComplexMatrix, y: &ComplexMatrix, z: &ComplexMatrix| {
        kron3(x, y, z).expect("single-qubit observables are 2x2")
    };
    let terms = [
        k(&a, &b_sum, &c),
        k(&a, &b_diff, &cp),
        k(&ap, &b_diff, &c),
        k(&ap, &b_sum, &cp).scale(-1.0),
    ];
    terms
        .iter()
        .fold(ComplexMatrix::zeros(8), |acc, t| &acc + t)
}

/// `tr(S ρ)`
pub fn svetlichny_value(rho: &DensityMatrix, s: &MeasurementSettings) -> Result<f64> {
    expectation(rho, &build_operator(s))
}

/// Mean value from the correlation unfolding, without forming `S`.
pub fn bilinear_value(m: &CorrelationMatrix, s: &MeasurementSettings) -> f64 {
    let (minus, plus) = s.pair_vectors();
    let (b, bp) = (s.b.components(), s.b_prime.components());
    let m_minus = m.apply(&minus);
    let m_plus = m.apply(&plus);
    (0..3)
        .map(|j| (b[j] + bp[j]) * m_minus[j] + (b[j] - bp[j]) * m_plus[j])
        .sum()
}

/// `arccos(cos θ_a · cos θ_c)` for angles in `[0, π]`.
pub fn principal_angle(theta_a: f64, theta_c: f64) -> Result<f64> {
    let pi = std::f64::consts::PI;
    for (name, v) in [("theta_a", theta_a), ("theta_c", theta_c)] {
        if !(0.0..=pi).contains(&v) {
            return Err(Error::OutOfRange {
                name,
                value: v,
                range: "[0, pi]",
            });
        }
    }
    Ok((theta_a.cos() * theta_c.cos()).clamp(-1.0, 1.0).acos())
}

pub fn quantum_bound(rho: &DensityMatrix) -> Result<BoundReport> {
    quantum_bound_with(rho, &OptimizerConfig::default())
}

/// Bound `4λ₁` plus a three-valued violation verdict.
///
/// A bound at or below 4 certifies that no settings violate the inequality.
/// Above 4 the optimizer has to exhibit violating settings; otherwise the
/// verdict stays inconclusive.
pub fn quantum_bound_with(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<BoundReport> {
    let m = unfold(&correlation_tensor(rho)?);
    let spectrum = singular_spectrum(&m);
    let q_bound = 4.0 * spectrum.values[0];
    if q_bound <= CLASSICAL_BOUND + CLASSIFICATION_TOL {
        return Ok(BoundReport {
            spectrum,
            q_bound,
            classification: Classification::CertifiedNoViolation,
            optimizer_value: None,
            certificate: None,
        });
    }

    let opt = maximize_matrix(&m, cfg)?;
    let classification = if opt.best_value > CLASSICAL_BOUND + CLASSIFICATION_TOL {
        Classification::CertifiedViolation
    } else {
        Classification::Inconclusive
    };
    let certificate = if opt.best_value >= q_bound - DEFAULT_CERTIFICATE_TOL {
        let achieved = svetlichny_value(rho, &opt.best_settings)?;
        Some(Certificate {
            settings: opt.best_settings,
            achieved,
            residual: q_bound - achieved,
            method: CertificateMethod::SeeSaw,
        })
    } else {
        None
    };
    Ok(BoundReport {
        spectrum,
        q_bound,
        classification,
        optimizer_value: Some(opt.best_value),
        certificate,
    })
}

pub fn tightness_certificate(rho: &DensityMatrix, tol: f64) -> Result<Option<Certificate>> {
    tightness_certificate_with(rho, tol, &OptimizerConfig::default())
}

/// Looks for settings reaching `4λ₁ − tol`.
///
/// With a degenerate `λ₁` the top right-singular subspace is searched for
/// `a⊗c − a'⊗c'` and `a⊗c' + a'⊗c`; `b, b'` then follow in closed form.
/// If that fails the see-saw optimizer is tried. `None` means neither route
/// reached the bound, which is allowed: the bound need not be tight.
pub fn tightness_certificate_with(
    rho: &DensityMatrix,
    tol: f64,
    cfg: &OptimizerConfig,
) -> Result<Option<Certificate>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::OutOfRange {
            name: "tol",
            value: tol,
            range: "(0, inf)",
        });
    }
    let m = unfold(&correlation_tensor(rho)?);
    let spectrum = singular_spectrum(&m);
    let q_bound = 4.0 * spectrum.values[0];

    if spectrum.degenerate_top && spectrum.values[0] > 1e-12 {
        if let Some((settings, _residual)) = subspace_settings(&m, &spectrum, cfg.seed) {
            let achieved = svetlichny_value(rho, &settings)?;
            if achieved >= q_bound - tol {
                return Ok(Some(Certificate {
                    settings,
                    achieved,
                    residual: q_bound - achieved,
                    method: CertificateMethod::SingularSubspace,
                }));
            }
        }
    }

    let opt = maximize_matrix(&m, cfg)?;
    let achieved = svetlichny_value(rho, &opt.best_settings)?;
    if achieved >= q_bound - tol {
        return Ok(Some(Certificate {
            settings: opt.best_settings,
            achieved,
            residual: q_bound - achieved,
            method: CertificateMethod::SeeSaw,
        }));
    }
    Ok(None)
}

fn reshape(v: &[f64; 9]) -> [[f64; 3]; 3] {
    [[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]]
}

type C3 = [Complex64; 3];

/// `Σ_m |αᵀ V_m γ|²` for unit `α`, `γ`: the squared norm of `α γᵀ` captured
/// by the subspace spanned by the `V_m`.
fn captured(basis: &[[[f64; 3]; 3]], alpha: &C3, gamma: &C3) -> f64 {
    basis
        .iter()
        .map(|v| {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                for k in 0..3 {
                    s += alpha[i] * v[i][k] * gamma[k];
                }
            }
            s.norm_sqr()
        })
        .sum()
}

/// Unit `x` maximizing `Σ_m |w_mᵀ x|²`.
fn best_partner(ws: &[C3]) -> C3 {
    let mut h = [Complex64::new(0.0, 0.0); 9];
    for w in ws {
        for i in 0..3 {
            for j in 0..3 {
                h[3 * i + j] += w[i].conj() * w[j];
            }
        }
    }
    let (_, v) = hermitian_top_eigenvector(&h, 3);
    [v[0], v[1], v[2]]
}

fn random_complex_unit(rng: &mut ChaCha20Rng) -> C3 {
    let mut v = [Complex64::new(0.0, 0.0); 3];
    for z in v.iter_mut() {
        *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / norm)
}

/// Rephases `√2·x` so that its real and imaginary parts are both unit vectors.
fn split_unit_pair(x: &C3) -> Option<(UnitVector3, UnitVector3)> {
    let q: Complex64 = x.iter().map(|z| z * z).sum();
    let chi = 0.5 * (std::f64::consts::FRAC_PI_2 - q.arg());
    let phase = Complex64::from_polar(std::f64::consts::SQRT_2, chi);
    let y = x.map(|z| z * phase);
    let re = UnitVector3::normalized([y[0].re, y[1].re, y[2].re]).ok()?;
    let im = UnitVector3::normalized([y[0].im, y[1].im, y[2].im]).ok()?;
    Some((re, im))
}

/// Searches the top right-singular subspace for the pair of 9-vectors
/// required for saturation.
///
/// `a⊗c − a'⊗c'` and `a⊗c' + a'⊗c` are the real and imaginary parts of
/// `(a + i a') ⊗ (c + i c')`, so the search is for a rank-one complex 3×3
/// matrix in the complexified subspace. Alternating top-eigenvector updates
/// of the two factors maximize the captured norm from seeded random starts.
/// Returns the settings and the out-of-subspace residual
/// `|P⊥(a⊗c − a'⊗c')|² + |P⊥(a⊗c' + a'⊗c)|²`.
pub fn subspace_settings(
    m: &CorrelationMatrix,
    spectrum: &SingularSpectrum,
    seed: u64,
) -> Option<(MeasurementSettings, f64)> {
    let dim = spectrum.top_dimension();
    let basis: Vec<[[f64; 3]; 3]> = spectrum.right[..dim].iter().map(reshape).collect();

    for start in 0..SUBSPACE_STARTS {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(start as u64);
        let mut alpha = random_complex_unit(&mut rng);
        let mut gamma = random_complex_unit(&mut rng);
        let mut prev = captured(&basis, &alpha, &gamma);
        for _ in 0..SUBSPACE_MAX_ITERATIONS {
            // w_m = V_m γ
            let ws: Vec<C3> = basis
                .iter()
                .map(|v| std::array::from_fn(|i| (0..3).map(|k| v[i][k] * gamma[k]).sum()))
                .collect();
            alpha = best_partner(&ws);
            // u_m = V_mᵀ α
            let us: Vec<C3> = basis
                .iter()
                .map(|v| std::array::from_fn(|k| (0..3).map(|i| v[i][k] * alpha[i]).sum()))
                .collect();
            gamma = best_partner(&us);
            let f = captured(&basis, &alpha, &gamma);
            let done = (f - prev).abs() < 1e-16;
            prev = f;
            if done {
                break;
            }
        }
        let residual = 4.0 * (1.0 - prev).max(0.0);
        if residual > SUBSPACE_RESIDUAL_TOL {
            continue;
        }
        let Some((a, a_prime)) = split_unit_pair(&alpha) else {
            continue;
        };
        let Some((c, c_prime)) = split_unit_pair(&gamma) else {
            continue;
        };
        let partial = MeasurementSettings {
            a,
            a_prime,
            b: UnitVector3::z(),
            b_prime: UnitVector3::z(),
            c,
            c_prime,
        };
        // b ± b' along M(a⊗c − a'⊗c') and M(a⊗c' + a'⊗c); this fixes
        // θ_ac + θ_b = π, the saturating choice.
        let (minus, plus) = partial.pair_vectors();
        let m_minus = m.apply(&minus);
        let m_plus = m.apply(&plus);
        let b_raw = std::array::from_fn(|j| m_minus[j] + m_plus[j]);
        let bp_raw = std::array::from_fn(|j| m_minus[j] - m_plus[j]);
        if norm3(&b_raw) < 1e-12 || norm3(&bp_raw) < 1e-12 {
            continue;
        }
        let settings = MeasurementSettings {
            b: UnitVector3::normalized(b_raw).ok()?,
            b_prime: UnitVector3::normalized(bp_raw).ok()?,
            ..partial
        };
        return Some((settings, residual));
    }
    None
}
