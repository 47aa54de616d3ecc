//! Complex matrix primitives for three-qubit states.
//!
//! Basis ordering is `|abc⟩` with party A as the most significant bit, so
//! `kron3(A, B, C)` has A as the slowest-varying index. Every other module
//! relies on this convention.

use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::eigen::hermitian_eigenvalues;
use crate::error::{Error, Result, ValidationFailure, Violation};

/// Absolute tolerance for Hermiticity and unit trace of density matrices.
pub const DENSITY_TOL: f64 = 1e-9;
/// Smallest eigenvalue tolerated before a state is rejected as non-PSD.
pub const EIGENVALUE_FLOOR: f64 = -1e-9;
/// Tolerance on the norm of unit vectors and squared norm of pure states.
pub const UNIT_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries; rejects non-square or non-finite input.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                got: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(ComplexMatrix { dim, data })
    }

    pub fn from_rows<const N: usize>(rows: [[Complex64; N]; N]) -> Self {
        ComplexMatrix {
            dim: N,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Maximum entrywise deviation `|m_rc - conj(m_cr)|`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.data[r * n + c] - self.data[c * n + r].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M†) / 2`
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[r * n + c] = 0.5 * (self.data[r * n + c] + self.data[c * n + r].conj());
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let dim = n * m;
        let mut out = Self::zeros(dim);
        for r1 in 0..n {
            for c1 in 0..n {
                let x = self.data[r1 * n + c1];
                if x == ZERO {
                    continue;
                }
                for r2 in 0..m {
                    for c2 in 0..m {
                        out.data[(r1 * m + r2) * dim + (c1 * m + c2)] = x * other.data[r2 * m + c2];
                    }
                }
            }
        }
        out
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let x = self.data[r * n + k];
                if x == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += x * rhs.data[k * n + c];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Real unit vector in three dimensions (a measurement direction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3([f64; 3]);

impl UnitVector3 {
    pub fn new(components: [f64; 3]) -> Result<Self> {
        if components.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("unit vector"));
        }
        let norm = norm3(&components);
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(UnitVector3(components))
    }

    /// Rescales a nonzero vector to unit length.
    pub fn normalized(v: [f64; 3]) -> Result<Self> {
        let norm = norm3(&v);
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::NotUnit { norm });
        }
        Ok(UnitVector3([v[0] / norm, v[1] / norm, v[2] / norm]))
    }

    pub const fn x() -> Self {
        UnitVector3([1.0, 0.0, 0.0])
    }

    pub const fn y() -> Self {
        UnitVector3([0.0, 1.0, 0.0])
    }

    pub const fn z() -> Self {
        UnitVector3([0.0, 0.0, 1.0])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn neg(&self) -> Self {
        UnitVector3([-self.0[0], -self.0[1], -self.0[2]])
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot3(&self.0, &other.0)
    }
}

pub(crate) fn norm3(v: &[f64; 3]) -> f64 {
    dot3(v, v).sqrt()
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Normalized three-qubit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState([Complex64; 8]);

impl PureState {
    pub fn new(amplitudes: [Complex64; 8]) -> Result<Self> {
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("pure state"));
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(PureState(amplitudes))
    }

    /// Real-amplitude convenience constructor.
    pub fn from_real(amplitudes: [f64; 8]) -> Result<Self> {
        Self::new(amplitudes.map(|x| Complex64::new(x, 0.0)))
    }

    /// `(|000⟩ + |111⟩)/√2`
    pub fn ghz() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = [ZERO; 8];
        amps[0] = Complex64::new(h, 0.0);
        amps[7] = Complex64::new(h, 0.0);
        PureState(amps)
    }

    /// `(|001⟩ + |010⟩ + |100⟩)/√3`
    pub fn w() -> Self {
        let s = 1.0 / 3f64.sqrt();
        let mut amps = [ZERO; 8];
        for idx in [1, 2, 4] {
            amps[idx] = Complex64::new(s, 0.0);
        }
        PureState(amps)
    }

    pub fn basis(index: usize) -> Self {
        let mut amps = [ZERO; 8];
        amps[index] = ONE;
        PureState(amps)
    }

    pub fn amplitudes(&self) -> &[Complex64; 8] {
        &self.0
    }
}

/// Validated three-qubit density matrix (8×8, Hermitian, unit trace, PSD).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    /// `I/8`
    pub fn maximally_mixed() -> Self {
        DensityMatrix(ComplexMatrix::identity(8).scale(0.125))
    }

    /// Convex combination `w·self + (1 - w)·other`, re-validated.
    pub fn mix(&self, other: &DensityMatrix, weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::OutOfRange {
                name: "weight",
                value: weight,
                range: "[0, 1]",
            });
        }
        let m = &self.0.scale(weight) + &other.0.scale(1.0 - weight);
        Ok(validate_density(&m)?)
    }
}

/// The Pauli matrix `σ_k` for `k` in 1..=3.
pub fn pauli(k: usize) -> Result<ComplexMatrix> {
    let i = Complex64::new(0.0, 1.0);
    match k {
        1 => Ok(ComplexMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]])),
        2 => Ok(ComplexMatrix::from_rows([[ZERO, -i], [i, ZERO]])),
        3 => Ok(ComplexMatrix::from_rows([[ONE, ZERO], [ZERO, -ONE]])),
        _ => Err(Error::PauliIndex(k)),
    }
}

/// `g·σ` for a unit direction `g`.
pub fn observable(g: &UnitVector3) -> ComplexMatrix {
    let [x, y, z] = g.components();
    ComplexMatrix::from_rows([
        [Complex64::new(z, 0.0), Complex64::new(x, -y)],
        [Complex64::new(x, y), Complex64::new(-z, 0.0)],
    ])
}

/// `A ⊗ B ⊗ C` for three single-qubit operators.
pub fn kron3(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> Result<ComplexMatrix> {
    for m in [a, b, c] {
        if m.dim != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: m.dim,
            });
        }
    }
    Ok(a.kron(b).kron(c))
}

/// `Re tr(O ρ)` for a Hermitian 8×8 observable.
pub fn expectation(rho: &DensityMatrix, op: &ComplexMatrix) -> Result<f64> {
    if op.dim != 8 {
        return Err(Error::Dimension {
            expected: 8,
            got: op.dim,
        });
    }
    let residual = op.hermitian_residual();
    if residual > DENSITY_TOL {
        return Err(Error::NotHermitian(residual));
    }
    let r = &rho.0.data;
    let mut acc = ZERO;
    for row in 0..8 {
        for k in 0..8 {
            acc += op.data[row * 8 + k] * r[k * 8 + row];
        }
    }
    if acc.im.abs() >= DENSITY_TOL {
        return Err(Error::Numerical(format!(
            "expectation has imaginary residue {:e}",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// Checks every density-matrix invariant and reports all that fail.
pub fn validate_density(raw: &ComplexMatrix) -> std::result::Result<DensityMatrix, ValidationFailure> {
    if raw.dim != 8 {
        return Err(ValidationFailure {
            violations: vec![Violation::WrongDimension { dim: raw.dim }],
        });
    }
    if raw.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(ValidationFailure {
            violations: vec![Violation::NonFinite],
        });
    }
    let mut violations = Vec::new();
    let herm = raw.hermitian_residual();
    if herm > DENSITY_TOL {
        violations.push(Violation::NotHermitian { residual: herm });
    }
    let trace_res = (raw.trace() - ONE).norm();
    if trace_res > DENSITY_TOL {
        violations.push(Violation::TraceNotOne {
            residual: trace_res,
        });
    }
    let sym = raw.hermitian_part();
    let min_eig = hermitian_eigenvalues(&sym.data, 8)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if min_eig < EIGENVALUE_FLOOR {
        violations.push(Violation::NotPositiveSemidefinite { residual: -min_eig });
    }
    if violations.is_empty() {
        Ok(DensityMatrix(raw.clone()))
    } else {
        Err(ValidationFailure { violations })
    }
}

/// `|ψ⟩⟨ψ|`
pub fn pure_to_density(psi: &PureState) -> Result<DensityMatrix> {
    let norm_sq: f64 = psi.0.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sq - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotNormalized(norm_sq));
    }
    let mut m = ComplexMatrix::zeros(8);
    for r in 0..8 {
        for c in 0..8 {
            m.data[r * 8 + c] = psi.0[r] * psi.0[c].conj();
        }
    }
    Ok(validate_density(&m)?)
}
