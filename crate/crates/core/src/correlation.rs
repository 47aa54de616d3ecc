//! Full three-body Pauli correlations and the singular spectrum of their
//! 3×9 unfolding.
//!
//! The unfolding puts party B's Pauli index on the rows and the pair
//! (A, C) on the columns, A-major: column `3·i + k` for zero-based `i`, `k`.
//! Singular values are transpose-invariant, so the choice of which party
//! sits on the short side does not change `λ₁`.

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::qcore::{expectation, kron3, pauli, DensityMatrix};

/// Relative gap below which `λ₁` and `λ₂` are reported as degenerate.
pub const DEGENERACY_REL_TOL: f64 = 1e-7;

/// Tolerance for orthogonality and unit determinant of local rotations.
pub const ROTATION_TOL: f64 = 1e-10;

/// `t[i][j][k] = tr[ρ (σ_i ⊗ σ_j ⊗ σ_k)]`, zero-based Pauli indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTensor {
    pub entries: [[[f64; 3]; 3]; 3],
}

/// Rows: party B; columns: `3·i + k` over parties (A, C).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationMatrix {
    pub entries: [[f64; 9]; 3],
}

impl CorrelationTensor {
    pub fn zero() -> Self {
        CorrelationTensor {
            entries: [[[0.0; 3]; 3]; 3],
        }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.entries[i][j][k]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .flatten()
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }
}

impl CorrelationMatrix {
    pub fn zero() -> Self {
        CorrelationMatrix {
            entries: [[0.0; 9]; 3],
        }
    }

    pub fn from_rows(entries: [[f64; 9]; 3]) -> Result<Self> {
        if entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("correlation matrix"));
        }
        Ok(CorrelationMatrix { entries })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CorrelationMatrix {
            entries: self.entries.map(|row| row.map(|x| x * factor)),
        }
    }

    /// Inverse of [`unfold`].
    pub fn refold(&self) -> CorrelationTensor {
        let mut t = CorrelationTensor::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    t.entries[i][j][k] = self.entries[j][3 * i + k];
                }
            }
        }
        t
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().flatten().map(|x| x * x).sum()
    }

    /// `M x` for a 9-vector on the (A, C) side.
    pub fn apply(&self, x: &[f64; 9]) -> [f64; 3] {
        self.entries
            .map(|row| row.iter().zip(x).map(|(m, v)| m * v).sum::<f64>())
    }

    /// `Mᵀ u` for a 3-vector on the B side.
    pub fn apply_transpose(&self, u: &[f64; 3]) -> [f64; 9] {
        let mut out = [0.0; 9];
        for (row, &w) in self.entries.iter().zip(u) {
            for (o, m) in out.iter_mut().zip(row) {
                *o += m * w;
            }
        }
        out
    }

    /// `M Mᵀ`
    pub fn gram(&self) -> [[f64; 3]; 3] {
        let mut g = [[0.0; 3]; 3];
        for (row, gr) in self.entries.iter().zip(g.iter_mut()) {
            for (col, gc) in self.entries.iter().zip(gr.iter_mut()) {
                *gc = row.iter().zip(col).map(|(x, y)| x * y).sum();
            }
        }
        g
    }
}

/// Singular values of the unfolding with their singular vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    /// `λ₁ ≥ λ₂ ≥ λ₃ ≥ 0`
    pub values: [f64; 3],
    /// Left singular vectors (B side), `M vᵢ = λᵢ uᵢ`.
    pub left: [[f64; 3]; 3],
    /// Right singular vectors (9-dimensional side), orthonormal.
    pub right: [[f64; 9]; 3],
    pub degenerate_top: bool,
    /// Absolute gap tolerance used for `degenerate_top`.
    pub degeneracy_tol: f64,
}

impl SingularSpectrum {
    pub fn lambda1(&self) -> f64 {
        self.values[0]
    }

    pub fn right9_1(&self) -> &[f64; 9] {
        &self.right[0]
    }

    pub fn right9_2(&self) -> Option<&[f64; 9]> {
        self.degenerate_top.then_some(&self.right[1])
    }

    /// Number of singular values within the degeneracy tolerance of `λ₁`.
    pub fn top_dimension(&self) -> usize {
        self.values
            .iter()
            .filter(|&&v| self.values[0] - v <= self.degeneracy_tol)
            .count()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

pub fn correlation_tensor(rho: &DensityMatrix) -> Result<CorrelationTensor> {
    let paulis = [pauli(1)?, pauli(2)?, pauli(3)?];
    let mut t = CorrelationTensor::zero();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let op = kron3(&paulis[i], &paulis[j], &paulis[k])?;
                t.entries[i][j][k] = expectation(rho, &op)?;
            }
        }
    }
    Ok(t)
}

pub fn unfold(t: &CorrelationTensor) -> CorrelationMatrix {
    let mut m = CorrelationMatrix::zero();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                m.entries[j][3 * i + k] = t.entries[i][j][k];
            }
        }
    }
    m
}

/// Singular spectrum through the symmetric eigenproblem of `M Mᵀ`.
pub fn singular_spectrum(m: &CorrelationMatrix) -> SingularSpectrum {
    let g = m.gram();
    let flat: Vec<f64> = g.iter().flatten().copied().collect();
    let eig = symmetric_eigen(&flat, 3);

    let mut values = [0.0; 3];
    let mut left = [[0.0; 3]; 3];
    for n in 0..3 {
        values[n] = eig.values[n].max(0.0).sqrt();
        left[n] = [eig.vectors[n][0], eig.vectors[n][1], eig.vectors[n][2]];
    }

    let scale = values[0].max(1.0);
    let mut right = [[0.0; 9]; 3];
    let mut found = 0;
    for n in 0..3 {
        if values[n] <= 1e-12 * scale {
            break;
        }
        let mut v = m.apply_transpose(&left[n]);
        for x in v.iter_mut() {
            *x /= values[n];
        }
        if orthonormalize_against(&mut v, &right[..found]) {
            right[found] = v;
            found += 1;
        } else {
            break;
        }
    }
    // Complete null directions from the standard basis in order.
    let mut seed = 0;
    while found < 3 {
        let mut v = [0.0; 9];
        v[seed] = 1.0;
        seed += 1;
        if orthonormalize_against(&mut v, &right[..found]) {
            right[found] = v;
            found += 1;
        }
    }

    let degeneracy_tol = DEGENERACY_REL_TOL * scale;
    SingularSpectrum {
        values,
        left,
        right,
        degenerate_top: values[0] - values[1] <= degeneracy_tol,
        degeneracy_tol,
    }
}

/// Modified Gram–Schmidt step; returns false if `v` collapses.
fn orthonormalize_against(v: &mut [f64; 9], basis: &[[f64; 9]]) -> bool {
    for _ in 0..2 {
        for b in basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-8 {
        return false;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    true
}

/// Proper rotation check: `RᵀR = I` and `det R = 1`.
pub fn check_rotation(r: &[[f64; 3]; 3]) -> Result<()> {
    let mut worst: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            let dot: f64 = (0..3).map(|k| r[k][a] * r[k][b]).sum();
            let expect = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - expect).abs());
        }
    }
    let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
        - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
        + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
    worst = worst.max((det - 1.0).abs());
    if worst > ROTATION_TOL || !worst.is_finite() {
        return Err(Error::NotRotation(worst));
    }
    Ok(())
}

/// Contracts each party index of the tensor with its own rotation.
#[allow(clippy::needless_range_loop)]
pub fn local_rotate(
    t: &CorrelationTensor,
    ra: &[[f64; 3]; 3],
    rb: &[[f64; 3]; 3],
    rc: &[[f64; 3]; 3],
) -> Result<CorrelationTensor> {
    check_rotation(ra)?;
    check_rotation(rb)?;
    check_rotation(rc)?;
    let mut out = CorrelationTensor::zero();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut acc = 0.0;
                for p in 0..3 {
                    for q in 0..3 {
                        for s in 0..3 {
                            acc += ra[i][p] * rb[j][q] * rc[k][s] * t.entries[p][q][s];
                        }
                    }
                }
                out.entries[i][j][k] = acc;
            }
        }
    }
    Ok(out)
}
