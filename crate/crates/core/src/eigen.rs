//! Cyclic Jacobi eigensolver for the small dense matrices used here
//! (3×3 Gram matrices, and Hermitian 3×3 / 8×8 matrices through their
//! real symmetric embedding).

use num_complex::Complex64;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a real symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `vectors[i]` is the unit eigenvector belonging to `values[i]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Decomposes the symmetric `n × n` matrix stored row-major in `a`.
///
/// Only the upper triangle is trusted; the lower one is mirrored from it.
pub fn symmetric_eigen(a: &[f64], n: usize) -> SymmetricEigen {
    assert_eq!(a.len(), n * n, "symmetric_eigen: expected {n}x{n} input");
    let mut m = vec![0.0; n * n];
    for p in 0..n {
        for q in p..n {
            m[p * n + q] = a[p * n + q];
            m[q * n + p] = a[p * n + q];
        }
    }
    let mut v = vec![0.0; n * n];
    for p in 0..n {
        v[p * n + p] = 1.0;
    }

    let frob_sq: f64 = m.iter().map(|x| x * x).sum();
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        if off <= 1e-34 * frob_sq || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]).then(i.cmp(&j)));
    SymmetricEigen {
        values: order.iter().map(|&i| m[i * n + i]).collect(),
        vectors: order
            .iter()
            .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
            .collect(),
    }
}

/// Real symmetric `2n × 2n` embedding `[[Re H, -Im H], [Im H, Re H]]` of a
/// Hermitian matrix. Every eigenvalue of `H` appears twice in the embedding.
fn real_embedding(h: &[Complex64], n: usize) -> Vec<f64> {
    let m = 2 * n;
    let mut e = vec![0.0; m * m];
    for r in 0..n {
        for c in 0..n {
            let z = h[r * n + c];
            e[r * m + c] = z.re;
            e[r * m + (c + n)] = -z.im;
            e[(r + n) * m + c] = z.im;
            e[(r + n) * m + (c + n)] = z.re;
        }
    }
    e
}

/// Eigenvalues of a Hermitian `n × n` matrix (row-major), descending.
pub fn hermitian_eigenvalues(h: &[Complex64], n: usize) -> Vec<f64> {
    let eig = symmetric_eigen(&real_embedding(h, n), 2 * n);
    eig.values
        .chunks(2)
        .map(|pair| 0.5 * (pair[0] + pair[1]))
        .collect()
}

/// Unit eigenvector of a Hermitian matrix for its largest eigenvalue.
pub fn hermitian_top_eigenvector(h: &[Complex64], n: usize) -> (f64, Vec<Complex64>) {
    let eig = symmetric_eigen(&real_embedding(h, n), 2 * n);
    let top = &eig.vectors[0];
    let vec = (0..n).map(|k| Complex64::new(top[k], top[k + n])).collect();
    (eig.values[0], vec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(eig: &SymmetricEigen, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for (val, vec) in eig.values.iter().zip(&eig.vectors) {
            for r in 0..n {
                for c in 0..n {
                    out[r * n + c] += val * vec[r] * vec[c];
                }
            }
        }
        out
    }

    #[test]
    fn diagonal_is_sorted() {
        let a = [1.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 2.0];
        let eig = symmetric_eigen(&a, 3);
        assert_eq!(eig.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(eig.vectors[0], vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn reconstructs_dense_symmetric() {
        let a = [
            4.0, 1.0, -2.0, 0.5, 1.0, 3.0, 0.0, 1.5, -2.0, 0.0, 2.0, -1.0, 0.5, 1.5, -1.0, 1.0,
        ];
        let eig = symmetric_eigen(&a, 4);
        let back = reconstruct(&eig, 4);
        for (x, y) in a.iter().zip(&back) {
            assert!((x - y).abs() < 1e-13);
        }
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = (0..4).map(|k| eig.vectors[i][k] * eig.vectors[j][k]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        // 2·I on a rotated plane plus a distinct value.
        let a = [2.0, 0.0, 0.0, 0.0, 1.5, 0.5, 0.0, 0.5, 1.5];
        let eig = symmetric_eigen(&a, 3);
        assert!((eig.values[0] - 2.0).abs() < 1e-14);
        assert!((eig.values[1] - 2.0).abs() < 1e-14);
        assert!((eig.values[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_pauli_y() {
        let i = Complex64::new(0.0, 1.0);
        let z = Complex64::new(0.0, 0.0);
        let y = [z, -i, i, z];
        let vals = hermitian_eigenvalues(&y, 2);
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] + 1.0).abs() < 1e-14);
        let (val, v) = hermitian_top_eigenvector(&y, 2);
        assert!((val - 1.0).abs() < 1e-14);
        // σ_y v = v
        let w0 = -i * v[1];
        let w1 = i * v[0];
        assert!((w0 - v[0]).norm() < 1e-13 && (w1 - v[1]).norm() < 1e-13);
    }
}
