//! Small dense eigenvalue and singular value routines.
//!
//! Everything here is a Jacobi-type iteration: robust at the matrix sizes this
//! crate manipulates (≤ a few hundred rows) and accurate to near machine
//! precision, which the criterion tolerances (1e-10 and better) require.
//! Two deliberately different paths exist for singular values:
//! [`singular_values`] (one-sided Jacobi on the matrix itself) feeds the
//! production trace norm, while the verification oracle goes through
//! [`symmetric_eigenvalues`] of a block embedding instead.

use num_complex::Complex64;

use crate::matrix::{ComplexMatrix, RealMatrix};

const MAX_SWEEPS: usize = 64;

/// Singular values of a real matrix by one-sided (Hestenes) Jacobi,
/// descending order.
///
/// Columns of the working copy are rotated pairwise until mutually
/// orthogonal; their norms are then the singular values. This avoids forming
/// the Gram matrix, so small singular values keep absolute accuracy at the
/// eps * ||A|| level.
#[allow(clippy::needless_range_loop)]
pub fn singular_values(m: &RealMatrix) -> Vec<f64> {
    // Orthogonalize columns; transpose first so we work on the smaller side.
    let work = if m.cols() > m.rows() { m.transposed() } else { m.clone() };
    let n = work.cols();
    let rows = work.rows();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| work.column(j)).collect();

    // |cos angle| <= tol counts as orthogonal
    let tol = 1e-14;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for k in 0..rows {
                    app += cols[p][k] * cols[p][k];
                    aqq += cols[q][k] * cols[q][k];
                    apq += cols[p][k] * cols[q][k];
                }
                if apq == 0.0 || apq * apq <= tol * tol * app * aqq {
                    continue;
                }
                let zeta = (aqq - app) / (2.0 * apq);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..rows {
                    let vp = cols[p][k];
                    let vq = cols[q][k];
                    cols[p][k] = c * vp - s * vq;
                    cols[q][k] = s * vp + c * vq;
                }
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Eigenvalues of a real symmetric matrix by cyclic two-sided Jacobi,
/// ascending order.
///
/// The input is symmetrized (averaged with its transpose) before iterating,
/// so small asymmetric rounding in the caller's assembly cannot leak in.
pub fn symmetric_eigenvalues(m: &RealMatrix) -> Vec<f64> {
    assert_eq!(m.rows(), m.cols(), "symmetric eigensolver needs a square matrix");
    let n = m.rows();
    let mut a = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }

    let scale = a.frobenius_norm_sq().sqrt();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(p, k)] = a[(k, p)];
                    a[(k, q)] = s * akp + c * akq;
                    a[(q, k)] = a[(k, q)];
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eig
}

/// Eigenvalues of a complex Hermitian matrix by cyclic Jacobi with complex
/// rotations, ascending order.
///
/// The input is Hermitized (averaged with its conjugate transpose) first.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    assert_eq!(m.rows(), m.cols(), "hermitian eigensolver needs a square matrix");
    let n = m.rows();
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = 0.5 * (m[(i, j)] + m[(j, i)].conj());
        }
    }

    let scale = a.frobenius_norm_sq().sqrt();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // G differs from identity in rows/cols p,q:
                //   G[p][p] = c, G[p][q] = s*phase, G[q][p] = -s*conj(phase), G[q][q] = c
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    let new_kp = c * akp - s * phase.conj() * akq;
                    let new_kq = s * phase * akp + c * akq;
                    a[(k, p)] = new_kp;
                    a[(p, k)] = new_kp.conj();
                    a[(k, q)] = new_kq;
                    a[(q, k)] = new_kq.conj();
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                a[(p, p)] = Complex64::new(app - t * r, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * r, 0.0);
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eig
}
