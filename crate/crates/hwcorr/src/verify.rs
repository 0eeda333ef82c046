//! Independent cross-checks for the main pipeline.
//!
//! Everything here deliberately takes the slow, obvious route so that
//! agreement with the fast path is evidence rather than tautology:
//! correlation tensors are re-derived by materializing full-size operator
//! products, the trace norm is recomputed from the symmetric block embedding
//! `[[0, M], [M^t, 0]]`, and a partial-transpose comparator provides an
//! entanglement signal of a completely different family.

use crate::correlations::CorrelationData;
use crate::hw_basis::{full_operator_basis, PhaseChoice};
use crate::linalg::{hermitian_eigenvalues, symmetric_eigenvalues};
use crate::matrix::{kron, ComplexMatrix, RealMatrix};
use crate::states::DensityMatrix;
use crate::{Error, Result};

/// Transpose applied to the designated parties' indices only.
pub fn partial_transpose(rho: &DensityMatrix, parties: &[usize]) -> Result<ComplexMatrix> {
    let n = rho.parties();
    let mut transposed = parties.to_vec();
    transposed.sort_unstable();
    transposed.dedup();
    if transposed.is_empty() || transposed.len() >= n || transposed.iter().any(|&f| f >= n) {
        return Err(Error::InvalidInput(format!(
            "transpose set {transposed:?} must be a nonempty proper subset of 0..{n}"
        )));
    }

    let dims = rho.dims();
    let total = rho.total_dim();
    let decode = |mut idx: usize| {
        let mut out = vec![0usize; n];
        for f in (0..n).rev() {
            out[f] = idx % dims[f];
            idx /= dims[f];
        }
        out
    };
    let encode = |parts: &[usize]| {
        let mut idx = 0;
        for (f, &p) in parts.iter().enumerate() {
            idx = idx * dims[f] + p;
        }
        idx
    };

    let mut out = ComplexMatrix::zeros(total, total);
    for i in 0..total {
        let iparts = decode(i);
        for j in 0..total {
            let jparts = decode(j);
            let mut src_i = iparts.clone();
            let mut src_j = jparts.clone();
            for &f in &transposed {
                src_i[f] = jparts[f];
                src_j[f] = iparts[f];
            }
            out[(i, j)] = rho.matrix()[(encode(&src_i), encode(&src_j))];
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of the partial transpose across a cut. Negative means
/// the state is entangled across that cut (NPT); nonnegative is inconclusive.
pub fn ppt_min_eigenvalue(rho: &DensityMatrix, parties: &[usize]) -> Result<f64> {
    let pt = partial_transpose(rho, parties)?;
    Ok(hermitian_eigenvalues(&pt)[0])
}

/// Trace norm via the symmetric embedding `[[0, M], [M^t, 0]]`, whose
/// spectrum is `±σ_i` padded with zeros; the positive part sums to the trace
/// norm. A different route from the production one-sided Jacobi.
pub fn trace_norm_oracle(m: &RealMatrix) -> f64 {
    let (rows, cols) = (m.rows(), m.cols());
    let n = rows + cols;
    let mut embed = RealMatrix::zeros(n, n);
    for i in 0..rows {
        for j in 0..cols {
            embed[(i, rows + j)] = m[(i, j)];
            embed[(rows + j, i)] = m[(i, j)];
        }
    }
    symmetric_eigenvalues(&embed).iter().filter(|&&l| l > 0.0).sum()
}

/// Re-derives every correlation tensor by building each full-size observable
/// product explicitly and tracing against the state. Quadratically slower
/// than the transform path and entirely independent of it.
#[allow(clippy::needless_range_loop)]
pub fn extract_bruteforce(rho: &DensityMatrix, phase: PhaseChoice) -> Result<CorrelationData> {
    let dims = rho.dims();
    let n = dims.len();
    let total = rho.total_dim();
    if total > 81 {
        return Err(Error::InvalidInput(format!(
            "brute-force extraction is capped at total dimension 81, got {total}"
        )));
    }
    let bases: Vec<Vec<ComplexMatrix>> =
        dims.iter().map(|&d| full_operator_basis(d, phase)).collect::<Result<_>>()?;

    let mut data = CorrelationData::zero(dims.to_vec(), phase)?;
    for mask in 1usize..1 << n {
        let members: Vec<usize> = (0..n).filter(|f| mask & (1 << f) != 0).collect();
        let block_sizes: Vec<usize> = members.iter().map(|&f| dims[f] * dims[f] - 1).collect();
        let len: usize = block_sizes.iter().product();
        let mut scale = 1.0;
        for &f in &members {
            scale *= 2.0 / dims[f] as f64;
        }
        let mut tensor = vec![0.0; len];
        for (flat, slot) in tensor.iter_mut().enumerate() {
            // decode the canonical flat index into per-party labels
            let mut labels = vec![0usize; members.len()];
            let mut rem = flat;
            for k in (0..members.len()).rev() {
                labels[k] = rem % block_sizes[k];
                rem /= block_sizes[k];
            }
            // full-size operator: identity on parties outside the subset
            let mut op = ComplexMatrix::identity(1);
            for f in 0..n {
                let factor = match members.iter().position(|&g| g == f) {
                    Some(k) => &bases[f][labels[k] + 1],
                    None => &bases[f][0],
                };
                op = kron(&op, factor);
            }
            let product = rho.matrix().matmul(&op);
            *slot = product.trace().re * scale;
        }
        data.set_tensor_for_mask(mask, tensor)?;
    }
    Ok(data)
}

/// Agreement report between fast and brute-force extraction.
pub fn extraction_agreement(fast: &CorrelationData, slow: &CorrelationData) -> Result<f64> {
    if fast.dims() != slow.dims() {
        return Err(Error::InvalidInput("dims mismatch".into()));
    }
    let n = fast.dims().len();
    let mut worst = 0.0f64;
    for mask in 1usize..1 << n {
        let members: Vec<usize> = (0..n).filter(|f| mask & (1 << f) != 0).collect();
        let a = fast.tensor(&members)?;
        let b = slow.tensor(&members)?;
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}
