//! Correlation tensors of a state in the Heisenberg-Weyl observable basis.
//!
//! For a party subset `S`, the tensor entry at labels `(l_f, m_f)` is
//! `(2^|S| / Π_{f∈S} d_f) · Tr{ρ · Q^{f1} ⋯ Q^{fk}}` with each observable
//! acting on its own party and identity elsewhere. All tensors of all
//! nonempty subsets are extracted in one pass by contracting the state
//! against the per-party operator basis, mode by mode, instead of
//! materializing any full-size observable product.
//!
//! Flattening convention, fixed once here and inherited by every matricization
//! downstream: parties ascending, earlier party major; per-party labels in the
//! canonical `(l, m)` lexicographic order.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::hw_basis::{full_operator_basis, PhaseChoice};
use crate::matrix::{ComplexMatrix, RealMatrix};
use crate::states::DensityMatrix;
use crate::{Error, Result};

/// Every correlation tensor of one state, indexed by nonempty party subsets.
#[derive(Clone, Debug)]
pub struct CorrelationData {
    dims: Vec<usize>,
    phase: PhaseChoice,
    /// `tensors[mask - 1]` is the flat tensor for the party subset whose
    /// bitmask is `mask` (bit `f` set means party `f` participates).
    tensors: Vec<Vec<f64>>,
    max_imag_residue: f64,
}

fn subset_mask(dims_len: usize, parties: &[usize]) -> Result<usize> {
    if parties.is_empty() {
        return Err(Error::InvalidInput("party subset must be nonempty".into()));
    }
    let mut mask = 0usize;
    for &f in parties {
        if f >= dims_len {
            return Err(Error::InvalidInput(format!(
                "party {f} out of range for {dims_len} parties"
            )));
        }
        if mask & (1 << f) != 0 {
            return Err(Error::InvalidInput(format!("party {f} listed twice")));
        }
        mask |= 1 << f;
    }
    Ok(mask)
}

fn mask_parties(mask: usize, dims_len: usize) -> Vec<usize> {
    (0..dims_len).filter(|f| mask & (1 << f) != 0).collect()
}

fn tensor_len(dims: &[usize], mask: usize) -> usize {
    mask_parties(mask, dims.len()).iter().map(|&f| dims[f] * dims[f] - 1).product()
}

/// Contracts one axis of `data` (shape `shape`, earlier axis major) with the
/// square matrix `m`, `new[.., a, ..] = Σ_p m[a][p]·old[.., p, ..]`.
fn mode_transform(data: &mut [Complex64], shape: &[usize], axis: usize, m: &[Vec<Complex64>]) {
    let size = shape[axis];
    let right: usize = shape[axis + 1..].iter().product();
    let left: usize = shape[..axis].iter().product();
    let mut strip = vec![Complex64::new(0.0, 0.0); size];
    for l in 0..left {
        for r in 0..right {
            let base = l * size * right + r;
            for p in 0..size {
                strip[p] = data[base + p * right];
            }
            for (a, row) in m.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for p in 0..size {
                    acc += row[p] * strip[p];
                }
                data[base + a * right] = acc;
            }
        }
    }
}

fn decode(dims: &[usize], mut idx: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for f in (0..dims.len()).rev() {
        out[f] = idx % dims[f];
        idx /= dims[f];
    }
    out
}

/// Extracts every correlation tensor of `rho` in the chosen basis.
pub fn extract(rho: &DensityMatrix, phase: PhaseChoice) -> Result<CorrelationData> {
    let dims = rho.dims().to_vec();
    let n = dims.len();
    let pair_shape: Vec<usize> = dims.iter().map(|d| d * d).collect();
    let total: usize = dims.iter().product();

    // Interleave row/column indices per party: axis f carries (i_f, j_f).
    let mut work = vec![Complex64::new(0.0, 0.0); pair_shape.iter().product()];
    for i in 0..total {
        let iparts = decode(&dims, i);
        for j in 0..total {
            let jparts = decode(&dims, j);
            let mut idx = 0;
            for f in 0..n {
                idx = idx * pair_shape[f] + (iparts[f] * dims[f] + jparts[f]);
            }
            work[idx] = rho.matrix()[(i, j)];
        }
    }

    // Per party, replace the (i_f, j_f) axis by the basis label axis:
    // w[.., a, ..] = Σ_{i,j} B_a[j,i] · ρ[.., (i,j), ..]   (trace contraction)
    for f in 0..n {
        let basis = full_operator_basis(dims[f], phase)?;
        let m: Vec<Vec<Complex64>> = basis
            .iter()
            .map(|b| {
                let mut row = vec![Complex64::new(0.0, 0.0); pair_shape[f]];
                for i in 0..dims[f] {
                    for j in 0..dims[f] {
                        row[i * dims[f] + j] = b[(j, i)];
                    }
                }
                row
            })
            .collect();
        mode_transform(&mut work, &pair_shape, f, &m);
    }

    // Scatter the full expectation tensor into per-subset tensors.
    let mut tensors: Vec<Vec<f64>> =
        (1..1usize << n).map(|mask| vec![0.0; tensor_len(&dims, mask)]).collect();
    let mut max_imag_residue = 0.0f64;
    for (flat, value) in work.iter().enumerate() {
        let labels = decode(&pair_shape, flat);
        max_imag_residue = max_imag_residue.max(value.im.abs());
        let mut mask = 0usize;
        for (f, &a) in labels.iter().enumerate() {
            if a >= 1 {
                mask |= 1 << f;
            }
        }
        if mask == 0 {
            continue;
        }
        let mut subset_idx = 0;
        let mut scale = 1.0;
        for f in 0..n {
            if mask & (1 << f) != 0 {
                subset_idx = subset_idx * (dims[f] * dims[f] - 1) + (labels[f] - 1);
                scale *= 2.0 / dims[f] as f64;
            }
        }
        tensors[mask - 1][subset_idx] = value.re * scale;
    }

    Ok(CorrelationData { dims, phase, tensors, max_imag_residue })
}

impl CorrelationData {
    /// Data with every tensor zero: the maximally mixed state.
    pub fn zero(dims: Vec<usize>, phase: PhaseChoice) -> Result<Self> {
        if dims.is_empty() || dims.len() > 4 || dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidInput(format!("bad dims {dims:?}")));
        }
        let n = dims.len();
        let tensors =
            (1..1usize << n).map(|mask| vec![0.0; tensor_len(&dims, mask)]).collect();
        Ok(Self { dims, phase, tensors, max_imag_residue: 0.0 })
    }

    /// Overwrites one subset tensor; the independent brute-force extraction
    /// path fills its result through this.
    pub(crate) fn set_tensor_for_mask(&mut self, mask: usize, tensor: Vec<f64>) -> Result<()> {
        if mask == 0 || mask >= 1 << self.dims.len() {
            return Err(Error::InvalidInput(format!("subset mask {mask} out of range")));
        }
        if tensor.len() != tensor_len(&self.dims, mask) {
            return Err(Error::InvalidInput("tensor length mismatch".into()));
        }
        self.tensors[mask - 1] = tensor;
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn phase(&self) -> PhaseChoice {
        self.phase
    }

    /// Largest imaginary residue seen while extracting (the defining traces
    /// are real in exact arithmetic).
    pub fn max_imag_residue(&self) -> f64 {
        self.max_imag_residue
    }

    /// The flat tensor for a party subset (0-based indices, any order).
    pub fn tensor(&self, parties: &[usize]) -> Result<&[f64]> {
        let mask = subset_mask(self.dims.len(), parties)?;
        Ok(&self.tensors[mask - 1])
    }

    /// Squared Frobenius norm of one subset tensor.
    pub fn norm_sq(&self, parties: &[usize]) -> Result<f64> {
        Ok(self.tensor(parties)?.iter().map(|t| t * t).sum())
    }

    /// Per-party label-block size `d_f² - 1`.
    pub fn block_size(&self, party: usize) -> usize {
        self.dims[party] * self.dims[party] - 1
    }

    /// Rearranges the tensor on `row_parties ∪ col_parties` into a matrix,
    /// rows enumerating the row parties' labels and columns the col parties'
    /// labels, both in the canonical order.
    pub fn matricize(&self, row_parties: &[usize], col_parties: &[usize]) -> Result<RealMatrix> {
        let row_mask = subset_mask(self.dims.len(), row_parties)?;
        let col_mask = subset_mask(self.dims.len(), col_parties)?;
        if row_mask & col_mask != 0 {
            return Err(Error::InvalidInput("row and column subsets overlap".into()));
        }
        let union = row_mask | col_mask;
        let tensor = &self.tensors[union - 1];

        let rows_sorted = mask_parties(row_mask, self.dims.len());
        let cols_sorted = mask_parties(col_mask, self.dims.len());
        let union_sorted = mask_parties(union, self.dims.len());
        let row_sizes: Vec<usize> = rows_sorted.iter().map(|&f| self.block_size(f)).collect();
        let col_sizes: Vec<usize> = cols_sorted.iter().map(|&f| self.block_size(f)).collect();
        let nrows: usize = row_sizes.iter().product();
        let ncols: usize = col_sizes.iter().product();

        let mut out = RealMatrix::zeros(nrows, ncols);
        let mut union_labels = vec![0usize; union_sorted.len()];
        for ri in 0..nrows {
            let row_labels = decode(&row_sizes, ri);
            for ci in 0..ncols {
                let col_labels = decode(&col_sizes, ci);
                for (slot, &f) in union_sorted.iter().enumerate() {
                    union_labels[slot] = if let Some(p) = rows_sorted.iter().position(|&g| g == f)
                    {
                        row_labels[p]
                    } else {
                        let p = cols_sorted.iter().position(|&g| g == f).unwrap();
                        col_labels[p]
                    };
                }
                let mut flat = 0usize;
                for (slot, &f) in union_sorted.iter().enumerate() {
                    flat = flat * self.block_size(f) + union_labels[slot];
                }
                out[(ri, ci)] = tensor[flat];
            }
        }
        Ok(out)
    }

    /// Evaluates the basis expansion back into a state.
    #[allow(clippy::needless_range_loop)]
    pub fn reconstruct(&self) -> Result<DensityMatrix> {
        let n = self.dims.len();
        let pair_shape: Vec<usize> = self.dims.iter().map(|d| d * d).collect();
        let total: usize = self.dims.iter().product();

        // Rebuild the full expectation tensor; the empty subset carries Tr ρ = 1.
        let mut work = vec![Complex64::new(0.0, 0.0); pair_shape.iter().product()];
        let flat_len = work.len();
        for flat in 0..flat_len {
            let labels = decode(&pair_shape, flat);
            let mut mask = 0usize;
            for (f, &a) in labels.iter().enumerate() {
                if a >= 1 {
                    mask |= 1 << f;
                }
            }
            let value = if mask == 0 {
                1.0
            } else {
                let mut subset_idx = 0;
                let mut scale = 1.0;
                for f in 0..n {
                    if mask & (1 << f) != 0 {
                        subset_idx = subset_idx * (self.dims[f] * self.dims[f] - 1) + (labels[f] - 1);
                        scale *= self.dims[f] as f64 / 2.0;
                    }
                }
                self.tensors[mask - 1][subset_idx] * scale
            };
            work[flat] = Complex64::new(value, 0.0);
        }

        // Inverse transform per party: ρ[.., (i,j), ..] = Σ_a B_a[i,j]/d · w[.., a, ..]
        for f in 0..n {
            let basis = full_operator_basis(self.dims[f], self.phase)?;
            let d = self.dims[f];
            let m: Vec<Vec<Complex64>> = (0..pair_shape[f])
                .map(|p| {
                    let (i, j) = (p / d, p % d);
                    basis.iter().map(|b| b[(i, j)] / d as f64).collect()
                })
                .collect();
            mode_transform(&mut work, &pair_shape, f, &m);
        }

        let mut matrix = ComplexMatrix::zeros(total, total);
        for i in 0..total {
            let iparts = decode(&self.dims, i);
            for j in 0..total {
                let jparts = decode(&self.dims, j);
                let mut idx = 0;
                for f in 0..n {
                    idx = idx * pair_shape[f] + (iparts[f] * self.dims[f] + jparts[f]);
                }
                matrix[(i, j)] = work[idx];
            }
        }
        DensityMatrix::new(self.dims.clone(), matrix)
    }

    /// Evaluates `Tr ρ²` from the tensors alone:
    /// `1/Πd + Σ_S [Π_{f∈S} d_f² / (4^|S| Π d)]·||T^(S)||²`.
    pub fn purity_identity(&self) -> Result<f64> {
        let n = self.dims.len();
        if n < 2 {
            return Err(Error::InvalidInput(
                "purity identity needs at least two parties; use the single-party norm directly"
                    .into(),
            ));
        }
        let total: f64 = self.dims.iter().product::<usize>() as f64;
        let mut acc = 1.0 / total;
        for mask in 1..1usize << n {
            let mut coeff = 1.0 / total;
            for f in 0..n {
                if mask & (1 << f) != 0 {
                    coeff *= (self.dims[f] * self.dims[f]) as f64 / 4.0;
                }
            }
            let norm_sq: f64 = self.tensors[mask - 1].iter().map(|t| t * t).sum();
            acc += coeff * norm_sq;
        }
        Ok(acc)
    }

    /// Subset-label → flat-tensor map with 1-based concatenated party labels
    /// (`"1"`, `"12"`, `"134"`, ...), for serialization.
    pub fn to_label_map(&self) -> BTreeMap<String, Vec<f64>> {
        let n = self.dims.len();
        let mut out = BTreeMap::new();
        for mask in 1..1usize << n {
            let label: String =
                mask_parties(mask, n).iter().map(|f| (f + 1).to_string()).collect();
            out.insert(label, self.tensors[mask - 1].clone());
        }
        out
    }
}

/// Serializable dump of a [`CorrelationData`].
#[derive(Serialize)]
pub struct CorrelationDump {
    pub dims: Vec<usize>,
    pub phase: PhaseChoice,
    pub max_imag_residue: f64,
    pub tensors: BTreeMap<String, Vec<f64>>,
}

impl From<&CorrelationData> for CorrelationDump {
    fn from(data: &CorrelationData) -> Self {
        CorrelationDump {
            dims: data.dims().to_vec(),
            phase: data.phase(),
            max_imag_residue: data.max_imag_residue(),
            tensors: data.to_label_map(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{
        family, ghz, partial_trace, random_mixed, random_product_mixture, random_pure,
        DensityMatrix,
    };

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_qubit_ground_state_vector() {
        let rho = DensityMatrix::from_state_vector(vec![2], &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let data = extract(&rho, PhaseChoice::Plus).unwrap();
        let t = data.tensor(&[0]).unwrap();
        // label order (0,1), (1,0), (1,1): <σx> = 0, <σz> = 1, <-σy> = 0
        assert!((t[0] - 0.0).abs() < 1e-14);
        assert!((t[1] - 1.0).abs() < 1e-14);
        assert!((t[2] - 0.0).abs() < 1e-14);
    }

    #[test]
    fn maximally_mixed_has_no_correlations() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 2, 2]).unwrap();
        let data = extract(&rho, PhaseChoice::Plus).unwrap();
        for mask_parties in [vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2]]
        {
            assert!(data.norm_sq(&mask_parties).unwrap() < 1e-28);
        }
    }

    #[test]
    fn ghz3_full_tensor_norm_saturates_at_four() {
        let data = extract(&ghz(3, 2).unwrap(), PhaseChoice::Plus).unwrap();
        assert!((data.norm_sq(&[0, 1, 2]).unwrap() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn bell_pair_norm_saturates_the_pair_bound() {
        let bell = DensityMatrix::from_state_vector(
            vec![2, 2],
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let data = extract(&bell, PhaseChoice::Plus).unwrap();
        // 16(d₂²-1)/(d₁d₂³) = 3 at (2,2)
        assert!((data.norm_sq(&[0, 1]).unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn pure_single_party_norm_is_closed_form() {
        for d in 2..=6 {
            for seed in 0..5 {
                let rho = random_pure(&[d], seed).unwrap();
                let data = extract(&rho, PhaseChoice::Plus).unwrap();
                let expect = 4.0 * (d as f64 - 1.0) / (d * d) as f64;
                assert!(
                    (data.norm_sq(&[0]).unwrap() - expect).abs() < 1e-10,
                    "d={d} seed={seed}"
                );
            }
        }
    }

    #[test]
    fn product_state_tensors_factor() {
        let a = random_pure(&[2], 3).unwrap();
        let b = random_pure(&[3], 4).unwrap();
        let joint = DensityMatrix::from_parts(
            vec![2, 3],
            crate::matrix::kron(a.matrix(), b.matrix()),
        )
        .unwrap();
        let data = extract(&joint, PhaseChoice::Plus).unwrap();
        let ta = data.tensor(&[0]).unwrap().to_vec();
        let tb = data.tensor(&[1]).unwrap().to_vec();
        let m = data.matricize(&[0], &[1]).unwrap();
        for (i, &x) in ta.iter().enumerate() {
            for (j, &y) in tb.iter().enumerate() {
                assert!((m[(i, j)] - x * y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn matricize_preserves_frobenius_norm() {
        let rho = ghz(3, 2).unwrap();
        let data = extract(&rho, PhaseChoice::Plus).unwrap();
        let m = data.matricize(&[0], &[1, 2]).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 9));
        assert!((m.frobenius_norm_sq() - data.norm_sq(&[0, 1, 2]).unwrap()).abs() < 1e-12);

        let rho4 = ghz(4, 2).unwrap();
        let data4 = extract(&rho4, PhaseChoice::Plus).unwrap();
        let m4 = data4.matricize(&[0, 1], &[2, 3]).unwrap();
        assert!((m4.frobenius_norm_sq() - data4.norm_sq(&[0, 1, 2, 3]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn matricize_rejects_overlap_and_empty() {
        let data = extract(&ghz(3, 2).unwrap(), PhaseChoice::Plus).unwrap();
        assert!(data.matricize(&[0], &[0, 1]).is_err());
        assert!(data.matricize(&[], &[1]).is_err());
        assert!(data.matricize(&[0], &[]).is_err());
    }

    #[test]
    fn zero_tensors_reconstruct_to_maximally_mixed() {
        let data = CorrelationData::zero(vec![2, 2, 2], PhaseChoice::Plus).unwrap();
        let rho = data.reconstruct().unwrap();
        let expect = DensityMatrix::maximally_mixed(vec![2, 2, 2]).unwrap();
        assert!(rho.matrix().max_abs_diff(expect.matrix()) < 1e-15);
    }

    #[test]
    fn round_trip_random_states() {
        for (dims, seeds) in [
            (vec![2usize, 2], 4u64),
            (vec![2, 3], 4),
            (vec![3, 3], 4),
            (vec![2, 2, 2], 4),
            (vec![2, 2, 3], 4),
            (vec![2, 2, 2, 2], 4),
        ] {
            for seed in 0..seeds {
                let rho = random_mixed(&dims, seed).unwrap();
                for phase in [PhaseChoice::Plus, PhaseChoice::Minus] {
                    let data = extract(&rho, phase).unwrap();
                    assert!(data.max_imag_residue() < 1e-10);
                    let back = data.reconstruct().unwrap();
                    assert!(
                        back.matrix().max_abs_diff(rho.matrix()) < 1e-12,
                        "dims {dims:?} seed {seed}"
                    );
                }
            }
        }
    }

    #[test]
    fn purity_identity_matches_direct_purity() {
        for (dims, seeds) in [
            (vec![2usize, 2], 5u64),
            (vec![2, 3], 5),
            (vec![2, 2, 2], 5),
            (vec![2, 2, 2, 2], 3),
        ] {
            for seed in 0..seeds {
                let rho = random_mixed(&dims, 100 + seed).unwrap();
                let data = extract(&rho, PhaseChoice::Plus).unwrap();
                assert!(
                    (data.purity_identity().unwrap() - rho.purity()).abs() < 1e-10,
                    "dims {dims:?} seed {seed}"
                );
            }
        }
    }

    #[test]
    fn purity_identity_reference_points() {
        let mixed = DensityMatrix::maximally_mixed(vec![2, 2, 2, 2]).unwrap();
        let data = extract(&mixed, PhaseChoice::Plus).unwrap();
        assert!((data.purity_identity().unwrap() - 1.0 / 16.0).abs() < 1e-12);

        for seed in 0..10 {
            let rho = random_pure(&[2, 3], seed).unwrap();
            let data = extract(&rho, PhaseChoice::Plus).unwrap();
            assert!((data.purity_identity().unwrap() - 1.0).abs() < 1e-10);
        }

        let single = random_pure(&[3], 0).unwrap();
        let data = extract(&single, PhaseChoice::Plus).unwrap();
        assert!(data.purity_identity().is_err());
    }

    #[test]
    fn purity_identity_equals_bipartite_closed_form() {
        let rho = random_mixed(&[2, 3], 7).unwrap();
        let data = extract(&rho, PhaseChoice::Plus).unwrap();
        let (d1, d2) = (2.0, 3.0);
        let manual = 1.0 / (d1 * d2)
            + d1 / (4.0 * d2) * data.norm_sq(&[0]).unwrap()
            + d2 / (4.0 * d1) * data.norm_sq(&[1]).unwrap()
            + d1 * d2 / 16.0 * data.norm_sq(&[0, 1]).unwrap();
        assert!((data.purity_identity().unwrap() - manual).abs() < 1e-13);
    }

    #[test]
    fn family_purity_matches_identity() {
        let rho = family("ghz3-white-noise").unwrap().state(0.5).unwrap();
        let data = extract(&rho, PhaseChoice::Plus).unwrap();
        assert!((data.purity_identity().unwrap() - rho.purity()).abs() < 1e-10);
    }

    #[test]
    fn pair_tensor_norm_bound_on_random_pure_states() {
        for dims in [[2usize, 2], [2, 3], [3, 3], [2, 4]] {
            let bound = 16.0 * ((dims[1] * dims[1] - 1) as f64)
                / ((dims[0] * dims[1] * dims[1] * dims[1]) as f64);
            for seed in 0..100 {
                let rho = random_pure(&dims, seed).unwrap();
                let data = extract(&rho, PhaseChoice::Plus).unwrap();
                let norm = data.norm_sq(&[0, 1]).unwrap();
                assert!(norm <= bound + 1e-9, "dims {dims:?} seed {seed}: {norm} > {bound}");
            }
        }
    }

    #[test]
    fn pair_norm_difference_relation_for_pure_states() {
        // (d₁/4)||T¹||² - (d₂/4)||T²||² = 1/d₂ - 1/d₁, from equal reduced purities
        for dims in [[2usize, 3], [3, 4]] {
            for seed in 0..50 {
                let rho = random_pure(&dims, seed).unwrap();
                let data = extract(&rho, PhaseChoice::Plus).unwrap();
                let lhs = dims[0] as f64 / 4.0 * data.norm_sq(&[0]).unwrap()
                    - dims[1] as f64 / 4.0 * data.norm_sq(&[1]).unwrap();
                let rhs = 1.0 / dims[1] as f64 - 1.0 / dims[0] as f64;
                assert!((lhs - rhs).abs() < 1e-10, "dims {dims:?} seed {seed}");
            }
        }
    }

    #[test]
    fn triple_tensor_norm_bound_on_random_pure_states() {
        for dims in [[2usize, 2, 2], [2, 2, 4], [2, 3, 4], [3, 3, 3]] {
            let (a, b, c3) = (dims[0] as f64, dims[1] as f64, dims[2] as f64);
            let p = a * b * c3;
            let bound =
                64.0 * (p * (p + 2.0) - (a * a * b * b + a * a * c3 * c3 + b * b * c3 * c3))
                    / (p * p * p);
            for seed in 0..100 {
                let rho = random_pure(&dims, seed).unwrap();
                let data = extract(&rho, PhaseChoice::Plus).unwrap();
                let norm = data.norm_sq(&[0, 1, 2]).unwrap();
                assert!(norm <= bound + 1e-9, "dims {dims:?} seed {seed}: {norm} > {bound}");
            }
        }
    }

    #[test]
    fn phase_choice_leaves_norms_unchanged() {
        let rho = random_mixed(&[2, 3, 2], 21).unwrap();
        let plus = extract(&rho, PhaseChoice::Plus).unwrap();
        let minus = extract(&rho, PhaseChoice::Minus).unwrap();
        for parties in [vec![0], vec![1], vec![2], vec![0, 1], vec![1, 2], vec![0, 2], vec![0, 1, 2]]
        {
            let a = plus.norm_sq(&parties).unwrap();
            let b = minus.norm_sq(&parties).unwrap();
            assert!((a - b).abs() < 1e-10, "{parties:?}");
        }
    }

    #[test]
    fn product_mixture_three_party_tensor_factors() {
        let rho = random_product_mixture(&[2, 2, 2], 1, 9).unwrap();
        let data = extract(&rho, PhaseChoice::Plus).unwrap();
        // single product term: T^{12} = T^1 (T^2)^t exactly
        let m = data.matricize(&[0], &[1]).unwrap();
        let t1 = data.tensor(&[0]).unwrap().to_vec();
        let t2 = data.tensor(&[1]).unwrap().to_vec();
        for (i, &x) in t1.iter().enumerate() {
            for (j, &y) in t2.iter().enumerate() {
                assert!((m[(i, j)] - x * y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn reduced_state_tensors_agree_with_partial_trace() {
        // the pair tensor of the full state equals the pair tensor of the
        // reduced state on those parties
        let rho = random_mixed(&[2, 2, 3], 33).unwrap();
        let full = extract(&rho, PhaseChoice::Plus).unwrap();
        let reduced = partial_trace(&rho, &[0, 2]).unwrap();
        let red = extract(&reduced, PhaseChoice::Plus).unwrap();
        let a = full.tensor(&[0, 2]).unwrap();
        let b = red.tensor(&[0, 1]).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn label_map_covers_all_subsets() {
        let data = extract(&ghz(3, 2).unwrap(), PhaseChoice::Plus).unwrap();
        let map = data.to_label_map();
        let keys: Vec<&str> = map.keys().map(String::as_str).collect();
        assert_eq!(keys, vec!["1", "12", "123", "13", "2", "23", "3"]);
        assert_eq!(map["123"].len(), 27);
    }
}
