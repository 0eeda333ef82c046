//! Multipartite density matrices: validation, construction of the GHZ
//! white-noise families, seeded random states, and the JSON state format.
//!
//! Parties are indexed from 0 in code and rendered 1-based in output. The
//! joint index is row-major over parties: party 0 is the most significant
//! digit of a basis index.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::hermitian_eigenvalues;
use crate::matrix::ComplexMatrix;
use crate::{Error, Result};

pub use crate::matrix::kron;

/// Entrywise Hermiticity tolerance for a valid state.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Trace-one tolerance for a valid state.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalue floor: mild negativity is rounding, anything below is invalid.
pub const EIGENVALUE_FLOOR: f64 = -1e-9;

/// A validated multipartite quantum state with per-party dimensions.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: ComplexMatrix,
}

/// Outcome of checking the density-matrix invariants.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub passed: bool,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.len() > 4 {
        return Err(Error::InvalidInput(format!(
            "party count must be between 1 and 4, got {}",
            dims.len()
        )));
    }
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidInput(format!("party dimension must be >= 2, got {d}")));
    }
    Ok(dims.iter().product())
}

/// Checks the Hermiticity, trace and positivity invariants of a candidate
/// state. Only a size mismatch is an error; defects are reported.
pub fn validate(dims: &[usize], matrix: &ComplexMatrix) -> Result<ValidationReport> {
    let total = check_dims(dims)?;
    if matrix.rows() != total || matrix.cols() != total {
        return Err(Error::InvalidInput(format!(
            "matrix is {}x{}, dims {:?} require {}x{}",
            matrix.rows(),
            matrix.cols(),
            dims,
            total,
            total
        )));
    }
    let hermiticity_defect = matrix.hermiticity_defect();
    let trace_defect = (matrix.trace() - Complex64::new(1.0, 0.0)).norm();
    let min_eigenvalue = hermitian_eigenvalues(matrix)[0];
    let passed = hermiticity_defect <= HERMITICITY_TOL
        && trace_defect <= TRACE_TOL
        && min_eigenvalue >= EIGENVALUE_FLOOR;
    Ok(ValidationReport { hermiticity_defect, trace_defect, min_eigenvalue, passed })
}

#[derive(Serialize, Deserialize)]
struct StateFileRepr {
    dims: Vec<usize>,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl DensityMatrix {
    /// Validating constructor: rejects anything that is not a state.
    pub fn new(dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        let report = validate(&dims, &matrix)?;
        if !report.passed {
            return Err(Error::Validation(format!(
                "not a density matrix: hermiticity defect {:.3e}, trace defect {:.3e}, min eigenvalue {:.3e}",
                report.hermiticity_defect, report.trace_defect, report.min_eigenvalue
            )));
        }
        Ok(Self { dims, matrix })
    }

    /// Constructor for states that are valid by construction (projectors of
    /// normalized vectors, convex mixtures of valid states, reductions).
    /// Checks sizes only.
    pub(crate) fn from_parts(dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        let total = check_dims(&dims)?;
        if matrix.rows() != total || matrix.cols() != total {
            return Err(Error::InvalidInput("matrix size does not match dims".into()));
        }
        Ok(Self { dims, matrix })
    }

    /// Projector onto a (normalized copy of a) state vector.
    pub fn from_state_vector(dims: Vec<usize>, amplitudes: &[Complex64]) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amplitudes.len() != total {
            return Err(Error::InvalidInput(format!(
                "state vector has {} amplitudes, dims {:?} require {}",
                amplitudes.len(),
                dims,
                total
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 {
            return Err(Error::InvalidInput("state vector is zero".into()));
        }
        let scale = 1.0 / norm_sq.sqrt();
        let mut matrix = ComplexMatrix::zeros(total, total);
        for i in 0..total {
            for j in 0..total {
                matrix[(i, j)] = amplitudes[i] * amplitudes[j].conj() * scale * scale;
            }
        }
        Self::from_parts(dims, matrix)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims)?;
        let matrix = ComplexMatrix::identity(total).scale(Complex64::new(1.0 / total as f64, 0.0));
        Self::from_parts(dims, matrix)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn validation_report(&self) -> ValidationReport {
        validate(&self.dims, &self.matrix).expect("sizes are consistent by construction")
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        let n = self.matrix.rows();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * self.matrix[(j, i)];
            }
        }
        acc.re
    }

    /// Convex mixture `w·self + (1-w)·other`.
    pub fn mix(&self, other: &Self, weight: f64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::InvalidInput("mixing states with different dims".into()));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidInput(format!("mixing weight {weight} outside [0,1]")));
        }
        let m = self
            .matrix
            .scale(Complex64::new(weight, 0.0))
            .add(&other.matrix.scale(Complex64::new(1.0 - weight, 0.0)));
        Self::from_parts(self.dims.clone(), m)
    }

    /// Relabels parties: new party `k` is old party `perm[k]`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidInput(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let total = self.total_dim();
        let mut out = ComplexMatrix::zeros(total, total);
        for i in 0..total {
            let iparts = decode_index(&new_dims, i);
            let iold = encode_permuted(&self.dims, perm, &iparts);
            for j in 0..total {
                let jparts = decode_index(&new_dims, j);
                let jold = encode_permuted(&self.dims, perm, &jparts);
                out[(i, j)] = self.matrix[(iold, jold)];
            }
        }
        Self::from_parts(new_dims, out)
    }

    /// True when every party transposition leaves the state unchanged within
    /// `tol` (requires equal party dimensions).
    pub fn is_permutation_invariant(&self, tol: f64) -> bool {
        let n = self.dims.len();
        if n < 2 {
            return true;
        }
        if self.dims.windows(2).any(|w| w[0] != w[1]) {
            return false;
        }
        for a in 0..n - 1 {
            for b in a + 1..n {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.swap(a, b);
                let swapped = self.permute_parties(&perm).expect("valid transposition");
                if self.matrix.max_abs_diff(swapped.matrix()) > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_json(&self) -> String {
        let repr =
            StateFileRepr { dims: self.dims.clone(), matrix: self.matrix.to_re_im_rows() };
        serde_json::to_string_pretty(&repr).expect("state serialization cannot fail")
    }

    /// Parses and validates a state from the JSON wire format.
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: StateFileRepr =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("bad state file: {e}")))?;
        let matrix = ComplexMatrix::from_re_im_rows(&repr.matrix)?;
        Self::new(repr.dims, matrix)
    }
}

fn decode_index(dims: &[usize], mut idx: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for f in (0..dims.len()).rev() {
        out[f] = idx % dims[f];
        idx /= dims[f];
    }
    out
}

fn encode_index(dims: &[usize], parts: &[usize]) -> usize {
    let mut idx = 0;
    for (f, &p) in parts.iter().enumerate() {
        idx = idx * dims[f] + p;
    }
    idx
}

fn encode_permuted(old_dims: &[usize], perm: &[usize], new_parts: &[usize]) -> usize {
    let mut old_parts = vec![0; old_dims.len()];
    for (k, &p) in perm.iter().enumerate() {
        old_parts[p] = new_parts[k];
    }
    encode_index(old_dims, &old_parts)
}

/// Reduced density operator on `keep` (0-based party indices), in ascending
/// party order. `keep` must be a nonempty proper subset.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.parties();
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.len() >= n || keep.iter().any(|&f| f >= n) {
        return Err(Error::InvalidInput(format!(
            "keep set {keep:?} must be a nonempty proper subset of 0..{n}"
        )));
    }
    let traced: Vec<usize> = (0..n).filter(|f| !keep.contains(f)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&f| rho.dims()[f]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&f| rho.dims()[f]).collect();
    let kept_total: usize = kept_dims.iter().product();
    let traced_total: usize = traced_dims.iter().product();

    let mut out = ComplexMatrix::zeros(kept_total, kept_total);
    let mut full_i = vec![0usize; n];
    let mut full_j = vec![0usize; n];
    for i in 0..kept_total {
        let iparts = decode_index(&kept_dims, i);
        for j in 0..kept_total {
            let jparts = decode_index(&kept_dims, j);
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..traced_total {
                let tparts = decode_index(&traced_dims, t);
                for (slot, &f) in keep.iter().enumerate() {
                    full_i[f] = iparts[slot];
                    full_j[f] = jparts[slot];
                }
                for (slot, &f) in traced.iter().enumerate() {
                    full_i[f] = tparts[slot];
                    full_j[f] = tparts[slot];
                }
                acc += rho.matrix()[(encode_index(rho.dims(), &full_i), encode_index(rho.dims(), &full_j))];
            }
            out[(i, j)] = acc;
        }
    }
    DensityMatrix::from_parts(kept_dims, out)
}

/// GHZ projector `|g><g|` with `|g> = (1/√d)·Σ_k |k,...,k>` on `n` parties of
/// local dimension `d`.
pub fn ghz(n: usize, d: usize) -> Result<DensityMatrix> {
    if !(n == 3 || n == 4) {
        return Err(Error::InvalidInput(format!("GHZ family supports 3 or 4 parties, got {n}")));
    }
    if d < 2 {
        return Err(Error::InvalidInput(format!("local dimension must be >= 2, got {d}")));
    }
    let dims = vec![d; n];
    let total: usize = dims.iter().product();
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut vector = vec![Complex64::new(0.0, 0.0); total];
    for k in 0..d {
        vector[encode_index(&dims, &vec![k; n])] = amp;
    }
    DensityMatrix::from_state_vector(dims, &vector)
}

/// How the family parameter `x` enters the convex combination.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixingConvention {
    /// `x` multiplies the maximally mixed part: `ρ(x) = x·I/D + (1-x)·target`.
    NoiseWeight,
    /// `x` multiplies the target state: `ρ(x) = x·target + (1-x)·I/D`.
    StateWeight,
}

/// A parameterized one-dimensional family of states on a fixed dim list.
#[derive(Clone, Debug)]
pub struct StateFamily {
    name: &'static str,
    dims: Vec<usize>,
    convention: MixingConvention,
}

pub const FAMILY_NAMES: &[&str] = &["ghz3-white-noise", "ghz4-white-noise"];

/// Looks up a built-in family by name.
///
/// `ghz3-white-noise` is `x/8·I₈ + (1-x)·GHZ₃` (noise-weight), while
/// `ghz4-white-noise` is `x·GHZ₄ + (1-x)/16·I₁₆` (state-weight). The two
/// conventions are opposite on purpose; each matches how its thresholds are
/// quoted, and collapsing them would flip every threshold to `1-x`.
pub fn family(name: &str) -> Result<StateFamily> {
    match name {
        "ghz3-white-noise" => Ok(StateFamily {
            name: "ghz3-white-noise",
            dims: vec![2, 2, 2],
            convention: MixingConvention::NoiseWeight,
        }),
        "ghz4-white-noise" => Ok(StateFamily {
            name: "ghz4-white-noise",
            dims: vec![2, 2, 2, 2],
            convention: MixingConvention::StateWeight,
        }),
        other => Err(Error::InvalidInput(format!(
            "unknown family '{other}' (available: {})",
            FAMILY_NAMES.join(", ")
        ))),
    }
}

impl StateFamily {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn convention(&self) -> MixingConvention {
        self.convention
    }

    /// The family member at parameter `x ∈ [0, 1]`.
    pub fn state(&self, x: f64) -> Result<DensityMatrix> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidInput(format!("family parameter {x} outside [0,1]")));
        }
        let target = ghz(self.dims.len(), self.dims[0])?;
        let noise = DensityMatrix::maximally_mixed(self.dims.clone())?;
        match self.convention {
            MixingConvention::NoiseWeight => noise.mix(&target, x),
            MixingConvention::StateWeight => target.mix(&noise, x),
        }
    }
}

fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn random_unit_vector(rng: &mut ChaCha12Rng, len: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq > 1e-12 {
            let s = 1.0 / norm_sq.sqrt();
            return v.into_iter().map(|z| z * s).collect();
        }
    }
}

/// Projector onto a Haar-random unit vector. Deterministic in `seed`
/// (ChaCha12 keyed by the seed; components are i.i.d. complex normal).
pub fn random_pure(dims: &[usize], seed: u64) -> Result<DensityMatrix> {
    let total = check_dims(dims)?;
    let mut rng = seeded_rng(seed);
    let v = random_unit_vector(&mut rng, total);
    DensityMatrix::from_state_vector(dims.to_vec(), &v)
}

/// Full-rank random mixed state from the Ginibre ensemble: `G·G†/Tr(G·G†)`.
/// Deterministic in `seed`.
pub fn random_mixed(dims: &[usize], seed: u64) -> Result<DensityMatrix> {
    let total = check_dims(dims)?;
    let mut rng = seeded_rng(seed);
    let mut g = ComplexMatrix::zeros(total, total);
    for i in 0..total {
        for j in 0..total {
            g[(i, j)] = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
    }
    let gram = g.matmul(&g.conjugate_transpose());
    let trace = gram.trace().re;
    DensityMatrix::from_parts(dims.to_vec(), gram.scale(Complex64::new(1.0 / trace, 0.0)))
}

/// Random fully separable state: a convex mixture of `terms` product states,
/// each a tensor product of single-party random pure factors. Weights are
/// uniform draws normalized to sum to one. Deterministic in `seed`.
pub fn random_product_mixture(dims: &[usize], terms: usize, seed: u64) -> Result<DensityMatrix> {
    let total = check_dims(dims)?;
    if terms == 0 {
        return Err(Error::InvalidInput("mixture needs at least one term".into()));
    }
    let mut rng = seeded_rng(seed);
    let mut weights: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total_weight: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total_weight;
    }

    let mut acc = ComplexMatrix::zeros(total, total);
    for &w in &weights {
        let mut product = ComplexMatrix::identity(1);
        for &d in dims {
            let v = random_unit_vector(&mut rng, d);
            let mut factor = ComplexMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    factor[(i, j)] = v[i] * v[j].conj();
                }
            }
            product = kron(&product, &factor);
        }
        acc = acc.add(&product.scale(Complex64::new(w, 0.0)));
    }
    DensityMatrix::from_parts(dims.to_vec(), acc)
}
