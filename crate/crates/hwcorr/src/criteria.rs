//! Separability criteria: per-partition block matrices of correlation
//! tensors, their trace-norm bounds, and the aggregate genuine-multipartite-
//! entanglement scores.
//!
//! For each way of splitting the parties, a block matrix `S` is assembled
//! from the correlation tensors. If the state is separable across that split,
//! `‖S‖_tr` cannot exceed a closed-form constant in the local dimensions;
//! a larger trace norm certifies entanglement across the split. Averaging the
//! trace norms over a family of splits and comparing against the max (or, for
//! permutation-invariant states, the mean) of the per-split constants
//! certifies genuine multipartite entanglement.
//!
//! Role conventions: a partition names parties by the letters `f, g, h, e`.
//! The letters pick which tensors land in which block, so different role
//! assignments to the same grouping are genuinely different criteria; all
//! variants are enumerated by [`evaluate_all`]. Canonical assignments (used
//! by the aggregate scores) give unassigned letters the remaining parties in
//! ascending index order.

use serde::Serialize;

use crate::correlations::CorrelationData;
use crate::hw_basis::PhaseChoice;
use crate::linalg::singular_values;
use crate::matrix::RealMatrix;
use crate::states::DensityMatrix;
use crate::{correlations, Error, Result};

/// Numerical permutation-invariance tolerance for the corollary verdicts.
pub const PERMUTATION_INVARIANCE_TOL: f64 = 1e-10;

/// Relative width of the numerical-zero band for margins. Some separable
/// states sit exactly on their bound (a pure product state saturates the
/// full-tripartition proof constant, for instance), where the sign of
/// `trace_norm - bound` is rounding noise; margins inside the band are
/// reported as exactly zero so saturation never reads as detection.
pub const MARGIN_SNAP_TOL: f64 = 1e-11;

/// Sum of singular values, computed by one-sided Jacobi on the matrix itself.
pub fn trace_norm(m: &RealMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// `trace_norm - bound`, with the numerical-zero band collapsed to zero.
pub fn snapped_margin(trace_norm: f64, bound: f64) -> f64 {
    let raw = trace_norm - bound;
    if raw.abs() <= MARGIN_SNAP_TOL * (1.0 + bound.abs()) {
        0.0
    } else {
        raw
    }
}

/// Which constant to use for the full-tripartition criterion. The stated
/// constant is smaller than what its own derivation establishes; the proof
/// constant is the provably valid one and is the default everywhere.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundVariant {
    Statement,
    #[default]
    Proof,
}

impl std::fmt::Display for BoundVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundVariant::Statement => write!(f, "statement"),
            BoundVariant::Proof => write!(f, "proof"),
        }
    }
}

/// A partition of the parties with explicit role assignments (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Partition {
    /// Three parties, `f | gh`.
    TriBipartition { f: usize, g: usize, h: usize },
    /// Three parties, `f | g | h`.
    TriFull { f: usize, g: usize, h: usize },
    /// Four parties, `f | ghe`; `h` is the probed party of the triple.
    QuadOneVsThree { f: usize, g: usize, h: usize, e: usize },
    /// Four parties, `fg | he`; `h` is the probed party of the column pair.
    QuadTwoVsTwo { f: usize, g: usize, h: usize, e: usize },
    /// Four parties, `f | g | he`.
    QuadTripartition { f: usize, g: usize, h: usize, e: usize },
}

impl Partition {
    fn roles(&self) -> Vec<usize> {
        match *self {
            Partition::TriBipartition { f, g, h } | Partition::TriFull { f, g, h } => {
                vec![f, g, h]
            }
            Partition::QuadOneVsThree { f, g, h, e }
            | Partition::QuadTwoVsTwo { f, g, h, e }
            | Partition::QuadTripartition { f, g, h, e } => vec![f, g, h, e],
        }
    }

    pub fn parties(&self) -> usize {
        self.roles().len()
    }

    fn validate(&self, n: usize) -> Result<()> {
        let roles = self.roles();
        let mut seen = vec![false; n];
        if roles.len() != n
            || roles.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidInput(format!(
                "partition roles {roles:?} are not a permutation of the {n} parties"
            )));
        }
        Ok(())
    }

    /// Human-readable label in role order, 1-based, e.g. `2|13` or `12|34`.
    pub fn label(&self) -> String {
        let p = |i: usize| (i + 1).to_string();
        match *self {
            Partition::TriBipartition { f, g, h } => format!("{}|{}{}", p(f), p(g), p(h)),
            Partition::TriFull { f, g, h } => format!("{}|{}|{}", p(f), p(g), p(h)),
            Partition::QuadOneVsThree { f, g, h, e } => {
                format!("{}|{}{}{}", p(f), p(g), p(h), p(e))
            }
            Partition::QuadTwoVsTwo { f, g, h, e } => {
                format!("{}{}|{}{}", p(f), p(g), p(h), p(e))
            }
            Partition::QuadTripartition { f, g, h, e } => {
                format!("{}|{}|{}{}", p(f), p(g), p(h), p(e))
            }
        }
    }

    /// The criterion this partition is judged by.
    pub fn criterion(&self) -> Criterion {
        match self {
            Partition::TriBipartition { .. } => Criterion::Theorem1,
            Partition::TriFull { .. } => Criterion::Theorem2,
            Partition::QuadOneVsThree { .. } => Criterion::Theorem4,
            Partition::QuadTwoVsTwo { .. } => Criterion::Theorem5,
            Partition::QuadTripartition { .. } => Criterion::Theorem6,
        }
    }
}

/// Identifier of the per-partition criteria; the numbering matches the CLI's
/// `--criterion` names.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Theorem1,
    Theorem2,
    Theorem4,
    Theorem5,
    Theorem6,
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Criterion::Theorem1 => "theorem1",
            Criterion::Theorem2 => "theorem2",
            Criterion::Theorem4 => "theorem4",
            Criterion::Theorem5 => "theorem5",
            Criterion::Theorem6 => "theorem6",
        };
        write!(f, "{s}")
    }
}

/// Block matrix of correlation tensors for one partition.
#[derive(Clone, Debug)]
pub struct SMatrix {
    pub partition: Partition,
    pub matrix: RealMatrix,
    /// Row-block heights: `[1, rows of the tensor side]`.
    pub row_blocks: Vec<usize>,
    /// Column-block widths, leading `1` included when the partition carries one.
    pub col_blocks: Vec<usize>,
}

impl SMatrix {
    pub fn trace_norm(&self) -> f64 {
        trace_norm(&self.matrix)
    }
}

/// Stacks `[[top_scalar, v_1^t, ...], [lead_col, M_1, ...]]` into one matrix.
/// `leading` is `(top scalar, leading column)`; `None` for partitions without
/// the scalar block.
fn assemble(
    partition: Partition,
    leading: Option<(f64, Vec<f64>)>,
    blocks: Vec<(Vec<f64>, RealMatrix)>,
) -> SMatrix {
    let body_rows = blocks[0].1.rows();
    let lead_cols = usize::from(leading.is_some());
    let total_cols = lead_cols + blocks.iter().map(|(v, _)| v.len()).sum::<usize>();
    let mut out = RealMatrix::zeros(1 + body_rows, total_cols);
    let mut col_blocks = Vec::with_capacity(1 + blocks.len());

    let mut col = 0;
    if let Some((scalar, ref lead)) = leading {
        debug_assert_eq!(lead.len(), body_rows);
        out[(0, 0)] = scalar;
        for (i, &v) in lead.iter().enumerate() {
            out[(1 + i, 0)] = v;
        }
        col = 1;
        col_blocks.push(1);
    }
    for (vector, matrix) in &blocks {
        debug_assert_eq!(vector.len(), matrix.cols());
        debug_assert_eq!(matrix.rows(), body_rows);
        for (j, &v) in vector.iter().enumerate() {
            out[(0, col + j)] = v;
        }
        for i in 0..body_rows {
            for j in 0..matrix.cols() {
                out[(1 + i, col + j)] = matrix[(i, j)];
            }
        }
        col += vector.len();
        col_blocks.push(vector.len());
    }

    SMatrix { partition, matrix: out, row_blocks: vec![1, body_rows], col_blocks }
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

/// Assembles the block matrix for any partition.
///
/// Layouts (`T^(..)` flat in the canonical order, `M(rows; cols)` the
/// matricization with those index sets):
///
/// * `f|gh`:    `[[2, (T^g)^t, (T^gh)^t], [2T^f, M(f;g), M(f;gh)]]`
/// * `f|g|h`:   `[[2, (T^g)^t, (T^h)^t], [2T^f, M(f;g), M(f;h)]]`
/// * `f|ghe`:   `[[2, (T^h)^t, (T^ghe)^t], [2T^f, M(f;h), M(f;ghe)]]`
/// * `fg|he`:   `[[2, (T^h)^t, (T^he)^t], [2T^fg, M(fg;h), M(fg;he)]]`
/// * `f|g|he`:  `[[(T^g)^t, (T^gh)^t, (T^ghe)^t], [M(f;g), M(f;gh), M(f;ghe)]]`
pub fn s_matrix(data: &CorrelationData, partition: &Partition) -> Result<SMatrix> {
    partition.validate(data.parties())?;
    let t = |parties: &[usize]| -> Result<Vec<f64>> { Ok(data.tensor(parties)?.to_vec()) };
    match *partition {
        Partition::TriBipartition { f, g, h } => Ok(assemble(
            partition.clone(),
            Some((2.0, scaled(data.tensor(&[f])?, 2.0))),
            vec![
                (t(&[g])?, data.matricize(&[f], &[g])?),
                (t(&[g, h])?, data.matricize(&[f], &[g, h])?),
            ],
        )),
        Partition::TriFull { f, g, h } => Ok(assemble(
            partition.clone(),
            Some((2.0, scaled(data.tensor(&[f])?, 2.0))),
            vec![
                (t(&[g])?, data.matricize(&[f], &[g])?),
                (t(&[h])?, data.matricize(&[f], &[h])?),
            ],
        )),
        Partition::QuadOneVsThree { f, g, h, e } => Ok(assemble(
            partition.clone(),
            Some((2.0, scaled(data.tensor(&[f])?, 2.0))),
            vec![
                (t(&[h])?, data.matricize(&[f], &[h])?),
                (t(&[g, h, e])?, data.matricize(&[f], &[g, h, e])?),
            ],
        )),
        Partition::QuadTwoVsTwo { f, g, h, e } => Ok(assemble(
            partition.clone(),
            Some((2.0, scaled(data.tensor(&[f, g])?, 2.0))),
            vec![
                (t(&[h])?, data.matricize(&[f, g], &[h])?),
                (t(&[h, e])?, data.matricize(&[f, g], &[h, e])?),
            ],
        )),
        Partition::QuadTripartition { f, g, h, e } => Ok(assemble(
            partition.clone(),
            None,
            vec![
                (t(&[g])?, data.matricize(&[f], &[g])?),
                (t(&[g, h])?, data.matricize(&[f], &[g, h])?),
                (t(&[g, h, e])?, data.matricize(&[f], &[g, h, e])?),
            ],
        )),
    }
}

// Squared-norm ceilings for the vectors appearing in the separable
// decompositions: a single party, a pure pair, a pure triple.
fn single_party_cap(d: f64) -> f64 {
    4.0 * (d - 1.0) / (d * d)
}

fn pair_cap(dg: f64, dh: f64) -> f64 {
    16.0 * (dh * dh - 1.0) / (dg * dh * dh * dh)
}

fn triple_cap(da: f64, db: f64, dc: f64) -> f64 {
    let p = da * db * dc;
    64.0 * (p * (p + 2.0) - (da * da * db * db + da * da * dc * dc + db * db * dc * dc))
        / (p * p * p)
}

/// Pairwise-product dimension condition required by the one-vs-three
/// criterion on its triple side.
fn triple_condition(da: usize, db: usize, dc: usize) -> bool {
    da * db >= dc && da * dc >= db && db * dc >= da
}

/// Separability ceiling for `‖S(ρ_f|gh)‖_tr`.
pub fn bound_tri_bipartition(dims: &[usize], f: usize, g: usize, h: usize) -> f64 {
    let (df, dg, dh) = (dims[f] as f64, dims[g] as f64, dims[h] as f64);
    2.0 / (df * dg * dh)
        * ((df * df + 4.0 * df - 4.0)
            * (dg.powi(3) * dh.powi(3) + dg * dg * dh.powi(3) - dg * dh.powi(3)
                + 4.0 * dg * dg * dh * dh
                - 4.0 * dg * dg)
            / (dg * dh))
            .sqrt()
}

/// Separability ceiling for `‖S(ρ_f|g|h)‖_tr` in the requested variant.
pub fn bound_tri_full(dims: &[usize], f: usize, g: usize, h: usize, variant: BoundVariant) -> f64 {
    let (df, dg, dh) = (dims[f] as f64, dims[g] as f64, dims[h] as f64);
    let head = df * df + 4.0 * df - 4.0;
    let tail = match variant {
        BoundVariant::Statement => dg * dg * dh * dh + dg + dh - 2.0,
        BoundVariant::Proof => dg * dg * dh * dh + dg * dg * (dh - 1.0) + dh * dh * (dg - 1.0),
    };
    2.0 / (df * dg * dh) * (head * tail).sqrt()
}

/// Separability ceiling for `‖S(ρ_f|ghe)‖_tr`. Errors when the dimension
/// condition on the triple side fails (the criterion is then inapplicable,
/// which is not a statement about the state).
pub fn bound_quad_1v3(dims: &[usize], f: usize, g: usize, h: usize, e: usize) -> Result<f64> {
    if !triple_condition(dims[g], dims[h], dims[e]) {
        return Err(Error::CriterionInapplicable(format!(
            "triple side dims ({}, {}, {}) violate the pairwise-product condition",
            dims[g], dims[h], dims[e]
        )));
    }
    let (df, dg, dh, de) = (dims[f] as f64, dims[g] as f64, dims[h] as f64, dims[e] as f64);
    let col = (4.0 * dh * dh + 4.0 * dh - 4.0) / (dh * dh) + triple_cap(dg, dh, de);
    let row = (df * df + 4.0 * df - 4.0) / (df * df);
    Ok((col * row).sqrt())
}

/// Separability ceiling for `‖S(ρ_fg|he)‖_tr`.
pub fn bound_quad_2v2(dims: &[usize], f: usize, g: usize, h: usize, e: usize) -> f64 {
    let (df, dg, dh, de) = (dims[f] as f64, dims[g] as f64, dims[h] as f64, dims[e] as f64);
    (1.0 + pair_cap(df, dg)).sqrt() * (4.0 + single_party_cap(dh) + pair_cap(dh, de)).sqrt()
}

/// Separability ceiling for `‖S(ρ_f|g|he)‖_tr`.
pub fn bound_quad_tripart(dims: &[usize], f: usize, g: usize, h: usize, e: usize) -> f64 {
    let (df, dg, dh, de) = (dims[f] as f64, dims[g] as f64, dims[h] as f64, dims[e] as f64);
    (1.0 + single_party_cap(df)).sqrt()
        * (1.0 + single_party_cap(dh) + pair_cap(dh, de)).sqrt()
        * single_party_cap(dg).sqrt()
}

/// Separability ceiling for any partition.
pub fn partition_bound(
    dims: &[usize],
    partition: &Partition,
    variant: BoundVariant,
) -> Result<f64> {
    partition.validate(dims.len())?;
    match *partition {
        Partition::TriBipartition { f, g, h } => Ok(bound_tri_bipartition(dims, f, g, h)),
        Partition::TriFull { f, g, h } => Ok(bound_tri_full(dims, f, g, h, variant)),
        Partition::QuadOneVsThree { f, g, h, e } => bound_quad_1v3(dims, f, g, h, e),
        Partition::QuadTwoVsTwo { f, g, h, e } => Ok(bound_quad_2v2(dims, f, g, h, e)),
        Partition::QuadTripartition { f, g, h, e } => Ok(bound_quad_tripart(dims, f, g, h, e)),
    }
}

fn remaining_ascending(n: usize, used: &[usize]) -> Vec<usize> {
    (0..n).filter(|p| !used.contains(p)).collect()
}

/// Canonical `f|gh` with `g < h`.
pub fn tri_bipartition(f: usize) -> Partition {
    let rest = remaining_ascending(3, &[f]);
    Partition::TriBipartition { f, g: rest[0], h: rest[1] }
}

/// Canonical `f|g|h` with `g < h`.
pub fn tri_full(f: usize) -> Partition {
    let rest = remaining_ascending(3, &[f]);
    Partition::TriFull { f, g: rest[0], h: rest[1] }
}

/// `f|ghe` with the probe `h` chosen and `g < e` the remaining two.
pub fn quad_one_vs_three(f: usize, h: usize) -> Partition {
    let rest = remaining_ascending(4, &[f, h]);
    Partition::QuadOneVsThree { f, g: rest[0], h, e: rest[1] }
}

/// `fg|he` with row pair `{a, b}`, probe `h` inside the complement.
pub fn quad_two_vs_two(a: usize, b: usize, h: usize) -> Partition {
    let (f, g) = if a < b { (a, b) } else { (b, a) };
    let rest = remaining_ascending(4, &[f, g, h]);
    Partition::QuadTwoVsTwo { f, g, h, e: rest[0] }
}

/// `f|g|he` with the pair `{h, e}` the complement of `{f, g}`, `h` chosen.
pub fn quad_tripartition(f: usize, g: usize, h: usize) -> Partition {
    let rest = remaining_ascending(4, &[f, g, h]);
    Partition::QuadTripartition { f, g, h, e: rest[0] }
}

/// Reference comparison curves from other separability criteria, quoted in
/// closed form for plots and tables only.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReferenceCurves {
    /// `-3x + 4 - 2√3`, tripartite comparator; root at `(4 - 2√3)/3`.
    pub f2: f64,
    /// `9x² - 4`, four-partite one-vs-three comparator; root at `2/3`.
    pub f6: f64,
    /// `9x² - 3`, four-partite tripartition comparator; root at `1/√3`.
    pub f7: f64,
}

pub fn reference_curves(x: f64) -> ReferenceCurves {
    ReferenceCurves {
        f2: -3.0 * x + 4.0 - 2.0 * 3.0f64.sqrt(),
        f6: 9.0 * x * x - 4.0,
        f7: 9.0 * x * x - 3.0,
    }
}

/// 1-based role assignment as serialized in reports.
#[derive(Clone, Debug, Serialize)]
pub struct Roles {
    pub f: usize,
    pub g: usize,
    pub h: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<usize>,
}

impl From<&Partition> for Roles {
    fn from(p: &Partition) -> Self {
        match *p {
            Partition::TriBipartition { f, g, h } | Partition::TriFull { f, g, h } => {
                Roles { f: f + 1, g: g + 1, h: h + 1, e: None }
            }
            Partition::QuadOneVsThree { f, g, h, e }
            | Partition::QuadTwoVsTwo { f, g, h, e }
            | Partition::QuadTripartition { f, g, h, e } => {
                Roles { f: f + 1, g: g + 1, h: h + 1, e: Some(e + 1) }
            }
        }
    }
}

/// One evaluated partition criterion.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionRecord {
    pub criterion: Criterion,
    pub partition: String,
    pub roles: Roles,
    pub trace_norm: f64,
    pub bound: Option<f64>,
    pub bound_variant: BoundVariant,
    pub margin: Option<f64>,
    pub detected: bool,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Aggregate genuine-multipartite-entanglement record.
#[derive(Clone, Debug, Serialize)]
pub struct GmeRecord {
    pub parties: usize,
    /// Mean of the per-partition trace norms (`M₁(ρ)` or `M₂(ρ)`).
    pub score: f64,
    /// Max of the per-partition bounds (`M₁` or `M₂`).
    pub bound_max: f64,
    /// Mean of the per-partition bounds (`J₁` or `J₂`).
    pub bound_mean: f64,
    /// `score > bound_max`: valid for every state.
    pub detected_max: bool,
    /// `score > bound_mean`: valid for permutation-invariant states only.
    pub detected_mean: bool,
    /// Whether the state passed the numerical permutation-invariance test.
    pub corollary_applicable: bool,
}

/// GME record for three parties: the score averages the three canonical
/// one-vs-two trace norms.
pub fn gme3(data: &CorrelationData, permutation_invariant: bool) -> Result<GmeRecord> {
    if data.parties() != 3 {
        return Err(Error::InvalidInput("gme3 needs a three-party state".into()));
    }
    let mut norms = Vec::with_capacity(3);
    let mut bounds = Vec::with_capacity(3);
    for f in 0..3 {
        let partition = tri_bipartition(f);
        norms.push(s_matrix(data, &partition)?.trace_norm());
        bounds.push(partition_bound(data.dims(), &partition, BoundVariant::Statement)?);
    }
    let score = norms.iter().sum::<f64>() / 3.0;
    let bound_max = bounds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bound_mean = bounds.iter().sum::<f64>() / 3.0;
    Ok(GmeRecord {
        parties: 3,
        score,
        bound_max,
        bound_mean,
        detected_max: snapped_margin(score, bound_max) > 0.0,
        detected_mean: snapped_margin(score, bound_mean) > 0.0,
        corollary_applicable: permutation_invariant,
    })
}

/// The 16 partitions aggregated by the four-party GME score: the four
/// canonical one-vs-three splits plus all twelve two-vs-two variants
/// (six row pairs, two probe choices each). This is the unique natural
/// enumeration reproducing the 1/4 and 3/4 weights of the worked four-qubit
/// family and its GME threshold.
pub fn gme4_partitions() -> Vec<Partition> {
    let mut out = Vec::with_capacity(16);
    for f in 0..4 {
        let h = remaining_ascending(4, &[f])[0];
        out.push(quad_one_vs_three(f, h));
    }
    for a in 0..4 {
        for b in a + 1..4 {
            for h in remaining_ascending(4, &[a, b]) {
                out.push(quad_two_vs_two(a, b, h));
            }
        }
    }
    out
}

/// GME record for four parties: the score averages sixteen trace norms (see
/// [`gme4_partitions`]). Errors as inapplicable when the one-vs-three
/// dimension condition fails.
pub fn gme4(data: &CorrelationData, permutation_invariant: bool) -> Result<GmeRecord> {
    if data.parties() != 4 {
        return Err(Error::InvalidInput("gme4 needs a four-party state".into()));
    }
    let partitions = gme4_partitions();
    let mut norms = Vec::with_capacity(16);
    let mut bounds = Vec::with_capacity(16);
    for partition in &partitions {
        norms.push(s_matrix(data, partition)?.trace_norm());
        bounds.push(partition_bound(data.dims(), partition, BoundVariant::Statement)?);
    }
    let score = norms.iter().sum::<f64>() / 16.0;
    let bound_max = bounds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bound_mean = bounds.iter().sum::<f64>() / 16.0;
    Ok(GmeRecord {
        parties: 4,
        score,
        bound_max,
        bound_mean,
        detected_max: snapped_margin(score, bound_max) > 0.0,
        detected_mean: snapped_margin(score, bound_mean) > 0.0,
        corollary_applicable: permutation_invariant,
    })
}

/// Evaluation options: basis phase sign and the full-tripartition bound
/// variant.
#[derive(Copy, Clone, Debug, Default)]
pub struct EvaluateOptions {
    pub phase: PhaseChoice,
    pub bound_variant: BoundVariant,
}

/// Full criterion report for one state.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub dims: Vec<usize>,
    pub phase: PhaseChoice,
    pub bound_variant: BoundVariant,
    pub permutation_invariant: bool,
    pub records: Vec<PartitionRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gme: Option<GmeRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gme_note: Option<String>,
}

impl CriterionReport {
    /// True when any per-partition criterion or aggregate verdict fired.
    pub fn any_detection(&self) -> bool {
        self.records.iter().any(|r| r.detected)
            || self
                .gme
                .as_ref()
                .is_some_and(|g| g.detected_max || (g.detected_mean && g.corollary_applicable))
    }

    /// The first record with this partition label, if present.
    pub fn record(&self, label: &str) -> Option<&PartitionRecord> {
        self.records.iter().find(|r| r.partition == label)
    }
}

/// Every role variant evaluated by [`evaluate_all`], in canonical order.
pub fn all_partitions(n: usize) -> Result<Vec<Partition>> {
    match n {
        3 => {
            let mut out = Vec::with_capacity(9);
            for f in 0..3 {
                let rest = remaining_ascending(3, &[f]);
                out.push(Partition::TriBipartition { f, g: rest[0], h: rest[1] });
                out.push(Partition::TriBipartition { f, g: rest[1], h: rest[0] });
            }
            // swapping g and h only permutes columns of the full-tripartition
            // block matrix, so one orientation per f suffices
            for f in 0..3 {
                out.push(tri_full(f));
            }
            Ok(out)
        }
        4 => {
            let mut out = Vec::with_capacity(48);
            for f in 0..4 {
                for h in remaining_ascending(4, &[f]) {
                    out.push(quad_one_vs_three(f, h));
                }
            }
            for a in 0..4 {
                for b in a + 1..4 {
                    for h in remaining_ascending(4, &[a, b]) {
                        out.push(quad_two_vs_two(a, b, h));
                    }
                }
            }
            for f in 0..4 {
                for g in remaining_ascending(4, &[f]) {
                    for h in remaining_ascending(4, &[f, g]) {
                        out.push(quad_tripartition(f, g, h));
                    }
                }
            }
            Ok(out)
        }
        other => Err(Error::InvalidInput(format!(
            "criteria are defined for 3 or 4 parties, got {other}"
        ))),
    }
}

fn evaluate_partition(
    data: &CorrelationData,
    partition: &Partition,
    variant: BoundVariant,
) -> Result<PartitionRecord> {
    let effective_variant = match partition.criterion() {
        Criterion::Theorem2 => variant,
        _ => BoundVariant::Statement,
    };
    let tn = s_matrix(data, partition)?.trace_norm();
    let (bound, margin, detected, applicable, note) =
        match partition_bound(data.dims(), partition, effective_variant) {
            Ok(b) => {
                let m = snapped_margin(tn, b);
                (Some(b), Some(m), m > 0.0, true, None)
            }
            Err(Error::CriterionInapplicable(reason)) => (None, None, false, false, Some(reason)),
            Err(other) => return Err(other),
        };
    Ok(PartitionRecord {
        criterion: partition.criterion(),
        partition: partition.label(),
        roles: Roles::from(partition),
        trace_norm: tn,
        bound,
        bound_variant: effective_variant,
        margin,
        detected,
        applicable,
        note,
    })
}

/// Runs every applicable criterion (all role variants) plus the aggregate
/// GME score on a three- or four-party state.
pub fn evaluate_all(rho: &DensityMatrix, options: &EvaluateOptions) -> Result<CriterionReport> {
    let n = rho.parties();
    let partitions = all_partitions(n)?;
    let data = correlations::extract(rho, options.phase)?;
    let permutation_invariant = rho.is_permutation_invariant(PERMUTATION_INVARIANCE_TOL);

    let mut records = Vec::with_capacity(partitions.len());
    for partition in &partitions {
        records.push(evaluate_partition(&data, partition, options.bound_variant)?);
    }

    let (gme, gme_note) = match if n == 3 {
        gme3(&data, permutation_invariant)
    } else {
        gme4(&data, permutation_invariant)
    } {
        Ok(record) => (Some(record), None),
        Err(Error::CriterionInapplicable(reason)) => (None, Some(reason)),
        Err(other) => return Err(other),
    };

    Ok(CriterionReport {
        dims: rho.dims().to_vec(),
        phase: options.phase,
        bound_variant: options.bound_variant,
        permutation_invariant,
        records,
        gme,
        gme_note,
    })
}
