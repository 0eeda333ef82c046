//! Batch front end for the entanglement criteria: family scans, threshold
//! location by bisection, joint trace-norm/partial-transpose comparisons, and
//! deterministic CSV/JSON rendering.

use serde::Serialize;
use serde_json::Value;

use hwcorr::correlations::CorrelationDump;
use hwcorr::criteria::{
    self, gme3, gme4, s_matrix, BoundVariant, Criterion, CriterionReport, EvaluateOptions,
    GmeRecord, Partition, ReferenceCurves,
};
use hwcorr::states::{family, StateFamily};
use hwcorr::verify::ppt_min_eigenvalue;
use hwcorr::{correlations, DensityMatrix, Error, PhaseChoice, Result};

/// Partial-transpose eigenvalues below this are treated as genuinely negative.
pub const NPT_TOL: f64 = 1e-12;

/// Formats with 12 significant digits: plain decimal in a sane exponent
/// range, lowercase scientific outside it, trailing zeros trimmed.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{v:.11e}");
        // trim zero padding inside the mantissa: 1.20000000000e-7 -> 1.2e-7
        match s.split_once('e') {
            Some((mantissa, exponent)) => {
                let m = if mantissa.contains('.') {
                    mantissa.trim_end_matches('0').trim_end_matches('.')
                } else {
                    mantissa
                };
                format!("{m}e{exponent}")
            }
            None => s,
        }
    }
}

/// Rounds to 12 significant digits (JSON payloads go through this so the
/// serialized form is stable across runs and platforms).
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let exp = v.abs().log10().floor() as i32;
    let scale = 10f64.powi(11 - exp);
    (v * scale).round() / scale
}

/// Recursively rounds every number in a JSON tree to 12 significant digits.
pub fn canonicalize_numbers(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(f) = n.as_f64() {
                    if let Some(rounded) = serde_json::Number::from_f64(round_sig(f)) {
                        *value = Value::Number(rounded);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(canonicalize_numbers),
        Value::Object(map) => map.values_mut().for_each(canonicalize_numbers),
        _ => {}
    }
}

/// Serializes any report as deterministic pretty JSON.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut tree = serde_json::to_value(value)
        .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
    canonicalize_numbers(&mut tree);
    serde_json::to_string_pretty(&tree)
        .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))
}

/// One scan row: every per-partition record, the aggregate, and the
/// family-appropriate reference curves at this grid point.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub x: f64,
    pub records: Vec<criteria::PartitionRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gme: Option<GmeRecord>,
    pub references: ReferenceCurves,
}

/// Scan of a one-parameter family over a grid.
#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub family: String,
    pub dims: Vec<usize>,
    pub convention: hwcorr::MixingConvention,
    pub phase: PhaseChoice,
    pub bound_variant: BoundVariant,
    pub rows: Vec<ScanRow>,
}

/// Evaluates the full criterion set on a strictly increasing grid.
pub fn scan(
    family_name: &str,
    from: f64,
    to: f64,
    steps: usize,
    options: &EvaluateOptions,
) -> Result<ScanResult> {
    if !(0.0..=1.0).contains(&from) || !(0.0..=1.0).contains(&to) || from >= to {
        return Err(Error::InvalidInput(format!(
            "scan range must satisfy 0 <= from < to <= 1, got [{from}, {to}]"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidInput(format!("scan needs at least 2 steps, got {steps}")));
    }
    let fam = family(family_name)?;
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let x = from + (to - from) * i as f64 / (steps - 1) as f64;
        let rho = fam.state(x)?;
        let report = criteria::evaluate_all(&rho, options)?;
        rows.push(ScanRow {
            x,
            records: report.records,
            gme: report.gme,
            references: criteria::reference_curves(x),
        });
    }
    Ok(ScanResult {
        family: fam.name().to_string(),
        dims: fam.dims().to_vec(),
        convention: fam.convention(),
        phase: options.phase,
        bound_variant: options.bound_variant,
        rows,
    })
}

/// Renders a scan as RFC-4180-style CSV: header row, then one line per grid
/// point. Columns: `x`, one margin column per partition record (in the
/// canonical record order), the aggregate score and margins, then the
/// family-appropriate reference curves.
pub fn scan_to_csv(result: &ScanResult) -> String {
    let mut header = vec!["x".to_string()];
    if let Some(first) = result.rows.first() {
        for record in &first.records {
            header.push(format!("margin_{}_{}", record.criterion, record.partition));
        }
        if first.gme.is_some() {
            header.push("gme_score".into());
            header.push("gme_margin_max".into());
            header.push("gme_margin_mean".into());
        }
        match result.dims.len() {
            3 => header.push("f2".into()),
            _ => {
                header.push("f6".into());
                header.push("f7".into());
            }
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for row in &result.rows {
        let mut fields = vec![format_sig(row.x)];
        for record in &row.records {
            match record.margin {
                Some(m) => fields.push(format_sig(m)),
                None => fields.push("inapplicable".into()),
            }
        }
        if let Some(gme) = &row.gme {
            fields.push(format_sig(gme.score));
            fields.push(format_sig(gme.score - gme.bound_max));
            fields.push(format_sig(gme.score - gme.bound_mean));
        }
        match result.dims.len() {
            3 => fields.push(format_sig(row.references.f2)),
            _ => {
                fields.push(format_sig(row.references.f6));
                fields.push(format_sig(row.references.f7));
            }
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// The margin functions a threshold search can bisect, by CLI name.
pub const CRITERION_NAMES: &[&str] = &[
    "theorem1",
    "theorem2",
    "theorem4",
    "theorem5",
    "theorem6",
    "gme3-theorem3",
    "gme3-corollary1",
    "gme4-theorem7",
    "gme4-corollary2",
    "f2",
    "f6",
    "f7",
];

fn canonical_partition_for(criterion: &str, parties: usize) -> Result<Partition> {
    let wrong = |need: usize| {
        Error::InvalidInput(format!(
            "criterion '{criterion}' needs a {need}-party family, got {parties} parties"
        ))
    };
    match criterion {
        "theorem1" => (parties == 3).then(|| criteria::tri_bipartition(0)).ok_or(wrong(3)),
        "theorem2" => (parties == 3).then(|| criteria::tri_full(0)).ok_or(wrong(3)),
        "theorem4" => (parties == 4).then(|| criteria::quad_one_vs_three(0, 1)).ok_or(wrong(4)),
        "theorem5" => (parties == 4).then(|| criteria::quad_two_vs_two(0, 1, 2)).ok_or(wrong(4)),
        "theorem6" => {
            (parties == 4).then(|| criteria::quad_tripartition(0, 1, 2)).ok_or(wrong(4))
        }
        other => Err(Error::InvalidInput(format!(
            "unknown criterion '{other}' (available: {})",
            CRITERION_NAMES.join(", ")
        ))),
    }
}

/// Margin of one named criterion on a family member. Positive means detected.
pub fn criterion_margin(
    fam: &StateFamily,
    criterion: &str,
    x: f64,
    options: &EvaluateOptions,
) -> Result<f64> {
    match criterion {
        "f2" => return Ok(criteria::reference_curves(x).f2),
        "f6" => return Ok(criteria::reference_curves(x).f6),
        "f7" => return Ok(criteria::reference_curves(x).f7),
        _ => {}
    }
    let parties = fam.dims().len();
    let rho = fam.state(x)?;
    let data = correlations::extract(&rho, options.phase)?;
    match criterion {
        "gme3-theorem3" | "gme3-corollary1" => {
            if parties != 3 {
                return Err(Error::InvalidInput(format!(
                    "criterion '{criterion}' needs a 3-party family"
                )));
            }
            let record = gme3(&data, true)?;
            Ok(if criterion == "gme3-theorem3" {
                criteria::snapped_margin(record.score, record.bound_max)
            } else {
                criteria::snapped_margin(record.score, record.bound_mean)
            })
        }
        "gme4-theorem7" | "gme4-corollary2" => {
            if parties != 4 {
                return Err(Error::InvalidInput(format!(
                    "criterion '{criterion}' needs a 4-party family"
                )));
            }
            let record = gme4(&data, true)?;
            Ok(if criterion == "gme4-theorem7" {
                criteria::snapped_margin(record.score, record.bound_max)
            } else {
                criteria::snapped_margin(record.score, record.bound_mean)
            })
        }
        _ => {
            let partition = canonical_partition_for(criterion, parties)?;
            let variant = match partition.criterion() {
                Criterion::Theorem2 => options.bound_variant,
                _ => BoundVariant::Statement,
            };
            let tn = s_matrix(&data, &partition)?.trace_norm();
            let bound = criteria::partition_bound(fam.dims(), &partition, variant)?;
            Ok(criteria::snapped_margin(tn, bound))
        }
    }
}

/// Result of a bisection search for the margin sign change.
#[derive(Clone, Debug, Serialize)]
pub struct ThresholdResult {
    pub family: String,
    pub criterion: String,
    pub tol: f64,
    pub root: f64,
    pub bracket: [f64; 2],
    pub margin_at_bracket: [f64; 2],
    pub evaluations: usize,
}

/// Locates the parameter where a criterion's margin changes sign on [0, 1],
/// bisecting the computed pipeline rather than any closed form.
pub fn threshold(
    family_name: &str,
    criterion: &str,
    tol: f64,
    options: &EvaluateOptions,
) -> Result<ThresholdResult> {
    if tol.is_nan() || tol < 1e-9 {
        return Err(Error::InvalidInput(format!("tolerance must be >= 1e-9, got {tol}")));
    }
    let fam = family(family_name)?;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut m_lo = criterion_margin(&fam, criterion, lo, options)?;
    let mut m_hi = criterion_margin(&fam, criterion, hi, options)?;
    let mut evaluations = 2;
    if m_lo != 0.0 && m_lo.signum() == m_hi.signum() {
        return Err(Error::InvalidInput(format!(
            "margin of '{criterion}' does not change sign on [0,1]: \
             margin(0) = {m_lo:.6e}, margin(1) = {m_hi:.6e}"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let m_mid = criterion_margin(&fam, criterion, mid, options)?;
        evaluations += 1;
        if m_mid == 0.0 || m_mid.signum() == m_lo.signum() {
            lo = mid;
            m_lo = m_mid;
        } else {
            hi = mid;
            m_hi = m_mid;
        }
    }
    Ok(ThresholdResult {
        family: fam.name().into(),
        criterion: criterion.into(),
        tol,
        root: 0.5 * (lo + hi),
        bracket: [lo, hi],
        margin_at_bracket: [m_lo, m_hi],
        evaluations,
    })
}

/// Partial-transpose result for one cut.
#[derive(Clone, Debug, Serialize)]
pub struct PptRecord {
    pub cut: String,
    /// 1-based parties on the transposed side.
    pub parties: Vec<usize>,
    pub min_eigenvalue: f64,
    pub npt: bool,
}

/// Joint report: the trace-norm criteria next to the partial-transpose
/// comparator on every bipartite cut.
#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub report: CriterionReport,
    pub ppt: Vec<PptRecord>,
}

fn cut_label(parties: &[usize], n: usize) -> String {
    let side: String = parties.iter().map(|f| (f + 1).to_string()).collect();
    let rest: String =
        (0..n).filter(|f| !parties.contains(f)).map(|f| (f + 1).to_string()).collect();
    format!("{side}|{rest}")
}

/// Runs the full criterion report plus the partial-transpose comparator.
pub fn compare(rho: &DensityMatrix, options: &EvaluateOptions) -> Result<CompareReport> {
    let report = criteria::evaluate_all(rho, options)?;
    let n = rho.parties();
    let mut cuts: Vec<Vec<usize>> = (0..n).map(|f| vec![f]).collect();
    if n == 4 {
        cuts.push(vec![0, 1]);
        cuts.push(vec![0, 2]);
        cuts.push(vec![0, 3]);
    }
    let mut ppt = Vec::with_capacity(cuts.len());
    for cut in cuts {
        let min_eigenvalue = ppt_min_eigenvalue(rho, &cut)?;
        ppt.push(PptRecord {
            cut: cut_label(&cut, n),
            parties: cut.iter().map(|f| f + 1).collect(),
            min_eigenvalue,
            npt: min_eigenvalue < -NPT_TOL,
        });
    }
    Ok(CompareReport { report, ppt })
}

/// Serializable basis dump for the `basis` subcommand.
#[derive(Serialize)]
pub struct BasisDump {
    pub d: usize,
    pub phase: PhaseChoice,
    pub labels: Vec<(usize, usize)>,
    pub hermiticity_defect: f64,
    pub orthogonality_defect: f64,
    pub observables: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn basis_dump(d: usize, phase: PhaseChoice) -> Result<BasisDump> {
    let basis = hwcorr::basis_set(d, phase)?;
    Ok(BasisDump {
        d,
        phase,
        labels: basis.labels().to_vec(),
        hermiticity_defect: basis.hermiticity_defect(),
        orthogonality_defect: basis.orthogonality_defect(),
        observables: basis.observables().iter().map(|q| q.to_re_im_rows()).collect(),
    })
}

/// Tensor dump of a state.
pub fn tensors_dump(rho: &DensityMatrix, phase: PhaseChoice) -> Result<CorrelationDump> {
    let data = correlations::extract(rho, phase)?;
    Ok(CorrelationDump::from(&data))
}

/// Exit-code contract: 0 success, 1 invalid input or usage, 2 numerical
/// failure.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) | Error::Validation(_) | Error::CriterionInapplicable(_) => 1,
        Error::Numerical(_) => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_sig_basics() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(2.0), "2");
        assert_eq!(format_sig(-4.0), "-4");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(1e-7), "1e-7");
        assert_eq!(format_sig(1.25e14), "1.25e14");
        assert_eq!(format_sig(123456.789), "123456.789");
    }

    #[test]
    fn round_sig_is_idempotent() {
        for v in [0.4941, -3.25e-11, 1.0 / 7.0, 9.9999e13] {
            assert_eq!(round_sig(v), round_sig(round_sig(v)));
        }
    }

    #[test]
    fn canonicalize_rounds_nested_numbers() {
        let mut v = serde_json::json!({"a": [0.123456789012345], "b": {"c": 1.0}});
        canonicalize_numbers(&mut v);
        assert_eq!(v["a"][0], serde_json::json!(0.123456789012));
        assert_eq!(v["b"]["c"], serde_json::json!(1.0));
    }

    #[test]
    fn scan_validates_its_range() {
        let opts = EvaluateOptions::default();
        assert!(scan("ghz3-white-noise", 0.5, 0.5, 10, &opts).is_err());
        assert!(scan("ghz3-white-noise", 0.0, 1.5, 10, &opts).is_err());
        assert!(scan("ghz3-white-noise", 0.0, 1.0, 1, &opts).is_err());
        assert!(scan("no-such-family", 0.0, 1.0, 10, &opts).is_err());
    }

    #[test]
    fn scan_csv_is_deterministic_and_well_formed() {
        let opts = EvaluateOptions::default();
        let a = scan_to_csv(&scan("ghz3-white-noise", 0.0, 1.0, 5, &opts).unwrap());
        let b = scan_to_csv(&scan("ghz3-white-noise", 0.0, 1.0, 5, &opts).unwrap());
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines.len(), 6);
        let headers = lines[0].split(',').count();
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), headers);
        }
        assert!(lines[0].starts_with("x,margin_theorem1_1|23,"));
        assert!(lines[0].ends_with(",f2"));
    }

    #[test]
    fn threshold_matches_example_values() {
        let opts = EvaluateOptions::default();
        let t = threshold("ghz3-white-noise", "theorem1", 5e-5, &opts).unwrap();
        assert!((t.root - 0.4941).abs() < 5e-4, "theorem1 root {}", t.root);
        let t = threshold("ghz4-white-noise", "theorem4", 5e-5, &opts).unwrap();
        assert!((t.root - 0.4142).abs() < 5e-4, "theorem4 root {}", t.root);
        let t = threshold("ghz4-white-noise", "theorem6", 5e-5, &opts).unwrap();
        assert!((t.root - 0.4930).abs() < 5e-4, "theorem6 root {}", t.root);
        let t = threshold("ghz4-white-noise", "gme4-corollary2", 5e-5, &opts).unwrap();
        assert!((t.root - 0.6361).abs() < 5e-4, "corollary2 root {}", t.root);
    }

    #[test]
    fn threshold_reports_missing_sign_change() {
        // with the proof-valid constant the full-tripartition margin of the
        // tri family is negative on the whole range
        let opts = EvaluateOptions::default();
        let err = threshold("ghz3-white-noise", "theorem2", 1e-6, &opts).unwrap_err();
        match err {
            Error::InvalidInput(msg) => assert!(msg.contains("does not change sign"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
        // the statement variant does cross on this family
        let opts =
            EvaluateOptions { bound_variant: BoundVariant::Statement, ..Default::default() };
        assert!(threshold("ghz3-white-noise", "theorem2", 1e-6, &opts).is_ok());
    }

    #[test]
    fn threshold_rejects_small_tolerance_and_bad_names() {
        let opts = EvaluateOptions::default();
        assert!(threshold("ghz3-white-noise", "theorem1", 1e-10, &opts).is_err());
        assert!(threshold("ghz3-white-noise", "no-such", 1e-6, &opts).is_err());
        assert!(threshold("ghz3-white-noise", "theorem4", 1e-6, &opts).is_err());
    }

    #[test]
    fn reference_curve_thresholds() {
        let opts = EvaluateOptions::default();
        let t = threshold("ghz3-white-noise", "f2", 1e-9, &opts).unwrap();
        assert!((t.root - (4.0 - 2.0 * 3.0f64.sqrt()) / 3.0).abs() < 1e-6);
        let t = threshold("ghz4-white-noise", "f6", 1e-9, &opts).unwrap();
        assert!((t.root - 2.0 / 3.0).abs() < 1e-6);
        let t = threshold("ghz4-white-noise", "f7", 1e-9, &opts).unwrap();
        assert!((t.root - 1.0 / 3.0f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn compare_flags_ghz_and_clears_product_states() {
        let opts = EvaluateOptions::default();
        let ghz4 = hwcorr::ghz(4, 2).unwrap();
        let cmp = compare(&ghz4, &opts).unwrap();
        assert!(cmp.report.any_detection());
        // the pure GHZ exceeds every bound: all 48 role variants fire
        for record in &cmp.report.records {
            assert!(record.detected, "{} not detected on GHZ", record.partition);
        }
        assert_eq!(cmp.ppt.len(), 7);
        for record in &cmp.ppt {
            assert!(record.npt, "cut {} not NPT on GHZ", record.cut);
        }

        let product = hwcorr::random_product_mixture(&[2, 2, 2], 2, 5).unwrap();
        let cmp = compare(&product, &opts).unwrap();
        assert!(!cmp.report.any_detection());
        for record in &cmp.ppt {
            assert!(!record.npt, "separable state flagged NPT on {}", record.cut);
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code_for(&Error::InvalidInput("x".into())), 1);
        assert_eq!(exit_code_for(&Error::Validation("x".into())), 1);
        assert_eq!(exit_code_for(&Error::CriterionInapplicable("x".into())), 1);
        assert_eq!(exit_code_for(&Error::Numerical("x".into())), 2);
    }

    #[test]
    fn canonical_json_is_deterministic() {
        let opts = EvaluateOptions::default();
        let rho = family("ghz3-white-noise").unwrap().state(0.3).unwrap();
        let a = to_canonical_json(&criteria::evaluate_all(&rho, &opts).unwrap()).unwrap();
        let b = to_canonical_json(&criteria::evaluate_all(&rho, &opts).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"partition\": \"1|23\""));
    }
}
