//! Heisenberg-Weyl displacement operators and the Hermitian observable basis
//! built from them.
//!
//! The displacement operators combine a cyclic shift (index `m`) with a phase
//! ramp (index `l`) on a `d`-dimensional space. Conjugating a displacement
//! lands on the negated label up to a phase, `D(l,m)^† = e^{2πi·ml/d}·D(-l,-m)`,
//! so the labels split into conjugate pairs `{(l,m), (-l,-m)}`. Each pair
//! spans a two-dimensional operator space carrying exactly two orthogonal
//! Hermitian quadratures, and that is how the observable basis is built: the
//! lexicographically lower label of a pair gets `X·D + conj(X)·D^†` with
//! `X = (1 ± i)/2`, and its partner gets the same combination of `i·D` (the
//! quadrature a quarter turn away). Self-paired labels (`2l ≡ 2m ≡ 0 mod d`,
//! which is all of them at `d = 2`) carry a single observable from the plain
//! combination. The result is Hermitian and exactly orthogonal,
//! `Tr{Q(l,m) Q(l',m')} = d·δ`, for every `d` and either sign of `X`.
//! Pairing the labels is what makes the d ≥ 3 cross terms
//! `d·sin(2πml/d)` between conjugate labels vanish; a one-formula basis
//! cannot be orthogonal there.
//!
//! For `d = 2` and the `+` sign the basis is the Pauli set `{σx, σz, -σy}` in
//! label order `(0,1), (1,0), (1,1)`; the `-` sign flips the third element to
//! `+σy`. The two sign choices always yield bases equal up to a signed
//! within-pair relabeling, so every tensor norm and trace-norm criterion
//! downstream is invariant under the choice.
//!
//! Label convention used crate-wide: pairs `(l, m)` ordered lexicographically
//! with `l` major, `(0,0)` excluded, giving `d²-1` labels.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matrix::ComplexMatrix;
use crate::{Error, Result};

/// Sign choice in `X = (1 ± i)/2`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseChoice {
    /// `X = (1 + i)/2` (the crate default; at d = 2 the third observable is -σy).
    #[default]
    Plus,
    /// `X = (1 - i)/2` (at d = 2 the third observable is +σy).
    Minus,
}

impl PhaseChoice {
    pub fn x(self) -> Complex64 {
        match self {
            PhaseChoice::Plus => Complex64::new(0.5, 0.5),
            PhaseChoice::Minus => Complex64::new(0.5, -0.5),
        }
    }
}

impl std::fmt::Display for PhaseChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhaseChoice::Plus => write!(f, "plus"),
            PhaseChoice::Minus => write!(f, "minus"),
        }
    }
}

fn check_indices(d: usize, l: usize, m: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("dimension must be >= 2, got {d}")));
    }
    if l >= d || m >= d {
        return Err(Error::InvalidInput(format!(
            "label ({l},{m}) out of range for dimension {d}"
        )));
    }
    Ok(())
}

/// Displacement operator `D(l,m) = Σ_k e^{2πi·kl/d} |k><(k+m) mod d|`.
///
/// Unitary; `D(0,0)` is the identity. Phases are evaluated through
/// `cos/sin(2π·(kl mod d)/d)` so the argument never exceeds one turn.
pub fn hw_displacement(d: usize, l: usize, m: usize) -> Result<ComplexMatrix> {
    check_indices(d, l, m)?;
    let mut out = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        let angle = 2.0 * PI * ((k * l) % d) as f64 / d as f64;
        out[(k, (k + m) % d)] = Complex64::new(angle.cos(), angle.sin());
    }
    Ok(out)
}

/// The label `(-l, -m) mod d` whose displacement is conjugate to `(l, m)`'s.
fn conjugate_label(d: usize, l: usize, m: usize) -> (usize, usize) {
    ((d - l) % d, (d - m) % d)
}

/// Hermitian observable at label `(l, m)`.
///
/// The conjugate-pair representative (lexicographically lower label, or a
/// self-paired label) is `X·D(l,m) + conj(X)·D(l,m)^†`; the partner label is
/// the orthogonal quadrature `X·(iD(rep)) + conj(X)·(iD(rep))^†` of the
/// representative's displacement. See the module docs for why.
pub fn hw_observable(d: usize, l: usize, m: usize, phase: PhaseChoice) -> Result<ComplexMatrix> {
    check_indices(d, l, m)?;
    let x = phase.x();
    let partner = conjugate_label(d, l, m);
    let disp = if partner >= (l, m) {
        hw_displacement(d, l, m)?
    } else {
        hw_displacement(d, partner.0, partner.1)?.scale(Complex64::new(0.0, 1.0))
    };
    Ok(disp.scale(x).add(&disp.conjugate_transpose().scale(x.conj())))
}

/// The `d²-1` labels `(l,m) != (0,0)` in canonical order.
pub fn labels(d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(d * d - 1);
    for l in 0..d {
        for m in 0..d {
            if l == 0 && m == 0 {
                continue;
            }
            out.push((l, m));
        }
    }
    out
}

/// Ordered Hermitian observable basis for one local dimension.
#[derive(Clone, Debug)]
pub struct HWObservableBasis {
    d: usize,
    labels: Vec<(usize, usize)>,
    observables: Vec<ComplexMatrix>,
    phase_choice: PhaseChoice,
}

impl HWObservableBasis {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn labels(&self) -> &[(usize, usize)] {
        &self.labels
    }

    pub fn observables(&self) -> &[ComplexMatrix] {
        &self.observables
    }

    pub fn phase_choice(&self) -> PhaseChoice {
        self.phase_choice
    }

    /// Worst entrywise deviation from Hermiticity over the basis.
    pub fn hermiticity_defect(&self) -> f64 {
        self.observables.iter().map(ComplexMatrix::hermiticity_defect).fold(0.0, f64::max)
    }

    /// Worst deviation of `Tr{Q Q'}` from `d·δ` over all basis pairs.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.observables.iter().enumerate() {
            for (j, b) in self.observables.iter().enumerate() {
                let t = a.matmul(b).trace();
                let expect = if i == j { self.d as f64 } else { 0.0 };
                worst = worst.max((t - Complex64::new(expect, 0.0)).norm());
            }
        }
        worst
    }
}

/// All `d²-1` non-identity observables in canonical label order.
pub fn basis_set(d: usize, phase: PhaseChoice) -> Result<HWObservableBasis> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("dimension must be >= 2, got {d}")));
    }
    let labels = labels(d);
    let observables = labels
        .iter()
        .map(|&(l, m)| hw_observable(d, l, m, phase))
        .collect::<Result<Vec<_>>>()?;
    Ok(HWObservableBasis { d, labels, observables, phase_choice: phase })
}

/// Identity followed by the canonical observables: the full orthogonal
/// operator basis with `Tr{B_a B_b} = d·δ_ab`, used by the tensor transforms.
pub(crate) fn full_operator_basis(d: usize, phase: PhaseChoice) -> Result<Vec<ComplexMatrix>> {
    let mut out = Vec::with_capacity(d * d);
    out.push(ComplexMatrix::identity(d));
    for (l, m) in labels(d) {
        out.push(hw_observable(d, l, m, phase)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mat2(entries: [[Complex64; 2]; 2]) -> ComplexMatrix {
        ComplexMatrix::from_vec(
            2,
            2,
            vec![entries[0][0], entries[0][1], entries[1][0], entries[1][1]],
        )
        .unwrap()
    }

    #[test]
    fn displacement_d2_gives_pauli_x_and_z() {
        let sx = mat2([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
        let sz = mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]);
        assert!(hw_displacement(2, 0, 1).unwrap().max_abs_diff(&sx) < 1e-15);
        assert!(hw_displacement(2, 1, 0).unwrap().max_abs_diff(&sz) < 1e-15);
    }

    #[test]
    fn displacement_zero_label_is_identity() {
        for d in 2..=6 {
            let id = ComplexMatrix::identity(d);
            assert!(hw_displacement(d, 0, 0).unwrap().max_abs_diff(&id) < 1e-15);
        }
    }

    #[test]
    fn displacement_is_unitary() {
        for d in 2..=5 {
            for l in 0..d {
                for m in 0..d {
                    let dm = hw_displacement(d, l, m).unwrap();
                    let prod = dm.conjugate_transpose().matmul(&dm);
                    assert!(prod.max_abs_diff(&ComplexMatrix::identity(d)) < 1e-14);
                }
            }
        }
    }

    #[test]
    fn displacement_rejects_bad_indices() {
        assert!(hw_displacement(2, 2, 0).is_err());
        assert!(hw_displacement(2, 0, 5).is_err());
        assert!(hw_displacement(1, 0, 0).is_err());
    }

    #[test]
    fn observable_d2_plus_recovers_pauli_set() {
        // (0,1) -> σx, (1,0) -> σz, (1,1) -> -σy (expanding the definition by
        // hand for d = 2 with X = (1+i)/2)
        let sx = mat2([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
        let sz = mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]);
        let minus_sy = mat2([[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(0.0, 0.0)]]);
        assert!(hw_observable(2, 0, 1, PhaseChoice::Plus).unwrap().max_abs_diff(&sx) < 1e-15);
        assert!(hw_observable(2, 1, 0, PhaseChoice::Plus).unwrap().max_abs_diff(&sz) < 1e-15);
        assert!(hw_observable(2, 1, 1, PhaseChoice::Plus).unwrap().max_abs_diff(&minus_sy) < 1e-15);
    }

    #[test]
    fn observable_d2_minus_flips_the_y_element() {
        let sy = mat2([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]);
        assert!(hw_observable(2, 1, 1, PhaseChoice::Minus).unwrap().max_abs_diff(&sy) < 1e-15);
    }

    #[test]
    fn observable_zero_label_is_identity_for_both_signs() {
        for d in [2, 3, 5] {
            for phase in [PhaseChoice::Plus, PhaseChoice::Minus] {
                let q = hw_observable(d, 0, 0, phase).unwrap();
                assert!(q.max_abs_diff(&ComplexMatrix::identity(d)) < 1e-15);
            }
        }
    }

    #[test]
    fn basis_is_hermitian_and_orthogonal_up_to_d5() {
        for d in 2..=5 {
            for phase in [PhaseChoice::Plus, PhaseChoice::Minus] {
                let basis = basis_set(d, phase).unwrap();
                assert_eq!(basis.labels().len(), d * d - 1);
                assert!(basis.hermiticity_defect() < 1e-12, "d={d}");
                assert!(basis.orthogonality_defect() < 1e-12, "d={d}");
            }
        }
    }

    #[test]
    fn basis_label_order_is_lexicographic() {
        let basis = basis_set(3, PhaseChoice::Plus).unwrap();
        let expect = [(0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)];
        assert_eq!(basis.labels(), &expect);
    }

    #[test]
    fn sum_of_squared_traces_matches_dimension_count() {
        // Σ over basis of Tr{Q²} = d·(d²-1)
        for d in 2..=5 {
            let basis = basis_set(d, PhaseChoice::Plus).unwrap();
            let total: f64 =
                basis.observables().iter().map(|q| q.matmul(q).trace().re).sum();
            assert!((total - (d * (d * d - 1)) as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn minus_basis_is_signed_pair_permutation_of_plus() {
        // Q₋(u) = -Q₊(v) and Q₋(v) = Q₊(u) on each conjugate pair {u, v};
        // a pure sign relation at self-paired labels.
        for d in 2..=4 {
            for (l, m) in labels(d) {
                let partner = conjugate_label(d, l, m);
                let minus = hw_observable(d, l, m, PhaseChoice::Minus).unwrap();
                if partner == (l, m) {
                    let plus = hw_observable(d, l, m, PhaseChoice::Plus).unwrap();
                    let same = minus.max_abs_diff(&plus) < 1e-15;
                    let negated = minus.max_abs_diff(&plus.scale(c(-1.0, 0.0))) < 1e-15;
                    assert!(same || negated, "d={d} ({l},{m})");
                } else if (l, m) < partner {
                    let plus_partner =
                        hw_observable(d, partner.0, partner.1, PhaseChoice::Plus).unwrap();
                    assert!(
                        minus.max_abs_diff(&plus_partner.scale(c(-1.0, 0.0))) < 1e-15,
                        "d={d} ({l},{m})"
                    );
                } else {
                    let plus_partner =
                        hw_observable(d, partner.0, partner.1, PhaseChoice::Plus).unwrap();
                    assert!(minus.max_abs_diff(&plus_partner) < 1e-15, "d={d} ({l},{m})");
                }
            }
        }
    }

    #[test]
    fn completeness_reconstructs_random_hermitian() {
        // A = (Tr A / d)·I + (1/2)·Σ (2/d)·Tr{A·Q}·Q for any Hermitian A
        let mut s = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        for d in 2..=5 {
            let mut a = ComplexMatrix::zeros(d, d);
            for i in 0..d {
                a[(i, i)] = c(next(), 0.0);
                for j in i + 1..d {
                    let z = c(next(), next());
                    a[(i, j)] = z;
                    a[(j, i)] = z.conj();
                }
            }
            let basis = basis_set(d, PhaseChoice::Plus).unwrap();
            let mut rec =
                ComplexMatrix::identity(d).scale(a.trace() / c(d as f64, 0.0));
            for q in basis.observables() {
                let coeff = a.matmul(q).trace() * c(2.0 / d as f64, 0.0);
                rec = rec.add(&q.scale(coeff * c(0.5, 0.0)));
            }
            assert!(rec.max_abs_diff(&a) < 1e-12, "d={d}");
        }
    }
}
