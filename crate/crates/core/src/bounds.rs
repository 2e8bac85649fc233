//! Upper bounds on the heat current of one bath:
//!
//! * Bound 1: `|J| <= 4 |H| sum_k Xi_k |A_k|^2`
//! * commutator bound: `|J| <= 2 sum_k Xi_k |[A_k, H]| |A_k|`
//! * Bound 2: `|J| <= 2 sum_k Xi_k dE_k |A_k|^2`, with `dE_k` the largest
//!   energy gap connected by a nonzero element of `A_k`.
//!
//! Channels are uncorrelated, so the double channel sums reduce to single sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{hermitian_eig, operator_norm, EnergyBasis, HermitianOperator, C64, DEFAULT_DEGENERACY_TOLERANCE};
use crate::spectral::{BathSpec, XI_CONVENTION_NOTE};

/// Default `element_tol` for `delta_e`, relative to `|A|`.
pub const DEFAULT_ELEMENT_TOLERANCE: f64 = 1e-10;

/// Relative slack of the bound checks.
pub const BOUND_SLACK: f64 = 1e-9;

/// Absolute slack of the bound checks.
pub const BOUND_ABS_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaE {
    pub value: f64,
    pub note: Option<String>,
}

/// `dE = max |E_i - E_j|` over eigenbasis elements `|<E_i|A|E_j>| > element_tol`.
pub fn delta_e(a: &HermitianOperator, basis: &EnergyBasis, element_tol: f64) -> Result<DeltaE> {
    let n = basis.dim();
    if a.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "noise operator vs energy basis",
            expected: n,
            found: a.dim(),
        });
    }
    let a_e = basis.to_eigenbasis(a.matrix());
    let e = basis.eigenvalues();
    let mut value: f64 = 0.0;
    let mut any_offdiagonal = false;
    for i in 0..n {
        for (j, z) in a_e.row(i).iter().enumerate() {
            if z.norm() > element_tol {
                if i != j {
                    any_offdiagonal = true;
                }
                value = value.max((e[i] - e[j]).abs());
            }
        }
    }
    let note = (!any_offdiagonal).then(|| "operator numerically zero or diagonal".to_string());
    Ok(DeltaE { value, note })
}

/// `delta_e` with `element_tol = 1e-10 |A|`.
pub fn delta_e_default(a: &HermitianOperator, basis: &EnergyBasis) -> Result<DeltaE> {
    let tol = DEFAULT_ELEMENT_TOLERANCE * operator_norm(a.matrix())?;
    delta_e(a, basis, tol)
}

/// Norms entering the bounds for one channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelTerms {
    pub xi: f64,
    pub norm_a: f64,
    pub norm_commutator: f64,
    pub delta_e: f64,
    pub delta_e_note: Option<String>,
}

fn channel_terms(
    h: &HermitianOperator,
    basis: &EnergyBasis,
    bath: &BathSpec,
    element_tol: Option<f64>,
) -> Result<Vec<ChannelTerms>> {
    if bath.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            context: "bath operator vs Hamiltonian",
            expected: h.dim(),
            found: bath.dim(),
        });
    }
    bath.channels()
        .iter()
        .map(|ch| {
            let a = ch.operator.matrix();
            let norm_a = operator_norm(a)?;
            // i[A, H] is Hermitian, so the fast Hermitian norm path applies
            let comm = a.commutator(h.matrix()).scale(C64::new(0.0, 1.0));
            let norm_commutator = operator_norm(&comm)?;
            let tol = element_tol.unwrap_or(DEFAULT_ELEMENT_TOLERANCE * norm_a);
            let de = delta_e(&ch.operator, basis, tol)?;
            Ok(ChannelTerms {
                xi: ch.model.xi(),
                norm_a,
                norm_commutator,
                delta_e: de.value,
                delta_e_note: de.note,
            })
        })
        .collect()
}

fn bound1_from(norm_h: f64, terms: &[ChannelTerms]) -> f64 {
    4.0 * norm_h * terms.iter().map(|t| t.xi * t.norm_a * t.norm_a).sum::<f64>()
}

fn bound_commutator_from(terms: &[ChannelTerms]) -> f64 {
    2.0 * terms.iter().map(|t| t.xi * t.norm_commutator * t.norm_a).sum::<f64>()
}

fn bound2_from(terms: &[ChannelTerms]) -> f64 {
    2.0 * terms.iter().map(|t| t.xi * t.delta_e * t.norm_a * t.norm_a).sum::<f64>()
}

fn basis_of(h: &HermitianOperator) -> EnergyBasis {
    hermitian_eig(h, DEFAULT_DEGENERACY_TOLERANCE)
}

pub fn bound1(h: &HermitianOperator, bath: &BathSpec) -> Result<f64> {
    let norm_h = operator_norm(h.matrix())?;
    let terms: Vec<f64> = bath
        .channels()
        .iter()
        .map(|ch| operator_norm(ch.operator.matrix()).map(|n| ch.model.xi() * n * n))
        .collect::<Result<_>>()?;
    Ok(4.0 * norm_h * terms.iter().sum::<f64>())
}

pub fn bound_commutator(h: &HermitianOperator, bath: &BathSpec) -> Result<f64> {
    Ok(bound_commutator_from(&channel_terms(h, &basis_of(h), bath, None)?))
}

/// Bound 2; `element_tol = None` uses `1e-10 |A_k|` per channel.
pub fn bound2(h: &HermitianOperator, bath: &BathSpec, element_tol: Option<f64>) -> Result<f64> {
    Ok(bound2_from(&channel_terms(h, &basis_of(h), bath, element_tol)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub holds: bool,
    pub commutator_norm: f64,
    pub rhs: f64,
    /// `dE |A| - |[A, H]|`
    pub slack: f64,
}

/// `|[A, H]| <= dE |A| + 1e-9`.
pub fn commutator_lemma_check(a: &HermitianOperator, h: &HermitianOperator, delta_e: f64) -> Result<LemmaCheck> {
    if a.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            context: "commutator lemma",
            expected: h.dim(),
            found: a.dim(),
        });
    }
    let comm = a.matrix().commutator(h.matrix()).scale(C64::new(0.0, 1.0));
    let commutator_norm = operator_norm(&comm)?;
    let rhs = delta_e * operator_norm(a.matrix())?;
    Ok(LemmaCheck {
        holds: commutator_norm <= rhs + 1e-9,
        commutator_norm,
        rhs,
        slack: rhs - commutator_norm,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound1: f64,
    pub bound_commutator: f64,
    pub bound2: f64,
    pub delta_e_per_channel: Vec<f64>,
    pub norm_a_per_channel: Vec<f64>,
    pub xi_per_channel: Vec<f64>,
    pub norm_h: f64,
    pub measured_current_abs: f64,
    pub saturation_ratio_1: Option<f64>,
    pub saturation_ratio_commutator: Option<f64>,
    pub saturation_ratio_2: Option<f64>,
    pub xi_convention_note: String,
    pub notes: Vec<String>,
}

impl BoundReport {
    /// Every violated relation of the chain `|J| <= bound_commutator <= bound1`
    /// and `|J| <= bound2`, as `(name, lhs, rhs)`.
    pub fn violations(&self) -> Vec<(&'static str, f64, f64)> {
        let within = |lhs: f64, rhs: f64| lhs <= rhs * (1.0 + BOUND_SLACK) + BOUND_ABS_SLACK;
        let mut out = Vec::new();
        let j = self.measured_current_abs;
        if !within(j, self.bound_commutator) {
            out.push(("bound_commutator", j, self.bound_commutator));
        }
        if !within(self.bound_commutator, self.bound1) {
            out.push(("bound_commutator <= bound1", self.bound_commutator, self.bound1));
        }
        if !within(j, self.bound1) {
            out.push(("bound1", j, self.bound1));
        }
        if !within(j, self.bound2) {
            out.push(("bound2", j, self.bound2));
        }
        out
    }

    pub fn holds(&self) -> bool {
        self.violations().is_empty()
    }
}

fn ratio(j: f64, b: f64) -> Option<f64> {
    (b > 0.0).then(|| j / b)
}

/// Evaluates every bound against `measured_current` without judging.
pub fn evaluate_bounds(h: &HermitianOperator, bath: &BathSpec, measured_current: f64) -> Result<BoundReport> {
    let basis = basis_of(h);
    evaluate_bounds_with_basis(h, &basis, bath, measured_current)
}

pub fn evaluate_bounds_with_basis(
    h: &HermitianOperator,
    basis: &EnergyBasis,
    bath: &BathSpec,
    measured_current: f64,
) -> Result<BoundReport> {
    evaluate_bounds_with_tolerance(h, basis, bath, measured_current, None)
}

/// As [`evaluate_bounds_with_basis`] with an absolute matrix-element cutoff
/// for `dE` (`None`: `1e-10 |A_k|` per channel).
pub fn evaluate_bounds_with_tolerance(
    h: &HermitianOperator,
    basis: &EnergyBasis,
    bath: &BathSpec,
    measured_current: f64,
    element_tol: Option<f64>,
) -> Result<BoundReport> {
    let terms = channel_terms(h, basis, bath, element_tol)?;
    let norm_h = basis.eigenvalues().iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let j = measured_current.abs();
    let bound1 = bound1_from(norm_h, &terms);
    let bound_commutator = bound_commutator_from(&terms);
    let bound2 = bound2_from(&terms);
    let mut notes: Vec<String> = terms.iter().filter_map(|t| t.delta_e_note.clone()).collect();
    if bath.channels().iter().any(|c| c.model.xi_overridden()) {
        notes.push("Xi overridden by the caller".to_string());
    }
    if bound1 == 0.0 {
        notes.push("bounds vanish; saturation ratios undefined".to_string());
    }
    Ok(BoundReport {
        bound1,
        bound_commutator,
        bound2,
        delta_e_per_channel: terms.iter().map(|t| t.delta_e).collect(),
        norm_a_per_channel: terms.iter().map(|t| t.norm_a).collect(),
        xi_per_channel: terms.iter().map(|t| t.xi).collect(),
        norm_h,
        measured_current_abs: j,
        saturation_ratio_1: ratio(j, bound1),
        saturation_ratio_commutator: ratio(j, bound_commutator),
        saturation_ratio_2: ratio(j, bound2),
        xi_convention_note: XI_CONVENTION_NOTE.to_string(),
        notes,
    })
}

/// As [`evaluate_bounds`], failing on the first violated relation.
pub fn check_bounds(h: &HermitianOperator, bath: &BathSpec, measured_current: f64) -> Result<BoundReport> {
    check_report(evaluate_bounds(h, bath, measured_current)?)
}

pub fn check_report(report: BoundReport) -> Result<BoundReport> {
    if let Some(&(bound, measured, bound_value)) = report.violations().first() {
        return Err(Error::BoundViolation {
            bound,
            measured,
            bound_value,
        });
    }
    Ok(report)
}
