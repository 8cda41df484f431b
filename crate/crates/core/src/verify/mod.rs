//! End-to-end checkers for the Morrey and nonlinear mean value inequalities,
//! the shell-average monotonicity suite, and empirical constant estimation.

mod fit;
mod monotonicity;
mod mvi;

use serde::{Deserialize, Serialize};

use crate::calculus::{laplacian, normal_derivative};
use crate::constants::{BoundParams, ConstantLedger};
use crate::error::{Error, Result};
use crate::grid::{DomainKind, DomainSpec, ScalarField};

pub use fit::{fit_boundary_nonlinearity, fit_nonlinearity, FLOOR_FRACTION};
pub use monotonicity::{large_r_constant, monotonicity_suite, t_integral, t_integral_bound, LargeRadiusCheck, LimitCheck, MonotonicityReport};
pub use mvi::{estimate_constant, verify_boundary_mvi, verify_interior_mvi, verify_morrey, ConstantEstimate, FamilyKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    Fails,
    HypothesisViolated,
    /// The energy exceeds the threshold, so the inequality is not claimed.
    EnergyAboveThreshold,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClaimId {
    Morrey,
    InteriorMeanValue,
    BoundaryMeanValue,
}

/// Largest term of the right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DominantTerm {
    A0,
    B0,
    Morrey,
    A1,
    B1,
}

/// Worst pointwise violation of a differential hypothesis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub node: usize,
    pub point: Vec<f64>,
    pub residual: f64,
    pub detail: String,
}

/// Pointwise residuals of `Δe ≤ A₀ + A₁e + a e^{(n+2)/n}` and, on half-balls,
/// `∂e/∂ν ≤ B₀ + B₁e + b e^{(n+1)/n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub max_interior_residual: f64,
    pub max_boundary_residual: Option<f64>,
    pub tolerance: f64,
    pub violation: Option<Violation>,
}

impl HypothesisCheck {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// Hypothesis tolerance: `K h max(1, sup e)`.
pub(crate) fn hypothesis_tolerance(e: &ScalarField, k: f64) -> f64 {
    k * e.domain().spacing() * e.sup().max(1.0)
}

pub(crate) fn check_hypotheses(e: &ScalarField, params: &BoundParams, tolerance: f64) -> HypothesisCheck {
    let domain = e.domain();
    let n = domain.dim() as f64;
    let mut violation: Option<Violation> = None;
    let mut note = |node: usize, residual: f64, what: &str| {
        if residual > tolerance && violation.as_ref().is_none_or(|v| residual > v.residual) {
            violation = Some(Violation {
                node,
                point: domain.point(node),
                residual,
                detail: format!("{what} exceeds its bound by {residual:e}"),
            });
        }
    };

    let mut max_interior = f64::NEG_INFINITY;
    for (node, lap) in laplacian(e).iter() {
        let v = e.value(node);
        let r = lap - (params.a0 + params.a1 * v + params.a * v.powf((n + 2.0) / n));
        max_interior = max_interior.max(r);
        note(node, r, "laplacian");
    }
    let max_boundary = if domain.kind() == DomainKind::HalfBall {
        normal_derivative(e).ok().map(|nd| {
            let mut worst = f64::NEG_INFINITY;
            for &(node, d) in &nd.values {
                let v = e.value(node);
                let r = d - (params.b0 + params.b1 * v + params.b * v.powf((n + 1.0) / n));
                worst = worst.max(r);
                note(node, r, "normal derivative");
            }
            worst
        })
    } else {
        None
    };
    HypothesisCheck {
        max_interior_residual: max_interior,
        max_boundary_residual: max_boundary,
        tolerance,
        violation,
    }
}

/// Hypothesis diagnostics attached to every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub params: BoundParams,
    /// Smallest `a` the field needs given `A₀, A₁`.
    pub a_required: Option<f64>,
    /// Smallest `b` the field needs given `B₀, B₁` (half-balls).
    pub b_required: Option<f64>,
    pub energy: f64,
    pub energy_threshold: Option<f64>,
    pub metric_deviation: Option<f64>,
    pub hypotheses: HypothesisCheck,
    pub dominant_term: Option<DominantTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: ClaimId,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    pub tolerance: f64,
    /// The `C` the right-hand side was evaluated with.
    pub c: f64,
    pub diagnostics: Diagnostics,
    pub ledger: Option<ConstantLedger>,
    pub grid: DomainSpec,
    pub verdict: Verdict,
}

impl VerificationReport {
    /// `e(center) rⁿ / ∫e`, the constant this instance would need.
    pub fn required_constant(&self) -> f64 {
        let r = self.grid.radius;
        self.lhs * r.powi(self.grid.dimension as i32) / self.diagnostics.energy
    }

    /// `Err(HypothesisViolated)` for a report whose hypotheses failed.
    pub fn ensure_hypotheses(&self) -> Result<()> {
        match &self.diagnostics.hypotheses.violation {
            Some(v) if self.verdict == Verdict::HypothesisViolated => Err(Error::HypothesisViolated {
                node: v.node,
                point: v.point.clone(),
                detail: v.detail.clone(),
            }),
            None if self.verdict == Verdict::HypothesisViolated => Err(Error::HypothesisViolated {
                node: usize::MAX,
                point: Vec::new(),
                detail: "metric deviation exceeds delta".into(),
            }),
            _ => Ok(()),
        }
    }
}
