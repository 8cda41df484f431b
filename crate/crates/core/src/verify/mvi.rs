use serde::{Deserialize, Serialize};

use super::{
    check_hypotheses, fit_boundary_nonlinearity, fit_nonlinearity, hypothesis_tolerance, ClaimId, Diagnostics, DominantTerm,
    HypothesisCheck, VerificationReport, Verdict,
};
use crate::calculus::{integrate, Tolerance};
use crate::constants::{boundary_rhs, interior_rhs, interior_threshold, mu_ab, BoundParams, ConstantLedger};
use crate::error::{Error, Result};
use crate::grid::{metric_deviation, DomainKind, ScalarField};

struct Measured {
    lhs: f64,
    energy: f64,
    r: f64,
    n: usize,
}

fn measure(e: &ScalarField) -> Result<Measured> {
    let d = e.domain();
    Ok(Measured {
        lhs: e.center_value()?,
        energy: integrate(e, None)?,
        r: d.radius(),
        n: d.dim(),
    })
}

fn margin_tolerance(e: &ScalarField, lhs: f64, tol: Tolerance) -> f64 {
    tol.at(e.domain().spacing()) * lhs.abs().max(1.0)
}

fn decide(hyp: &HypothesisCheck, metric_ok: bool, above_threshold: bool, margin: f64, tolerance: f64) -> Verdict {
    if !hyp.holds() || !metric_ok {
        Verdict::HypothesisViolated
    } else if above_threshold {
        Verdict::EnergyAboveThreshold
    } else if margin >= -tolerance {
        Verdict::Holds
    } else {
        Verdict::Fails
    }
}

fn check_params(e: &ScalarField, params: &BoundParams) -> Result<()> {
    params.validate()?;
    let n = e.domain().dim();
    if params.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: params.n,
        });
    }
    Ok(())
}

fn dominant(terms: &[(DominantTerm, f64)]) -> Option<DominantTerm> {
    terms
        .iter()
        .filter(|t| t.1 > 0.0)
        .fold(None, |best: Option<(DominantTerm, f64)>, &t| match best {
            Some(b) if b.1 >= t.1 => Some(b),
            _ => Some(t),
        })
        .map(|t| t.0)
}

fn required(fit: Result<f64>) -> Result<Option<f64>> {
    match fit {
        Ok(v) => Ok(Some(v)),
        Err(Error::AllNodesBelowFloor { .. }) => Ok(Some(0.0)),
        Err(Error::DomainHasNoFlatBoundary) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `e(center) ≤ C r^{−n} ∫e` on a ball or half-ball, for fields with
/// `Δe ≤ 0` (and `∂e/∂ν ≤ 0` on the flat boundary).
pub fn verify_morrey(e: &ScalarField, c: f64, tol: Tolerance) -> Result<VerificationReport> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidConstant { name: "C", value: c });
    }
    let m = measure(e)?;
    let params = BoundParams::zero(m.n);
    let hyp = check_hypotheses(e, &params, hypothesis_tolerance(e, tol.k));
    let rhs = c * (0.0 + m.r.powf(-(m.n as f64))) * m.energy;
    let margin = rhs - m.lhs;
    let tolerance = margin_tolerance(e, m.lhs, tol);
    let verdict = decide(&hyp, true, false, margin, tolerance);
    Ok(VerificationReport {
        claim: ClaimId::Morrey,
        lhs: m.lhs,
        rhs,
        margin,
        tolerance,
        c,
        diagnostics: Diagnostics {
            params,
            a_required: None,
            b_required: None,
            energy: m.energy,
            energy_threshold: None,
            metric_deviation: None,
            hypotheses: hyp,
            dominant_term: Some(DominantTerm::Morrey),
        },
        ledger: None,
        grid: e.domain().spec(),
        verdict,
    })
}

/// `e(0) ≤ C A₀ r² + C (A₁^{n/2} + r^{−n}) ∫e` on a ball with `r ≤ 1`,
/// claimed only below the energy threshold `μ(a, 0)`.
pub fn verify_interior_mvi(e: &ScalarField, params: &BoundParams, ledger: &ConstantLedger, tol: Tolerance) -> Result<VerificationReport> {
    let domain = e.domain();
    if domain.kind() != DomainKind::Ball {
        return Err(Error::WrongDomainKind { expected: "ball" });
    }
    check_params(e, params)?;
    let c = ledger.c.value;
    let m = measure(e)?;
    let rhs = interior_rhs(params, m.r, m.energy, c)?;
    let deviation = metric_deviation(domain)?;
    let threshold = interior_threshold(params.a, c, m.n)?;
    let hyp = check_hypotheses(e, params, hypothesis_tolerance(e, tol.k));
    let margin = rhs - m.lhs;
    let tolerance = margin_tolerance(e, m.lhs, tol);
    let above = threshold.is_some_and(|t| m.energy > t);
    let verdict = decide(&hyp, deviation <= ledger.delta.value, above, margin, tolerance);
    let nf = m.n as f64;
    let dominant_term = dominant(&[
        (DominantTerm::A0, c * params.a0 * m.r * m.r),
        (DominantTerm::Morrey, c * m.r.powf(-nf) * m.energy),
        (DominantTerm::A1, c * params.a1.powf(nf / 2.0) * m.energy),
    ]);
    Ok(VerificationReport {
        claim: ClaimId::InteriorMeanValue,
        lhs: m.lhs,
        rhs,
        margin,
        tolerance,
        c,
        diagnostics: Diagnostics {
            params: params.clone(),
            a_required: required(fit_nonlinearity(e, params.a0, params.a1))?,
            b_required: None,
            energy: m.energy,
            energy_threshold: threshold,
            metric_deviation: Some(deviation),
            hypotheses: hyp,
            dominant_term,
        },
        ledger: Some(ledger.clone()),
        grid: domain.spec(),
        verdict,
    })
}

/// `e(y) ≤ C A₀ r² + C B₀ r + C (A₁^{n/2} + B₁ⁿ + r^{−n}) ∫_{D_r(y)} e`,
/// claimed only below `μ(a, b)`.
pub fn verify_boundary_mvi(e: &ScalarField, params: &BoundParams, ledger: &ConstantLedger, tol: Tolerance) -> Result<VerificationReport> {
    let domain = e.domain();
    if domain.kind() != DomainKind::HalfBall {
        return Err(Error::WrongDomainKind { expected: "half-ball" });
    }
    check_params(e, params)?;
    let c = ledger.c.value;
    let m = measure(e)?;
    let rhs = boundary_rhs(params, m.r, m.energy, c)?;
    let threshold = if params.a == 0.0 && params.b == 0.0 {
        None
    } else {
        Some(mu_ab(params.a, params.b, c, m.n)?)
    };
    let hyp = check_hypotheses(e, params, hypothesis_tolerance(e, tol.k));
    let margin = rhs - m.lhs;
    let tolerance = margin_tolerance(e, m.lhs, tol);
    let above = threshold.is_some_and(|t| m.energy > t);
    let verdict = decide(&hyp, true, above, margin, tolerance);
    let nf = m.n as f64;
    let dominant_term = dominant(&[
        (DominantTerm::A0, c * params.a0 * m.r * m.r),
        (DominantTerm::B0, c * params.b0 * m.r),
        (DominantTerm::Morrey, c * m.r.powf(-nf) * m.energy),
        (DominantTerm::A1, c * params.a1.powf(nf / 2.0) * m.energy),
        (DominantTerm::B1, c * params.b1.powf(nf) * m.energy),
    ]);
    Ok(VerificationReport {
        claim: ClaimId::BoundaryMeanValue,
        lhs: m.lhs,
        rhs,
        margin,
        tolerance,
        c,
        diagnostics: Diagnostics {
            params: params.clone(),
            a_required: required(fit_nonlinearity(e, params.a0, params.a1))?,
            b_required: required(fit_boundary_nonlinearity(e, params.b0, params.b1))?,
            energy: m.energy,
            energy_threshold: threshold,
            metric_deviation: None,
            hypotheses: hyp,
            dominant_term,
        },
        ledger: Some(ledger.clone()),
        grid: domain.spec(),
        verdict,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    Interior,
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    /// `max e(center) rⁿ / ∫e` over the family.
    pub c: f64,
    pub argmax: usize,
    pub ratios: Vec<f64>,
}

/// Measured Morrey constant of a family of (Neumann-)subharmonic fields.
pub fn estimate_constant(family: &[ScalarField], kind: FamilyKind, tol: Tolerance) -> Result<ConstantEstimate> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let expected = match kind {
        FamilyKind::Interior => (DomainKind::Ball, "ball"),
        FamilyKind::Boundary => (DomainKind::HalfBall, "half-ball"),
    };
    let mut ratios = Vec::with_capacity(family.len());
    for e in family {
        let d = e.domain();
        if d.kind() != expected.0 {
            return Err(Error::WrongDomainKind { expected: expected.1 });
        }
        let hyp = check_hypotheses(e, &BoundParams::zero(d.dim()), hypothesis_tolerance(e, tol.k));
        if let Some(v) = hyp.violation {
            return Err(Error::HypothesisViolated {
                node: v.node,
                point: v.point,
                detail: v.detail,
            });
        }
        let m = measure(e)?;
        ratios.push(m.lhs * m.r.powi(m.n as i32) / m.energy);
    }
    let mut argmax = 0;
    for (i, &r) in ratios.iter().enumerate() {
        if r > ratios[argmax] {
            argmax = i;
        }
    }
    Ok(ConstantEstimate {
        c: ratios[argmax],
        argmax,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_ball_domain, make_half_ball_domain, Domain, MetricSpec};
    use crate::synth::{boundary_family, gen, interior_family, GeneratorSpec};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn disk(h: f64) -> Arc<Domain> {
        Arc::new(make_ball_domain(&[0.0, 0.0], 1.0, h, 2, MetricSpec::identity()).unwrap())
    }

    fn half_disk(y0: f64, h: f64) -> Arc<Domain> {
        Arc::new(make_half_ball_domain(&[y0, 0.0], 1.0, h, 2).unwrap())
    }

    #[test]
    fn constants_fix_the_scale() {
        let tol = Tolerance::default();
        let d = disk(1.0 / 64.0);
        let fam: Vec<_> = [0.5, 1.0, 3.0].iter().map(|&c| ScalarField::density(&d, |_| c).unwrap()).collect();
        let est = estimate_constant(&fam, FamilyKind::Interior, tol).unwrap();
        assert!((est.c * PI - 1.0).abs() < 0.01, "{}", est.c);
        let hd = half_disk(0.0, 1.0 / 64.0);
        let fam: Vec<_> = [0.5, 2.0].iter().map(|&c| ScalarField::density(&hd, |_| c).unwrap()).collect();
        let est = estimate_constant(&fam, FamilyKind::Boundary, tol).unwrap();
        assert!((est.c * PI / 2.0 - 1.0).abs() < 0.01, "{}", est.c);
        assert!(matches!(estimate_constant(&[], FamilyKind::Interior, tol), Err(Error::EmptyFamily)));
        assert!(matches!(
            estimate_constant(&fam, FamilyKind::Interior, tol),
            Err(Error::WrongDomainKind { .. })
        ));
    }

    #[test]
    fn morrey_examples() {
        let tol = Tolerance::default();
        let d = disk(1.0 / 32.0);
        let quad = ScalarField::density(&d, |x| x[0] * x[0] + x[1] * x[1]).unwrap();
        // Δ|x|² = −4 ≤ 0, lhs = 0
        let rep = verify_morrey(&quad, 0.5, tol).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!(rep.margin >= 0.0);

        let fine = disk(1.0 / 64.0);
        let c = ScalarField::density(&fine, |_| 2.0).unwrap();
        assert_eq!(verify_morrey(&c, 1.0 / PI, tol).unwrap().verdict, Verdict::Holds);
        assert_eq!(verify_morrey(&c, 0.25, tol).unwrap().verdict, Verdict::Fails);

        let bad = ScalarField::density(&d, |x| 2.0 - x[0] * x[0] - x[1] * x[1]).unwrap();
        let rep = verify_morrey(&bad, 3.0, tol).unwrap();
        assert_eq!(rep.verdict, Verdict::HypothesisViolated);
        assert!(matches!(rep.ensure_hypotheses(), Err(Error::HypothesisViolated { .. })));
    }

    #[test]
    fn harmonic_peak_needs_more_than_constants() {
        let tol = Tolerance::default();
        let d = disk(1.0 / 64.0);
        let fam: Vec<_> = interior_family(&d).into_iter().map(|s| gen(&s, &d).unwrap().field).collect();
        let est = estimate_constant(&fam, FamilyKind::Interior, tol).unwrap();
        // mean value property: every subharmonic ratio sits at or below 1/π
        assert!(est.c <= 1.0 / PI + tol.at(d.spacing()), "{}", est.c);
        for e in &fam {
            assert_eq!(verify_morrey(e, 3.0, tol).unwrap().verdict, Verdict::Holds);
        }
        let hd = half_disk(0.0, 1.0 / 64.0);
        let fam: Vec<_> = boundary_family(&hd).into_iter().map(|s| gen(&s, &hd).unwrap().field).collect();
        let est = estimate_constant(&fam, FamilyKind::Boundary, tol).unwrap();
        assert!(est.c <= 2.0 / PI + tol.at(hd.spacing()), "{}", est.c);
    }

    #[test]
    fn interior_specialises_to_morrey() {
        let tol = Tolerance::default();
        let d = disk(1.0 / 32.0);
        let ledger = ConstantLedger::configured(2, 0.0, 0.0, 0.4).unwrap();
        for spec in interior_family(&d) {
            let e = gen(&spec, &d).unwrap().field;
            let a = verify_morrey(&e, 0.4, tol).unwrap();
            let b = verify_interior_mvi(&e, &BoundParams::zero(2), &ledger, tol).unwrap();
            assert_eq!((a.lhs, a.rhs, a.margin, a.verdict), (b.lhs, b.rhs, b.margin, b.verdict));
        }
        let hd = half_disk(0.0, 1.0 / 32.0);
        for spec in boundary_family(&hd) {
            let e = gen(&spec, &hd).unwrap().field;
            let a = verify_morrey(&e, 0.7, tol).unwrap();
            let b = verify_boundary_mvi(
                &e,
                &BoundParams::zero(2),
                &ConstantLedger::configured(2, 0.0, 0.0, 0.7).unwrap(),
                tol,
            )
            .unwrap();
            assert_eq!((a.lhs, a.rhs, a.margin, a.verdict), (b.lhs, b.rhs, b.margin, b.verdict));
        }
    }

    #[test]
    fn interior_examples() {
        let tol = Tolerance::default();
        let d = disk(1.0 / 32.0);
        let ledger = ConstantLedger::configured(2, 1.0, 0.0, 1.0).unwrap();
        let zero = ScalarField::density(&d, |_| 0.0).unwrap();
        let rep = verify_interior_mvi(&zero, &BoundParams::zero(2), &ledger, tol).unwrap();
        assert_eq!((rep.lhs, rep.verdict), (0.0, Verdict::Holds));

        // Δ(|x|² + x₀ + 1) = −4 ≤ A₀
        let e = ScalarField::density(&d, |x| x[0] * x[0] + x[1] * x[1] + 0.1 * x[0] + 1.0).unwrap();
        let p = BoundParams {
            a0: 5.0,
            ..BoundParams::zero(2)
        };
        let rep = verify_interior_mvi(&e, &p, &ledger, tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert_eq!(rep.diagnostics.a_required, Some(0.0));

        // a small bubble carries more than μ(a, 0)
        let d = disk(1.0 / 128.0);
        let g = gen(
            &GeneratorSpec::Bubble {
                center: vec![0.0, 0.0],
                lambda: 1.0 / 16.0,
                amplitude: 1.0,
            },
            &d,
        )
        .unwrap();
        let a = fit_nonlinearity(&g.field, 0.0, 0.0).unwrap();
        let p = BoundParams { a, ..BoundParams::zero(2) };
        let ledger = ConstantLedger::configured(2, a, 0.0, 1.0).unwrap();
        let rep = verify_interior_mvi(&g.field, &p, &ledger, tol).unwrap();
        assert_eq!(rep.verdict, Verdict::EnergyAboveThreshold);
        assert!(rep.diagnostics.energy > rep.diagnostics.energy_threshold.unwrap());

        let big = Arc::new(make_ball_domain(&[0.0, 0.0], 2.0, 1.0 / 16.0, 2, MetricSpec::identity()).unwrap());
        let e = ScalarField::density(&big, |_| 1.0).unwrap();
        assert!(matches!(
            verify_interior_mvi(&e, &BoundParams::zero(2), &ledger, tol),
            Err(Error::RadiusOutOfRange(_))
        ));
    }

    #[test]
    fn boundary_examples() {
        let tol = Tolerance::default();
        let hd = half_disk(0.0, 1.0 / 32.0);
        let ledger = ConstantLedger::configured(2, 0.0, 0.0, 1.0).unwrap();
        let e = ScalarField::density(&hd, |x| x[0]).unwrap();
        let p = BoundParams {
            b0: 1.0,
            ..BoundParams::zero(2)
        };
        let rep = verify_boundary_mvi(&e, &p, &ledger, tol).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.verdict, Verdict::Holds);

        // energy / μ(a, 0) = 32πC² for any n = 2 bubble: above threshold at the measured C
        let hd = half_disk(0.0, 1.0 / 64.0);
        let g = gen(
            &GeneratorSpec::ReflectedBubble {
                center: vec![0.0, 0.0],
                lambda: 0.25,
                amplitude: 1.0,
            },
            &hd,
        )
        .unwrap();
        let a = fit_nonlinearity(&g.field, 0.0, 0.0).unwrap();
        let b = fit_boundary_nonlinearity(&g.field, 0.0, 0.0).unwrap();
        let p = BoundParams { a, b, ..BoundParams::zero(2) };
        let ledger = ConstantLedger::configured(2, a, b, 2.0 / PI).unwrap();
        let rep = verify_boundary_mvi(&g.field, &p, &ledger, tol).unwrap();
        assert_eq!(rep.verdict, Verdict::EnergyAboveThreshold);

        let d = disk(1.0 / 32.0);
        let z = ScalarField::density(&d, |_| 0.0).unwrap();
        assert!(matches!(
            verify_boundary_mvi(&z, &BoundParams::zero(2), &ledger, tol),
            Err(Error::WrongDomainKind { .. })
        ));
    }
}
