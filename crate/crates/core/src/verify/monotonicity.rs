use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use super::{check_hypotheses, hypothesis_tolerance, HypothesisCheck, Verdict};
use crate::calculus::{integrate, shell_profile, unit_sphere_area, ShellSample, Tolerance};
use crate::constants::BoundParams;
use crate::error::{Error, Result};
use crate::grid::{DomainKind, ScalarField};

/// `∫₁^T t^{−2}(1 − t^{−2})^{(n−3)/2} dt`, evaluated as `∫₀^{arccos(1/T)} sin^{n−2}θ dθ`
/// (substitute `t = 1/cos θ`) with Gauss–Legendre.
pub fn t_integral(n: usize, ratio: f64) -> f64 {
    if ratio <= 1.0 {
        return 0.0;
    }
    let top = (1.0 / ratio).acos();
    let rule = GaussLegendre::new(32.try_into().unwrap());
    rule.integrate(0.0, top, |th: f64| th.sin().powi(n as i32 - 2))
}

/// The stated bound on [`t_integral`]: `π/2` for `n = 2`, `1` for `n ≥ 3`.
pub fn t_integral_bound(n: usize) -> f64 {
    if n == 2 {
        std::f64::consts::FRAC_PI_2
    } else {
        1.0
    }
}

/// `C_n = 2^{n+1} n Vol S^{n−2} / Vol S^{n−1}` times the `t`-integral bound.
pub fn large_r_constant(n: usize) -> f64 {
    2f64.powi(n as i32 + 1) * n as f64 * unit_sphere_area(n - 1) / unit_sphere_area(n) * t_integral_bound(n)
}

/// `M(r) → Vol S^{n−1} e(y)` (or half of it when `y₀ = 0`) as `r → 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitCheck {
    pub expected: f64,
    /// `M(r_min)` as sampled.
    pub raw: f64,
    /// Quadratic extrapolation to `r = 0` through the three smallest radii.
    pub extrapolated: f64,
    pub relative_error: f64,
    pub passed: bool,
}

/// `Vol S^{n−1} e(y) ≤ M(r) + C_n R^{−n} ∫_{D_R(y)} e` for one `y₀ < r ≤ R/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargeRadiusCheck {
    pub radius: f64,
    pub lhs: f64,
    pub shell_mean: f64,
    pub c_n: f64,
    pub correction: f64,
    /// The `t`-integral at this radius, by quadrature.
    pub t_integral: f64,
    pub t_bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub center: Vec<f64>,
    pub y0: f64,
    pub profile: Vec<ShellSample>,
    pub tolerance: f64,
    /// Consecutive pairs on which monotonicity is claimed.
    pub pairs_checked: usize,
    /// Smallest `M(r_{k+1}) − M(r_k)` over those pairs.
    pub worst_step: f64,
    pub monotone: bool,
    pub limit: Option<LimitCheck>,
    pub large_r: Vec<LargeRadiusCheck>,
    pub hypotheses: HypothesisCheck,
    pub verdict: Verdict,
}

fn extrapolate_to_zero(p: &[(f64, f64)]) -> f64 {
    let [(x0, y0), (x1, y1), (x2, y2)] = [p[0], p[1], p[2]];
    y0 * (x1 * x2) / ((x0 - x1) * (x0 - x2)) + y1 * (x0 * x2) / ((x1 - x0) * (x1 - x2)) + y2 * (x0 * x1) / ((x2 - x0) * (x2 - x1))
}

/// Shell-average monotonicity about `center` for a Neumann-subharmonic
/// field. Radii must increase strictly and be at least `4h`.
pub fn monotonicity_suite(e: &ScalarField, center: &[f64], radii: &[f64], tol: Tolerance) -> Result<MonotonicityReport> {
    let domain = e.domain();
    let n = domain.dim();
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("radii must be nonempty and strictly increasing".into()));
    }
    let clipped = domain.kind() == DomainKind::HalfBall;
    let y0 = if clipped { center[0] } else { f64::INFINITY };
    let value = e.value_at(center)?;
    let h = domain.spacing();
    let scale = e.sup().max(1.0);
    let tolerance = tol.at(h) * scale;
    let hypotheses = check_hypotheses(e, &BoundParams::zero(n), hypothesis_tolerance(e, tol.k));
    let profile = shell_profile(e, center, radii)?;

    // monotone for every r when y₀ = 0, and for r ≤ y₀ otherwise
    let claimed: Vec<&ShellSample> = profile.iter().filter(|s| y0 == 0.0 || s.radius <= y0).collect();
    let steps: Vec<f64> = claimed.windows(2).map(|w| w[1].mean - w[0].mean).collect();
    let worst_step = steps.iter().copied().fold(f64::INFINITY, f64::min);
    let monotone = worst_step >= -tolerance;

    let area = unit_sphere_area(n);
    let limit = (claimed.len() >= 3).then(|| {
        let expected = if y0 == 0.0 { 0.5 * area * value } else { area * value };
        let pts: Vec<(f64, f64)> = claimed[..3].iter().map(|s| (s.radius, s.mean)).collect();
        let extrapolated = extrapolate_to_zero(&pts);
        let err = (extrapolated - expected).abs();
        let relative_error = err / expected.abs().max(f64::MIN_POSITIVE);
        LimitCheck {
            expected,
            raw: pts[0].1,
            extrapolated,
            relative_error,
            passed: err <= 0.02 * expected.abs().max(area * h * scale),
        }
    });

    let big_r = domain.radius();
    let large_r = if clipped && y0 > 0.0 && domain.center()[..n] == center[..n] {
        let c_n = large_r_constant(n);
        let energy = integrate(e, None)?;
        let correction = c_n * big_r.powi(-(n as i32)) * energy;
        profile
            .iter()
            .filter(|s| s.radius > y0 && s.radius <= 0.5 * big_r)
            .map(|s| {
                let lhs = area * value;
                LargeRadiusCheck {
                    radius: s.radius,
                    lhs,
                    shell_mean: s.mean,
                    c_n,
                    correction,
                    t_integral: t_integral(n, s.radius / y0),
                    t_bound: t_integral_bound(n),
                    passed: lhs <= s.mean + correction + tolerance,
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    let verdict = if !hypotheses.holds() {
        Verdict::HypothesisViolated
    } else if monotone && limit.as_ref().is_none_or(|l| l.passed) && large_r.iter().all(|c| c.passed) {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    Ok(MonotonicityReport {
        center: center.to_vec(),
        y0,
        profile,
        tolerance,
        pairs_checked: steps.len(),
        worst_step: if steps.is_empty() { 0.0 } else { worst_step },
        monotone,
        limit,
        large_r,
        hypotheses,
        verdict,
    })
}
