use crate::calculus::{laplacian, normal_derivative};
use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// Default density floor, relative to `sup e`.
pub const FLOOR_FRACTION: f64 = 1e-8;

fn fit(samples: impl Iterator<Item = (f64, f64)>, floor: f64, base: f64, linear: f64, exponent: f64) -> Result<f64> {
    let mut required: Option<f64> = None;
    for (e, op) in samples {
        if e <= floor {
            continue;
        }
        let need = (op - base - linear * e) / e.powf(exponent);
        required = Some(required.map_or(need, |r: f64| r.max(need)));
    }
    required
        .map(|r| r.max(0.0))
        .ok_or(Error::AllNodesBelowFloor { floor })
}

/// Smallest `a ≥ 0` with `Δe ≤ A₀ + A₁e + a e^{(n+2)/n}` at every
/// stencil-valid node where `e` exceeds `10⁻⁸ sup e`.
pub fn fit_nonlinearity(e: &ScalarField, a0: f64, a1: f64) -> Result<f64> {
    let n = e.domain().dim() as f64;
    let lap = laplacian(e);
    let floor = FLOOR_FRACTION * e.sup();
    fit(
        lap.iter().map(|(node, v)| (e.value(node), v)),
        floor,
        a0,
        a1,
        (n + 2.0) / n,
    )
}

/// Smallest `b ≥ 0` with `∂e/∂ν ≤ B₀ + B₁e + b e^{(n+1)/n}` on the flat
/// boundary.
pub fn fit_boundary_nonlinearity(e: &ScalarField, b0: f64, b1: f64) -> Result<f64> {
    let n = e.domain().dim() as f64;
    let nd = normal_derivative(e)?;
    let floor = FLOOR_FRACTION * e.sup();
    fit(
        nd.values.iter().map(|&(node, v)| (e.value(node), v)),
        floor,
        b0,
        b1,
        (n + 1.0) / n,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_ball_domain, make_half_ball_domain, MetricSpec};
    use std::sync::Arc;

    #[test]
    fn subharmonic_fields_need_no_nonlinearity() {
        let d = Arc::new(make_ball_domain(&[0.0, 0.0], 1.0, 1.0 / 32.0, 2, MetricSpec::identity()).unwrap());
        let q = ScalarField::density(&d, |x| x[0] * x[0] + x[1] * x[1]).unwrap();
        assert_eq!(fit_nonlinearity(&q, 0.0, 0.0).unwrap(), 0.0);
        let c = ScalarField::density(&d, |_| 2.0).unwrap();
        assert_eq!(fit_nonlinearity(&c, 0.0, 0.0).unwrap(), 0.0);
        let z = ScalarField::density(&d, |_| 0.0).unwrap();
        assert!(matches!(fit_nonlinearity(&z, 0.0, 0.0), Err(Error::AllNodesBelowFloor { .. })));
    }

    #[test]
    fn superharmonic_constant_bound() {
        // Δ(2 − |x|²) = 4 ≤ A₀ needs no nonlinearity once A₀ ≥ 4
        let d = Arc::new(make_ball_domain(&[0.0, 0.0], 1.0, 1.0 / 32.0, 2, MetricSpec::identity()).unwrap());
        let e = ScalarField::density(&d, |x| 2.0 - x[0] * x[0] - x[1] * x[1]).unwrap();
        assert_eq!(fit_nonlinearity(&e, 4.0 + 1e-9, 0.0).unwrap(), 0.0);
        // with A₀ = 0 the worst node is where e is smallest: a = 4 / e_min²
        let e_min = laplacian(&e).iter().map(|(i, _)| e.value(i)).fold(f64::INFINITY, f64::min);
        let a = fit_nonlinearity(&e, 0.0, 0.0).unwrap();
        assert!((a - 4.0 / (e_min * e_min)).abs() < 1e-9, "{a}");
    }

    #[test]
    fn boundary_fit() {
        let d = Arc::new(make_half_ball_domain(&[0.0, 0.0], 1.0, 1.0 / 32.0, 2).unwrap());
        // ∂ν(1 − x₀) = 1 = b e^{3/2} at e = 1
        let e = ScalarField::density(&d, |x| 1.0 + 0.0 * x[1] - x[0] * 0.5).unwrap();
        let b = fit_boundary_nonlinearity(&e, 0.0, 0.0).unwrap();
        assert!((b - 0.5).abs() < 1e-9);
        assert_eq!(fit_boundary_nonlinearity(&e, 0.5, 0.0).unwrap(), 0.0);
    }
}
