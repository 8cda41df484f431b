//! Discrete Laplacian convergence and the one-sided normal derivative.
//!
//! cargo run --example operators

use meanvalue::calculus::{laplacian, normal_derivative};
use meanvalue::grid::{make_ball_domain, make_half_ball_domain, MetricSpec, ScalarField};
use std::sync::Arc;

fn main() -> meanvalue::Result<()> {
    // Δ(cos x₀ cosh x₁) = 0, so every stencil value is truncation error
    let mut errs = Vec::new();
    for k in [32.0, 64.0, 128.0] {
        let d = Arc::new(make_ball_domain(&[0.0, 0.0], 1.0, 1.0 / k, 2, MetricSpec::identity())?);
        let e = ScalarField::from_fn(&d, false, |x| x[0].cos() * x[1].cosh())?;
        let err = laplacian(&e).iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        println!("h = 1/{k}: max |Δe| = {err:.3e}");
        errs.push(err);
    }
    for w in errs.windows(2) {
        println!("observed order {:.3}", (w[0] / w[1]).log2());
    }

    // quadratics are reproduced exactly by the second-order one-sided stencil
    let half = Arc::new(make_half_ball_domain(&[0.0, 0.0], 1.0, 1.0 / 64.0, 2)?);
    let q = ScalarField::from_fn(&half, false, |x| 1.0 + 3.0 * x[0] - 2.0 * x[0] * x[0] + x[1] * x[1])?;
    let nd = normal_derivative(&q)?;
    let worst = nd.values.iter().map(|&(_, v)| (v + 3.0).abs()).fold(0.0, f64::max);
    println!("∂ν on {} flat nodes: max |∂ν q − (−3)| = {worst:.2e}", nd.values.len());
    Ok(())
}
