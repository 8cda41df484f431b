//! Masked grids: a disk, a half-disk anchored on the flat boundary, and a
//! ball carrying a perturbed metric.
//!
//! cargo run --example domains

use meanvalue::calculus::{integrate, region_volume, Region};
use meanvalue::grid::{make_ball_domain, make_half_ball_domain, metric_deviation, MetricKind, MetricSpec, NodeClass, ScalarField};
use std::sync::Arc;

fn main() -> meanvalue::Result<()> {
    let h = 1.0 / 64.0;
    let disk = Arc::new(make_ball_domain(&[0.0, 0.0], 1.0, h, 2, MetricSpec::identity())?);
    let half = Arc::new(make_half_ball_domain(&[0.0, 0.0], 1.0, h, 2)?);

    for (name, d) in [("disk", &disk), ("half-disk", &half)] {
        println!(
            "{name}: {} nodes in mask ({} interior, {} flat, {} cap), volume {:.6}",
            d.in_mask_count(),
            d.count(NodeClass::Interior),
            d.count(NodeClass::FlatBoundary),
            d.count(NodeClass::CapBoundary),
            region_volume(d, None)?
        );
    }

    // ∫ |x|² over the unit disk is π/2
    let r2 = ScalarField::density(&disk, |x| x[0] * x[0] + x[1] * x[1])?;
    println!("∫|x|² over the disk = {:.6} (π/2 = {:.6})", integrate(&r2, None)?, std::f64::consts::FRAC_PI_2);

    // sub-balls are integrated with the same cached cell weights
    let inner = Region::ball(&[0.25, 0.0], 0.5);
    let one = ScalarField::density(&disk, |_| 1.0)?;
    println!("area of B_0.5 = {:.6} (π/4 = {:.6})", integrate(&one, Some(&inner))?, std::f64::consts::FRAC_PI_4);

    let bent = make_ball_domain(
        &[0.0, 0.0],
        0.5,
        h,
        2,
        MetricSpec::new(MetricKind::Conformal { coefficients: vec![0.02, -0.01] }, 0.05),
    )?;
    println!("conformal metric: measured W^1,∞ deviation {:.4}", metric_deviation(&bent)?);
    Ok(())
}
