//! Shell averages about a boundary point: monotone growth, the small-radius
//! limit, and the large-radius inequality.
//!
//! cargo run --example monotonicity

use meanvalue::calculus::{unit_sphere_area, Tolerance};
use meanvalue::grid::make_half_ball_domain;
use meanvalue::synth::{gen, GeneratorSpec};
use meanvalue::verify::monotonicity_suite;
use std::sync::Arc;

fn main() -> meanvalue::Result<()> {
    let h = 1.0 / 128.0;
    let d = Arc::new(make_half_ball_domain(&[0.0, 0.0], 1.0, h, 2)?);
    let e = gen(&GeneratorSpec::Quadratic { center: vec![0.0, 0.0], amplitude: 1.0, offset: 1.0 }, &d)?.field;

    let radii: Vec<f64> = (0..20).map(|k| (16.0 + 4.0 * k as f64) * h).collect();
    let rep = monotonicity_suite(&e, &[0.0, 0.0], &radii, Tolerance::new(10.0))?;
    for s in rep.profile.iter().step_by(4) {
        println!("r = {:.4}: M(r) = {:.6} ({} nodes, clipped {})", s.radius, s.mean, s.nodes, s.clipped);
    }
    println!("worst step {:.3e} over {} pairs, monotone = {}", rep.worst_step, rep.pairs_checked, rep.monotone);
    if let Some(l) = &rep.limit {
        println!(
            "limit: extrapolated {:.6} against ½ Vol S¹ e(y) = {:.6} ({:.3}%)",
            l.extrapolated,
            0.5 * unit_sphere_area(2),
            100.0 * l.relative_error
        );
    }

    // off the boundary, the large-radius inequality takes over once r > y₀
    let y = [8.0 * h, 0.0];
    let d = Arc::new(make_half_ball_domain(&y, 1.0, h, 2)?);
    let e = gen(&GeneratorSpec::Quadratic { center: vec![0.0, 0.0], amplitude: 1.0, offset: 1.0 }, &d)?.field;
    let rep = monotonicity_suite(&e, &y, &radii, Tolerance::new(10.0))?;
    for c in rep.large_r.iter().step_by(4) {
        println!("r = {:.4}: {:.6} ≤ {:.6} + {:.6} {}", c.radius, c.lhs, c.shell_mean, c.correction, c.passed);
    }
    println!("verdict {:?}", rep.verdict);
    Ok(())
}
