//! The Heinz scan on a concentrated density, and the interior comparison
//! function built from its output.
//!
//! cargo run --example heinz_trick

use meanvalue::constants::BoundParams;
use meanvalue::grid::{make_ball_domain, MetricSpec};
use meanvalue::heinz::{check_comparison, comparison_function_interior, heinz_scan, DEFAULT_RHO_RESOLUTION};
use meanvalue::synth::{gen, GeneratorSpec};
use meanvalue::verify::fit_nonlinearity;
use std::sync::Arc;

fn main() -> meanvalue::Result<()> {
    let h = 1.0 / 64.0;
    let d = Arc::new(make_ball_domain(&[0.0, 0.0], 1.0, h, 2, MetricSpec::identity())?);
    let bubble = GeneratorSpec::Bubble { center: vec![0.3, 0.1], lambda: 0.2, amplitude: 1.0 };
    let e = gen(&bubble, &d)?.field;

    let rep = heinz_scan(&e, &[0.0, 0.0], 1.0, DEFAULT_RHO_RESOLUTION)?;
    println!("ρ̄ = {:.4}, c̄ = {:.4}, x̄ = {:?}, ε = {:.4}", rep.rho_bar, rep.c_bar, rep.x_bar, rep.eps);
    for c in &rep.checks {
        println!("  {}: {:.6} ≤ {:.6} {}", c.name, c.lhs, c.rhs, if c.passed { "ok" } else { "FAILED" });
    }

    let a = fit_nonlinearity(&e, 0.0, 0.0)?;
    let p = BoundParams { a, ..BoundParams::zero(2) };
    let v = comparison_function_interior(&e, &rep.x_bar, &p, rep.c_bar)?;
    let r = rep.eps * (1.0 - rep.rho_bar);
    let chk = check_comparison(&v, Some((&rep.x_bar, r)), 10.0 * h)?;
    println!("comparison function: max Δv = {:.3e} (tolerance {:.3e}) passed = {}", chk.max_laplacian, chk.tolerance, chk.passed);
    Ok(())
}
