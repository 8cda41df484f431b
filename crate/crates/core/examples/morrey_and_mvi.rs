//! Measuring C on the standard families, then checking the Morrey bound and
//! both nonlinear mean value inequalities.
//!
//! cargo run --example morrey_and_mvi

use meanvalue::calculus::Tolerance;
use meanvalue::constants::{BoundParams, ConstantLedger};
use meanvalue::grid::{make_ball_domain, make_half_ball_domain, MetricSpec, ScalarField};
use meanvalue::synth::{boundary_family, gen, interior_family, GeneratorSpec};
use meanvalue::verify::{estimate_constant, fit_boundary_nonlinearity, fit_nonlinearity, verify_boundary_mvi, verify_interior_mvi, verify_morrey, FamilyKind};
use std::sync::Arc;

fn main() -> meanvalue::Result<()> {
    let tol = Tolerance::new(10.0);
    let h = 1.0 / 64.0;
    let disk = Arc::new(make_ball_domain(&[0.0, 0.0], 1.0, h, 2, MetricSpec::identity())?);
    let half = Arc::new(make_half_ball_domain(&[0.0, 0.0], 1.0, h, 2)?);

    let fam: Vec<ScalarField> = interior_family(&disk).iter().map(|s| gen(s, &disk).map(|g| g.field)).collect::<Result<_, _>>()?;
    let est = estimate_constant(&fam, FamilyKind::Interior, tol)?;
    println!("disk: C = {:.6} (1/π = {:.6}), argmax member {}", est.c, std::f64::consts::FRAC_1_PI, est.argmax);
    for (i, e) in fam.iter().enumerate() {
        let r = verify_morrey(e, est.c, tol)?;
        println!("  member {i:>2}: ratio {:.6} {:?}", r.required_constant(), r.verdict);
    }

    let bfam: Vec<ScalarField> = boundary_family(&half).iter().map(|s| gen(s, &half).map(|g| g.field)).collect::<Result<_, _>>()?;
    let best = estimate_constant(&bfam, FamilyKind::Boundary, tol)?;
    println!("half-disk: C = {:.6} (2/π = {:.6})", best.c, 2.0 * std::f64::consts::FRAC_1_PI);

    // small balls keep the energy under the threshold μ(a, b)
    let small = Arc::new(make_ball_domain(&[0.0, 0.0], 0.25, h / 4.0, 2, MetricSpec::identity())?);
    let small_half = Arc::new(make_half_ball_domain(&[0.0, 0.0], 0.25, h / 4.0, 2)?);

    // Δe = 4 on e ≥ 1.9375: A₀ = 2 absorbs most of it and a covers the rest
    let q = gen(&GeneratorSpec::Quadratic { center: vec![0.0, 0.0], amplitude: -1.0, offset: 2.0 }, &small)?.field;
    let a = fit_nonlinearity(&q, 2.0, 0.0)?;
    let p = BoundParams { a0: 2.0, a, ..BoundParams::zero(2) };
    let ledger = ConstantLedger::configured(2, a, 0.0, est.c)?;
    let r = verify_interior_mvi(&q, &p, &ledger, tol)?;
    println!("interior: a = {a:.4}, lhs {:.6} rhs {:.6} {:?}", r.lhs, r.rhs, r.verdict);

    // and the same on the half-disk, with a linear Neumann slope
    let g = GeneratorSpec::Sum {
        terms: vec![
            GeneratorSpec::Quadratic { center: vec![0.0, 0.0], amplitude: -0.5, offset: 1.5 },
            GeneratorSpec::LinearX0 { slope: -0.5, offset: 0.0 },
        ],
    };
    let e = gen(&g, &small_half)?.field;
    let a = fit_nonlinearity(&e, 2.0, 0.0)?;
    let b = fit_boundary_nonlinearity(&e, 0.5, 0.0)?;
    let p = BoundParams { a0: 2.0, b0: 0.5, a, b, ..BoundParams::zero(2) };
    let ledger = ConstantLedger::configured(2, a, b, best.c)?;
    let r = verify_boundary_mvi(&e, &p, &ledger, tol)?;
    println!("boundary: a = {a:.4} b = {b:.4}, lhs {:.6} rhs {:.6} {:?}", r.lhs, r.rhs, r.verdict);
    Ok(())
}
